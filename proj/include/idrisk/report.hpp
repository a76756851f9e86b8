#ifndef IDRISK_REPORT_HPP
#define IDRISK_REPORT_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idrisk/csv.hpp"
#include "idrisk/eval.hpp"
#include "idrisk/stats.hpp"
#include "idrisk/types.hpp"

namespace idrisk::report {

using ordered_json = nlohmann::ordered_json;

// Methodology notes stamped into every JSON report. These name the choices
// a reader needs to interpret the numbers: popularity is computed within
// the dataset (not from any external service), the vocabulary |L| is the
// venue table of the class-filtered dataset, and splits fix the held-out
// pool size with the training set taking all remaining check-ins.
inline ordered_json methodology_notes() {
    return {{"popularity_source", "in-dataset"},
            {"vocab_definition", "venue table of the class-filtered region dataset"},
            {"split_policy", "fixed test pool of max_test_size; training set = remainder"}};
}

// Effective experiment configuration. Execution-only knobs (thread count,
// verbosity) are deliberately absent: they cannot affect results, and
// reports must be byte-identical across them.
inline ordered_json config_json(const eval::ExperimentConfig& cfg) {
    return {{"class", cfg.class_spec.to_string()},
            {"alpha", cfg.alpha},
            {"repetitions", cfg.repetitions},
            {"max_test_size", cfg.max_test_size},
            {"min_class_checkins", cfg.effective_min_class_checkins()},
            {"base_seed", cfg.base_seed},
            {"seed_derivation",
             "splitmix64(splitmix64(splitmix64(base_seed) ^ rep_index) ^ fnv1a64(user_id))"}};
}

inline ordered_json result_json(const eval::AttackResult& r) {
    ordered_json per_m = ordered_json::array();
    for (std::size_t m = 0; m < r.per_m.size(); ++m) {
        ordered_json successes = ordered_json::object();
        for (const auto& [user, n] : r.per_m[m].user_successes) successes[user] = n;
        per_m.push_back({{"m", m + 1},
                         {"accuracy_mean", r.per_m[m].mean_accuracy},
                         {"accuracy_stderr", r.per_m[m].stderr_accuracy},
                         {"user_successes", successes}});
    }
    return {{"class", r.class_spec.to_string()},
            {"region", r.region},
            {"n_users", r.n_users},
            {"n_venues", r.n_venues},
            {"users_per_venue_ratio", r.users_per_venue_ratio},
            {"n_excluded_users", r.n_excluded_users},
            {"repetitions", r.repetitions},
            {"max_test_size", r.max_test_size},
            {"alpha", r.alpha},
            {"base_seed", r.base_seed},
            {"per_m", per_m}};
}

// Inverse of result_json, for commands that consume a previously written
// report (profile reads the attack baseline).
inline eval::AttackResult result_from_json(const nlohmann::json& j) {
    eval::AttackResult r;
    r.class_spec = features::VenueClassSpec::parse(j.at("class").get<std::string>());
    r.region = j.value("region", std::string{});
    r.n_users = j.at("n_users").get<std::size_t>();
    r.n_venues = j.at("n_venues").get<std::size_t>();
    r.users_per_venue_ratio = j.at("users_per_venue_ratio").get<double>();
    r.n_excluded_users = j.at("n_excluded_users").get<std::size_t>();
    r.repetitions = j.at("repetitions").get<int>();
    r.max_test_size = j.at("max_test_size").get<int>();
    r.alpha = j.at("alpha").get<double>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    for (const auto& pm_json : j.at("per_m")) {
        eval::PerM pm;
        pm.mean_accuracy = pm_json.at("accuracy_mean").get<double>();
        pm.stderr_accuracy = pm_json.at("accuracy_stderr").get<double>();
        for (const auto& [user, n] : pm_json.at("user_successes").items())
            pm.user_successes.emplace(user, n.get<int>());
        r.per_m.push_back(std::move(pm));
    }
    if (!r.per_m.empty())
        for (const auto& [user, n] : r.per_m[0].user_successes) r.eligible_users.push_back(user);
    return r;
}

inline ordered_json experiment_report(const eval::AttackResult& r,
                                      const eval::ExperimentConfig& cfg,
                                      const std::vector<std::string>& lineage) {
    ordered_json lin = ordered_json::array();
    for (const auto& entry : lineage) lin.push_back(ordered_json::parse(entry));
    return {{"report", "attack"},
            {"config", config_json(cfg)},
            {"notes", methodology_notes()},
            {"lineage", lin},
            {"result", result_json(r)}};
}

// `class,m,n_users,n_venues,ratio,accuracy_mean,accuracy_stderr` rows.
inline void write_result_csv_header(std::ostream& out, bool with_relative) {
    out << "class,m,n_users,n_venues,ratio,accuracy_mean,accuracy_stderr";
    if (with_relative) out << ",relative_accuracy";
    out << '\n';
}

inline void write_result_rows(std::ostream& out, const eval::AttackResult& r,
                              const std::vector<std::optional<double>>* relative = nullptr) {
    for (std::size_t m = 0; m < r.per_m.size(); ++m) {
        out << r.class_spec.to_string() << ',' << (m + 1) << ',' << r.n_users << ','
            << r.n_venues << ',' << format_fixed(r.users_per_venue_ratio, 6) << ','
            << format_fixed(r.per_m[m].mean_accuracy, 6) << ','
            << format_fixed(r.per_m[m].stderr_accuracy, 6);
        if (relative) {
            out << ',';
            if ((*relative)[m]) out << format_fixed(*(*relative)[m], 6);
        }
        out << '\n';
    }
}

inline void write_result_csv(std::ostream& out, const eval::AttackResult& r) {
    write_result_csv_header(out, false);
    write_result_rows(out, r);
}

inline ordered_json sweep_report(const eval::SweepResult& sweep,
                                 const eval::AttackResult& baseline,
                                 const eval::ExperimentConfig& cfg,
                                 const std::vector<std::string>& lineage) {
    ordered_json cells = ordered_json::array();
    for (const auto& cell : sweep.cells) {
        ordered_json c = {{"class", cell.class_label}};
        if (cell.result) {
            c["result"] = result_json(*cell.result);
            ordered_json rel = ordered_json::array();
            for (const auto& ratio : eval::relative_accuracy(*cell.result, baseline)) {
                if (ratio) rel.push_back(*ratio);
                else rel.push_back(nullptr);
            }
            c["relative_accuracy"] = rel;
        } else {
            c["skipped"] = cell.skip_reason;
        }
        cells.push_back(std::move(c));
    }
    return {{"report", "sweep"},
            {"config", config_json(cfg)},
            {"notes", methodology_notes()},
            {"lineage", [&] {
                 ordered_json lin = ordered_json::array();
                 for (const auto& entry : lineage) lin.push_back(ordered_json::parse(entry));
                 return lin;
             }()},
            {"baseline", result_json(baseline)},
            {"cells", cells}};
}

inline void write_sweep_csv(std::ostream& out, const eval::SweepResult& sweep,
                            const eval::AttackResult& baseline) {
    write_result_csv_header(out, true);
    auto baseline_rel = eval::relative_accuracy(baseline, baseline);
    write_result_rows(out, baseline, &baseline_rel);
    for (const auto& cell : sweep.cells) {
        if (!cell.result) continue;
        auto rel = eval::relative_accuracy(*cell.result, baseline);
        write_result_rows(out, *cell.result, &rel);
    }
}

// `user_id,entropy_bits,per_user_accuracy,n_checkins`, sorted by user id.
inline void write_user_profiles_csv(std::ostream& out,
                                    const std::vector<eval::UserProfileStats>& profiles) {
    out << "user_id,entropy_bits,per_user_accuracy,n_checkins\n";
    for (const auto& p : profiles)
        out << p.user_id << ',' << format_fixed(p.entropy_bits, 6) << ','
            << format_fixed(p.per_user_accuracy, 6) << ',' << p.n_checkins << '\n';
}

inline ordered_json profile_report(const std::vector<eval::UserProfileStats>& profiles,
                                   const eval::ExperimentConfig& cfg,
                                   const std::vector<std::string>& lineage) {
    ordered_json users = ordered_json::array();
    std::vector<double> xs, ys;
    for (const auto& p : profiles) {
        users.push_back({{"user_id", p.user_id},
                         {"entropy_bits", p.entropy_bits},
                         {"per_user_accuracy", p.per_user_accuracy},
                         {"n_checkins", p.n_checkins}});
        xs.push_back(p.entropy_bits);
        ys.push_back(p.per_user_accuracy);
    }
    ordered_json corr;
    try {
        auto pr = stats::pearson(xs, ys);
        corr = {{"r", pr.r},
                {"p_value", pr.p_value},
                {"method", pr.method == stats::PValueMethod::student_t ? "student_t"
                                                                       : "permutation"}};
    } catch (const Error& e) {
        corr = {{"undefined", true},
                {"reason", e.what()},
                {"entropy_stddev", stats::sample_stddev(xs)},
                {"accuracy_stddev", stats::sample_stddev(ys)}};
    }
    ordered_json lin = ordered_json::array();
    for (const auto& entry : lineage) lin.push_back(ordered_json::parse(entry));
    return {{"report", "profile"},
            {"config", config_json(cfg)},
            {"notes", methodology_notes()},
            {"lineage", lin},
            {"entropy_accuracy_correlation", corr},
            {"users", users}};
}

} // namespace idrisk::report

#endif // IDRISK_REPORT_HPP
