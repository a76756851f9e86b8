// idrisk command-line tool: ingest check-in data, compute venue features,
// generate synthetic datasets, and run identification experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idrisk/idrisk.hpp"

namespace fs = std::filesystem;
using namespace idrisk;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 1;
    double alpha = 1.0;
    int reps = 100;
    int max_test = 10;
    int min_class_checkins = 0; // 0: derive max_test + 1
    std::string out;
    bool verbose = false;
};

void add_experiment_flags(CLI::App* cmd, GlobalOpts& g) {
    cmd->add_option("--seed", g.seed, "Base seed; all randomness derives from it");
    cmd->add_option("--threads", g.threads, "Worker threads (results identical for any value)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", g.alpha, "Multinomial smoothing parameter");
    cmd->add_option("--reps", g.reps, "Attack repetitions per experiment");
    cmd->add_option("--max-test", g.max_test, "Largest test size m");
    cmd->add_option("--min-class-checkins", g.min_class_checkins,
                    "Eligibility floor on in-class check-ins (default max-test + 1)");
}

eval::ExperimentConfig experiment_config(const GlobalOpts& g) {
    eval::ExperimentConfig cfg;
    cfg.alpha = g.alpha;
    cfg.repetitions = g.reps;
    cfg.max_test_size = g.max_test;
    cfg.min_class_checkins = g.min_class_checkins;
    cfg.base_seed = g.seed;
    cfg.threads = g.threads;
    return cfg;
}

std::vector<std::string> load_taxonomy(const std::string& path) {
    if (path.empty()) return ingest::default_taxonomy();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open taxonomy file '" + path + "'");
    return ingest::parse_taxonomy(in);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path + "'");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file '" + path.string() + "'");
    return out;
}

Dataset load_dataset_dir(const std::string& dir, const std::vector<std::string>& taxonomy) {
    fs::path base(dir);
    auto checkins_in = open_input((base / "checkins.csv").string());
    auto venues_in = open_input((base / "venues.csv").string());
    Dataset ds;
    ds.venues = ingest::parse_venues(venues_in, taxonomy);
    ds.checkins = ingest::parse_checkins(checkins_in);
    for (std::size_t i = 0; i < ds.checkins.size(); ++i) {
        const auto& c = ds.checkins[i];
        if (c.region.empty())
            throw ValidationError("dataset check-in #" + std::to_string(i + 1) +
                                  " lacks a region label");
        if (ds.region.empty()) ds.region = c.region;
        else if (c.region != ds.region)
            throw ValidationError("dataset mixes regions '" + ds.region + "' and '" + c.region +
                                  "'");
        if (!ds.venues.count(c.venue_id))
            throw ValidationError("dataset check-in #" + std::to_string(i + 1) +
                                  " references unknown venue '" + c.venue_id + "'");
    }
    if (fs::exists(base / "lineage.json")) {
        std::ifstream lin(base / "lineage.json");
        nlohmann::json j = nlohmann::json::parse(lin);
        for (const auto& entry : j) ds.lineage.push_back(entry.dump());
    }
    return ds;
}

void write_dataset_dir(const fs::path& dir, const Dataset& ds) {
    fs::create_directories(dir);
    {
        auto out = open_output(dir / "checkins.csv");
        ingest::write_checkins(out, ds);
    }
    {
        auto out = open_output(dir / "venues.csv");
        ingest::write_venues(out, ds);
    }
    {
        nlohmann::ordered_json lineage = nlohmann::ordered_json::array();
        for (const auto& entry : ds.lineage) lineage.push_back(nlohmann::ordered_json::parse(entry));
        auto out = open_output(dir / "lineage.json");
        out << lineage.dump(2) << '\n';
    }
}

int cmd_ingest(const std::string& checkins_path, const std::string& venues_path,
               const std::string& regions_path, const std::string& taxonomy_path,
               std::size_t min_checkins, std::size_t min_users, const GlobalOpts& g) {
    auto taxonomy = load_taxonomy(taxonomy_path);
    auto checkins_in = open_input(checkins_path);
    auto venues_in = open_input(venues_path);
    auto checkins = ingest::parse_checkins(checkins_in);
    auto venues = ingest::parse_venues(venues_in, taxonomy);
    RegionConfig region_cfg;
    if (!regions_path.empty()) {
        auto regions_in = open_input(regions_path);
        region_cfg = ingest::parse_region_config(regions_in);
    }

    auto result = ingest::run_pipeline(std::move(checkins), venues, region_cfg, min_checkins,
                                       min_users);
    fs::path out_dir(g.out.empty() ? "." : g.out);
    fs::create_directories(out_dir);

    auto stats_csv = open_output(out_dir / "stats.csv");
    stats_csv << "region,checkins,users,venues,users_per_venue\n";
    nlohmann::ordered_json regions = nlohmann::ordered_json::array();
    for (const auto& ds : result.datasets) {
        write_dataset_dir(out_dir / ds.region, ds);
        auto s = ingest::dataset_stats(ds);
        stats_csv << ds.region << ',' << s.checkins << ',' << s.users << ',' << s.venues << ',';
        if (s.users_per_venue) stats_csv << format_fixed(*s.users_per_venue, 6);
        stats_csv << '\n';
        regions.push_back({{"region", ds.region},
                           {"checkins", s.checkins},
                           {"users", s.users},
                           {"venues", s.venues}});
    }
    nlohmann::ordered_json report = {
        {"report", "ingest"},
        {"config",
         {{"checkins", checkins_path},
          {"venues", venues_path},
          {"regions", regions_path},
          {"min_checkins", min_checkins},
          {"min_users", min_users}}},
        {"dropped_checkins", result.dropped_checkins},
        {"regions", regions}};
    auto stats_json = open_output(out_dir / "stats.json");
    stats_json << report.dump(2) << '\n';

    if (result.datasets.empty())
        std::cerr << "warning: no region met the " << min_users
                  << "-active-user floor; output is empty\n";
    if (g.verbose)
        std::cerr << "ingest: " << result.datasets.size() << " region dataset(s), "
                  << result.dropped_checkins << " check-in(s) outside all regions\n";
    return 0;
}

int cmd_features(const std::string& dataset_dir, const std::string& taxonomy_path,
                 const GlobalOpts& g) {
    auto taxonomy = load_taxonomy(taxonomy_path);
    auto ds = load_dataset_dir(dataset_dir, taxonomy);
    auto feats = features::compute_features(ds, g.threads);
    auto out = open_output(g.out.empty() ? "features.csv" : g.out);
    features::write_features(out, feats, ds.venues);
    return 0;
}

int cmd_synth(const synth::SynthSpec& spec, const GlobalOpts& g) {
    auto out = synth::generate(spec);
    fs::path dir(g.out.empty() ? "synth" : g.out);
    write_dataset_dir(dir, out.dataset);
    {
        auto f = open_output(dir / "features.csv");
        features::write_features(f, out.feature_truth, out.dataset.venues);
    }
    {
        nlohmann::ordered_json echo = {{"report", "synth"}, {"spec", spec.to_json()}};
        auto f = open_output(dir / "spec.json");
        f << echo.dump(2) << '\n';
    }
    return 0;
}

int cmd_attack(const std::string& dataset_dir, const std::string& class_spec_text,
               const std::string& taxonomy_path, const GlobalOpts& g) {
    auto taxonomy = load_taxonomy(taxonomy_path);
    auto ds = load_dataset_dir(dataset_dir, taxonomy);
    auto cfg = experiment_config(g);
    cfg.class_spec = features::VenueClassSpec::parse(class_spec_text);
    cfg.class_spec.validate(taxonomy);
    auto feats = features::compute_features(ds, g.threads);
    auto result = eval::run_experiment(ds, feats, cfg);

    fs::path prefix(g.out.empty() ? "attack" : g.out);
    {
        auto csv = open_output(prefix.string() + ".csv");
        report::write_result_csv(csv, result);
    }
    {
        auto json = open_output(prefix.string() + ".json");
        json << report::experiment_report(result, cfg, ds.lineage).dump(2) << '\n';
    }
    return 0;
}

int cmd_sweep(const std::string& dataset_dir, const std::string& axis_text,
              const std::string& metric_text, const std::string& taxonomy_path,
              const GlobalOpts& g) {
    auto taxonomy = load_taxonomy(taxonomy_path);
    auto ds = load_dataset_dir(dataset_dir, taxonomy);
    auto cfg = experiment_config(g);

    eval::SweepAxis axis;
    if (axis_text == "category") axis = eval::SweepAxis::category;
    else if (axis_text == "popularity") axis = eval::SweepAxis::popularity;
    else if (axis_text == "isolation") axis = eval::SweepAxis::isolation;
    else throw ConfigError("unknown sweep axis '" + axis_text + "'");
    features::Metric metric = features::Metric::visitor_count;
    if (metric_text == "visit_count") metric = features::Metric::visit_count;
    else if (metric_text != "visitor_count")
        throw ConfigError("unknown popularity metric '" + metric_text + "'");

    auto feats = features::compute_features(ds, g.threads);
    auto baseline_cfg = cfg;
    baseline_cfg.class_spec = features::VenueClassSpec::all();
    auto baseline = eval::run_experiment(ds, feats, baseline_cfg);
    auto sweep = eval::sweep(ds, feats, axis, cfg, taxonomy, metric);

    fs::path prefix(g.out.empty() ? "sweep" : g.out);
    {
        auto csv = open_output(prefix.string() + ".csv");
        report::write_sweep_csv(csv, sweep, baseline);
    }
    {
        auto json = open_output(prefix.string() + ".json");
        json << report::sweep_report(sweep, baseline, cfg, ds.lineage).dump(2) << '\n';
    }
    return 0;
}

int cmd_profile(const std::string& dataset_dir, const std::string& baseline_path,
                const std::string& taxonomy_path, const GlobalOpts& g) {
    auto taxonomy = load_taxonomy(taxonomy_path);
    auto ds = load_dataset_dir(dataset_dir, taxonomy);

    std::ifstream in(baseline_path);
    if (!in) throw ConfigError("cannot open baseline report '" + baseline_path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.contains("result")) throw ValidationError("baseline report has no result block");
    auto baseline = report::result_from_json(j.at("result"));
    if (baseline.class_spec.kind != features::ClassKind::all)
        throw ValidationError("profile baseline must be a class=all result");
    if (!baseline.region.empty() && baseline.region != ds.region)
        throw ValidationError("baseline region '" + baseline.region +
                              "' does not match dataset region '" + ds.region + "'");

    auto profiles = eval::user_profiles(ds, baseline);
    eval::ExperimentConfig cfg = experiment_config(g);
    cfg.alpha = baseline.alpha;
    cfg.repetitions = baseline.repetitions;
    cfg.max_test_size = baseline.max_test_size;
    cfg.base_seed = baseline.base_seed;

    fs::path prefix(g.out.empty() ? "profile" : g.out);
    {
        auto csv = open_output(prefix.string() + ".csv");
        report::write_user_profiles_csv(csv, profiles);
    }
    {
        auto json = open_output(prefix.string() + ".json");
        json << report::profile_report(profiles, cfg, ds.lineage).dump(2) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"identification-risk analysis for location check-in data"};
    app.require_subcommand(1);
    GlobalOpts g;

    // ingest
    std::string checkins_path, venues_path, regions_path, taxonomy_path;
    std::size_t min_checkins = 20, min_users = 500;
    auto* ingest_cmd = app.add_subcommand("ingest", "Build per-region datasets from raw files");
    ingest_cmd->add_option("--checkins", checkins_path, "Check-in CSV")->required();
    ingest_cmd->add_option("--venues", venues_path, "Venue attribute CSV")->required();
    ingest_cmd->add_option("--regions", regions_path, "Region bounding-box CSV");
    ingest_cmd->add_option("--taxonomy", taxonomy_path, "Category taxonomy file");
    ingest_cmd->add_option("--min-checkins", min_checkins, "Active-user check-in floor");
    ingest_cmd->add_option("--min-users", min_users, "Active-region user floor");
    ingest_cmd->add_option("--out", g.out, "Output directory")->required();
    ingest_cmd->add_flag("--verbose", g.verbose, "Chatty stderr diagnostics");

    // features
    std::string dataset_dir;
    auto* features_cmd = app.add_subcommand("features", "Export per-venue features");
    features_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    features_cmd->add_option("--taxonomy", taxonomy_path, "Category taxonomy file");
    features_cmd->add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    features_cmd->add_option("--out", g.out, "Output CSV path")->required();

    // synth
    synth::SynthSpec spec;
    std::string layout_text = "uniform-box", fractions_text;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth_cmd->add_option("--users", spec.n_users, "Number of users");
    synth_cmd->add_option("--venues", spec.n_venues, "Number of venues");
    synth_cmd->add_option("--checkins-per-user", spec.checkins_per_user, "Check-ins per user");
    synth_cmd->add_option("--concentration", spec.concentration,
                          "Dirichlet concentration (low = separable)");
    synth_cmd->add_option("--skew", spec.popularity_skew, "Zipf attractiveness exponent");
    synth_cmd->add_option("--shared-core", spec.shared_core, "Globally shared popular venues");
    synth_cmd->add_option("--support", spec.support_size, "Personal venues per user");
    synth_cmd->add_option("--layout", layout_text, "uniform-box or clustered");
    synth_cmd->add_option("--clusters", spec.clusters, "Cluster count for clustered layout");
    synth_cmd->add_option("--sigma", spec.cluster_sigma_deg, "Cluster spread in degrees");
    synth_cmd->add_option("--category-fractions", fractions_text,
                          "e.g. 'Food:0.5,Residence:0.5' (default: uniform taxonomy)");
    synth_cmd->add_option("--seed", spec.seed, "Generator seed");
    synth_cmd->add_option("--out", g.out, "Output directory")->required();

    // attack
    std::string class_spec_text = "all";
    auto* attack_cmd = app.add_subcommand("attack", "Run one identification experiment");
    attack_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    attack_cmd->add_option("--class", class_spec_text,
                           "all | category=<name> | popularity=<dir>:<frac>[:<metric>] | "
                           "isolation=<dir>:<frac>");
    attack_cmd->add_option("--taxonomy", taxonomy_path, "Category taxonomy file");
    add_experiment_flags(attack_cmd, g);
    attack_cmd->add_option("--out", g.out, "Output prefix (.csv/.json)")->required();

    // sweep
    std::string axis_text, metric_text = "visitor_count";
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep venue classes along an axis");
    sweep_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    sweep_cmd->add_option("--axis", axis_text, "category | popularity | isolation")->required();
    sweep_cmd->add_option("--metric", metric_text, "visitor_count | visit_count");
    sweep_cmd->add_option("--taxonomy", taxonomy_path, "Category taxonomy file");
    add_experiment_flags(sweep_cmd, g);
    sweep_cmd->add_option("--out", g.out, "Output prefix (.csv/.json)")->required();

    // profile
    std::string baseline_path;
    auto* profile_cmd = app.add_subcommand("profile", "Per-user entropy vs identifiability");
    profile_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    profile_cmd->add_option("--baseline", baseline_path, "JSON report of a class=all attack")
        ->required();
    profile_cmd->add_option("--taxonomy", taxonomy_path, "Category taxonomy file");
    profile_cmd->add_option("--out", g.out, "Output prefix (.csv/.json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(ingest_cmd))
            return cmd_ingest(checkins_path, venues_path, regions_path, taxonomy_path,
                              min_checkins, min_users, g);
        if (app.got_subcommand(features_cmd)) return cmd_features(dataset_dir, taxonomy_path, g);
        if (app.got_subcommand(synth_cmd)) {
            if (layout_text == "clustered") spec.layout = synth::Layout::clustered;
            else if (layout_text != "uniform-box")
                throw ConfigError("unknown layout '" + layout_text + "'");
            if (!fractions_text.empty()) {
                for (const auto& part : split_csv_row(fractions_text)) {
                    auto pos = part.rfind(':');
                    if (pos == std::string::npos)
                        throw ConfigError("bad category fraction '" + part + "'");
                    spec.category_fractions[part.substr(0, pos)] = std::stod(part.substr(pos + 1));
                }
            }
            return cmd_synth(spec, g);
        }
        if (app.got_subcommand(attack_cmd))
            return cmd_attack(dataset_dir, class_spec_text, taxonomy_path, g);
        if (app.got_subcommand(sweep_cmd))
            return cmd_sweep(dataset_dir, axis_text, metric_text, taxonomy_path, g);
        if (app.got_subcommand(profile_cmd))
            return cmd_profile(dataset_dir, baseline_path, taxonomy_path, g);
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
