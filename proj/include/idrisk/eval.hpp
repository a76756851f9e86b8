#ifndef IDRISK_EVAL_HPP
#define IDRISK_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idrisk/attack.hpp"
#include "idrisk/features.hpp"
#include "idrisk/parallel.hpp"
#include "idrisk/rng.hpp"
#include "idrisk/stats.hpp"
#include "idrisk/types.hpp"

namespace idrisk::eval {

struct ExperimentConfig {
    double alpha = 1.0;
    int repetitions = 100;
    int max_test_size = 10;
    // 0 means "derive": max_test_size + 1, the smallest value leaving every
    // eligible user a non-empty training set.
    int min_class_checkins = 0;
    std::uint64_t base_seed = 0;
    features::VenueClassSpec class_spec = features::VenueClassSpec::all();
    int threads = 1;

    int effective_min_class_checkins() const {
        return min_class_checkins == 0 ? max_test_size + 1 : min_class_checkins;
    }

    void validate() const {
        if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
        if (max_test_size < 1) throw ConfigError("max_test_size must be >= 1");
        if (max_test_size > attack::kMaxTestSize)
            throw ConfigError("max_test_size exceeds supported limit");
        if (effective_min_class_checkins() < max_test_size + 1)
            throw ConfigError("min_class_checkins must be at least max_test_size + 1");
        if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
        if (threads < 1) throw ConfigError("threads must be >= 1");
    }
};

// Ordered pool of max_test_size indices sampled uniformly without
// replacement (partial Fisher-Yates). The test set for size m is the first
// m pool entries, so the training set is fixed while m varies.
inline std::vector<std::uint32_t> sample_pool_indices(std::size_t n, int pool_size, Rng64& rng) {
    if (n < static_cast<std::size_t>(pool_size) + 1)
        throw ValidationError("user needs more check-ins than the test pool size");
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (int i = 0; i < pool_size; ++i) {
        std::size_t j = static_cast<std::size_t>(i) +
                        rng.bounded(static_cast<std::uint64_t>(n - static_cast<std::size_t>(i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(pool_size));
    return idx;
}

struct SplitResult {
    std::vector<CheckIn> train;
    std::vector<CheckIn> test_pool;
};

// Train/test split for one user. Training check-ins keep their original
// order; the pool keeps sampling order.
inline SplitResult split_train_test(const std::vector<CheckIn>& user_checkins, int max_test_size,
                                    Rng64& rng) {
    auto pool_idx = sample_pool_indices(user_checkins.size(), max_test_size, rng);
    std::vector<bool> in_pool(user_checkins.size(), false);
    SplitResult out;
    out.test_pool.reserve(pool_idx.size());
    for (auto i : pool_idx) {
        in_pool[i] = true;
        out.test_pool.push_back(user_checkins[i]);
    }
    out.train.reserve(user_checkins.size() - pool_idx.size());
    for (std::size_t i = 0; i < user_checkins.size(); ++i)
        if (!in_pool[i]) out.train.push_back(user_checkins[i]);
    return out;
}

struct PerM {
    double mean_accuracy = 0.0;
    double stderr_accuracy = 0.0;
    std::map<std::string, int> user_successes; // over all repetitions
};

struct AttackResult {
    features::VenueClassSpec class_spec;
    std::string region;
    std::size_t n_users = 0;  // k: eligible users (candidates == targets)
    std::size_t n_venues = 0; // |L|: venue table of the filtered dataset
    double users_per_venue_ratio = 0.0;
    std::vector<PerM> per_m; // index m-1
    std::vector<std::string> eligible_users;
    std::size_t n_excluded_users = 0; // below the in-class check-in floor
    int repetitions = 0;
    int max_test_size = 0;
    double alpha = 1.0;
    std::uint64_t base_seed = 0;
};

namespace detail {

// Interned view of a class-filtered dataset plus everything a repetition
// needs. Candidate indices follow lexicographic user-id order, so an
// index-level tie break is exactly the id-level one.
class Engine {
public:
    Engine(const Dataset& filtered, const ExperimentConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        vocab_size_ = filtered.venues.size();
        if (vocab_size_ == 0)
            throw InfeasibleError("class '" + cfg.class_spec.to_string() + "' selects no venues");
        std::map<std::string, std::int32_t> venue_index;
        for (const auto& [id, v] : filtered.venues)
            venue_index.emplace(id, static_cast<std::int32_t>(venue_index.size()));

        std::map<std::string, std::vector<std::int32_t>> per_user;
        for (const auto& c : filtered.checkins) {
            auto it = venue_index.find(c.venue_id);
            if (it == venue_index.end())
                throw ValidationError("check-in references venue '" + c.venue_id +
                                      "' missing from the filtered venue table");
            per_user[c.user_id].push_back(it->second);
        }
        const auto floor = static_cast<std::size_t>(cfg_.effective_min_class_checkins());
        for (auto& [user, venues] : per_user) {
            if (venues.size() >= floor) {
                user_ids_.push_back(user);
                user_checkins_.push_back(std::move(venues));
            } else {
                ++excluded_users_;
            }
        }
        if (user_ids_.empty())
            throw InfeasibleError("no eligible users for class '" + cfg.class_spec.to_string() +
                                  "' (need >= " + std::to_string(floor) + " in-class check-ins)");
    }

    std::size_t n_users() const { return user_ids_.size(); }
    std::size_t vocab_size() const { return vocab_size_; }
    std::size_t excluded_users() const { return excluded_users_; }
    const std::vector<std::string>& user_ids() const { return user_ids_; }

    // Success bits for one repetition, bits[u * max_test_size + (m-1)].
    void run_rep(int rep_index, std::vector<std::uint8_t>& bits) const {
        const int M = cfg_.max_test_size;
        const std::size_t k = user_ids_.size();
        const double alpha = cfg_.alpha;
        const auto vocab = static_cast<double>(vocab_size_);
        bits.assign(k * static_cast<std::size_t>(M), 0);

        // Split every user, tally training counts.
        std::vector<std::vector<std::uint32_t>> pools(k);
        std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> counts(k);
        std::vector<double> totals(k);
        std::vector<std::int32_t> scratch;
        for (std::size_t u = 0; u < k; ++u) {
            Rng64 rng(derive_seed(cfg_.base_seed, static_cast<std::uint64_t>(rep_index),
                                  user_ids_[u]));
            const auto& venues = user_checkins_[u];
            pools[u] = sample_pool_indices(venues.size(), M, rng);
            scratch.clear();
            std::vector<bool> in_pool(venues.size(), false);
            for (auto i : pools[u]) in_pool[i] = true;
            for (std::size_t i = 0; i < venues.size(); ++i)
                if (!in_pool[i]) scratch.push_back(venues[i]);
            std::sort(scratch.begin(), scratch.end());
            auto& cs = counts[u];
            for (std::size_t i = 0; i < scratch.size();) {
                std::size_t j = i;
                while (j < scratch.size() && scratch[j] == scratch[i]) ++j;
                cs.emplace_back(scratch[i], static_cast<std::int32_t>(j - i));
                i = j;
            }
            totals[u] = static_cast<double>(scratch.size());
        }

        // Venue postings over training counts.
        std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> postings(vocab_size_);
        for (std::size_t u = 0; u < k; ++u)
            for (const auto& [venue, count] : counts[u])
                postings[static_cast<std::size_t>(venue)].emplace_back(
                    static_cast<std::int32_t>(u), count);

        // Prefix scores of an all-unseen candidate, fixed per candidate for
        // the whole repetition. Computed through the shared scorer so both
        // paths agree bit-for-bit.
        const std::int32_t zeros[attack::kMaxTestSize] = {};
        std::vector<double> zero_prefix(k * static_cast<std::size_t>(M));
        for (std::size_t u = 0; u < k; ++u)
            attack::detail::score_prefixes(zeros, M, totals[u], alpha, vocab,
                                           &zero_prefix[u * static_cast<std::size_t>(M)]);

        std::vector<std::int32_t> slot(k * static_cast<std::size_t>(M), 0);
        std::vector<std::uint8_t> touched(k, 0);
        std::vector<std::int32_t> touched_list;
        double cand_scores[attack::kMaxTestSize];
        std::vector<double> best(static_cast<std::size_t>(M));
        std::vector<std::int32_t> best_idx(static_cast<std::size_t>(M));

        for (std::size_t target = 0; target < k; ++target) {
            // Gather candidate counts at the target's pool venues.
            touched_list.clear();
            const auto& venues = user_checkins_[target];
            for (int j = 0; j < M; ++j) {
                std::int32_t pool_venue = venues[pools[target][static_cast<std::size_t>(j)]];
                for (const auto& [cand, count] : postings[static_cast<std::size_t>(pool_venue)]) {
                    if (!touched[static_cast<std::size_t>(cand)]) {
                        touched[static_cast<std::size_t>(cand)] = 1;
                        touched_list.push_back(cand);
                    }
                    slot[static_cast<std::size_t>(cand) * M + static_cast<std::size_t>(j)] = count;
                }
            }
            std::sort(touched_list.begin(), touched_list.end());

            std::fill(best.begin(), best.end(), -std::numeric_limits<double>::infinity());
            std::fill(best_idx.begin(), best_idx.end(), -1);
            for (std::size_t c = 0; c < k; ++c) {
                if (touched[c]) continue;
                const double* zp = &zero_prefix[c * static_cast<std::size_t>(M)];
                for (int m = 0; m < M; ++m) {
                    if (zp[m] > best[static_cast<std::size_t>(m)] ||
                        (zp[m] == best[static_cast<std::size_t>(m)] &&
                         static_cast<std::int32_t>(c) < best_idx[static_cast<std::size_t>(m)])) {
                        best[static_cast<std::size_t>(m)] = zp[m];
                        best_idx[static_cast<std::size_t>(m)] = static_cast<std::int32_t>(c);
                    }
                }
            }
            for (std::int32_t c : touched_list) {
                attack::detail::score_prefixes(&slot[static_cast<std::size_t>(c) * M], M,
                                               totals[static_cast<std::size_t>(c)], alpha, vocab,
                                               cand_scores);
                for (int m = 0; m < M; ++m) {
                    if (cand_scores[m] > best[static_cast<std::size_t>(m)] ||
                        (cand_scores[m] == best[static_cast<std::size_t>(m)] &&
                         c < best_idx[static_cast<std::size_t>(m)])) {
                        best[static_cast<std::size_t>(m)] = cand_scores[m];
                        best_idx[static_cast<std::size_t>(m)] = c;
                    }
                }
            }
            for (int m = 0; m < M; ++m)
                bits[target * static_cast<std::size_t>(M) + static_cast<std::size_t>(m)] =
                    best_idx[static_cast<std::size_t>(m)] == static_cast<std::int32_t>(target);

            // Reset scratch for the next target.
            for (std::int32_t c : touched_list) {
                touched[static_cast<std::size_t>(c)] = 0;
                for (int j = 0; j < M; ++j)
                    slot[static_cast<std::size_t>(c) * M + static_cast<std::size_t>(j)] = 0;
            }
        }
    }

private:
    ExperimentConfig cfg_;
    std::vector<std::string> user_ids_;
    std::vector<std::vector<std::int32_t>> user_checkins_;
    std::size_t vocab_size_ = 0;
    std::size_t excluded_users_ = 0;
};

} // namespace detail

struct RepetitionResult {
    std::vector<std::string> eligible_users;
    // success[user][m-1]
    std::vector<std::vector<std::uint8_t>> success;
};

// One Monte-Carlo repetition on an already class-filtered dataset: split
// every eligible user with seed derive_seed(base_seed, rep_index, user_id),
// build the bank from all training data, identify each user's first-m pool
// check-ins for every m.
inline RepetitionResult run_repetition(const Dataset& filtered, const ExperimentConfig& cfg,
                                       int rep_index) {
    detail::Engine engine(filtered, cfg);
    std::vector<std::uint8_t> bits;
    engine.run_rep(rep_index, bits);
    RepetitionResult out;
    out.eligible_users = engine.user_ids();
    out.success.resize(engine.n_users());
    for (std::size_t u = 0; u < engine.n_users(); ++u)
        out.success[u].assign(bits.begin() + u * cfg.max_test_size,
                              bits.begin() + (u + 1) * cfg.max_test_size);
    return out;
}

// The full protocol: class filter, `repetitions` seeded repetitions
// (parallel over repetitions; integer tallies aggregated in repetition
// order, so results are identical for any thread count), then mean and
// standard error per test size.
inline AttackResult run_experiment(const Dataset& ds, const features::FeatureMap& feats,
                                   const ExperimentConfig& cfg) {
    cfg.validate();
    Dataset filtered = features::filter_by_class(ds, cfg.class_spec, feats);
    detail::Engine engine(filtered, cfg);

    const int R = cfg.repetitions;
    const int M = cfg.max_test_size;
    const std::size_t k = engine.n_users();
    std::vector<std::vector<std::uint8_t>> rep_bits(static_cast<std::size_t>(R));
    parallel_for_index(static_cast<std::size_t>(R), cfg.threads,
                       [&](std::size_t rep) { engine.run_rep(static_cast<int>(rep), rep_bits[rep]); });

    AttackResult result;
    result.class_spec = cfg.class_spec;
    result.region = ds.region;
    result.n_users = k;
    result.n_venues = engine.vocab_size();
    result.users_per_venue_ratio =
        static_cast<double>(k) / static_cast<double>(engine.vocab_size());
    result.eligible_users = engine.user_ids();
    result.n_excluded_users = engine.excluded_users();
    result.repetitions = R;
    result.max_test_size = M;
    result.alpha = cfg.alpha;
    result.base_seed = cfg.base_seed;
    result.per_m.resize(static_cast<std::size_t>(M));

    std::vector<double> rep_accuracy(static_cast<std::size_t>(R));
    for (int m = 0; m < M; ++m) {
        auto& pm = result.per_m[static_cast<std::size_t>(m)];
        std::vector<int> successes(k, 0);
        for (int rep = 0; rep < R; ++rep) {
            int hit = 0;
            const auto& bits = rep_bits[static_cast<std::size_t>(rep)];
            for (std::size_t u = 0; u < k; ++u) {
                int b = bits[u * static_cast<std::size_t>(M) + static_cast<std::size_t>(m)];
                hit += b;
                successes[u] += b;
            }
            rep_accuracy[static_cast<std::size_t>(rep)] =
                static_cast<double>(hit) / static_cast<double>(k);
        }
        pm.mean_accuracy = stats::mean(rep_accuracy);
        pm.stderr_accuracy =
            stats::sample_stddev(rep_accuracy) / std::sqrt(static_cast<double>(R));
        for (std::size_t u = 0; u < k; ++u)
            pm.user_successes.emplace(result.eligible_users[u], successes[u]);
    }
    return result;
}

// Per-m ratio of class accuracy to the all-venues baseline on the same
// region; absent where the baseline accuracy is zero.
inline std::vector<std::optional<double>> relative_accuracy(const AttackResult& class_result,
                                                            const AttackResult& baseline) {
    if (class_result.per_m.size() != baseline.per_m.size())
        throw ValidationError("relative accuracy: mismatched test-size ranges");
    std::vector<std::optional<double>> out;
    out.reserve(class_result.per_m.size());
    for (std::size_t m = 0; m < class_result.per_m.size(); ++m) {
        double b = baseline.per_m[m].mean_accuracy;
        if (b == 0.0) out.push_back(std::nullopt);
        else out.push_back(class_result.per_m[m].mean_accuracy / b);
    }
    return out;
}

// Shannon entropy (bits) of the user's venue-frequency histogram.
inline double user_entropy(std::span<const CheckIn> user_checkins) {
    if (user_checkins.empty()) throw ValidationError("user_entropy: no check-ins");
    std::map<std::string, std::int64_t> hist;
    for (const auto& c : user_checkins) ++hist[c.venue_id];
    std::vector<std::int64_t> counts;
    counts.reserve(hist.size());
    for (const auto& [venue, n] : hist) counts.push_back(n);
    return stats::entropy_bits(counts);
}

enum class SweepAxis { category, popularity, isolation };

struct SweepCell {
    std::string class_label;
    std::optional<AttackResult> result; // absent: no eligible users
    std::string skip_reason;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::category;
    std::vector<SweepCell> cells;
};

// One experiment per venue class along an axis: every taxonomy category, or
// the {0.1..1.0} x {top, least} percentile grid. Cells with no eligible
// users are reported as absent rather than failing the sweep.
inline SweepResult sweep(const Dataset& ds, const features::FeatureMap& feats, SweepAxis axis,
                         const ExperimentConfig& base_cfg,
                         const std::vector<std::string>& taxonomy = ingest::default_taxonomy(),
                         features::Metric popularity_metric = features::Metric::visitor_count) {
    SweepResult out;
    out.axis = axis;
    std::vector<features::VenueClassSpec> specs;
    if (axis == SweepAxis::category) {
        for (const auto& cat : taxonomy) specs.push_back(features::VenueClassSpec::for_category(cat));
    } else {
        for (int tenth = 1; tenth <= 10; ++tenth) {
            double fraction = static_cast<double>(tenth) / 10.0;
            for (auto dir : {features::Direction::top, features::Direction::least}) {
                if (axis == SweepAxis::popularity)
                    specs.push_back(
                        features::VenueClassSpec::for_popularity(dir, fraction, popularity_metric));
                else
                    specs.push_back(features::VenueClassSpec::for_isolation(dir, fraction));
            }
        }
    }
    for (const auto& spec : specs) {
        ExperimentConfig cfg = base_cfg;
        cfg.class_spec = spec;
        SweepCell cell;
        cell.class_label = spec.to_string();
        try {
            cell.result = run_experiment(ds, feats, cfg);
        } catch (const InfeasibleError& e) {
            cell.skip_reason = e.what();
        }
        out.cells.push_back(std::move(cell));
    }
    return out;
}

struct UserProfileStats {
    std::string user_id;
    double entropy_bits = 0.0;
    double per_user_accuracy = 0.0; // at m = max_test_size
    std::size_t n_checkins = 0;
};

// Per-user identifiability profile against a baseline (class = all) result:
// check-in entropy and the fraction of repetitions identifying the user at
// the largest test size.
inline std::vector<UserProfileStats> user_profiles(const Dataset& ds,
                                                   const AttackResult& baseline) {
    if (baseline.per_m.empty()) throw ValidationError("baseline result has no per-m data");
    const auto& last = baseline.per_m.back();
    std::map<std::string, std::vector<CheckIn>> by_user;
    for (const auto& c : ds.checkins) by_user[c.user_id].push_back(c);

    std::vector<UserProfileStats> out;
    for (const auto& user : baseline.eligible_users) {
        auto it = by_user.find(user);
        if (it == by_user.end())
            throw ValidationError("baseline user '" + user + "' not present in the dataset");
        UserProfileStats s;
        s.user_id = user;
        s.entropy_bits = user_entropy(it->second);
        s.per_user_accuracy = static_cast<double>(last.user_successes.at(user)) /
                              static_cast<double>(baseline.repetitions);
        s.n_checkins = it->second.size();
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace idrisk::eval

#endif // IDRISK_EVAL_HPP
