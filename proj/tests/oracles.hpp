#ifndef IDRISK_TESTS_ORACLES_HPP
#define IDRISK_TESTS_ORACLES_HPP

// Independent reference implementations used only by tests. Each one takes
// a deliberately different route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "idrisk/eval.hpp"
#include "idrisk/rng.hpp"
#include "idrisk/types.hpp"

namespace oracles {

// Great-circle distance via the atan2 formulation (vs the library's
// asin/haversine route).
inline double haversine_atan2_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kRad = 6371008.8;
    constexpr double d2r = 3.14159265358979323846 / 180.0;
    double phi1 = lat1 * d2r, phi2 = lat2 * d2r;
    double dphi = (lat2 - lat1) * d2r, dlam = (lon2 - lon1) * d2r;
    double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
               std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
    double c = 2.0 * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
    return kRad * c;
}

// Direct-probability candidate scoring: probabilities multiplied term by
// term in ascending order, no logs anywhere.
inline double direct_posterior(const std::map<std::string, int>& counts, double total,
                               double alpha, double vocab,
                               const std::vector<std::string>& test_venues) {
    std::vector<double> terms;
    double denom = total + alpha * vocab;
    for (const auto& v : test_venues) {
        auto it = counts.find(v);
        double n = it == counts.end() ? 0.0 : it->second;
        terms.push_back((n + alpha) / denom);
    }
    std::sort(terms.begin(), terms.end());
    double p = 1.0;
    for (double t : terms) p *= t;
    return p;
}

// Exact rational argmax for alpha values of the form q/4 (covers 1 and
// 0.75): candidate scores are Prod(4*count_i + 4*alpha) / (4*total +
// 4*alpha*vocab)^m, compared by cross-multiplication in 128-bit integers.
// Ties resolve to the lexicographically smallest user, mirroring the
// documented contract but with no floating point involved at all.
struct ExactCandidate {
    std::string user_id;
    std::map<std::string, int> counts;
    long long total = 0;
};

inline std::string exact_rational_argmax(const std::vector<ExactCandidate>& candidates,
                                         const std::vector<std::string>& test_venues,
                                         double alpha, long long vocab) {
    long long alpha4 = std::llround(alpha * 4.0);
    std::string best_user;
    __int128 best_num = -1;
    __int128 best_den = 1;
    for (const auto& cand : candidates) {
        __int128 num = 1;
        for (const auto& v : test_venues) {
            auto it = cand.counts.find(v);
            long long n = it == cand.counts.end() ? 0 : it->second;
            num *= 4 * n + alpha4;
        }
        __int128 den = 1;
        long long d = 4 * cand.total + alpha4 * vocab;
        for (std::size_t i = 0; i < test_venues.size(); ++i) den *= d;
        bool better;
        if (best_num < 0) {
            better = true;
        } else {
            __int128 lhs = num * best_den;
            __int128 rhs = best_num * den;
            better = lhs > rhs || (lhs == rhs && cand.user_id < best_user);
        }
        if (better) {
            best_user = cand.user_id;
            best_num = num;
            best_den = den;
        }
    }
    return best_user;
}

// Re-runs one full repetition of the evaluation protocol independently:
// same derived seeds and pool sampling (the split is the shared input under
// test elsewhere), but scoring via exact rational direct products and an
// exhaustive argmax over the candidates.
struct OracleRepetition {
    std::vector<std::string> eligible_users;
    std::vector<std::vector<int>> success; // [user][m-1]
};

inline OracleRepetition rerun_repetition(const idrisk::Dataset& filtered,
                                         const idrisk::eval::ExperimentConfig& cfg,
                                         int rep_index) {
    std::map<std::string, std::vector<std::string>> venues_by_user;
    for (const auto& c : filtered.checkins) venues_by_user[c.user_id].push_back(c.venue_id);
    const auto floor = static_cast<std::size_t>(cfg.effective_min_class_checkins());

    OracleRepetition out;
    std::map<std::string, std::vector<std::string>> pools;
    std::vector<ExactCandidate> candidates;
    for (const auto& [user, venues] : venues_by_user) {
        if (venues.size() < floor) continue;
        out.eligible_users.push_back(user);
        idrisk::Rng64 rng(idrisk::derive_seed(cfg.base_seed, rep_index, user));
        auto pool_idx = idrisk::eval::sample_pool_indices(venues.size(), cfg.max_test_size, rng);
        std::vector<bool> in_pool(venues.size(), false);
        std::vector<std::string> pool;
        for (auto i : pool_idx) {
            in_pool[i] = true;
            pool.push_back(venues[i]);
        }
        ExactCandidate cand;
        cand.user_id = user;
        for (std::size_t i = 0; i < venues.size(); ++i) {
            if (in_pool[i]) continue;
            ++cand.counts[venues[i]];
            ++cand.total;
        }
        pools.emplace(user, std::move(pool));
        candidates.push_back(std::move(cand));
    }

    auto vocab = static_cast<long long>(filtered.venues.size());
    out.success.resize(out.eligible_users.size());
    for (std::size_t u = 0; u < out.eligible_users.size(); ++u) {
        const auto& user = out.eligible_users[u];
        const auto& pool = pools.at(user);
        for (int m = 1; m <= cfg.max_test_size; ++m) {
            std::vector<std::string> test(pool.begin(), pool.begin() + m);
            std::string winner = exact_rational_argmax(candidates, test, cfg.alpha, vocab);
            out.success[u].push_back(winner == user ? 1 : 0);
        }
    }
    return out;
}

// Textbook single-pass Pearson r (sum formula, no centering), plus a
// two-sided p-value from numerically integrating the t density with
// adaptive Simpson quadrature. Entirely separate from the library's
// centered two-pass r and incomplete-beta p.
inline double pearson_r_sums(std::span<const double> xs, std::span<const double> ys) {
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        syy += ys[i] * ys[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

inline double t_density(double x, double v) {
    double logc = std::lgamma((v + 1.0) / 2.0) - std::lgamma(v / 2.0) -
                  0.5 * std::log(v * 3.14159265358979323846);
    return std::exp(logc - (v + 1.0) / 2.0 * std::log1p(x * x / v));
}

inline double simpson(double a, double b, double v, int depth, double fa, double fm, double fb) {
    double m = (a + b) / 2.0;
    double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    double flm = t_density(lm, v), frm = t_density(rm, v);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 1e-13)
        return left + right + (left + right - whole) / 15.0;
    return simpson(a, m, v, depth - 1, fa, flm, fm) + simpson(m, b, v, depth - 1, fm, frm, fb);
}

// Two-sided p for the t statistic of r with n-2 dof: 2 * integral of the
// t density from |t| to an effectively-infinite cutoff, computed as
// 1 - integral(-|t|, |t|).
inline double pearson_p_quadrature(double r, std::size_t n) {
    double v = static_cast<double>(n - 2);
    double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    double t = std::abs(r) * std::sqrt(v / (1.0 - r2));
    double inner = simpson(-t, t, v, 40, t_density(-t, v), t_density(0.0, v), t_density(t, v));
    return std::max(0.0, 1.0 - inner);
}

} // namespace oracles

#endif // IDRISK_TESTS_ORACLES_HPP
