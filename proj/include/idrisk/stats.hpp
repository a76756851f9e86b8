#ifndef IDRISK_STATS_HPP
#define IDRISK_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "idrisk/rng.hpp"
#include "idrisk/types.hpp"

namespace idrisk::stats {

inline double mean(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
inline double sample_stddev(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

// Shannon entropy in bits of a count histogram; 0 log 0 := 0.
inline double entropy_bits(std::span<const std::int64_t> counts) {
    std::int64_t total = 0;
    for (auto c : counts) {
        if (c < 0) throw ValidationError("entropy: negative count");
        total += c;
    }
    if (total == 0) throw ValidationError("entropy: empty histogram");
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

namespace detail {

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the regularized incomplete beta (Lentz).
inline double incbeta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        double m2 = 2.0 * m;
        double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + num * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double mult = d * c;
        h *= mult;
        if (std::abs(mult - 1.0) < 1e-15) break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw ConfigError("incomplete beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(a * std::log(x) + b * std::log1p(-x) - detail::log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::incbeta_cf(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - detail::log_beta(b, a)) *
                     detail::incbeta_cf(1.0 - x, b, a) / b;
}

enum class PValueMethod { student_t, permutation };

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;
    PValueMethod method = PValueMethod::student_t;
};

inline double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("pearson: length mismatch");
    if (xs.size() < 3) throw ValidationError("pearson: need at least 3 points");
    const double mx = mean(xs), my = mean(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ValidationError("pearson: zero variance, correlation undefined");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

// Product-moment correlation with a two-sided p-value. For n >= 5 the
// p-value comes from the t statistic via the regularized incomplete beta;
// shorter inputs use a seeded permutation test (10,000 shuffles) where the
// t approximation has no business being trusted.
inline PearsonResult pearson(std::span<const double> xs, std::span<const double> ys,
                             std::uint64_t permutation_seed = 0x9e3779b97f4a7c15ULL) {
    PearsonResult out;
    out.r = pearson_r(xs, ys);
    const std::size_t n = xs.size();
    if (n >= 5) {
        out.method = PValueMethod::student_t;
        double r2 = out.r * out.r;
        if (r2 >= 1.0) {
            out.p_value = 0.0;
            return out;
        }
        double v = static_cast<double>(n - 2);
        double t2 = r2 * v / (1.0 - r2);
        out.p_value = regularized_incomplete_beta(v / (v + t2), v / 2.0, 0.5);
        return out;
    }
    out.method = PValueMethod::permutation;
    const int kShuffles = 10000;
    Rng64 rng(permutation_seed);
    std::vector<double> perm(ys.begin(), ys.end());
    double threshold = std::abs(out.r) - 1e-12;
    int at_least = 0;
    for (int s = 0; s < kShuffles; ++s) {
        for (std::size_t i = perm.size() - 1; i > 0; --i) {
            auto j = rng.bounded(i + 1);
            std::swap(perm[i], perm[j]);
        }
        if (std::abs(pearson_r(xs, perm)) >= threshold) ++at_least;
    }
    out.p_value = static_cast<double>(at_least + 1) / static_cast<double>(kShuffles + 1);
    return out;
}

} // namespace idrisk::stats

#endif // IDRISK_STATS_HPP
