#ifndef IDRISK_ATTACK_HPP
#define IDRISK_ATTACK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "idrisk/csv.hpp"
#include "idrisk/types.hpp"

namespace idrisk::attack {

// Maximum anonymous check-ins scored per test set. The evaluation protocol
// sweeps 1..10; the scorer's scratch arrays are sized for a little slack.
inline constexpr int kMaxTestSize = 64;

namespace detail {

// Prefix log-likelihood scores for one candidate over an ordered test set.
//
//   term_i   = log((count_i + alpha) / (total + alpha * vocab))
//   out[m-1] = sum of term_1..term_m
//
// Terms are summed in ascending value order (insertion-sorted prefix,
// re-accumulated per m). The fixed order makes scores a function of the
// term multiset alone, so candidates whose smoothed probabilities are a
// permutation of each other tie bit-for-bit and the lexicographic tie rule
// stays meaningful. Shared by identify(), log_likelihood() and the batch
// evaluation engine so all routes agree exactly.
inline void score_prefixes(const std::int32_t* counts, int m, double total, double alpha,
                           double vocab, double* out) {
    const double denom = total + alpha * vocab;
    double sorted_terms[kMaxTestSize];
    bool all_zero = true;
    for (int i = 0; i < m; ++i)
        if (counts[i] != 0) {
            all_zero = false;
            break;
        }
    if (all_zero) {
        // One shared term; the sorted prefix sum degenerates to a running
        // accumulation of it.
        const double t = std::log((0.0 + alpha) / denom);
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            acc += t;
            out[i] = acc;
        }
        return;
    }
    for (int i = 0; i < m; ++i) {
        const double t = std::log((static_cast<double>(counts[i]) + alpha) / denom);
        int j = i;
        while (j > 0 && sorted_terms[j - 1] > t) {
            sorted_terms[j] = sorted_terms[j - 1];
            --j;
        }
        sorted_terms[j] = t;
        double acc = 0.0;
        for (int k = 0; k <= i; ++k) acc += sorted_terms[k];
        out[i] = acc;
    }
}

} // namespace detail

// Smoothed multinomial over the venue vocabulary for one user. `counts`
// holds training check-in tallies for visited venues; every other venue in
// the vocabulary gets the smoothing floor alpha / (total + alpha * |L|).
struct UserModel {
    std::string user_id;
    std::map<std::string, std::int32_t> counts;
    std::int64_t total = 0;
    double alpha = 1.0;
    std::size_t vocab_size = 0;
    // Present on bank-built models; lets log_likelihood reject test venues
    // outside the vocabulary. Standalone models only know the vocab size.
    std::shared_ptr<const std::set<std::string>> vocabulary;

    double prob(const std::string& venue_id) const {
        auto it = counts.find(venue_id);
        double n = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        return (n + alpha) / (static_cast<double>(total) + alpha * static_cast<double>(vocab_size));
    }
};

inline UserModel build_user_model(std::string user_id, std::span<const CheckIn> train,
                                  double alpha, std::size_t vocab_size) {
    if (!(alpha > 0.0)) throw ConfigError("smoothing parameter alpha must be > 0");
    if (vocab_size < 1) throw ConfigError("vocabulary must contain at least one venue");
    UserModel m;
    m.user_id = std::move(user_id);
    m.alpha = alpha;
    m.vocab_size = vocab_size;
    for (const auto& c : train) {
        ++m.counts[c.venue_id];
        ++m.total;
    }
    if (m.counts.size() > vocab_size)
        throw ValidationError("user '" + m.user_id + "' visits more venues than the vocabulary holds");
    return m;
}

// Sum over the test set of ln P(check-in | user), Eq.-style conditional
// independence. Finite for any input thanks to smoothing.
inline double log_likelihood(const UserModel& model, std::span<const CheckIn> test) {
    if (test.empty()) throw ValidationError("log_likelihood: empty test set");
    if (test.size() > static_cast<std::size_t>(kMaxTestSize))
        throw ConfigError("test set exceeds supported size");
    std::int32_t counts[kMaxTestSize];
    for (std::size_t i = 0; i < test.size(); ++i) {
        const std::string& venue = test[i].venue_id;
        if (model.vocabulary && !model.vocabulary->count(venue))
            throw ValidationError("test venue '" + venue + "' outside the model vocabulary");
        auto it = model.counts.find(venue);
        counts[i] = it == model.counts.end() ? 0 : it->second;
    }
    double out[kMaxTestSize];
    detail::score_prefixes(counts, static_cast<int>(test.size()),
                           static_cast<double>(model.total), model.alpha,
                           static_cast<double>(model.vocab_size), out);
    return out[test.size() - 1];
}

// Candidate models plus a per-user log prior (uniform by default). All
// models share alpha and the vocabulary.
struct ModelBank {
    std::map<std::string, UserModel> models;
    std::map<std::string, double> log_prior;
    double alpha = 1.0;
    std::size_t vocab_size = 0;
    std::shared_ptr<const std::set<std::string>> vocabulary;
};

inline ModelBank build_model_bank(const std::map<std::string, std::vector<CheckIn>>& train_by_user,
                                  double alpha, std::set<std::string> vocabulary) {
    if (train_by_user.empty()) throw ValidationError("model bank needs at least one user");
    ModelBank bank;
    bank.alpha = alpha;
    bank.vocabulary = std::make_shared<const std::set<std::string>>(std::move(vocabulary));
    bank.vocab_size = bank.vocabulary->size();
    double uniform = -std::log(static_cast<double>(train_by_user.size()));
    for (const auto& [user, train] : train_by_user) {
        for (const auto& c : train)
            if (!bank.vocabulary->count(c.venue_id))
                throw ValidationError("training venue '" + c.venue_id +
                                      "' outside the vocabulary");
        UserModel m = build_user_model(user, train, alpha, bank.vocab_size);
        m.vocabulary = bank.vocabulary;
        bank.models.emplace(user, std::move(m));
        bank.log_prior.emplace(user, uniform);
    }
    return bank;
}

struct IdentifyResult {
    std::string user_id;
    std::map<std::string, double> log_posterior;
};

// argmax over users of log prior + log likelihood. Exact score ties break
// toward the lexicographically smallest user id. When the prior is uniform
// it cancels, and the comparison runs on the likelihoods alone so that
// adding the shared constant cannot round two distinct scores into a tie.
inline IdentifyResult identify(const ModelBank& bank, std::span<const CheckIn> test) {
    if (bank.models.empty()) throw ValidationError("identify: empty model bank");
    if (test.empty()) throw ValidationError("identify: empty test set");
    bool uniform_prior = true;
    if (!bank.log_prior.empty()) {
        double first_prior = bank.log_prior.begin()->second;
        for (const auto& [user, lp] : bank.log_prior)
            if (lp != first_prior) {
                uniform_prior = false;
                break;
            }
    }
    IdentifyResult result;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [user, model] : bank.models) {
        double ll = log_likelihood(model, test);
        auto pit = bank.log_prior.find(user);
        double prior = pit == bank.log_prior.end() ? 0.0 : pit->second;
        result.log_posterior.emplace(user, prior + ll);
        double cmp = uniform_prior ? ll : prior + ll;
        if (cmp > best) {
            best = cmp;
            result.user_id = user;
        }
    }
    return result;
}

// Debug export: `# alpha=...` / `# vocab_size=...` header block, then
// `user_id,venue_id,count` rows. A user with no training venues is written
// as a single row with an empty venue field so the bank round-trips.
inline void write_model_bank(std::ostream& out, const ModelBank& bank) {
    out << "# alpha=" << format_exact(bank.alpha) << '\n';
    out << "# vocab_size=" << bank.vocab_size << '\n';
    out << "user_id,venue_id,count\n";
    for (const auto& [user, model] : bank.models) {
        if (model.counts.empty()) {
            out << user << ",,0\n";
            continue;
        }
        for (const auto& [venue, count] : model.counts)
            out << user << ',' << venue << ',' << count << '\n';
    }
}

inline ModelBank read_model_bank(std::istream& in) {
    std::string line;
    double alpha = 0.0;
    std::size_t vocab_size = 0;
    if (!read_csv_line(in, line) || line.rfind("# alpha=", 0) != 0)
        throw ParseError(1, "header", "expected '# alpha=...'");
    alpha = std::stod(line.substr(8));
    if (!read_csv_line(in, line) || line.rfind("# vocab_size=", 0) != 0)
        throw ParseError(2, "header", "expected '# vocab_size=...'");
    vocab_size = static_cast<std::size_t>(std::stoull(line.substr(13)));
    if (!read_csv_line(in, line) || line != "user_id,venue_id,count")
        throw ParseError(3, "header", "expected 'user_id,venue_id,count'");

    std::map<std::string, std::map<std::string, std::int32_t>> counts;
    std::size_t row = 3;
    while (read_csv_line(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 3)
            throw ParseError(row, "row", "expected 3 fields, got " + std::to_string(fields.size()));
        if (fields[0].empty()) throw ParseError(row, "user_id", "empty");
        auto& user_counts = counts[fields[0]];
        if (fields[1].empty()) continue; // user with no training venues
        user_counts[fields[1]] = static_cast<std::int32_t>(std::stol(fields[2]));
    }
    if (counts.empty()) throw ValidationError("model bank file lists no users");

    ModelBank bank;
    bank.alpha = alpha;
    bank.vocab_size = vocab_size;
    double uniform = -std::log(static_cast<double>(counts.size()));
    for (auto& [user, user_counts] : counts) {
        UserModel m;
        m.user_id = user;
        m.alpha = alpha;
        m.vocab_size = vocab_size;
        for (const auto& [venue, count] : user_counts) {
            m.counts.emplace(venue, count);
            m.total += count;
        }
        bank.models.emplace(user, std::move(m));
        bank.log_prior.emplace(user, uniform);
    }
    return bank;
}

} // namespace idrisk::attack

#endif // IDRISK_ATTACK_HPP
