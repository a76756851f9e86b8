#ifndef IDRISK_SYNTH_HPP
#define IDRISK_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idrisk/features.hpp"
#include "idrisk/geo.hpp"
#include "idrisk/ingest.hpp"
#include "idrisk/rng.hpp"
#include "idrisk/types.hpp"

namespace idrisk::synth {

enum class Layout { uniform_box, clustered };

// Generator controls. Separability is steered by `concentration` (symmetric
// Dirichlet over each user's venue support: low = peaky preferences, high =
// flat, near-identical users) and by how much of the support is the shared
// core of globally attractive venues.
struct SynthSpec {
    std::size_t n_users = 100;
    std::size_t n_venues = 500;
    std::size_t checkins_per_user = 50;
    double concentration = 1.0;
    double popularity_skew = 1.0; // Zipf exponent on venue attractiveness
    std::size_t shared_core = 0;  // most attractive venues, in every support
    std::size_t support_size = 10; // personal venues per user, outside the core
    Layout layout = Layout::uniform_box;
    int clusters = 5;
    double cluster_sigma_deg = 0.01;
    double lat_min = 33.5, lat_max = 34.0;
    double lon_min = -84.6, lon_max = -84.1;
    std::map<std::string, double> category_fractions; // empty: uniform taxonomy
    std::uint64_t seed = 0;

    void validate() const {
        if (n_users < 1) throw ConfigError("synth: n_users must be >= 1");
        if (n_venues < 1) throw ConfigError("synth: n_venues must be >= 1");
        if (checkins_per_user < 1) throw ConfigError("synth: checkins_per_user must be >= 1");
        if (!(concentration > 0.0)) throw ConfigError("synth: concentration must be > 0");
        if (popularity_skew < 0.0) throw ConfigError("synth: popularity_skew must be >= 0");
        if (shared_core > n_venues) throw ConfigError("synth: shared_core exceeds n_venues");
        if (support_size > n_venues) throw ConfigError("synth: support exceeds n_venues");
        if (shared_core + support_size > n_venues)
            throw ConfigError("synth: shared_core + support exceeds n_venues");
        if (shared_core + support_size < 1)
            throw ConfigError("synth: every user needs a non-empty venue support");
        if (layout == Layout::clustered && clusters < 1)
            throw ConfigError("synth: clustered layout needs >= 1 clusters");
        if (!(lat_min < lat_max) || !(lon_min < lon_max))
            throw ConfigError("synth: degenerate bounding box");
        if (!category_fractions.empty()) {
            double sum = 0.0;
            for (const auto& [cat, f] : category_fractions) {
                if (f < 0.0) throw ConfigError("synth: negative category fraction");
                sum += f;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw ConfigError("synth: category fractions must sum to 1");
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json cats = nlohmann::json::object();
        for (const auto& [cat, f] : category_fractions) cats[cat] = f;
        return {{"n_users", n_users},
                {"n_venues", n_venues},
                {"checkins_per_user", checkins_per_user},
                {"concentration", concentration},
                {"popularity_skew", popularity_skew},
                {"shared_core", shared_core},
                {"support_size", support_size},
                {"layout", layout == Layout::uniform_box ? "uniform-box" : "clustered"},
                {"clusters", clusters},
                {"cluster_sigma_deg", cluster_sigma_deg},
                {"box", {lat_min, lat_max, lon_min, lon_max}},
                {"category_fractions", cats},
                {"seed", seed}};
    }
};

struct SynthOutput {
    Dataset dataset;
    // Ground truth computed during generation: popularity from the draw
    // tallies, isolation from the brute-force route.
    features::FeatureMap feature_truth;
};

namespace detail {

inline std::string padded_id(char prefix, std::size_t i, std::size_t width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, static_cast<int>(width), i);
    return buf;
}

inline std::size_t id_width(std::size_t n) {
    std::size_t w = 1, limit = 10;
    while (n > limit) {
        ++w;
        limit *= 10;
    }
    return std::max<std::size_t>(w, 4);
}

// Largest-remainder apportionment of n venues over category fractions;
// deterministic, remainder ties resolved by category order.
inline std::vector<std::size_t> apportion(const std::vector<double>& fractions, std::size_t n) {
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        double exact = fractions[i] * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i, ++assigned)
        ++counts[remainders[i].second];
    // Guard against float undershoot leaving venues unassigned.
    while (assigned < n) {
        ++counts[0];
        ++assigned;
    }
    return counts;
}

} // namespace detail

// Deterministic dataset generation: a pure function of the spec. Each
// user's check-ins are drawn from a Dirichlet-weighted categorical over a
// personal venue support blended with the shared core; venue attractiveness
// follows a Zipf law in venue index.
inline SynthOutput generate(const SynthSpec& spec) {
    spec.validate();
    Rng64 rng(splitmix64(spec.seed ^ 0x5917ac5d3f2b9e01ULL));

    const std::size_t V = spec.n_venues;
    const std::size_t U = spec.n_users;
    const std::size_t vw = detail::id_width(V), uw = detail::id_width(U);

    // Venue coordinates.
    std::vector<GeoPoint> coords(V);
    if (spec.layout == Layout::uniform_box) {
        for (auto& p : coords) {
            p.lat = spec.lat_min + rng.uniform01() * (spec.lat_max - spec.lat_min);
            p.lon = spec.lon_min + rng.uniform01() * (spec.lon_max - spec.lon_min);
        }
    } else {
        std::vector<GeoPoint> centers(static_cast<std::size_t>(spec.clusters));
        for (auto& c : centers) {
            c.lat = spec.lat_min + rng.uniform01() * (spec.lat_max - spec.lat_min);
            c.lon = spec.lon_min + rng.uniform01() * (spec.lon_max - spec.lon_min);
        }
        for (auto& p : coords) {
            const auto& c = centers[rng.bounded(centers.size())];
            p.lat = std::clamp(c.lat + rng.gaussian() * spec.cluster_sigma_deg, spec.lat_min,
                               spec.lat_max);
            p.lon = std::clamp(c.lon + rng.gaussian() * spec.cluster_sigma_deg, spec.lon_min,
                               spec.lon_max);
        }
    }

    // Category assignment: apportion by fraction, assign over a seeded
    // shuffle of the venue indices.
    std::vector<std::string> cat_names;
    std::vector<double> cat_fracs;
    if (spec.category_fractions.empty()) {
        cat_names = ingest::default_taxonomy();
        cat_fracs.assign(cat_names.size(), 1.0 / static_cast<double>(cat_names.size()));
    } else {
        for (const auto& [cat, f] : spec.category_fractions) {
            cat_names.push_back(cat);
            cat_fracs.push_back(f);
        }
    }
    auto cat_counts = detail::apportion(cat_fracs, V);
    std::vector<std::size_t> venue_order(V);
    for (std::size_t i = 0; i < V; ++i) venue_order[i] = i;
    for (std::size_t i = V; i > 1; --i)
        std::swap(venue_order[i - 1], venue_order[rng.bounded(i)]);
    std::vector<std::string> venue_category(V);
    {
        std::size_t pos = 0;
        for (std::size_t ci = 0; ci < cat_names.size(); ++ci)
            for (std::size_t j = 0; j < cat_counts[ci]; ++j)
                venue_category[venue_order[pos++]] = cat_names[ci];
    }

    // Zipf attractiveness; venue 0 is globally most attractive, and the
    // shared core is exactly the first shared_core venues.
    std::vector<double> weight(V);
    for (std::size_t v = 0; v < V; ++v)
        weight[v] = std::pow(static_cast<double>(v + 1), -spec.popularity_skew);

    Dataset ds;
    ds.region = "SYNTH";
    ds.lineage.push_back(nlohmann::json{{"op", "synth"}, {"spec", spec.to_json()}}.dump());
    for (std::size_t v = 0; v < V; ++v) {
        Venue venue;
        venue.venue_id = detail::padded_id('v', v, vw);
        venue.category = venue_category[v];
        venue.lat = coords[v].lat;
        venue.lon = coords[v].lon;
        ds.venues.emplace(venue.venue_id, venue);
    }

    std::vector<std::size_t> visit_count(V, 0);
    std::vector<std::size_t> visitor_count(V, 0);
    std::vector<bool> visited_by_user(V, false);

    std::int64_t t0 = 0;
    {
        // 2010-09-01T00:00:00Z, matching the flavor of LBSN snapshots.
        [[maybe_unused]] bool ok = parse_iso8601_utc("2010-09-01T00:00:00Z", t0);
    }

    const std::size_t n_personal = spec.support_size;
    std::vector<std::pair<double, std::size_t>> keys;
    for (std::size_t u = 0; u < U; ++u) {
        // Support: shared core plus a weighted sample (without replacement,
        // Efraimidis-Spirakis keys) of personal venues outside the core.
        std::vector<std::size_t> support;
        for (std::size_t v = 0; v < spec.shared_core; ++v) support.push_back(v);
        if (n_personal > 0) {
            keys.clear();
            for (std::size_t v = spec.shared_core; v < V; ++v) {
                double r = rng.uniform01();
                while (r == 0.0) r = rng.uniform01();
                keys.emplace_back(std::log(r) / weight[v], v);
            }
            std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_personal),
                              keys.end(), [](const auto& a, const auto& b) {
                                  if (a.first != b.first) return a.first > b.first;
                                  return a.second < b.second;
                              });
            for (std::size_t i = 0; i < n_personal; ++i) support.push_back(keys[i].second);
        }
        std::sort(support.begin(), support.end());

        // Preference vector: Dirichlet draw modulated by attractiveness.
        std::vector<double> cdf(support.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            acc += rng.gamma(spec.concentration) * weight[support[i]];
            cdf[i] = acc;
        }
        if (acc <= 0.0) {
            // All-gamma underflow at extreme concentrations; fall back to
            // the attractiveness weights alone.
            acc = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i) {
                acc += weight[support[i]];
                cdf[i] = acc;
            }
        }

        std::string user_id = detail::padded_id('u', u, uw);
        std::fill(visited_by_user.begin(), visited_by_user.end(), false);
        for (std::size_t i = 0; i < spec.checkins_per_user; ++i) {
            double x = rng.uniform01() * acc;
            std::size_t pick =
                static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
            if (pick >= support.size()) pick = support.size() - 1;
            std::size_t v = support[pick];
            CheckIn c;
            c.user_id = user_id;
            c.venue_id = detail::padded_id('v', v, vw);
            c.timestamp = t0 + static_cast<std::int64_t>(u * spec.checkins_per_user + i) * 60;
            c.lat = coords[v].lat;
            c.lon = coords[v].lon;
            c.region = ds.region;
            ds.checkins.push_back(std::move(c));
            ++visit_count[v];
            if (!visited_by_user[v]) {
                visited_by_user[v] = true;
                ++visitor_count[v];
            }
        }
    }

    SynthOutput out;
    std::vector<double> nn;
    if (V >= 2) nn = nn_distances_bruteforce(coords);
    for (std::size_t v = 0; v < V; ++v) {
        features::VenueFeatures f;
        f.venue_id = detail::padded_id('v', v, vw);
        f.visitor_count = visitor_count[v];
        f.visit_count = visit_count[v];
        f.nn_distance_m = V >= 2 ? nn[v] : 0.0;
        out.feature_truth.emplace(f.venue_id, std::move(f));
    }
    out.dataset = std::move(ds);
    return out;
}

// Tiny uniformly-drawn instance for brute-force oracle suites: every
// (user, venue) check-in count is uniform on {0..max_count}, the per-user
// check-in order is shuffled, and the whole thing is enumerable exactly.
inline Dataset make_oracle_instance(std::size_t n_users, std::size_t n_venues, int max_count,
                                    std::uint64_t seed) {
    if (n_users < 1 || n_users > 5) throw ConfigError("oracle instance: n_users must be in [1, 5]");
    if (n_venues < 2 || n_venues > 6)
        throw ConfigError("oracle instance: n_venues must be in [2, 6]");
    if (max_count < 1 || max_count > 3)
        throw ConfigError("oracle instance: max_count must be in [1, 3]");
    Rng64 rng(splitmix64(seed ^ 0x0bad5eed0bad5eedULL));

    Dataset ds;
    ds.region = "ORACLE";
    auto taxonomy = ingest::default_taxonomy();
    for (std::size_t v = 0; v < n_venues; ++v) {
        Venue venue;
        venue.venue_id = detail::padded_id('v', v, 2);
        venue.category = taxonomy[v % taxonomy.size()];
        venue.lat = 40.0 + 0.01 * static_cast<double>(v);
        venue.lon = -80.0 + 0.01 * static_cast<double>(v);
        ds.venues.emplace(venue.venue_id, venue);
    }
    std::int64_t t0 = 0;
    [[maybe_unused]] bool ok = parse_iso8601_utc("2010-09-01T00:00:00Z", t0);
    for (std::size_t u = 0; u < n_users; ++u) {
        std::vector<std::size_t> venues;
        for (std::size_t v = 0; v < n_venues; ++v) {
            auto count = rng.bounded(static_cast<std::uint64_t>(max_count) + 1);
            for (std::uint64_t i = 0; i < count; ++i) venues.push_back(v);
        }
        for (std::size_t i = venues.size(); i > 1; --i)
            std::swap(venues[i - 1], venues[rng.bounded(i)]);
        std::string user_id = detail::padded_id('u', u, 2);
        for (std::size_t i = 0; i < venues.size(); ++i) {
            CheckIn c;
            c.user_id = user_id;
            c.venue_id = detail::padded_id('v', venues[i], 2);
            c.timestamp = t0 + static_cast<std::int64_t>(u * 100 + i) * 60;
            c.lat = 40.0 + 0.01 * static_cast<double>(venues[i]);
            c.lon = -80.0 + 0.01 * static_cast<double>(venues[i]);
            c.region = ds.region;
            ds.checkins.push_back(std::move(c));
        }
    }
    ds.lineage.push_back(nlohmann::json{{"op", "synth_oracle"},
                                        {"n_users", n_users},
                                        {"n_venues", n_venues},
                                        {"max_count", max_count},
                                        {"seed", seed}}
                             .dump());
    return ds;
}

} // namespace idrisk::synth

#endif // IDRISK_SYNTH_HPP
