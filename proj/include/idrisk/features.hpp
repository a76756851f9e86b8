#ifndef IDRISK_FEATURES_HPP
#define IDRISK_FEATURES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idrisk/csv.hpp"
#include "idrisk/geo.hpp"
#include "idrisk/ingest.hpp"
#include "idrisk/types.hpp"

namespace idrisk::features {

struct VenueFeatures {
    std::string venue_id;
    std::size_t visitor_count = 0; // unique users
    std::size_t visit_count = 0;   // total check-ins
    double nn_distance_m = 0.0;    // to the nearest *other* venue

    friend bool operator==(const VenueFeatures&, const VenueFeatures&) = default;
};

using FeatureMap = std::map<std::string, VenueFeatures>;

// (unique visitors, total visits) per venue, computed over the dataset's
// current check-ins. Venues nobody checked into carry (0, 0).
inline std::map<std::string, std::pair<std::size_t, std::size_t>> compute_popularity(
    const Dataset& ds) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> out;
    for (const auto& [id, v] : ds.venues) out[id] = {0, 0};
    std::map<std::string, std::set<std::string>> visitors;
    for (const auto& c : ds.checkins) {
        auto it = out.find(c.venue_id);
        if (it == out.end())
            throw ValidationError("check-in references venue '" + c.venue_id +
                                  "' missing from the venue table");
        ++it->second.second;
        visitors[c.venue_id].insert(c.user_id);
    }
    for (const auto& [id, users] : visitors) out[id].first = users.size();
    return out;
}

// Great-circle distance to the nearest other venue, via the grid index.
inline std::map<std::string, double> compute_nn_distance(
    const std::map<std::string, Venue>& venues, int threads = 1) {
    if (venues.size() < 2)
        throw ValidationError("spatial isolation is undefined for fewer than 2 venues");
    std::vector<GeoPoint> pts;
    std::vector<const std::string*> ids;
    pts.reserve(venues.size());
    for (const auto& [id, v] : venues) {
        pts.push_back({v.lat, v.lon});
        ids.push_back(&id);
    }
    auto dists = nn_distances_grid(pts, threads);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < ids.size(); ++i) out[*ids[i]] = dists[i];
    return out;
}

inline FeatureMap compute_features(const Dataset& ds, int threads = 1) {
    auto pop = compute_popularity(ds);
    auto nn = compute_nn_distance(ds.venues, threads);
    FeatureMap out;
    for (const auto& [id, counts] : pop) {
        VenueFeatures f;
        f.venue_id = id;
        f.visitor_count = counts.first;
        f.visit_count = counts.second;
        f.nn_distance_m = nn.at(id);
        out.emplace(id, std::move(f));
    }
    return out;
}

enum class Direction { top, least };
enum class Metric { visitor_count, visit_count, nn_distance };
enum class ClassKind { all, category, popularity, isolation };

inline const char* to_string(Direction d) { return d == Direction::top ? "top" : "least"; }
inline const char* to_string(Metric m) {
    switch (m) {
        case Metric::visitor_count: return "visitor_count";
        case Metric::visit_count: return "visit_count";
        default: return "nn_distance";
    }
}

// A venue class: all venues, one category, or a percentile slice of a
// popularity/isolation ranking.
struct VenueClassSpec {
    ClassKind kind = ClassKind::all;
    std::string category;                      // category kind only
    double fraction = 1.0;                     // percentile kinds only
    Direction direction = Direction::top;      // percentile kinds only
    Metric metric = Metric::visitor_count;     // popularity: visitor/visit; isolation: nn

    static VenueClassSpec all() { return {}; }

    static VenueClassSpec for_category(std::string name) {
        VenueClassSpec s;
        s.kind = ClassKind::category;
        s.category = std::move(name);
        return s;
    }

    static VenueClassSpec for_popularity(Direction dir, double fraction,
                                         Metric metric = Metric::visitor_count) {
        VenueClassSpec s;
        s.kind = ClassKind::popularity;
        s.direction = dir;
        s.fraction = fraction;
        s.metric = metric;
        return s;
    }

    static VenueClassSpec for_isolation(Direction dir, double fraction) {
        VenueClassSpec s;
        s.kind = ClassKind::isolation;
        s.direction = dir;
        s.fraction = fraction;
        s.metric = Metric::nn_distance;
        return s;
    }

    std::string to_string() const {
        switch (kind) {
            case ClassKind::all: return "all";
            case ClassKind::category: return "category=" + category;
            case ClassKind::popularity:
                return std::string("popularity=") + features::to_string(direction) + ":" +
                       format_fixed(fraction, 2) + ":" + features::to_string(metric);
            case ClassKind::isolation:
                return std::string("isolation=") + features::to_string(direction) + ":" +
                       format_fixed(fraction, 2);
        }
        return "all";
    }

    // Grammar: all | category=<name> | popularity=<top|least>:<frac>[:<metric>]
    //        | isolation=<top|least>:<frac>
    static VenueClassSpec parse(const std::string& text) {
        if (text == "all") return all();
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad class spec '" + text + "' (expected kind=...)");
        std::string kind = text.substr(0, eq);
        std::string rest = text.substr(eq + 1);
        if (kind == "category") {
            if (rest.empty()) throw ConfigError("class spec names no category");
            return for_category(rest);
        }
        if (kind != "popularity" && kind != "isolation")
            throw ConfigError("unknown class kind '" + kind + "'");
        std::vector<std::string> parts = split_csv_row(rest);
        if (parts.size() == 1) {
            parts.clear();
            std::size_t start = 0;
            while (true) {
                auto pos = rest.find(':', start);
                if (pos == std::string::npos) {
                    parts.push_back(rest.substr(start));
                    break;
                }
                parts.push_back(rest.substr(start, pos - start));
                start = pos + 1;
            }
        }
        if (parts.size() < 2) throw ConfigError("class spec '" + text + "' needs direction:fraction");
        Direction dir;
        if (parts[0] == "top") dir = Direction::top;
        else if (parts[0] == "least") dir = Direction::least;
        else throw ConfigError("bad direction '" + parts[0] + "' (top|least)");
        double frac = 0.0;
        try {
            frac = std::stod(parts[1]);
        } catch (const std::exception&) {
            throw ConfigError("bad fraction '" + parts[1] + "'");
        }
        if (kind == "isolation") {
            if (parts.size() > 2) throw ConfigError("isolation class takes no metric");
            return for_isolation(dir, frac);
        }
        Metric metric = Metric::visitor_count;
        if (parts.size() == 3) {
            if (parts[2] == "visitor_count") metric = Metric::visitor_count;
            else if (parts[2] == "visit_count") metric = Metric::visit_count;
            else throw ConfigError("bad popularity metric '" + parts[2] + "'");
        } else if (parts.size() > 3) {
            throw ConfigError("class spec '" + text + "' has too many parts");
        }
        return for_popularity(dir, frac, metric);
    }

    void validate(const std::vector<std::string>& taxonomy) const {
        switch (kind) {
            case ClassKind::all: return;
            case ClassKind::category:
                if (std::find(taxonomy.begin(), taxonomy.end(), category) == taxonomy.end())
                    throw ConfigError("unknown category '" + category + "'");
                return;
            case ClassKind::popularity:
                if (metric == Metric::nn_distance)
                    throw ConfigError("popularity class cannot rank by nn_distance");
                break;
            case ClassKind::isolation:
                if (metric != Metric::nn_distance)
                    throw ConfigError("isolation class ranks by nn_distance only");
                break;
        }
        if (!(fraction > 0.0 && fraction <= 1.0))
            throw ConfigError("fraction must be in (0, 1]");
    }

    friend bool operator==(const VenueClassSpec&, const VenueClassSpec&) = default;
};

// Ranks venues by value and returns the first ceil(fraction*n). One total
// order drives both directions: value descending with venue_id ascending on
// ties; `least` walks it from the back (venue_id descending on ties), so
// top-f and least-(1-f) partition the set exactly whenever f*n is whole.
inline std::vector<std::string> percentile_select(const std::map<std::string, double>& values,
                                                  double fraction, Direction direction) {
    if (values.empty()) throw ValidationError("percentile_select: no venues");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("fraction must be in (0, 1]");
    std::vector<std::pair<std::string, double>> ranked(values.begin(), values.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::size_t n = ranked.size();
    auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    take = std::min(std::max<std::size_t>(take, 1), n);
    std::vector<std::string> out;
    out.reserve(take);
    if (direction == Direction::top) {
        for (std::size_t i = 0; i < take; ++i) out.push_back(ranked[i].first);
    } else {
        for (std::size_t i = 0; i < take; ++i) out.push_back(ranked[n - 1 - i].first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::map<std::string, double> metric_values(const FeatureMap& features, Metric metric) {
    std::map<std::string, double> out;
    for (const auto& [id, f] : features) {
        switch (metric) {
            case Metric::visitor_count: out[id] = static_cast<double>(f.visitor_count); break;
            case Metric::visit_count: out[id] = static_cast<double>(f.visit_count); break;
            case Metric::nn_distance: out[id] = f.nn_distance_m; break;
        }
    }
    return out;
}

// The set of venues a spec selects, relative to features computed on the
// unfiltered dataset.
inline std::set<std::string> select_venues(const Dataset& ds, const VenueClassSpec& spec,
                                           const FeatureMap& features) {
    std::set<std::string> out;
    switch (spec.kind) {
        case ClassKind::all:
            for (const auto& [id, v] : ds.venues) out.insert(id);
            return out;
        case ClassKind::category: {
            bool known = false;
            for (const auto& [id, v] : ds.venues) {
                if (v.category == spec.category) {
                    out.insert(id);
                    known = true;
                }
            }
            // Distinguish "category exists but empty here" from a typo.
            if (!known) {
                auto taxonomy = ingest::default_taxonomy();
                if (std::find(taxonomy.begin(), taxonomy.end(), spec.category) == taxonomy.end())
                    throw ConfigError("unknown category '" + spec.category + "'");
            }
            return out;
        }
        case ClassKind::popularity:
        case ClassKind::isolation: {
            auto selected =
                percentile_select(metric_values(features, spec.metric), spec.fraction, spec.direction);
            out.insert(selected.begin(), selected.end());
            return out;
        }
    }
    return out;
}

// Keeps only check-ins at venues the spec selects; the venue table shrinks
// to the selected set. Features must come from the dataset *before*
// filtering so percentiles stay relative to the full region.
inline Dataset filter_by_class(const Dataset& ds, const VenueClassSpec& spec,
                               const FeatureMap& features) {
    if (spec.kind == ClassKind::all) {
        Dataset out = ds;
        out.lineage.push_back(
            nlohmann::json{{"op", "filter_by_class"}, {"class", spec.to_string()}}.dump());
        return out;
    }
    auto selected = select_venues(ds, spec, features);
    Dataset out;
    out.region = ds.region;
    out.lineage = ds.lineage;
    for (const auto& c : ds.checkins)
        if (selected.count(c.venue_id)) out.checkins.push_back(c);
    for (const auto& id : selected) {
        auto it = ds.venues.find(id);
        if (it != ds.venues.end()) out.venues.emplace(it->first, it->second);
    }
    out.lineage.push_back(
        nlohmann::json{{"op", "filter_by_class"}, {"class", spec.to_string()}}.dump());
    return out;
}

// Full replay including class filters; ingest ops delegate to the ingest
// module. Features for each class op are recomputed on the dataset state at
// that point, matching the original pipeline.
inline Dataset replay_lineage(const std::vector<CheckIn>& raw_checkins,
                              const std::map<std::string, Venue>& venues,
                              const std::vector<std::string>& lineage, int threads = 1) {
    std::size_t split = lineage.size();
    for (std::size_t i = 0; i < lineage.size(); ++i) {
        auto op = nlohmann::json::parse(lineage[i]);
        if (op.at("op").get<std::string>() == "filter_by_class") {
            split = i;
            break;
        }
    }
    std::vector<std::string> prefix(lineage.begin(), lineage.begin() + split);
    Dataset current = ingest::replay_lineage(raw_checkins, venues, prefix);
    for (std::size_t i = split; i < lineage.size(); ++i) {
        auto op = nlohmann::json::parse(lineage[i]);
        if (op.at("op").get<std::string>() != "filter_by_class")
            throw ValidationError("ingest op appears after a class filter in lineage");
        auto spec = VenueClassSpec::parse(op.at("class").get<std::string>());
        current = filter_by_class(current, spec, compute_features(current, threads));
    }
    return current;
}

// `venue_id,category,visitor_count,visit_count,nn_distance_m`, sorted by id.
inline void write_features(std::ostream& out, const FeatureMap& features,
                           const std::map<std::string, Venue>& venues) {
    out << "venue_id,category,visitor_count,visit_count,nn_distance_m\n";
    for (const auto& [id, f] : features) {
        auto vit = venues.find(id);
        if (vit == venues.end())
            throw ValidationError("feature row for unknown venue '" + id + "'");
        out << id << ',' << vit->second.category << ',' << f.visitor_count << ','
            << f.visit_count << ',' << format_fixed(f.nn_distance_m, 3) << '\n';
    }
}

} // namespace idrisk::features

#endif // IDRISK_FEATURES_HPP
