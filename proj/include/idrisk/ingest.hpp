#ifndef IDRISK_INGEST_HPP
#define IDRISK_INGEST_HPP

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idrisk/csv.hpp"
#include "idrisk/timeutil.hpp"
#include "idrisk/types.hpp"

namespace idrisk::ingest {

// Foursquare's top-level categories minus "Event", which the analysis
// excludes because some regions have no check-ins of that type.
inline std::vector<std::string> default_taxonomy() {
    return {"Arts & Entertainment", "College & University",      "Food",
            "Nightlife Spot",       "Outdoors & Recreation",     "Professional & Other Places",
            "Residence",            "Shop & Service",            "Travel & Transport"};
}

inline std::vector<std::string> parse_taxonomy(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (read_csv_line(in, line)) {
        if (line.empty()) continue;
        out.push_back(line);
    }
    if (out.empty()) throw ValidationError("taxonomy file lists no categories");
    return out;
}

namespace detail {

inline double parse_double_field(const std::string& s, std::size_t row, const char* field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(row, field, "not a number: '" + s + "'");
    return v;
}

inline void check_lat_lon(double lat, double lon, std::size_t row) {
    if (lat < -90.0 || lat > 90.0)
        throw ParseError(row, "lat", "latitude out of range [-90, 90]: " + format_exact(lat));
    if (lon < -180.0 || lon > 180.0)
        throw ParseError(row, "lon", "longitude out of range [-180, 180]: " + format_exact(lon));
}

} // namespace detail

// Header `user_id,venue_id,timestamp,lat,lon[,region]`. Row numbers in
// errors are 1-based including the header. Duplicate (user, venue, time)
// rows are legitimate repeat check-ins and pass through.
inline std::vector<CheckIn> parse_checkins(std::istream& in) {
    std::string line;
    if (!read_csv_line(in, line)) throw ParseError(1, "header", "empty check-in file");
    auto header = split_csv_row(line);
    bool with_region = header.size() == 6 && header[5] == "region";
    if (!(header.size() == 5 || with_region) || header[0] != "user_id" ||
        header[1] != "venue_id" || header[2] != "timestamp" || header[3] != "lat" ||
        header[4] != "lon")
        throw ParseError(1, "header",
                         "expected 'user_id,venue_id,timestamp,lat,lon[,region]', got '" + line + "'");

    std::vector<CheckIn> out;
    std::size_t row = 1;
    while (read_csv_line(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != header.size())
            throw ParseError(row, "row",
                             "expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        CheckIn c;
        c.user_id = fields[0];
        c.venue_id = fields[1];
        if (c.user_id.empty()) throw ParseError(row, "user_id", "empty");
        if (c.venue_id.empty()) throw ParseError(row, "venue_id", "empty");
        if (!parse_iso8601_utc(fields[2], c.timestamp))
            throw ParseError(row, "timestamp", "not ISO-8601 UTC: '" + fields[2] + "'");
        c.lat = detail::parse_double_field(fields[3], row, "lat");
        c.lon = detail::parse_double_field(fields[4], row, "lon");
        detail::check_lat_lon(c.lat, c.lon, row);
        if (with_region) c.region = fields[5];
        out.push_back(std::move(c));
    }
    return out;
}

// Header `venue_id,category,lat,lon`. Categories outside the taxonomy and
// venues without coordinates are rejected here rather than surfacing later
// as feature gaps.
inline std::map<std::string, Venue> parse_venues(std::istream& in,
                                                 const std::vector<std::string>& taxonomy) {
    std::set<std::string> allowed(taxonomy.begin(), taxonomy.end());
    std::string line;
    if (!read_csv_line(in, line)) throw ParseError(1, "header", "empty venue file");
    if (split_csv_row(line) != std::vector<std::string>{"venue_id", "category", "lat", "lon"})
        throw ParseError(1, "header", "expected 'venue_id,category,lat,lon', got '" + line + "'");

    std::map<std::string, Venue> out;
    std::size_t row = 1;
    while (read_csv_line(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 4)
            throw ParseError(row, "row", "expected 4 fields, got " + std::to_string(fields.size()));
        Venue v;
        v.venue_id = fields[0];
        v.category = fields[1];
        if (v.venue_id.empty()) throw ParseError(row, "venue_id", "empty");
        if (!allowed.count(v.category))
            throw ParseError(row, "category", "unknown category '" + v.category + "'");
        v.lat = detail::parse_double_field(fields[2], row, "lat");
        v.lon = detail::parse_double_field(fields[3], row, "lon");
        detail::check_lat_lon(v.lat, v.lon, row);
        if (!out.emplace(v.venue_id, v).second)
            throw ParseError(row, "venue_id", "duplicate venue id '" + v.venue_id + "'");
    }
    return out;
}

// One `code,lat_min,lat_max,lon_min,lon_max` row per box, header required.
inline RegionConfig parse_region_config(std::istream& in) {
    std::string line;
    if (!read_csv_line(in, line)) throw ParseError(1, "header", "empty region config");
    if (split_csv_row(line) !=
        std::vector<std::string>{"code", "lat_min", "lat_max", "lon_min", "lon_max"})
        throw ParseError(1, "header",
                         "expected 'code,lat_min,lat_max,lon_min,lon_max', got '" + line + "'");
    RegionConfig cfg;
    std::size_t row = 1;
    while (read_csv_line(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 5)
            throw ParseError(row, "row", "expected 5 fields, got " + std::to_string(fields.size()));
        RegionBox box;
        box.code = fields[0];
        if (box.code.empty()) throw ParseError(row, "code", "empty");
        box.lat_min = detail::parse_double_field(fields[1], row, "lat_min");
        box.lat_max = detail::parse_double_field(fields[2], row, "lat_max");
        box.lon_min = detail::parse_double_field(fields[3], row, "lon_min");
        box.lon_max = detail::parse_double_field(fields[4], row, "lon_max");
        if (box.lat_min > box.lat_max)
            throw ParseError(row, "lat_min", "lat_min exceeds lat_max");
        if (box.lon_min > box.lon_max)
            throw ParseError(row, "lon_min", "lon_min exceeds lon_max");
        cfg.entries.push_back(std::move(box));
    }
    return cfg;
}

struct RegionAssignment {
    std::vector<CheckIn> checkins;
    std::size_t dropped = 0;
};

// Labels each check-in with the first listed box containing it; check-ins
// already carrying a region keep it. Points outside every box are dropped
// and counted.
inline RegionAssignment assign_regions(std::vector<CheckIn> checkins, const RegionConfig& cfg) {
    bool any_unlabeled =
        std::any_of(checkins.begin(), checkins.end(), [](const CheckIn& c) { return c.region.empty(); });
    if (any_unlabeled && cfg.entries.empty())
        throw ConfigError("check-ins lack region labels and no region config was given");

    RegionAssignment out;
    out.checkins.reserve(checkins.size());
    for (auto& c : checkins) {
        if (!c.region.empty()) {
            out.checkins.push_back(std::move(c));
            continue;
        }
        bool placed = false;
        for (const auto& box : cfg.entries) {
            if (box.contains(c.lat, c.lon)) {
                c.region = box.code;
                out.checkins.push_back(std::move(c));
                placed = true;
                break;
            }
        }
        if (!placed) ++out.dropped;
    }
    return out;
}

inline nlohmann::json region_config_json(const RegionConfig& cfg) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : cfg.entries)
        boxes.push_back({{"code", b.code},
                         {"lat_min", b.lat_min},
                         {"lat_max", b.lat_max},
                         {"lon_min", b.lon_min},
                         {"lon_max", b.lon_max}});
    return boxes;
}

// Groups labeled check-ins into per-region datasets. Each dataset's venue
// table holds exactly the venues its check-ins reference; a check-in whose
// venue is missing from the global table fails the join. `lineage_prefix`
// carries ops applied before the split (region assignment).
inline std::map<std::string, Dataset> build_datasets(
    const std::vector<CheckIn>& checkins, const std::map<std::string, Venue>& venues,
    const std::vector<std::string>& lineage_prefix = {}) {
    std::map<std::string, Dataset> out;
    for (std::size_t i = 0; i < checkins.size(); ++i) {
        const CheckIn& c = checkins[i];
        if (c.region.empty())
            throw ValidationError("check-in #" + std::to_string(i + 1) + " has no region label");
        auto vit = venues.find(c.venue_id);
        if (vit == venues.end())
            throw ValidationError("check-in #" + std::to_string(i + 1) + " references unknown venue '" +
                                  c.venue_id + "'");
        Dataset& ds = out[c.region];
        if (ds.region.empty()) {
            ds.region = c.region;
            ds.lineage = lineage_prefix;
            ds.lineage.push_back(
                nlohmann::json{{"op", "select_region"}, {"region", c.region}}.dump());
        }
        ds.checkins.push_back(c);
        ds.venues.emplace(vit->first, vit->second);
    }
    return out;
}

// Removes every check-in by users with fewer than min_checkins check-ins,
// counted within this dataset. Idempotent at a fixed threshold; the venue
// table is left untouched.
inline Dataset filter_active_users(const Dataset& ds, std::size_t min_checkins) {
    if (min_checkins < 1) throw ConfigError("min_checkins must be >= 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& c : ds.checkins) ++counts[c.user_id];

    Dataset out;
    out.region = ds.region;
    out.venues = ds.venues;
    out.lineage = ds.lineage;
    for (const auto& c : ds.checkins)
        if (counts[c.user_id] >= min_checkins) out.checkins.push_back(c);
    out.lineage.push_back(nlohmann::json{{"op", "filter_active_users"},
                                         {"min_checkins", min_checkins}}
                              .dump());
    return out;
}

inline std::size_t count_users(const Dataset& ds) {
    std::set<std::string> users;
    for (const auto& c : ds.checkins) users.insert(c.user_id);
    return users.size();
}

// Keeps only datasets with at least min_users distinct (already-filtered)
// users.
inline std::vector<Dataset> filter_active_regions(std::vector<Dataset> datasets,
                                                  std::size_t min_users) {
    std::vector<Dataset> out;
    for (auto& ds : datasets)
        if (count_users(ds) >= min_users) out.push_back(std::move(ds));
    return out;
}

inline DatasetStats dataset_stats(const Dataset& ds) {
    DatasetStats s;
    s.checkins = ds.checkins.size();
    s.users = count_users(ds);
    s.venues = ds.venues.size();
    if (s.venues > 0)
        s.users_per_venue = static_cast<double>(s.users) / static_cast<double>(s.venues);
    return s;
}

// Full parse-to-datasets flow as run by the CLI: assign regions (when a
// config is given), split per region, drop inactive users, drop inactive
// regions. Lineage on every surviving dataset records each step.
struct PipelineResult {
    std::vector<Dataset> datasets;
    std::size_t dropped_checkins = 0;
};

inline PipelineResult run_pipeline(std::vector<CheckIn> checkins,
                                   const std::map<std::string, Venue>& venues,
                                   const RegionConfig& config, std::size_t min_checkins,
                                   std::size_t min_users) {
    std::vector<std::string> prefix;
    PipelineResult result;
    if (!config.entries.empty()) {
        auto assigned = assign_regions(std::move(checkins), config);
        checkins = std::move(assigned.checkins);
        result.dropped_checkins = assigned.dropped;
        prefix.push_back(
            nlohmann::json{{"op", "assign_regions"}, {"config", region_config_json(config)}}.dump());
    }
    auto by_region = build_datasets(checkins, venues, prefix);
    std::vector<Dataset> filtered;
    for (auto& [code, ds] : by_region) filtered.push_back(filter_active_users(ds, min_checkins));
    result.datasets = filter_active_regions(std::move(filtered), min_users);
    return result;
}

// Replays an ingest lineage against the raw parsed input; verifies that
// lineage records alone rebuild a dataset. Class-filter ops are handled by
// the features module's replay, which delegates the prefix here.
inline Dataset replay_lineage(std::vector<CheckIn> raw_checkins,
                              const std::map<std::string, Venue>& venues,
                              const std::vector<std::string>& lineage) {
    Dataset current;
    bool have_region = false;
    std::vector<std::string> prefix;
    for (const auto& entry : lineage) {
        auto op = nlohmann::json::parse(entry);
        std::string name = op.at("op").get<std::string>();
        if (name == "assign_regions") {
            RegionConfig cfg;
            for (const auto& b : op.at("config")) {
                RegionBox box;
                box.code = b.at("code").get<std::string>();
                box.lat_min = b.at("lat_min").get<double>();
                box.lat_max = b.at("lat_max").get<double>();
                box.lon_min = b.at("lon_min").get<double>();
                box.lon_max = b.at("lon_max").get<double>();
                cfg.entries.push_back(std::move(box));
            }
            raw_checkins = assign_regions(std::move(raw_checkins), cfg).checkins;
            prefix.push_back(entry);
        } else if (name == "select_region") {
            auto all = build_datasets(raw_checkins, venues, prefix);
            auto it = all.find(op.at("region").get<std::string>());
            if (it == all.end())
                throw ValidationError("lineage region '" + op.at("region").get<std::string>() +
                                      "' not present in raw input");
            current = it->second;
            have_region = true;
        } else if (name == "filter_active_users") {
            if (!have_region) throw ValidationError("lineage filter precedes region selection");
            current = filter_active_users(current, op.at("min_checkins").get<std::size_t>());
        } else {
            throw ValidationError("unknown lineage op '" + name + "'");
        }
    }
    return current;
}

inline void write_checkins(std::ostream& out, const Dataset& ds) {
    out << "user_id,venue_id,timestamp,lat,lon,region\n";
    for (const auto& c : ds.checkins)
        out << c.user_id << ',' << c.venue_id << ',' << format_iso8601_utc(c.timestamp) << ','
            << format_exact(c.lat) << ',' << format_exact(c.lon) << ',' << c.region << '\n';
}

inline void write_venues(std::ostream& out, const Dataset& ds) {
    out << "venue_id,category,lat,lon\n";
    for (const auto& [id, v] : ds.venues)
        out << id << ',' << v.category << ',' << format_exact(v.lat) << ','
            << format_exact(v.lon) << '\n';
}

} // namespace idrisk::ingest

#endif // IDRISK_INGEST_HPP
