#ifndef IDRISK_TYPES_HPP
#define IDRISK_TYPES_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace idrisk {

// Exit-code mapping for the CLI: ParseError/ValidationError/ConfigError -> 2,
// InfeasibleError -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string field, const std::string& msg)
        : Error("row " + std::to_string(row) + ", field '" + field + "': " + msg),
          row_(row), field_(std::move(field)) {}

    std::size_t row() const { return row_; }
    const std::string& field() const { return field_; }

private:
    std::size_t row_;
    std::string field_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// An experiment that cannot run on the given data (e.g. no eligible users).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// One observation: a user declaring presence at a venue. Timestamps are UTC
// epoch seconds; an empty region string means "not yet assigned".
struct CheckIn {
    std::string user_id;
    std::string venue_id;
    std::int64_t timestamp = 0;
    double lat = 0.0;
    double lon = 0.0;
    std::string region;

    friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

struct Venue {
    std::string venue_id;
    std::string category;
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const Venue&, const Venue&) = default;
};

// A validated per-region collection of check-ins plus the venue table they
// refer to. Invariant: every check-in's venue_id resolves in `venues` and
// every check-in carries `region`. `lineage` is an append-only list of JSON
// filter descriptors; replaying it on the raw input reproduces the dataset.
struct Dataset {
    std::string region;
    std::vector<CheckIn> checkins;
    std::map<std::string, Venue> venues;
    std::vector<std::string> lineage;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct RegionBox {
    std::string code;
    double lat_min = 0.0, lat_max = 0.0;
    double lon_min = 0.0, lon_max = 0.0;

    bool contains(double lat, double lon) const {
        return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
    }
};

// Boxes may overlap; assignment takes the first listed match.
struct RegionConfig {
    std::vector<RegionBox> entries;
};

struct DatasetStats {
    std::size_t checkins = 0;
    std::size_t users = 0;
    std::size_t venues = 0;
    std::optional<double> users_per_venue;
};

} // namespace idrisk

#endif // IDRISK_TYPES_HPP
