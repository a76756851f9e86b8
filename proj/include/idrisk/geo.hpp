#ifndef IDRISK_GEO_HPP
#define IDRISK_GEO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "idrisk/parallel.hpp"
#include "idrisk/types.hpp"

namespace idrisk {

// Mean Earth radius, meters.
inline constexpr double kEarthRadiusM = 6371008.8;

inline double deg2rad(double deg) { return deg * (std::numbers::pi / 180.0); }

// Great-circle distance on a sphere of radius kEarthRadiusM, in meters.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    double phi1 = deg2rad(lat1), phi2 = deg2rad(lat2);
    double dphi = deg2rad(lat2 - lat1);
    double dlam = deg2rad(lon2 - lon1);
    double sp = std::sin(dphi / 2.0), sl = std::sin(dlam / 2.0);
    double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return kEarthRadiusM * 2.0 * std::asin(std::min(1.0, std::sqrt(a)));
}

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

// O(n^2) reference route. Kept as a public API: the grid index below must
// match it bit-for-bit and tests assert that equivalence.
inline std::vector<double> nn_distances_bruteforce(const std::vector<GeoPoint>& pts,
                                                   int threads = 1) {
    const std::size_t n = pts.size();
    if (n < 2) throw ValidationError("nearest-neighbor distance needs at least 2 venues");
    std::vector<double> out(n);
    parallel_for_index(n, threads, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d = haversine_m(pts[i].lat, pts[i].lon, pts[j].lat, pts[j].lon);
            if (d < best) best = d;
        }
        out[i] = best;
    });
    return out;
}

namespace detail {

// Uniform lat/lon grid with expanding-ring search. Cells are addressed in
// degrees; ring lower bounds are computed as great-circle distances so no
// true nearest neighbor can be pruned. Assumes the point set does not span
// the antimeridian (callers fall back to brute force if it does).
class NnGrid {
public:
    explicit NnGrid(const std::vector<GeoPoint>& pts) : pts_(pts) {
        lat_min_ = lon_min_ = std::numeric_limits<double>::infinity();
        double lat_max = -std::numeric_limits<double>::infinity();
        double lon_max = -std::numeric_limits<double>::infinity();
        for (const auto& p : pts) {
            lat_min_ = std::min(lat_min_, p.lat);
            lon_min_ = std::min(lon_min_, p.lon);
            lat_max = std::max(lat_max, p.lat);
            lon_max = std::max(lon_max, p.lon);
        }
        max_abs_lat_ = std::max(std::abs(lat_min_), std::abs(lat_max));
        double span_lat = lat_max - lat_min_;
        double span_lon = lon_max - lon_min_;
        double span = std::max({span_lat, span_lon, 1e-9});
        // Aim for ~1 point per cell, capped to keep memory in check.
        double target = span / std::sqrt(static_cast<double>(pts.size()));
        cell_ = std::max(target, span / 2048.0);
        nx_ = static_cast<int>(span_lon / cell_) + 1;
        ny_ = static_cast<int>(span_lat / cell_) + 1;
        cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (std::size_t i = 0; i < pts.size(); ++i)
            cells_[cell_index(pts[i])].push_back(static_cast<int>(i));
    }

    double query(std::size_t i) const {
        const GeoPoint& q = pts_[i];
        int qx = col(q.lon), qy = row(q.lat);
        double best = std::numeric_limits<double>::infinity();
        int max_ring = std::max(nx_, ny_) + 1;
        for (int r = 0; r <= max_ring; ++r) {
            if (best < std::numeric_limits<double>::infinity() &&
                ring_lower_bound_m(r) > best)
                break;
            scan_ring(i, q, qx, qy, r, best);
        }
        return best;
    }

private:
    std::size_t cell_index(const GeoPoint& p) const {
        return static_cast<std::size_t>(row(p.lat)) * nx_ + col(p.lon);
    }
    int col(double lon) const {
        return std::clamp(static_cast<int>((lon - lon_min_) / cell_), 0, nx_ - 1);
    }
    int row(double lat) const {
        return std::clamp(static_cast<int>((lat - lat_min_) / cell_), 0, ny_ - 1);
    }

    // Any point in a ring-r cell is at least (r-1) cell widths away in lat
    // or lon. The lon gap bound uses the dataset's max |lat|; the factor
    // shaves a margin so float rounding of the bound can never prune a
    // genuinely closer point.
    double ring_lower_bound_m(int r) const {
        if (r <= 1) return 0.0;
        double gap_rad = deg2rad(static_cast<double>(r - 1) * cell_);
        gap_rad = std::min(gap_rad, std::numbers::pi);
        double lb = kEarthRadiusM * 2.0 *
                    std::asin(std::cos(deg2rad(max_abs_lat_)) * std::sin(gap_rad / 2.0));
        return lb * (1.0 - 1e-12) - 1e-6;
    }

    void scan_cell(std::size_t self, const GeoPoint& q, int cx, int cy, double& best) const {
        if (cx < 0 || cx >= nx_ || cy < 0 || cy >= ny_) return;
        for (int j : cells_[static_cast<std::size_t>(cy) * nx_ + cx]) {
            if (static_cast<std::size_t>(j) == self) continue;
            double d = haversine_m(q.lat, q.lon, pts_[j].lat, pts_[j].lon);
            if (d < best) best = d;
        }
    }

    void scan_ring(std::size_t self, const GeoPoint& q, int qx, int qy, int r,
                   double& best) const {
        if (r == 0) {
            scan_cell(self, q, qx, qy, best);
            return;
        }
        for (int dx = -r; dx <= r; ++dx) {
            scan_cell(self, q, qx + dx, qy - r, best);
            scan_cell(self, q, qx + dx, qy + r, best);
        }
        for (int dy = -r + 1; dy <= r - 1; ++dy) {
            scan_cell(self, q, qx - r, qy + dy, best);
            scan_cell(self, q, qx + r, qy + dy, best);
        }
    }

    const std::vector<GeoPoint>& pts_;
    double lat_min_ = 0.0, lon_min_ = 0.0, cell_ = 1.0, max_abs_lat_ = 0.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> cells_;
};

} // namespace detail

// Grid-indexed nearest-other-venue distances. Falls back to brute force for
// point sets spanning more than 180 degrees of longitude, where the flat
// grid's neighborhood structure breaks down.
inline std::vector<double> nn_distances_grid(const std::vector<GeoPoint>& pts,
                                             int threads = 1) {
    const std::size_t n = pts.size();
    if (n < 2) throw ValidationError("nearest-neighbor distance needs at least 2 venues");
    double lon_min = std::numeric_limits<double>::infinity();
    double lon_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        lon_min = std::min(lon_min, p.lon);
        lon_max = std::max(lon_max, p.lon);
    }
    if (lon_max - lon_min > 180.0) return nn_distances_bruteforce(pts, threads);
    detail::NnGrid grid(pts);
    std::vector<double> out(n);
    parallel_for_index(n, threads, [&](std::size_t i) { out[i] = grid.query(i); });
    return out;
}

} // namespace idrisk

#endif // IDRISK_GEO_HPP
