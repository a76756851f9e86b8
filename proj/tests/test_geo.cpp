#include <catch2/catch_amalgamated.hpp>

#include "idrisk/geo.hpp"
#include "idrisk/rng.hpp"
#include "oracles.hpp"

using namespace idrisk;

namespace {

std::vector<GeoPoint> random_layout(std::uint64_t seed, std::size_t n, double lat0, double lon0,
                                    double span) {
    Rng64 rng(seed);
    std::vector<GeoPoint> pts(n);
    for (auto& p : pts) {
        p.lat = lat0 + rng.uniform01() * span;
        p.lon = lon0 + rng.uniform01() * span;
    }
    return pts;
}

} // namespace

TEST_CASE("haversine basics") {
    CHECK(haversine_m(33.75, -84.39, 33.75, -84.39) == 0.0);
    // Symmetry.
    CHECK(haversine_m(10.0, 20.0, 30.0, 40.0) ==
          Catch::Approx(haversine_m(30.0, 40.0, 10.0, 20.0)).epsilon(1e-15));
}

TEST_CASE("one degree of longitude at the equator, against an independent oracle") {
    double d = haversine_m(0.0, 0.0, 0.0, 1.0);
    double oracle = oracles::haversine_atan2_m(0.0, 0.0, 0.0, 1.0);
    CHECK(std::abs(d - oracle) < 1e-6);
    CHECK(std::abs(d - 111195.0) < 0.5);
}

TEST_CASE("haversine agrees with the atan2 oracle across random pairs") {
    Rng64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        double lat1 = -80.0 + rng.uniform01() * 160.0;
        double lon1 = -179.0 + rng.uniform01() * 358.0;
        double lat2 = lat1 + (rng.uniform01() - 0.5) * 2.0;
        double lon2 = lon1 + (rng.uniform01() - 0.5) * 2.0;
        double d = haversine_m(lat1, lon1, lat2, lon2);
        double o = oracles::haversine_atan2_m(lat1, lon1, lat2, lon2);
        CHECK(d == Catch::Approx(o).margin(1e-6));
    }
}

TEST_CASE("coincident venues have zero nearest-neighbor distance") {
    std::vector<GeoPoint> pts = {{33.75, -84.39}, {33.75, -84.39}};
    auto d = nn_distances_bruteforce(pts);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    auto g = nn_distances_grid(pts);
    CHECK(g == d);
}

TEST_CASE("collinear triple: middle venue takes the nearer side") {
    std::vector<GeoPoint> pts = {{33.70, -84.40}, {33.72, -84.40}, {33.80, -84.40}};
    auto d = nn_distances_bruteforce(pts);
    double dab = haversine_m(33.70, -84.40, 33.72, -84.40);
    double dbc = haversine_m(33.72, -84.40, 33.80, -84.40);
    CHECK(d[1] == std::min(dab, dbc));
    CHECK(d[1] == dab);
}

TEST_CASE("fewer than two venues is an error") {
    std::vector<GeoPoint> one = {{33.75, -84.39}};
    CHECK_THROWS_AS(nn_distances_bruteforce(one), ValidationError);
    CHECK_THROWS_AS(nn_distances_grid(one), ValidationError);
}

TEST_CASE("grid equals brute force bit-for-bit on random layouts") {
    // City-scale boxes at a few latitudes, plus degenerate shapes.
    struct Box {
        double lat0, lon0, span;
    };
    std::vector<Box> boxes = {{33.5, -84.6, 0.5}, {60.0, 10.0, 0.8}, {-45.0, 170.0, 0.3},
                              {0.0, 0.0, 2.0},    {40.0, -80.0, 0.001}};
    std::uint64_t seed = 7;
    for (const auto& box : boxes) {
        for (std::size_t n : {std::size_t{2}, std::size_t{3}, std::size_t{17}, std::size_t{200}}) {
            auto pts = random_layout(seed++, n, box.lat0, box.lon0, box.span);
            auto brute = nn_distances_bruteforce(pts);
            auto grid = nn_distances_grid(pts);
            REQUIRE(grid.size() == brute.size());
            for (std::size_t i = 0; i < n; ++i) CHECK(grid[i] == brute[i]);
        }
    }
}

TEST_CASE("grid equals brute force with heavy coordinate duplication") {
    Rng64 rng(11);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 120; ++i) {
        // Snap to a coarse lattice so many venues share coordinates.
        double lat = 33.5 + static_cast<double>(rng.bounded(6)) * 0.01;
        double lon = -84.6 + static_cast<double>(rng.bounded(6)) * 0.01;
        pts.push_back({lat, lon});
    }
    CHECK(nn_distances_grid(pts) == nn_distances_bruteforce(pts));
}

TEST_CASE("antimeridian-spanning layouts fall back to the exact route") {
    std::vector<GeoPoint> pts = {{10.0, 179.9}, {10.0, -179.9}, {10.0, 170.0}, {10.0, -170.0}};
    auto grid = nn_distances_grid(pts);
    auto brute = nn_distances_bruteforce(pts);
    CHECK(grid == brute);
    // The wrapped pair really is the nearest one.
    CHECK(brute[0] == haversine_m(10.0, 179.9, 10.0, -179.9));
}

TEST_CASE("grid results are independent of thread count") {
    auto pts = random_layout(31, 500, 33.5, -84.6, 0.5);
    auto one = nn_distances_grid(pts, 1);
    auto four = nn_distances_grid(pts, 4);
    CHECK(one == four);
}
