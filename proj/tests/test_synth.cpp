#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "idrisk/eval.hpp"
#include "idrisk/synth.hpp"

using namespace idrisk;
using synth::SynthSpec;

namespace {

eval::ExperimentConfig quick_cfg(int reps, int max_m, std::uint64_t seed) {
    eval::ExperimentConfig cfg;
    cfg.repetitions = reps;
    cfg.max_test_size = max_m;
    cfg.base_seed = seed;
    return cfg;
}

double mean_accuracy_at(const eval::AttackResult& r, int m) {
    return r.per_m.at(static_cast<std::size_t>(m - 1)).mean_accuracy;
}

} // namespace

TEST_CASE("generation is a pure function of the spec") {
    SynthSpec spec;
    spec.n_users = 100;
    spec.n_venues = 500;
    spec.checkins_per_user = 50;
    spec.concentration = 0.1;
    spec.seed = 7;
    auto a = synth::generate(spec);
    auto b = synth::generate(spec);
    CHECK(a.dataset == b.dataset);
    CHECK(a.feature_truth == b.feature_truth);

    spec.seed = 8;
    auto c = synth::generate(spec);
    CHECK(a.dataset != c.dataset);
}

TEST_CASE("generated datasets satisfy ingest invariants") {
    SynthSpec spec;
    spec.n_users = 40;
    spec.n_venues = 120;
    spec.checkins_per_user = 30;
    spec.shared_core = 10;
    spec.support_size = 8;
    spec.popularity_skew = 1.2;
    spec.seed = 99;
    auto out = synth::generate(spec);
    const auto& ds = out.dataset;

    CHECK(ds.checkins.size() == 40 * 30);
    CHECK(ds.venues.size() == 120);
    for (const auto& c : ds.checkins) {
        CHECK(ds.venues.count(c.venue_id) == 1);
        CHECK(c.region == ds.region);
        CHECK(c.lat >= spec.lat_min);
        CHECK(c.lat <= spec.lat_max);
        CHECK(c.lon >= spec.lon_min);
        CHECK(c.lon <= spec.lon_max);
    }
    // Emitted files parse back through the ingest module unchanged.
    std::ostringstream checkins_out, venues_out;
    ingest::write_checkins(checkins_out, ds);
    ingest::write_venues(venues_out, ds);
    std::istringstream checkins_in(checkins_out.str()), venues_in(venues_out.str());
    CHECK(ingest::parse_checkins(checkins_in) == ds.checkins);
    CHECK(ingest::parse_venues(venues_in, ingest::default_taxonomy()) == ds.venues);
}

TEST_CASE("feature ground truth matches the features module") {
    SynthSpec spec;
    spec.n_users = 25;
    spec.n_venues = 60;
    spec.checkins_per_user = 20;
    spec.shared_core = 5;
    spec.support_size = 6;
    spec.seed = 1234;
    auto out = synth::generate(spec);
    auto computed = features::compute_features(out.dataset);
    REQUIRE(computed.size() == out.feature_truth.size());
    for (const auto& [id, truth] : out.feature_truth) {
        const auto& f = computed.at(id);
        CHECK(f.visitor_count == truth.visitor_count);
        CHECK(f.visit_count == truth.visit_count);
        CHECK(f.nn_distance_m == truth.nn_distance_m); // grid vs brute force
    }
}

TEST_CASE("near-zero concentration makes users separable") {
    // Uniform attractiveness over a large venue pool keeps the users'
    // single peak venues from colliding.
    SynthSpec spec;
    spec.n_users = 10;
    spec.n_venues = 500;
    spec.checkins_per_user = 25;
    spec.concentration = 0.01;
    spec.popularity_skew = 0.0;
    spec.shared_core = 0;
    spec.support_size = 5;
    spec.seed = 55;
    auto ds = synth::generate(spec).dataset;
    auto feats = features::compute_features(ds);
    auto result = eval::run_experiment(ds, feats, quick_cfg(30, 10, 3));
    CHECK(mean_accuracy_at(result, 10) >= 0.95);
}

TEST_CASE("a single shared venue pins accuracy to chance") {
    SynthSpec spec;
    spec.n_users = 10;
    spec.n_venues = 1;
    spec.checkins_per_user = 20;
    spec.shared_core = 1;
    spec.support_size = 0;
    spec.seed = 2;
    auto ds = synth::generate(spec).dataset;
    CHECK(ds.venues.size() == 1);
    auto feats_pop = features::compute_popularity(ds);
    CHECK(feats_pop.at(ds.venues.begin()->first).second == 200);

    // All models are identical; every identification lands on the
    // lexicographic tie-break, so per-repetition accuracy is exactly 1/k.
    features::FeatureMap fake;
    features::VenueFeatures f;
    f.venue_id = ds.venues.begin()->first;
    f.visit_count = 200;
    f.visitor_count = 10;
    fake.emplace(f.venue_id, f);
    auto result = eval::run_experiment(ds, fake, quick_cfg(20, 5, 4));
    for (int m : {1, 3, 5}) CHECK(mean_accuracy_at(result, m) == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("infeasible specs are rejected") {
    SynthSpec spec;
    spec.n_venues = 10;
    spec.support_size = 11;
    CHECK_THROWS_AS(synth::generate(spec), ConfigError);
    spec.support_size = 5;
    spec.shared_core = 7;
    CHECK_THROWS_AS(synth::generate(spec), ConfigError);
    spec.shared_core = 0;
    spec.concentration = 0.0;
    CHECK_THROWS_AS(synth::generate(spec), ConfigError);
    spec.concentration = 1.0;
    spec.category_fractions = {{"Food", 0.5}, {"Residence", 0.2}};
    CHECK_THROWS_AS(synth::generate(spec), ConfigError);
}

TEST_CASE("category fractions apportion the venue table") {
    SynthSpec spec;
    spec.n_users = 5;
    spec.n_venues = 40;
    spec.checkins_per_user = 15;
    spec.support_size = 4;
    spec.category_fractions = {{"Food", 0.5}, {"Residence", 0.25}, {"Shop & Service", 0.25}};
    spec.seed = 3;
    auto ds = synth::generate(spec).dataset;
    std::map<std::string, int> by_cat;
    for (const auto& [id, v] : ds.venues) ++by_cat[v.category];
    CHECK(by_cat["Food"] == 20);
    CHECK(by_cat["Residence"] == 10);
    CHECK(by_cat["Shop & Service"] == 10);
}

TEST_CASE("clustered layouts stay inside the bounding box") {
    SynthSpec spec;
    spec.n_users = 5;
    spec.n_venues = 200;
    spec.checkins_per_user = 15;
    spec.support_size = 4;
    spec.layout = synth::Layout::clustered;
    spec.clusters = 4;
    spec.cluster_sigma_deg = 0.02;
    spec.seed = 91;
    auto ds = synth::generate(spec).dataset;
    for (const auto& [id, v] : ds.venues) {
        CHECK(v.lat >= spec.lat_min);
        CHECK(v.lat <= spec.lat_max);
        CHECK(v.lon >= spec.lon_min);
        CHECK(v.lon <= spec.lon_max);
    }
}

TEST_CASE("flattening preferences never helps the attacker") {
    // Mean accuracy at m=10, averaged over seeds, must not increase with
    // concentration.
    std::vector<double> grid = {0.05, 1.0, 20.0};
    std::vector<double> means;
    for (double conc : grid) {
        double acc = 0.0;
        const int n_seeds = 20;
        for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
            SynthSpec spec;
            spec.n_users = 8;
            spec.n_venues = 30;
            spec.checkins_per_user = 15;
            spec.concentration = conc;
            spec.shared_core = 3;
            spec.support_size = 4;
            spec.seed = seed;
            auto ds = synth::generate(spec).dataset;
            auto feats = features::compute_features(ds);
            auto result = eval::run_experiment(ds, feats, quick_cfg(10, 10, seed * 7));
            acc += mean_accuracy_at(result, 10);
        }
        means.push_back(acc / n_seeds);
    }
    CHECK(means[0] >= means[1]);
    CHECK(means[1] >= means[2]);
}

TEST_CASE("oracle instances are valid and seed-distinct") {
    std::set<std::string> signatures;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto ds = synth::make_oracle_instance(5, 6, 3, seed);
        CHECK(ds.venues.size() == 6);
        std::string sig;
        for (const auto& c : ds.checkins) {
            CHECK(ds.venues.count(c.venue_id) == 1);
            sig += c.user_id + c.venue_id + ";";
        }
        signatures.insert(sig);
    }
    CHECK(signatures.size() > 195); // uniform draws: near-certain distinct
    CHECK_THROWS_AS(synth::make_oracle_instance(6, 6, 3, 1), ConfigError);
    CHECK_THROWS_AS(synth::make_oracle_instance(5, 7, 3, 1), ConfigError);
    CHECK_THROWS_AS(synth::make_oracle_instance(5, 6, 4, 1), ConfigError);
}
