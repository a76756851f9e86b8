#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("IDRISK_CLI");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " >/dev/null 2>/dev/null";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("idrisk_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string operator/(const std::string& s) const { return (path / s).string(); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

} // namespace

TEST_CASE("synth output is byte-identical across reruns") {
    TempDir tmp;
    std::string args = "synth --users 10 --venues 25 --checkins-per-user 15 --support 4 --seed 3";
    REQUIRE(run(args + " --out " + (tmp / "a")) == 0);
    REQUIRE(run(args + " --out " + (tmp / "b")) == 0);
    for (const char* f : {"checkins.csv", "venues.csv", "features.csv", "spec.json"})
        CHECK(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));
}

TEST_CASE("full pipeline: synth -> ingest -> features -> attack -> sweep -> profile") {
    TempDir tmp;
    REQUIRE(run("synth --users 12 --venues 30 --checkins-per-user 20 --support 5 "
                "--concentration 0.5 --seed 9 --out " +
                (tmp / "raw")) == 0);

    // Re-ingest the emitted files (region column already present).
    REQUIRE(run("ingest --checkins " + (tmp / "raw/checkins.csv") + " --venues " +
                (tmp / "raw/venues.csv") + " --min-checkins 12 --min-users 5 --out " +
                (tmp / "ingested")) == 0);
    REQUIRE(fs::exists(tmp.path / "ingested/SYNTH/checkins.csv"));
    REQUIRE(fs::exists(tmp.path / "ingested/stats.csv"));

    std::string ds = tmp / "ingested/SYNTH";
    REQUIRE(run("features --dataset " + ds + " --out " + (tmp / "features.csv")) == 0);
    CHECK(slurp(tmp.path / "features.csv").rfind("venue_id,category,", 0) == 0);

    REQUIRE(run("attack --dataset " + ds + " --class all --reps 10 --max-test 5 --seed 42 "
                "--out " +
                (tmp / "baseline")) == 0);
    REQUIRE(fs::exists(tmp.path / "baseline.csv"));
    REQUIRE(fs::exists(tmp.path / "baseline.json"));

    REQUIRE(run("attack --dataset " + ds +
                " --class popularity=top:0.5 --reps 10 --max-test 5 --seed 42 --out " +
                (tmp / "popular")) == 0);

    REQUIRE(run("sweep --dataset " + ds + " --axis category --reps 5 --max-test 3 --seed 7 "
                "--out " +
                (tmp / "sweep")) == 0);
    CHECK(slurp(tmp.path / "sweep.csv").rfind("class,m,", 0) == 0);

    REQUIRE(run("profile --dataset " + ds + " --baseline " + (tmp / "baseline.json") +
                " --out " + (tmp / "profile")) == 0);
    CHECK(slurp(tmp.path / "profile.csv").rfind("user_id,entropy_bits,", 0) == 0);
}

TEST_CASE("attack reruns and thread counts are byte-identical") {
    TempDir tmp;
    REQUIRE(run("synth --users 10 --venues 20 --checkins-per-user 15 --support 4 --seed 5 "
                "--out " +
                (tmp / "ds")) == 0);
    std::string base = "attack --dataset " + (tmp / "ds") +
                       " --class all --reps 12 --max-test 4 --seed 99";
    REQUIRE(run(base + " --threads 1 --out " + (tmp / "t1")) == 0);
    REQUIRE(run(base + " --threads 4 --out " + (tmp / "t4")) == 0);
    REQUIRE(run(base + " --threads 1 --out " + (tmp / "t1b")) == 0);
    CHECK(slurp(tmp.path / "t1.csv") == slurp(tmp.path / "t4.csv"));
    CHECK(slurp(tmp.path / "t1.json") == slurp(tmp.path / "t4.json"));
    CHECK(slurp(tmp.path / "t1.json") == slurp(tmp.path / "t1b.json"));
}

TEST_CASE("malformed input exits 2 and names the row") {
    TempDir tmp;
    write_file(tmp.path / "bad.csv",
               "user_id,venue_id,timestamp,lat,lon\n"
               "u1,v1,2010-10-02T14:00:00Z,95.0,-84.0\n");
    write_file(tmp.path / "venues.csv", "venue_id,category,lat,lon\nv1,Food,33.7,-84.4\n");
    std::string cmd = cli_path() + " ingest --checkins " + (tmp / "bad.csv") + " --venues " +
                      (tmp / "venues.csv") + " --min-users 1 --out " + (tmp / "out") + " 2> " +
                      (tmp / "err.txt");
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    auto err = slurp(tmp.path / "err.txt");
    CHECK(err.find("row 2") != std::string::npos);
    CHECK(err.find("lat") != std::string::npos);
}

TEST_CASE("infeasible experiments exit 3") {
    TempDir tmp;
    REQUIRE(run("synth --users 3 --venues 10 --checkins-per-user 5 --support 3 --seed 1 "
                "--out " +
                (tmp / "tiny")) == 0);
    // 5 check-ins per user can never cover an 11-check-in eligibility floor.
    CHECK(run("attack --dataset " + (tmp / "tiny") + " --class all --reps 5 --out " +
              (tmp / "r")) == 3);
}

TEST_CASE("unknown flags exit 2") {
    CHECK(run("attack --no-such-flag") == 2);
    CHECK(run("sweep --dataset nowhere --axis sideways --out x") == 2);
}

TEST_CASE("ingest with no surviving region exits 0 with empty stats") {
    TempDir tmp;
    write_file(tmp.path / "checkins.csv",
               "user_id,venue_id,timestamp,lat,lon,region\n"
               "u1,v1,2010-10-02T14:00:00Z,33.7,-84.4,R1\n");
    write_file(tmp.path / "venues.csv", "venue_id,category,lat,lon\nv1,Food,33.7,-84.4\n");
    CHECK(run("ingest --checkins " + (tmp / "checkins.csv") + " --venues " + (tmp / "venues.csv") +
              " --out " + (tmp / "out")) == 0);
    CHECK(slurp(tmp.path / "out/stats.csv") == "region,checkins,users,venues,users_per_venue\n");
}
