#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "rankprox/errors.hpp"
#include "rankprox/io.hpp"

using namespace rankprox;
namespace fs = std::filesystem;

TEST_CASE("format_g17 round-trips doubles exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        double v = unit(rng) * std::pow(10.0, static_cast<int>(rng() % 13) - 6);
        CHECK(std::stod(format_g17(v)) == v);
    }
    CHECK(std::stod(format_g17(0.1)) == 0.1);
    CHECK(format_g17(1.0) == "1");
    CHECK(format_g17(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("atomic writes leave no temp file and replace contents whole") {
    fs::path path = fs::temp_directory_path() / "rankprox_io_test.txt";
    write_file_atomic(path.string(), "first\n");
    CHECK(read_text_file(path.string()) == "first\n");
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    write_file_atomic(path.string(), "second\n");
    CHECK(read_text_file(path.string()) == "second\n");
    fs::remove(path);

    CHECK_THROWS_AS(write_file_atomic("/nonexistent-dir/x.txt", "y"), DataError);
    CHECK_THROWS_AS(read_text_file((fs::temp_directory_path() / "rankprox_io_missing").string()), DataError);
}

TEST_CASE("csv reading enforces the column count") {
    fs::path path = fs::temp_directory_path() / "rankprox_io_test.csv";
    write_file_atomic(path.string(), "id,value\r\n0,1.5\n\n1,2.5\n");
    auto rows = read_csv(path.string(), 2);
    REQUIRE(rows.size() == 3);  // header included, blank line skipped
    CHECK(rows[0] == std::vector<std::string>{"id", "value"});
    CHECK(rows[1] == std::vector<std::string>{"0", "1.5"});
    CHECK(rows[2] == std::vector<std::string>{"1", "2.5"});
    CHECK_THROWS_AS(read_csv(path.string(), 3), DataError);
    fs::remove(path);

    CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split_csv_line("") == std::vector<std::string>{""});
}

TEST_CASE("config parses key=value lines with comments") {
    Config cfg = Config::from_string(
        "# run setup\n"
        "task = counting   # inline comment\n"
        "seed=42\n"
        "\n"
        "lr = 1e-3\n"
        "warm = true\n");
    CHECK(cfg.require_str("task") == "counting");
    CHECK(cfg.get_u64("seed", 0) == 42);
    CHECK(cfg.get_double("lr", 0.0) == 1e-3);
    CHECK(cfg.get_bool("warm", false));
    CHECK(cfg.get_int("steps", 500) == 500);  // fallback
    CHECK_FALSE(cfg.has("steps"));
}

TEST_CASE("config rejects malformed and duplicate entries") {
    CHECK_THROWS_AS(Config::from_string("novalue\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("=x\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_string("a=1\na=2\n"), ConfigError);
    CHECK_THROWS_AS(Config::from_file("/nonexistent/run.cfg"), ConfigError);

    Config cfg = Config::from_string("lr=fast\nsteps=many\nflag=maybe\n");
    CHECK_THROWS_AS(cfg.get_double("lr", 0.0), ConfigError);
    CHECK_THROWS_AS(cfg.get_int("steps", 0), ConfigError);
    CHECK_THROWS_AS(cfg.get_u64("steps", 0), ConfigError);
    CHECK_THROWS_AS(cfg.get_bool("flag", false), ConfigError);
    CHECK_THROWS_AS(cfg.require_str("absent"), ConfigError);
}

TEST_CASE("unknown keys are named in the rejection") {
    Config cfg = Config::from_string("task=counting\ntypo_key=1\n");
    CHECK_NOTHROW(cfg.ensure_known({"task", "typo_key"}));
    try {
        cfg.ensure_known({"task"});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
    }
}

TEST_CASE("serialization is sorted and reparseable") {
    Config cfg = Config::from_string("zeta=2\nalpha=1\nmid=x\n");
    CHECK(cfg.serialize() == "alpha=1\nmid=x\nzeta=2\n");
    Config back = Config::from_string(cfg.serialize());
    CHECK(back.entries() == cfg.entries());
    cfg.set("beta", "3");
    CHECK(cfg.serialize() == "alpha=1\nbeta=3\nmid=x\nzeta=2\n");
}
