#include "nlab/config.hpp"
#include "nlab/csv.hpp"
#include "nlab/error.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

using namespace nlab;

TEST_CASE("doubles print in shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(3.0) == "3");
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
  CHECK_THROWS_AS(parse_double(""), ConfigError);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("CSV write and read") {
  const auto path = std::filesystem::temp_directory_path() / "nlab_csv_test.csv";
  {
    CsvWriter w(path, {"a", "b", "name"}, {{"p", "1.5"}});
    w.cell(0.25).cell(3).cell(std::string_view("x"));
    w.end_row();
    w.cell(1e-20).cell(-7LL).cell(std::string_view("y"));
    w.end_row();
  }
  {
    CsvWriter bad(path.string() + ".bad", {"a", "b"});
    bad.cell(1.0);
    CHECK_THROWS_AS(bad.end_row(), UsageError);
  }
  std::filesystem::remove(path.string() + ".bad");
  const CsvTable t = read_csv(path);
  CHECK(t.meta.at("p") == "1.5");
  CHECK(t.header == std::vector<std::string>{"a", "b", "name"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.column("a") == std::vector<double>{0.25, 1e-20});
  CHECK(t.column("b") == std::vector<double>{3.0, -7.0});
  CHECK_THROWS(t.column_index("missing"));
  std::filesystem::remove(path);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "experiment.kind = rates\n"
      "model.p=1.7   # trailing\n"
      "diag.window = 5, 50\n"
      "time.positivity_guard = false\n"
      "\n"
      "grid.N = 2\n");
  CHECK(c.kind == "rates");
  CHECK(c.p == 1.7);
  CHECK(c.window == std::vector<double>{5.0, 50.0});
  CHECK_FALSE(c.positivity_guard);
  CHECK(c.dim == 2);
  CHECK(c.h == ExperimentConfig{}.h);
}

TEST_CASE("config errors name the line and key") {
  auto message = [](const char* text) {
    try {
      parse_config(text, "cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("model.p = 1.5\nbogus.key = 1\n").find("cfg:2") != std::string::npos);
  CHECK(message("model.p = 1.5\nbogus.key = 1\n").find("bogus.key") != std::string::npos);
  CHECK(message("model.p = 1.5\nmodel.p = 1.6\n").find("duplicate") != std::string::npos);
  CHECK(message("grid.N = 1.5\n").find("integer") != std::string::npos);
  CHECK(message("scheme = rk4\n").find("scheme") != std::string::npos);
  CHECK(message("just words\n").find("cfg:1") != std::string::npos);
  CHECK(message("model.p = abc\n").find("model.p") != std::string::npos);
}

TEST_CASE("normalized config round trip and hash") {
  ExperimentConfig c;
  c.kind = "converge";
  c.p = 1.25;
  c.snapshots = {10, 20, 40, 80};
  c.input_profile = "prof.csv";
  const std::string text = normalized_config(c);
  const ExperimentConfig back = parse_config(text);
  CHECK(normalized_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  ExperimentConfig moved = c;
  moved.output_dir = "elsewhere";
  CHECK(config_hash(moved) == config_hash(c));
  ExperimentConfig changed = c;
  changed.p = 1.26;
  CHECK(config_hash(changed) != config_hash(c));
  for (const auto& key : config_keys()) CHECK(text.find(key + "=") != std::string::npos);
}
