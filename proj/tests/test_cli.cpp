#include "coda/cli.hpp"
#include "coda/lifetable.hpp"

#include "support/synthetic.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace coda;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("coda_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string fixture_path(const std::string& name) {
  return std::string(CODA_FIXTURE_DIR) + "/" + name;
}

void write_file(const fs::path& p, const std::string& contents) {
  std::ofstream out(p);
  out << contents;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(std::initializer_list<std::string> args) {
  return coda::cli::run(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("ingest: HMD fixture to canonical CSV") {
  TempDir dir("ingest");
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + fixture_path("AUS_female_lt.txt") + R"(", "source": "hmd"}
  })");
  const int exit_code = run_cli({"ingest", "--config",
                                 (dir.path / "config.json").string(), "--out",
                                 dir.path.string()});
  CHECK(exit_code == 0);
  REQUIRE(fs::exists(dir.path / "series.csv"));
  std::ifstream in(dir.path / "series.csv");
  const CompositionSeries series = read_series_csv(in);
  CHECK(series.n() == 100);
  CHECK(series.dim() == 111);
  CHECK(fs::exists(dir.path / "ingest_summary.json"));
}

TEST_CASE("ingest: truncated file exits 2 naming the line") {
  TempDir dir("trunc");
  std::ifstream full(fixture_path("AUS_female_lt.txt"));
  std::string line;
  std::ostringstream head;
  for (int i = 0; i < 40 && std::getline(full, line); ++i) head << line << "\n";
  head << "  1921 37 0.004\n";  // stray partial row
  write_file(dir.path / "bad.txt", head.str());
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + (dir.path / "bad.txt").string() + R"(", "source": "hmd"}
  })");
  const int exit_code = run_cli({"ingest", "--config",
                                 (dir.path / "config.json").string(), "--out",
                                 dir.path.string()});
  CHECK(exit_code == cli::kExitInputError);
}

TEST_CASE("ingest: rebuild flag changes zero-cell counts") {
  TempDir dir("zeros");
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + fixture_path("AUS_male_lt.txt") + R"(", "source": "hmd"}
  })");
  auto zero_cells = [&](const char* flag) {
    const int code = run_cli({"ingest", "--config",
                              (dir.path / "config.json").string(), "--out",
                              dir.path.string(), flag});
    REQUIRE(code == 0);
    std::ifstream in(dir.path / "series.csv");
    return read_series_csv(in).zero_cells();
  };
  const int rebuilt = zero_cells("--rebuild-from-qx");
  const int raw = zero_cells("--no-rebuild-from-qx");
  CHECK(rebuilt <= raw);
  CHECK(raw > 0);
}

TEST_CASE("config validation") {
  TempDir dir("config");
  SUBCASE("unknown keys rejected") {
    write_file(dir.path / "config.json", R"({
      "data": {"path": "x", "source": "hmd", "typo_key": 1}
    })");
    CHECK(run_cli({"ingest", "--config", (dir.path / "config.json").string(),
                   "--out", dir.path.string()}) == cli::kExitInputError);
  }
  SUBCASE("invalid JSON rejected") {
    write_file(dir.path / "config.json", "{not json");
    CHECK(run_cli({"ingest", "--config", (dir.path / "config.json").string(),
                   "--out", dir.path.string()}) == cli::kExitInputError);
  }
  SUBCASE("alpha out of range rejected") {
    write_file(dir.path / "config.json", R"({
      "data": {"path": "x"},
      "transform": {"kind": "alpha", "alpha": 1.5}
    })");
    CHECK(run_cli({"ingest", "--config", (dir.path / "config.json").string(),
                   "--out", dir.path.string()}) == cli::kExitInputError);
  }
}

TEST_CASE("tune: fixed alpha is a config contradiction") {
  TempDir dir("tune4");
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + fixture_path("AUS_female_lt.txt") + R"(", "source": "hmd"},
    "transform": {"kind": "alpha", "alpha": 0.5}
  })");
  CHECK(run_cli({"tune", "--config", (dir.path / "config.json").string(),
                 "--out", dir.path.string()}) == cli::kExitConfigContradiction);
}

TEST_CASE("forecast: point-only run with B = 0") {
  TempDir dir("fc0");
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + fixture_path("AUS_female_lt.txt") + R"(", "source": "hmd"},
    "transform": {"kind": "ilr"},
    "model": {"model_rule": "rwd", "k_rule": "fixed(2)"},
    "forecast": {"H": 5, "B": 0}
  })");
  const int exit_code = run_cli({"forecast", "--config",
                                 (dir.path / "config.json").string(), "--out",
                                 dir.path.string()});
  REQUIRE(exit_code == 0);
  const std::string csv = read_file(dir.path / "forecast.csv");
  CHECK(csv.rfind("year,age,point\n", 0) == 0);  // no bound columns
  // 5 horizons x 111 ages + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5 * 111 + 1);
  CHECK(fs::exists(dir.path / "forecast_meta.json"));
  CHECK(fs::exists(dir.path / "fan_chart.svg"));
}

TEST_CASE("forecast: bounds appear per gamma and are reproducible") {
  TempDir dir("fcb");
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + fixture_path("AUS_female_lt.txt") + R"(", "source": "hmd"},
    "transform": {"kind": "ilr"},
    "model": {"model_rule": "rwd", "k_rule": "fixed(2)"},
    "forecast": {"H": 3, "B": 150, "gammas": [0.2, 0.05], "seed": 5}
  })");
  REQUIRE(run_cli({"forecast", "--config", (dir.path / "config.json").string(),
                   "--out", dir.path.string()}) == 0);
  const std::string first = read_file(dir.path / "forecast.csv");
  CHECK(first.rfind("year,age,point,lb_0.2,ub_0.2,lb_0.05,ub_0.05\n", 0) == 0);
  const std::string meta = read_file(dir.path / "forecast_meta.json");
  CHECK(meta.find("\"K\": 2") != std::string::npos);

  REQUIRE(run_cli({"forecast", "--config", (dir.path / "config.json").string(),
                   "--out", dir.path.string()}) == 0);
  CHECK(read_file(dir.path / "forecast.csv") == first);  // byte-identical
}

TEST_CASE("evaluate: emits tables for both schemes") {
  TempDir dir("eval");
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + fixture_path("AUS_male_lt.txt") + R"(", "source": "hmd"},
    "transform": {"kind": "ilr"},
    "model": {"model_rule": "rwd", "k_rule": "fixed(2)"},
    "forecast": {"H": 10, "B": 0},
    "experiment": {"scheme": "both", "criteria": ["KLD"], "methods": ["ilr", "eda"]}
  })");
  const int exit_code = run_cli({"evaluate", "--config",
                                 (dir.path / "config.json").string(), "--out",
                                 dir.path.string()});
  REQUIRE(exit_code == 0);
  for (const char* scheme : {"expanding", "rolling"}) {
    CHECK(fs::exists(dir.path / ("table_" + std::string(scheme) + ".csv")));
    CHECK(fs::exists(dir.path / ("table_" + std::string(scheme) + ".json")));
    CHECK(fs::exists(dir.path / ("errors_by_horizon_" + std::string(scheme) + ".csv")));
    CHECK(fs::exists(dir.path / ("fan_data_" + std::string(scheme) + ".csv")));
  }
  const std::string expanding = read_file(dir.path / "table_expanding.csv");
  const std::string rolling = read_file(dir.path / "table_rolling.csv");
  CHECK(expanding != rolling);
}

TEST_CASE("unknown criterion rejected before computation") {
  TempDir dir("crit");
  write_file(dir.path / "config.json", R"({
    "data": {"path": ")" + fixture_path("AUS_male_lt.txt") + R"(", "source": "hmd"},
    "experiment": {"criteria": ["WAT"]}
  })");
  CHECK(run_cli({"evaluate", "--config", (dir.path / "config.json").string(),
                 "--out", dir.path.string()}) == cli::kExitInputError);
}

TEST_SUITE_END();
