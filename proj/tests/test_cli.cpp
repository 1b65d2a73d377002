#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mortmix/cli.hpp"
#include "mortmix/data_io.hpp"
#include "test_paths.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = mortmix::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const std::vector<std::string> kFig1a = {"--family", "gm", "--a", "0.0005", "--b", "0.1", "--c", "0.005"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("eval table") {
    const auto r = run(with({"eval"}, with(kFig1a, {"--ages", "0:110:0.5"})));
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 222);
    CHECK(rows[0] == std::vector<std::string>{"age", "hazard", "survival", "density", "g1", "g2", "p"});
    CHECK(std::stod(rows[1][1]) == doctest::Approx(0.0055).epsilon(1e-15));
  }

  TEST_CASE("eval without a Makeham term") {
    const auto r = run({"eval", "--a", "0.0005", "--b", "0.1", "--c", "0"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i][6] == "0");
      CHECK(rows[i][4].empty());
    }
  }

  TEST_CASE("invalid parameters are usage errors") {
    CHECK(run({"eval", "--a", "0", "--b", "0.1", "--c", "0.005"}).code == 1);
    CHECK(run({"eval", "--a", "0.0005", "--b", "0.1"}).code == 1);
    CHECK(run({"eval", "--family", "weibull"}).code == 1);
    CHECK(run({"eval", "--a", "0.0005", "--b", "0.1", "--c", "0.005", "--ages", "5:1:1"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({}).code == 1);
  }

  TEST_CASE("decompose summaries") {
    auto r = run(with({"decompose"}, kFig1a));
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["threshold_age"].get<double>() == doctest::Approx(23.0259).epsilon(1e-5));
    CHECK(j["pi"].get<double>() == doctest::Approx(0.20990604717248193).epsilon(1e-12));
    CHECK(j["modal_age_senescent"].get<double>() == doctest::Approx(52.4702).epsilon(1e-5));
    CHECK(j["pi_method"] == "incomplete_gamma");
    CHECK(j["pi_fallback"] == false);

    r = run({"decompose", "--a", "0.4", "--b", "0.8", "--c", "0.2"});
    CHECK(json::parse(r.out)["threshold_age"].get<double>() == 0.0);

    r = run({"decompose", "--a", "0.0005", "--b", "0.1", "--c", "0"});
    j = json::parse(r.out);
    CHECK(j["pi"].get<double>() == 0.0);
    CHECK(j["modal_age_premature"].is_null());
  }

  TEST_CASE("decompose grid file") {
    TempDir dir("mortmix_cli_grid");
    const auto grid = (dir.path / "grid.csv").string();
    const auto r = run(with({"decompose", "--grid-out", grid}, kFig1a));
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["grid_file"] == grid);
    CHECK(csv_rows(slurp(grid)).size() == 222);
  }

  TEST_CASE("Siler flags") {
    auto r = run({"decompose", "--family", "siler", "--a1", "0.01", "--b1", "1", "--a2", "0.0005", "--b2", "0.1", "--c",
                  "0.005"});
    REQUIRE(r.code == 0);
    const double x1 = json::parse(r.out)["threshold_age"].get<double>();
    r = run({"decompose", "--family", "siler", "--a1", "0.01", "--b1", "1", "--a", "0.0005", "--b", "0.1", "--c",
             "0.005"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["threshold_age"].get<double>() == x1);
  }

  TEST_CASE("fit on the fixtures") {
    TempDir dir("mortmix_cli_fit");
    const auto out = (dir.path / "results.csv").string();
    const auto r = run({"fit", "--deaths", test_paths::deaths_fixture().string(), "--exposures",
                        test_paths::exposures_fixture().string(), "--out", out, "--threads", "2"});
    CHECK(r.code == 0);
    std::ifstream in(out);
    const auto records = mortmix::read_results(in);
    CHECK(records.size() == 6);
    for (const auto& rec : records) CHECK(rec.converged);
  }

  TEST_CASE("fit with a missing input leaves no output") {
    TempDir dir("mortmix_cli_missing");
    const auto out = dir.path / "results.csv";
    const auto r = run({"fit", "--deaths", test_paths::deaths_fixture().string(), "--exposures",
                        (dir.path / "nope.txt").string(), "--out", out.string()});
    CHECK(r.code == 3);
    CHECK_FALSE(r.err.empty());
    CHECK_FALSE(fs::exists(out));
    CHECK(fs::is_empty(dir.path));
  }

  TEST_CASE("fit with a corrupt input") {
    TempDir dir("mortmix_cli_corrupt");
    const auto bad = dir.path / "bad.txt";
    std::ofstream(bad) << "Title\n\nYear Age Female Male Total\n2000 20 1 2\n";
    const auto r = run({"fit", "--deaths", bad.string(), "--exposures", test_paths::exposures_fixture().string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("line 4") != std::string::npos);
  }

  TEST_CASE("gamma-Gompertz fit on Gompertz data") {
    const auto r = run({"fit", "--deaths", test_paths::deaths_fixture().string(), "--exposures",
                        test_paths::exposures_fixture().string(), "--family", "ggm", "--sex", "male"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto records = mortmix::read_results(in);
    REQUIRE(records.size() == 3);
    for (const auto& rec : records) {
      CHECK(rec.family == "ggm");
      CHECK(*rec.values.at("gamma") < 0.05);
    }
  }

  TEST_CASE("simulate") {
    TempDir dir("mortmix_cli_sim");
    const auto a = (dir.path / "a.csv").string();
    const auto b = (dir.path / "b.csv").string();
    auto r = run(with({"simulate", "--n", "20000", "--seed", "5", "--out", a}, kFig1a));
    REQUIRE(r.code == 0);
    const auto summary = json::parse(r.out);
    CHECK(summary["n"] == 20000);
    CHECK(std::abs(summary["empirical_pi"].get<double>() - summary["analytic_pi"].get<double>()) <
          4.0 * summary["standard_error"].get<double>());
    r = run(with({"simulate", "--n", "20000", "--seed", "5", "--out", b}, kFig1a));
    REQUIRE(r.code == 0);
    CHECK(slurp(a) == slurp(b));

    r = run(with({"simulate", "--n", "1", "--out", a}, kFig1a));
    REQUIRE(r.code == 0);
    CHECK(csv_rows(slurp(a)).size() == 2);

    CHECK(run({"simulate", "--n", "10", "--out", a, "--a", "0.0005", "--b", "0.1", "--c", "0"}).code == 1);
    CHECK(run(with({"simulate", "--n", "10", "--out", (dir.path / "no" / "x.csv").string()}, kFig1a)).code == 3);
  }

  TEST_CASE("help lists flags with defaults") {
    const auto r = run({"fit", "--help"});
    CHECK(r.code == 0);
    for (const char* flag : {"--deaths", "--exposures", "--family", "--min-age", "--sex", "--seed", "--threads",
                             "--prior-alpha", "--prior-beta", "--config"}) {
      CHECK(r.out.find(flag) != std::string::npos);
    }
    CHECK(r.out.find("20") != std::string::npos);
    const auto e = run({"eval", "--help"});
    CHECK(e.out.find("0:110:0.5") != std::string::npos);
  }

  TEST_CASE("configuration file with flag override") {
    TempDir dir("mortmix_cli_config");
    const auto cfg = dir.path / "run.conf";
    std::ofstream(cfg) << "family=gm\na=0.0005\nb=0.1\nc=0.005\n";
    auto r = run({"decompose", "--config", cfg.string()});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["threshold_age"].get<double>() == doctest::Approx(23.0259).epsilon(1e-5));
    r = run({"decompose", "--config", cfg.string(), "--c", "0.0005"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["threshold_age"].get<double>() == 0.0);
    CHECK(run({"decompose", "--config", (dir.path / "absent.conf").string()}).code == 3);
  }
}
