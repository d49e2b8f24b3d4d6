#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "memwave/cli.hpp"

using namespace memwave;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           fs::path("memwave-test-" + std::to_string(
                        std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string sub(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("validate writes verdicts and returns clean exit") {
  TempDir tmp;
  const int code = cli::cmd_validate("preset:no-delay-linear", tmp.sub("v"));
  REQUIRE(code == cli::kExitOk);
  REQUIRE(fs::exists(fs::path(tmp.sub("v")) / "hypotheses.txt"));
  REQUIRE(fs::exists(fs::path(tmp.sub("v")) / "hypotheses.json"));
  REQUIRE(fs::exists(fs::path(tmp.sub("v")) / "manifest.json"));
  const std::string txt = slurp(fs::path(tmp.sub("v")) / "hypotheses.txt");
  REQUIRE(txt.find("overall = pass") != std::string::npos);
}

TEST_CASE("validate propagates the strict failure exit code") {
  TempDir tmp;
  const std::string cfg_path = tmp.sub("bad.cfg");
  {
    std::ofstream out(cfg_path);
    out << serialize_config(preset_no_delay_linear());
    out << "kernel.terms = (1.2, 1)\n";  // appended duplicate would be invalid
  }
  // the duplicate key makes the parse fail outright: exit 1
  REQUIRE(cli::cmd_validate(cfg_path, tmp.sub("a")) == cli::kExitError);

  ScenarioConfig heavy = preset_no_delay_linear();
  heavy.kernel_terms = {{1.2, 1.0}};
  const std::string heavy_path = tmp.sub("heavy.cfg");
  {
    std::ofstream out(heavy_path);
    out << serialize_config(heavy);
  }
  REQUIRE(cli::cmd_validate(heavy_path, tmp.sub("b")) ==
          cli::kExitHypothesisFail);
}

TEST_CASE("missing files and unknown presets exit with an error") {
  TempDir tmp;
  REQUIRE(cli::cmd_validate(tmp.sub("nope.cfg"), tmp.sub("x")) ==
          cli::kExitError);
  REQUIRE(cli::cmd_certify("preset:typo", tmp.sub("y")) == cli::kExitError);
}

TEST_CASE("certify splits certified and infeasible exit codes") {
  TempDir tmp;
  REQUIRE(cli::cmd_certify("preset:power-source-small", tmp.sub("ok")) ==
          cli::kExitOk);
  const std::string cert = slurp(fs::path(tmp.sub("ok")) / "certificate.json");
  REQUIRE(cert.find("\"verdict\": \"certified\"") != std::string::npos);

  REQUIRE(cli::cmd_certify("preset:destabilizing-gain", tmp.sub("no")) ==
          cli::kExitInfeasible);
  const std::string bad = slurp(fs::path(tmp.sub("no")) / "certificate.json");
  REQUIRE(bad.find("infeasible") != std::string::npos);
}

TEST_CASE("run produces trajectory, energy, report, and is deterministic") {
  TempDir tmp;
  cli::RunOptions opt;
  opt.horizon = 2.0;
  opt.cadence = 10;
  const int c1 = cli::cmd_run("preset:power-source-small", tmp.sub("r1"), opt);
  const int c2 = cli::cmd_run("preset:power-source-small", tmp.sub("r2"), opt);
  REQUIRE(c1 == cli::kExitOk);
  REQUIRE(c2 == cli::kExitOk);
  for (const char* f : {"trajectory.csv", "energy.csv", "report.json"}) {
    const std::string a = slurp(fs::path(tmp.sub("r1")) / f);
    const std::string b = slurp(fs::path(tmp.sub("r2")) / f);
    REQUIRE(a == b);  // byte-identical reruns
  }
  const std::string energy = slurp(fs::path(tmp.sub("r1")) / "energy.csv");
  REQUIRE(energy.rfind("t,kinetic,elastic,source,memory,gain_window,total,"
                       "running_max\n", 0) == 0);
  const std::string report = slurp(fs::path(tmp.sub("r1")) / "report.json");
  REQUIRE(report.find("\"certificate\"") != std::string::npos);
  REQUIRE(report.find("\"audits\"") != std::string::npos);
}

TEST_CASE("run on a strict failing config stops before simulating") {
  TempDir tmp;
  ScenarioConfig heavy = preset_power_source_small();
  heavy.kernel_terms = {{1.5, 1.0}};
  const std::string path = tmp.sub("heavy.cfg");
  {
    std::ofstream out(path);
    out << serialize_config(heavy);
  }
  REQUIRE(cli::cmd_run(path, tmp.sub("out")) == cli::kExitHypothesisFail);
  REQUIRE_FALSE(fs::exists(fs::path(tmp.sub("out")) / "trajectory.csv"));
}

TEST_CASE("fit recovers the rate from a synthetic CSV") {
  TempDir tmp;
  const std::string csv_path = tmp.sub("series.csv");
  {
    std::ofstream out(csv_path);
    out << "t,E\n";
    for (double t : linspace(0.0, 10.0, 300))
      out << fmt_g(t) << "," << fmt_g(4.0 * std::exp(-0.7 * t)) << "\n";
  }
  REQUIRE(cli::cmd_fit(csv_path, 0.5, tmp.sub("f")) == cli::kExitOk);
  const std::string fit = slurp(fs::path(tmp.sub("f")) / "fit.json");
  REQUIRE(fit.find("\"rate\"") != std::string::npos);
  const double rate = json::parse(fit)["rate"].get<double>();
  REQUIRE(rate == Catch::Approx(0.7).margin(1e-6));
}

TEST_CASE("plot emits a well-formed two-panel SVG") {
  TempDir tmp;
  const std::string csv_path = tmp.sub("series.csv");
  {
    std::ofstream out(csv_path);
    for (double t : linspace(0.0, 5.0, 100))
      out << fmt_g(t) << "," << fmt_g(std::exp(-t)) << "\n";
  }
  REQUIRE(cli::cmd_plot(csv_path, tmp.sub("p")) == cli::kExitOk);
  const std::string svg = slurp(fs::path(tmp.sub("p")) / "plot.svg");
  REQUIRE(svg.rfind("<svg", 0) == 0);
  REQUIRE(svg.find("</svg>") != std::string::npos);
  REQUIRE(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("sweep emits one row per value and rejects unknown params") {
  TempDir tmp;
  ScenarioConfig quick = preset_no_delay_linear();
  quick.horizon = 2.0;
  const std::string path = tmp.sub("quick.cfg");
  {
    std::ofstream out(path);
    out << serialize_config(quick);
  }
  REQUIRE(cli::cmd_sweep(path, "gain.amplitude", {"0", "0.02", "0.05"},
                         tmp.sub("s")) == cli::kExitOk);
  const std::string csv = slurp(fs::path(tmp.sub("s")) / "sweep.csv");
  std::size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  REQUIRE(rows == 4);  // header + one row per value
  REQUIRE(csv.find("param,value,verdict") == 0);
  REQUIRE(csv.find("certified") != std::string::npos);

  REQUIRE(cli::cmd_sweep(path, "gain.bogus", {"1"}, tmp.sub("t")) ==
          cli::kExitError);
}

TEST_CASE("config override helper replaces or appends exactly one key") {
  const std::string base = "a = 1\nb = 2\n";
  REQUIRE(cli::detail::override_config_text(base, "b", "7") ==
          "a = 1\nb = 7\n");
  REQUIRE(cli::detail::override_config_text(base, "c", "3") ==
          "a = 1\nb = 2\nc = 3\n");
}

TEST_CASE("series reader handles headered and bare CSV") {
  TempDir tmp;
  const std::string with_header = tmp.sub("h.csv");
  {
    std::ofstream out(with_header);
    out << "t,kinetic,total\n0,1,2\n1,0.5,1.5\n";
  }
  auto s1 = cli::detail::read_series_csv(with_header);
  REQUIRE(s1.size() == 2);
  REQUIRE(s1[0].second == 2.0);  // picks the `total` column

  const std::string bare = tmp.sub("b.csv");
  {
    std::ofstream out(bare);
    out << "0,3\n1,2\n2,1\n";
  }
  auto s2 = cli::detail::read_series_csv(bare);
  REQUIRE(s2.size() == 3);
  REQUIRE(s2[2].second == 1.0);

  REQUIRE_THROWS(cli::detail::read_series_csv(tmp.sub("missing.csv")));
}

TEST_CASE("outdir resolution prefers the flag over the environment") {
  TempDir tmp;
  setenv("MEMWAVE_OUTDIR", tmp.sub("env").c_str(), 1);
  REQUIRE(cli::resolve_outdir(tmp.sub("flag")) == tmp.sub("flag"));
  REQUIRE(cli::resolve_outdir("") == tmp.sub("env"));
  unsetenv("MEMWAVE_OUTDIR");
  REQUIRE(cli::resolve_outdir("") == "out");
}
