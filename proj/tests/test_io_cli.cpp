#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "mwconv/cli.hpp"
#include "mwconv/io.hpp"

using namespace mwconv;
namespace fs = std::filesystem;

namespace {

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "mwconv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mwconv_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST(FormatNumber, SeventeenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(format_number(-340.0), "-3.4000000000000000e+02");
  EXPECT_EQ(format_number(0.0), "0.0000000000000000e+00");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5e-7})
    EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
}

TEST(FormatNumber, IgnoresGlobalLocale) {
  const std::locale old = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  PropagationTrace tr;
  TraceSample s;
  s.zeta = 1234.5;
  s.I32_rel = 0.25;
  tr.samples = {s};
  std::ostringstream os;
  write_trace_csv(os, tr);
  std::locale::global(old);
  const auto rows = lines(os.str());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].substr(0, 23), "1.2345000000000000e+03,");
  EXPECT_EQ(std::count(rows[1].begin(), rows[1].end(), ','), 7);
}

TEST(Csv, TraceHeaderIsExact) {
  std::ostringstream os;
  write_trace_csv(os, PropagationTrace{});
  EXPECT_EQ(os.str(), "zeta,I31_rel,I32_rel,Phi_wrapped,Phi_unwrapped,g0sq,rho33_avg,motion_const\n");
}

TEST(Csv, QuotingAndFailedRows) {
  EXPECT_EQ(csv_quote("ok"), "ok");
  EXPECT_EQ(csv_quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_quote("say \"x\""), "\"say \"\"x\"\"\"");
  SweepTable t;
  SweepRow good;
  good.value = 1.0;
  good.I32_rel = 0.5;
  good.ok = true;
  good.status = "ok";
  SweepRow bad;
  bad.value = 2.0;
  bad.I32_rel = 0.7;  // not trusted once the point failed
  bad.status = "ill-conditioned, vz = 0";
  t.rows = {good, bad};
  std::ostringstream os;
  write_sweep_csv(os, t);
  const auto rows = lines(os.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], kSweepHeader);
  EXPECT_EQ(rows[1].substr(rows[1].size() - 3), ",ok");
  EXPECT_EQ(rows[2], "2.0000000000000000e+00,nan,nan,nan,nan,nan,nan,nan,\"ill-conditioned, vz = 0\"");
}

TEST(Sidecar, PathAndContents) {
  EXPECT_EQ(sidecar_path("out/fig2.csv"), "out/fig2.json");
  EXPECT_EQ(sidecar_path("table"), "table.json");
  const nlohmann::json j = make_sidecar("sweep", preset_config("fig4"));
  EXPECT_EQ(j["tool"], "mwconv");
  EXPECT_EQ(j["command"], "sweep");
  EXPECT_EQ(j["sweep"]["parameter"], "optical_detuning");
  EXPECT_EQ(j["sweep"]["values"].size(), 201u);
  EXPECT_EQ(j["derived"]["quadrature"]["nodes"], 64);
  EXPECT_NEAR(j["derived"]["length_m"].get<double>(), 1.854e-2, 1e-5);
  const SidecarRun r = read_sidecar(j);
  EXPECT_EQ(r.command, "sweep");
  EXPECT_EQ(config_to_json(r.config), config_to_json(preset_config("fig4")));
  EXPECT_THROW(read_sidecar(nlohmann::json{{"command", "sweep"}}), ConfigError);
}

TEST(FigureContract, Columns) {
  EXPECT_NO_THROW(check_figure_header("fig2", kTraceHeader));
  for (const char* f : {"fig3", "fig4", "fig5"}) EXPECT_NO_THROW(check_figure_header(f, kSweepHeader));
  try {
    check_figure_header("fig2", "zeta,I31_rel,I32_rel,Phi_wrapped,g0sq");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'Phi_unwrapped'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(check_figure_header("fig5", kTraceHeader), ConfigError);
  EXPECT_THROW(figure_columns("fig6"), ConfigError);
}

TEST(FigureContract, Sidecars) {
  EXPECT_NO_THROW(check_figure_sidecar("fig2", make_sidecar("propagate", preset_config("fig2"))));
  EXPECT_NO_THROW(check_figure_sidecar("fig5", make_sidecar("sweep", preset_config("fig5"))));
  EXPECT_THROW(check_figure_sidecar("fig3", make_sidecar("propagate", preset_config("fig3"))),
               ConfigError);
  nlohmann::json j = make_sidecar("sweep", preset_config("fig4"));
  j.erase("sweep");
  EXPECT_THROW(check_figure_sidecar("fig4", j), ConfigError);
}

TEST(Cli, PredictWeak) {
  const CliResult r = run({"predict", "--regime", "weak", "--g0sq", "4", "--gm", "0.02"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("zeta_max=314.159\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("regime=weak\n"), std::string::npos);
}

TEST(Cli, PredictWithPresetReportsMediumConditions) {
  const CliResult r = run({"predict", "--regime", "weak", "--preset", "fig2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cpt_condition_margin=4.1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("black_line_width=0.0004"), std::string::npos) << r.out;
}

TEST(Cli, PredictStrongAndGuard) {
  CliResult r = run({"predict", "--regime", "strong", "--g0sq", "4", "--gm", "50"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("zeta_max=157.08\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("loss_at_max=0.0608"), std::string::npos) << r.out;
  r = run({"predict", "--regime", "strong", "--g0sq", "4", "--gm", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"steady", "--set", "gm=-1"}).code, 1);
  EXPECT_EQ(run({"steady", "--set", "nonsense=1"}).code, 1);
  EXPECT_EQ(run({"steady", "--preset", "fig9"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"predict"}).code, 1);  // --regime is required
  const CliResult bad = run({"steady", "--config", "/nonexistent/x.conf"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("x.conf"), std::string::npos) << bad.err;
  // A numerically singular steady state is a numerical failure.
  const CliResult num =
      run({"steady", "--preset", "ideal-weak", "--set", "g31_in=1e-9", "--set", "gm=0"});
  EXPECT_EQ(num.code, 2) << num.err;
  EXPECT_NE(num.err.find("ill-conditioned"), std::string::npos) << num.err;
}

TEST(Cli, SteadyPrintsState) {
  const CliResult r = run({"steady", "--preset", "ideal-weak", "--set", "g32_in=2",
                           "--set", "chi_m=3.141592653589793"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rho33="), std::string::npos) << r.out;
  const CliResult pc = run({"steady", "--preset", "fig2", "--set", "quad_nodes=4", "--per-class"});
  EXPECT_EQ(pc.code, 0);
  EXPECT_NE(pc.out.find("# class 3 "), std::string::npos) << pc.out;
}

TEST_F(TempDir, ConfigFileAndSetPrecedence) {
  {
    std::ofstream f(path("run.conf"));
    f << "preset=ideal-weak\nzeta_end=20\nsamples=5\ngm=0.1\n";
  }
  const CliResult r = run({"propagate", "--config", path("run.conf"), "--set", "gm=0.05",
                           "--out", path("t.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto side = nlohmann::json::parse(slurp(path("t.json")));
  EXPECT_EQ(side["config"]["gm"], 0.05);
  EXPECT_EQ(side["config"]["zeta_end"], 20.0);
  EXPECT_EQ(side["config"]["preset"], "ideal-weak");
  EXPECT_EQ(lines(slurp(path("t.csv"))).size(), 6u);
}

TEST_F(TempDir, PropagateRerunFromSidecarIsByteIdentical) {
  const CliResult a = run({"propagate", "--preset", "fig2", "--set", "zeta_end=30",
                           "--set", "samples=31", "--set", "quad_nodes=16",
                           "--set", "g32_in=0.1", "--set", "chi_m=-0.3",
                           "--out", path("a.csv")});
  ASSERT_EQ(a.code, 0) << a.err;
  const CliResult b = run({"propagate", "--from-sidecar", path("a.json"), "--out", path("b.csv")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const auto rows = lines(slurp(path("a.csv")));
  ASSERT_EQ(rows.size(), 32u);
  EXPECT_EQ(rows[0], kTraceHeader);
  EXPECT_NO_THROW(check_figure_header("fig2", rows[0]));
  EXPECT_NO_THROW(check_figure_sidecar("fig2", nlohmann::json::parse(slurp(path("a.json")))));
  // A propagate sidecar cannot drive a sweep.
  EXPECT_EQ(run({"sweep", "--from-sidecar", path("a.json")}).code, 1);
}

TEST_F(TempDir, SweepFig5TableAndRerun) {
  // Doppler-free to keep the 220 propagations quick; the grid is the preset's.
  const CliResult a = run({"sweep", "--preset", "fig5", "--set", "temperature_K=0",
                           "--set", "samples=2", "--threads", "2", "--out", path("f5.csv")});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto rows = lines(slurp(path("f5.csv")));
  ASSERT_EQ(rows.size(), 221u);
  EXPECT_EQ(rows[0], kSweepHeader);
  EXPECT_NO_THROW(check_figure_header("fig5", rows[0]));
  const auto side = nlohmann::json::parse(slurp(path("f5.json")));
  EXPECT_NO_THROW(check_figure_sidecar("fig5", side));
  EXPECT_EQ(side["sweep"]["values"].size(), 220u);

  const CliResult b = run({"sweep", "--from-sidecar", path("f5.json"), "--threads", "1",
                           "--out", path("f5b.csv")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("f5.csv")), slurp(path("f5b.csv")));
}

TEST_F(TempDir, SweepTraceObservable) {
  const CliResult r = run({"sweep", "--preset", "ideal-weak", "--set", "sweep_param=mw_rabi",
                           "--set", "sweep_grid=list:0.01,0.02", "--set", "zeta_end=10",
                           "--set", "samples=3", "--observable", "trace", "--out",
                           path("tr.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(path("tr.csv")));
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], std::string("value,") + kTraceHeader);
  const auto side = nlohmann::json::parse(slurp(path("tr.json")));
  EXPECT_EQ(side["sweep"]["observable"], "trace");
}

TEST(Cli, PropagateToStdout) {
  const CliResult r = run({"propagate", "--preset", "ideal-weak", "--set", "zeta_end=5",
                           "--set", "samples=3"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], kTraceHeader);
}
