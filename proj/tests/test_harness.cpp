#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "subdiff/harness/config.hpp"
#include "subdiff/harness/csv.hpp"
#include "subdiff/harness/experiments.hpp"

using namespace subdiff;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("subdiff-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SUBDIFF_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_path(const std::string& name) { return std::string(SUBDIFF_CONFIGS) + "/" + name + ".cfg"; }

}  // namespace

TEST(Config, ParsesCommentsListsAndWhitespace) {
  const auto c = Config::parse("# header\n  alpha = 0.3  # trailing\n\nepsilons = 0.2, 0.1 ,0.05\nspatial=false\n");
  EXPECT_DOUBLE_EQ(c.get_double("alpha", 0.0), 0.3);
  EXPECT_EQ(c.get_list("epsilons", {}), (std::vector<double>{0.2, 0.1, 0.05}));
  EXPECT_FALSE(c.get_bool("spatial", true));
  EXPECT_DOUBLE_EQ(c.get_double("missing", 7.0), 7.0);
}

TEST(Config, RejectsMalformedText) {
  EXPECT_THROW(Config::parse("alpha 0.3\n"), ConfigurationError);
  EXPECT_THROW(Config::parse("alpha = 0.3\nalpha = 0.4\n"), ConfigurationError);
  EXPECT_THROW(Config::parse(" = 2\n"), ConfigurationError);
  EXPECT_THROW(Config::parse("alpha = abc\n").get_double("alpha", 0.0), ConfigurationError);
  EXPECT_THROW(Config::load("/nonexistent/path.cfg"), ConfigurationError);
}

TEST(Config, TypedRoundTrip) {
  const auto e = ExperimentConfig::from(Config::parse("alpha = 0.7\nepsilons = 0.3, 0.15\nseed = 99\n"));
  EXPECT_DOUBLE_EQ(e.beta, 2.0 / 0.7);
  EXPECT_EQ(ExperimentConfig::from(e.to_config()), e);
  EXPECT_EQ(ExperimentConfig::from(Config::parse(e.to_config().serialize())), e);
  const auto d = ExperimentConfig::from(Config::parse("case = diffusion\nd0 = 2\n"));
  EXPECT_DOUBLE_EQ(d.beta, 2.0);
  EXPECT_EQ(ExperimentConfig::from(Config::parse(d.to_config().serialize())), d);
}

TEST(Config, EveryShippedConfigLoads) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(SUBDIFF_CONFIGS)) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(ExperimentConfig::from(Config::load(entry.path().string()))) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 10u);
}

TEST(Config, ScalingExponentFollowsTheCase) {
  EXPECT_THROW(ExperimentConfig::from(Config::parse("alpha = 0.5\nbeta = 3\n")), ConfigurationError);
  EXPECT_NO_THROW(ExperimentConfig::from(Config::parse("alpha = 0.5\nbeta = 4\n")));
  const auto e = ExperimentConfig::from(Config::parse("alpha = 0.5\nbeta = 3\nbeta_override = true\n"));
  EXPECT_DOUBLE_EQ(e.beta, 3.0);
}

TEST(Config, ValidationErrors) {
  EXPECT_THROW(ExperimentConfig::from(Config::parse("colour = red\n")), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from(Config::parse("alpha = 1.2\n")), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from(Config::parse("epsilons = 0.1, 0.2\n")), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from(Config::parse("case = superdiffusion\n")), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from(Config::parse("kernel = box\n")), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from(Config::parse("t_end = 1\nsnapshot_times = 2\n")), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from(Config::parse("age_profile = custom\n")), ConfigurationError);
  EXPECT_THROW(ExperimentConfig::from(Config::parse("cells = 1\n")), ConfigurationError);
}

TEST(Csv, EscapingAndNumberFormat) {
  EXPECT_EQ(CsvWriter::escape("plain"), "plain");
  EXPECT_EQ(CsvWriter::escape("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvWriter::escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  const auto dir = scratch("csv");
  {
    CsvWriter w(dir / "x.csv", {"a", "b"});
    w.row({1.0, 0.25});
    w.row_strings({"x,y", "z"});
  }
  EXPECT_EQ(slurp(dir / "x.csv"), "a,b\n1,0.25\n\"x,y\",z\n");
}

TEST(Experiments, BlockAverageAndSlope) {
  EXPECT_EQ(detail::block_average({1, 3, 5, 7}, 2), (std::vector<double>{2, 6}));
  EXPECT_THROW(detail::block_average({1, 2, 3}, 2), ConfigurationError);
  const auto s = detail::loglog_slope({1, 2, 4}, {3, 12, 48});
  ASSERT_TRUE(s.has_value());
  EXPECT_NEAR(*s, 2.0, 1e-12);
  EXPECT_FALSE(detail::loglog_slope({1}, {1}).has_value());
}

TEST(Experiments, EmptyBatteryPassesAndTightToleranceFails) {
  EXPECT_TRUE(run_identity_battery({}, 1e-5, 1).empty());
  EXPECT_TRUE(battery_passes({}));
  const auto rows = run_laplace_report({0.5}, 1e-15);
  ASSERT_FALSE(rows.empty());
  EXPECT_FALSE(battery_passes(rows));
  EXPECT_TRUE(battery_passes(run_laplace_report({0.5}, 1e-5)));
}

TEST(Experiments, SingleEpsilonHasNoOrder) {
  auto c = ExperimentConfig::from(Config::parse("case = diffusion\nepsilons = 0.2\ncells = 32\nda = 0.1\n"));
  const auto rep = run_convergence(c);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_TRUE(rep.rows[0].ok) << rep.rows[0].error;
  EXPECT_GT(rep.rows[0].l1, 0.0);
  ASSERT_EQ(rep.order.size(), 1u);
  EXPECT_FALSE(rep.order[0].has_value());
  EXPECT_TRUE(rep.monotone());
}

TEST(Experiments, CosineNeedsFullPeriod) {
  auto c = ExperimentConfig::from(Config::parse("domain_length = 3\n"));
  EXPECT_THROW(make_profile(c), ConfigurationError);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  EXPECT_EQ(run_cli("verify-laplace --config " + config_path("laplace") + " --out " + (dir / "ok").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "ok" / "run-metadata.txt"));
  EXPECT_EQ(run_cli("identity-battery --config " + config_path("battery-broken") + " --out " + (dir / "bad").string()),
            1);
  std::ofstream(dir / "broken.cfg") << "alpha = 1.5\n";
  EXPECT_EQ(run_cli("verify-laplace --config " + (dir / "broken.cfg").string() + " --out " + (dir / "c").string()), 2);
  EXPECT_EQ(run_cli("verify-laplace --config " + (dir / "missing.cfg").string()), 2);
  EXPECT_NE(run_cli("no-such-command"), 0);
}

TEST(Cli, RerunIsByteIdentical) {
  const auto dir = scratch("rerun");
  const std::string cfg = config_path("age-spatial");
  ASSERT_EQ(run_cli("simulate-age --config " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("simulate-age --config " + cfg + " --out " + (dir / "b").string() + " --threads 2"), 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    if (entry.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / entry.path().filename())) << entry.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 2u);
}

TEST(Cli, ParticleRerunIsByteIdentical) {
  const auto dir = scratch("rerun-ctrw");
  std::ofstream(dir / "small.cfg") << "alpha = 0.5\nepsilons = 0.2\nparticles = 5000\nt_end = 20\n"
                                      "snapshot_times = 10, 15, 20\nmsd_window = 10, 20\nmsd_tolerance = 1\n";
  const std::string cfg = (dir / "small.cfg").string();
  ASSERT_LE(run_cli("simulate-ctrw --config " + cfg + " --seed 7 --out " + (dir / "a").string()), 1);
  ASSERT_LE(run_cli("simulate-ctrw --config " + cfg + " --seed 7 --threads 3 --out " + (dir / "b").string()), 1);
  for (const char* f : {"ctrw-snapshots.csv", "ctrw-density.csv", "ctrw-msd.csv", "report.csv"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}
