#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "artifacts.hpp"
#include "nulllab/experiments.hpp"

using namespace nulllab;

namespace {

ExperimentConfig config_from(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string strip_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndDefaults) {
  const ExperimentConfig c = config_from("# run\nmass = 0.25\ncoord_variant=regge-wheeler  # tortoise\n\nseed=7\n");
  EXPECT_EQ(c.mass, 0.25);
  EXPECT_EQ(c.coord_variant, RStarVariant::ReggeWheeler);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.gamma, 0.5);
  EXPECT_EQ(c.gamma_prime, 0.4);
  EXPECT_EQ(c.epsilon, 0.01);
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, RejectsEmptyUnknownAndOutOfRange) {
  EXPECT_THROW(config_from(""), ValidationError);
  EXPECT_THROW(config_from("# only a comment\n"), ValidationError);
  try {
    config_from("mass=1\ndelta=2\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'delta'"), std::string::npos);
  }
  EXPECT_THROW(config_from("mass\n"), ValidationError);
  EXPECT_THROW(config_from("mass=abc\n"), ValidationError);
  EXPECT_THROW(config_from("seed=-1\n"), ValidationError);
  EXPECT_THROW(config_from("coord_variant=kerr\n"), ValidationError);
  EXPECT_THROW(validate_config(config_from("gamma_prime=0.6\n")), ValidationError);
  EXPECT_THROW(validate_config(config_from("gamma=1\n")), ValidationError);
  EXPECT_THROW(validate_config(config_from("mass=-1\n")), ValidationError);
  EXPECT_THROW(validate_config(config_from("epsilon=0\n")), ValidationError);
}

TEST(Experiment, NamesRoundTrip) {
  for (const char* n : {"frame-check", "coords", "asym", "backscatter", "oracle", "eikonal", "mass", "all"})
    EXPECT_EQ(experiment_name(parse_experiment(n)), n);
  EXPECT_THROW(parse_experiment("plot"), ValidationError);
}

TEST(Report, EmptyReportIsHeaderOnly) {
  EXPECT_EQ(report_csv(RunReport{}), "check,measured,bound,pass,seconds\n");
  EXPECT_TRUE(RunReport{}.all_pass());
}

TEST(Report, SingleCheckRow) {
  RunReport r;
  r.checks.push_back({"x.y", 1.0 / 3.0, 1e-12, true, 0.5});
  EXPECT_EQ(report_csv(r), "check,measured,bound,pass,seconds\nx.y,0.333333333333,1e-12,pass,0.5\n");
}

TEST(Report, CsvRoundTrip) {
  RunReport r;
  r.checks.push_back({"a", 2.0 / 3.0, 1e-12, true, 0.125});
  r.checks.push_back({"b", 133.47377106, 10.0, false, 1.5e-6});
  r.checks.push_back({"c", std::numeric_limits<double>::infinity(), 0.0, false, 0.0});
  std::istringstream in(report_csv(r));
  const RunReport back = parse_report_csv(in);
  ASSERT_EQ(back.checks.size(), r.checks.size());
  for (size_t i = 0; i < r.checks.size(); ++i) {
    EXPECT_EQ(back.checks[i].name, r.checks[i].name);
    EXPECT_EQ(back.checks[i].pass, r.checks[i].pass);
    EXPECT_EQ(format_number(back.checks[i].measured), format_number(r.checks[i].measured));
    EXPECT_EQ(format_number(back.checks[i].bound), format_number(r.checks[i].bound));
    EXPECT_EQ(format_number(back.checks[i].seconds), format_number(r.checks[i].seconds));
  }
  EXPECT_EQ(report_csv(back), report_csv(r));
  std::istringstream bad("check,measured\n");
  EXPECT_THROW(parse_report_csv(bad), ValidationError);
}

TEST(Report, UnwritableDirectory) {
  EXPECT_THROW(emit_report(RunReport{}, "/proc/nulllab_no_such_dir"), std::runtime_error);
}

TEST(Experiment, DeterministicGivenSeed) {
  ExperimentConfig c;
  const RunReport a = run_experiment(Experiment::FrameCheck, c);
  const RunReport b = run_experiment(Experiment::FrameCheck, c);
  EXPECT_EQ(strip_seconds(report_csv(a)), strip_seconds(report_csv(b)));
  EXPECT_EQ(a.checks.size(), 2u);
  EXPECT_TRUE(a.all_pass());
}

TEST(Experiment, MassReportsGaussianValue) {
  const RunReport r = run_experiment(Experiment::Mass, ExperimentConfig{});
  ASSERT_FALSE(r.checks.empty());
  EXPECT_EQ(r.checks[0].name, "mass.M_gaussian");
  EXPECT_NEAR(r.checks[0].measured, 0.626657, 1e-6);
  EXPECT_TRUE(r.all_pass());
}

TEST(Experiment, InvalidConfigIsRejectedBeforeRunning) {
  ExperimentConfig c;
  c.gamma_prime = 0.9;
  EXPECT_THROW(run_experiment(Experiment::Mass, c), ValidationError);
}

TEST(Artifacts, RadiationCsvRoundTrip) {
  const SphereRule rule = sphere_rule(4, 8);
  std::ostringstream os;
  os.precision(17);
  os << "qstar,theta,phi,V11,V12\n";
  for (int i = 0; i <= 800; ++i) {
    const double q = -8.0 + 0.02 * i;
    for (const Vec3& w : rule.nodes) {
      double phi = std::atan2(w.y(), w.x());
      if (phi < 0.0) phi += 2.0 * M_PI;
      os << format_number(q) << "," << std::acos(w.z()) << "," << phi << "," << std::exp(-q * q) << ",0\n";
    }
  }
  std::istringstream in(os.str());
  const TangentialRadiationData d = cli::load_radiation_csv(in);
  EXPECT_EQ(d.q.size(), 801u);
  ASSERT_EQ(d.sphere.nodes.size(), 32u);
  double wsum = 0.0;
  for (double w : d.sphere.weights) wsum += w;
  EXPECT_NEAR(wsum, 1.0, 1e-14);
  const cli::MassArtifacts art = cli::mass_artifacts(d, true, 0.4);
  EXPECT_NEAR(art.mass.value, 0.5 * std::sqrt(M_PI / 2.0), 1e-8);
  EXPECT_LT(art.closure_ratio, 1.0);
}

TEST(Artifacts, RadiationCsvRejectsBadGrids) {
  std::istringstream ragged("0,1.0,0.0,1,0\n0,1.0,1.0,1,0\n0.5,1.0,0.0,1,0\n");
  EXPECT_THROW(cli::load_radiation_csv(ragged), ValidationError);
  std::istringstream not_gauss("0,1.0,0.5,1,0\n");
  EXPECT_THROW(cli::load_radiation_csv(not_gauss), ValidationError);
  std::istringstream junk("0,x,0,1,0\n");
  EXPECT_THROW(cli::load_radiation_csv(junk), ValidationError);
}

TEST(Artifacts, ProfilesAndOracleAreDeterministic) {
  EXPECT_THROW(cli::load_profile("cosine:1"), ValidationError);
  EXPECT_THROW(cli::load_profile("/nonexistent/profile.csv"), ValidationError);
  std::istringstream p1("10,0,0,3\n"), p2("10,0,0,3\n");
  const SourceProfile n = cli::load_profile("bracket:2");
  EXPECT_EQ(cli::backscatter_csv("phi", n, p1), cli::backscatter_csv("phi", n, p2));
  EXPECT_EQ(cli::oracle_csv("model"), cli::oracle_csv("model"));
  EXPECT_THROW(cli::oracle_csv("modal"), ValidationError);
}
