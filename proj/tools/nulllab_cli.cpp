#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "artifacts.hpp"
#include "nulllab/experiments.hpp"

using namespace nulllab;

namespace {

enum Exit { kAllPass = 0, kCheckFailure = 1, kUsage = 2, kNumerical = 3 };

std::ifstream open_input(const std::string& path, const std::string& what) {
  std::ifstream f(path);
  if (!f) throw ValidationError(what + " '" + path + "' cannot be read");
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for asymptotically flat wave and Einstein-type systems."};
  app.footer("Config keys (key=value lines, '#' comments):\n" + config_help() +
             "\nExit codes: 0 all checks pass, 1 a check failed, 2 usage or input error, 3 numerical error.");
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "nulllab_out";
  std::uint64_t seed = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "Config file of key=value lines");
  app.add_option("--set", overrides, "Override one config entry, key=value (repeatable)");
  app.add_option("--out", out_dir, "Output directory for the report and CSV artifacts")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Seed for random property checks (default 42)");
  app.add_flag("--verbose", verbose, "Print each check as it completes");

  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"frame-check", "coords", "asym", "backscatter", "oracle", "eikonal", "mass", "all"})
    subs[name] = app.add_subcommand(name, std::string("Run the ") + name + " checks");
  subs["frame-check"]->description("Frame algebra: null normalisation and bilinear-form equivalence");
  subs["coords"]->description("Starred coordinates: Jacobian identity, kappa derivatives, operator comparison");
  subs["all"]->description("Every module's checks in a fixed order");

  std::string asym_spec;
  double asym_s_max = 2.0, asym_ds = 0.05;
  subs["asym"]->add_option("--spec", asym_spec, "Quadratic spec file, lines 'I J K alpha beta value'");
  subs["asym"]->add_option("--s-max", asym_s_max, "Final s for the --spec run")->capture_default_str();
  subs["asym"]->add_option("--ds", asym_ds, "Step in s for the --spec run")->capture_default_str();

  std::string bs_kernel = "phi", bs_profile = "bracket:2", bs_points;
  subs["backscatter"]
      ->add_option("--kernel", bs_kernel, "Kernel to evaluate at --points")
      ->check(CLI::IsMember({"F", "phi", "phi1", "phi1plus", "phi2"}))
      ->capture_default_str();
  subs["backscatter"]
      ->add_option("--profile", bs_profile, "bracket:<p>, gaussian:<c> or a file of q,n rows")
      ->capture_default_str();
  subs["backscatter"]->add_option("--points", bs_points, "CSV file of t,x1,x2,x3 rows");

  std::string oracle_mode;
  subs["oracle"]
      ->add_option("--mode", oracle_mode, "Artifact to emit")
      ->check(CLI::IsMember({"kirchhoff", "solve", "extract", "model"}));

  double eik_T = 1000.0;
  int eik_grid = 0;
  std::string eik_metric = "flat";
  subs["eikonal"]->add_option("--T", eik_T, "Starting time of the backward integration")->capture_default_str();
  subs["eikonal"]->add_option("--grid", eik_grid, "Number of q* labels on [-8, 0] to trace (0: checks only)");
  subs["eikonal"]
      ->add_option("--metric", eik_metric, "flat | schwarzschild-asymptotic | synthetic:<decay|gaussian|violating>")
      ->capture_default_str();

  std::string mass_data;
  bool mass_closure_flag = false;
  subs["mass"]->add_option("--data", mass_data, "CSV of q*,theta,phi,V11,V12 rows");
  subs["mass"]->add_flag("--check-closure", mass_closure_flag, "Tabulate the k_LL closure residual");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kAllPass : kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      auto f = open_input(config_path, "config file");
      cfg = parse_config(f);
    }
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (*seed_opt) cfg.seed = seed;
    validate_config(cfg);

    RunReport report = run_experiment(parse_experiment(cmd), cfg, verbose);

    if (cmd == "asym" && !asym_spec.empty()) {
      auto f = open_input(asym_spec, "spec file");
      write_text_file(out_dir, "asym.csv", cli::asym_csv(f, asym_s_max, asym_ds));
    }
    if (cmd == "backscatter" && !bs_points.empty()) {
      auto f = open_input(bs_points, "points file");
      write_text_file(out_dir, "backscatter.csv", cli::backscatter_csv(bs_kernel, cli::load_profile(bs_profile), f));
    }
    if (cmd == "oracle" && !oracle_mode.empty()) write_text_file(out_dir, "oracle.csv", cli::oracle_csv(oracle_mode));
    if (cmd == "eikonal" && eik_grid > 0)
      write_text_file(out_dir, "eikonal.csv", cli::eikonal_csv(eik_metric, eik_T, eik_grid, cfg));
    if (cmd == "mass") {
      TangentialRadiationData data;
      if (mass_data.empty()) {
        data = diagonal_radiation_data(uniform_grid(-8.0, 8.0, 1601), sphere_rule(4, 8),
                                       [](double q) { return std::exp(-q * q); });
      } else {
        auto f = open_input(mass_data, "data file");
        data = cli::load_radiation_csv(f);
      }
      const auto art = cli::mass_artifacts(data, mass_closure_flag, cfg.gamma_prime);
      report.checks.push_back({"mass.M", art.mass.value, art.mass.error, !art.mass.precision_warning, 0.0});
      if (mass_closure_flag) report.checks.push_back({"mass.closure_table_ratio", art.closure_ratio, 1.0, art.closure_ratio <= 1.0, 0.0});
      write_text_file(out_dir, "mass_energy.csv", art.energy_csv);
      if (mass_closure_flag) write_text_file(out_dir, "mass_closure.csv", art.closure_csv);
      std::cout << "M = " << format_number(art.mass.value) << "\n";
    }

    emit_report(report, out_dir);
    std::cout << report_text(report);
    return report.all_pass() ? kAllPass : kCheckFailure;
  } catch (const ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const SingularityError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
