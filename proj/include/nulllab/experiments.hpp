#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nulllab/coords.hpp"

namespace nulllab {

/// Global run parameters; every field has a documented default.
struct ExperimentConfig {
  double mass = 1e-4;
  RStarVariant coord_variant = RStarVariant::LogOnePlusR;
  double gamma = 0.5;
  double gamma_prime = 0.4;
  double epsilon = 0.01;
  std::uint64_t seed = 42;
};

/// Sets one key. Throws ValidationError naming the key when it is unknown or the value does not parse.
void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value);

/// key=value lines with '#' comments. Throws ValidationError on an empty file or a bad line.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});

/// 0 < gamma < 1, 0 < gamma' < gamma, M >= 0, eps > 0; throws ValidationError naming the key.
void validate_config(const ExperimentConfig& c);

/// Keys, defaults and admissible ranges, one per line.
std::string config_help();

struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

struct RunReport {
  std::vector<Check> checks;
  bool all_pass() const;
};

enum class Experiment { FrameCheck, Coords, Asym, Backscatter, Oracle, Eikonal, Mass, All };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);

/// Runs the acceptance checks of one module, or of all modules in a fixed order.
/// Failures inside a module are rethrown with the module name prefixed.
RunReport run_experiment(Experiment e, const ExperimentConfig& c, bool verbose = false);

/// 12 significant digits with '.' as the decimal separator.
std::string format_number(double x);

/// Header "check,measured,bound,pass,seconds" followed by one row per check.
std::string report_csv(const RunReport& r);
/// Aligned plain-text table.
std::string report_text(const RunReport& r);
RunReport parse_report_csv(std::istream& in);

/// Writes report.csv and report.txt into dir. Throws std::runtime_error when dir is not writable.
void emit_report(const RunReport& r, const std::filesystem::path& dir);

/// Writes text to dir / name, throwing std::runtime_error on failure.
void write_text_file(const std::filesystem::path& dir, const std::string& name, const std::string& text);

}  // namespace nulllab
