#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convqual/classify.hpp"
#include "convqual/diversity.hpp"
#include "convqual/realism.hpp"

namespace convqual::report {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct RealismConfig {
  std::size_t n = 50;
  double human_fraction = 0.5;
  std::uint64_t seed = 0;
  double smoothing = 1.0;
  double holdout_fraction = 0.0;
  std::string human_pool;      // dataset path
  std::string simulated_pool;  // dataset path
};

struct EvalConfig {
  std::vector<classify::Dimension> dimensions;
  std::vector<double> weights;  // per dimension, sum to 1
  diversity::EntropyBase entropy_base;
  std::optional<RealismConfig> realism;
  std::map<std::string, std::string> datasets;  // generator version -> path
  bool skip_invalid = false;
};

// Parses the JSON config, applies defaults (equal weights, vocabulary-size
// base, N=50, human_fraction=0.5), resolves paths relative to the config
// file and checks every referenced file exists.
EvalConfig load_config(const std::string& path);

// Stable FNV-1a digest of the fully resolved configuration.
std::string config_digest(const EvalConfig& config);

struct EvalReport {
  diversity::VersionComparison entropy;
  std::vector<realism::RealismReport> realism;
  std::string toolkit_version = kToolkitVersion;
  std::string config_digest;
};

enum class ReportFormat { MachineReadable, MarkdownTable };

std::string render_report(const EvalReport& report, ReportFormat format);
EvalReport parse_report(const std::string& machine_text);

// Half-even decimal rounding used by both report renderers.
double round_half_even(double value, int digits);
std::string format_fixed(double value, int digits);

// Runs classification + entropy for every configured version dataset.
EvalReport run_diversity(const EvalConfig& config);

}  // namespace convqual::report
