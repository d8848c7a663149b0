#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convqual/classify.hpp"
#include "convqual/corpus.hpp"

namespace convqual::diversity {

struct LabelDistribution {
  std::vector<std::string> vocabulary;
  std::vector<std::size_t> counts;
  std::vector<double> probabilities;  // empirical, count / support_count
  std::size_t support_count = 0;
};

LabelDistribution estimate_distribution(
    const std::map<std::string, std::string>& labels,
    const std::vector<std::string>& vocabulary);

// Log base: vocabulary size by default (normalized entropy in [0,1]),
// or a fixed base > 1.
struct EntropyBase {
  std::optional<double> fixed;  // nullopt -> |vocabulary|
  static EntropyBase vocabulary_size() { return {}; }
  static EntropyBase fixed_base(double b) { return {b}; }
};

// H = sum p * log_b(1/p) with the 0*log(1/0) = 0 convention.
double shannon_entropy(const LabelDistribution& dist, EntropyBase base);

struct DimensionEntropy {
  std::string dimension;
  double entropy = 0.0;
  LabelDistribution distribution;
};

struct EntropyReport {
  std::vector<DimensionEntropy> dimensions;
  std::vector<double> weights;
  double entropy_score = 0.0;
};

// Weighted sum; weights must be non-negative and sum to 1 (+-1e-9).
// Empty weight list means equal weights.
double entropy_score(const std::vector<std::pair<std::string, double>>& entropies,
                     std::vector<double> weights);

struct VersionComparison {
  std::map<std::string, EntropyReport> rows;
  std::vector<std::string> ranking;  // score descending, name ascending on ties
};

std::vector<std::string> rank_by_score(
    const std::map<std::string, EntropyReport>& rows);

VersionComparison compare_versions(
    const std::map<std::string, corpus::Dataset>& datasets,
    const std::vector<classify::Dimension>& dimensions,
    std::vector<double> weights,
    EntropyBase base = EntropyBase::vocabulary_size());

// Decimal-string serialization, values rounded half-even to 6 places.
std::string serialize_entropy_report(const EntropyReport& report);

}  // namespace convqual::diversity
