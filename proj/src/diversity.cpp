#include "convqual/diversity.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "convqual/error.hpp"
#include "convqual/report.hpp"

namespace convqual::diversity {

LabelDistribution estimate_distribution(
    const std::map<std::string, std::string>& labels,
    const std::vector<std::string>& vocabulary) {
  if (labels.empty())
    throw PreconditionError("entropy undefined over zero labeled samples");

  LabelDistribution dist;
  dist.vocabulary = vocabulary;
  dist.counts.assign(vocabulary.size(), 0);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) index[vocabulary[i]] = i;

  for (const auto& [id, label] : labels) {
    auto it = index.find(label);
    if (it == index.end())
      throw PreconditionError("label \"" + label + "\" for id \"" + id +
                              "\" not in vocabulary");
    ++dist.counts[it->second];
  }
  dist.support_count = labels.size();
  for (auto c : dist.counts)
    dist.probabilities.push_back(static_cast<double>(c) /
                                 static_cast<double>(dist.support_count));
  return dist;
}

double shannon_entropy(const LabelDistribution& dist, EntropyBase base) {
  double b = base.fixed ? *base.fixed
                        : static_cast<double>(dist.vocabulary.size());
  if (b <= 1.0) throw PreconditionError("entropy log base must be > 1");
  double h = 0.0;
  for (double p : dist.probabilities)
    if (p > 0.0) h += p * std::log(1.0 / p);
  return h / std::log(b);
}

double entropy_score(const std::vector<std::pair<std::string, double>>& entropies,
                     std::vector<double> weights) {
  if (entropies.empty()) throw PreconditionError("no entropies to aggregate");
  if (weights.empty())
    weights.assign(entropies.size(), 1.0 / static_cast<double>(entropies.size()));
  if (weights.size() != entropies.size())
    throw PreconditionError("got " + std::to_string(weights.size()) +
                            " weights for " + std::to_string(entropies.size()) +
                            " entropies");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw PreconditionError("negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw PreconditionError("weights sum to " + std::to_string(sum) +
                            ", expected 1");
  double score = 0.0;
  for (std::size_t i = 0; i < entropies.size(); ++i)
    score += weights[i] * entropies[i].second;
  return score;
}

std::vector<std::string> rank_by_score(
    const std::map<std::string, EntropyReport>& rows) {
  std::vector<std::string> ranking;
  for (const auto& [version, report] : rows) ranking.push_back(version);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&rows](const std::string& a, const std::string& b) {
                     double sa = rows.at(a).entropy_score;
                     double sb = rows.at(b).entropy_score;
                     if (sa != sb) return sa > sb;
                     return a < b;
                   });
  return ranking;
}

VersionComparison compare_versions(
    const std::map<std::string, corpus::Dataset>& datasets,
    const std::vector<classify::Dimension>& dimensions,
    std::vector<double> weights, EntropyBase base) {
  if (datasets.empty()) throw PreconditionError("no versions to compare");
  if (weights.empty())
    weights.assign(dimensions.size(), 1.0 / static_cast<double>(dimensions.size()));

  VersionComparison cmp;
  for (const auto& [version, dataset] : datasets) {
    if (dataset.conversations.empty())
      throw PreconditionError("version \"" + version + "\": dataset is empty");
    EntropyReport report;
    report.weights = weights;
    std::vector<std::pair<std::string, double>> entropies;
    for (const auto& dim : dimensions) {
      try {
        auto labels = classify::classify_dataset(dataset, dim);
        auto dist = estimate_distribution(labels, dim.vocabulary);
        double h = shannon_entropy(dist, base);
        entropies.emplace_back(dim.name, h);
        report.dimensions.push_back({dim.name, h, std::move(dist)});
      } catch (const std::runtime_error& e) {
        throw PreconditionError("version \"" + version + "\", dimension \"" +
                                dim.name + "\": " + e.what());
      }
    }
    report.entropy_score = entropy_score(entropies, weights);
    cmp.rows.emplace(version, std::move(report));
  }
  cmp.ranking = rank_by_score(cmp.rows);
  return cmp;
}

std::string serialize_entropy_report(const EntropyReport& report) {
  using nlohmann::json;
  auto dec6 = [](double v) { return convqual::report::format_fixed(v, 6); };
  json dims = json::array();
  for (const auto& d : report.dimensions) {
    json probs = json::object();
    for (std::size_t i = 0; i < d.distribution.vocabulary.size(); ++i)
      probs[d.distribution.vocabulary[i]] = dec6(d.distribution.probabilities[i]);
    dims.push_back({{"dimension", d.dimension},
                    {"entropy", dec6(d.entropy)},
                    {"support_count", d.distribution.support_count},
                    {"probabilities", std::move(probs)}});
  }
  json weights = json::array();
  for (double w : report.weights) weights.push_back(dec6(w));
  json j{{"dimensions", std::move(dims)},
         {"weights", std::move(weights)},
         {"entropy_score", dec6(report.entropy_score)}};
  return j.dump(2) + "\n";
}

}  // namespace convqual::diversity
