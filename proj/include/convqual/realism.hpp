#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convqual/classify.hpp"
#include "convqual/corpus.hpp"

namespace convqual::realism {

// Model vocabulary order puts simulator first so an uninformative model
// ties to the conservative verdict.
inline constexpr const char* kSimulatorLabel = "simulator-generated";
inline constexpr const char* kHumanLabel = "human-generated";

enum class Judgment { HumanGenerated, SimulatorGenerated };

struct RaterItem {
  std::size_t index = 0;
  std::string conversation_id;
  corpus::Conversation conversation;
};

struct RaterBatch {
  std::string batch_id;
  std::vector<RaterItem> items;                      // blinded view
  std::map<std::size_t, corpus::Source> hidden_key;  // index -> true source
  std::uint64_t seed = 0;
  std::size_t n = 0;
};

struct RaterLabels {
  std::string batch_id;
  std::map<std::size_t, Judgment> judgments;
};

enum class RealismMode { HumanRated, Inferred };

struct RealismReport {
  RealismMode mode = RealismMode::HumanRated;
  std::size_t h = 0;  // judged/predicted human-generated
  std::size_t n = 0;
  double score = 0.0;  // exactly h / n
  std::map<std::string, Judgment> verdicts;  // conversation id -> verdict
  std::optional<double> accuracy_vs_provenance;
};

// Uniform sampling without replacement from each pool (mt19937_64, seeded),
// human count = round(n * human_fraction), item order a seeded shuffle of
// the union. Pools must be disjoint by id.
RaterBatch sample_rater_batch(const corpus::Dataset& human_pool,
                              const corpus::Dataset& simulated_pool,
                              std::size_t n, double human_fraction,
                              std::uint64_t seed);

RealismReport realism_human(const RaterLabels& labels, const RaterBatch& batch);

// Lexical bag over all turns plus bucketed structural pseudo-tokens:
// __turns=<1-2|3-4|5-8|9+>, __avg_user_len=<1-5|6-12|13+>,
// __slate_sizes=<0|1-3|4+> per system turn.
std::vector<std::string> extract_features(const corpus::Conversation& c);

// Trains on the rater judgments (not the hidden provenance), vocabulary
// [simulator-generated, human-generated].
classify::ClassifierModel train_discriminator(const RaterBatch& batch,
                                              const RaterLabels& labels,
                                              double smoothing);

RealismReport realism_inferred(const classify::ClassifierModel& model,
                               const corpus::Dataset& batch);

// Writes items.jsonl (index + turns only), README.txt (rater instructions),
// key.jsonl (batch metadata line, then index -> true source).
void export_rater_batch(const RaterBatch& batch, const std::string& dir);
RaterBatch load_rater_batch(const std::string& dir);

// CSV `item_index,judgment` with header; judgment is
// human-generated | simulator-generated.
RaterLabels load_rater_labels(const std::string& path,
                              const std::string& batch_id);

}  // namespace convqual::realism
