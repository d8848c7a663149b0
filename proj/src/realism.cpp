#include "convqual/realism.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "convqual/error.hpp"

namespace convqual::realism {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Rejection sampling keeps the draw unbiased and reproducible for any
// engine with a fixed reference sequence (mt19937_64 here).
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

// Partial Fisher-Yates: the first k slots of a fresh index vector.
std::vector<std::size_t> sample_indices(std::mt19937_64& gen, std::size_t pool,
                                        std::size_t k) {
  std::vector<std::size_t> idx(pool);
  for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(gen, pool - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::string judgment_string(Judgment j) {
  return j == Judgment::HumanGenerated ? kHumanLabel : kSimulatorLabel;
}

}  // namespace

RaterBatch sample_rater_batch(const corpus::Dataset& human_pool,
                              const corpus::Dataset& simulated_pool,
                              std::size_t n, double human_fraction,
                              std::uint64_t seed) {
  if (n == 0) throw PreconditionError("batch size must be positive");
  if (human_fraction < 0.0 || human_fraction > 1.0)
    throw PreconditionError("human_fraction must be in [0,1]");

  std::size_t human_count =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * human_fraction));
  std::size_t sim_count = n - human_count;
  if (human_count > human_pool.conversations.size())
    throw PreconditionError("human pool has " +
                            std::to_string(human_pool.conversations.size()) +
                            " conversations, need " + std::to_string(human_count));
  if (sim_count > simulated_pool.conversations.size())
    throw PreconditionError("simulated pool has " +
                            std::to_string(simulated_pool.conversations.size()) +
                            " conversations, need " + std::to_string(sim_count));

  std::set<std::string> human_ids;
  for (const auto& c : human_pool.conversations) human_ids.insert(c.id);
  for (const auto& c : simulated_pool.conversations)
    if (human_ids.count(c.id))
      throw PreconditionError("pools overlap on id \"" + c.id + "\"");

  std::mt19937_64 gen(seed);
  auto human_idx = sample_indices(gen, human_pool.conversations.size(), human_count);
  auto sim_idx = sample_indices(gen, simulated_pool.conversations.size(), sim_count);

  struct Picked {
    const corpus::Conversation* conv;
    corpus::Source source;
  };
  std::vector<Picked> picked;
  picked.reserve(n);
  for (auto i : human_idx)
    picked.push_back({&human_pool.conversations[i], corpus::Source::Human});
  for (auto i : sim_idx)
    picked.push_back({&simulated_pool.conversations[i], corpus::Source::Simulated});

  // Seeded shuffle of the union so item order leaks nothing.
  for (std::size_t i = picked.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded(gen, i));
    std::swap(picked[i - 1], picked[j]);
  }

  RaterBatch batch;
  batch.batch_id = "batch-" + std::to_string(seed);
  batch.seed = seed;
  batch.n = n;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    batch.items.push_back({i, picked[i].conv->id, *picked[i].conv});
    batch.hidden_key[i] = picked[i].source;
  }
  return batch;
}

RealismReport realism_human(const RaterLabels& labels, const RaterBatch& batch) {
  if (labels.batch_id != batch.batch_id)
    throw PreconditionError("labels are for batch \"" + labels.batch_id +
                            "\", expected \"" + batch.batch_id + "\"");
  for (std::size_t i = 0; i < batch.n; ++i)
    if (!labels.judgments.count(i))
      throw PreconditionError("missing judgment for item index " + std::to_string(i));
  if (labels.judgments.size() != batch.n)
    throw PreconditionError("got " + std::to_string(labels.judgments.size()) +
                            " judgments for batch of " + std::to_string(batch.n));

  RealismReport report;
  report.mode = RealismMode::HumanRated;
  report.n = batch.n;
  std::size_t correct = 0;
  for (const auto& item : batch.items) {
    Judgment j = labels.judgments.at(item.index);
    if (j == Judgment::HumanGenerated) ++report.h;
    report.verdicts[item.conversation_id] = j;
    auto truth = batch.hidden_key.at(item.index);
    bool judged_human = j == Judgment::HumanGenerated;
    if (judged_human == (truth == corpus::Source::Human)) ++correct;
  }
  report.score = static_cast<double>(report.h) / static_cast<double>(report.n);
  report.accuracy_vs_provenance =
      static_cast<double>(correct) / static_cast<double>(report.n);
  return report;
}

std::vector<std::string> extract_features(const corpus::Conversation& c) {
  std::vector<std::string> features;
  std::size_t user_turns = 0, user_tokens = 0;
  for (const auto& t : c.turns) {
    auto toks = classify::tokenize(t.text);
    if (t.speaker == corpus::Speaker::User) {
      ++user_turns;
      user_tokens += toks.size();
    }
    for (auto& tok : toks) features.push_back(std::move(tok));
  }

  auto turns = c.turns.size();
  features.push_back(std::string("__turns=") +
                     (turns <= 2 ? "1-2" : turns <= 4 ? "3-4" : turns <= 8 ? "5-8" : "9+"));

  double avg = user_turns ? static_cast<double>(user_tokens) / user_turns : 0.0;
  features.push_back(std::string("__avg_user_len=") +
                     (avg <= 5.0 ? "1-5" : avg <= 12.0 ? "6-12" : "13+"));

  for (const auto& t : c.turns) {
    if (t.speaker != corpus::Speaker::System) continue;
    auto slate = t.recommendations.size();
    features.push_back(std::string("__slate_sizes=") +
                       (slate == 0 ? "0" : slate <= 3 ? "1-3" : "4+"));
  }
  return features;
}

classify::ClassifierModel train_discriminator(const RaterBatch& batch,
                                              const RaterLabels& labels,
                                              double smoothing) {
  if (labels.batch_id != batch.batch_id)
    throw PreconditionError("labels are for batch \"" + labels.batch_id +
                            "\", expected \"" + batch.batch_id + "\"");
  std::vector<classify::LabeledTokens> examples;
  bool saw_human = false, saw_sim = false;
  for (const auto& item : batch.items) {
    auto it = labels.judgments.find(item.index);
    if (it == labels.judgments.end())
      throw PreconditionError("missing judgment for item index " +
                              std::to_string(item.index));
    (it->second == Judgment::HumanGenerated ? saw_human : saw_sim) = true;
    examples.emplace_back(extract_features(item.conversation),
                          judgment_string(it->second));
  }
  if (!saw_human || !saw_sim)
    throw PreconditionError(
        "discriminator needs both judgment classes in the rated batch");
  return classify::train_nb(examples, {kSimulatorLabel, kHumanLabel}, smoothing);
}

RealismReport realism_inferred(const classify::ClassifierModel& model,
                               const corpus::Dataset& batch) {
  if (batch.conversations.empty())
    throw PreconditionError("inference batch is empty");
  if (model.vocabulary != std::vector<std::string>{kSimulatorLabel, kHumanLabel})
    throw PreconditionError("model vocabulary is not the realism classes");

  RealismReport report;
  report.mode = RealismMode::Inferred;
  report.n = batch.conversations.size();
  std::size_t known = 0, correct = 0;
  for (const auto& c : batch.conversations) {
    auto pred = classify::predict_nb(model, extract_features(c));
    Judgment j = pred.label == kHumanLabel ? Judgment::HumanGenerated
                                           : Judgment::SimulatorGenerated;
    if (j == Judgment::HumanGenerated) ++report.h;
    report.verdicts[c.id] = j;
    if (c.source != corpus::Source::Unknown) {
      ++known;
      bool predicted_human = j == Judgment::HumanGenerated;
      if (predicted_human == (c.source == corpus::Source::Human)) ++correct;
    }
  }
  report.score = static_cast<double>(report.h) / static_cast<double>(report.n);
  if (known > 0)
    report.accuracy_vs_provenance =
        static_cast<double>(correct) / static_cast<double>(known);
  return report;
}

void export_rater_batch(const RaterBatch& batch, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create batch directory: " + dir);

  std::ofstream items(fs::path(dir) / "items.jsonl");
  if (!items) throw IoError("cannot write items.jsonl in " + dir);
  for (const auto& item : batch.items) {
    json turns = json::array();
    for (const auto& t : item.conversation.turns) {
      json jt{{"speaker", corpus::to_string(t.speaker)}, {"text", t.text}};
      if (!t.recommendations.empty()) jt["recommendations"] = t.recommendations;
      turns.push_back(std::move(jt));
    }
    items << json{{"index", item.index}, {"turns", std::move(turns)}}.dump() << "\n";
  }

  std::ofstream readme(fs::path(dir) / "README.txt");
  readme << "Here are " << batch.n
         << " user conversations with a conversational recommender system.\n"
            "Some conversations in this set are human-generated, whereas others\n"
            "are simulator-generated. For each conversation, identify whether it\n"
            "is human-generated or simulator-generated.\n";

  std::ofstream key(fs::path(dir) / "key.jsonl");
  if (!key) throw IoError("cannot write key.jsonl in " + dir);
  key << json{{"batch_id", batch.batch_id}, {"seed", batch.seed}, {"n", batch.n}}.dump()
      << "\n";
  for (const auto& item : batch.items)
    key << json{{"index", item.index},
                {"conversation_id", item.conversation_id},
                {"source", corpus::to_string(batch.hidden_key.at(item.index))}}
               .dump()
        << "\n";
}

RaterBatch load_rater_batch(const std::string& dir) {
  std::ifstream key(fs::path(dir) / "key.jsonl");
  if (!key) throw IoError("cannot open key.jsonl in " + dir);
  std::ifstream items(fs::path(dir) / "items.jsonl");
  if (!items) throw IoError("cannot open items.jsonl in " + dir);

  RaterBatch batch;
  std::string line;
  if (!std::getline(key, line)) throw ValidationError("key.jsonl is empty");
  json meta = json::parse(line);
  batch.batch_id = meta.at("batch_id").get<std::string>();
  batch.seed = meta.at("seed").get<std::uint64_t>();
  batch.n = meta.at("n").get<std::size_t>();

  std::map<std::size_t, std::pair<std::string, corpus::Source>> key_rows;
  while (std::getline(key, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    auto src = j.at("source").get<std::string>();
    key_rows[j.at("index").get<std::size_t>()] = {
        j.at("conversation_id").get<std::string>(),
        src == "human" ? corpus::Source::Human : corpus::Source::Simulated};
  }

  while (std::getline(items, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    auto index = j.at("index").get<std::size_t>();
    auto it = key_rows.find(index);
    if (it == key_rows.end())
      throw ValidationError("item index " + std::to_string(index) +
                            " missing from key.jsonl");
    corpus::Conversation conv;
    conv.id = it->second.first;
    conv.source = it->second.second;
    for (const auto& jt : j.at("turns")) {
      corpus::Turn turn;
      turn.speaker = jt.at("speaker").get<std::string>() == "user"
                         ? corpus::Speaker::User
                         : corpus::Speaker::System;
      turn.text = jt.at("text").get<std::string>();
      if (jt.contains("recommendations"))
        turn.recommendations = jt["recommendations"].get<std::vector<std::string>>();
      conv.turns.push_back(std::move(turn));
    }
    batch.items.push_back({index, conv.id, std::move(conv)});
    batch.hidden_key[index] = it->second.second;
  }
  if (batch.items.size() != batch.n)
    throw ValidationError("items.jsonl has " + std::to_string(batch.items.size()) +
                          " items, key says " + std::to_string(batch.n));
  return batch;
}

RaterLabels load_rater_labels(const std::string& path,
                              const std::string& batch_id) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file: " + path);
  RaterLabels labels;
  labels.batch_id = batch_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) continue;  // header
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": expected item_index,judgment");
    std::size_t index = std::stoul(line.substr(0, comma));
    std::string verdict = line.substr(comma + 1);
    Judgment j;
    if (verdict == kHumanLabel) j = Judgment::HumanGenerated;
    else if (verdict == kSimulatorLabel) j = Judgment::SimulatorGenerated;
    else
      throw ValidationError(path + ": line " + std::to_string(line_no) +
                            ": unknown judgment \"" + verdict + "\"");
    if (!labels.judgments.emplace(index, j).second)
      throw ValidationError(path + ": duplicate judgment for item index " +
                            std::to_string(index));
  }
  return labels;
}

}  // namespace convqual::realism
