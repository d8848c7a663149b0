#include "convqual/classify.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "convqual/error.hpp"

namespace convqual::classify {

using nlohmann::json;

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char ch : text) {
    bool word = std::isalnum(ch) || ch >= 0x80;
    if (word) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Lexicon load_lexicon(const std::string& path,
                     const std::vector<std::string>& vocabulary) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("lexicon " + path + ": " + e.what());
  }
  Lexicon lex;
  for (const auto& label : vocabulary) {
    auto& entry = lex.keywords[label];  // default-construct: empty set allowed
    if (j.contains(label))
      for (const auto& kw : j[label])
        entry.insert(kw.get<std::string>());
  }
  for (const auto& [label, kws] : j.items()) {
    if (!lex.keywords.count(label))
      throw ValidationError("lexicon " + path + ": class \"" + label +
                            "\" not in dimension vocabulary");
  }
  return lex;
}

std::string classify_lexicon(const std::string& text, const Lexicon& lexicon,
                             const std::vector<std::string>& vocabulary) {
  auto tokens = tokenize(text);
  std::size_t best_idx = 0, best_count = 0;
  bool first = true;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    auto it = lexicon.keywords.find(vocabulary[i]);
    if (it == lexicon.keywords.end())
      throw PreconditionError("lexicon missing class \"" + vocabulary[i] + "\"");
    std::size_t count = 0;
    for (const auto& tok : tokens)
      if (it->second.count(tok)) ++count;
    if (first || count > best_count) {  // strict: ties keep the earlier label
      best_idx = i;
      best_count = count;
      first = false;
    }
  }
  return vocabulary[best_idx];
}

ClassifierModel train_nb(const std::vector<LabeledTokens>& examples,
                         const std::vector<std::string>& vocabulary,
                         double smoothing) {
  if (vocabulary.empty()) throw PreconditionError("empty vocabulary");
  if (smoothing <= 0) throw PreconditionError("smoothing must be positive");

  std::map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < vocabulary.size(); ++i)
    class_index[vocabulary[i]] = i;

  std::vector<std::size_t> doc_counts(vocabulary.size(), 0);
  std::vector<std::size_t> token_totals(vocabulary.size(), 0);
  std::vector<std::map<std::string, std::size_t>> token_counts(vocabulary.size());
  std::set<std::string> universe;

  for (const auto& [tokens, label] : examples) {
    auto it = class_index.find(label);
    if (it == class_index.end())
      throw PreconditionError("example labeled with unknown class \"" + label + "\"");
    auto c = it->second;
    ++doc_counts[c];
    for (const auto& tok : tokens) {
      ++token_counts[c][tok];
      ++token_totals[c];
      universe.insert(tok);
    }
  }

  for (std::size_t c = 0; c < vocabulary.size(); ++c)
    if (doc_counts[c] == 0)
      throw PreconditionError("no training examples for class \"" + vocabulary[c] + "\"");

  ClassifierModel model;
  model.vocabulary = vocabulary;
  model.smoothing = smoothing;
  model.token_universe_size = universe.size();
  model.token_log_likelihoods.resize(vocabulary.size());
  double total_docs = static_cast<double>(examples.size());
  for (std::size_t c = 0; c < vocabulary.size(); ++c) {
    model.class_log_priors.push_back(std::log(doc_counts[c] / total_docs));
    double denom = token_totals[c] + smoothing * static_cast<double>(universe.size());
    for (const auto& tok : universe) {
      auto it = token_counts[c].find(tok);
      double count = it == token_counts[c].end() ? 0.0 : static_cast<double>(it->second);
      model.token_log_likelihoods[c][tok] = std::log((count + smoothing) / denom);
    }
    model.unseen_log_likelihoods.push_back(std::log(smoothing / denom));
  }
  return model;
}

Prediction predict_nb(const ClassifierModel& model,
                      const std::vector<std::string>& tokens) {
  Prediction pred;
  pred.log_posteriors.resize(model.vocabulary.size());
  for (std::size_t c = 0; c < model.vocabulary.size(); ++c) {
    double score = model.class_log_priors[c];
    const auto& likelihoods = model.token_log_likelihoods[c];
    for (const auto& tok : tokens) {
      auto it = likelihoods.find(tok);
      score += it != likelihoods.end() ? it->second : model.unseen_log_likelihoods[c];
    }
    pred.log_posteriors[c] = score;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < pred.log_posteriors.size(); ++c)
    if (pred.log_posteriors[c] > pred.log_posteriors[best]) best = c;
  pred.label = model.vocabulary[best];
  return pred;
}

namespace {

// 17 significant digits round-trips any double exactly.
std::string decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double from_decimal(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

std::string serialize_model(const ClassifierModel& model) {
  json classes = json::array();
  for (std::size_t c = 0; c < model.vocabulary.size(); ++c) {
    json likelihoods = json::object();
    for (const auto& [tok, ll] : model.token_log_likelihoods[c])
      likelihoods[tok] = decimal(ll);
    classes.push_back({{"label", model.vocabulary[c]},
                       {"log_prior", decimal(model.class_log_priors[c])},
                       {"unseen_log_likelihood", decimal(model.unseen_log_likelihoods[c])},
                       {"token_log_likelihoods", std::move(likelihoods)}});
  }
  json j{{"format", "convqual-nb"},
         {"version", 1},
         {"vocabulary", model.vocabulary},
         {"smoothing", decimal(model.smoothing)},
         {"token_universe_size", model.token_universe_size},
         {"classes", std::move(classes)}};
  return j.dump(2) + "\n";
}

ClassifierModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model parse failure: ") + e.what());
  }
  if (j.value("format", "") != "convqual-nb" || j.value("version", 0) != 1)
    throw ValidationError("unrecognized model format");
  ClassifierModel model;
  model.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  model.smoothing = from_decimal(j.at("smoothing").get<std::string>());
  model.token_universe_size = j.at("token_universe_size").get<std::size_t>();
  for (const auto& jc : j.at("classes")) {
    model.class_log_priors.push_back(from_decimal(jc.at("log_prior").get<std::string>()));
    model.unseen_log_likelihoods.push_back(
        from_decimal(jc.at("unseen_log_likelihood").get<std::string>()));
    std::map<std::string, double> likelihoods;
    for (const auto& [tok, ll] : jc.at("token_log_likelihoods").items())
      likelihoods[tok] = from_decimal(ll.get<std::string>());
    model.token_log_likelihoods.push_back(std::move(likelihoods));
  }
  if (model.class_log_priors.size() != model.vocabulary.size())
    throw ValidationError("model class count mismatch");
  return model;
}

void save_model(const ClassifierModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << serialize_model(model);
}

ClassifierModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

std::map<std::string, std::string> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);
  std::map<std::string, std::string> labels;
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
                            ": expected conversation_id,label");
    labels[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return labels;
}

std::map<std::string, std::string> classify_dataset(const corpus::Dataset& dataset,
                                                    const Dimension& dimension) {
  std::map<std::string, std::string> out;
  switch (dimension.classifier.kind) {
    case ClassifierSpec::Kind::Lexicon: {
      auto lex = load_lexicon(dimension.classifier.path, dimension.vocabulary);
      for (const auto& c : dataset.conversations)
        out[c.id] = classify_lexicon(corpus::session_text(c, dimension.scope),
                                     lex, dimension.vocabulary);
      break;
    }
    case ClassifierSpec::Kind::NaiveBayes: {
      auto model = load_model(dimension.classifier.path);
      if (model.vocabulary != dimension.vocabulary)
        throw ValidationError("model vocabulary does not match dimension \"" +
                              dimension.name + "\"");
      for (const auto& c : dataset.conversations) {
        auto tokens = tokenize(corpus::session_text(c, dimension.scope));
        out[c.id] = predict_nb(model, tokens).label;
      }
      break;
    }
    case ClassifierSpec::Kind::External: {
      auto annotations = load_annotations(dimension.classifier.path);
      std::set<std::string> vocab(dimension.vocabulary.begin(),
                                  dimension.vocabulary.end());
      for (const auto& c : dataset.conversations) {
        auto it = annotations.find(c.id);
        if (it == annotations.end())
          throw ValidationError("annotation file " + dimension.classifier.path +
                                " missing conversation id \"" + c.id + "\"");
        if (!vocab.count(it->second))
          throw ValidationError("annotation label \"" + it->second +
                                "\" for id \"" + c.id +
                                "\" outside vocabulary of dimension \"" +
                                dimension.name + "\"");
        out[c.id] = it->second;
      }
      break;
    }
  }
  return out;
}

}  // namespace convqual::classify
