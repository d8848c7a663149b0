#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "convqual/corpus.hpp"

namespace convqual::classify {

// Lowercased tokens split on non-alphanumeric runs. Bytes >= 0x80 are kept
// as token characters so multi-byte UTF-8 words stay intact.
std::vector<std::string> tokenize(const std::string& text);

struct Lexicon {
  std::map<std::string, std::set<std::string>> keywords;  // class -> lowercase tokens
};

Lexicon load_lexicon(const std::string& path,
                     const std::vector<std::string>& vocabulary);

// Argmax of per-class keyword hit counts; ties go to the earliest label in
// vocabulary order (so zero hits fall to the first label).
std::string classify_lexicon(const std::string& text, const Lexicon& lexicon,
                             const std::vector<std::string>& vocabulary);

struct ClassifierModel {
  std::vector<std::string> vocabulary;
  std::vector<double> class_log_priors;
  // One map per class, covering every token in the training universe.
  std::vector<std::map<std::string, double>> token_log_likelihoods;
  std::vector<double> unseen_log_likelihoods;  // per class, for out-of-universe tokens
  double smoothing = 1.0;
  std::size_t token_universe_size = 0;
};

using LabeledTokens = std::pair<std::vector<std::string>, std::string>;

// Multinomial naive Bayes with additive smoothing:
//   prior(c)        = count(c) / total
//   likelihood(t|c) = (count(t,c) + s) / (tokens(c) + s * |universe|)
ClassifierModel train_nb(const std::vector<LabeledTokens>& examples,
                         const std::vector<std::string>& vocabulary,
                         double smoothing);

struct Prediction {
  std::string label;
  std::vector<double> log_posteriors;  // unnormalized, vocabulary order
};

Prediction predict_nb(const ClassifierModel& model,
                      const std::vector<std::string>& tokens);

std::string serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(const std::string& text);
void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

struct ClassifierSpec {
  enum class Kind { Lexicon, NaiveBayes, External };
  Kind kind = Kind::Lexicon;
  std::string path;
};

struct Dimension {
  std::string name;
  std::vector<std::string> vocabulary;
  ClassifierSpec classifier;
  corpus::TurnFilter scope = corpus::TurnFilter::All;
};

// CSV `conversation_id,label` with header.
std::map<std::string, std::string> load_annotations(const std::string& path);

// Assigns exactly one in-vocabulary label per conversation; External specs
// fail on missing ids or out-of-vocabulary labels.
std::map<std::string, std::string> classify_dataset(const corpus::Dataset& dataset,
                                                    const Dimension& dimension);

}  // namespace convqual::classify
