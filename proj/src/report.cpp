#include "convqual/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "convqual/error.hpp"

namespace convqual::report {

using nlohmann::json;
namespace fs = std::filesystem;

double round_half_even(double value, int digits) {
  double scale = std::pow(10.0, digits);
  return std::nearbyint(value * scale) / scale;  // FE_TONEAREST ties to even
}

std::string format_fixed(double value, int digits) {
  double scale = std::pow(10.0, digits);
  bool neg = value < 0.0;
  auto m = static_cast<long long>(std::nearbyint(std::fabs(value) * scale));
  auto s = static_cast<long long>(scale);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%lld.%0*lld", neg ? "-" : "", m / s, digits,
                m % s);
  return buf;
}

namespace {

std::string decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double from_decimal(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

std::string resolve(const fs::path& base, const std::string& p,
                    const std::string& what) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  if (!fs::exists(path))
    throw IoError(what + " does not exist: " + path.string());
  return path.lexically_normal().string();
}

corpus::TurnFilter parse_scope(const std::string& s) {
  if (s == "user") return corpus::TurnFilter::UserOnly;
  if (s == "system") return corpus::TurnFilter::SystemOnly;
  if (s == "all") return corpus::TurnFilter::All;
  throw ValidationError("invalid scope \"" + s + "\" (user|system|all)");
}

std::string scope_string(corpus::TurnFilter f) {
  switch (f) {
    case corpus::TurnFilter::UserOnly: return "user";
    case corpus::TurnFilter::SystemOnly: return "system";
    default: return "all";
  }
}

json config_to_json(const EvalConfig& c) {
  json dims = json::array();
  for (const auto& d : c.dimensions) {
    std::string kind = d.classifier.kind == classify::ClassifierSpec::Kind::Lexicon
                           ? "lexicon"
                       : d.classifier.kind == classify::ClassifierSpec::Kind::NaiveBayes
                           ? "naive_bayes"
                           : "external";
    dims.push_back({{"name", d.name},
                    {"vocabulary", d.vocabulary},
                    {"classifier", {{"type", kind}, {"path", d.classifier.path}}},
                    {"scope", scope_string(d.scope)}});
  }
  json weights = json::array();
  for (double w : c.weights) weights.push_back(decimal(w));
  json j{{"dimensions", std::move(dims)},
         {"weights", std::move(weights)},
         {"entropy_base",
          c.entropy_base.fixed ? json(decimal(*c.entropy_base.fixed)) : json("vocabulary")},
         {"datasets", c.datasets},
         {"skip_invalid", c.skip_invalid}};
  if (c.realism) {
    j["realism"] = {{"n", c.realism->n},
                    {"human_fraction", decimal(c.realism->human_fraction)},
                    {"seed", c.realism->seed},
                    {"smoothing", decimal(c.realism->smoothing)},
                    {"holdout_fraction", decimal(c.realism->holdout_fraction)},
                    {"human_pool", c.realism->human_pool},
                    {"simulated_pool", c.realism->simulated_pool}};
  }
  return j;
}

}  // namespace

EvalConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }

  fs::path base = fs::path(path).parent_path();
  EvalConfig cfg;
  cfg.skip_invalid = j.value("skip_invalid", false);

  if (!j.contains("dimensions") || !j["dimensions"].is_array() ||
      j["dimensions"].empty())
    throw ValidationError("config " + path + ": \"dimensions\" must be a non-empty array");
  for (const auto& jd : j["dimensions"]) {
    classify::Dimension dim;
    dim.name = jd.at("name").get<std::string>();
    dim.vocabulary = jd.at("vocabulary").get<std::vector<std::string>>();
    if (dim.vocabulary.size() < 2)
      throw ValidationError("dimension \"" + dim.name +
                            "\": vocabulary needs at least 2 labels");
    std::set<std::string> uniq(dim.vocabulary.begin(), dim.vocabulary.end());
    if (uniq.size() != dim.vocabulary.size() || uniq.count(""))
      throw ValidationError("dimension \"" + dim.name +
                            "\": vocabulary labels must be distinct and non-empty");
    const auto& jc = jd.at("classifier");
    std::string type = jc.at("type").get<std::string>();
    if (type == "lexicon") dim.classifier.kind = classify::ClassifierSpec::Kind::Lexicon;
    else if (type == "naive_bayes")
      dim.classifier.kind = classify::ClassifierSpec::Kind::NaiveBayes;
    else if (type == "external")
      dim.classifier.kind = classify::ClassifierSpec::Kind::External;
    else
      throw ValidationError("dimension \"" + dim.name + "\": unknown classifier type \"" +
                            type + "\"");
    dim.classifier.path = resolve(base, jc.at("path").get<std::string>(),
                                  "classifier file for dimension \"" + dim.name + "\"");
    // Defaults: sentiment-style dimensions read user turns, topical ones all.
    dim.scope = jd.contains("scope") ? parse_scope(jd["scope"].get<std::string>())
                                     : corpus::TurnFilter::All;
    cfg.dimensions.push_back(std::move(dim));
  }

  if (j.contains("weights")) {
    cfg.weights = j["weights"].get<std::vector<double>>();
    if (cfg.weights.size() != cfg.dimensions.size())
      throw ValidationError("config has " + std::to_string(cfg.weights.size()) +
                            " weights for " + std::to_string(cfg.dimensions.size()) +
                            " dimensions");
    double sum = 0.0;
    for (double w : cfg.weights) {
      if (w < 0.0) throw ValidationError("negative weight in config");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("weights sum to " + std::to_string(sum) + ", expected 1");
  } else {
    cfg.weights.assign(cfg.dimensions.size(),
                       1.0 / static_cast<double>(cfg.dimensions.size()));
  }

  if (j.contains("entropy_base") && j["entropy_base"] != "vocabulary") {
    double b = j["entropy_base"].get<double>();
    if (b <= 1.0) throw ValidationError("entropy_base must be > 1");
    cfg.entropy_base = diversity::EntropyBase::fixed_base(b);
  }

  if (j.contains("datasets"))
    for (const auto& [version, p] : j["datasets"].items())
      cfg.datasets[version] =
          resolve(base, p.get<std::string>(), "dataset for version \"" + version + "\"");

  if (j.contains("realism")) {
    const auto& jr = j["realism"];
    RealismConfig rc;
    rc.n = jr.value("n", std::size_t{50});
    rc.human_fraction = jr.value("human_fraction", 0.5);
    rc.seed = jr.value("seed", std::uint64_t{0});
    rc.smoothing = jr.value("smoothing", 1.0);
    rc.holdout_fraction = jr.value("holdout_fraction", 0.0);
    if (jr.contains("human_pool"))
      rc.human_pool = resolve(base, jr["human_pool"].get<std::string>(), "human pool");
    if (jr.contains("simulated_pool"))
      rc.simulated_pool =
          resolve(base, jr["simulated_pool"].get<std::string>(), "simulated pool");
    cfg.realism = std::move(rc);
  }
  return cfg;
}

std::string config_digest(const EvalConfig& config) {
  std::string canon = config_to_json(config).dump();
  std::uint64_t hash = 14695981039346656037ull;  // FNV-1a 64
  for (unsigned char ch : canon) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

json distribution_to_json(const diversity::LabelDistribution& d) {
  json probs = json::array();
  for (double p : d.probabilities) probs.push_back(decimal(p));
  return {{"vocabulary", d.vocabulary},
          {"counts", d.counts},
          {"support_count", d.support_count},
          {"probabilities", std::move(probs)}};
}

diversity::LabelDistribution distribution_from_json(const json& j) {
  diversity::LabelDistribution d;
  d.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  d.counts = j.at("counts").get<std::vector<std::size_t>>();
  d.support_count = j.at("support_count").get<std::size_t>();
  for (const auto& p : j.at("probabilities"))
    d.probabilities.push_back(from_decimal(p.get<std::string>()));
  return d;
}

std::string mode_string(realism::RealismMode m) {
  return m == realism::RealismMode::HumanRated ? "human-rated" : "inferred";
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::MachineReadable) {
    json rows = json::object();
    for (const auto& [version, er] : report.entropy.rows) {
      json dims = json::array();
      for (const auto& d : er.dimensions)
        dims.push_back({{"dimension", d.dimension},
                        {"entropy", decimal(d.entropy)},
                        {"distribution", distribution_to_json(d.distribution)}});
      json weights = json::array();
      for (double w : er.weights) weights.push_back(decimal(w));
      rows[version] = {{"dimensions", std::move(dims)},
                       {"weights", std::move(weights)},
                       {"entropy_score", decimal(er.entropy_score)}};
    }
    json realism = json::array();
    for (const auto& r : report.realism) {
      json verdicts = json::object();
      for (const auto& [id, v] : r.verdicts)
        verdicts[id] = v == realism::Judgment::HumanGenerated
                           ? realism::kHumanLabel
                           : realism::kSimulatorLabel;
      json jr{{"mode", mode_string(r.mode)},
              {"h", r.h},
              {"n", r.n},
              {"score", decimal(r.score)},
              {"verdicts", std::move(verdicts)}};
      jr["accuracy_vs_provenance"] =
          r.accuracy_vs_provenance ? json(decimal(*r.accuracy_vs_provenance)) : json();
      realism.push_back(std::move(jr));
    }
    json j{{"format", "convqual-report"},
           {"version", 1},
           {"toolkit_version", report.toolkit_version},
           {"config_digest", report.config_digest},
           {"entropy", {{"ranking", report.entropy.ranking}, {"rows", std::move(rows)}}},
           {"realism", std::move(realism)}};
    return j.dump(2) + "\n";
  }

  // Markdown, rows in ranking order, 3 decimals like the human-facing tables.
  std::ostringstream out;
  if (!report.entropy.rows.empty()) {
    const auto& first = report.entropy.rows.begin()->second;
    out << "| Version |";
    for (const auto& d : first.dimensions) out << " H_" << d.dimension << " |";
    out << " Entropy Score |\n|---|";
    for (std::size_t i = 0; i < first.dimensions.size(); ++i) out << "---|";
    out << "---|\n";
    for (const auto& version : report.entropy.ranking) {
      const auto& er = report.entropy.rows.at(version);
      out << "| " << version << " |";
      for (const auto& d : er.dimensions) out << " " << format_fixed(d.entropy, 3) << " |";
      out << " " << format_fixed(er.entropy_score, 3) << " |\n";
    }
  }
  if (!report.realism.empty()) {
    out << "\n| Mode | h | N | Realism Score | Accuracy vs Provenance |\n"
           "|---|---|---|---|---|\n";
    for (const auto& r : report.realism) {
      out << "| " << mode_string(r.mode) << " | " << r.h << " | " << r.n << " | "
          << format_fixed(r.score, 3) << " | "
          << (r.accuracy_vs_provenance ? format_fixed(*r.accuracy_vs_provenance, 3)
                                       : std::string("n/a"))
          << " |\n";
    }
  }
  return out.str();
}

EvalReport parse_report(const std::string& machine_text) {
  json j;
  try {
    j = json::parse(machine_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("report parse failure: ") + e.what());
  }
  if (j.value("format", "") != "convqual-report")
    throw ValidationError("unrecognized report format");

  EvalReport report;
  report.toolkit_version = j.at("toolkit_version").get<std::string>();
  report.config_digest = j.at("config_digest").get<std::string>();
  report.entropy.ranking = j.at("entropy").at("ranking").get<std::vector<std::string>>();
  for (const auto& [version, jr] : j.at("entropy").at("rows").items()) {
    diversity::EntropyReport er;
    for (const auto& jd : jr.at("dimensions"))
      er.dimensions.push_back({jd.at("dimension").get<std::string>(),
                               from_decimal(jd.at("entropy").get<std::string>()),
                               distribution_from_json(jd.at("distribution"))});
    for (const auto& w : jr.at("weights"))
      er.weights.push_back(from_decimal(w.get<std::string>()));
    er.entropy_score = from_decimal(jr.at("entropy_score").get<std::string>());
    report.entropy.rows.emplace(version, std::move(er));
  }
  for (const auto& jr : j.at("realism")) {
    realism::RealismReport r;
    r.mode = jr.at("mode").get<std::string>() == "human-rated"
                 ? realism::RealismMode::HumanRated
                 : realism::RealismMode::Inferred;
    r.h = jr.at("h").get<std::size_t>();
    r.n = jr.at("n").get<std::size_t>();
    r.score = from_decimal(jr.at("score").get<std::string>());
    for (const auto& [id, v] : jr.at("verdicts").items())
      r.verdicts[id] = v.get<std::string>() == realism::kHumanLabel
                           ? realism::Judgment::HumanGenerated
                           : realism::Judgment::SimulatorGenerated;
    if (!jr.at("accuracy_vs_provenance").is_null())
      r.accuracy_vs_provenance =
          from_decimal(jr.at("accuracy_vs_provenance").get<std::string>());
    report.realism.push_back(std::move(r));
  }
  return report;
}

EvalReport run_diversity(const EvalConfig& config) {
  if (config.datasets.empty())
    throw PreconditionError("no version datasets configured");
  std::map<std::string, corpus::Dataset> datasets;
  for (const auto& [version, path] : config.datasets)
    datasets.emplace(version, corpus::load_dataset(path, config.skip_invalid));

  EvalReport report;
  report.entropy = diversity::compare_versions(datasets, config.dimensions,
                                               config.weights, config.entropy_base);
  report.config_digest = config_digest(config);
  return report;
}

}  // namespace convqual::report
