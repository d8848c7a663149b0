#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "convqual/error.hpp"
#include "convqual/report.hpp"

using namespace convqual;
using namespace convqual::report;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) {
  return std::string(FIXTURES_DIR) + "/" + name;
}

std::string write_config(const json& j) {
  static int counter = 0;
  auto path = fs::temp_directory_path() /
              ("convqual_cfg_" + std::to_string(counter++) + ".json");
  std::ofstream out(path);
  out << j.dump(2);
  return path.string();
}

json base_config() {
  return {
      {"datasets",
       {{"A", fixture("version_a.jsonl")},
        {"B", fixture("version_b.jsonl")},
        {"C", fixture("version_c.jsonl")}}},
      {"dimensions",
       json::array(
           {{{"name", "Sentiment"},
             {"vocabulary", {"Negative", "Positive"}},
             {"classifier", {{"type", "lexicon"}, {"path", fixture("sentiment_lexicon.json")}}},
             {"scope", "user"}},
            {{"name", "Topic"},
             {"vocabulary",
              {"Automobiles", "Cooking", "Travel", "Technology", "Fashion", "History"}},
             {"classifier", {{"type", "lexicon"}, {"path", fixture("topic_lexicon.json")}}},
             {"scope", "all"}}})}};
}

}  // namespace

TEST_CASE("load_config applies equal-weight and realism defaults") {
  auto cfg_json = base_config();
  cfg_json["realism"] = {{"human_pool", fixture("realism_human.jsonl")},
                         {"simulated_pool", fixture("realism_simulated.jsonl")}};
  auto path = write_config(cfg_json);
  auto cfg = load_config(path);
  CHECK(cfg.weights == std::vector<double>{0.5, 0.5});
  CHECK_FALSE(cfg.entropy_base.fixed.has_value());
  REQUIRE(cfg.realism.has_value());
  CHECK(cfg.realism->n == 50);
  CHECK(cfg.realism->human_fraction == 0.5);
  CHECK(cfg.dimensions[0].scope == corpus::TurnFilter::UserOnly);
  fs::remove(path);
}

TEST_CASE("load_config rejects bad weights and dangling paths") {
  auto cfg_json = base_config();
  cfg_json["weights"] = {0.25, 0.7};
  auto path = write_config(cfg_json);
  CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("weights sum to"),
                       ValidationError);
  fs::remove(path);

  cfg_json = base_config();
  cfg_json["dimensions"][0]["classifier"]["path"] = "no_such_lexicon.json";
  path = write_config(cfg_json);
  CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("no_such_lexicon.json"),
                       IoError);
  fs::remove(path);
}

TEST_CASE("config digest is stable and sensitive to every resolved field") {
  auto path = write_config(base_config());
  auto cfg = load_config(path);
  CHECK(config_digest(cfg) == config_digest(load_config(path)));

  auto changed = cfg;
  changed.weights = {0.4, 0.6};
  CHECK(config_digest(changed) != config_digest(cfg));
  changed = cfg;
  changed.datasets.erase("C");
  CHECK(config_digest(changed) != config_digest(cfg));
  fs::remove(path);
}

TEST_CASE("half-even rounding at the 3-decimal boundary") {
  CHECK(format_fixed(0.795, 3) == "0.795");
  CHECK(format_fixed(0.0625, 3) == "0.062");  // ties to even
  CHECK(format_fixed(0.0635, 3) == "0.064");
  CHECK(format_fixed(1.0, 3) == "1.000");
  CHECK(round_half_even(2.5, 0) == 2.0);
  CHECK(round_half_even(3.5, 0) == 4.0);
}

TEST_CASE("markdown table mirrors the version comparison in ranking order") {
  EvalReport rep;
  auto mk = [](double hs, double ht) {
    diversity::EntropyReport er;
    er.dimensions = {{"Sentiment", hs, {}}, {"Topic", ht, {}}};
    er.weights = {0.5, 0.5};
    er.entropy_score = 0.5 * hs + 0.5 * ht;
    return er;
  };
  rep.entropy.rows = {{"A", mk(0.76, 0.58)}, {"B", mk(0.82, 0.67)}, {"C", mk(0.66, 0.93)}};
  rep.entropy.ranking = diversity::rank_by_score(rep.entropy.rows);

  auto md = render_report(rep, ReportFormat::MarkdownTable);
  CHECK(md.find("| Version | H_Sentiment | H_Topic | Entropy Score |") == 0);
  auto row_c = md.find("| C | 0.660 | 0.930 | 0.795 |");
  auto row_b = md.find("| B | 0.820 | 0.670 | 0.745 |");
  auto row_a = md.find("| A | 0.760 | 0.580 | 0.670 |");
  REQUIRE(row_c != std::string::npos);
  REQUIRE(row_b != std::string::npos);
  REQUIRE(row_a != std::string::npos);
  CHECK(row_c < row_b);
  CHECK(row_b < row_a);
  // no realism section without realism results
  CHECK(md.find("Realism Score") == std::string::npos);
  CHECK(md == render_report(rep, ReportFormat::MarkdownTable));
}

TEST_CASE("machine report round-trips through parse_report") {
  auto path = write_config(base_config());
  auto rep = run_diversity(load_config(path));
  fs::remove(path);

  realism::RealismReport rr;
  rr.mode = realism::RealismMode::Inferred;
  rr.h = 3;
  rr.n = 10;
  rr.score = 0.3;
  rr.verdicts["c1"] = realism::Judgment::HumanGenerated;
  rep.realism.push_back(rr);

  auto text = render_report(rep, ReportFormat::MachineReadable);
  auto reparsed = parse_report(text);
  CHECK(render_report(reparsed, ReportFormat::MachineReadable) == text);
  CHECK(reparsed.entropy.ranking == rep.entropy.ranking);
  CHECK(reparsed.realism.size() == 1);
  CHECK(reparsed.realism[0].h == 3);
  CHECK(reparsed.realism[0].verdicts.at("c1") == realism::Judgment::HumanGenerated);
  CHECK(reparsed.entropy.rows.at("A").entropy_score ==
        rep.entropy.rows.at("A").entropy_score);
}

TEST_CASE("run_diversity over the bundled fixtures ranks C > B > A") {
  auto cfg = load_config(fixture("eval_config.json"));
  auto rep = run_diversity(cfg);
  CHECK(rep.entropy.ranking == std::vector<std::string>{"C", "B", "A"});
  CHECK(rep.config_digest == config_digest(cfg));
  CHECK(rep.toolkit_version == std::string(kToolkitVersion));
}

TEST_CASE("entropy report serialization uses 6-place decimal strings") {
  diversity::EntropyReport er;
  diversity::LabelDistribution d;
  d.vocabulary = {"Neg", "Pos"};
  d.counts = {1, 2};
  d.probabilities = {1.0 / 3.0, 2.0 / 3.0};
  d.support_count = 3;
  er.dimensions = {{"Sentiment", 0.9182958340544896, d}};
  er.weights = {1.0};
  er.entropy_score = 0.9182958340544896;
  auto text = diversity::serialize_entropy_report(er);
  CHECK(text.find("\"0.918296\"") != std::string::npos);
  CHECK(text.find("\"0.333333\"") != std::string::npos);
}
