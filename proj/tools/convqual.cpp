#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "convqual/error.hpp"
#include "convqual/report.hpp"

namespace fs = std::filesystem;
using namespace convqual;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string format = "md";
  bool skip_invalid = false;
  std::optional<std::uint64_t> seed;
};

std::string render(const report::EvalReport& rep, const std::string& format) {
  return report::render_report(rep, format == "machine"
                                        ? report::ReportFormat::MachineReadable
                                        : report::ReportFormat::MarkdownTable);
}

void emit(const std::string& text, const std::string& out_dir,
          const std::string& filename) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(out_dir);
  auto path = fs::path(out_dir) / filename;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  std::cout << "wrote " << path.string() << "\n";
}

report::EvalConfig load(const Options& opt) {
  auto cfg = report::load_config(opt.config_path);
  if (opt.skip_invalid) cfg.skip_invalid = true;
  if (opt.seed && cfg.realism) cfg.realism->seed = *opt.seed;
  return cfg;
}

report::RealismConfig realism_config(const report::EvalConfig& cfg) {
  if (!cfg.realism)
    throw PreconditionError("config has no \"realism\" section");
  return *cfg.realism;
}

int dispatch(CLI::App& app, const Options& opt, const std::string& model_path,
             const std::string& batch_dir, const std::string& labels_path,
             const std::string& dataset_path, const std::string& exclude_batch,
             const std::string& report_in) {
  std::string ext = opt.format == "machine" ? "json" : "md";

  if (app.got_subcommand("diversity")) {
    auto rep = report::run_diversity(load(opt));
    emit(render(rep, opt.format), opt.out_dir, "report." + ext);
    return 0;
  }

  if (app.got_subcommand("realism")) {
    auto* sub = app.get_subcommand("realism");
    auto cfg = load(opt);

    if (sub->got_subcommand("sample")) {
      auto rc = realism_config(cfg);
      if (rc.human_pool.empty() || rc.simulated_pool.empty())
        throw PreconditionError("realism sample needs human_pool and simulated_pool");
      auto human = corpus::load_dataset(rc.human_pool, cfg.skip_invalid);
      auto sim = corpus::load_dataset(rc.simulated_pool, cfg.skip_invalid);
      auto batch = realism::sample_rater_batch(human, sim, rc.n, rc.human_fraction,
                                               rc.seed);
      if (opt.out_dir.empty())
        throw PreconditionError("realism sample needs --out <dir>");
      auto dir = (fs::path(opt.out_dir) / batch.batch_id).string();
      realism::export_rater_batch(batch, dir);
      std::cout << "wrote " << dir << "\n";
      return 0;
    }

    auto report_for = [&](const realism::RealismReport& r) {
      report::EvalReport rep;
      rep.realism.push_back(r);
      rep.config_digest = report::config_digest(cfg);
      emit(render(rep, opt.format), opt.out_dir, "realism." + ext);
    };

    if (sub->got_subcommand("score")) {
      auto batch = realism::load_rater_batch(batch_dir);
      auto labels = realism::load_rater_labels(labels_path, batch.batch_id);
      report_for(realism::realism_human(labels, batch));
      return 0;
    }
    if (sub->got_subcommand("train")) {
      auto rc = realism_config(cfg);
      auto batch = realism::load_rater_batch(batch_dir);
      auto labels = realism::load_rater_labels(labels_path, batch.batch_id);
      auto model = realism::train_discriminator(batch, labels, rc.smoothing);
      if (model_path.empty())
        throw PreconditionError("realism train needs --model <output path>");
      classify::save_model(model, model_path);
      std::cout << "wrote " << model_path << "\n";
      return 0;
    }
    if (sub->got_subcommand("infer")) {
      auto model = classify::load_model(model_path);
      auto ds = corpus::load_dataset(dataset_path, cfg.skip_invalid);
      if (!exclude_batch.empty()) {
        auto batch = realism::load_rater_batch(exclude_batch);
        std::set<std::string> drop;
        for (const auto& item : batch.items) drop.insert(item.conversation_id);
        std::erase_if(ds.conversations, [&drop](const corpus::Conversation& c) {
          return drop.count(c.id) > 0;
        });
      }
      report_for(realism::realism_inferred(model, ds));
      return 0;
    }
    throw PreconditionError("realism needs a subcommand: sample|score|train|infer");
  }

  if (app.got_subcommand("full")) {
    auto cfg = load(opt);
    if (model_path.empty())
      throw PreconditionError(
          "full evaluation needs a trained discriminator (--model); run "
          "`convqual realism sample`, collect rater labels, then "
          "`convqual realism train` first");
    auto rep = report::run_diversity(cfg);
    auto model = classify::load_model(model_path);
    for (const auto& [version, path] : cfg.datasets) {
      auto ds = corpus::load_dataset(path, cfg.skip_invalid);
      rep.realism.push_back(realism::realism_inferred(model, ds));
    }
    emit(render(rep, opt.format), opt.out_dir, "report." + ext);
    return 0;
  }

  if (app.got_subcommand("report")) {
    std::ifstream in(report_in);
    if (!in) throw IoError("cannot open report file: " + report_in);
    std::stringstream ss;
    ss << in.rdbuf();
    auto rep = report::parse_report(ss.str());
    emit(render(rep, opt.format), opt.out_dir, "report." + ext);
    return 0;
  }

  std::cerr << app.help();
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convqual - scores conversational-recommender datasets for "
               "diversity (weighted label entropy) and realism (rater- or "
               "discriminator-based)"};
  app.require_subcommand(0, 1);

  Options opt;
  std::string model_path, batch_dir, labels_path, dataset_path, exclude_batch,
      report_in;
  std::uint64_t seed_value = 0;

  app.add_option("--config", opt.config_path, "evaluation config file");
  app.add_option("--out", opt.out_dir, "output directory for artifacts");
  app.add_option("--format", opt.format, "report format")
      ->check(CLI::IsMember({"md", "machine"}));
  app.add_flag("--skip-invalid", opt.skip_invalid,
               "skip malformed dataset lines with a warning");
  auto* seed_opt =
      app.add_option("--seed", seed_value, "override the configured sampling seed");

  app.add_subcommand("diversity", "per-version entropy report and ranking")
      ->fallthrough();
  auto* realism_cmd =
      app.add_subcommand("realism", "rater-batch and discriminator workflow");
  realism_cmd->fallthrough();
  realism_cmd->require_subcommand(0, 1);
  realism_cmd->add_subcommand("sample", "export a blinded rater batch")->fallthrough();
  auto* score = realism_cmd->add_subcommand("score", "score collected rater labels");
  auto* train = realism_cmd->add_subcommand("train", "train the discriminator");
  auto* infer = realism_cmd->add_subcommand("infer", "run the discriminator");
  for (auto* s : {score, train}) {
    s->fallthrough();
    s->add_option("--batch", batch_dir, "rater batch directory")->required();
    s->add_option("--labels", labels_path, "labels CSV (item_index,judgment)")
        ->required();
  }
  train->add_option("--model", model_path, "model output path")->required();
  infer->fallthrough();
  infer->add_option("--model", model_path, "trained discriminator model")->required();
  infer->add_option("--dataset", dataset_path, "dataset to score")->required();
  infer->add_option("--exclude-batch", exclude_batch,
                    "drop conversations that appear in this rater batch");
  auto* full =
      app.add_subcommand("full", "diversity plus inferred realism per version");
  full->fallthrough();
  full->add_option("--model", model_path, "trained discriminator model");
  auto* report_cmd = app.add_subcommand("report", "re-render a machine report");
  report_cmd->fallthrough();
  report_cmd->add_option("--in", report_in, "machine-readable report file")->required();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) opt.seed = seed_value;

  try {
    return dispatch(app, opt, model_path, batch_dir, labels_path, dataset_path,
                    exclude_batch, report_in);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
