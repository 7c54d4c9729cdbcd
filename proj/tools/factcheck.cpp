// Command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "factcheck/factcheck.hpp"

namespace fc = factcheck;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataParse = 2, kUnreachable = 3 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string scorer;
  std::string endpoint;
};

fc::PipelineConfig load_config(const Globals& g) {
  fc::PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = fc::load_pipeline_config(g.config_path);
  if (g.seed) {
    cfg.verify.seed = *g.seed;
    cfg.train.seed = *g.seed;
  }
  if (g.scorer == "baseline") cfg.scorer = fc::ScorerKind::Baseline;
  if (g.scorer == "remote") cfg.scorer = fc::ScorerKind::Remote;
  if (!g.endpoint.empty()) cfg.endpoint = g.endpoint;
  cfg.validate();
  return cfg;
}

std::shared_ptr<const fc::SentenceIndex> load_index(const fc::PipelineConfig& cfg) {
  if (!cfg.index_path.empty() && std::filesystem::exists(cfg.index_path)) {
    std::ifstream in(cfg.index_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw fc::ParseError(0, "index " + cfg.index_path + ": " + e.what());
    }
    return std::make_shared<fc::SentenceIndex>(fc::SentenceIndex::from_json(j));
  }
  if (cfg.corpus_path.empty()) throw fc::ConfigError("no corpus or index configured");
  return std::make_shared<fc::SentenceIndex>(fc::build_index(fc::load_corpus_jsonl(cfg.corpus_path)));
}

fc::Pipeline make_pipeline(const fc::PipelineConfig& cfg, bool need_index) {
  std::shared_ptr<const fc::EmbeddingProvider> embedder;
  if (cfg.retrieval_mode != fc::RetrievalMode::TfIdfOnly || cfg.uschema) embedder = fc::make_embedder(cfg);
  std::shared_ptr<const fc::USchemaModel> model;
  if (cfg.uschema) {
    if (cfg.uschema->model_path.empty()) throw fc::ConfigError("uschema.model is not set");
    model = std::make_shared<fc::USchemaModel>(fc::load_model(cfg.uschema->model_path, embedder));
  }
  std::shared_ptr<const fc::SentenceIndex> index;
  if (need_index) index = load_index(cfg);
  return fc::Pipeline(cfg, fc::make_scorer(cfg), fc::make_extractor(cfg), model, index,
                      cfg.retrieval_mode == fc::RetrievalMode::TfIdfOnly ? nullptr : embedder);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw fc::ConfigError("bad number in list: '" + item + "'");
    }
  }
  if (out.empty()) throw fc::ConfigError("empty threshold list");
  return out;
}

std::vector<fc::Claim> load_dataset(const fc::PipelineConfig& cfg, const std::string& override_path) {
  const std::string path = override_path.empty() ? cfg.dataset_path : override_path;
  if (path.empty()) throw fc::ConfigError("no dataset configured");
  return fc::load_fever_jsonl(path);
}

fc::EvidenceRegime regime_arg(const std::string& s) {
  auto r = fc::parse_regime(s);
  if (!r) throw fc::ConfigError("unknown regime: " + s);
  return *r;
}

void print_trace_entry(const nlohmann::json& j) {
  std::cout << "claim " << j.value("claim_id", 0) << ": " << j.value("label", "?") << " ("
            << j.value("rule", "?") << ")";
  if (j.contains("gold")) std::cout << "  gold " << j["gold"].get<std::string>();
  std::cout << '\n';
  if (j.contains("error")) std::cout << "  error: " << j["error"].get<std::string>() << '\n';
  for (const auto& e : j.value("evidence", nlohmann::json::array())) {
    std::printf("  evidence %s:%zu  %.4f  %s\n", e["doc_id"].get<std::string>().c_str(),
                e["sentence"].get<std::size_t>(), e["score"].get<double>(), e["text"].get<std::string>().c_str());
  }
  auto tri = [](const nlohmann::json& t) {
    return "<" + t["subject"].get<std::string>() + ", " + t["relation"].get<std::string>() + ", " +
           t["object"].get<std::string>() + ">";
  };
  for (const auto& t : j.value("triples", nlohmann::json::array())) {
    std::cout << "  triple " << tri(t["triple"]) << "  " << t["initial_label"].get<std::string>() << " -> "
              << t["label"].get<std::string>() << '\n';
    for (const auto& v : t["scored"]) {
      std::printf("    %-16s %.4f  %s\n", v["label"].get<std::string>().c_str(), v["probability"].get<double>(),
                  v["evidence"].get<std::string>().c_str());
    }
    for (const auto& f : t["filled"]) std::cout << "    filled " << tri(f) << '\n';
    for (const auto& v : t["filled_scored"]) {
      std::printf("    %-16s %.4f  %s (filled)\n", v["label"].get<std::string>().c_str(),
                  v["probability"].get<double>(), v["evidence"].get<std::string>().c_str());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triple-based zero-shot claim verification"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for sampling, negatives and random evidence");
  app.add_option("--scorer", g.scorer, "Entailment scorer")->check(CLI::IsMember({"baseline", "remote"}));
  app.add_option("--endpoint", g.endpoint, "Sidecar base URL");

  auto* index_cmd = app.add_subcommand("index", "Build the sentence index from the corpus");
  std::string index_out;
  index_cmd->add_option("-o,--out", index_out, "Output index JSON (defaults to config 'index')");

  auto* train_cmd = app.add_subcommand("train-uschema", "Train the universal schema model on a KG TSV");
  std::string kg_path, dev_path, model_out;
  train_cmd->add_option("--kg", kg_path, "Training facts (subject, relation, object TSV)");
  train_cmd->add_option("--dev", dev_path, "Dev facts for early stopping");
  train_cmd->add_option("-o,--out", model_out, "Output model (defaults to config 'uschema.model')");

  auto* verify_cmd = app.add_subcommand("verify", "Verify a single claim");
  std::string claim_text;
  std::vector<std::string> evidence_texts;
  verify_cmd->add_option("claim", claim_text, "Claim text")->required();
  verify_cmd->add_option("-e,--evidence", evidence_texts, "Evidence sentences; retrieval is skipped when given");
  bool verify_json = false;
  verify_cmd->add_flag("--json", verify_json, "Print the trace as JSON");

  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate on a labelled dataset");
  std::string eval_dataset, eval_regime = "retrieved", eval_trace, eval_json;
  std::size_t eval_workers = 1;
  eval_cmd->add_option("--dataset", eval_dataset, "FEVER JSONL (defaults to config 'dataset')");
  eval_cmd->add_option("--regime", eval_regime, "gold+random | gold+retrieved | retrieved");
  eval_cmd->add_option("--workers", eval_workers, "Worker threads");
  eval_cmd->add_option("--trace", eval_trace, "Per-claim trace JSONL");
  eval_cmd->add_option("--report-json", eval_json, "Machine-readable report");

  auto* tune_cmd = app.add_subcommand("tune", "Grid search over the three thresholds");
  std::string tune_dataset, tune_regime = "retrieved", grid_ts = "0.1,0.3,0.5,0.7,0.9",
                            grid_tr = "0.1,0.3,0.5,0.7,0.9", grid_tus = "0.5", surface_csv;
  tune_cmd->add_option("--dataset", tune_dataset, "Dev FEVER JSONL");
  tune_cmd->add_option("--regime", tune_regime, "Evidence regime");
  tune_cmd->add_option("--ts", grid_ts, "Comma-separated Supports thresholds");
  tune_cmd->add_option("--tr", grid_tr, "Comma-separated Refutes thresholds");
  tune_cmd->add_option("--tus", grid_tus, "Comma-separated universal schema thresholds");
  tune_cmd->add_option("--csv", surface_csv, "Accuracy surface CSV");

  auto* trace_cmd = app.add_subcommand("trace", "Pretty-print trace entries");
  std::string trace_file;
  std::optional<std::int64_t> trace_claim;
  trace_cmd->add_option("file", trace_file, "Trace JSONL")->required()->check(CLI::ExistingFile);
  trace_cmd->add_option("--claim-id", trace_claim, "Only this claim");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*trace_cmd) {
      std::ifstream in(trace_file);
      std::string line;
      std::size_t lineno = 0;
      bool found = false;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
          throw fc::ParseError(lineno, e.what());
        }
        if (trace_claim && j.value("claim_id", std::int64_t{-1}) != *trace_claim) continue;
        print_trace_entry(j);
        found = true;
      }
      if (trace_claim && !found) {
        std::cerr << "claim " << *trace_claim << " not in trace\n";
        return kUsage;
      }
      return kOk;
    }

    const fc::PipelineConfig cfg = load_config(g);

    if (*index_cmd) {
      const std::string out = index_out.empty() ? cfg.index_path : index_out;
      if (out.empty()) throw fc::ConfigError("no index output path");
      if (cfg.corpus_path.empty()) throw fc::ConfigError("no corpus configured");
      fc::SentenceIndex index = fc::build_index(fc::load_corpus_jsonl(cfg.corpus_path));
      std::ofstream os(out);
      if (!os) throw fc::ConfigError("cannot write index: " + out);
      os << index.to_json().dump() << '\n';
      std::cout << "indexed " << index.size() << " sentences, " << index.vocabulary_size() << " terms -> "
                << out << '\n';
      return kOk;
    }

    if (*train_cmd) {
      const std::string kg = kg_path.empty() ? cfg.kg_path : kg_path;
      if (kg.empty()) throw fc::ConfigError("no knowledge graph configured");
      std::string out = model_out;
      if (out.empty() && cfg.uschema) out = cfg.uschema->model_path;
      if (out.empty()) throw fc::ConfigError("no model output path");
      const auto facts = fc::load_kg_tsv(kg);
      std::vector<fc::Fact> dev;
      if (!dev_path.empty()) dev = fc::load_kg_tsv(dev_path);
      fc::TrainReport report;
      const auto model = fc::train(facts, dev, cfg.train, fc::make_embedder(cfg), &report);
      fc::save_model(model, out);
      std::cout << "trained on " << facts.size() << " facts: " << report.epochs_run << " epochs, "
                << report.optimizer_steps << " steps, best epoch " << report.best_epoch << '\n';
      for (std::size_t e = 0; e < report.dev_loss.size(); ++e) {
        std::printf("  dev loss after epoch %zu: %.6f\n", e, report.dev_loss[e]);
      }
      std::cout << "model -> " << out << '\n';
      return kOk;
    }

    if (*verify_cmd) {
      const bool retrieve = evidence_texts.empty();
      const fc::Pipeline pipeline = make_pipeline(cfg, retrieve);
      fc::Claim claim{0, claim_text, std::nullopt, {}};
      fc::ClaimResult result;
      if (retrieve) {
        result = pipeline.verify_claim(claim);
      } else {
        fc::EvidenceSet ev;
        for (std::size_t i = 0; i < evidence_texts.size(); ++i) {
          ev.entries.push_back(fc::make_evidence_entry("input", i, evidence_texts[i], 1.0));
        }
        result = pipeline.verify_claim(claim, ev);
      }
      if (verify_json) {
        std::cout << fc::to_json(result).dump(2) << '\n';
      } else {
        print_trace_entry(fc::to_json(result));
      }
      return kOk;
    }

    if (*eval_cmd) {
      const auto dataset = load_dataset(cfg, eval_dataset);
      const fc::Pipeline pipeline = make_pipeline(cfg, true);
      fc::EvalOptions opts;
      opts.regime = regime_arg(eval_regime);
      opts.workers = eval_workers;
      opts.seed = cfg.verify.seed;
      opts.trace_path = eval_trace;
      const auto result = fc::evaluate(dataset, pipeline, opts);
      std::cout << "regime " << fc::to_string(opts.regime) << '\n';
      fc::print_report(std::cout, result.report);
      if (!eval_json.empty()) {
        std::ofstream os(eval_json);
        if (!os) throw fc::ConfigError("cannot write report: " + eval_json);
        nlohmann::json j = fc::to_json(result.report);
        j["regime"] = fc::to_string(opts.regime);
        os << j.dump(2) << '\n';
      }
      return kOk;
    }

    if (*tune_cmd) {
      const auto dataset = load_dataset(cfg, tune_dataset);
      const fc::Pipeline pipeline = make_pipeline(cfg, true);
      fc::EvalOptions opts;
      opts.regime = regime_arg(tune_regime);
      opts.seed = cfg.verify.seed;
      const fc::ThresholdGrid grid{parse_list(grid_ts), parse_list(grid_tr), parse_list(grid_tus)};
      const auto result = fc::grid_search_thresholds(dataset, pipeline, grid, opts);
      if (!surface_csv.empty()) {
        std::ofstream os(surface_csv);
        if (!os) throw fc::ConfigError("cannot write surface: " + surface_csv);
        fc::write_surface_csv(os, result.surface);
      } else {
        fc::write_surface_csv(std::cout, result.surface);
      }
      std::printf("best t_s=%g t_r=%g t_us=%g accuracy=%.4f\n", result.best.t_supports, result.best.t_refutes,
                  result.best.t_uschema, result.best.accuracy);
      return kOk;
    }
  } catch (const fc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kDataParse;
  } catch (const fc::TransportError& e) {
    std::cerr << "scorer unreachable: " << e.what() << '\n';
    return kUnreachable;
  } catch (const fc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
