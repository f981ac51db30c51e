// Copyright 2026 The evrel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Command-line front end: corpus generation, training, evaluation,
// decoding, consistency checking, the ablation ladder, and RED conversion.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evrel/data.hpp"
#include "evrel/errors.hpp"
#include "evrel/harness.hpp"
#include "evrel/model.hpp"

namespace {

using evrel::CorpusRecord;
using evrel::MetricsReport;
using evrel::TrainConfig;
using nlohmann::json;

// Config file first, then individual --set overrides, in order.
TrainConfig resolve_config(const std::string& config_file,
                           const std::vector<std::string>& overrides) {
  TrainConfig config;
  if (!config_file.empty()) {
    config = evrel::load_config_file(config_file, config);
  }
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv +
                                  "'");
    }
    evrel::set_config_field(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

std::vector<CorpusRecord> select_split(std::vector<CorpusRecord> records,
                                       const std::string& split) {
  if (split == "all") return records;
  std::vector<CorpusRecord> out;
  for (CorpusRecord& r : records) {
    if (r.split == split) out.push_back(std::move(r));
  }
  return out;
}

json metrics_to_json(const MetricsReport& m) {
  json j;
  j["temporal"] = {{"precision", m.temporal.precision},
                   {"recall", m.temporal.recall},
                   {"f1", m.temporal.f1}};
  j["subevent"] = {{"f1_pc", m.subevent.f1_pc},
                   {"f1_cp", m.subevent.f1_cp},
                   {"f1_micro", m.subevent.f1_micro}};
  j["violation_rate"] = m.violation_rate;
  return j;
}

void print_metrics_row(const std::string& name, const MetricsReport& m) {
  std::printf("%-26s  P %.4f  R %.4f  F1 %.4f | PC %.4f  CP %.4f  "
              "micro %.4f | viol %.4f\n",
              name.c_str(), m.temporal.precision, m.temporal.recall,
              m.temporal.f1, m.subevent.f1_pc, m.subevent.f1_cp,
              m.subevent.f1_micro, m.violation_rate);
}

void write_report(const std::string& path, const json& body) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file " + path);
  out << body.dump(2) << '\n';
}

int cmd_generate(const evrel::SyntheticSpec& spec, const std::string& out,
                 const std::vector<double>& splits,
                 std::uint64_t split_seed) {
  auto records = evrel::generate_corpus(spec);
  if (!splits.empty()) {
    records = evrel::split_corpus(std::move(records), splits, split_seed);
  }
  evrel::save_corpus(records, out);
  std::printf("wrote %zu records to %s\n", records.size(), out.c_str());
  return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& model_out,
              const TrainConfig& config, const std::string& report_path) {
  const auto corpus = evrel::load_corpus(corpus_path);
  const auto [params, log] = evrel::train(config, corpus);
  evrel::save_checkpoint(params, model_out);

  for (std::size_t e = 0; e < log.epochs.size(); ++e) {
    const evrel::LossBreakdown& b = log.epochs[e];
    std::printf("epoch %3zu  total %.4f  l_a %.4f  l_s %.4f  l_c %.4f",
                e, b.total, b.l_a, b.l_s, b.l_c);
    if (e < log.dev_f1.size()) std::printf("  dev-F1 %.4f", log.dev_f1[e]);
    std::printf("\n");
  }
  std::printf("kept epoch %d, checkpoint %s\n", log.best_epoch,
              model_out.c_str());

  json report;
  report["command"] = "train";
  report["best_epoch"] = log.best_epoch;
  report["dev_f1"] = log.dev_f1;
  json epochs = json::array();
  for (const evrel::LossBreakdown& b : log.epochs) {
    epochs.push_back({{"total", b.total},
                      {"l_a", b.l_a},
                      {"l_s", b.l_s},
                      {"l_c", b.l_c}});
  }
  report["epochs"] = std::move(epochs);
  write_report(report_path, report);
  return 0;
}

int cmd_eval(const std::string& corpus_path, const std::string& model_path,
             const TrainConfig& config, const std::string& split,
             const std::string& report_path) {
  const auto records =
      select_split(evrel::load_corpus(corpus_path), split);
  if (records.empty()) {
    std::fprintf(stderr, "no records in split '%s'\n", split.c_str());
    return 1;
  }
  const evrel::EncoderParams params = evrel::load_checkpoint(model_path);
  const MetricsReport metrics =
      evrel::evaluate_model(params, records, config.flags, config.decode);
  print_metrics_row(split, metrics);

  json report;
  report["command"] = "eval";
  report["split"] = split;
  report["metrics"] = metrics_to_json(metrics);
  write_report(report_path, report);

  if (config.flags.global_inference && metrics.violation_rate != 0.0) {
    std::fprintf(stderr, "invariant failure: global decode left "
                         "violations\n");
    return 2;
  }
  return 0;
}

int cmd_decode(const std::string& corpus_path, const std::string& model_path,
               const std::string& out, const TrainConfig& config,
               const std::string& split) {
  auto records = select_split(evrel::load_corpus(corpus_path), split);
  const evrel::EncoderParams params = evrel::load_checkpoint(model_path);
  std::vector<evrel::RelationGraph> decoded;
  decoded.reserve(records.size());
  for (CorpusRecord& r : records) {
    r.gold = evrel::decode_record(params, r.doc, config.flags, config.decode);
    decoded.push_back(r.gold);
  }
  evrel::save_corpus(records, out);
  std::printf("decoded %zu records to %s, violation rate %.4f\n",
              records.size(), out.c_str(),
              evrel::violation_rate(decoded));
  return 0;
}

int cmd_check(const std::string& corpus_path) {
  try {
    const auto records = evrel::load_corpus(corpus_path);
    std::vector<evrel::RelationGraph> golds;
    golds.reserve(records.size());
    for (const CorpusRecord& r : records) golds.push_back(r.gold);
    std::printf("%zu records pass closure, gold violation rate %.4f\n",
                records.size(), evrel::violation_rate(golds));
    return 0;
  } catch (const evrel::ParseError& e) {
    std::fprintf(stderr, "parse failure at line %d: %s\n", e.line(),
                 e.what());
  } catch (const evrel::ConflictError& e) {
    std::fprintf(stderr, "closure conflict between events %d and %d: %s\n",
                 e.e1(), e.e3(), e.what());
  }
  return 1;
}

int cmd_ablate(const std::string& corpus_path, const TrainConfig& config,
               const std::string& report_path) {
  const auto corpus = evrel::load_corpus(corpus_path);
  const auto rows = evrel::run_ablation(config, corpus);
  for (const evrel::AblationRow& row : rows) {
    print_metrics_row(row.name, row.metrics);
  }

  json report;
  report["command"] = "ablate";
  json out_rows = json::array();
  for (const evrel::AblationRow& row : rows) {
    json r = metrics_to_json(row.metrics);
    r["name"] = row.name;
    out_rows.push_back(std::move(r));
  }
  report["rows"] = std::move(out_rows);
  write_report(report_path, report);
  return 0;
}

int cmd_convert_red(const std::string& tsv, const std::string& out) {
  const auto records = evrel::convert_red(tsv);
  evrel::save_corpus(records, out);
  std::printf("converted %zu documents to %s\n", records.size(),
              out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint learning and decoding of event-event relations"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "sample a synthetic corpus");
  evrel::SyntheticSpec spec;
  std::string gen_out;
  std::vector<double> gen_splits = {0.6, 0.2, 0.2};
  std::uint64_t split_seed = 1;
  generate->add_option("--out", gen_out, "corpus file to write")->required();
  generate->add_option("--seed", spec.seed, "generator seed");
  generate->add_option("--docs", spec.docs, "number of documents");
  generate->add_option("--min-events", spec.min_events, "events per doc, low");
  generate->add_option("--max-events", spec.max_events, "events per doc, high");
  generate->add_option("--min-branching", spec.min_branching,
                       "children per node, low");
  generate->add_option("--max-branching", spec.max_branching,
                       "children per node, high");
  generate->add_option("--coref", spec.coref_fraction, "coref merge chance");
  generate->add_option("--noise", spec.noise_fraction,
                       "vague/norel degradation chance");
  generate->add_option("--single-task", spec.single_task_fraction,
                       "fraction of documents annotated for one task only");
  generate->add_option("--annotated", spec.annotated_fraction,
                       "chance a pair keeps its gold labels");
  generate->add_option("--vocab", spec.vocab, "vocabulary size");
  generate->add_option("--grammar", spec.grammar, "clause template family");
  generate->add_option("--splits", gen_splits, "split fractions")
      ->delimiter(',');
  generate->add_option("--split-seed", split_seed, "split shuffle seed");

  // shared training/eval options
  std::string corpus_path, model_path, report_path, config_file;
  std::vector<std::string> overrides;
  auto add_config_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key=value config file");
    cmd->add_option("--set", overrides, "config override key=value")
        ->take_all();
  };

  auto* train = app.add_subcommand("train", "fit a model on the train split");
  std::string model_out;
  train->add_option("--corpus", corpus_path, "corpus file")->required();
  train->add_option("--out", model_out, "checkpoint to write")->required();
  train->add_option("--report", report_path, "machine-readable report");
  add_config_options(train);

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a split");
  std::string eval_split = "test";
  eval->add_option("--corpus", corpus_path, "corpus file")->required();
  eval->add_option("--model", model_path, "checkpoint to read")->required();
  eval->add_option("--split", eval_split, "train, dev, test or all");
  eval->add_option("--report", report_path, "machine-readable report");
  add_config_options(eval);

  auto* decode = app.add_subcommand("decode", "write decoded graphs");
  std::string decode_out;
  std::string decode_split = "all";
  decode->add_option("--corpus", corpus_path, "corpus file")->required();
  decode->add_option("--model", model_path, "checkpoint to read")->required();
  decode->add_option("--out", decode_out, "decoded corpus file")->required();
  decode->add_option("--split", decode_split, "train, dev, test or all");
  add_config_options(decode);

  auto* check = app.add_subcommand("check", "validate corpus consistency");
  check->add_option("--corpus", corpus_path, "corpus file")->required();

  auto* ablate = app.add_subcommand("ablate", "run the ablation ladder");
  ablate->add_option("--corpus", corpus_path, "corpus file")->required();
  ablate->add_option("--report", report_path, "machine-readable report");
  add_config_options(ablate);

  auto* convert = app.add_subcommand("convert-red",
                                     "convert a RED relation export");
  std::string tsv_path, convert_out;
  convert->add_option("--tsv", tsv_path, "tab-separated relations")
      ->required();
  convert->add_option("--out", convert_out, "corpus file to write")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(spec, gen_out, gen_splits, split_seed);
    }
    const TrainConfig config = resolve_config(config_file, overrides);
    if (train->parsed()) {
      return cmd_train(corpus_path, model_out, config, report_path);
    }
    if (eval->parsed()) {
      return cmd_eval(corpus_path, model_path, config, eval_split,
                      report_path);
    }
    if (decode->parsed()) {
      return cmd_decode(corpus_path, model_path, decode_out, config,
                        decode_split);
    }
    if (check->parsed()) {
      return cmd_check(corpus_path);
    }
    if (ablate->parsed()) {
      return cmd_ablate(corpus_path, config, report_path);
    }
    if (convert->parsed()) {
      return cmd_convert_red(tsv_path, convert_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
