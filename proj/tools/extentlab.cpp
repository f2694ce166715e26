// extentlab command line: corpus preparation, training, extents, reports and
// the annotation server. Exit codes: 0 success, 1 computation error,
// 2 usage or input error. Errors go to stderr as {"error":{"code","message"}}.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <set>
#include <sstream>

#include "extentlab/annotation.hpp"
#include "extentlab/annotation_server.hpp"
#include "extentlab/classifier.hpp"
#include "extentlab/corpus.hpp"
#include "extentlab/errors.hpp"
#include "extentlab/extents.hpp"
#include "extentlab/metrics.hpp"
#include "extentlab/models.hpp"
#include "extentlab/report.hpp"
#include "extentlab/syntax.hpp"
#include "extentlab/synthetic.hpp"

namespace fs = std::filesystem;
using namespace extentlab;

namespace {

constexpr int kExitComputation = 1;
constexpr int kExitInput = 2;

// Relative paths resolve against EXTENTLAB_DATA_DIR when it is set.
fs::path resolve(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* root = std::getenv("EXTENTLAB_DATA_DIR"); root && *root) {
      return fs::path(root) / p;
    }
  }
  return p;
}

fs::path input_path(const std::string& path, const std::string& what) {
  const fs::path p = resolve(path);
  if (!fs::exists(p)) throw NotFoundError(what + " not found: " + p.string());
  return p;
}

fs::path output_path(const std::string& path) {
  const fs::path p = resolve(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

Json meta(const std::string& command, std::uint64_t seed) {
  return {{"command", command}, {"seed", seed}, {"generated_at", utc_now()}};
}

bool is_input_error(const std::string& code) {
  static const std::set<std::string> kInput = {
      "ingest_error", "alignment_error", "consistency_error", "canonicalization_error",
      "split_error", "schema_version_error", "validation_error", "not_found",
      "invalid_argument", "parse_error", "io_error", "conflict_error"};
  return kInput.contains(code);
}

int fail(const std::string& code, const std::string& message, int exit_code) {
  std::cerr << Json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
  return exit_code;
}

void print_summary(const Json& summary) { std::cout << summary.dump() << std::endl; }

struct CorpusInput {
  std::vector<RelationSample> samples;
  int skipped_cross_sentence = 0;
  int rejected_overlapping = 0;
};

CorpusInput load_samples(const std::string& corpus, const std::string& split,
                         const std::string& partition) {
  const LoadResult loaded = load_corpus(input_path(corpus, "corpus"));
  CorpusSamples all = samples_from_corpus(loaded.documents);
  CorpusInput out{std::move(all.samples), all.skipped_cross_sentence,
                  all.rejected_overlapping};
  if (!split.empty()) {
    const SplitAssignment splits = load_split(input_path(split, "split"));
    out.samples = select_split(out.samples, splits, split_from_string(partition));
  }
  return out;
}

SplitRatio parse_ratio(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("bad ratio '" + text + "'");
    }
  }
  if (parts.size() != 3) throw InvalidArgument("ratio needs three values: train,dev,test");
  return {parts[0], parts[1], parts[2]};
}

LabelSet labels_of_predictions(const std::vector<PredictionRecord>& predictions) {
  std::set<std::string> labels;
  for (const auto& p : predictions) {
    labels.insert(p.gold);
    labels.insert(p.predicted);
  }
  return LabelSet(std::vector<std::string>(labels.begin(), labels.end()));
}

AnnotationServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic extents workbench"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string corpus, split, partition = "test", model, out, format = "structured";
  std::string input, base, ratio = "0.8,0.1,0.1", impl = "attention-pool", config;
  std::string mode = "expanding", extents_a, extents_b, extents, predictions, groups;
  std::string store, listen = "127.0.0.1:8080", kind = "confidence", sessions;
  std::string synth_kind = "argument", adversarial_out, id_prefix = "syn";
  std::uint64_t seed = 13;
  double theta = 0.5, holdout = 0.0;
  int beam_width = 3, epochs = -1, count = 400, group_count = 0, variants = 3;

  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "structured | tabular")
        ->check(CLI::IsMember({"structured", "json", "tabular", "tsv", "csv"}));
  };
  auto add_split = [&](CLI::App* cmd) {
    cmd->add_option("--split", split, "Split file");
    cmd->add_option("--partition", partition, "train | dev | test")
        ->check(CLI::IsMember({"train", "dev", "test"}));
  };

  auto* ingest = app.add_subcommand("ingest", "Standoff records to a corpus file");
  ingest->add_option("--input", input, "Standoff JSON Lines")->required();
  ingest->add_option("--out", out, "Corpus file")->required();

  auto* split_cmd = app.add_subcommand("split", "Assign samples to train/dev/test");
  split_cmd->add_option("--corpus", corpus)->required();
  split_cmd->add_option("--base", base, "Existing split to keep");
  split_cmd->add_option("--ratio", ratio, "train,dev,test");
  split_cmd->add_option("--seed", seed);
  split_cmd->add_option("--out", out)->required();

  auto* stats = app.add_subcommand("stats", "Label and syntactic class histograms");
  stats->add_option("--corpus", corpus)->required();
  add_split(stats);
  add_format(stats);
  stats->add_option("--out", out)->required();

  auto* train = app.add_subcommand("train", "Train a classifier");
  train->add_option("--corpus", corpus)->required();
  train->add_option("--split", split)->required();
  train->add_option("--impl", impl)->check(CLI::IsMember({"attention-pool", "bag-of-words"}));
  train->add_option("--config", config, "Training config JSON");
  train->add_option("--epochs", epochs);
  train->add_option("--seed", seed);
  train->add_option("--out", out, "Model directory")->required();

  auto* eval = app.add_subcommand("eval", "F1 report and prediction file");
  eval->add_option("--model", model)->required();
  eval->add_option("--corpus", corpus)->required();
  add_split(eval);
  add_format(eval);
  eval->add_option("--predictions", predictions, "Prediction file to write");
  eval->add_option("--seed", seed);
  eval->add_option("--out", out)->required();

  auto* extents_cmd = app.add_subcommand("extents", "Semantic extents for a model");
  extents_cmd->add_option("--model", model)->required();
  extents_cmd->add_option("--corpus", corpus)->required();
  add_split(extents_cmd);
  extents_cmd->add_option("--mode", mode)->check(CLI::IsMember({"expanding", "reductive"}));
  extents_cmd->add_option("--theta", theta);
  extents_cmd->add_option("--beam-width", beam_width);
  extents_cmd->add_option("--seed", seed);
  extents_cmd->add_option("--out", out)->required();

  auto* agree = app.add_subcommand("agree", "Agreement between two extent files");
  agree->add_option("--a", extents_a)->required();
  agree->add_option("--b", extents_b)->required();
  add_format(agree);
  agree->add_option("--out", out)->required();

  auto* breakdown = app.add_subcommand("breakdown", "Confidence breakdown or class histograms");
  breakdown->add_option("--kind", kind)->check(CLI::IsMember({"confidence", "histogram"}));
  breakdown->add_option("--extents", extents)->required();
  breakdown->add_option("--predictions", predictions, "Needed for --kind confidence");
  breakdown->add_option("--corpus", corpus, "Needed for --kind histogram");
  add_format(breakdown);
  breakdown->add_option("--out", out)->required();

  auto* adversarial = app.add_subcommand("adversarial", "Adversarial group accuracy");
  adversarial->add_option("--model", model)->required();
  adversarial->add_option("--groups", groups)->required();
  add_format(adversarial);
  adversarial->add_option("--out", out)->required();

  auto* serve = app.add_subcommand("serve", "Run the annotation server");
  serve->add_option("--corpus", corpus)->required();
  add_split(serve);
  serve->add_option("--model", model, "Decider for label preselection")->required();
  serve->add_option("--store", store, "Annotation store")->required();
  serve->add_option("--sessions", sessions, "Session file (default: <store>.sessions)");
  serve->add_option("--listen", listen, "host:port");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  synth->add_option("--kind", synth_kind)->check(CLI::IsMember({"argument", "context"}));
  synth->add_option("--count", count);
  synth->add_option("--holdout", holdout);
  synth->add_option("--prefix", id_prefix);
  synth->add_option("--seed", seed);
  synth->add_option("--adversarial", adversarial_out, "Also write verb-swap groups here");
  synth->add_option("--groups", group_count);
  synth->add_option("--variants", variants);
  synth->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage_error", e.what(), kExitInput);
  }

  try {
    if (*ingest) {
      std::vector<Document> documents;
      int dropped = 0, samples = 0, skipped = 0;
      for_each_jsonl(input_path(input, "input"), [&](std::size_t line, const Json& raw) {
        try {
          IngestResult result = ingest_document(raw);
          dropped += result.dropped_mentions;
          const BuildResult built = build_samples(result.document);
          samples += static_cast<int>(built.samples.size());
          skipped += built.skipped_cross_sentence;
          documents.push_back(std::move(result.document));
        } catch (const Error& e) {
          throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
        }
      });
      save_corpus(output_path(out), documents);
      print_summary({{"documents", documents.size()},
                     {"samples", samples},
                     {"dropped_mentions", dropped},
                     {"skipped_cross_sentence", skipped}});
    } else if (*split_cmd) {
      const CorpusInput data = load_samples(corpus, "", partition);
      std::optional<SplitAssignment> base_split;
      if (!base.empty()) base_split = load_split(input_path(base, "base split"));
      const SplitAssignment splits =
          split_dataset(data.samples, base_split, parse_ratio(ratio), seed);
      save_split(output_path(out), splits);
      std::map<std::string, int> counts{{"train", 0}, {"dev", 0}, {"test", 0}};
      for (const auto& [id, assigned] : splits) ++counts[std::string(to_string(assigned))];
      print_summary({{"seed", seed}, {"counts", counts}});
    } else if (*stats) {
      const CorpusInput data = load_samples(corpus, split, partition);
      emit_report(corpus_stats(data.samples), report_format_from_string(format),
                  output_path(out), meta("stats", seed));
    } else if (*train) {
      const CorpusInput data = load_samples(corpus, "", partition);
      const SplitAssignment splits = load_split(input_path(split, "split"));
      const auto train_samples = select_split(data.samples, splits, Split::kTrain);
      const auto dev_samples = select_split(data.samples, splits, Split::kDev);
      TrainConfig cfg;
      if (!config.empty()) {
        cfg = TrainConfig::from_json(Json::parse(read_file(input_path(config, "config"))));
      }
      if (train->count("--seed") > 0 || config.empty()) cfg.seed = seed;
      if (epochs > 0) cfg.epochs = epochs;
      const LabelSet labels = label_set_of(data.samples);
      std::unique_ptr<TrainableClassifier> classifier;
      if (impl == "bag-of-words") {
        classifier = std::make_unique<BagOfWordsClassifier>(labels);
      } else {
        classifier = std::make_unique<AttentionClassifier>(labels);
      }
      const TrainingReport report = fit(*classifier, train_samples, dev_samples, cfg);
      const fs::path dir = output_path(out);
      save_classifier(dir, *classifier);
      Json training = report.to_json();
      training["config"] = cfg.to_json();
      write_file_atomic(dir / "training.json", training.dump(2) + "\n");
      print_summary({{"best_epoch", report.best_epoch},
                     {"best_dev_micro_f1", report.best_dev_micro_f1},
                     {"epochs", report.epochs.size()}});
    } else if (*eval) {
      const auto classifier = load_classifier(input_path(model, "model"));
      const CorpusInput data = load_samples(corpus, split, partition);
      std::vector<std::string> gold, predicted;
      std::vector<PredictionRecord> records;
      for (const auto& sample : data.samples) {
        const PredictionResult result = predict_full(*classifier, sample);
        const std::string label = classifier->label_set()[result.predicted];
        gold.push_back(sample.label);
        predicted.push_back(label);
        records.push_back({sample.sample_id, sample.label, label, result.confidence,
                           sample.size()});
      }
      std::set<std::string> all(classifier->label_set().labels().begin(),
                                classifier->label_set().labels().end());
      all.insert(gold.begin(), gold.end());
      const LabelSet labels(std::vector<std::string>(all.begin(), all.end()));
      const EvalReport report = f1_scores(gold, predicted, labels);
      emit_report(report, report_format_from_string(format), output_path(out),
                  meta("eval", seed));
      if (!predictions.empty()) save_predictions(output_path(predictions), records);
      print_summary({{"micro_f1", report.micro_f1},
                     {"macro_f1", report.macro_f1},
                     {"count", report.count}});
    } else if (*extents_cmd) {
      const auto classifier = load_classifier(input_path(model, "model"));
      const CorpusInput data = load_samples(corpus, split, partition);
      ExtentConfig cfg;
      cfg.theta = theta;
      cfg.beam_width = beam_width;
      cfg.validate();
      const auto outcomes = extent_batch(*classifier, data.samples, {}, cfg,
                                         extent_mode_from_string(mode), classifier->impl_id());
      std::vector<SemanticExtent> found;
      Json errors = Json::array();
      for (const auto& outcome : outcomes) {
        if (outcome.extent) {
          found.push_back(*outcome.extent);
        } else {
          errors.push_back({{"sample_id", outcome.sample_id},
                            {"code", outcome.error_code},
                            {"message", outcome.error}});
        }
      }
      save_extents(output_path(out), found);
      print_summary({{"extents", found.size()}, {"errors", errors}});
    } else if (*agree) {
      const auto a = load_extents(input_path(extents_a, "extent file"));
      const auto b = load_extents(input_path(extents_b, "extent file"));
      emit_report(agreement_report(a, b), report_format_from_string(format),
                  output_path(out), meta("agree", seed));
    } else if (*breakdown) {
      const auto found = load_extents(input_path(extents, "extent file"));
      if (kind == "confidence") {
        if (predictions.empty()) throw InvalidArgument("--predictions is required");
        const auto records = load_predictions(input_path(predictions, "prediction file"));
        emit_report(confidence_breakdown(found, records, labels_of_predictions(records)),
                    report_format_from_string(format), output_path(out),
                    meta("breakdown", seed));
      } else {
        if (corpus.empty()) throw InvalidArgument("--corpus is required");
        const CorpusInput data = load_samples(corpus, "", partition);
        const HistogramTable histograms = class_histograms(found, data.samples);
        emit_report(histograms, report_format_from_string(format), output_path(out),
                    meta("breakdown", seed));
        // Plot-ready companion file.
        write_file_atomic(output_path(out + ".csv"), to_table(histograms).to_delimited(','));
      }
    } else if (*adversarial) {
      const auto classifier = load_classifier(input_path(model, "model"));
      const AdversarialLoad loaded = load_adversarial(input_path(groups, "group file"));
      AdversarialReport report = adversarial_eval(*classifier, loaded.groups);
      report.rejected.insert(report.rejected.begin(), loaded.rejected.begin(),
                             loaded.rejected.end());
      emit_report(report, report_format_from_string(format), output_path(out),
                  meta("adversarial", seed));
      print_summary({{"groups", report.groups.size()},
                     {"rejected", report.rejected.size()},
                     {"accuracy", {{"mean", report.accuracy.mean}, {"std", report.accuracy.std}}}});
    } else if (*serve) {
      const auto classifier = load_classifier(input_path(model, "model"));
      const CorpusInput data = load_samples(corpus, split, partition);
      AnnotationStore annotation_store(output_path(store));
      const fs::path session_file =
          sessions.empty() ? fs::path(annotation_store.path().string() + ".sessions")
                           : output_path(sessions);
      AnnotationService service(data.samples, *classifier, annotation_store, session_file);
      AnnotationServer server(service);
      const auto [host, port] = parse_listen_address(listen);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      print_summary({{"listening", host + ":" + std::to_string(bound)},
                     {"samples", data.samples.size()}});
      server.serve();
      g_server = nullptr;
    } else if (*synth) {
      SyntheticOptions options;
      options.kind = synthetic_kind_from_string(synth_kind);
      options.count = count;
      options.seed = seed;
      options.holdout_fraction = holdout;
      options.id_prefix = id_prefix;
      const auto documents = synthetic_corpus(options);
      save_corpus(output_path(out), documents);
      Json summary = {{"documents", documents.size()}, {"seed", seed}};
      if (!adversarial_out.empty()) {
        const CorpusSamples samples = samples_from_corpus(documents);
        const auto made = verb_swap_groups(samples.samples, group_count > 0 ? group_count : count,
                                           variants, seed);
        std::vector<Json> lines;
        for (const auto& group : made) {
          lines.push_back(adversarial_record(group.original, group.group_id, true));
          for (const auto& variant : group.variants) {
            lines.push_back(adversarial_record(variant, group.group_id, false));
          }
        }
        write_file_atomic(output_path(adversarial_out), to_jsonl(lines));
        summary["groups"] = made.size();
      }
      print_summary(summary);
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what(), is_input_error(e.code()) ? kExitInput : kExitComputation);
  } catch (const nlohmann::json::exception& e) {
    return fail("parse_error", e.what(), kExitInput);
  } catch (const fs::filesystem_error& e) {
    return fail("io_error", e.what(), kExitInput);
  } catch (const std::exception& e) {
    return fail("internal_error", e.what(), kExitComputation);
  }
  return 0;
}
