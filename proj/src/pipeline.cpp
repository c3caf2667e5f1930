#include "roweisposes/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace roweisposes {

namespace {

using nlohmann::json;

constexpr int kReportSchemaVersion = 1;

// Stable, platform-independent hash used to derive per-action training seeds.
std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LabeledMatrix annotated_frames(const std::vector<Sequence>& sequences) {
  std::vector<Vector> columns;
  std::vector<std::string> labels;
  for (const auto& seq : sequences) {
    if (!seq.has_annotations()) continue;
    for (size_t i = 0; i < seq.frames.size(); ++i) {
      if (seq.pose_annotations[i].empty()) continue;
      columns.push_back(vectorize(seq.frames[i]));
      labels.push_back(seq.pose_annotations[i]);
    }
  }
  if (columns.empty()) {
    throw ProtocolError(
        "training data carries no pose annotations; cannot fit the pose "
        "subspace");
  }
  LabeledMatrix data;
  data.X = Matrix(columns.front().size(), columns.size());
  for (size_t i = 0; i < columns.size(); ++i) data.X.col(i) = columns[i];
  data.labels = std::move(labels);
  return data;
}

std::vector<std::string> windowed_symbols(const TrainedModels& models,
                                          const Sequence& seq,
                                          const RunConfig& config) {
  const auto decisions = recognize_sequence(models.rda, seq);
  const auto filtered = window_filter(decisions, config.windowing.config(),
                                      models.class_thresholds);
  std::vector<std::string> symbols;
  symbols.reserve(filtered.size());
  for (const auto& d : filtered) symbols.push_back(d.pose);
  return symbols;
}

EvalReport evaluate_preprocessed(const std::vector<Sequence>& preprocessed,
                                 const DatasetManifest& manifest,
                                 const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();

  std::map<std::string, int> action_index;
  for (size_t i = 0; i < manifest.action_labels.size(); ++i) {
    action_index[manifest.action_labels[i]] = static_cast<int>(i);
  }
  const int n_actions = static_cast<int>(manifest.action_labels.size());

  EvalReport report;
  report.actions = manifest.action_labels;
  report.confusion.assign(n_actions, std::vector<long>(n_actions, 0));
  report.rejected.assign(n_actions, 0);

  long total = 0;
  long correct = 0;
  for (const Fold& fold : lopo_folds(preprocessed)) {
    if (fold.test.empty()) {
      throw ProtocolError("fold for subject '" + fold.held_out_subject +
                          "' has an empty test set");
    }
    const TrainedModels models =
        train_models_preprocessed(fold.train, manifest, config);
    FoldResult fr;
    fr.subject = fold.held_out_subject;
    for (const Sequence& seq : fold.test) {
      const auto it = action_index.find(seq.action_label);
      if (it == action_index.end()) {
        throw SchemaError("test sequence action '" + seq.action_label +
                          "' is not in the manifest action_labels");
      }
      const int true_idx = it->second;
      const auto predicted = classify_sequence(models, seq, config);
      ++fr.n_test;
      ++total;
      if (!predicted.has_value()) {
        // Rejections count against accuracy.
        ++report.rejected[true_idx];
      } else {
        ++report.confusion[true_idx][action_index.at(*predicted)];
        if (*predicted == seq.action_label) {
          ++fr.n_correct;
          ++correct;
        }
      }
    }
    fr.accuracy = static_cast<double>(fr.n_correct) / fr.n_test;
    report.folds.push_back(fr);
  }

  report.mean_accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
  double fold_sum = 0.0;
  for (const auto& f : report.folds) fold_sum += f.accuracy;
  report.fold_mean_accuracy =
      report.folds.empty() ? 0.0 : fold_sum / report.folds.size();
  report.config_echo = config.to_json();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

}  // namespace

WindowingConfig WindowingSettings::config() const {
  WindowingConfig cfg;
  cfg.window_size = window_size;
  cfg.distance_threshold = distance_threshold;
  cfg.min_keep_per_window = min_keep_per_window;
  return cfg;
}

void RunConfig::validate() const {
  factors.validate();
  if (dims < 0) throw ConfigError("dims must be nonnegative");
  windowing.config().validate();
  if (!(windowing.quantile > 0.0 && windowing.quantile <= 1.0)) {
    throw ConfigError("windowing quantile must lie in (0, 1]");
  }
  if (hmm.n_states < 1) throw ConfigError("hmm states must be >= 1");
  if (!(hmm.tol > 0.0)) throw ConfigError("hmm tol must be positive");
  if (hmm.max_iter < 1) throw ConfigError("hmm max_iter must be >= 1");
  if (kernel == KernelKind::Rbf && !(rbf_gamma > 0.0)) {
    throw ConfigError("rbf kernel requires positive gamma");
  }
}

json RunConfig::to_json() const {
  json j;
  j["manifest"] = manifest_path;
  j["r1"] = factors.r1;
  j["r2"] = factors.r2;
  j["dims"] = dims;
  j["kernel"] = to_string(kernel);
  j["rbf_gamma"] = rbf_gamma;
  j["eps"] = eps;
  j["windowing"] = {{"window_size", windowing.window_size},
                    {"distance_threshold", windowing.distance_threshold},
                    {"min_keep_per_window", windowing.min_keep_per_window},
                    {"quantile_calibration", windowing.quantile_calibration},
                    {"quantile", windowing.quantile}};
  j["hmm"] = {{"states", hmm.n_states},
              {"tol", hmm.tol},
              {"max_iter", hmm.max_iter},
              {"seed", hmm.seed},
              {"criterion", to_string(hmm.criterion)}};
  j["out"] = out_dir;
  return j;
}

void RunConfig::merge_json(const json& j) {
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "manifest") {
        manifest_path = value.get<std::string>();
      } else if (key == "r1") {
        factors.r1 = value.get<double>();
      } else if (key == "r2") {
        factors.r2 = value.get<double>();
      } else if (key == "dims") {
        dims = value.get<int>();
      } else if (key == "kernel") {
        kernel = kernel_from_string(value.get<std::string>());
      } else if (key == "rbf_gamma") {
        rbf_gamma = value.get<double>();
      } else if (key == "eps") {
        eps = value.get<double>();
      } else if (key == "windowing") {
        for (const auto& [wkey, wvalue] : value.items()) {
          if (wkey == "window_size") {
            windowing.window_size = wvalue.get<int>();
          } else if (wkey == "distance_threshold") {
            windowing.distance_threshold = wvalue.get<double>();
          } else if (wkey == "min_keep_per_window") {
            windowing.min_keep_per_window = wvalue.get<int>();
          } else if (wkey == "quantile_calibration") {
            windowing.quantile_calibration = wvalue.get<bool>();
          } else if (wkey == "quantile") {
            windowing.quantile = wvalue.get<double>();
          } else {
            throw ConfigError("unknown windowing config field '" + wkey + "'");
          }
        }
      } else if (key == "hmm") {
        for (const auto& [hkey, hvalue] : value.items()) {
          if (hkey == "states") {
            hmm.n_states = hvalue.get<int>();
          } else if (hkey == "tol") {
            hmm.tol = hvalue.get<double>();
          } else if (hkey == "max_iter") {
            hmm.max_iter = hvalue.get<int>();
          } else if (hkey == "seed") {
            hmm.seed = hvalue.get<std::uint64_t>();
          } else if (hkey == "criterion") {
            hmm.criterion = criterion_from_string(hvalue.get<std::string>());
          } else {
            throw ConfigError("unknown hmm config field '" + hkey + "'");
          }
        }
      } else if (key == "out") {
        out_dir = value.get<std::string>();
      } else if (key == "schema_version") {
        // accepted and ignored; the config document is versioned too
      } else {
        throw ConfigError("unknown config field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  RunConfig config;
  config.merge_json(j);
  return config;
}

TrainedModels train_models_preprocessed(const std::vector<Sequence>& train,
                                        const DatasetManifest& manifest,
                                        const RunConfig& config) {
  config.validate();
  const LabeledMatrix data = annotated_frames(train);
  const int d = static_cast<int>(data.X.rows());
  const int c = static_cast<int>(sorted_unique_labels(data.labels).size());
  const int p = config.dims > 0 ? config.dims : default_subspace_dim(c, d);

  TrainedModels models;
  models.rda = fit(data, config.factors, p, config.kernel, config.eps,
                   config.rbf_gamma, manifest.preprocess_config().fingerprint());

  // Recognition distances over all training frames drive both the optional
  // threshold calibration and the HMM training corpus.
  std::vector<std::vector<PoseDecision>> per_sequence;
  per_sequence.reserve(train.size());
  std::vector<PoseDecision> pooled;
  for (const auto& seq : train) {
    per_sequence.push_back(recognize_sequence(models.rda, seq));
    pooled.insert(pooled.end(), per_sequence.back().begin(),
                  per_sequence.back().end());
  }
  if (config.windowing.quantile_calibration) {
    models.class_thresholds =
        per_class_distance_quantile(pooled, config.windowing.quantile);
  }

  std::map<std::string, std::vector<std::vector<std::string>>> by_action;
  for (size_t i = 0; i < train.size(); ++i) {
    const auto filtered =
        window_filter(per_sequence[i], config.windowing.config(),
                      models.class_thresholds);
    std::vector<std::string> symbols;
    symbols.reserve(filtered.size());
    for (const auto& dec : filtered) symbols.push_back(dec.pose);
    by_action[train[i].action_label].push_back(std::move(symbols));
  }

  models.bank.alphabet = models.rda.pose_alphabet;
  for (const auto& [action, seqs] : by_action) {
    const std::uint64_t seed = config.hmm.seed ^ fnv1a(action);
    auto [hmm, report] =
        baum_welch(seqs, config.hmm.n_states, models.bank.alphabet,
                   config.hmm.tol, config.hmm.max_iter, seed);
    models.bank.models[action] = std::move(hmm);
  }
  models.bank.validate();
  return models;
}

TrainedModels train_models(const std::vector<Sequence>& train,
                           const DatasetManifest& manifest,
                           const RunConfig& config) {
  manifest.validate();
  const PreprocessConfig pc = manifest.preprocess_config();
  std::vector<Sequence> pre;
  pre.reserve(train.size());
  for (const auto& seq : train) pre.push_back(preprocess(seq, pc));
  return train_models_preprocessed(pre, manifest, config);
}

std::optional<std::string> classify_sequence(const TrainedModels& models,
                                             const Sequence& preprocessed,
                                             const RunConfig& config) {
  const auto symbols = windowed_symbols(models, preprocessed, config);
  const auto decision =
      classify_action(models.bank, symbols, config.hmm.criterion);
  if (decision.rejected) return std::nullopt;
  return decision.action;
}

EvalReport evaluate(const std::vector<Sequence>& sequences,
                    const DatasetManifest& manifest, const RunConfig& config) {
  config.validate();
  manifest.validate();
  const PreprocessConfig pc = manifest.preprocess_config();
  std::vector<Sequence> pre;
  pre.reserve(sequences.size());
  for (const auto& seq : sequences) pre.push_back(preprocess(seq, pc));
  return evaluate_preprocessed(pre, manifest, config);
}

std::vector<SweepRow> sweep(const std::vector<Sequence>& sequences,
                            const DatasetManifest& manifest,
                            const RunConfig& config,
                            const std::vector<RoweisFactors>& grid) {
  if (grid.empty()) throw ConfigError("sweep: grid must be non-empty");
  config.validate();
  manifest.validate();
  const PreprocessConfig pc = manifest.preprocess_config();
  std::vector<Sequence> pre;
  pre.reserve(sequences.size());
  for (const auto& seq : sequences) pre.push_back(preprocess(seq, pc));

  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const RoweisFactors& factors : grid) {
    SweepRow row;
    row.factors = factors;
    try {
      factors.validate();
      row.supervision_level = supervision_level(factors);
      RunConfig point = config;
      point.factors = factors;
      row.mean_accuracy =
          evaluate_preprocessed(pre, manifest, point).mean_accuracy;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EmbeddingRow> export_embedding(
    const RdaModel& model, const std::vector<Sequence>& preprocessed) {
  if (model.p < 2) {
    throw ConfigError("embedding export requires a subspace with p >= 2");
  }
  std::vector<EmbeddingRow> rows;
  for (const auto& seq : preprocessed) {
    if (!seq.has_annotations()) continue;
    for (size_t i = 0; i < seq.frames.size(); ++i) {
      if (seq.pose_annotations[i].empty()) continue;
      const Vector proj = project(model, vectorize(seq.frames[i]));
      rows.push_back(
          EmbeddingRow{"frame", seq.pose_annotations[i], proj[0], proj[1]});
    }
  }
  if (rows.empty()) {
    throw ProtocolError("embedding export needs annotated frames");
  }
  for (int j = 0; j < model.n_classes(); ++j) {
    rows.push_back(EmbeddingRow{"mean", model.pose_alphabet[j],
                                model.projected_class_means(0, j),
                                model.projected_class_means(1, j)});
  }
  return rows;
}

json EvalReport::to_json() const {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "eval_report";
  j["mean_accuracy"] = mean_accuracy;
  j["fold_mean_accuracy"] = fold_mean_accuracy;
  j["actions"] = actions;
  j["confusion"] = confusion;
  j["rejected"] = rejected;
  j["folds"] = json::array();
  for (const auto& f : folds) {
    j["folds"].push_back({{"subject", f.subject},
                          {"n_test", f.n_test},
                          {"n_correct", f.n_correct},
                          {"accuracy", f.accuracy}});
  }
  j["config"] = config_echo;
  j["wall_seconds"] = wall_seconds;
  return j;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  size_t width = 8;
  for (const auto& a : actions) width = std::max(width, a.size() + 2);

  out << "Confusion matrix (rows: true action, columns: predicted)\n\n";
  out << std::setw(static_cast<int>(width)) << "";
  for (const auto& a : actions) out << std::setw(static_cast<int>(width)) << a;
  out << std::setw(static_cast<int>(width)) << "(rej)" << "\n";
  for (size_t i = 0; i < actions.size(); ++i) {
    out << std::setw(static_cast<int>(width)) << actions[i];
    for (size_t j = 0; j < actions.size(); ++j) {
      out << std::setw(static_cast<int>(width)) << confusion[i][j];
    }
    out << std::setw(static_cast<int>(width)) << rejected[i] << "\n";
  }

  out << "\nPer-fold accuracy\n";
  for (const auto& f : folds) {
    out << "  " << f.subject << ": " << std::fixed << std::setprecision(4)
        << f.accuracy << " (" << f.n_correct << "/" << f.n_test << ")\n";
  }
  out << "\nMean accuracy (pooled): " << std::fixed << std::setprecision(4)
      << mean_accuracy << "\n";
  out << "Mean accuracy (over folds): " << std::fixed << std::setprecision(4)
      << fold_mean_accuracy << "\n";
  return out.str();
}

void write_eval_report(const EvalReport& report,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "eval_report.json");
    if (!out) throw Error("cannot write eval_report.json");
    out << report.to_json().dump(2) << "\n";
  }
  std::ofstream out(dir / "eval_report.txt");
  if (!out) throw Error("cannot write eval_report.txt");
  out << report.to_text();
}

void write_sweep_report(const std::vector<SweepRow>& rows,
                        const json& config_echo,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "sweep_report";
  j["grid"] = json::array();
  for (const auto& row : rows) {
    json r;
    r["r1"] = row.factors.r1;
    r["r2"] = row.factors.r2;
    r["supervision_level"] = row.supervision_level;
    if (row.mean_accuracy.has_value()) {
      r["mean_accuracy"] = *row.mean_accuracy;
    } else {
      r["error"] = row.error;
    }
    j["grid"].push_back(r);
  }
  j["config"] = config_echo;
  {
    std::ofstream out(dir / "sweep.json");
    if (!out) throw Error("cannot write sweep.json");
    out << j.dump(2) << "\n";
  }
  std::ofstream out(dir / "sweep.txt");
  if (!out) throw Error("cannot write sweep.txt");
  out << std::setw(8) << "r1" << std::setw(8) << "r2" << std::setw(14)
      << "supervision" << std::setw(12) << "accuracy" << "\n";
  for (const auto& row : rows) {
    out << std::setw(8) << row.factors.r1 << std::setw(8) << row.factors.r2
        << std::setw(14) << row.supervision_level;
    if (row.mean_accuracy.has_value()) {
      out << std::setw(12) << std::fixed << std::setprecision(4)
          << *row.mean_accuracy << "\n";
      out.unsetf(std::ios::fixed);
    } else {
      out << "  error: " << row.error << "\n";
    }
  }
}

void write_embedding_csv(const std::vector<EmbeddingRow>& rows,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# roweisposes-embedding schema_version=1\n";
  out << "kind,label,dim1,dim2\n";
  for (const auto& row : rows) {
    out << row.kind << "," << row.label << "," << format_double(row.dim1)
        << "," << format_double(row.dim2) << "\n";
  }
}

std::vector<RoweisFactors> parse_grid(const std::string& text) {
  std::vector<RoweisFactors> grid;
  std::stringstream points(text);
  std::string point;
  while (std::getline(points, point, ';')) {
    if (point.empty()) continue;
    const auto comma = point.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("grid point '" + point + "' must look like 'r1,r2'");
    }
    try {
      RoweisFactors f{std::stod(point.substr(0, comma)),
                      std::stod(point.substr(comma + 1))};
      f.validate();
      grid.push_back(f);
    } catch (const std::invalid_argument&) {
      throw ConfigError("grid point '" + point + "' is not numeric");
    } catch (const std::out_of_range&) {
      throw ConfigError("grid point '" + point + "' is out of range");
    }
  }
  if (grid.empty()) throw ConfigError("grid is empty");
  return grid;
}

std::vector<RoweisFactors> default_grid() {
  std::vector<RoweisFactors> grid;
  for (double r1 : {0.0, 0.5, 1.0}) {
    for (double r2 : {0.0, 0.5, 1.0}) {
      grid.push_back(RoweisFactors{r1, r2});
    }
  }
  return grid;
}

}  // namespace roweisposes
