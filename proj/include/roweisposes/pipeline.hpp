#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roweisposes/dataset.hpp"
#include "roweisposes/hmm.hpp"
#include "roweisposes/pose.hpp"
#include "roweisposes/rda.hpp"

namespace roweisposes {

struct WindowingSettings {
  int window_size = 5;
  double distance_threshold = 3.0;
  int min_keep_per_window = 1;
  // When true the uniform threshold is replaced by a per-pose quantile of
  // training recognition distances.
  bool quantile_calibration = true;
  double quantile = 0.95;

  WindowingConfig config() const;
};

struct HmmSettings {
  int n_states = 5;
  double tol = 1e-6;
  int max_iter = 100;
  std::uint64_t seed = 42;
  Criterion criterion = Criterion::Viterbi;
};

// Everything one run needs. Flags override config-file fields; the effective
// record is echoed into every report.
struct RunConfig {
  std::string manifest_path;
  RoweisFactors factors{0.0, 1.0};
  int dims = 0;  // 0 selects the c-1 default
  KernelKind kernel = KernelKind::Delta;
  double rbf_gamma = 1.0;
  double eps = -1.0;  // < 0 selects the scale-aware default
  WindowingSettings windowing;
  HmmSettings hmm;
  std::string out_dir = "out";

  void validate() const;
  nlohmann::json to_json() const;
  // Overlays fields present in `j` onto *this; unknown fields are rejected.
  void merge_json(const nlohmann::json& j);
};

RunConfig load_run_config(const std::filesystem::path& path);

struct TrainedModels {
  RdaModel rda;
  ActionModelBank bank;
  std::map<std::string, double> class_thresholds;  // empty unless calibrated
};

// Fits the pose subspace on annotated frames, calibrates windowing
// thresholds, and trains one HMM per action on windowed recognized-pose
// sequences. Input sequences must already be preprocessed.
TrainedModels train_models_preprocessed(
    const std::vector<Sequence>& train, const DatasetManifest& manifest,
    const RunConfig& config);

// Convenience wrapper that preprocesses first.
TrainedModels train_models(const std::vector<Sequence>& train,
                           const DatasetManifest& manifest,
                           const RunConfig& config);

// Recognize, window, classify. nullopt means the sequence was rejected.
std::optional<std::string> classify_sequence(const TrainedModels& models,
                                             const Sequence& preprocessed,
                                             const RunConfig& config);

struct FoldResult {
  std::string subject;
  int n_test = 0;
  int n_correct = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;       // pooled: confusion trace / total
  double fold_mean_accuracy = 0.0;  // unweighted mean of fold accuracies
  std::vector<std::string> actions;
  std::vector<std::vector<long>> confusion;  // row true, column predicted
  std::vector<long> rejected;                // per true action
  nlohmann::json config_echo;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

// Full leave-one-person-out evaluation.
EvalReport evaluate(const std::vector<Sequence>& sequences,
                    const DatasetManifest& manifest, const RunConfig& config);

struct SweepRow {
  RoweisFactors factors;
  double supervision_level = 0.0;
  std::optional<double> mean_accuracy;
  std::string error;  // non-empty when this grid point failed
};

// evaluate() per grid point, reusing the loaded and preprocessed data.
// Failures are recorded per point; remaining points still run.
std::vector<SweepRow> sweep(const std::vector<Sequence>& sequences,
                            const DatasetManifest& manifest,
                            const RunConfig& config,
                            const std::vector<RoweisFactors>& grid);

struct EmbeddingRow {
  std::string kind;  // "frame" or "mean"
  std::string label;
  double dim1 = 0.0;
  double dim2 = 0.0;
};

// Two leading subspace coordinates of every annotated frame plus one row per
// class mean. Requires p >= 2.
std::vector<EmbeddingRow> export_embedding(
    const RdaModel& model, const std::vector<Sequence>& preprocessed);

// Document writers.
void write_eval_report(const EvalReport& report,
                       const std::filesystem::path& dir);
void write_sweep_report(const std::vector<SweepRow>& rows,
                        const nlohmann::json& config_echo,
                        const std::filesystem::path& dir);
void write_embedding_csv(const std::vector<EmbeddingRow>& rows,
                         const std::filesystem::path& path);

// Grid helpers for the sweep command.
std::vector<RoweisFactors> parse_grid(const std::string& text);  // "a,b;c,d"
std::vector<RoweisFactors> default_grid();  // the nine-point {0,.5,1}^2 grid

}  // namespace roweisposes
