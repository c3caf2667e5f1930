// Batch command-line surface for the pose-subspace action recognition
// pipeline: train, eval (leave-one-person-out), sweep over the Roweis map,
// embedding export and synthetic data generation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roweisposes/model_io.hpp"
#include "roweisposes/pipeline.hpp"

namespace rp = roweisposes;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config_path;
  std::string manifest_path;
  double r1 = -1.0;
  double r2 = -1.0;
  int dims = -1;
  std::string kernel;
  double rbf_gamma = -1.0;
  int states = -1;
  long long seed = -1;
  std::string criterion;
  std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--manifest", flags.manifest_path, "dataset manifest path");
  cmd->add_option("--r1", flags.r1, "first Roweis factor in [0,1]");
  cmd->add_option("--r2", flags.r2, "second Roweis factor in [0,1]");
  cmd->add_option("--dims", flags.dims, "subspace dimensionality (0 = c-1)");
  cmd->add_option("--kernel", flags.kernel, "label kernel: delta|linear|rbf");
  cmd->add_option("--rbf-gamma", flags.rbf_gamma, "rbf kernel gamma");
  cmd->add_option("--states", flags.states, "HMM states per action");
  cmd->add_option("--seed", flags.seed, "RNG seed");
  cmd->add_option("--criterion", flags.criterion,
                  "classification criterion: viterbi|forward");
  cmd->add_option("--out", flags.out_dir, "output directory");
}

// Config file first, then explicit flags on top.
rp::RunConfig build_config(const CLI::App* cmd, const CommonFlags& flags) {
  rp::RunConfig config;
  if (cmd->count("--config")) {
    config = rp::load_run_config(flags.config_path);
  }
  if (cmd->count("--manifest")) config.manifest_path = flags.manifest_path;
  if (cmd->count("--r1")) config.factors.r1 = flags.r1;
  if (cmd->count("--r2")) config.factors.r2 = flags.r2;
  if (cmd->count("--dims")) config.dims = flags.dims;
  if (cmd->count("--kernel")) {
    config.kernel = rp::kernel_from_string(flags.kernel);
  }
  if (cmd->count("--rbf-gamma")) config.rbf_gamma = flags.rbf_gamma;
  if (cmd->count("--states")) config.hmm.n_states = flags.states;
  if (cmd->count("--seed")) {
    config.hmm.seed = static_cast<std::uint64_t>(flags.seed);
  }
  if (cmd->count("--criterion")) {
    config.hmm.criterion = rp::criterion_from_string(flags.criterion);
  }
  if (cmd->count("--out")) config.out_dir = flags.out_dir;
  config.validate();
  if (config.manifest_path.empty()) {
    throw rp::ConfigError("a dataset manifest is required (--manifest)");
  }
  return config;
}

std::pair<std::vector<rp::Sequence>, rp::DatasetManifest> load_dataset(
    const rp::RunConfig& config) {
  const fs::path manifest_path = config.manifest_path;
  rp::DatasetManifest manifest = rp::load_manifest(manifest_path);
  auto sequences = rp::load_sequences(manifest, manifest_path.parent_path());
  if (sequences.empty()) {
    throw rp::DataError("dataset contains no sequences");
  }
  return {std::move(sequences), std::move(manifest)};
}

void write_train_summary(const rp::TrainedModels& models,
                         const rp::RunConfig& config, const fs::path& dir) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "train_summary";
  j["config"] = config.to_json();
  j["pose_alphabet"] = models.rda.pose_alphabet;
  j["actions"] = nlohmann::json::array();
  for (const auto& [action, hmm] : models.bank.models) {
    j["actions"].push_back(action);
  }
  j["class_thresholds"] = models.class_thresholds;
  std::ofstream out(dir / "train_summary.json");
  if (!out) throw rp::Error("cannot write train_summary.json");
  out << j.dump(2) << "\n";
}

int run_train(const CLI::App* cmd, const CommonFlags& flags) {
  const rp::RunConfig config = build_config(cmd, flags);
  auto [sequences, manifest] = load_dataset(config);
  const rp::TrainedModels models =
      rp::train_models(sequences, manifest, config);
  const fs::path dir = config.out_dir;
  fs::create_directories(dir);
  rp::save_rda_model(models.rda, dir / "rda_model.json");
  rp::save_model_bank(models.bank, dir / "hmm_bank.json");
  write_train_summary(models, config, dir);
  std::cout << "trained " << models.bank.models.size() << " action models over "
            << models.rda.n_classes() << " poses (p=" << models.rda.p
            << "); models written to " << dir.string() << "\n";
  return kExitOk;
}

int run_eval(const CLI::App* cmd, const CommonFlags& flags) {
  const rp::RunConfig config = build_config(cmd, flags);
  auto [sequences, manifest] = load_dataset(config);
  const rp::EvalReport report = rp::evaluate(sequences, manifest, config);
  rp::write_eval_report(report, config.out_dir);
  std::cout << report.to_text();
  std::cout << "report written to " << config.out_dir << "\n";
  return kExitOk;
}

int run_sweep(const CLI::App* cmd, const CommonFlags& flags,
              const std::string& grid_text) {
  const rp::RunConfig config = build_config(cmd, flags);
  const auto grid = grid_text.empty() ? rp::default_grid()
                                      : rp::parse_grid(grid_text);
  auto [sequences, manifest] = load_dataset(config);
  const auto rows = rp::sweep(sequences, manifest, config, grid);
  rp::write_sweep_report(rows, config.to_json(), config.out_dir);
  for (const auto& row : rows) {
    std::printf("r1=%-6g r2=%-6g s=%-6g ", row.factors.r1, row.factors.r2,
                row.supervision_level);
    if (row.mean_accuracy.has_value()) {
      std::printf("accuracy=%.4f\n", *row.mean_accuracy);
    } else {
      std::printf("error: %s\n", row.error.c_str());
    }
  }
  std::cout << "sweep written to " << config.out_dir << "\n";
  return kExitOk;
}

int run_export_embedding(const CLI::App* cmd, const CommonFlags& flags) {
  const rp::RunConfig config = build_config(cmd, flags);
  auto [sequences, manifest] = load_dataset(config);
  const rp::PreprocessConfig pc = manifest.preprocess_config();
  std::vector<rp::Sequence> pre;
  pre.reserve(sequences.size());
  for (const auto& seq : sequences) pre.push_back(rp::preprocess(seq, pc));
  const rp::TrainedModels models =
      rp::train_models_preprocessed(pre, manifest, config);
  const auto rows = rp::export_embedding(models.rda, pre);
  fs::create_directories(config.out_dir);
  const fs::path path = fs::path(config.out_dir) / "embedding.csv";
  rp::write_embedding_csv(rows, path);
  std::cout << rows.size() << " rows written to " << path.string() << "\n";
  return kExitOk;
}

int run_gen_synthetic(const rp::SyntheticSpec& spec, long long seed,
                      const std::string& out_dir) {
  auto [sequences, manifest] =
      rp::generate_synthetic(spec, static_cast<std::uint64_t>(seed));
  const fs::path dir = out_dir;
  rp::save_sequences(sequences, manifest, dir);
  rp::save_manifest(manifest, dir / "manifest.json");
  std::cout << "wrote " << sequences.size() << " sequences ("
            << manifest.pose_alphabet.size() << " poses, "
            << manifest.action_labels.size() << " actions) to " << dir.string()
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-subspace 3D action recognition toolkit"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags, sweep_flags, embed_flags;
  std::string grid_text;

  CLI::App* train = app.add_subcommand(
      "train", "fit the pose subspace and per-action HMMs, save the models");
  add_common_flags(train, train_flags);

  CLI::App* eval = app.add_subcommand(
      "eval", "leave-one-person-out evaluation with confusion matrix");
  add_common_flags(eval, eval_flags);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "eval over a grid of Roweis factors");
  add_common_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--grid", grid_text,
                        "semicolon-separated factor pairs, e.g. '0,0;0,1'");

  CLI::App* embed = app.add_subcommand(
      "export-embedding", "write 2-D subspace coordinates for plotting");
  add_common_flags(embed, embed_flags);

  rp::SyntheticSpec spec;
  long long gen_seed = 7;
  std::string gen_out = "synthetic";
  CLI::App* gen = app.add_subcommand("gen-synthetic",
                                     "generate a deterministic synthetic "
                                     "dataset in the interchange format");
  gen->add_option("--subjects", spec.n_subjects, "number of subjects");
  gen->add_option("--actions", spec.n_actions, "number of actions");
  gen->add_option("--poses-per-action", spec.poses_per_action,
                  "poses composing each action");
  gen->add_option("--frames-per-pose", spec.frames_per_pose,
                  "frames per pose segment");
  gen->add_option("--noise", spec.noise_sigma, "per-coordinate jitter sigma");
  gen->add_option("--repeats", spec.sequences_per_subject_action,
                  "recordings per subject and action");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) return run_train(train, train_flags);
    if (eval->parsed()) return run_eval(eval, eval_flags);
    if (sweep_cmd->parsed()) return run_sweep(sweep_cmd, sweep_flags, grid_text);
    if (embed->parsed()) return run_export_embedding(embed, embed_flags);
    if (gen->parsed()) return run_gen_synthetic(spec, gen_seed, gen_out);
  } catch (const rp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rp::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rp::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rp::InvalidDimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitData;
  } catch (const rp::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const rp::DegenerateSkeletonError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const rp::DegenerateOrientationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const rp::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
