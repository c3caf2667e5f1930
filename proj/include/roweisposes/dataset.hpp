#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "roweisposes/skeleton.hpp"

namespace roweisposes {

struct ManifestFile {
  std::string path;     // relative to the dataset root
  std::string subject;  // subject whose recordings the file holds
};

// Describes one dataset: joint layout, landmark indices, label universes and
// the data files. See docs/interchange.md for the on-disk format.
struct DatasetManifest {
  std::string name;
  int joint_count = 0;
  int hip_index = 0;
  int left_shoulder_index = 1;
  int right_shoulder_index = 2;
  Axis vertical_axis = Axis::Y;
  std::vector<int> selected_joints;
  std::vector<std::string> action_labels;
  std::vector<std::string> pose_alphabet;
  std::vector<ManifestFile> files;

  void validate() const;  // SchemaError
  PreprocessConfig preprocess_config() const;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

// Reads every file listed in the manifest (resolved against `root`) and
// returns sequences sorted by (subject, action, sequence id). Malformed
// records raise ParseError naming file and line; schema violations raise
// SchemaError.
std::vector<Sequence> load_sequences(const DatasetManifest& manifest,
                                     const std::filesystem::path& root);

// Writes one record file per manifest entry into `dir`. Every subject
// present in `sequences` must appear in manifest.files.
void save_sequences(const std::vector<Sequence>& sequences,
                    const DatasetManifest& manifest,
                    const std::filesystem::path& dir);

struct Fold {
  std::string held_out_subject;
  std::vector<Sequence> train;
  std::vector<Sequence> test;
};

// One fold per distinct subject, sorted by subject id. ProtocolError when
// fewer than two subjects are present.
std::vector<Fold> lopo_folds(const std::vector<Sequence>& sequences);

struct SyntheticSpec {
  int n_subjects = 4;
  int n_actions = 5;
  int poses_per_action = 3;
  int frames_per_pose = 8;
  double noise_sigma = 0.02;
  // Recordings per (subject, action) pair; extra knob beyond the core shape.
  int sequences_per_subject_action = 3;
};

// Deterministic synthetic dataset: distinct prototype poses, each action a
// fixed pose sequence, per-frame Gaussian jitter, and a per-subject global
// yaw/translation/scale transform that preprocessing cancels. Every frame
// carries its generating pose as annotation.
std::pair<std::vector<Sequence>, DatasetManifest> generate_synthetic(
    const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace roweisposes
