#include "roweisposes/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace roweisposes {

namespace {

using nlohmann::json;

constexpr int kManifestSchemaVersion = 1;

std::string loc(const std::filesystem::path& file, size_t line) {
  std::ostringstream s;
  s << file.string() << ":" << line << ": ";
  return s.str();
}

json require_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw ParseError(where + "missing field '" + key + "'");
  }
  return j.at(key);
}

}  // namespace

void DatasetManifest::validate() const {
  if (name.empty()) throw SchemaError("manifest: name must be non-empty");
  if (joint_count < 1) throw SchemaError("manifest: joint_count must be >= 1");
  preprocess_config().validate(joint_count);
  if (action_labels.empty()) {
    throw SchemaError("manifest: action_labels must be non-empty");
  }
  if (pose_alphabet.empty()) {
    throw SchemaError("manifest: pose_alphabet must be non-empty");
  }
  for (const auto& f : files) {
    if (f.path.empty() || f.subject.empty()) {
      throw SchemaError("manifest: file entries need both path and subject");
    }
  }
}

PreprocessConfig DatasetManifest::preprocess_config() const {
  PreprocessConfig cfg;
  cfg.hip_index = hip_index;
  cfg.left_shoulder_index = left_shoulder_index;
  cfg.right_shoulder_index = right_shoulder_index;
  cfg.selected_joints = selected_joints;
  cfg.vertical_axis = vertical_axis;
  return cfg;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const std::string where = path.string() + ": ";
  const int version = require_field(j, "schema_version", where).get<int>();
  if (version != kManifestSchemaVersion) {
    std::ostringstream msg;
    msg << where << "unsupported schema_version " << version;
    throw SchemaError(msg.str());
  }
  DatasetManifest m;
  try {
    m.name = require_field(j, "name", where).get<std::string>();
    m.joint_count = require_field(j, "joint_count", where).get<int>();
    m.hip_index = require_field(j, "hip_index", where).get<int>();
    m.left_shoulder_index =
        require_field(j, "left_shoulder_index", where).get<int>();
    m.right_shoulder_index =
        require_field(j, "right_shoulder_index", where).get<int>();
    m.vertical_axis = axis_from_string(
        require_field(j, "vertical_axis", where).get<std::string>());
    m.selected_joints =
        require_field(j, "selected_joints", where).get<std::vector<int>>();
    m.action_labels = require_field(j, "action_labels", where)
                          .get<std::vector<std::string>>();
    m.pose_alphabet = require_field(j, "pose_alphabet", where)
                          .get<std::vector<std::string>>();
    for (const auto& f : require_field(j, "files", where)) {
      m.files.push_back(ManifestFile{
          require_field(f, "path", where).get<std::string>(),
          require_field(f, "subject", where).get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(where + e.what());
  }
  m.validate();
  return m;
}

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
  json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["name"] = manifest.name;
  j["joint_count"] = manifest.joint_count;
  j["hip_index"] = manifest.hip_index;
  j["left_shoulder_index"] = manifest.left_shoulder_index;
  j["right_shoulder_index"] = manifest.right_shoulder_index;
  j["vertical_axis"] = to_string(manifest.vertical_axis);
  j["selected_joints"] = manifest.selected_joints;
  j["action_labels"] = manifest.action_labels;
  j["pose_alphabet"] = manifest.pose_alphabet;
  j["files"] = json::array();
  for (const auto& f : manifest.files) {
    j["files"].push_back({{"path", f.path}, {"subject", f.subject}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<Sequence> load_sequences(const DatasetManifest& manifest,
                                     const std::filesystem::path& root) {
  manifest.validate();
  const std::set<std::string> actions(manifest.action_labels.begin(),
                                      manifest.action_labels.end());
  const std::set<std::string> poses(manifest.pose_alphabet.begin(),
                                    manifest.pose_alphabet.end());

  // key: (subject, action, sequence_id)
  std::map<std::tuple<std::string, std::string, std::string>, Sequence> groups;

  for (const auto& entry : manifest.files) {
    const std::filesystem::path file = root / entry.path;
    std::ifstream in(file);
    if (!in) throw ParseError("cannot open data file " + file.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception& e) {
        throw ParseError(loc(file, line_no) + e.what());
      }
      const std::string where = loc(file, line_no);
      std::string subject, action, seq_id, pose;
      long frame_index = 0;
      std::vector<double> coords;
      try {
        subject = require_field(rec, "subject", where).get<std::string>();
        action = require_field(rec, "action", where).get<std::string>();
        seq_id = require_field(rec, "sequence_id", where).get<std::string>();
        frame_index = require_field(rec, "frame_index", where).get<long>();
        coords =
            require_field(rec, "coords", where).get<std::vector<double>>();
        if (rec.contains("pose")) pose = rec.at("pose").get<std::string>();
      } catch (const json::exception& e) {
        throw ParseError(where + e.what());
      }
      if (frame_index < 0) {
        throw ParseError(where + "frame_index must be nonnegative");
      }
      if (coords.size() != static_cast<size_t>(3 * manifest.joint_count)) {
        std::ostringstream msg;
        msg << where << "expected " << 3 * manifest.joint_count
            << " coordinates, got " << coords.size();
        throw ParseError(msg.str());
      }
      if (subject != entry.subject) {
        throw SchemaError(where + "record subject '" + subject +
                          "' does not match file subject '" + entry.subject +
                          "'");
      }
      if (!actions.count(action)) {
        throw SchemaError(where + "action '" + action +
                          "' is not in the manifest action_labels");
      }
      if (!pose.empty() && !poses.count(pose)) {
        throw SchemaError(where + "pose '" + pose +
                          "' is not in the manifest pose_alphabet");
      }

      Frame frame;
      frame.timestamp_index = frame_index;
      frame.joints.resize(manifest.joint_count);
      for (int l = 0; l < manifest.joint_count; ++l) {
        frame.joints[l] =
            Joint3D{coords[3 * l], coords[3 * l + 1], coords[3 * l + 2]};
      }

      auto& seq = groups[{subject, action, seq_id}];
      if (seq.frames.empty()) {
        seq.id = seq_id;
        seq.action_label = action;
        seq.subject_id = subject;
      } else if (frame_index <= seq.frames.back().timestamp_index) {
        throw ParseError(where + "frame_index not strictly increasing within "
                                 "sequence '" +
                         seq_id + "'");
      }
      seq.frames.push_back(frame);
      seq.pose_annotations.push_back(pose);
    }
  }

  std::vector<Sequence> out;
  out.reserve(groups.size());
  for (auto& [key, seq] : groups) {
    if (!seq.has_annotations()) seq.pose_annotations.clear();
    out.push_back(std::move(seq));
  }
  return out;
}

void save_sequences(const std::vector<Sequence>& sequences,
                    const DatasetManifest& manifest,
                    const std::filesystem::path& dir) {
  std::map<std::string, std::string> subject_to_path;
  for (const auto& f : manifest.files) subject_to_path[f.subject] = f.path;

  std::map<std::string, std::vector<const Sequence*>> by_subject;
  for (const auto& seq : sequences) {
    if (!subject_to_path.count(seq.subject_id)) {
      throw SchemaError("subject '" + seq.subject_id +
                        "' has no file entry in the manifest");
    }
    by_subject[seq.subject_id].push_back(&seq);
  }

  std::filesystem::create_directories(dir);
  for (const auto& [subject, path] : subject_to_path) {
    std::ofstream out(dir / path);
    if (!out) throw Error("cannot write data file " + (dir / path).string());
    auto it = by_subject.find(subject);
    if (it == by_subject.end()) continue;
    std::vector<const Sequence*> seqs = it->second;
    std::sort(seqs.begin(), seqs.end(), [](const Sequence* a, const Sequence* b) {
      return std::tie(a->action_label, a->id) < std::tie(b->action_label, b->id);
    });
    for (const Sequence* seq : seqs) {
      for (size_t i = 0; i < seq->frames.size(); ++i) {
        const Frame& frame = seq->frames[i];
        json rec;
        rec["subject"] = seq->subject_id;
        rec["action"] = seq->action_label;
        rec["sequence_id"] = seq->id;
        rec["frame_index"] = frame.timestamp_index;
        if (i < seq->pose_annotations.size() &&
            !seq->pose_annotations[i].empty()) {
          rec["pose"] = seq->pose_annotations[i];
        }
        std::vector<double> coords;
        coords.reserve(3 * frame.joints.size());
        for (const auto& j : frame.joints) {
          coords.push_back(j.x);
          coords.push_back(j.y);
          coords.push_back(j.z);
        }
        rec["coords"] = coords;
        out << rec.dump() << "\n";
      }
    }
  }
}

std::vector<Fold> lopo_folds(const std::vector<Sequence>& sequences) {
  std::set<std::string> subjects;
  for (const auto& seq : sequences) subjects.insert(seq.subject_id);
  if (subjects.size() < 2) {
    throw ProtocolError(
        "leave-one-person-out requires at least two distinct subjects");
  }
  std::vector<Fold> folds;
  folds.reserve(subjects.size());
  for (const auto& subject : subjects) {
    Fold fold;
    fold.held_out_subject = subject;
    for (const auto& seq : sequences) {
      (seq.subject_id == subject ? fold.test : fold.train).push_back(seq);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

namespace {

std::string zero_pad(int value, int width) {
  std::ostringstream s;
  s << value;
  std::string txt = s.str();
  while (static_cast<int>(txt.size()) < width) txt = "0" + txt;
  return txt;
}

}  // namespace

std::pair<std::vector<Sequence>, DatasetManifest> generate_synthetic(
    const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_subjects < 1 || spec.n_actions < 1 || spec.poses_per_action < 1 ||
      spec.frames_per_pose < 1 || spec.sequences_per_subject_action < 1) {
    throw ConfigError("generate_synthetic: all counts must be >= 1");
  }
  if (spec.noise_sigma < 0.0) {
    throw ConfigError("generate_synthetic: noise_sigma must be nonnegative");
  }

  constexpr int kJoints = 8;  // hip, both shoulders, five free joints
  const int n_poses = spec.n_actions * spec.poses_per_action;

  DatasetManifest manifest;
  manifest.name = "synthetic";
  manifest.joint_count = kJoints;
  manifest.hip_index = 0;
  manifest.left_shoulder_index = 1;
  manifest.right_shoulder_index = 2;
  manifest.vertical_axis = Axis::Y;
  manifest.selected_joints.resize(kJoints);
  for (int i = 0; i < kJoints; ++i) manifest.selected_joints[i] = i;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Prototype poses share a canonical torso (hip at the origin, unit-length
  // shoulder reference, shoulders already aligned) so that zero-noise frames
  // are exact fixed points of preprocessing.
  std::vector<Frame> prototypes;
  prototypes.reserve(n_poses);
  for (int pose = 0; pose < n_poses; ++pose) {
    for (int attempt = 0;; ++attempt) {
      Frame proto;
      proto.joints.resize(kJoints);
      proto.joints[0] = Joint3D{0.0, 0.0, 0.0};
      proto.joints[1] = Joint3D{-0.5, 1.0, 0.0};
      proto.joints[2] = Joint3D{0.5, 1.0, 0.0};
      for (int l = 3; l < kJoints; ++l) {
        proto.joints[l] = Joint3D{unit(rng), unit(rng), unit(rng)};
      }
      const Vector v = vectorize(proto);
      bool distinct = true;
      for (const Frame& other : prototypes) {
        if ((v - vectorize(other)).norm() < 1.0) {
          distinct = false;
          break;
        }
      }
      if (distinct) {
        prototypes.push_back(std::move(proto));
        break;
      }
      if (attempt > 1000) {
        throw ConfigError(
            "generate_synthetic: could not draw distinct pose prototypes");
      }
    }
    manifest.pose_alphabet.push_back("pose" + zero_pad(pose, 2));
  }

  for (int a = 0; a < spec.n_actions; ++a) {
    manifest.action_labels.push_back("act" + zero_pad(a, 2));
  }

  struct SubjectTransform {
    double yaw, scale;
    double tx, ty, tz;
  };
  std::vector<SubjectTransform> transforms;
  std::uniform_real_distribution<double> yaw_dist(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> scale_dist(0.6, 1.8);
  std::uniform_real_distribution<double> shift_dist(-2.0, 2.0);
  for (int s = 0; s < spec.n_subjects; ++s) {
    const std::string subject = "s" + zero_pad(s, 2);
    manifest.files.push_back(ManifestFile{subject + ".jsonl", subject});
    transforms.push_back(SubjectTransform{yaw_dist(rng), scale_dist(rng),
                                          shift_dist(rng), shift_dist(rng),
                                          shift_dist(rng)});
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Sequence> sequences;
  for (int s = 0; s < spec.n_subjects; ++s) {
    const SubjectTransform& tr = transforms[s];
    for (int a = 0; a < spec.n_actions; ++a) {
      for (int rep = 0; rep < spec.sequences_per_subject_action; ++rep) {
        Sequence seq;
        seq.subject_id = "s" + zero_pad(s, 2);
        seq.action_label = manifest.action_labels[a];
        seq.id = seq.subject_id + "_" + seq.action_label + "_r" +
                 zero_pad(rep, 2);
        long t = 0;
        for (int step = 0; step < spec.poses_per_action; ++step) {
          const int pose = a * spec.poses_per_action + step;
          for (int f = 0; f < spec.frames_per_pose; ++f) {
            Frame frame = prototypes[pose];
            frame.timestamp_index = t++;
            if (spec.noise_sigma > 0.0) {
              for (auto& j : frame.joints) {
                j.x += spec.noise_sigma * noise(rng);
                j.y += spec.noise_sigma * noise(rng);
                j.z += spec.noise_sigma * noise(rng);
              }
            }
            // scale, then yaw about the vertical axis, then translate
            for (auto& j : frame.joints) {
              j.x *= tr.scale;
              j.y *= tr.scale;
              j.z *= tr.scale;
            }
            frame = rotate_about_axis(frame, Axis::Y, tr.yaw);
            for (auto& j : frame.joints) {
              j.x += tr.tx;
              j.y += tr.ty;
              j.z += tr.tz;
            }
            seq.frames.push_back(std::move(frame));
            seq.pose_annotations.push_back(manifest.pose_alphabet[pose]);
          }
        }
        sequences.push_back(std::move(seq));
      }
    }
  }
  return {std::move(sequences), std::move(manifest)};
}

}  // namespace roweisposes
