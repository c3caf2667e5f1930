#pragma once

#include <string>
#include <vector>

#include "roweisposes/geigen.hpp"

namespace roweisposes {

enum class Axis { X = 0, Y = 1, Z = 2 };

Axis axis_from_string(const std::string& name);  // ConfigError on bad name
std::string to_string(Axis axis);

struct Joint3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double coord(int axis) const;
  double& coord(int axis);
};

// One skeleton snapshot.
struct Frame {
  std::vector<Joint3D> joints;
  long timestamp_index = 0;
};

// A labeled, subject-attributed, time-ordered list of frames.
// pose_annotations is either empty or holds one label per frame, with ""
// marking frames that carry no annotation.
struct Sequence {
  std::string id;
  std::string action_label;
  std::string subject_id;
  std::vector<Frame> frames;
  std::vector<std::string> pose_annotations;

  bool has_annotations() const;
};

struct PreprocessConfig {
  int hip_index = 0;
  int left_shoulder_index = 1;
  int right_shoulder_index = 2;
  std::vector<int> selected_joints;
  Axis vertical_axis = Axis::Y;

  // SchemaError when indices collide or fall outside [0, joint_count).
  void validate(int joint_count) const;

  // Canonical description of this configuration, stored with fitted models
  // so inference can detect preprocessing mismatches.
  std::string fingerprint() const;
};

// The four normalization steps. Each returns a new frame.
Frame translate_hip_to_origin(const Frame& frame, const PreprocessConfig& cfg);
Frame align_shoulders(const Frame& frame, const PreprocessConfig& cfg);
Frame remove_scale(const Frame& frame, const PreprocessConfig& cfg);
Frame select_joints(const Frame& frame, const PreprocessConfig& cfg);

// translate -> align -> remove_scale -> select_joints.
Frame preprocess_frame(const Frame& frame, const PreprocessConfig& cfg);

// Applies preprocess_frame to every frame; labels and annotations are kept.
// Per-frame failures are rethrown with the frame index attached.
Sequence preprocess(const Sequence& seq, const PreprocessConfig& cfg);

// Rigid rotation of all joints about the given axis through the origin.
Frame rotate_about_axis(const Frame& frame, Axis axis, double radians);

// [x_1..x_J, y_1..y_J, z_1..z_J]^T, d = 3J.
Vector vectorize(const Frame& frame);
Frame devectorize(const Vector& v, long timestamp_index = 0);

}  // namespace roweisposes
