#include "roweisposes/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace roweisposes {

namespace {

// The two horizontal axes for a given vertical axis, lower index first.
// The first is the lateral axis (shoulder line target), the second the depth
// axis whose component of the shoulder line is zeroed.
std::pair<int, int> horizontal_axes(Axis vertical) {
  switch (vertical) {
    case Axis::X:
      return {1, 2};
    case Axis::Y:
      return {0, 2};
    case Axis::Z:
    default:
      return {0, 1};
  }
}

double frame_scale(const Frame& frame) {
  double m = 1.0;
  for (const auto& j : frame.joints) {
    m = std::max({m, std::abs(j.x), std::abs(j.y), std::abs(j.z)});
  }
  return m;
}

void check_index(const Frame& frame, int index, const char* what) {
  if (index < 0 || index >= static_cast<int>(frame.joints.size())) {
    std::ostringstream msg;
    msg << what << " index " << index << " out of range for a frame with "
        << frame.joints.size() << " joints";
    throw SchemaError(msg.str());
  }
}

std::string frame_context(size_t i) {
  std::ostringstream msg;
  msg << "frame " << i << ": ";
  return msg.str();
}

}  // namespace

Axis axis_from_string(const std::string& name) {
  if (name == "x" || name == "X") return Axis::X;
  if (name == "y" || name == "Y") return Axis::Y;
  if (name == "z" || name == "Z") return Axis::Z;
  throw ConfigError("unknown axis name '" + name + "' (expected x, y or z)");
}

std::string to_string(Axis axis) {
  switch (axis) {
    case Axis::X:
      return "x";
    case Axis::Y:
      return "y";
    case Axis::Z:
    default:
      return "z";
  }
}

double Joint3D::coord(int axis) const {
  switch (axis) {
    case 0:
      return x;
    case 1:
      return y;
    default:
      return z;
  }
}

double& Joint3D::coord(int axis) {
  switch (axis) {
    case 0:
      return x;
    case 1:
      return y;
    default:
      return z;
  }
}

bool Sequence::has_annotations() const {
  return std::any_of(pose_annotations.begin(), pose_annotations.end(),
                     [](const std::string& s) { return !s.empty(); });
}

void PreprocessConfig::validate(int joint_count) const {
  if (joint_count < 3) {
    throw SchemaError(
        "preprocessing requires at least 3 joints (hip and both shoulders)");
  }
  const std::set<int> landmarks{hip_index, left_shoulder_index,
                                right_shoulder_index};
  if (landmarks.size() != 3) {
    throw SchemaError("hip and shoulder indices must be distinct");
  }
  for (int idx : landmarks) {
    if (idx < 0 || idx >= joint_count) {
      std::ostringstream msg;
      msg << "landmark index " << idx << " out of range [0, " << joint_count
          << ")";
      throw SchemaError(msg.str());
    }
  }
  if (selected_joints.empty()) {
    throw SchemaError("selected_joints must be non-empty");
  }
  for (int idx : selected_joints) {
    if (idx < 0 || idx >= joint_count) {
      std::ostringstream msg;
      msg << "selected joint index " << idx << " out of range [0, "
          << joint_count << ")";
      throw SchemaError(msg.str());
    }
  }
}

std::string PreprocessConfig::fingerprint() const {
  std::ostringstream s;
  s << "pp1;hip=" << hip_index << ";lsh=" << left_shoulder_index
    << ";rsh=" << right_shoulder_index << ";axis=" << to_string(vertical_axis)
    << ";sel=";
  for (size_t i = 0; i < selected_joints.size(); ++i) {
    if (i) s << ",";
    s << selected_joints[i];
  }
  return s.str();
}

Frame translate_hip_to_origin(const Frame& frame, const PreprocessConfig& cfg) {
  check_index(frame, cfg.hip_index, "hip");
  const Joint3D hip = frame.joints[cfg.hip_index];
  Frame out = frame;
  for (auto& j : out.joints) {
    j.x -= hip.x;
    j.y -= hip.y;
    j.z -= hip.z;
  }
  return out;
}

Frame rotate_about_axis(const Frame& frame, Axis axis, double radians) {
  const auto [lat, dep] = horizontal_axes(axis);
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  Frame out = frame;
  for (auto& j : out.joints) {
    const double a = j.coord(lat);
    const double b = j.coord(dep);
    j.coord(lat) = c * a - s * b;
    j.coord(dep) = s * a + c * b;
  }
  return out;
}

Frame align_shoulders(const Frame& frame, const PreprocessConfig& cfg) {
  check_index(frame, cfg.left_shoulder_index, "left shoulder");
  check_index(frame, cfg.right_shoulder_index, "right shoulder");
  const auto [lat, dep] = horizontal_axes(cfg.vertical_axis);
  const Joint3D& l = frame.joints[cfg.left_shoulder_index];
  const Joint3D& r = frame.joints[cfg.right_shoulder_index];
  const double s_lat = r.coord(lat) - l.coord(lat);
  const double s_dep = r.coord(dep) - l.coord(dep);
  if (std::hypot(s_lat, s_dep) <= 1e-12 * frame_scale(frame)) {
    throw DegenerateOrientationError(
        "shoulders coincide in the horizontal plane; orientation undefined");
  }
  const double theta = std::atan2(s_dep, s_lat);
  if (theta == 0.0) return frame;
  return rotate_about_axis(frame, cfg.vertical_axis, -theta);
}

Frame remove_scale(const Frame& frame, const PreprocessConfig& cfg) {
  check_index(frame, cfg.hip_index, "hip");
  check_index(frame, cfg.left_shoulder_index, "left shoulder");
  check_index(frame, cfg.right_shoulder_index, "right shoulder");
  const Joint3D& hip = frame.joints[cfg.hip_index];
  const Joint3D& l = frame.joints[cfg.left_shoulder_index];
  const Joint3D& r = frame.joints[cfg.right_shoulder_index];
  const double mx = 0.5 * (l.x + r.x) - hip.x;
  const double my = 0.5 * (l.y + r.y) - hip.y;
  const double mz = 0.5 * (l.z + r.z) - hip.z;
  const double ref = std::sqrt(mx * mx + my * my + mz * mz);
  if (ref <= 1e-12 * frame_scale(frame)) {
    throw DegenerateSkeletonError(
        "hip to shoulder-midpoint distance is zero; cannot remove scale");
  }
  Frame out = frame;
  for (auto& j : out.joints) {
    j.x /= ref;
    j.y /= ref;
    j.z /= ref;
  }
  return out;
}

Frame select_joints(const Frame& frame, const PreprocessConfig& cfg) {
  if (cfg.selected_joints.empty()) {
    throw SchemaError("selected_joints must be non-empty");
  }
  Frame out;
  out.timestamp_index = frame.timestamp_index;
  out.joints.reserve(cfg.selected_joints.size());
  for (int idx : cfg.selected_joints) {
    check_index(frame, idx, "selected joint");
    out.joints.push_back(frame.joints[idx]);
  }
  return out;
}

Frame preprocess_frame(const Frame& frame, const PreprocessConfig& cfg) {
  Frame f = translate_hip_to_origin(frame, cfg);
  f = align_shoulders(f, cfg);
  f = remove_scale(f, cfg);
  return select_joints(f, cfg);
}

Sequence preprocess(const Sequence& seq, const PreprocessConfig& cfg) {
  Sequence out = seq;
  out.frames.clear();
  out.frames.reserve(seq.frames.size());
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    try {
      out.frames.push_back(preprocess_frame(seq.frames[i], cfg));
    } catch (const SchemaError& e) {
      throw SchemaError(frame_context(i) + e.what());
    } catch (const DegenerateOrientationError& e) {
      throw DegenerateOrientationError(frame_context(i) + e.what());
    } catch (const DegenerateSkeletonError& e) {
      throw DegenerateSkeletonError(frame_context(i) + e.what());
    }
  }
  return out;
}

Vector vectorize(const Frame& frame) {
  const Eigen::Index J = static_cast<Eigen::Index>(frame.joints.size());
  Vector v(3 * J);
  for (Eigen::Index l = 0; l < J; ++l) {
    v[l] = frame.joints[l].x;
    v[J + l] = frame.joints[l].y;
    v[2 * J + l] = frame.joints[l].z;
  }
  return v;
}

Frame devectorize(const Vector& v, long timestamp_index) {
  if (v.size() == 0 || v.size() % 3 != 0) {
    throw InvalidDimensionError(
        "devectorize: vector length must be a positive multiple of 3");
  }
  const Eigen::Index J = v.size() / 3;
  Frame out;
  out.timestamp_index = timestamp_index;
  out.joints.resize(J);
  for (Eigen::Index l = 0; l < J; ++l) {
    out.joints[l] = Joint3D{v[l], v[J + l], v[2 * J + l]};
  }
  return out;
}

}  // namespace roweisposes
