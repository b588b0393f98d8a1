#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "voxnav/boxes.hpp"
#include "voxnav/encoder.hpp"
#include "voxnav/mlt.hpp"
#include "voxnav/voxel.hpp"

// Per-cell prediction heads over volume features and their losses. The
// occupancy head classifies every cell into the semantic classes plus an
// explicit "free" bucket; unknown cells are excluded from the loss.

namespace voxnav {

inline constexpr int kFreeTargetIndex = kNumClasses;           // 16
inline constexpr int kOccupancyTargets = kNumClasses + 1;      // 16 classes + free

/// Training target index for a voxel label; -1 for unknown (not supervised).
inline int occupancy_target_index(uint16_t label) {
  if (label == kLabelFree) return kFreeTargetIndex;
  if (label == kLabelUnknown) return -1;
  if (label >= kNumClasses) throw std::invalid_argument("occupancy target: bad label");
  return label;
}

inline uint16_t occupancy_label_from_index(int index) {
  if (index == kFreeTargetIndex) return kLabelFree;
  if (index < 0 || index > kFreeTargetIndex)
    throw std::invalid_argument("occupancy label: bad index");
  return static_cast<uint16_t>(index);
}

struct OccupancyHead {
  Eigen::MatrixXd w;  // kOccupancyTargets x D
  Eigen::VectorXd b;

  Eigen::VectorXd logits(const Eigen::VectorXd& feature) const { return w * feature + b; }
};

/// Argmax decode of a feature volume into a label grid.
inline VoxelGrid predict_occupancy(const VolumeFeature& vol, const OccupancyHead& head) {
  VoxelGrid out(vol.spec);
  const size_t n = vol.spec.cell_count();
  for (size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd l = head.logits(vol.data.row(static_cast<Eigen::Index>(i)).transpose());
    Eigen::Index best;
    l.maxCoeff(&best);
    out.labels[i] = occupancy_label_from_index(static_cast<int>(best));
  }
  return out;
}

/// Focal loss over soft targets. Both arguments are same-length vectors of
/// per-class probabilities; each class contributes
///   -alpha * (1 - p_t)^gamma * log(p_t)  with  p_t = 1 - |p - y|,
/// which reduces to the usual hard-label focal pair when y is one-hot.
inline double soft_focal_loss(const Eigen::VectorXd& p, const Eigen::VectorXd& y,
                              double alpha = 0.25, double gamma = 2.0) {
  if (p.size() != y.size()) throw std::invalid_argument("focal loss: size mismatch");
  constexpr double kFloor = 1e-12;  // keeps log finite when p_t hits 0
  double loss = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pt = std::max(kFloor, 1.0 - std::abs(p[i] - y[i]));
    loss += -alpha * std::pow(1.0 - pt, gamma) * std::log(pt);
  }
  return loss;
}

/// Mean per-cell focal loss of the occupancy head against a label grid of
/// the same dimensions. Unknown cells are skipped; throws if nothing is
/// supervised.
inline double occupancy_loss(const VolumeFeature& vol, const OccupancyHead& head,
                             const VoxelGrid& target, double alpha = 0.25, double gamma = 2.0) {
  if (vol.spec.dim_x() != target.spec.dim_x() || vol.spec.dim_y() != target.spec.dim_y() ||
      vol.spec.dim_z() != target.spec.dim_z())
    throw std::invalid_argument("occupancy loss: prediction and target dimensions differ");
  double total = 0;
  size_t counted = 0;
  const size_t n = vol.spec.cell_count();
  for (size_t i = 0; i < n; ++i) {
    const int target_idx = occupancy_target_index(target.labels[i]);
    if (target_idx < 0) continue;
    const Eigen::VectorXd probs =
        softmax(head.logits(vol.data.row(static_cast<Eigen::Index>(i)).transpose()));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(kOccupancyTargets);
    y[target_idx] = 1.0;
    total += soft_focal_loss(probs, y, alpha, gamma);
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("occupancy loss: no supervised cells");
  return total / static_cast<double>(counted);
}

// --- auxiliary structure heads ----------------------------------------------

/// Room layouts as 7-vectors for regression: center, width, length, height,
/// rotation.
inline Eigen::VectorXd layout_parameters(const RoomLayout& r) {
  Eigen::VectorXd v(7);
  v << r.center.x(), r.center.y(), r.center.z(), r.width, r.length, r.height, r.rotation;
  return v;
}

inline RoomLayout layout_from_parameters(const Eigen::VectorXd& v) {
  if (v.size() != 7) throw std::invalid_argument("layout parameters: expected 7 values");
  RoomLayout r;
  r.center = Vec3(v[0], v[1], v[2]);
  r.width = v[3];
  r.length = v[4];
  r.height = v[5];
  r.rotation = v[6];
  return r;
}

/// Mean absolute error between predicted and reference layout parameters.
inline double layout_l1(const Eigen::VectorXd& predicted, const RoomLayout& reference) {
  return (predicted - layout_parameters(reference)).cwiseAbs().mean();
}

/// Pools the volume to a single feature (mean over cells) and regresses the
/// seven layout parameters. Diagnostic-scale head: one affine map.
struct LayoutHead {
  Eigen::MatrixXd w;  // 7 x D
  Eigen::VectorXd b;

  Eigen::VectorXd predict(const VolumeFeature& vol) const {
    const Eigen::VectorXd pooled = vol.data.colwise().mean().transpose();
    return w * pooled + b;
  }
};

/// Per-task training signal combination; defaults follow the occupancy /
/// layout / detection weighting used throughout.
struct TaskWeights {
  double occupancy = 2.0;
  double layout = 0.25;
  double detection = 0.25;
};

inline double combine_task_losses(double occupancy, double layout, double detection,
                                  const TaskWeights& w = {}) {
  return w.occupancy * occupancy + w.layout * layout + w.detection * detection;
}

}  // namespace voxnav
