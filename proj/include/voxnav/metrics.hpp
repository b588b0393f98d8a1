#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxnav/boxes.hpp"
#include "voxnav/geometry.hpp"
#include "voxnav/voxel.hpp"

// Evaluation measures: path efficiency and fidelity for navigation, overlap
// scores for occupancy grids, matching-based precision for detected boxes,
// and grounding success. Distances are Euclidean throughout; the success
// radius defaults to 3 m.

namespace voxnav {

inline constexpr double kSuccessRadius = 3.0;

// --- navigation -------------------------------------------------------------

inline double path_length(const std::vector<Vec3>& path) {
  if (path.empty()) throw std::invalid_argument("path_length: empty path");
  double total = 0;
  for (size_t i = 1; i < path.size(); ++i) total += (path[i] - path[i - 1]).norm();
  return total;
}

inline double point_to_path_distance(const Vec3& p, const std::vector<Vec3>& path) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : path) best = std::min(best, (p - q).norm());
  return best;
}

/// Distance from the path's endpoint to the nearest goal.
inline double navigation_error(const std::vector<Vec3>& path, const std::vector<Vec3>& goals) {
  if (path.empty() || goals.empty())
    throw std::invalid_argument("navigation_error: empty path or goals");
  return point_to_path_distance(path.back(), goals);
}

inline bool success(const std::vector<Vec3>& path, const std::vector<Vec3>& goals,
                    double radius = kSuccessRadius) {
  return navigation_error(path, goals) <= radius;
}

/// Oracle success: did the path ever come within the radius of a goal.
inline bool oracle_success(const std::vector<Vec3>& path, const std::vector<Vec3>& goals,
                           double radius = kSuccessRadius) {
  for (const auto& g : goals)
    if (point_to_path_distance(g, path) <= radius) return true;
  return false;
}

/// Success weighted by path length. `shortest` is the geodesic distance from
/// start to goal through the environment graph.
inline double spl(bool succeeded, double shortest, double traveled) {
  if (!succeeded) return 0;
  if (shortest <= 0) return 1;  // start on the goal: any travel is optimal-enough
  return shortest / std::max(traveled, shortest);
}

/// Dynamic time warping with unit steps and Euclidean node costs.
inline double dtw(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw: empty path");
  const size_t n = a.size(), m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0;
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (size_t j = 1; j <= m; ++j) {
      const double cost = (a[i - 1] - b[j - 1]).norm();
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline double ndtw(const std::vector<Vec3>& path, const std::vector<Vec3>& reference,
                   double radius = kSuccessRadius) {
  return std::exp(-dtw(path, reference) /
                  (static_cast<double>(reference.size()) * radius));
}

inline double sdtw(const std::vector<Vec3>& path, const std::vector<Vec3>& reference,
                   const std::vector<Vec3>& goals, double radius = kSuccessRadius) {
  return success(path, goals, radius) ? ndtw(path, reference, radius) : 0.0;
}

/// Coverage weighted by length score: how well the path covers the reference,
/// discounted by the length mismatch.
inline double cls(const std::vector<Vec3>& path, const std::vector<Vec3>& reference,
                  double radius = kSuccessRadius) {
  if (reference.empty()) throw std::invalid_argument("cls: empty reference");
  double pc = 0;
  for (const auto& r : reference) pc += std::exp(-point_to_path_distance(r, path) / radius);
  pc /= static_cast<double>(reference.size());
  const double pl_ref = path_length(reference), pl = path_length(path);
  const double ls = pl_ref / (pl_ref + std::abs(pl_ref - pl));
  // Degenerate single-point reference: fall back to pure coverage.
  return pl_ref > 0 ? pc * ls : pc;
}

// --- occupancy --------------------------------------------------------------

struct OccupancyScores {
  double binary_iou = 0;
  std::vector<double> class_iou;  // indexed by class id; -1 marks "not scored"
  double mean_iou = 0;
};

/// Grid overlap scores. Binary IoU treats any semantic label as occupied.
/// Per-class IoU runs over the real classes (void excluded); classes absent
/// from both grids are skipped by default or counted as perfect matches when
/// `count_absent_as_perfect` is set.
inline OccupancyScores occupancy_scores(const VoxelGrid& predicted, const VoxelGrid& truth,
                                        bool count_absent_as_perfect = false) {
  if (predicted.labels.size() != truth.labels.size())
    throw std::invalid_argument("occupancy_scores: grid sizes differ");
  OccupancyScores s;
  size_t bi = 0, bu = 0;
  std::vector<size_t> inter(kNumClasses, 0), uni(kNumClasses, 0);
  for (size_t i = 0; i < truth.labels.size(); ++i) {
    const uint16_t p = predicted.labels[i], t = truth.labels[i];
    const bool po = is_semantic(p), to = is_semantic(t);
    bi += po && to;
    bu += po || to;
    if (po) ++uni[p];
    if (to) ++uni[t];
    if (po && to && p == t) {
      ++inter[p];
      --uni[p];  // counted twice above
    }
  }
  s.binary_iou = bu == 0 ? 1.0 : static_cast<double>(bi) / static_cast<double>(bu);
  s.class_iou.assign(kNumClasses, -1.0);
  double total = 0;
  int counted = 0;
  for (uint16_t c = 1; c < kNumClasses; ++c) {
    if (uni[c] == 0) {
      if (count_absent_as_perfect) {
        s.class_iou[c] = 1.0;
        total += 1.0;
        ++counted;
      }
      continue;
    }
    s.class_iou[c] = static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    total += s.class_iou[c];
    ++counted;
  }
  s.mean_iou = counted == 0 ? 0.0 : total / counted;
  return s;
}

// --- detection ----------------------------------------------------------------

struct ScoredBox {
  LabeledBox box;
  double score = 0;
};

struct DetectionScores {
  std::vector<double> class_ap;  // indexed by class id; -1 marks "no truth"
  double mean_ap = 0;
  double recall = 0;  // matched fraction of all truth boxes
};

/// All-point interpolated average precision from a TP/FP sequence already
/// ordered by descending confidence.
inline double average_precision(const std::vector<bool>& is_tp, size_t n_truth) {
  if (n_truth == 0) throw std::invalid_argument("average_precision: no truth boxes");
  std::vector<double> precision, recall;
  size_t tp = 0;
  for (size_t i = 0; i < is_tp.size(); ++i) {
    tp += is_tp[i];
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_truth));
  }
  // Precision envelope, then sum over recall increments.
  for (size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0, prev_r = 0;
  for (size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_r) * precision[i];
    prev_r = recall[i];
  }
  return ap;
}

/// Greedy score-descending matching at an IoU threshold, per class. Each
/// prediction takes the unmatched truth box of its class with the highest
/// overlap; equal scores keep their input order.
inline DetectionScores detection_scores(const std::vector<ScoredBox>& predictions,
                                        const std::vector<LabeledBox>& truth,
                                        double iou_threshold = 0.5) {
  DetectionScores out;
  out.class_ap.assign(kNumClasses, -1.0);
  std::vector<bool> matched(truth.size(), false);
  size_t matched_total = 0;
  double ap_total = 0;
  int ap_classes = 0;
  for (uint16_t c = 1; c < kNumClasses; ++c) {
    std::vector<size_t> truth_idx;
    for (size_t i = 0; i < truth.size(); ++i)
      if (truth[i].class_id == c) truth_idx.push_back(i);
    std::vector<size_t> pred_idx;
    for (size_t i = 0; i < predictions.size(); ++i)
      if (predictions[i].box.class_id == c) pred_idx.push_back(i);
    if (truth_idx.empty()) continue;
    std::stable_sort(pred_idx.begin(), pred_idx.end(), [&](size_t a, size_t b) {
      return predictions[a].score > predictions[b].score;
    });
    std::vector<bool> is_tp;
    for (size_t pi : pred_idx) {
      double best_iou = 0;
      int best = -1;
      for (size_t ti : truth_idx) {
        if (matched[ti]) continue;
        const double iou = box_iou_3d(predictions[pi].box.geom, truth[ti].geom);
        if (iou > best_iou) {
          best_iou = iou;
          best = static_cast<int>(ti);
        }
      }
      if (best >= 0 && best_iou >= iou_threshold) {
        matched[static_cast<size_t>(best)] = true;
        ++matched_total;
        is_tp.push_back(true);
      } else {
        is_tp.push_back(false);
      }
    }
    out.class_ap[c] = average_precision(is_tp, truth_idx.size());
    ap_total += out.class_ap[c];
    ++ap_classes;
  }
  out.mean_ap = ap_classes == 0 ? 0.0 : ap_total / ap_classes;
  out.recall = truth.empty() ? 1.0
                             : static_cast<double>(matched_total) / static_cast<double>(truth.size());
  return out;
}

// --- grounding ----------------------------------------------------------------

inline bool remote_grounding_success(bool nav_success, int32_t predicted_object,
                                     int32_t goal_object) {
  return nav_success && goal_object >= 0 && predicted_object == goal_object;
}

inline double rgspl(bool grounding_success, double shortest, double traveled) {
  return spl(grounding_success, shortest, traveled);
}

// --- per-episode aggregation ----------------------------------------------------

struct EpisodeMetrics {
  std::string id;
  double tl = 0, ne = 0, spl = 0, ndtw = 0, sdtw = 0, cls = 0;
  bool sr = false, osr = false;
};

/// All navigation metrics of one walk against its reference path and goals.
inline EpisodeMetrics score_episode(const std::string& id, const std::vector<Vec3>& walk,
                                    const std::vector<Vec3>& reference,
                                    const std::vector<Vec3>& goals, double shortest,
                                    double radius = kSuccessRadius) {
  EpisodeMetrics m;
  m.id = id;
  m.tl = path_length(walk);
  m.ne = navigation_error(walk, goals);
  m.sr = m.ne <= radius;
  m.osr = oracle_success(walk, goals, radius);
  m.spl = spl(m.sr, shortest, m.tl);
  m.ndtw = ndtw(walk, reference, radius);
  m.sdtw = m.sr ? m.ndtw : 0.0;
  m.cls = cls(walk, reference, radius);
  return m;
}

/// Column means over many episodes; boolean columns become rates.
struct MetricSummary {
  double tl = 0, ne = 0, sr = 0, osr = 0, spl = 0, ndtw = 0, sdtw = 0, cls = 0;
};

inline MetricSummary summarize_metrics(const std::vector<EpisodeMetrics>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize_metrics: no episodes");
  MetricSummary s;
  for (const auto& r : rows) {
    s.tl += r.tl;
    s.ne += r.ne;
    s.sr += r.sr;
    s.osr += r.osr;
    s.spl += r.spl;
    s.ndtw += r.ndtw;
    s.sdtw += r.sdtw;
    s.cls += r.cls;
  }
  const double n = static_cast<double>(rows.size());
  s.tl /= n;
  s.ne /= n;
  s.sr /= n;
  s.osr /= n;
  s.spl /= n;
  s.ndtw /= n;
  s.sdtw /= n;
  s.cls /= n;
  return s;
}

}  // namespace voxnav
