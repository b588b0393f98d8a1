#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxnav/geometry.hpp"
#include "voxnav/rng.hpp"
#include "voxnav/tensor.hpp"

// Volumetric environment encoder: 3D query cells attend into multi-view 2D
// feature maps through camera projection (cross-view deformable attention),
// then the volume is grown coarse-to-fine by learned 2x upsampling with a
// refinement pass per level.

namespace voxnav {

/// A 2D feature map associated with one camera. Rows of `data` are pixels in
/// row-major order (y * width + x), columns are channels. `scale` converts
/// image pixels to feature-map pixels (feature width = image width * scale).
struct ViewFeature {
  Camera camera;
  int height = 0, width = 0;
  double scale = 1.0;
  Eigen::MatrixXd data;

  void validate() const {
    if (height < 1 || width < 1) throw std::invalid_argument("view feature: empty map");
    if (data.rows() != static_cast<Eigen::Index>(height) * width)
      throw std::invalid_argument("view feature: data rows != height*width");
    if (scale <= 0) throw std::invalid_argument("view feature: scale must be positive");
  }
};

/// Feature-filled voxel volume. Rows of `data` follow GridSpec::flat_index.
struct VolumeFeature {
  GridSpec spec;
  Eigen::MatrixXd data;  // cells x channels

  int channels() const { return static_cast<int>(data.cols()); }
};

/// Deterministic stand-in for backbone features: every entry is a pure
/// function of (seed, node, view, pixel, channel).
inline ViewFeature procedural_view_features(uint64_t seed, uint32_t node, uint32_t view,
                                            const Camera& camera, int channels, int fh, int fw) {
  ViewFeature vf;
  vf.camera = camera;
  vf.height = fh;
  vf.width = fw;
  vf.scale = static_cast<double>(fw) / camera.width;
  vf.data.resize(static_cast<Eigen::Index>(fh) * fw, channels);
  const uint64_t base = mix_u64(seed) ^ (uint64_t{node} << 32 | view);
  for (int y = 0; y < fh; ++y)
    for (int x = 0; x < fw; ++x)
      for (int c = 0; c < channels; ++c)
        vf.data(static_cast<Eigen::Index>(y) * fw + x, c) =
            hash_unit(base, static_cast<uint64_t>(y), static_cast<uint64_t>(x),
                      static_cast<uint64_t>(c));
  return vf;
}

/// Bilinear lookup at continuous feature-map coordinates, clamped to the
/// border (so out-of-map samples read edge values rather than zeros).
inline Eigen::VectorXd bilinear_sample(const ViewFeature& view, double fx, double fy) {
  const auto clampf = [](double v, double hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  fx = clampf(fx, view.width - 1.0);
  fy = clampf(fy, view.height - 1.0);
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, view.width - 1), y1 = std::min(y0 + 1, view.height - 1);
  const double ax = fx - x0, ay = fy - y0;
  const auto row = [&](int y, int x) { return view.data.row(static_cast<Eigen::Index>(y) * view.width + x); };
  return ((1 - ax) * (1 - ay) * row(y0, x0) + ax * (1 - ay) * row(y0, x1) +
          (1 - ax) * ay * row(y1, x0) + ax * ay * row(y1, x1))
      .transpose();
}

// --- deformable attention --------------------------------------------------

struct DeformableParams {
  int heads = 1;
  int samples = 1;
  int head_dim = 1;
  // All maps act on the query (offsets and weights are query-conditioned):
  Eigen::MatrixXd w_offset;  // (heads*samples*2) x D
  Eigen::VectorXd b_offset;
  Eigen::MatrixXd w_logit;  // (heads*samples) x D
  Eigen::VectorXd b_logit;
  Eigen::MatrixXd w_value;  // (heads*head_dim) x D_in, per-head row blocks
  Eigen::VectorXd b_value;
  Eigen::MatrixXd w_out;  // D x (heads*head_dim)
  Eigen::VectorXd b_out;

  void validate(int d_model, int d_input) const {
    if (heads < 1 || samples < 1 || head_dim < 1)
      throw std::invalid_argument("deformable attention: heads, samples, head_dim must be >= 1");
    auto expect = [](const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c, const char* what) {
      if (m.rows() != r || m.cols() != c)
        throw std::invalid_argument(std::string("deformable attention: bad shape for ") + what);
    };
    expect(w_offset, static_cast<Eigen::Index>(heads) * samples * 2, d_model, "w_offset");
    expect(w_logit, static_cast<Eigen::Index>(heads) * samples, d_model, "w_logit");
    expect(w_value, static_cast<Eigen::Index>(heads) * head_dim, d_input, "w_value");
    expect(w_out, d_model, static_cast<Eigen::Index>(heads) * head_dim, "w_out");
  }
};

/// One query attending into one view. The reference point is projected into
/// the image, mapped to feature coordinates, and each head reads `samples`
/// offset taps whose weights are a softmax over the taps of that head.
/// Precondition: the reference point projects visibly into the camera.
inline Eigen::VectorXd deformable_attention(const Eigen::VectorXd& query, const Vec3& reference,
                                            const ViewFeature& view, const DeformableParams& p) {
  const Projection proj = project_to_camera(reference, view.camera);
  if (!proj.visible)
    throw std::invalid_argument("deformable_attention: reference point not visible in view");
  const double bx = proj.u * view.scale - 0.5;
  const double by = proj.v * view.scale - 0.5;

  const Eigen::VectorXd offsets = p.w_offset * query + p.b_offset;
  const Eigen::VectorXd logits = p.w_logit * query + p.b_logit;

  Eigen::VectorXd pooled(p.heads * p.head_dim);
  for (int m = 0; m < p.heads; ++m) {
    // Tap weights: softmax over this head's samples.
    Eigen::VectorXd w = logits.segment(m * p.samples, p.samples);
    const Eigen::ArrayXd e = (w.array() - w.maxCoeff()).exp();
    w = (e / e.sum()).matrix();

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p.head_dim);
    for (int s = 0; s < p.samples; ++s) {
      const int o = (m * p.samples + s) * 2;
      const Eigen::VectorXd feat = bilinear_sample(view, bx + offsets[o], by + offsets[o + 1]);
      acc += w[s] * (p.w_value.middleRows(m * p.head_dim, p.head_dim) * feat +
                     p.b_value.segment(m * p.head_dim, p.head_dim));
    }
    pooled.segment(m * p.head_dim, p.head_dim) = acc;
  }
  return p.w_out * pooled + p.b_out;
}

/// One cross-view aggregation layer: per cell, average the deformable reads
/// over the views that see the cell center, add as a residual, then apply a
/// residual two-layer ReLU feed-forward. Cells visible in no view pass
/// through the attention stage unchanged.
struct CvaParams {
  DeformableParams da;
  Eigen::MatrixXd w1;  // hidden x D
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // D x hidden
  Eigen::VectorXd b2;
};

inline void cross_view_aggregate(VolumeFeature& vol, const std::vector<ViewFeature>& views,
                                 const CvaParams& p) {
  const size_t n = vol.spec.cell_count();
  for (size_t i = 0; i < n; ++i) {
    const Vec3 ref = vol.spec.cell_center(vol.spec.from_flat(i));
    const Eigen::VectorXd q = vol.data.row(static_cast<Eigen::Index>(i)).transpose();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(q.size());
    int visible = 0;
    for (const auto& view : views) {
      if (!project_to_camera(ref, view.camera).visible) continue;
      sum += deformable_attention(q, ref, view, p.da);
      ++visible;
    }
    if (visible > 0)
      vol.data.row(static_cast<Eigen::Index>(i)) += (sum / visible).transpose();
  }
  // Feed-forward refinement, applied uniformly.
  for (Eigen::Index r = 0; r < vol.data.rows(); ++r) {
    const Eigen::VectorXd x = vol.data.row(r).transpose();
    const Eigen::VectorXd hidden = (p.w1 * x + p.b1).cwiseMax(0.0);
    vol.data.row(r) += (p.w2 * hidden + p.b2).transpose();
  }
}

// --- coarse-to-fine upsampling ----------------------------------------------

/// Transposed 3D convolution, kernel 2 stride 2: every output cell receives
/// exactly one input contribution, through the tap matching its parity.
/// Tap index = ix*4 + iy*2 + iz over the (x,y,z) parity bits.
struct DeconvParams {
  std::array<Eigen::MatrixXd, 8> taps;  // each D_out x D_in
  Eigen::VectorXd bias;                 // D_out
};

inline GridSpec halved_resolution(const GridSpec& s) {
  return GridSpec(s.x_min, s.x_max, s.y_min, s.y_max, s.z_min, s.z_max, s.resolution / 2);
}

inline VolumeFeature upsample_deconv(const VolumeFeature& in, const DeconvParams& p) {
  VolumeFeature out;
  out.spec = halved_resolution(in.spec);
  const Eigen::Index d_out = p.taps[0].rows();
  out.data.resize(static_cast<Eigen::Index>(out.spec.cell_count()), d_out);
  const int X = in.spec.dim_x(), Y = in.spec.dim_y(), Z = in.spec.dim_z();
  for (int x = 0; x < X; ++x)
    for (int y = 0; y < Y; ++y)
      for (int z = 0; z < Z; ++z) {
        const Eigen::VectorXd v =
            in.data.row(static_cast<Eigen::Index>(in.spec.flat_index({x, y, z}))).transpose();
        for (int t = 0; t < 8; ++t) {
          const CellIndex oc{2 * x + (t >> 2), 2 * y + ((t >> 1) & 1), 2 * z + (t & 1)};
          out.data.row(static_cast<Eigen::Index>(out.spec.flat_index(oc))) =
              (p.taps[t] * v + p.bias).transpose();
        }
      }
  return out;
}

/// Parameter-free alternative: trilinear interpolation of the coarse volume
/// at the fine cell centers, clamped at the borders. Channel count is kept.
inline VolumeFeature upsample_trilinear(const VolumeFeature& in) {
  VolumeFeature out;
  out.spec = halved_resolution(in.spec);
  out.data.resize(static_cast<Eigen::Index>(out.spec.cell_count()), in.data.cols());
  const int X = in.spec.dim_x(), Y = in.spec.dim_y(), Z = in.spec.dim_z();
  auto axis_blend = [](double center, double lo, double res, int dim) {
    const double t = (center - lo) / res - 0.5;  // continuous cell coordinate
    const double c = t < 0 ? 0 : (t > dim - 1 ? dim - 1 : t);
    const int i0 = static_cast<int>(std::floor(c));
    const int i1 = std::min(i0 + 1, dim - 1);
    return std::tuple<int, int, double>(i0, i1, c - i0);
  };
  const size_t n = out.spec.cell_count();
  for (size_t i = 0; i < n; ++i) {
    const Vec3 c = out.spec.cell_center(out.spec.from_flat(i));
    const auto [x0, x1, ax] = axis_blend(c.x(), in.spec.x_min, in.spec.resolution, X);
    const auto [y0, y1, ay] = axis_blend(c.y(), in.spec.y_min, in.spec.resolution, Y);
    const auto [z0, z1, az] = axis_blend(c.z(), in.spec.z_min, in.spec.resolution, Z);
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(in.data.cols());
    for (int bx = 0; bx < 2; ++bx)
      for (int by = 0; by < 2; ++by)
        for (int bz = 0; bz < 2; ++bz) {
          const double w = (bx ? ax : 1 - ax) * (by ? ay : 1 - ay) * (bz ? az : 1 - az);
          if (w == 0) continue;
          const CellIndex cc{bx ? x1 : x0, by ? y1 : y0, bz ? z1 : z0};
          acc += w * in.data.row(static_cast<Eigen::Index>(in.spec.flat_index(cc)));
        }
    out.data.row(static_cast<Eigen::Index>(i)) = acc;
  }
  return out;
}

// --- full encoder ------------------------------------------------------------

struct EncoderConfig {
  int d_model = 768;  // volume feature width
  int d_input = 768;  // view feature channels
  int heads = 8;
  int samples = 6;
  int head_dim = 96;
  int levels = 4;
  int base_x = 15, base_y = 15, base_z = 4;  // coarsest query grid
  double fine_resolution = 0.1;              // finest level, meters per cell
  double z_below = 1.2;                      // query volume extent below the viewpoint
  std::string upsample = "deconv";           // or "trilinear"
  std::vector<int> layers = {6, 1, 1, 1};    // aggregation layers per level

  double level_resolution(int level) const {
    return fine_resolution * static_cast<double>(1 << (levels - 1 - level));
  }

  void validate() const {
    if (levels < 1) throw std::invalid_argument("encoder config: levels must be >= 1");
    if (static_cast<int>(layers.size()) != levels)
      throw std::invalid_argument("encoder config: one layer count per level");
    if (upsample != "deconv" && upsample != "trilinear")
      throw std::invalid_argument("encoder config: unknown upsample mode " + upsample);
    if (d_model < 1 || d_input < 1 || base_x < 1 || base_y < 1 || base_z < 1 ||
        fine_resolution <= 0)
      throw std::invalid_argument("encoder config: dimensions must be positive");
  }
};

/// Egocentric query grid at a pyramid level: horizontal extent centered on
/// the viewpoint, vertical extent split `z_below` under / the rest above.
inline GridSpec query_grid(const Vec3& viewpoint, int level, const EncoderConfig& cfg) {
  const double coarse = cfg.level_resolution(0);
  const double hx = cfg.base_x * coarse / 2, hy = cfg.base_y * coarse / 2;
  const double z_extent = cfg.base_z * coarse;
  return GridSpec(viewpoint.x() - hx, viewpoint.x() + hx, viewpoint.y() - hy, viewpoint.y() + hy,
                  viewpoint.z() - cfg.z_below, viewpoint.z() + (z_extent - cfg.z_below),
                  cfg.level_resolution(level));
}

struct EncoderParams {
  Eigen::VectorXd initial_query;            // shared across cells
  std::vector<std::vector<CvaParams>> levels;  // [level][layer]
  std::vector<DeconvParams> deconvs;        // levels-1 of them
};

inline std::vector<VolumeFeature> encode_ver(const std::vector<ViewFeature>& views,
                                             const Vec3& viewpoint, const EncoderParams& params,
                                             const EncoderConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(params.levels.size()) != cfg.levels)
    throw std::invalid_argument("encode_ver: params do not match config level count");
  for (const auto& v : views) v.validate();

  VolumeFeature vol;
  vol.spec = query_grid(viewpoint, 0, cfg);
  vol.data = params.initial_query.transpose().replicate(
      static_cast<Eigen::Index>(vol.spec.cell_count()), 1);

  std::vector<VolumeFeature> pyramid;
  for (int level = 0; level < cfg.levels; ++level) {
    if (level > 0) {
      vol = cfg.upsample == "deconv" ? upsample_deconv(vol, params.deconvs[level - 1])
                                     : upsample_trilinear(vol);
    }
    for (const auto& layer : params.levels[level]) cross_view_aggregate(vol, views, layer);
    pyramid.push_back(vol);
  }
  return pyramid;
}

// --- parameter construction and serialization --------------------------------

inline DeformableParams seeded_deformable_params(const EncoderConfig& cfg, uint64_t seed,
                                                 const std::string& prefix) {
  DeformableParams p;
  p.heads = cfg.heads;
  p.samples = cfg.samples;
  p.head_dim = cfg.head_dim;
  auto mat = [&](const char* name, int r, int c) {
    return seeded_tensor(prefix + "." + name, {r, c}, seed).matrix();
  };
  p.w_offset = mat("w_offset", cfg.heads * cfg.samples * 2, cfg.d_model);
  p.b_offset = Eigen::VectorXd::Zero(cfg.heads * cfg.samples * 2);
  p.w_logit = mat("w_logit", cfg.heads * cfg.samples, cfg.d_model);
  p.b_logit = Eigen::VectorXd::Zero(cfg.heads * cfg.samples);
  p.w_value = mat("w_value", cfg.heads * cfg.head_dim, cfg.d_input);
  p.b_value = Eigen::VectorXd::Zero(cfg.heads * cfg.head_dim);
  p.w_out = mat("w_out", cfg.d_model, cfg.heads * cfg.head_dim);
  p.b_out = Eigen::VectorXd::Zero(cfg.d_model);
  return p;
}

inline EncoderParams seeded_encoder_params(const EncoderConfig& cfg, uint64_t seed) {
  EncoderParams p;
  Rng q_rng(stream_seed(seed, "encoder.initial_query"));
  p.initial_query.resize(cfg.d_model);
  for (int i = 0; i < cfg.d_model; ++i) p.initial_query[i] = q_rng.normal() * 0.05;
  for (int level = 0; level < cfg.levels; ++level) {
    std::vector<CvaParams> layers;
    for (int l = 0; l < cfg.layers[level]; ++l) {
      const std::string prefix =
          "encoder.level" + std::to_string(level) + ".layer" + std::to_string(l);
      CvaParams c;
      c.da = seeded_deformable_params(cfg, seed, prefix + ".da");
      const int hidden = 2 * cfg.d_model;
      c.w1 = seeded_tensor(prefix + ".ffn.w1", {hidden, cfg.d_model}, seed).matrix();
      c.b1 = Eigen::VectorXd::Zero(hidden);
      c.w2 = seeded_tensor(prefix + ".ffn.w2", {cfg.d_model, hidden}, seed).matrix();
      c.b2 = Eigen::VectorXd::Zero(cfg.d_model);
      layers.push_back(std::move(c));
    }
    p.levels.push_back(std::move(layers));
  }
  for (int u = 0; u + 1 < cfg.levels; ++u) {
    DeconvParams d;
    const std::string prefix = "encoder.up" + std::to_string(u);
    for (int t = 0; t < 8; ++t)
      d.taps[t] = seeded_tensor(prefix + ".tap" + std::to_string(t), {cfg.d_model, cfg.d_model},
                                seed)
                      .matrix();
    d.bias = Eigen::VectorXd::Zero(cfg.d_model);
    p.deconvs.push_back(std::move(d));
  }
  return p;
}

}  // namespace voxnav
