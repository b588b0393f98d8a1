#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxnav/rng.hpp"
#include "voxnav/tensor.hpp"

// Small post-norm transformer used by the state-estimation and global-action
// heads: single-head self-attention, two-layer ReLU feed-forward with hidden
// width 2*D, layer norm after each residual. Tokens are rows; no positional
// encodings (callers that need order must encode it in the tokens).

namespace voxnav {

struct LayerNormParams {
  Eigen::VectorXd gamma, beta;

  static LayerNormParams identity(int d) {
    return {Eigen::VectorXd::Ones(d), Eigen::VectorXd::Zero(d)};
  }
};

inline constexpr double kLayerNormEps = 1e-5;

inline Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const LayerNormParams& p) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    out.row(r) =
        ((x.row(r).array() - mean) * inv * p.gamma.transpose().array()) + p.beta.transpose().array();
  }
  return out;
}

/// Row-wise softmax with the usual max-shift for stability.
inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Eigen::ArrayXd shifted = logits.row(r).array() - logits.row(r).maxCoeff();
    const Eigen::ArrayXd e = shifted.exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  return softmax_rows(logits.transpose()).transpose();
}

struct AttentionParams {
  Eigen::MatrixXd wq, wk, wv, wo;  // each D x D, applied as x * W^T
  Eigen::VectorXd bq, bk, bv, bo;
};

struct TransformerLayerParams {
  AttentionParams attn;
  LayerNormParams ln1;
  Eigen::MatrixXd w1;  // (2D x D) feed-forward in
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // (D x 2D) feed-forward out
  Eigen::VectorXd b2;
  LayerNormParams ln2;
};

struct TransformerParams {
  std::vector<TransformerLayerParams> layers;

  int width() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().attn.wq.rows());
  }
};

namespace detail {

inline Eigen::MatrixXd affine_rows(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                                   const Eigen::VectorXd& b) {
  return (x * w.transpose()).rowwise() + b.transpose();
}

}  // namespace detail

/// Single-head scaled dot-product self-attention over token rows.
inline Eigen::MatrixXd self_attention(const Eigen::MatrixXd& x, const AttentionParams& p) {
  const Eigen::MatrixXd q = detail::affine_rows(x, p.wq, p.bq);
  const Eigen::MatrixXd k = detail::affine_rows(x, p.wk, p.bk);
  const Eigen::MatrixXd v = detail::affine_rows(x, p.wv, p.bv);
  const Eigen::MatrixXd scores = q * k.transpose() / std::sqrt(static_cast<double>(x.cols()));
  return detail::affine_rows(softmax_rows(scores) * v, p.wo, p.bo);
}

inline Eigen::MatrixXd apply_transformer(Eigen::MatrixXd x, const TransformerParams& p) {
  for (const auto& layer : p.layers) {
    x = layer_norm(x + self_attention(x, layer.attn), layer.ln1);
    const Eigen::MatrixXd hidden =
        detail::affine_rows(x, layer.w1, layer.b1).cwiseMax(0.0);
    x = layer_norm(x + detail::affine_rows(hidden, layer.w2, layer.b2), layer.ln2);
  }
  return x;
}

inline TransformerParams seeded_transformer_params(int d, int n_layers, uint64_t seed,
                                                   const std::string& prefix) {
  TransformerParams p;
  auto mat = [&](const std::string& name, int rows, int cols) {
    return seeded_tensor(prefix + "." + name, {rows, cols}, seed).matrix();
  };
  p.layers.reserve(n_layers);
  for (int l = 0; l < n_layers; ++l) {
    const std::string lp = "layer" + std::to_string(l);
    TransformerLayerParams layer;
    layer.attn.wq = mat(lp + ".wq", d, d);
    layer.attn.wk = mat(lp + ".wk", d, d);
    layer.attn.wv = mat(lp + ".wv", d, d);
    layer.attn.wo = mat(lp + ".wo", d, d);
    layer.attn.bq = Eigen::VectorXd::Zero(d);
    layer.attn.bk = Eigen::VectorXd::Zero(d);
    layer.attn.bv = Eigen::VectorXd::Zero(d);
    layer.attn.bo = Eigen::VectorXd::Zero(d);
    layer.ln1 = LayerNormParams::identity(d);
    layer.w1 = mat(lp + ".w1", 2 * d, d);
    layer.b1 = Eigen::VectorXd::Zero(2 * d);
    layer.w2 = mat(lp + ".w2", d, 2 * d);
    layer.b2 = Eigen::VectorXd::Zero(d);
    layer.ln2 = LayerNormParams::identity(d);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

}  // namespace voxnav
