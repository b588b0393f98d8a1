#pragma once

#include <string>

#include "voxnav/encoder.hpp"
#include "voxnav/mlt.hpp"
#include "voxnav/sim.hpp"
#include "voxnav/tensor.hpp"

// Weight serialization. Tensor names mirror the seeded parameter streams
// ("encoder.level0.layer2.da.w_offset", "policy.state.layer1.wq", ...), so a
// dumped file documents itself and loads back into the same structures.
// Values are float32 on disk; a load/save cycle is bit-stable after the first
// narrowing.

namespace voxnav {

namespace detail {

inline void put_matrix(TensorFile& f, const std::string& name, const Eigen::MatrixXd& m) {
  f.tensors.push_back(tensor_from_matrix(name, m));
}

inline void put_vector(TensorFile& f, const std::string& name, const Eigen::VectorXd& v) {
  f.tensors.push_back(tensor_from_vector(name, v));
}

inline void put_scalar(TensorFile& f, const std::string& name, double v) {
  Eigen::VectorXd one(1);
  one[0] = v;
  put_vector(f, name, one);
}

inline double get_scalar(const TensorFile& f, const std::string& name) {
  const Eigen::VectorXd v = f.find(name).vector();
  if (v.size() != 1) throw std::runtime_error("tensor " + name + " is not a scalar");
  return v[0];
}

}  // namespace detail

inline void append_transformer_tensors(TensorFile& f, const std::string& prefix,
                                       const TransformerParams& p) {
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const std::string lp = prefix + ".layer" + std::to_string(l) + ".";
    const TransformerLayerParams& layer = p.layers[l];
    detail::put_matrix(f, lp + "wq", layer.attn.wq);
    detail::put_vector(f, lp + "bq", layer.attn.bq);
    detail::put_matrix(f, lp + "wk", layer.attn.wk);
    detail::put_vector(f, lp + "bk", layer.attn.bk);
    detail::put_matrix(f, lp + "wv", layer.attn.wv);
    detail::put_vector(f, lp + "bv", layer.attn.bv);
    detail::put_matrix(f, lp + "wo", layer.attn.wo);
    detail::put_vector(f, lp + "bo", layer.attn.bo);
    detail::put_vector(f, lp + "ln1.gamma", layer.ln1.gamma);
    detail::put_vector(f, lp + "ln1.beta", layer.ln1.beta);
    detail::put_matrix(f, lp + "w1", layer.w1);
    detail::put_vector(f, lp + "b1", layer.b1);
    detail::put_matrix(f, lp + "w2", layer.w2);
    detail::put_vector(f, lp + "b2", layer.b2);
    detail::put_vector(f, lp + "ln2.gamma", layer.ln2.gamma);
    detail::put_vector(f, lp + "ln2.beta", layer.ln2.beta);
  }
}

/// Reads layers until the numbering stops; at least one layer must exist.
inline TransformerParams transformer_from_tensors(const TensorFile& f, const std::string& prefix) {
  TransformerParams p;
  for (int l = 0;; ++l) {
    const std::string lp = prefix + ".layer" + std::to_string(l) + ".";
    if (!f.contains(lp + "wq")) break;
    TransformerLayerParams layer;
    layer.attn.wq = f.find(lp + "wq").matrix();
    layer.attn.bq = f.find(lp + "bq").vector();
    layer.attn.wk = f.find(lp + "wk").matrix();
    layer.attn.bk = f.find(lp + "bk").vector();
    layer.attn.wv = f.find(lp + "wv").matrix();
    layer.attn.bv = f.find(lp + "bv").vector();
    layer.attn.wo = f.find(lp + "wo").matrix();
    layer.attn.bo = f.find(lp + "bo").vector();
    layer.ln1.gamma = f.find(lp + "ln1.gamma").vector();
    layer.ln1.beta = f.find(lp + "ln1.beta").vector();
    layer.w1 = f.find(lp + "w1").matrix();
    layer.b1 = f.find(lp + "b1").vector();
    layer.w2 = f.find(lp + "w2").matrix();
    layer.b2 = f.find(lp + "b2").vector();
    layer.ln2.gamma = f.find(lp + "ln2.gamma").vector();
    layer.ln2.beta = f.find(lp + "ln2.beta").vector();
    p.layers.push_back(std::move(layer));
  }
  if (p.layers.empty())
    throw std::runtime_error("tensor file has no transformer layers under " + prefix);
  return p;
}

inline void append_deformable_tensors(TensorFile& f, const std::string& prefix,
                                      const DeformableParams& p) {
  detail::put_matrix(f, prefix + ".w_offset", p.w_offset);
  detail::put_vector(f, prefix + ".b_offset", p.b_offset);
  detail::put_matrix(f, prefix + ".w_logit", p.w_logit);
  detail::put_vector(f, prefix + ".b_logit", p.b_logit);
  detail::put_matrix(f, prefix + ".w_value", p.w_value);
  detail::put_vector(f, prefix + ".b_value", p.b_value);
  detail::put_matrix(f, prefix + ".w_out", p.w_out);
  detail::put_vector(f, prefix + ".b_out", p.b_out);
}

inline DeformableParams deformable_from_tensors(const TensorFile& f, const std::string& prefix,
                                                const EncoderConfig& cfg) {
  DeformableParams p;
  p.heads = cfg.heads;
  p.samples = cfg.samples;
  p.head_dim = cfg.head_dim;
  p.w_offset = f.find(prefix + ".w_offset").matrix();
  p.b_offset = f.find(prefix + ".b_offset").vector();
  p.w_logit = f.find(prefix + ".w_logit").matrix();
  p.b_logit = f.find(prefix + ".b_logit").vector();
  p.w_value = f.find(prefix + ".w_value").matrix();
  p.b_value = f.find(prefix + ".b_value").vector();
  p.w_out = f.find(prefix + ".w_out").matrix();
  p.b_out = f.find(prefix + ".b_out").vector();
  p.validate(cfg.d_model, cfg.d_input);
  return p;
}

inline void append_encoder_tensors(TensorFile& f, const EncoderParams& p) {
  detail::put_vector(f, "encoder.initial_query", p.initial_query);
  for (size_t level = 0; level < p.levels.size(); ++level)
    for (size_t l = 0; l < p.levels[level].size(); ++l) {
      const std::string prefix =
          "encoder.level" + std::to_string(level) + ".layer" + std::to_string(l);
      const CvaParams& c = p.levels[level][l];
      append_deformable_tensors(f, prefix + ".da", c.da);
      detail::put_matrix(f, prefix + ".ffn.w1", c.w1);
      detail::put_vector(f, prefix + ".ffn.b1", c.b1);
      detail::put_matrix(f, prefix + ".ffn.w2", c.w2);
      detail::put_vector(f, prefix + ".ffn.b2", c.b2);
    }
  for (size_t u = 0; u < p.deconvs.size(); ++u) {
    const std::string prefix = "encoder.up" + std::to_string(u);
    for (int t = 0; t < 8; ++t)
      detail::put_matrix(f, prefix + ".tap" + std::to_string(t), p.deconvs[u].taps[t]);
    detail::put_vector(f, prefix + ".bias", p.deconvs[u].bias);
  }
}

/// The config supplies the structure (level count, layers per level, head
/// split); every named tensor must be present.
inline EncoderParams encoder_from_tensors(const TensorFile& f, const EncoderConfig& cfg) {
  cfg.validate();
  EncoderParams p;
  p.initial_query = f.find("encoder.initial_query").vector();
  for (int level = 0; level < cfg.levels; ++level) {
    std::vector<CvaParams> layers;
    for (int l = 0; l < cfg.layers[static_cast<size_t>(level)]; ++l) {
      const std::string prefix =
          "encoder.level" + std::to_string(level) + ".layer" + std::to_string(l);
      CvaParams c;
      c.da = deformable_from_tensors(f, prefix + ".da", cfg);
      c.w1 = f.find(prefix + ".ffn.w1").matrix();
      c.b1 = f.find(prefix + ".ffn.b1").vector();
      c.w2 = f.find(prefix + ".ffn.w2").matrix();
      c.b2 = f.find(prefix + ".ffn.b2").vector();
      layers.push_back(std::move(c));
    }
    p.levels.push_back(std::move(layers));
  }
  for (int u = 0; u + 1 < cfg.levels; ++u) {
    const std::string prefix = "encoder.up" + std::to_string(u);
    DeconvParams d;
    for (int t = 0; t < 8; ++t) d.taps[t] = f.find(prefix + ".tap" + std::to_string(t)).matrix();
    d.bias = f.find(prefix + ".bias").vector();
    p.deconvs.push_back(std::move(d));
  }
  return p;
}

inline TensorFile tensors_from_agent(const AgentParams& a) {
  TensorFile f;
  append_encoder_tensors(f, a.encoder);
  append_transformer_tensors(f, "policy.state", a.state_mlt);
  detail::put_vector(f, "policy.state.head.w", a.state_head_w);
  detail::put_scalar(f, "policy.state.head.b", a.state_head_b);
  append_transformer_tensors(f, "policy.global", a.global_mlt);
  detail::put_vector(f, "policy.global.head.w", a.global_head_w);
  detail::put_scalar(f, "policy.global.head.b", a.global_head_b);
  return f;
}

/// Weights from the file; run-time knobs (height groups, fusion weight,
/// feature-map size, backbone stream) from the caller's agent template.
inline AgentParams agent_from_tensors(const TensorFile& f, const AgentParams& like) {
  AgentParams a = like;
  a.encoder = encoder_from_tensors(f, like.encoder_config);
  a.state_mlt = transformer_from_tensors(f, "policy.state");
  a.state_head_w = f.find("policy.state.head.w").vector();
  a.state_head_b = detail::get_scalar(f, "policy.state.head.b");
  a.global_mlt = transformer_from_tensors(f, "policy.global");
  a.global_head_w = f.find("policy.global.head.w").vector();
  a.global_head_b = detail::get_scalar(f, "policy.global.head.b");
  return a;
}

}  // namespace voxnav
