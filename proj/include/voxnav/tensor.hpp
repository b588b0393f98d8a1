#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxnav/io_util.hpp"
#include "voxnav/rng.hpp"

// Named-tensor parameter files. Values are stored as float32 little-endian;
// everything computes in double, so loading widens and saving narrows.
// Multi-dimensional data is laid out row-major (last dimension fastest).

namespace voxnav {

inline constexpr uint32_t kTensorFormatVersion = 1;

struct Tensor {
  std::string name;
  std::vector<int64_t> dims;
  std::vector<float> data;

  int64_t size() const {
    return std::accumulate(dims.begin(), dims.end(), int64_t{1}, std::multiplies<int64_t>());
  }

  /// Two-dimensional tensors as an Eigen matrix (row-major data).
  Eigen::MatrixXd matrix() const {
    if (dims.size() != 2) throw std::runtime_error("tensor " + name + " is not a matrix");
    Eigen::MatrixXd m(dims[0], dims[1]);
    for (int64_t r = 0; r < dims[0]; ++r)
      for (int64_t c = 0; c < dims[1]; ++c) m(r, c) = data[static_cast<size_t>(r * dims[1] + c)];
    return m;
  }

  Eigen::VectorXd vector() const {
    if (dims.size() != 1) throw std::runtime_error("tensor " + name + " is not a vector");
    Eigen::VectorXd v(dims[0]);
    for (int64_t i = 0; i < dims[0]; ++i) v[i] = data[static_cast<size_t>(i)];
    return v;
  }
};

inline Tensor tensor_from_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  Tensor t;
  t.name = name;
  t.dims = {m.rows(), m.cols()};
  t.data.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(static_cast<float>(m(r, c)));
  return t;
}

inline Tensor tensor_from_vector(const std::string& name, const Eigen::VectorXd& v) {
  Tensor t;
  t.name = name;
  t.dims = {v.size()};
  t.data.reserve(static_cast<size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) t.data.push_back(static_cast<float>(v[i]));
  return t;
}

/// Reproducible pseudo-random weights: one independent stream per tensor
/// name, Gaussian entries at the given scale.
inline Tensor seeded_tensor(const std::string& name, std::vector<int64_t> dims, uint64_t seed,
                            double scale = 0.05) {
  Tensor t;
  t.name = name;
  t.dims = std::move(dims);
  Rng rng(stream_seed(seed, name));
  const int64_t n = t.size();
  t.data.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) t.data.push_back(static_cast<float>(rng.normal() * scale));
  return t;
}

struct TensorFile {
  std::vector<Tensor> tensors;

  const Tensor& find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return t;
    throw std::runtime_error("tensor file has no entry named " + name);
  }
  bool contains(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return true;
    return false;
  }
};

inline void save_tensors(const TensorFile& file, const std::filesystem::path& path) {
  auto os = open_out_binary(path);
  write_le(os, kTensorFormatVersion);
  write_le(os, static_cast<uint32_t>(file.tensors.size()));
  for (const auto& t : file.tensors) {
    write_string(os, t.name);
    write_le(os, static_cast<uint32_t>(t.dims.size()));
    for (int64_t d : t.dims) write_le(os, d);
    if (static_cast<int64_t>(t.data.size()) != t.size())
      io_fail("tensor " + t.name + " has inconsistent size");
    for (float v : t.data) write_le(os, v);
  }
  if (!os) io_fail("failed writing " + path.string());
}

inline TensorFile load_tensors(const std::filesystem::path& path) {
  auto is = open_in_binary(path);
  if (read_le<uint32_t>(is) != kTensorFormatVersion)
    io_fail("unsupported tensor format in " + path.string());
  TensorFile file;
  file.tensors.resize(read_le<uint32_t>(is));
  for (auto& t : file.tensors) {
    t.name = read_string(is);
    t.dims.resize(read_le<uint32_t>(is));
    for (int64_t& d : t.dims) {
      d = read_le<int64_t>(is);
      if (d <= 0) io_fail("tensor " + t.name + " has a non-positive dimension");
    }
    const int64_t n = t.size();
    t.data.resize(static_cast<size_t>(n));
    for (float& v : t.data) v = read_le<float>(is);
  }
  if (!is) io_fail("failed reading " + path.string());
  return file;
}

}  // namespace voxnav
