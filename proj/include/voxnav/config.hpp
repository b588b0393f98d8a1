#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include "voxnav/annotate.hpp"
#include "voxnav/encoder.hpp"
#include "voxnav/io_util.hpp"

// Runtime configuration: a flat key=value text file with typed validation.
// Unknown keys are rejected so typos fail loudly instead of silently keeping
// a default. Command-line flags are applied on top through the same set()
// path. The VOXNAV_CONFIG environment variable names a default file.

namespace voxnav {

struct Config {
  uint64_t seed = 1;

  // Volume encoder.
  int d_model = 768;
  int d_input = 768;
  int heads = 8;
  int samples = 6;
  int head_dim = 96;
  int levels = 4;
  int coarse_layers = 6;  // aggregation layers at the coarsest level; finer levels get one
  int base_x = 15, base_y = 15, base_z = 4;
  double fine_resolution = 0.1;
  double z_below = 1.2;
  std::string upsample = "deconv";
  int feature_height = 12, feature_width = 12;

  // Perception / annotation range.
  double range_xy = 6.0;
  double range_z_below = 1.5;
  double range_z_above = 2.0;

  // Policy.
  double sigma = 3.0;        // heatmap target spread, cells
  int neighborhood = 9;      // pooled cells per candidate (3x3; fixed)
  double w_global = 0.5;
  int height_groups = 4;
  int instruction_length = 8;
  std::string mode = "argmax";  // or "sample"
  bool object_head = false;

  // Simulation / evaluation.
  int max_steps = 15;
  double success_radius = 3.0;

  void set(const std::string& key, const std::string& value) {
    auto as_int = [&] { return static_cast<int>(parse_int(value)); };
    auto as_u64 = [&] { return parse_uint64(value); };
    auto as_double = [&] { return parse_double(value); };
    auto as_bool = [&] {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw std::runtime_error("config: boolean expected for " + key + ", got '" + value + "'");
    };
    if (key == "seed") seed = as_u64();
    else if (key == "d_model") d_model = as_int();
    else if (key == "d_input") d_input = as_int();
    else if (key == "heads") heads = as_int();
    else if (key == "samples") samples = as_int();
    else if (key == "head_dim") head_dim = as_int();
    else if (key == "levels") levels = as_int();
    else if (key == "coarse_layers") coarse_layers = as_int();
    else if (key == "base_x") base_x = as_int();
    else if (key == "base_y") base_y = as_int();
    else if (key == "base_z") base_z = as_int();
    else if (key == "fine_resolution") fine_resolution = as_double();
    else if (key == "z_below") z_below = as_double();
    else if (key == "upsample") upsample = value;
    else if (key == "feature_height") feature_height = as_int();
    else if (key == "feature_width") feature_width = as_int();
    else if (key == "range_xy") range_xy = as_double();
    else if (key == "range_z_below") range_z_below = as_double();
    else if (key == "range_z_above") range_z_above = as_double();
    else if (key == "sigma") sigma = as_double();
    else if (key == "neighborhood") neighborhood = as_int();
    else if (key == "w_global") w_global = as_double();
    else if (key == "height_groups") height_groups = as_int();
    else if (key == "instruction_length") instruction_length = as_int();
    else if (key == "mode") mode = value;
    else if (key == "object_head") object_head = as_bool();
    else if (key == "max_steps") max_steps = as_int();
    else if (key == "success_radius") success_radius = as_double();
    else throw std::runtime_error("config: unknown key '" + key + "'");
  }

  void validate() const {
    if (neighborhood != 9)
      throw std::runtime_error("config: only the 3x3 candidate neighborhood (9) is supported");
    if (mode != "argmax" && mode != "sample")
      throw std::runtime_error("config: mode must be argmax or sample");
    if (w_global < 0 || w_global > 1)
      throw std::runtime_error("config: w_global must lie in [0, 1]");
    if (sigma <= 0 || success_radius <= 0 || max_steps < 1 || instruction_length < 1)
      throw std::runtime_error("config: positive sigma, success_radius, max_steps, "
                               "instruction_length required");
    encoder().validate();  // covers the volume dimensions
  }

  EncoderConfig encoder() const {
    EncoderConfig e;
    e.d_model = d_model;
    e.d_input = d_input;
    e.heads = heads;
    e.samples = samples;
    e.head_dim = head_dim;
    e.levels = levels;
    e.base_x = base_x;
    e.base_y = base_y;
    e.base_z = base_z;
    e.fine_resolution = fine_resolution;
    e.z_below = z_below;
    e.upsample = upsample;
    e.layers.assign(static_cast<size_t>(levels), 1);
    if (!e.layers.empty()) e.layers[0] = coarse_layers;
    return e;
  }

  PerceptionRange range() const {
    PerceptionRange r;
    r.xy_extent = range_xy;
    r.z_below = range_z_below;
    r.z_above = range_z_above;
    r.fine_resolution = fine_resolution;
    return r;
  }
};

/// Parses `key = value` lines ('#' starts a comment, blank lines ignored).
inline Config load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path.string());
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    // Accept "key = value", "key=value", and "key value".
    std::string joined;
    for (const auto& t : tok) joined += t;
    const auto eq = joined.find('=');
    std::string key, value;
    if (eq != std::string::npos) {
      key = joined.substr(0, eq);
      value = joined.substr(eq + 1);
    } else if (tok.size() == 2) {
      key = tok[0];
      value = tok[1];
    }
    if (key.empty() || value.empty())
      throw std::runtime_error("config: malformed line " + std::to_string(line_no) + " in " +
                               path.string());
    cfg.set(key, value);
  }
  cfg.validate();
  return cfg;
}

/// The configuration the process starts from: VOXNAV_CONFIG when set (and
/// the file must then exist), built-in defaults otherwise.
inline Config default_config() {
  if (const char* env = std::getenv("VOXNAV_CONFIG")) return load_config(env);
  return Config{};
}

}  // namespace voxnav
