#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "voxnav/io_util.hpp"
#include "voxnav/scene.hpp"

// Scene archive: a directory holding four files.
//   header.txt  - format version, scene name, class table, grid bounds (text)
//   points.bin  - point count u64, then per point x y z (f64) label (u16)
//                 instance (i32, -1 = none); little-endian throughout
//   graph.txt   - lines "node <id> <x> <y> <z>" then "edge <a> <b>"
//   cameras.bin - u32 rig count; per rig u32 view count; per view 9 f64
//                 intrinsics (row-major), 9+3 f64 extrinsics (R row-major,
//                 then t), i32 height, i32 width
// Text doubles are written in shortest round-trip form, so save -> load ->
// save is byte-identical.

namespace voxnav {

inline constexpr int kSceneFormatVersion = 1;

inline void save_scene(const Scene& scene, const std::filesystem::path& dir) {
  scene.validate();
  std::filesystem::create_directories(dir);

  {
    std::ofstream h(dir / "header.txt");
    if (!h) io_fail("cannot write " + (dir / "header.txt").string());
    h << "format " << kSceneFormatVersion << "\n";
    h << "name " << scene.name << "\n";
    h << "classes " << kNumClasses << "\n";
    for (uint16_t i = 0; i < kNumClasses; ++i) h << "class " << i << " " << kClassNames[i] << "\n";
    const GridSpec& b = scene.bounds;
    h << "bounds " << format_double(b.x_min) << " " << format_double(b.x_max) << " "
      << format_double(b.y_min) << " " << format_double(b.y_max) << " " << format_double(b.z_min)
      << " " << format_double(b.z_max) << " " << format_double(b.resolution) << "\n";
  }

  {
    auto f = open_out_binary(dir / "points.bin");
    write_le<uint64_t>(f, scene.cloud.points.size());
    for (const auto& p : scene.cloud.points) {
      write_le<double>(f, p.position.x());
      write_le<double>(f, p.position.y());
      write_le<double>(f, p.position.z());
      write_le<uint16_t>(f, p.class_id);
      write_le<int32_t>(f, p.instance_id);
    }
  }

  {
    std::ofstream g(dir / "graph.txt");
    if (!g) io_fail("cannot write " + (dir / "graph.txt").string());
    for (const auto& n : scene.graph.nodes)
      g << "node " << n.id << " " << format_double(n.position.x()) << " "
        << format_double(n.position.y()) << " " << format_double(n.position.z()) << "\n";
    for (const auto& [a, b] : scene.graph.edges) g << "edge " << a << " " << b << "\n";
  }

  {
    auto f = open_out_binary(dir / "cameras.bin");
    write_le<uint32_t>(f, static_cast<uint32_t>(scene.rigs.size()));
    for (const auto& rig : scene.rigs) {
      write_le<uint32_t>(f, static_cast<uint32_t>(rig.size()));
      for (const auto& cam : rig) {
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) write_le<double>(f, cam.intrinsics(r, c));
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) write_le<double>(f, cam.rotation(r, c));
        for (int i = 0; i < 3; ++i) write_le<double>(f, cam.translation(i));
        write_le<int32_t>(f, cam.height);
        write_le<int32_t>(f, cam.width);
      }
    }
  }
}

inline Scene load_scene(const std::filesystem::path& dir) {
  Scene scene;

  {
    std::ifstream h(dir / "header.txt");
    if (!h) io_fail("cannot open " + (dir / "header.txt").string());
    std::string line;
    std::vector<std::string> class_names;
    while (std::getline(h, line)) {
      const auto tok = split_ws(line);
      if (tok.empty()) continue;
      if (tok[0] == "format") {
        if (tok.size() != 2 || parse_int(tok[1]) != kSceneFormatVersion)
          io_fail("header.txt: unsupported format version");
      } else if (tok[0] == "name") {
        scene.name = tok.size() > 1 ? tok[1] : "";
      } else if (tok[0] == "classes") {
        if (tok.size() != 2 || parse_int(tok[1]) != kNumClasses)
          io_fail("header.txt: class count mismatch");
      } else if (tok[0] == "class") {
        if (tok.size() != 3) io_fail("header.txt: malformed class line");
        if (parse_int(tok[1]) != static_cast<long long>(class_names.size()))
          io_fail("header.txt: class ids must be dense and in order");
        class_names.push_back(tok[2]);
      } else if (tok[0] == "bounds") {
        if (tok.size() != 8) io_fail("header.txt: malformed bounds line");
        scene.bounds = GridSpec(parse_double(tok[1]), parse_double(tok[2]), parse_double(tok[3]),
                                parse_double(tok[4]), parse_double(tok[5]), parse_double(tok[6]),
                                parse_double(tok[7]));
      } else {
        io_fail("header.txt: unknown record '" + tok[0] + "'");
      }
    }
    if (class_names.size() != kNumClasses) io_fail("header.txt: incomplete class table");
    for (size_t i = 0; i < class_names.size(); ++i)
      if (class_names[i] != kClassNames[i])
        io_fail("header.txt: class " + std::to_string(i) + " is '" + class_names[i] +
                "', expected '" + kClassNames[i] + "'");
  }

  {
    auto f = open_in_binary(dir / "points.bin");
    const uint64_t n = read_le<uint64_t>(f);
    scene.cloud.points.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
      auto& p = scene.cloud.points[i];
      p.position.x() = read_le<double>(f);
      p.position.y() = read_le<double>(f);
      p.position.z() = read_le<double>(f);
      p.class_id = read_le<uint16_t>(f);
      p.instance_id = read_le<int32_t>(f);
    }
  }

  {
    std::ifstream g(dir / "graph.txt");
    if (!g) io_fail("cannot open " + (dir / "graph.txt").string());
    std::string line;
    while (std::getline(g, line)) {
      const auto tok = split_ws(line);
      if (tok.empty()) continue;
      if (tok[0] == "node") {
        if (tok.size() != 5) io_fail("graph.txt: malformed node line");
        GraphNode n;
        n.id = static_cast<uint32_t>(parse_int(tok[1]));
        n.position = {parse_double(tok[2]), parse_double(tok[3]), parse_double(tok[4])};
        scene.graph.nodes.push_back(n);
      } else if (tok[0] == "edge") {
        if (tok.size() != 3) io_fail("graph.txt: malformed edge line");
        scene.graph.edges.emplace_back(static_cast<uint32_t>(parse_int(tok[1])),
                                       static_cast<uint32_t>(parse_int(tok[2])));
      } else {
        io_fail("graph.txt: unknown record '" + tok[0] + "'");
      }
    }
  }

  {
    auto f = open_in_binary(dir / "cameras.bin");
    const uint32_t rigs = read_le<uint32_t>(f);
    scene.rigs.resize(rigs);
    for (uint32_t i = 0; i < rigs; ++i) {
      const uint32_t views = read_le<uint32_t>(f);
      scene.rigs[i].resize(views);
      for (uint32_t v = 0; v < views; ++v) {
        Camera& cam = scene.rigs[i][v];
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) cam.intrinsics(r, c) = read_le<double>(f);
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) cam.rotation(r, c) = read_le<double>(f);
        for (int j = 0; j < 3; ++j) cam.translation(j) = read_le<double>(f);
        cam.height = read_le<int32_t>(f);
        cam.width = read_le<int32_t>(f);
      }
    }
  }

  scene.validate();
  return scene;
}

}  // namespace voxnav
