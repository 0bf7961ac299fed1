#pragma once

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dentalreg/errors.hpp"
#include "dentalreg/geometry.hpp"

namespace dentalreg {

/// Triangulated tooth-region mesh, millimeters. After normalization the
/// vertex centroid sits at the origin and the subtracted offset is kept.
struct DentalMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
  Point3 centroid_offset{};
};

inline Point3 mesh_centroid(const DentalMesh& mesh) {
  Point3 c;
  for (const Point3& v : mesh.vertices) c = c + v;
  const double n = static_cast<double>(mesh.vertices.size());
  return n > 0 ? (1.0 / n) * c : c;
}

/// Moves the vertex centroid to the origin, accumulating the shift in
/// centroid_offset.
inline void normalize_mesh(DentalMesh& mesh) {
  const Point3 c = mesh_centroid(mesh);
  for (Point3& v : mesh.vertices) v = v - c;
  mesh.centroid_offset = mesh.centroid_offset + c;
}

namespace detail {

inline void validate_triangles(DentalMesh& mesh, const std::string& where) {
  const int n = static_cast<int>(mesh.vertices.size());
  std::vector<std::array<int, 3>> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    for (int k : t)
      if (k < 0 || k >= n)
        throw ParseError(where + ": face index " + std::to_string(k + 1) +
                         " out of range (have " + std::to_string(n) +
                         " vertices)");
    if (t[0] == t[1] && t[1] == t[2]) continue;  // point, not a triangle
    kept.push_back(t);
  }
  mesh.triangles = std::move(kept);
}

inline int resolve_obj_index(long idx, std::size_t n_vertices,
                             const std::string& where) {
  // OBJ indices are 1-based; negative values count back from the end.
  long resolved = idx > 0 ? idx - 1 : static_cast<long>(n_vertices) + idx;
  if (idx == 0 || resolved < 0 || resolved >= static_cast<long>(n_vertices))
    throw ParseError(where + ": face index " + std::to_string(idx) +
                     " out of range (have " + std::to_string(n_vertices) +
                     " vertices)");
  return static_cast<int>(resolved);
}

inline DentalMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path.string());
  DentalMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Point3 p;
      if (!(ls >> p.x >> p.y >> p.z))
        throw ParseError(where + ": malformed vertex line");
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> face;
      std::string token;
      while (ls >> token) {
        // accept i, i/t, i//n, i/t/n
        const std::size_t slash = token.find('/');
        const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
        char* end = nullptr;
        const long raw = std::strtol(head.c_str(), &end, 10);
        if (end == head.c_str() || *end != '\0')
          throw ParseError(where + ": malformed face token '" + token + "'");
        face.push_back(resolve_obj_index(raw, mesh.vertices.size(), where));
      }
      if (face.size() < 3)
        throw ParseError(where + ": face with fewer than 3 vertices");
      for (std::size_t i = 1; i + 1 < face.size(); ++i)
        mesh.triangles.push_back({face[0], face[i], face[i + 1]});
    }
    // all other OBJ attributes are ignored
  }
  return mesh;
}

struct PlyProperty {
  std::string type;
  std::string name;
  bool is_list = false;
  std::string count_type;
};

inline std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw ParseError("PLY: unknown property type '" + t + "'");
}

inline double ply_read_binary_scalar(std::istream& in, const std::string& t) {
  unsigned char buf[8];
  const std::size_t n = ply_type_size(t);
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  if (!in) throw ParseError("PLY: truncated binary payload");
  auto as = [&](auto value) {
    std::memcpy(&value, buf, sizeof(value));
    return static_cast<double>(value);
  };
  if (t == "char" || t == "int8") return as(std::int8_t{});
  if (t == "uchar" || t == "uint8") return as(std::uint8_t{});
  if (t == "short" || t == "int16") return as(std::int16_t{});
  if (t == "ushort" || t == "uint16") return as(std::uint16_t{});
  if (t == "int" || t == "int32") return as(std::int32_t{});
  if (t == "uint" || t == "uint32") return as(std::uint32_t{});
  if (t == "float" || t == "float32") return as(float{});
  return as(double{});
}

inline DentalMesh load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open mesh file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw ParseError(path.string() + ": missing PLY magic");

  bool binary = false;
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
  };
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment" || tag == "obj_info") continue;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        throw ParseError(path.string() + ": unsupported PLY format '" + fmt + "'");
    } else if (tag == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) throw ParseError(path.string() + ": property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    } else if (tag == "end_header") {
      break;
    } else if (!tag.empty()) {
      throw ParseError(path.string() + ": unexpected header line '" + line + "'");
    }
  }

  DentalMesh mesh;
  auto read_scalar = [&](const std::string& type) -> double {
    if (binary) return ply_read_binary_scalar(in, type);
    double v;
    if (!(in >> v)) throw ParseError(path.string() + ": truncated ASCII payload");
    return v;
  };

  for (const auto& elem : elements) {
    if (elem.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (std::size_t i = 0; i < elem.properties.size(); ++i) {
        if (elem.properties[i].name == "x") ix = static_cast<int>(i);
        if (elem.properties[i].name == "y") iy = static_cast<int>(i);
        if (elem.properties[i].name == "z") iz = static_cast<int>(i);
      }
      if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError(path.string() + ": vertex element without x/y/z");
      for (std::size_t v = 0; v < elem.count; ++v) {
        Point3 p;
        for (std::size_t i = 0; i < elem.properties.size(); ++i) {
          if (elem.properties[i].is_list)
            throw ParseError(path.string() + ": list property on vertex element");
          const double value = read_scalar(elem.properties[i].type);
          if (static_cast<int>(i) == ix) p.x = value;
          if (static_cast<int>(i) == iy) p.y = value;
          if (static_cast<int>(i) == iz) p.z = value;
        }
        mesh.vertices.push_back(p);
      }
    } else if (elem.name == "face") {
      for (std::size_t fi = 0; fi < elem.count; ++fi) {
        for (const auto& prop : elem.properties) {
          if (!prop.is_list) {
            read_scalar(prop.type);
            continue;
          }
          const std::size_t n = static_cast<std::size_t>(read_scalar(prop.count_type));
          std::vector<int> face(n);
          for (std::size_t k = 0; k < n; ++k)
            face[k] = static_cast<int>(read_scalar(prop.type));
          if (prop.name == "vertex_indices" || prop.name == "vertex_index") {
            if (n < 3) throw ParseError(path.string() + ": face with fewer than 3 vertices");
            for (std::size_t i = 1; i + 1 < n; ++i)
              mesh.triangles.push_back({face[0], face[i], face[i + 1]});
          }
        }
      }
    } else {
      // skip unknown elements
      for (std::size_t k = 0; k < elem.count; ++k)
        for (const auto& prop : elem.properties) {
          if (prop.is_list) {
            const std::size_t n = static_cast<std::size_t>(read_scalar(prop.count_type));
            for (std::size_t j = 0; j < n; ++j) read_scalar(prop.type);
          } else {
            read_scalar(prop.type);
          }
        }
    }
  }
  return mesh;
}

}  // namespace detail

/// Loads an OBJ or PLY mesh, validates triangle indices, and normalizes the
/// vertex centroid to the origin.
inline DentalMesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  DentalMesh mesh;
  if (ext == ".obj" || ext == ".OBJ")
    mesh = detail::load_obj(path);
  else if (ext == ".ply" || ext == ".PLY")
    mesh = detail::load_ply(path);
  else
    throw ParseError("unsupported mesh format: " + path.string());
  detail::validate_triangles(mesh, path.filename().string());
  if (mesh.triangles.empty())
    throw EmptyMesh("mesh has no triangles: " + path.string());
  normalize_mesh(mesh);
  return mesh;
}

/// Writes Wavefront OBJ with fixed formatting (deterministic bytes).
inline void save_obj(const DentalMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file: " + path.string());
  char buf[128];
  for (const Point3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.6f %.6f %.6f\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof(buf), "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out << buf;
  }
  if (!out) throw IoError("failed writing mesh file: " + path.string());
}

}  // namespace dentalreg
