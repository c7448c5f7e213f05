#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcvc/errors.hpp"
#include "pcvc/frame.hpp"

namespace pcvc {
namespace ply_detail {

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

inline size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::i8:
    case Scalar::u8: return 1;
    case Scalar::i16:
    case Scalar::u16: return 2;
    case Scalar::i32:
    case Scalar::u32:
    case Scalar::f32: return 4;
    case Scalar::f64: return 8;
  }
  return 0;
}

inline bool parse_scalar_type(const std::string& t, Scalar& out) {
  if (t == "char" || t == "int8") out = Scalar::i8;
  else if (t == "uchar" || t == "uint8") out = Scalar::u8;
  else if (t == "short" || t == "int16") out = Scalar::i16;
  else if (t == "ushort" || t == "uint16") out = Scalar::u16;
  else if (t == "int" || t == "int32") out = Scalar::i32;
  else if (t == "uint" || t == "uint32") out = Scalar::u32;
  else if (t == "float" || t == "float32") out = Scalar::f32;
  else if (t == "double" || t == "float64") out = Scalar::f64;
  else return false;
  return true;
}

inline double read_scalar_le(const uint8_t* p, Scalar s) {
  auto rd = [&]<typename T>(T) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return double(v);
  };
  switch (s) {
    case Scalar::i8: return double(*reinterpret_cast<const int8_t*>(p));
    case Scalar::u8: return double(*p);
    case Scalar::i16: return rd(int16_t{});
    case Scalar::u16: return rd(uint16_t{});
    case Scalar::i32: return rd(int32_t{});
    case Scalar::u32: return rd(uint32_t{});
    case Scalar::f32: return rd(float{});
    case Scalar::f64: return rd(double{});
  }
  return 0;
}

struct Property {
  std::string name;
  Scalar type = Scalar::f32;
};

struct Header {
  bool binary = false;
  size_t vertex_count = 0;
  std::vector<Property> vertex_props;
  size_t data_offset = 0;  // byte offset of the first element payload
};

inline Header parse_header(const std::string& bytes, const std::string& path) {
  Header h;
  size_t pos = 0;
  int line_no = 0;
  bool in_vertex = false, saw_vertex = false, done = false;
  auto next_line = [&]() -> std::string {
    size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) throw ParseError(path + ": unterminated header");
    std::string line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = eol + 1;
    ++line_no;
    return line;
  };
  auto fail = [&](const std::string& line, const std::string& why) {
    std::ostringstream os;
    os << path << ": header line " << line_no << " \"" << line << "\": " << why;
    throw ParseError(os.str());
  };

  std::string line = next_line();
  if (line != "ply") fail(line, "missing ply magic");
  while (!done) {
    line = next_line();
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
    if (tok == "format") {
      std::string fmt, ver;
      ss >> fmt >> ver;
      if (fmt == "ascii") h.binary = false;
      else if (fmt == "binary_little_endian") h.binary = true;
      else fail(line, "unsupported format (need ascii or binary_little_endian)");
    } else if (tok == "element") {
      std::string name;
      size_t count = 0;
      if (!(ss >> name >> count)) fail(line, "malformed element declaration");
      if (name == "vertex") {
        if (saw_vertex) fail(line, "duplicate vertex element");
        saw_vertex = in_vertex = true;
        h.vertex_count = count;
      } else {
        if (saw_vertex ? count != 0 : true) {
          // Elements other than vertex would have to be skipped over in the
          // payload; only supported when empty.
          if (count != 0) fail(line, "unsupported non-vertex element with data");
        }
        in_vertex = false;
      }
    } else if (tok == "property") {
      if (!in_vertex) continue;  // properties of empty elements
      std::string type;
      ss >> type;
      if (type == "list") fail(line, "list property not supported on vertex");
      Property p;
      if (!parse_scalar_type(type, p.type)) fail(line, "unknown property type");
      if (!(ss >> p.name)) fail(line, "property without a name");
      h.vertex_props.push_back(p);
    } else if (tok == "end_header") {
      done = true;
    } else {
      fail(line, "unrecognized keyword");
    }
  }
  if (!saw_vertex) throw ParseError(path + ": no vertex element in header");
  h.data_offset = pos;
  return h;
}

}  // namespace ply_detail

// Reads a PLY point cloud (ASCII or binary little-endian) carrying x,y,z and
// red,green,blue per vertex. Coordinates must be non-negative integers (an
// integral-valued float is fine). Duplicate coordinates merge by averaging.
// depth < 0 infers the smallest grid that holds all coordinates.
inline Frame load_ply(const std::string& path, int depth = -1) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  using namespace ply_detail;
  Header h = parse_header(bytes, path);

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (int i = 0; i < int(h.vertex_props.size()); ++i) {
    const auto& p = h.vertex_props[i];
    if (p.name == "x") ix = i;
    else if (p.name == "y") iy = i;
    else if (p.name == "z") iz = i;
    else if (p.name == "red") ir = i;
    else if (p.name == "green") ig = i;
    else if (p.name == "blue") ib = i;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path + ": missing x/y/z properties");
  if (ir < 0 || ig < 0 || ib < 0) throw ParseError(path + ": missing red/green/blue properties");
  for (int ci : {ir, ig, ib})
    if (h.vertex_props[ci].type != Scalar::u8)
      throw ParseError(path + ": color properties must be uchar");

  std::vector<Voxel> voxels;
  voxels.reserve(h.vertex_count);
  auto to_coord = [&](double v, char axis) -> int32_t {
    if (v < 0) throw DomainError(path + ": negative " + std::string(1, axis) + " coordinate");
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-6) {
      std::ostringstream os;
      os << path << ": non-integer " << axis << " coordinate " << v;
      throw DomainError(os.str());
    }
    return int32_t(r);
  };

  if (h.binary) {
    size_t stride = 0;
    std::vector<size_t> offsets(h.vertex_props.size());
    for (size_t i = 0; i < h.vertex_props.size(); ++i) {
      offsets[i] = stride;
      stride += scalar_size(h.vertex_props[i].type);
    }
    if (h.data_offset + stride * h.vertex_count > bytes.size())
      throw ParseError(path + ": truncated vertex data");
    const uint8_t* base = reinterpret_cast<const uint8_t*>(bytes.data()) + h.data_offset;
    for (size_t n = 0; n < h.vertex_count; ++n, base += stride) {
      auto get = [&](int i) { return read_scalar_le(base + offsets[i], h.vertex_props[i].type); };
      Voxel v;
      v.coord = {to_coord(get(ix), 'x'), to_coord(get(iy), 'y'), to_coord(get(iz), 'z')};
      v.attr = {get(ir), get(ig), get(ib)};
      voxels.push_back(v);
    }
  } else {
    std::istringstream body(bytes.substr(h.data_offset));
    std::vector<double> row(h.vertex_props.size());
    for (size_t n = 0; n < h.vertex_count; ++n) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (!(body >> row[i])) {
          std::ostringstream os;
          os << path << ": truncated vertex data at vertex " << n;
          throw ParseError(os.str());
        }
      }
      Voxel v;
      v.coord = {to_coord(row[ix], 'x'), to_coord(row[iy], 'y'), to_coord(row[iz], 'z')};
      v.attr = {row[ir], row[ig], row[ib]};
      voxels.push_back(v);
    }
  }
  return make_frame(std::move(voxels), depth, ColorSpace::RGB);
}

// Low-level point writer: float32 coordinates, uchar colors (clamped and
// rounded here, the one place integer rounding happens).
inline void write_ply_points(const std::string& path, const std::vector<Vec3i>& coords,
                             const std::vector<Vec3d>& colors, bool binary = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii")
      << " 1.0\nelement vertex " << coords.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  auto byte = [](double v) {
    return uint8_t(std::lround(std::min(255.0, std::max(0.0, v))));
  };
  for (size_t i = 0; i < coords.size(); ++i) {
    const float xyz[3] = {float(coords[i].x), float(coords[i].y), float(coords[i].z)};
    const uint8_t rgb[3] = {byte(colors[i].x), byte(colors[i].y), byte(colors[i].z)};
    if (binary) {
      out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
      out.write(reinterpret_cast<const char*>(rgb), sizeof rgb);
    } else {
      out << xyz[0] << ' ' << xyz[1] << ' ' << xyz[2] << ' ' << int(rgb[0]) << ' ' << int(rgb[1])
          << ' ' << int(rgb[2]) << '\n';
    }
  }
  if (!out) throw ParseError(path + ": write failed");
}

// Writes a frame as PLY. The frame must be in RGB space.
inline void save_ply(const std::string& path, const Frame& frame, bool binary = true) {
  if (frame.color_space != ColorSpace::RGB)
    throw StateError("save_ply: frame must be in RGB space");
  std::vector<Vec3i> coords(frame.size());
  std::vector<Vec3d> colors(frame.size());
  for (size_t i = 0; i < frame.size(); ++i) {
    coords[i] = frame.voxels[i].coord;
    colors[i] = frame.voxels[i].attr;
  }
  write_ply_points(path, coords, colors, binary);
}

}  // namespace pcvc
