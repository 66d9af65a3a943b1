#include "eddm/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eddm/error.hpp"

namespace eddm {

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, int line_no) {
  double value = 0.0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
    throw ParseError("obj line " + std::to_string(line_no) + ": bad number '" +
                     std::string(tok) + "'");
  return value;
}

// Face tokens may carry /texture/normal suffixes; only the vertex index matters.
int parse_face_index(std::string_view tok, int line_no) {
  const size_t slash = tok.find('/');
  const std::string_view head = (slash == std::string_view::npos) ? tok : tok.substr(0, slash);
  int value = 0;
  const auto r = std::from_chars(head.data(), head.data() + head.size(), value);
  if (r.ec != std::errc{} || r.ptr != head.data() + head.size())
    throw ParseError("obj line " + std::to_string(line_no) + ": bad face index '" +
                     std::string(tok) + "'");
  return value;
}

}  // namespace

void TriMesh::validate() const {
  if (positions.empty() || triangles.empty())
    throw EmptyMeshError("mesh has no vertices or no triangles");
  const int n = vertex_count();
  std::vector<char> referenced(positions.size(), 0);
  for (size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= n)
        throw ValidationError("triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(tri[k]) + " out of range");
      referenced[tri[k]] = 1;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw ValidationError("triangle " + std::to_string(t) + " repeats a vertex");
  }
  for (int i = 0; i < n; ++i)
    if (!referenced[i])
      throw ValidationError("vertex " + std::to_string(i) + " is not referenced by any triangle");
}

TriMesh load_obj(std::string_view text) {
  TriMesh mesh;
  std::vector<std::vector<int>> faces;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::vector<std::string_view> tok = split_tokens(line);
    if (tok.empty()) continue;

    if (tok[0] == "v") {
      if (tok.size() < 4)
        throw ParseError("obj line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
      mesh.positions.push_back({parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                parse_double(tok[3], line_no)});
    } else if (tok[0] == "f") {
      if (tok.size() < 4)
        throw ParseError("obj line " + std::to_string(line_no) + ": face needs 3+ indices");
      std::vector<int> face;
      face.reserve(tok.size() - 1);
      for (size_t k = 1; k < tok.size(); ++k) {
        const int idx = parse_face_index(tok[k], line_no);
        if (idx <= 0)
          throw ParseError("obj line " + std::to_string(line_no) + ": index " +
                           std::to_string(idx) + " out of range");
        face.push_back(idx - 1);
      }
      faces.push_back(std::move(face));
    }
    // vn / vt / usemtl / o / g / s / mtllib: ignored
  }

  if (mesh.positions.empty() || faces.empty())
    throw EmptyMeshError("obj contains no vertices or no faces");

  const int n = mesh.vertex_count();
  for (const auto& face : faces) {
    for (int idx : face)
      if (idx >= n)
        throw ParseError("obj face references vertex " + std::to_string(idx + 1) +
                         " but only " + std::to_string(n) + " are defined");
    for (size_t k = 1; k + 1 < face.size(); ++k)
      mesh.triangles.push_back({face[0], face[k], face[k + 1]});
  }

  try {
    mesh.validate();
  } catch (const ValidationError& e) {
    throw ParseError(std::string("obj: ") + e.what());
  }
  return mesh;
}

TriMesh load_obj_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_obj(buf.str());
}

std::string save_obj(const TriMesh& mesh, std::span<const Vec3> positions_override) {
  std::span<const Vec3> pts = positions_override.empty()
                                  ? std::span<const Vec3>(mesh.positions)
                                  : positions_override;
  if (pts.size() != mesh.positions.size())
    throw ValidationError("position override has " + std::to_string(pts.size()) +
                          " entries, mesh has " + std::to_string(mesh.positions.size()));

  std::string out;
  out.reserve(pts.size() * 64 + mesh.triangles.size() * 24);
  char buf[128];
  for (const Vec3& p : pts) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x, p.y, p.z);
    out += buf;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  return out;
}

void save_obj_file(const std::string& path, const TriMesh& mesh,
                   std::span<const Vec3> positions_override) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << save_obj(mesh, positions_override);
  if (!out) throw ParseError("failed writing '" + path + "'");
}

std::vector<std::vector<int>> vertex_one_rings(const TriMesh& mesh) {
  std::vector<std::vector<int>> ring(mesh.positions.size());
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      ring[t[k]].push_back(t[(k + 1) % 3]);
      ring[t[k]].push_back(t[(k + 2) % 3]);
    }
  }
  for (auto& r : ring) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return ring;
}

}  // namespace eddm
