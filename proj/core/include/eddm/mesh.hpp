#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eddm/linalg.hpp"

namespace eddm {

/// Triangle mesh: positions plus 0-based triangle indices.
///
/// Valid instances have every index in range, no triangle repeating a vertex,
/// and every vertex referenced by at least one triangle. load_obj and validate
/// enforce this; code constructing meshes by hand should call validate once.
struct TriMesh {
  std::vector<Vec3> positions;
  std::vector<std::array<int, 3>> triangles;

  int vertex_count() const { return static_cast<int>(positions.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  /// Throws EmptyMeshError / ValidationError when an invariant fails.
  void validate() const;
};

/// Parse an ASCII OBJ. Handles v and f records, fan-triangulates polygons
/// ((v0,v1,v2), (v0,v2,v3), ...), accepts f entries with /texture/normal
/// suffixes, and ignores every other record type. Indices are converted from
/// 1-based to 0-based.
///
/// Throws ParseError on malformed records, out-of-range or repeated indices,
/// and unreferenced vertices; EmptyMeshError when no vertices or faces remain.
TriMesh load_obj(std::string_view text);

/// Read a file and parse it with load_obj. Throws ParseError when unreadable.
TriMesh load_obj_file(const std::string& path);

/// Serialize to ASCII OBJ with 17-significant-digit floats, so positions
/// round-trip bitwise. positions_override, when nonempty, replaces the stored
/// positions (same length required; topology is written unchanged).
std::string save_obj(const TriMesh& mesh, std::span<const Vec3> positions_override = {});

void save_obj_file(const std::string& path, const TriMesh& mesh,
                   std::span<const Vec3> positions_override = {});

/// One-ring neighbor lists, each sorted ascending (the deterministic
/// iteration order used by smoothing and frame construction).
std::vector<std::vector<int>> vertex_one_rings(const TriMesh& mesh);

}  // namespace eddm
