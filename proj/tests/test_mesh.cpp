#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "eddm/error.hpp"
#include "eddm/mesh.hpp"
#include "eddm/scenario.hpp"
#include "eddm/smoothing.hpp"
#include "support.hpp"

using namespace eddm;

namespace {

constexpr const char* kMinimalObj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";

// Two equilateral triangles sharing the edge (0,1).
TriMesh equilateral_pair() {
  const double h = std::sqrt(3.0) / 2.0;
  TriMesh m;
  m.positions = {{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}, {0.5, -h, 0}};
  m.triangles = {{0, 1, 2}, {0, 3, 1}};
  return m;
}

TriMesh regular_tetrahedron() {
  TriMesh m;
  m.positions = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  m.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return m;
}

int find_neighbor(const SmoothingWeights& w, int row, int col) {
  for (int k = w.offsets[row]; k < w.offsets[row + 1]; ++k)
    if (w.neighbors[k] == col) return k;
  return -1;
}

}  // namespace

TEST_CASE("load_obj minimal file") {
  const TriMesh m = load_obj(kMinimalObj);
  CHECK(m.vertex_count() == 3);
  CHECK(m.triangle_count() == 1);
  CHECK(m.triangles[0] == std::array<int, 3>{0, 1, 2});
  CHECK(m.positions[1].x == 1.0);
  CHECK(m.positions[2].y == 1.0);
}

TEST_CASE("load_obj fan-triangulates polygons") {
  const TriMesh m = load_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  CHECK(m.triangle_count() == 2);
  CHECK(m.triangles[0] == std::array<int, 3>{0, 1, 2});
  CHECK(m.triangles[1] == std::array<int, 3>{0, 2, 3});
}

TEST_CASE("load_obj ignores comments, normals and texture indices") {
  const TriMesh m = load_obj(
      "# header\n"
      "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
      "vn 0 0 1\nvt 0 0\n"
      "f 1/1/1 2/2/1 3/3/1\n");
  CHECK(m.vertex_count() == 3);
  CHECK(m.triangle_count() == 1);
}

TEST_CASE("load_obj error cases") {
  // Face index past the vertex list.
  CHECK_THROWS_AS(load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n"), ParseError);
  // Too few coordinates / face corners.
  CHECK_THROWS_AS(load_obj("v 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"), ParseError);
  CHECK_THROWS_AS(load_obj("v 0 0 0\nv 1 0 0\nf 1 2\n"), ParseError);
  // No geometry at all.
  CHECK_THROWS_AS(load_obj(""), EmptyMeshError);
  CHECK_THROWS_AS(load_obj("# nothing here\n"), EmptyMeshError);
  // A corner repeated within one face.
  CHECK_THROWS_AS(load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n"), ParseError);
  // Vertex 4 is never referenced.
  CHECK_THROWS_AS(load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 2 2\nf 1 2 3\n"), ParseError);
}

TEST_CASE("save_obj emits one record per element") {
  const std::string text = save_obj(load_obj(kMinimalObj));
  int v_lines = 0, f_lines = 0;
  for (size_t pos = 0; pos < text.size();) {
    if (text.compare(pos, 2, "v ") == 0) ++v_lines;
    if (text.compare(pos, 2, "f ") == 0) ++f_lines;
    pos = text.find('\n', pos);
    if (pos == std::string::npos) break;
    ++pos;
  }
  CHECK(v_lines == 3);
  CHECK(f_lines == 1);
}

TEST_CASE("save_obj round-trips positions exactly") {
  const TriMesh tube = make_capped_tube({});
  const TriMesh back = load_obj(save_obj(tube));
  REQUIRE(back.vertex_count() == tube.vertex_count());
  CHECK(back.triangles == tube.triangles);
  CHECK(testsup::max_abs_distance(back.positions, tube.positions) == 0.0);
}

TEST_CASE("save_obj positions override") {
  const TriMesh m = load_obj(kMinimalObj);
  std::vector<Vec3> moved = m.positions;
  for (Vec3& p : moved) p += Vec3{0.0, 0.0, 2.5};

  const TriMesh back = load_obj(save_obj(m, moved));
  CHECK(testsup::max_abs_distance(back.positions, moved) == 0.0);

  const std::vector<Vec3> wrong(2);
  CHECK_THROWS_AS((void)save_obj(m, wrong), ValidationError);
}

TEST_CASE("vertex_one_rings is sorted and symmetric") {
  const auto rings = vertex_one_rings(equilateral_pair());
  REQUIRE(rings.size() == 4);
  CHECK(rings[0] == std::vector<int>{1, 2, 3});
  CHECK(rings[1] == std::vector<int>{0, 2, 3});
  CHECK(rings[2] == std::vector<int>{0, 1});
  CHECK(rings[3] == std::vector<int>{0, 1});
}

TEST_CASE("cotangent_weights equilateral interior and boundary edges") {
  const SmoothingWeights w = cotangent_weights(equilateral_pair());
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);  // cot 60 accumulated twice

  // Row 0: interior edge to 1 carries twice the weight of each wing edge,
  // so the normalized row is (0.5, 0.25, 0.25).
  CHECK(w.weights[find_neighbor(w, 0, 1)] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.weights[find_neighbor(w, 0, 2)] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.weights[find_neighbor(w, 0, 3)] == doctest::Approx(0.25).epsilon(1e-12));

  // Raw accumulations before normalization: 1/sqrt(3) on the shared edge,
  // cot(60)/2 on each one-sided boundary edge.
  CHECK(w.raw_row_sums[0] == doctest::Approx(2.0 * inv_sqrt3).epsilon(1e-12));
  const double raw_interior = w.weights[find_neighbor(w, 0, 1)] * w.raw_row_sums[0];
  CHECK(raw_interior == doctest::Approx(inv_sqrt3).epsilon(1e-12));
  const double raw_boundary = w.weights[find_neighbor(w, 2, 0)] * w.raw_row_sums[2];
  CHECK(raw_boundary == doctest::Approx(0.5 * inv_sqrt3).epsilon(1e-12));

  CHECK(w.degenerate_rows.empty());
  CHECK(w.max_row_sum_error() <= 1e-12);
}

TEST_CASE("cotangent_weights equal accumulations normalize to 1/valence") {
  const SmoothingWeights w = cotangent_weights(regular_tetrahedron());
  for (int i = 0; i < 4; ++i) {
    CHECK(w.offsets[i + 1] - w.offsets[i] == 3);
    for (int k = w.offsets[i]; k < w.offsets[i + 1]; ++k)
      CHECK(w.weights[k] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("cotangent_weights clamps obtuse-angle negatives to zero") {
  // The apex angle is obtuse, so the base edge accumulates a negative
  // cotangent and must clamp.
  TriMesh m;
  m.positions = {{0, 0, 0}, {4, 0, 0}, {2, 0.2, 0}};
  m.triangles = {{0, 1, 2}};
  const SmoothingWeights w = cotangent_weights(m);
  CHECK(w.weights[find_neighbor(w, 0, 1)] == 0.0);
  CHECK(w.weights[find_neighbor(w, 0, 2)] == 1.0);
  CHECK(w.max_row_sum_error() <= 1e-12);
}

TEST_CASE("cotangent_weights degenerate rows fall back to uniform") {
  // Zero-area triangle: every cotangent contribution is suppressed.
  TriMesh m;
  m.positions = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  m.triangles = {{0, 1, 2}};
  const SmoothingWeights w = cotangent_weights(m);
  CHECK(w.degenerate_rows == std::vector<int>{0, 1, 2});
  for (size_t k = 0; k < w.weights.size(); ++k) CHECK(w.weights[k] == 0.5);
}

TEST_CASE("cotangent_weights rows are stochastic and nonnegative on a tube") {
  const SmoothingWeights w = cotangent_weights(make_capped_tube({}));
  CHECK(w.max_row_sum_error() <= 1e-12);
  CHECK(w.degenerate_rows.empty());
  for (const double x : w.weights) CHECK(x >= 0.0);
  for (int i = 0; i < w.vertex_count(); ++i)
    for (int k = w.offsets[i] + 1; k < w.offsets[i + 1]; ++k)
      CHECK(w.neighbors[k - 1] < w.neighbors[k]);
}

TEST_CASE("cotangent_weights single-precision mode tags and degrades") {
  const TriMesh m = equilateral_pair();
  const SmoothingWeights wf = cotangent_weights(m, WeightPrecision::kSingleExperiment);
  CHECK(wf.precision == WeightPrecision::kSingleExperiment);
  // Rows were normalized in float, so double-evaluated sums drift more than
  // the double-mode bound allows on anything nontrivial.
  CHECK(wf.max_row_sum_error() < 1e-5);
  const SmoothingWeights wd = cotangent_weights(m);
  CHECK(wd.precision == WeightPrecision::kDouble);
  CHECK(wd.max_row_sum_error() <= wf.max_row_sum_error());
}

TEST_CASE("smooth with zero iterations returns the input verbatim") {
  const TriMesh m = regular_tetrahedron();
  const SmoothingWeights w = cotangent_weights(m);
  const std::vector<double> values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const std::vector<double> out = smooth(w, {0.5, 0}, values, 3);
  CHECK(std::memcmp(out.data(), values.data(), values.size() * sizeof(double)) == 0);
}

TEST_CASE("smooth leaves constant fields unchanged") {
  const SmoothingWeights w = cotangent_weights(make_capped_tube({}));
  const std::vector<Vec3> constant(size_t(w.vertex_count()), Vec3{3.5, -1.0, 0.25});
  const std::vector<Vec3> out = smooth_positions(w, {0.7, 5}, constant);
  CHECK(testsup::max_abs_distance(out, constant) <= 1e-12);
}

TEST_CASE("smooth single full step moves a vertex to its neighbor average") {
  const TriMesh m = regular_tetrahedron();
  const SmoothingWeights w = cotangent_weights(m);
  const std::vector<Vec3> out = smooth_positions(w, {1.0, 1}, m.positions);
  for (int i = 0; i < 4; ++i) {
    Vec3 avg{};
    for (int k = w.offsets[i]; k < w.offsets[i + 1]; ++k)
      avg += w.weights[k] * m.positions[w.neighbors[k]];
    CHECK(norm(out[i] - avg) <= 1e-15);
  }
}

TEST_CASE("smooth matches the dense matrix-power oracle") {
  const TriMesh m = regular_tetrahedron();
  const SmoothingWeights w = cotangent_weights(m);
  const SmoothingConfig cfg{0.5, 3};

  std::vector<double> flat(m.positions.size() * 3);
  for (size_t i = 0; i < m.positions.size(); ++i) {
    flat[i * 3 + 0] = m.positions[i].x;
    flat[i * 3 + 1] = m.positions[i].y;
    flat[i * 3 + 2] = m.positions[i].z;
  }
  const std::vector<double> sparse = smooth(w, cfg, flat, 3);
  const std::vector<double> dense = testsup::dense_smooth(w, cfg, flat, 3);
  for (size_t k = 0; k < flat.size(); ++k) CHECK(std::fabs(sparse[k] - dense[k]) <= 1e-12);
}

TEST_CASE("smooth handles wide payloads like stacked columns") {
  const TriMesh m = equilateral_pair();
  const SmoothingWeights w = cotangent_weights(m);
  const SmoothingConfig cfg{0.5, 2};

  std::mt19937_64 rng(53);
  std::vector<double> field(m.positions.size() * 10);
  for (double& x : field) x = testsup::uniform(rng, -2.0, 2.0);

  const std::vector<double> sparse = smooth(w, cfg, field, 10);
  const std::vector<double> dense = testsup::dense_smooth(w, cfg, field, 10);
  for (size_t k = 0; k < field.size(); ++k) CHECK(std::fabs(sparse[k] - dense[k]) <= 1e-12);
}

TEST_CASE("smooth commutes with global translation") {
  const TriMesh tube = make_capped_tube({});
  const SmoothingWeights w = cotangent_weights(tube);
  const SmoothingConfig cfg{0.5, 4};
  const Vec3 t{10.0, -3.0, 0.5};

  std::vector<Vec3> shifted = tube.positions;
  for (Vec3& p : shifted) p += t;

  std::vector<Vec3> a = smooth_positions(w, cfg, shifted);
  const std::vector<Vec3> b = smooth_positions(w, cfg, tube.positions);
  for (Vec3& p : a) p -= t;
  CHECK(testsup::max_abs_distance(a, b) <= 1e-9);
}

TEST_CASE("smooth is bitwise deterministic across runs") {
  const TriMesh tube = make_capped_tube({});
  const SmoothingWeights w = cotangent_weights(tube);
  const std::vector<Vec3> a = smooth_positions(w, {0.5, 16}, tube.positions);
  const std::vector<Vec3> b = smooth_positions(w, {0.5, 16}, tube.positions);
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(Vec3)) == 0);
}
