#include "eddm/deform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "eddm/error.hpp"
#include "parallel.hpp"

namespace eddm {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Skin weights

int SkinWeights::joint_span() const {
  int span = 0;
  for (const auto& row : rows)
    for (const auto& [j, w] : row) span = std::max(span, j + 1);
  return span;
}

SkinWeights load_skin_weights(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("weights: malformed JSON");
  if (!doc.contains("weights") || !doc["weights"].is_array())
    throw ParseError("weights: missing 'weights' array");

  SkinWeights out;
  out.rows.reserve(doc["weights"].size());
  for (size_t v = 0; v < doc["weights"].size(); ++v) {
    const json& row = doc["weights"][v];
    if (!row.is_array())
      throw ParseError("weights: vertex " + std::to_string(v) + " is not an array");

    std::vector<std::pair<int, double>> entries;
    for (const json& pair : row) {
      if (!pair.is_array() || pair.size() != 2)
        throw ParseError("weights: vertex " + std::to_string(v) +
                         " has an entry that is not [joint, weight]");
      const int joint = pair[0].get<int>();
      const double w = pair[1].get<double>();
      if (joint < 0)
        throw ParseError("weights: vertex " + std::to_string(v) + " has a negative joint index");
      if (!(w >= 0.0))
        throw ParseError("weights: vertex " + std::to_string(v) + " has a negative weight");
      if (w == 0.0) continue;
      entries.emplace_back(joint, w);
    }
    std::sort(entries.begin(), entries.end());
    for (size_t k = 1; k < entries.size(); ++k)
      if (entries[k].first == entries[k - 1].first)
        throw ParseError("weights: vertex " + std::to_string(v) + " lists joint " +
                         std::to_string(entries[k].first) + " twice");

    double sum = 0.0;
    for (const auto& [j, w] : entries) sum += w;
    if (!(sum > 0.0))
      throw ParseError("weights: vertex " + std::to_string(v) + " has no positive weights");
    for (auto& [j, w] : entries) w /= sum;
    out.rows.push_back(std::move(entries));
  }
  if (out.rows.empty()) throw ParseError("weights: empty weight table");
  return out;
}

SkinWeights load_skin_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open weights file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_skin_weights(buf.str());
}

std::string save_skin_weights(const SkinWeights& w) {
  json rows = json::array();
  for (const auto& row : w.rows) {
    json r = json::array();
    for (const auto& [j, weight] : row) r.push_back(json::array({j, weight}));
    rows.push_back(std::move(r));
  }
  return json{{"weights", std::move(rows)}}.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Omega table

Sym4 Sym4::weighted_point(const Vec3& u, double w) {
  Sym4 s;
  s.coeff = {w * u.x * u.x, w * u.x * u.y, w * u.x * u.z, w * u.x,
             w * u.y * u.y, w * u.y * u.z, w * u.y,
             w * u.z * u.z, w * u.z,
             w};
  return s;
}

int OmegaTable::joint_span() const {
  int span = 0;
  for (const auto& row : rows)
    for (const OmegaEntry& e : row) span = std::max(span, e.joint + 1);
  return span;
}

double OmegaTable::max_mass_error() const {
  double worst = 0.0;
  for (const auto& row : rows) {
    double sum = 0.0;
    for (const OmegaEntry& e : row) sum += e.value.mass();
    worst = std::max(worst, std::fabs(sum - 1.0));
  }
  return worst;
}

OmegaTable precompute_omega(const TriMesh& mesh, const SkinWeights& weights,
                            const SmoothingWeights& smoothing, const SmoothingConfig& config,
                            double prune_eps) {
  mesh.validate();
  const int n = mesh.vertex_count();
  if (weights.vertex_count() != n)
    throw ValidationError("weights cover " + std::to_string(weights.vertex_count()) +
                          " vertices, mesh has " + std::to_string(n));
  if (smoothing.vertex_count() != n)
    throw ValidationError("smoothing weights do not match the mesh");
  if (!(prune_eps >= 0.0) || prune_eps >= 1.0)
    throw ValidationError("prune threshold must be in [0, 1)");

  const int joints = weights.joint_span();
  std::vector<std::vector<double>> smoothed(joints);

  // One dense width-10 field per joint: w_vj * [u u^T, u; u^T, 1] at each
  // vertex, diffused by the shared smoothing operator.
  detail::parallel_for(joints, [&](int begin, int end) {
    for (int j = begin; j < end; ++j) {
      std::vector<double> field(static_cast<size_t>(n) * 10, 0.0);
      bool used = false;
      for (int v = 0; v < n; ++v) {
        for (const auto& [joint, w] : weights.rows[v]) {
          if (joint != j) continue;
          const Sym4 p = Sym4::weighted_point(mesh.positions[v], w);
          std::copy(p.coeff.begin(), p.coeff.end(), field.begin() + static_cast<size_t>(v) * 10);
          used = true;
        }
      }
      if (used) smoothed[j] = smooth(smoothing, config, field, 10);
    }
  }, 1);

  OmegaTable table;
  table.config = config;
  table.prune_eps = prune_eps;
  table.rows.resize(n);
  for (int v = 0; v < n; ++v) {
    auto& row = table.rows[v];
    for (int j = 0; j < joints; ++j) {
      if (smoothed[j].empty()) continue;
      Sym4 s;
      std::copy_n(smoothed[j].begin() + static_cast<size_t>(v) * 10, 10, s.coeff.begin());
      if (s.mass() > 0.0 && s.mass() >= prune_eps) row.push_back({j, s});
    }
    double total = 0.0;
    for (const OmegaEntry& e : row) total += e.value.mass();
    if (row.empty() || !(total > 0.0))
      throw EmptyInfluenceError("vertex " + std::to_string(v) +
                                " has no influence left after pruning at " +
                                std::to_string(prune_eps));
    const double inv = 1.0 / total;
    for (OmegaEntry& e : row)
      for (double& c : e.value.coeff) c *= inv;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Omega cache serialization (little-endian)

namespace {

void put_bytes(std::ostream& out, uint64_t v, int count) {
  char buf[8];
  for (int i = 0; i < count; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, count);
}

void put_u16(std::ostream& out, uint16_t v) { put_bytes(out, v, 2); }
void put_u32(std::ostream& out, uint32_t v) { put_bytes(out, v, 4); }
void put_u64(std::ostream& out, uint64_t v) { put_bytes(out, v, 8); }
void put_f64(std::ostream& out, double v) { put_bytes(out, std::bit_cast<uint64_t>(v), 8); }

uint64_t get_bytes(std::istream& in, int count) {
  char buf[8] = {};
  in.read(buf, count);
  if (in.gcount() != count) throw ParseError("omega cache: truncated");
  uint64_t v = 0;
  for (int i = 0; i < count; ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

uint16_t get_u16(std::istream& in) { return static_cast<uint16_t>(get_bytes(in, 2)); }
uint32_t get_u32(std::istream& in) { return static_cast<uint32_t>(get_bytes(in, 4)); }
uint64_t get_u64(std::istream& in) { return get_bytes(in, 8); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes(in, 8)); }

constexpr char kMagic[4] = {'E', 'D', 'D', 'M'};

}  // namespace

void save_omega_cache(std::ostream& out, const OmegaTable& table) {
  out.write(kMagic, 4);
  put_u32(out, 1);
  put_u64(out, static_cast<uint64_t>(table.rows.size()));
  for (const auto& row : table.rows) {
    if (row.size() > 0xffff)
      throw ValidationError("omega cache: vertex with more than 65535 influences");
    put_u16(out, static_cast<uint16_t>(row.size()));
    for (const OmegaEntry& e : row) {
      if (e.joint < 0) throw ValidationError("omega cache: negative joint index");
      put_u32(out, static_cast<uint32_t>(e.joint));
      for (double c : e.value.coeff) put_f64(out, c);
    }
  }
  put_f64(out, table.config.step);
  put_u32(out, static_cast<uint32_t>(table.config.iterations));
  put_f64(out, table.prune_eps);
  if (!out) throw ParseError("omega cache: write failed");
}

void save_omega_cache_file(const std::string& path, const OmegaTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  save_omega_cache(out, table);
}

OmegaTable load_omega_cache(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError("omega cache: bad magic");
  const uint32_t version = get_u32(in);
  if (version != 1)
    throw ParseError("omega cache: unsupported version " + std::to_string(version));

  OmegaTable table;
  const uint64_t count = get_u64(in);
  if (count > (1ull << 32)) throw ParseError("omega cache: implausible vertex count");
  table.rows.resize(count);
  for (uint64_t v = 0; v < count; ++v) {
    const uint16_t influences = get_u16(in);
    auto& row = table.rows[v];
    row.resize(influences);
    for (uint16_t k = 0; k < influences; ++k) {
      const uint32_t joint = get_u32(in);
      if (joint > 0x7fffffffu) throw ParseError("omega cache: joint index out of range");
      row[k].joint = static_cast<int>(joint);
      for (double& c : row[k].value.coeff) c = get_f64(in);
    }
    double sum = 0.0;
    for (const OmegaEntry& e : row) sum += e.value.mass();
    if (influences == 0 || std::fabs(sum - 1.0) > 1e-9)
      throw ParseError("omega cache: vertex " + std::to_string(v) +
                       " masses do not sum to 1");
  }
  table.config.step = get_f64(in);
  table.config.iterations = static_cast<int>(get_u32(in));
  table.prune_eps = get_f64(in);
  return table;
}

OmegaTable load_omega_cache_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open omega cache '" + path + "'");
  return load_omega_cache(in);
}

// ---------------------------------------------------------------------------
// Runtime deformation

std::vector<JointDeformOp> make_joint_ops(std::span<const AffineTransform> skinning) {
  std::vector<JointDeformOp> ops(skinning.size());
  for (size_t j = 0; j < skinning.size(); ++j) {
    const std::optional<AffineFactors> f = factor_affine(skinning[j]);
    if (!f)
      throw ValidationError("skinning matrix of joint " + std::to_string(j) +
                            " has a rank-deficient linear part");
    ops[j].rigid = f->rigid;
    ops[j].scale_shear = f->scale_shear.linear;
  }
  return ops;
}

namespace {

// Shared accumulation of sum_j (L_j, tau_ij) * Omega_ij in block form, where
// (L, tau) is the per-(vertex, joint) affine acting on the coefficients.
// Influences run in ascending joint order (rows are stored that way).
template <typename AffineAt>
std::vector<VertexBlend> accumulate_blend(const OmegaTable& omega, const TriMesh& rest,
                                          int op_count, AffineAt&& affine_at) {
  const int n = omega.vertex_count();
  if (rest.vertex_count() != n)
    throw ValidationError("omega table covers " + std::to_string(n) + " vertices, mesh has " +
                          std::to_string(rest.vertex_count()));
  if (omega.joint_span() > op_count)
    throw MissingJointError("omega references joint " + std::to_string(omega.joint_span() - 1) +
                            " but only " + std::to_string(op_count) +
                            " joint transforms were supplied");

  std::vector<VertexBlend> out(n);
  detail::parallel_for(n, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const Vec3 u = rest.positions[i];
      Mat3 q_block;
      Vec3 q_vec, p_vec;
      for (const OmegaEntry& e : omega.rows[i]) {
        const auto [lin, tau] = affine_at(u, e.joint);
        const Mat3 a = e.value.block_a().to_mat3();
        const Vec3 b = e.value.block_b();
        const double c = e.value.mass();
        q_block += lin * a + Mat3::outer(tau, b);
        q_vec += lin * b + c * tau;
        p_vec += b;
      }
      out[i] = {q_block, q_vec, p_vec};
    }
  });
  return out;
}

struct LinTau {
  Mat3 lin;
  Vec3 tau;
};

// Rotation extraction plus application, with the rank-deficiency fallback:
// use the rigid rotation of the vertex's largest-mass influence.
std::vector<Vec3> apply_blend(const TriMesh& rest, const OmegaTable& omega,
                              const std::vector<VertexBlend>& blends,
                              const std::vector<Mat3>& fallback_rotation, DeformStats* stats) {
  const int n = rest.vertex_count();
  std::vector<Vec3> out(n);
  std::vector<char> fell_back(n, 0);

  detail::parallel_for(n, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const VertexBlend& b = blends[i];
      const Mat3 m = b.linear - Mat3::outer(b.deformed_center, b.rest_center);
      const std::optional<Mat3> r = polar_rotation(m);
      Mat3 rot;
      if (r) {
        rot = *r;
      } else {
        int dominant = -1;
        double best = -1.0;
        for (const OmegaEntry& e : omega.rows[i])
          if (e.value.mass() > best) { best = e.value.mass(); dominant = e.joint; }
        rot = dominant >= 0 ? fallback_rotation[dominant] : Mat3::identity();
        fell_back[i] = 1;
      }
      out[i] = rot * rest.positions[i] + (b.deformed_center - rot * b.rest_center);
    }
  });

  if (stats) {
    stats->fallback_vertices.clear();
    for (int i = 0; i < n; ++i)
      if (fell_back[i]) stats->fallback_vertices.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<VertexBlend> blend(const OmegaTable& omega, std::span<const JointDeformOp> ops,
                               const TriMesh& rest) {
  return accumulate_blend(omega, rest, static_cast<int>(ops.size()),
                          [&](const Vec3& u, int j) -> LinTau {
                            const JointDeformOp& op = ops[j];
                            const Vec3 d = op.scale_shear * u - u;
                            return {op.rigid.linear,
                                    op.rigid.linear * d + op.rigid.translation};
                          });
}

std::vector<Vec3> deform_eddm(const TriMesh& rest, const OmegaTable& omega,
                              std::span<const AffineTransform> skinning, DeformStats* stats) {
  const std::vector<JointDeformOp> ops = make_joint_ops(skinning);
  const std::vector<VertexBlend> blends = blend(omega, ops, rest);
  std::vector<Mat3> fallback(ops.size());
  for (size_t j = 0; j < ops.size(); ++j) fallback[j] = ops[j].rigid.linear;
  return apply_blend(rest, omega, blends, fallback, stats);
}

std::vector<Vec3> deform_ddm(const TriMesh& rest, const OmegaTable& omega,
                             std::span<const AffineTransform> skinning, DeformStats* stats) {
  const std::vector<VertexBlend> blends =
      accumulate_blend(omega, rest, static_cast<int>(skinning.size()),
                       [&](const Vec3&, int j) -> LinTau {
                         return {skinning[j].linear, skinning[j].translation};
                       });
  std::vector<Mat3> fallback(skinning.size());
  for (size_t j = 0; j < skinning.size(); ++j)
    fallback[j] = polar_rotation(skinning[j].linear).value_or(Mat3::identity());
  return apply_blend(rest, omega, blends, fallback, stats);
}

std::vector<Vec3> deform_lbs(const TriMesh& rest, const SkinWeights& weights,
                             std::span<const AffineTransform> skinning) {
  const int n = rest.vertex_count();
  if (weights.vertex_count() != n)
    throw ValidationError("weights do not match the mesh");
  if (weights.joint_span() > static_cast<int>(skinning.size()))
    throw MissingJointError("weights reference a joint with no skinning matrix");

  std::vector<Vec3> out(n);
  detail::parallel_for(n, [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Vec3 acc;
      for (const auto& [j, w] : weights.rows[i]) acc += w * skinning[j].apply(rest.positions[i]);
      out[i] = acc;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Delta mush reference

namespace {

std::vector<Vec3> area_weighted_normals(const TriMesh& topology,
                                        std::span<const Vec3> positions) {
  std::vector<Vec3> normal(positions.size());
  for (const auto& t : topology.triangles) {
    const Vec3 fn = cross(positions[t[1]] - positions[t[0]], positions[t[2]] - positions[t[0]]);
    normal[t[0]] += fn;
    normal[t[1]] += fn;
    normal[t[2]] += fn;
  }
  return normal;
}

// Frame columns: [normal, tangent, normal x tangent]. The tangent is the
// lowest-index one-ring edge projected into the normal plane; edges parallel
// to the normal fall through to the next neighbor by index.
std::vector<Mat3> vertex_frames(const TriMesh& topology,
                                const std::vector<std::vector<int>>& rings,
                                std::span<const Vec3> positions) {
  const std::vector<Vec3> raw_normals = area_weighted_normals(topology, positions);
  std::vector<Mat3> frames(positions.size());

  for (size_t i = 0; i < positions.size(); ++i) {
    const double nn = norm(raw_normals[i]);
    if (!(nn > 0.0))
      throw DegenerateFrameError("vertex " + std::to_string(i) + " has a zero area normal");
    const Vec3 n = (1.0 / nn) * raw_normals[i];

    Vec3 tangent;
    bool found = false;
    for (int nb : rings[i]) {
      const Vec3 e = positions[nb] - positions[i];
      const Vec3 proj = e - dot(e, n) * n;
      if (norm_squared(proj) > 1e-16 * norm_squared(e)) {
        tangent = normalized(proj);
        found = true;
        break;
      }
    }
    if (!found)
      throw DegenerateFrameError("vertex " + std::to_string(i) +
                                 " has every one-ring edge parallel to its normal");
    frames[i] = Mat3::from_columns(n, tangent, cross(n, tangent));
  }
  return frames;
}

}  // namespace

std::vector<Vec3> deform_delta_mush(const TriMesh& rest, const SmoothingWeights& smoothing,
                                    const SmoothingConfig& config, const SkinWeights& weights,
                                    std::span<const AffineTransform> skinning) {
  const std::vector<std::vector<int>> rings = vertex_one_rings(rest);

  const std::vector<Vec3> rest_smooth = smooth_positions(smoothing, config, rest.positions);
  const std::vector<Mat3> rest_frames = vertex_frames(rest, rings, rest_smooth);

  std::vector<Vec3> deltas(rest.positions.size());
  for (size_t i = 0; i < deltas.size(); ++i)
    deltas[i] = transpose(rest_frames[i]) * (rest.positions[i] - rest_smooth[i]);

  const std::vector<Vec3> posed = deform_lbs(rest, weights, skinning);
  const std::vector<Vec3> posed_smooth = smooth_positions(smoothing, config, posed);
  const std::vector<Mat3> posed_frames = vertex_frames(rest, rings, posed_smooth);

  std::vector<Vec3> out(rest.positions.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = posed_smooth[i] + posed_frames[i] * deltas[i];
  return out;
}

}  // namespace eddm
