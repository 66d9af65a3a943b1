#pragma once

// Shared helpers for the test binaries: deterministic random draws, dense
// reference oracles, and subprocess capture for exercising the CLI.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "eddm/linalg.hpp"
#include "eddm/smoothing.hpp"

namespace testsup {

// Same draw convention as the tool's benchmark stream: the top 53 bits of a
// mt19937_64 word give a uniform double in [0, 1).
inline double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline eddm::Vec3 uniform_vec3(std::mt19937_64& rng, double lo, double hi) {
  const double x = uniform(rng, lo, hi);
  const double y = uniform(rng, lo, hi);
  const double z = uniform(rng, lo, hi);
  return {x, y, z};
}

inline eddm::Mat3 uniform_mat3(std::mt19937_64& rng, double lo, double hi) {
  eddm::Mat3 m;
  for (double& c : m.v) c = uniform(rng, lo, hi);
  return m;
}

inline eddm::Quat random_rotation_quat(std::mt19937_64& rng) {
  eddm::Vec3 axis;
  do {
    axis = uniform_vec3(rng, -1.0, 1.0);
  } while (eddm::norm(axis) < 1e-3);
  return eddm::Quat::from_axis_angle(axis, uniform(rng, 0.0, 6.28318530717958648));
}

inline eddm::Mat3 random_rotation(std::mt19937_64& rng) {
  return random_rotation_quat(rng).to_mat3();
}

inline eddm::AffineTransform random_rigid(std::mt19937_64& rng) {
  return {random_rotation(rng), uniform_vec3(rng, -2.0, 2.0)};
}

// A^T A + eps I: symmetric positive definite with a bounded condition number.
inline eddm::Mat3 random_spd(std::mt19937_64& rng, double eps = 0.5) {
  const eddm::Mat3 a = uniform_mat3(rng, -1.0, 1.0);
  eddm::Mat3 s = eddm::transpose(a) * a;
  s.v[0] += eps;
  s.v[4] += eps;
  s.v[8] += eps;
  return s;
}

inline double max_abs_distance(const std::vector<eddm::Vec3>& a,
                               const std::vector<eddm::Vec3>& b) {
  if (a.size() != b.size()) throw std::runtime_error("position set size mismatch");
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, eddm::norm(a[i] - b[i]));
  return worst;
}

// --- dense smoothing oracle ------------------------------------------------

// Row-major dense n x n copy of the sparse smoothing matrix.
inline std::vector<double> dense_weight_matrix(const eddm::SmoothingWeights& w) {
  const int n = w.vertex_count();
  std::vector<double> dense(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = w.offsets[i]; k < w.offsets[i + 1]; ++k)
      dense[size_t(i) * n + w.neighbors[k]] = w.weights[k];
  return dense;
}

inline std::vector<double> dense_matmul(const std::vector<double>& a,
                                        const std::vector<double>& b, int n) {
  std::vector<double> out(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double aik = a[size_t(i) * n + k];
      for (int j = 0; j < n; ++j) out[size_t(i) * n + j] += aik * b[size_t(k) * n + j];
    }
  return out;
}

// B = ((1 - step) I + step W)^p as an explicit matrix power.
inline std::vector<double> dense_smoothing_power(const eddm::SmoothingWeights& w,
                                                 const eddm::SmoothingConfig& cfg) {
  const int n = w.vertex_count();
  std::vector<double> step(size_t(n) * n, 0.0);
  const std::vector<double> dense = dense_weight_matrix(w);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      step[size_t(i) * n + j] = cfg.step * dense[size_t(i) * n + j] + (i == j ? 1.0 - cfg.step : 0.0);
  std::vector<double> b(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) b[size_t(i) * n + i] = 1.0;
  for (int it = 0; it < cfg.iterations; ++it) b = dense_matmul(b, step, n);
  return b;
}

// B^p X for a generic per-vertex payload, the reference for sparse smooth().
inline std::vector<double> dense_smooth(const eddm::SmoothingWeights& w,
                                        const eddm::SmoothingConfig& cfg,
                                        const std::vector<double>& values, int width) {
  const int n = w.vertex_count();
  if (values.size() != size_t(n) * width) throw std::runtime_error("payload size mismatch");
  const std::vector<double> b = dense_smoothing_power(w, cfg);
  std::vector<double> out(values.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double bik = b[size_t(i) * n + k];
      for (int c = 0; c < width; ++c) out[size_t(i) * width + c] += bik * values[size_t(k) * width + c];
    }
  return out;
}

// --- subprocess capture ----------------------------------------------------

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

inline CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + command);
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Path of the installed/built CLI binary, injected by ctest.
inline std::string tool_path() {
  const char* path = std::getenv("EDDM_TOOL");
  if (!path || !*path) throw std::runtime_error("EDDM_TOOL is not set; run through ctest");
  return path;
}

// Scratch directory removed on scope exit.
struct TempDir {
  std::string path;

  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "eddm-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return path + "/" + name; }
};

// --- CSV -------------------------------------------------------------------

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  for (const char ch : text) {
    if (ch == '\n') {
      row.push_back(cell);
      cell.clear();
      rows.push_back(row);
      row.clear();
    } else if (ch == ',') {
      row.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  if (!cell.empty() || !row.empty()) {
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace testsup
