#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eddm/compare.hpp"
#include "eddm/deform.hpp"
#include "eddm/error.hpp"
#include "eddm/mesh.hpp"
#include "eddm/numerics.hpp"
#include "eddm/rig.hpp"
#include "eddm/scenario.hpp"
#include "eddm/smoothing.hpp"

namespace {

struct PrecomputeArgs {
  std::string mesh, weights, out;
  std::string precision = "double";
  double kappa = 0.5;
  int iterations = 16;
  double prune = eddm::kDefaultPruneEps;
};

void run_precompute(const PrecomputeArgs& a) {
  const eddm::TriMesh mesh = eddm::load_obj_file(a.mesh);
  const eddm::SkinWeights weights = eddm::load_skin_weights_file(a.weights);

  const auto precision = a.precision == "single" ? eddm::WeightPrecision::kSingleExperiment
                                                 : eddm::WeightPrecision::kDouble;
  const eddm::SmoothingWeights smoothing = eddm::cotangent_weights(mesh, precision);

  double raw_min = smoothing.raw_row_sums.empty() ? 0.0 : smoothing.raw_row_sums.front();
  double raw_max = raw_min;
  for (double s : smoothing.raw_row_sums) {
    raw_min = std::min(raw_min, s);
    raw_max = std::max(raw_max, s);
  }
  std::printf("smoothing rows: %d  max |row sum - 1|: %.3g  uniform fallbacks: %zu\n",
              smoothing.vertex_count(), smoothing.max_row_sum_error(),
              smoothing.degenerate_rows.size());
  std::printf("raw cotangent row sums: min %.6g  max %.6g\n", raw_min, raw_max);

  const eddm::SmoothingConfig config{a.kappa, a.iterations};
  const eddm::OmegaTable omega = eddm::precompute_omega(mesh, weights, smoothing, config, a.prune);
  std::printf("omega rows: %d  joints: %d  max |mass sum - 1|: %.3g\n", omega.vertex_count(),
              omega.joint_span(), omega.max_mass_error());

  eddm::save_omega_cache_file(a.out, omega);
  std::printf("wrote %s\n", a.out.c_str());
}

struct DeformArgs {
  std::string omega, weights, mesh, rig, pose, out;
  std::string mode;
  double kappa = 0.5;
  int iterations = 16;
};

void run_deform(const DeformArgs& a) {
  const eddm::TriMesh mesh = eddm::load_obj_file(a.mesh);
  const eddm::JointHierarchy rig = eddm::load_rig_file(a.rig);
  const eddm::Pose pose = eddm::load_pose_file(a.pose, rig);
  const std::vector<eddm::AffineTransform> skinning = eddm::skinning_matrices(rig, pose);

  std::vector<eddm::Vec3> out;
  if (a.mode == "eddm" || a.mode == "ddm") {
    if (a.omega.empty())
      throw eddm::ValidationError("mode " + a.mode + " needs --omega (run precompute first)");
    const eddm::OmegaTable omega = eddm::load_omega_cache_file(a.omega);
    eddm::DeformStats stats;
    out = a.mode == "eddm" ? eddm::deform_eddm(mesh, omega, skinning, &stats)
                           : eddm::deform_ddm(mesh, omega, skinning, &stats);
    if (!stats.fallback_vertices.empty())
      std::fprintf(stderr,
                   "warning: %zu vertices had a rank-deficient blend and fell back to their "
                   "dominant joint's rotation\n",
                   stats.fallback_vertices.size());
  } else {
    if (a.weights.empty()) throw eddm::ValidationError("mode " + a.mode + " needs --weights");
    const eddm::SkinWeights weights = eddm::load_skin_weights_file(a.weights);
    if (a.mode == "lbs") {
      out = eddm::deform_lbs(mesh, weights, skinning);
    } else {
      const eddm::SmoothingWeights smoothing = eddm::cotangent_weights(mesh);
      out = eddm::deform_delta_mush(mesh, smoothing, {a.kappa, a.iterations}, weights, skinning);
    }
  }
  eddm::save_obj_file(a.out, mesh, out);
}

struct CompareArgs {
  std::string a, b, report;
  double threshold = 0.0;
};

int run_compare(const CompareArgs& args) {
  const eddm::TriMesh mesh_a = eddm::load_obj_file(args.a);
  const eddm::TriMesh mesh_b = eddm::load_obj_file(args.b);
  const eddm::CompareReport report =
      eddm::compare_positions(mesh_a.positions, mesh_b.positions, args.threshold);

  std::ofstream csv(args.report, std::ios::binary);
  csv << eddm::compare_csv(report);
  if (!csv) throw eddm::ValidationError("cannot write report '" + args.report + "'");

  std::printf("vertices: %d\n", report.vertex_count());
  std::printf("max: %.17g\n", report.max_distance);
  std::printf("mean: %.17g\n", report.mean_distance);
  std::printf("rms: %.17g\n", report.rms_distance);
  std::printf("over_threshold_pct: %.17g\n", report.over_threshold_pct);
  return report.within_threshold() ? 0 : 3;
}

struct BenchArgs {
  long long samples = 1000000;
  long long seed = 42;
};

void run_bench_polar(const BenchArgs& a) {
  if (a.samples < 1) throw eddm::ValidationError("--samples must be >= 1");

  std::mt19937_64 rng(static_cast<uint64_t>(a.seed));
  const auto uniform = [&rng] { return double(rng() >> 11) * 0x1p-53 * 4.0 - 2.0; };

  std::vector<eddm::Mat3> samples(static_cast<size_t>(a.samples));
  for (eddm::Mat3& m : samples)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = uniform();

  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;

  const auto t0 = clock::now();
  for (const eddm::Mat3& m : samples)
    if (const auto r = eddm::polar_rotation(m)) sink = sink + (*r)(0, 0);
  const auto t1 = clock::now();
  for (const eddm::Mat3& m : samples) sink = sink + eddm::svd_rotation(m)(0, 0);
  const auto t2 = clock::now();

  double discrepancy = 0.0;
  for (const eddm::Mat3& m : samples)
    if (const auto r = eddm::polar_rotation(m))
      discrepancy = std::max(discrepancy, eddm::max_abs_diff(*r, eddm::svd_rotation(m)));

  const double n = static_cast<double>(a.samples);
  const auto ns = [](clock::duration d) {
    return double(std::chrono::duration_cast<std::chrono::nanoseconds>(d).count());
  };
  std::printf("name,value\n");
  std::printf("polar_rotation_ns_per_op,%.17g\n", ns(t1 - t0) / n);
  std::printf("svd_rotation_ns_per_op,%.17g\n", ns(t2 - t1) / n);
  std::printf("max_abs_discrepancy,%.17g\n", discrepancy);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct delta mush skinning toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  PrecomputeArgs pre;
  CLI::App* cmd_pre =
      app.add_subcommand("precompute", "Build the binary blend-coefficient cache");
  cmd_pre->add_option("--mesh", pre.mesh, "Rest mesh (OBJ)")->required();
  cmd_pre->add_option("--weights", pre.weights, "Skin weights (JSON)")->required();
  cmd_pre->add_option("--kappa", pre.kappa, "Smoothing step in (0, 1]")->capture_default_str();
  cmd_pre->add_option("--iterations", pre.iterations, "Smoothing iterations")->capture_default_str();
  cmd_pre->add_option("--prune", pre.prune, "Influence mass pruning threshold")->capture_default_str();
  cmd_pre->add_option("--precision", pre.precision, "Laplacian weight precision")
      ->capture_default_str()
      ->check(CLI::IsMember({"double", "single"}));
  cmd_pre->add_option("--out", pre.out, "Output cache path")->required();
  cmd_pre->callback([&] { run_precompute(pre); });

  DeformArgs def;
  CLI::App* cmd_def = app.add_subcommand("deform", "Deform a mesh with a rig pose");
  cmd_def->add_option("--mesh", def.mesh, "Rest mesh (OBJ)")->required();
  CLI::Option* omega_opt = cmd_def->add_option("--omega", def.omega, "Blend-coefficient cache");
  cmd_def->add_option("--weights", def.weights, "Skin weights (JSON)")->excludes(omega_opt);
  cmd_def->add_option("--rig", def.rig, "Rig (JSON)")->required();
  cmd_def->add_option("--pose", def.pose, "Pose (JSON)")->required();
  cmd_def->add_option("--mode", def.mode, "Deformer")
      ->required()
      ->check(CLI::IsMember({"eddm", "ddm", "lbs", "dm"}));
  cmd_def->add_option("--kappa", def.kappa, "Smoothing step (dm mode)")->capture_default_str();
  cmd_def->add_option("--iterations", def.iterations, "Smoothing iterations (dm mode)")->capture_default_str();
  cmd_def->add_option("--out", def.out, "Output mesh (OBJ)")->required();
  cmd_def->callback([&] { run_deform(def); });

  CompareArgs cmp;
  CLI::App* cmd_cmp = app.add_subcommand("compare", "Compare two meshes vertex by vertex");
  cmd_cmp->add_option("--a", cmp.a, "First mesh (OBJ)")->required();
  cmd_cmp->add_option("--b", cmp.b, "Second mesh (OBJ)")->required();
  cmd_cmp->add_option("--report", cmp.report, "Output CSV path")->required();
  cmd_cmp->add_option("--threshold", cmp.threshold, "Max-distance pass threshold")->required();
  cmd_cmp->callback([&] { exit_code = run_compare(cmp); });

  std::string scenario_name, scenario_outdir;
  CLI::App* cmd_scn = app.add_subcommand("scenario", "Write a named demo fixture");
  cmd_scn->add_option("--name", scenario_name, "fig1, fig2 or stress")->required();
  cmd_scn->add_option("--outdir", scenario_outdir, "Output directory")->required();
  cmd_scn->callback([&] {
    eddm::write_scenario_files(scenario_outdir, eddm::make_scenario(scenario_name));
    std::printf("wrote %s fixture to %s\n", scenario_name.c_str(), scenario_outdir.c_str());
  });

  BenchArgs bench;
  CLI::App* cmd_bench =
      app.add_subcommand("bench-polar", "Time the closed-form polar kernel against the SVD route");
  cmd_bench->add_option("--samples", bench.samples, "Matrix count")->capture_default_str();
  cmd_bench->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  cmd_bench->callback([&] { run_bench_polar(bench); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const eddm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
