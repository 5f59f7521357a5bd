#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mrrecon/array_io.hpp"
#include "mrrecon/experiment.hpp"
#include "mrrecon/kernels.hpp"
#include "mrrecon/pgm.hpp"

namespace fs = std::filesystem;
using namespace mrrecon;

namespace {

struct CommonOptions {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
};

ExperimentConfig resolve_config(const CommonOptions& opts) {
  ExperimentConfig config = opts.config.empty() ? default_experiment_config() : load_experiment_config(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  return config;
}

fs::path prepare_out(const CommonOptions& opts) {
  fs::path out(opts.out);
  fs::create_directories(out);
  return out;
}

Trajectory trajectory_from(const std::string& path, const ExperimentConfig& config) {
  return path.empty() ? build_trajectory(config) : load_trajectory(path);
}

ComplexImage reference_from(const std::string& path, const ExperimentConfig& config) {
  return path.empty() ? make_phantom(config.phantom).image : read_image(path);
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Experiment configuration (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--seed", opts.seed, "Top-level seed (overrides [run] seed)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized and gridding reconstruction of spiral k-space data"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string traj_path, samples_path, phantom_path, g_path, recon_path, reference_path, results_path, prefix;
  bool log_scale = false;

  auto* phantom_cmd = app.add_subcommand("phantom", "Write the simulated phantom, its ROIs and image exports");
  add_common(phantom_cmd, opts);

  auto* traj_cmd = app.add_subcommand("traj", "Generate the spiral trajectory CSV");
  add_common(traj_cmd, opts);

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate k-space data of an image along a trajectory");
  add_common(sim_cmd, opts);
  sim_cmd->add_option("--traj", traj_path, "Trajectory CSV (default: from config)")->check(CLI::ExistingFile);
  sim_cmd->add_option("--image", phantom_path, "Object image (default: config phantom)")->check(CLI::ExistingFile);

  auto* pre_cmd = app.add_subcommand("precompute", "Compute the kernels G and D");
  add_common(pre_cmd, opts);
  pre_cmd->add_option("--traj", traj_path, "Trajectory CSV")->check(CLI::ExistingFile);
  pre_cmd->add_option("--samples", samples_path, "k-space samples")->required()->check(CLI::ExistingFile);

  auto* reg_cmd = app.add_subcommand("recon-reg", "Regularized reconstruction");
  add_common(reg_cmd, opts);
  reg_cmd->add_option("--traj", traj_path, "Trajectory CSV")->check(CLI::ExistingFile);
  reg_cmd->add_option("--samples", samples_path, "k-space samples")->required()->check(CLI::ExistingFile);
  reg_cmd->add_option("--g", g_path, "Precomputed G (checked against the trajectory)")->check(CLI::ExistingFile);

  auto* grid_cmd = app.add_subcommand("recon-grid", "Gridding reconstruction");
  add_common(grid_cmd, opts);
  grid_cmd->add_option("--traj", traj_path, "Trajectory CSV")->check(CLI::ExistingFile);
  grid_cmd->add_option("--samples", samples_path, "k-space samples")->required()->check(CLI::ExistingFile);

  auto* metrics_cmd = app.add_subcommand("metrics", "Quadratic error and ROI2 variance of a reconstruction");
  add_common(metrics_cmd, opts);
  metrics_cmd->add_option("--recon", recon_path, "Reconstructed image")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--reference", reference_path, "Reference image (default: config phantom)")
      ->check(CLI::ExistingFile);
  std::string method = "regularized";
  metrics_cmd->add_option("--method", method, "Method label for the results table");
  metrics_cmd->add_option("--results", results_path, "Results CSV to append to (default: <out>/results.csv)");

  auto* psf_cmd = app.add_subcommand("psf", "Export |G| as a PSF image with central profiles");
  add_common(psf_cmd, opts);
  psf_cmd->add_option("--traj", traj_path, "Trajectory CSV")->check(CLI::ExistingFile);
  psf_cmd->add_option("--g", g_path, "Precomputed G")->check(CLI::ExistingFile);
  psf_cmd->add_flag("--log", log_scale, "Log-scale display");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the full experiment matrix for both methods");
  add_common(sweep_cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto config = resolve_config(opts);

    if (*phantom_cmd) {
      const auto out = prepare_out(opts);
      const auto phantom = make_phantom(config.phantom);
      write_image(out / "phantom.bin", phantom.image);
      save_phantom_spec(config.phantom, out / "phantom.ini");
      export_images(out / "phantom", phantom.image, nullptr);
      for (const Roi* roi : {&phantom.roi1, &phantom.roi2}) {
        std::vector<double> mask(roi->mask.size());
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = roi->mask[i] ? 1.0 : 0.0;
        write_pgm16(out / (roi->name + ".pgm"), to_gray16(mask, roi->n_grid, roi->n_grid, 0.0, 1.0));
      }
      std::cout << "phantom " << config.n_grid << "x" << config.n_grid << ": roi1 " << phantom.roi1.count()
                << " px, roi2 " << phantom.roi2.count() << " px\n";
    } else if (*traj_cmd) {
      const auto out = prepare_out(opts);
      const auto traj = build_trajectory(config);
      save_trajectory(traj, out / "trajectory.csv");
      std::cout << "trajectory: " << traj.size() << " points, fingerprint " << fingerprint(traj) << '\n';
    } else if (*sim_cmd) {
      const auto out = prepare_out(opts);
      const auto traj = trajectory_from(traj_path, config);
      const auto image = reference_from(phantom_path, config);
      const CellSpec cell{config.trajectory.arms, config.trajectory.samples, config.snr_db};
      const auto clean = nudft_forward(image, traj);
      const auto samples = add_noise(clean, {config.snr_db, cell_seed(config.seed, cell)});
      write_samples(out / "samples.bin", samples);
      std::cout << "samples: " << samples.size();
      if (config.snr_db) std::cout << ", measured SNR " << measured_snr_db(clean, samples) << " dB";
      std::cout << '\n';
    } else if (*pre_cmd) {
      const auto out = prepare_out(opts);
      const auto traj = trajectory_from(traj_path, config);
      const auto samples = read_samples(samples_path);
      if (samples.size() != traj.size())
        throw std::invalid_argument("trajectory has " + std::to_string(traj.size()) + " points but data has " +
                                    std::to_string(samples.size()) + " samples");
      bool hit = false;
      const auto g = load_or_compute_g(out / "g.bin", traj, config.n_grid, &hit);
      write_image(out / "d.bin", compute_d(samples, traj, config.n_grid));
      std::cout << "G " << (hit ? "loaded from cache" : "computed") << ", D written\n";
    } else if (*reg_cmd) {
      const auto out = prepare_out(opts);
      const auto traj = trajectory_from(traj_path, config);
      const auto samples = read_samples(samples_path);
      std::optional<LagArray> g;
      if (!g_path.empty()) g = load_g_checked(g_path, traj, config.n_grid);
      const auto result = reconstruct_regularized(traj, samples, config.n_grid, config.hyper, config.optim,
                                                  g ? &*g : nullptr);
      write_image(out / "regularized.bin", result.image);
      write_trace_csv(out / "trace.csv", result.report);
      export_images(out / "regularized", result.image, nullptr);
      std::cout << "iterations " << result.report.iterations << ", stop " << to_string(result.report.stop_reason)
                << ", J " << result.report.trace.back().value.total << '\n';
    } else if (*grid_cmd) {
      const auto out = prepare_out(opts);
      const auto traj = trajectory_from(traj_path, config);
      const auto samples = read_samples(samples_path);
      GriddingConfig grid_cfg = config.gridding;
      grid_cfg.arms = config.trajectory.arms;
      const auto weights = density_weights(traj, grid_cfg);
      const auto image = grid_reconstruct(samples, traj, config.n_grid, grid_cfg, weights);
      write_image(out / "gridding.bin", image);
      write_weights_csv(out / "weights.csv", weights);
      export_images(out / "gridding", image, nullptr);
      std::cout << "gridding image written\n";
    } else if (*metrics_cmd) {
      const auto out = prepare_out(opts);
      const auto recon = read_image(recon_path);
      auto phantom = make_phantom(config.phantom);
      if (!reference_path.empty()) phantom.image = read_image(reference_path);
      if (recon.size() != phantom.image.size())
        throw std::invalid_argument("reconstruction is " + std::to_string(recon.size()) + "x" +
                                    std::to_string(recon.size()) + " but the reference is " +
                                    std::to_string(phantom.image.size()));
      const CellSpec cell{config.trajectory.arms, config.trajectory.samples, config.snr_db};
      const auto rows = metric_rows(cell.run_id(), cell, method, recon, phantom);
      write_results_csv(results_path.empty() ? out / "results.csv" : fs::path(results_path), rows, true);
      export_images(out / (method + "_vs_reference"), recon, &phantom.image);
      for (const auto& r : rows)
        std::cout << r.roi << ": absolute " << r.error.absolute << ", normalized "
                  << (r.error.normalized ? std::to_string(*r.error.normalized) : "undefined") << ", variance "
                  << r.variance << '\n';
    } else if (*psf_cmd) {
      const auto out = prepare_out(opts);
      const auto traj = trajectory_from(traj_path, config);
      const auto g = g_path.empty() ? compute_g(traj, config.n_grid) : load_g_checked(g_path, traj, config.n_grid);
      export_psf(g, out / "psf", log_scale);
      if (auto ring = first_aliasing_ring(g))
        std::cout << "first aliasing ring at " << *ring << " px along the central row\n";
      else
        std::cout << "no aliasing ring along the central row\n";
    } else if (*sweep_cmd) {
      if (app.get_subcommand("sweep")->count("--out")) config.output_dir = opts.out;
      const auto start = std::chrono::steady_clock::now();
      run_sweep(config, [](const CellResult& r) {
        std::cout << r.cell.run_id() << ": " << r.report.iterations << " iterations ("
                  << to_string(r.report.stop_reason) << "), precompute " << r.precompute_seconds << " s, optimize "
                  << r.optimize_seconds << " s\n";
        for (const auto& row : r.rows)
          if (row.roi == "roi1") std::cout << "  " << row.method << " roi1 error " << row.error.absolute << '\n';
      });
      std::cout << "sweep finished in "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s, results in "
                << (config.output_dir / "results.csv").string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "mrrecon: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
