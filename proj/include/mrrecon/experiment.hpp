#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree_fwd.hpp>

#include "mrrecon/forward_model.hpp"
#include "mrrecon/gridding.hpp"
#include "mrrecon/objective.hpp"
#include "mrrecon/optimizer.hpp"
#include "mrrecon/phantom.hpp"
#include "mrrecon/trajectory.hpp"

namespace mrrecon {

struct TrajectorySpec {
  std::size_t arms = 6;
  std::size_t samples = 512;
  std::optional<double> turns;               // nullopt: nyquist_turns(N, arms)
  std::optional<std::filesystem::path> file;  // overrides the generator when set
};

struct SweepSpec {
  std::vector<std::size_t> arms;
  std::vector<std::size_t> samples;
  std::vector<std::optional<double>> snr_db;  // nullopt entries mean noise-free
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::size_t n_grid = 128;
  TrajectorySpec trajectory;
  std::optional<double> snr_db;
  Hyperparameters hyper;
  OptimConfig optim;
  GriddingConfig gridding;
  PhantomSpec phantom = PhantomSpec::standard(128);
  SweepSpec sweep;
  std::filesystem::path output_dir = "results";
  bool export_images = true;

  void validate() const;
};

// Sections: [run] name, seed, output, export_images; [grid] n;
// [trajectory] arms, samples, turns, file; [noise] snr_db;
// [regularization] lambda1, alpha1, lambda0, alpha0;
// [optimizer] max_iters, rel_tol, grad_tol, ls_max_evals, init, init_file;
// [gridding] kernel_width, oversampling, beta, density, weights_file;
// [phantom] see phantom_spec_from_tree; [sweep] arms, samples, snr_db as
// comma-separated lists. Numeric values "auto" and "none" mean unset.
// Missing sweep lists default to the single [trajectory]/[noise] value.
ExperimentConfig experiment_config_from_tree(const boost::property_tree::ptree& tree,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig default_experiment_config();
void save_experiment_config(const ExperimentConfig& config, const std::filesystem::path& path);

struct CellSpec {
  std::size_t arms = 0;
  std::size_t samples = 0;
  std::optional<double> snr_db;

  std::string run_id() const;  // e.g. "a6_s512_snr30", "a6_s512_clean"
  friend auto operator<=>(const CellSpec&, const CellSpec&) = default;
};

// Deterministic per-cell seed obtained by splitmix64 mixing of the top-level
// seed with the cell parameters, so cells do not depend on execution order.
std::uint64_t cell_seed(std::uint64_t top_seed, const CellSpec& cell);

std::vector<CellSpec> sweep_cells(const ExperimentConfig& config);

// The trajectory described by [trajectory] (or a sweep cell) for this grid.
Trajectory build_trajectory(const ExperimentConfig& config);
Trajectory build_trajectory(const ExperimentConfig& config, const CellSpec& cell);

struct ResultRow {
  std::string run_id;
  std::size_t arms = 0;
  std::size_t samples = 0;
  std::optional<double> snr_db;
  std::string method;  // "regularized" or "gridding"
  std::string roi;     // "roi1" or "roi2"
  QuadError error;
  double variance = 0.0;
};

std::vector<ResultRow> metric_rows(const std::string& run_id, const CellSpec& cell, const std::string& method,
                                   const ComplexImage& recon, const Phantom& phantom);

// Header: run-id,arms,samples,snr_db,method,roi,absolute,normalized,variance
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows, bool append = false);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

// Regularized reconstruction from a trajectory and data.
OptimResult reconstruct_regularized(const Trajectory& traj, std::span<const cplx> samples, std::size_t n_grid,
                                    const Hyperparameters& hyper, const OptimConfig& optim,
                                    const LagArray* cached_g = nullptr);

struct CellResult {
  CellSpec cell;
  ComplexImage regularized;
  ComplexImage gridding;
  OptimReport report;
  std::vector<ResultRow> rows;
  double kspace_distance_regularized = 0.0;
  double kspace_distance_gridding = 0.0;
  double precompute_seconds = 0.0;
  double optimize_seconds = 0.0;
};

// Simulates the cell's acquisition of the phantom and runs both methods.
// `g_cache` (optional) memoizes G across cells sharing a trajectory.
CellResult run_cell(const ExperimentConfig& config, const Phantom& phantom, const CellSpec& cell,
                    std::map<std::string, LagArray>* g_cache = nullptr);

// Magnitude, phase and difference-to-reference PGMs under `prefix`.
// `diff_scale` fixes the upper end of the difference map (0: use its own max).
void export_images(const std::filesystem::path& prefix, const ComplexImage& image, const ComplexImage* reference,
                   double diff_scale = 0.0);

// Runs every sweep cell in sorted order, writes <output>/results.csv, the
// resolved config and (optionally) per-cell images and traces.
using ProgressFn = std::function<void(const CellResult&)>;
std::vector<CellResult> run_sweep(const ExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace mrrecon
