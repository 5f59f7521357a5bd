#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrrecon/objective.hpp"

namespace mrrecon {

enum class InitKind { zero, adjoint, user };

struct OptimConfig {
  int max_iters = 50;
  double rel_tol = 1e-6;   // stop when (J_k - J_{k+1}) / |J_k| < rel_tol
  double grad_tol = 0.0;   // stop when ||grad|| <= grad_tol
  int ls_max_evals = 3;    // criterion evaluations per line search
  InitKind init = InitKind::zero;
  std::optional<ComplexImage> user_init;

  void validate() const;
};

enum class StopReason { max_iterations, relative_decrease, gradient_norm, stalled };

std::string to_string(StopReason reason);

struct TraceEntry {
  int iteration = 0;
  CriterionValue value;
  double step = 0.0;
  double grad_norm = 0.0;
  int criterion_evals = 0;
};

struct OptimReport {
  int iterations = 0;
  std::vector<TraceEntry> trace;  // entry 0 is the initial point
  double final_grad_norm = 0.0;
  StopReason stop_reason = StopReason::max_iterations;
  int gradient_evals = 0;
  int criterion_evals = 0;
};

struct OptimResult {
  ComplexImage image;
  OptimReport report;
};

// Nonlinear conjugate gradient with the Polak-Ribiere+ update, descent
// restarts, and a line search that interpolates a quadratic through the
// current value, slope and one trial step (seeded by the last accepted step),
// within at most ls_max_evals criterion evaluations per iteration.
OptimResult minimize(const ObjectiveContext& ctx, const OptimConfig& config);

// CSV: iteration,J_reg,J_ls,omega1,omega0,step,grad_norm
void write_trace_csv(const std::filesystem::path& path, const OptimReport& report);

}  // namespace mrrecon
