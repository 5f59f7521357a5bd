#include "mrrecon/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace mrrecon {

void OptimConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(rel_tol >= 0.0) || !(grad_tol >= 0.0)) throw std::invalid_argument("tolerances must be nonnegative");
  if (ls_max_evals < 1) throw std::invalid_argument("ls_max_evals must be at least 1");
  if (init == InitKind::user && !user_init) throw std::invalid_argument("user initialization requires an image");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::relative_decrease: return "relative_decrease";
    case StopReason::gradient_norm: return "gradient_norm";
    case StopReason::stalled: return "stalled";
  }
  return "unknown";
}

namespace {

ComplexImage step_along(const ComplexImage& f, const ComplexImage& d, double t) {
  ComplexImage out = f;
  auto dst = out.values();
  auto dir = d.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += t * dir[i];
  return out;
}

struct LineSearchResult {
  bool accepted = false;
  double step = 0.0;
  CriterionValue value;
  ComplexImage image;
  int evals = 0;
  double smallest_trial = 0.0;
  bool at_noise_floor = true;
};

// phi(t) = J(f + t d), phi(0) = value0, phi'(0) = slope < 0.
LineSearchResult line_search(const ObjectiveContext& ctx, const ComplexImage& f, const ComplexImage& d,
                             double value0, double slope, double seed, int budget) {
  LineSearchResult best;
  best.value.total = value0;
  best.smallest_trial = seed;
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(value0);

  auto trial = [&](double t) {
    auto image = step_along(f, d, t);
    const auto value = evaluate(image, ctx);
    ++best.evals;
    best.smallest_trial = std::min(best.smallest_trial, t);
    if (std::abs(value.total - value0) > noise) best.at_noise_floor = false;
    if (value.total < best.value.total) {
      best.accepted = true;
      best.step = t;
      best.value = value;
      best.image = std::move(image);
    }
    return value.total;
  };

  const double t1 = seed;
  const double phi1 = trial(t1);
  if (best.evals >= budget) return best;

  // Quadratic through phi(0), phi'(0), phi(t1).
  const double curvature = (phi1 - value0 - slope * t1) / (t1 * t1);
  double t2;
  if (curvature > 0.0) {
    t2 = -slope / (2.0 * curvature);
    if (phi1 >= value0)
      t2 = std::clamp(t2, 1e-3 * t1, 0.5 * t1);
    else
      t2 = std::min(t2, 100.0 * t1);
  } else {
    t2 = phi1 < value0 ? 4.0 * t1 : 0.5 * t1;
  }
  trial(t2);

  // Nothing decreased: halve from the smallest step tried.
  double t = std::min(t1, t2);
  while (!best.accepted && best.evals < budget) {
    t *= 0.5;
    trial(t);
  }
  return best;
}

}  // namespace

OptimResult minimize(const ObjectiveContext& ctx, const OptimConfig& config) {
  config.validate();
  const std::size_t n = ctx.n_grid();

  ComplexImage f(n);
  if (config.init == InitKind::adjoint) {
    f = ctx.kernels().d;
  } else if (config.init == InitKind::user) {
    if (config.user_init->size() != n) throw std::invalid_argument("minimize: initial image has the wrong size");
    f = *config.user_init;
  }

  OptimReport report;
  auto value = evaluate(f, ctx);
  auto grad = grad_jreg(f, ctx);
  report.criterion_evals = 1;
  report.gradient_evals = 1;
  double grad_norm = norm2(grad.values());
  report.trace.push_back({0, value, 0.0, grad_norm, 1});

  ComplexImage dir = -1.0 * grad;
  double seed = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  auto finish = [&](StopReason reason) {
    report.stop_reason = reason;
    report.final_grad_norm = grad_norm;
    return OptimResult{std::move(f), std::move(report)};
  };

  if (grad_norm <= config.grad_tol || grad_norm == 0.0) return finish(StopReason::gradient_norm);

  for (int k = 1; k <= config.max_iters; ++k) {
    double slope = real_dot(grad.values(), dir.values());
    if (!(slope < 0.0)) {
      dir = -1.0 * grad;
      slope = -grad_norm * grad_norm;
    }
    if (seed <= 0.0) {
      seed = value.total > 0.0 ? value.total / -slope : 1.0 / norm2(dir.values());
    }

    auto ls = line_search(ctx, f, dir, value.total, slope, seed, config.ls_max_evals);
    report.criterion_evals += ls.evals;
    report.iterations = k;

    if (!ls.accepted) {
      report.trace.push_back({k, value, 0.0, grad_norm, ls.evals});
      const double f_norm = std::max(norm2(f.values()), 1.0);
      if (ls.at_noise_floor || ls.smallest_trial * norm2(dir.values()) <= eps * f_norm)
        return finish(StopReason::stalled);
      // Retry from steepest descent with a shorter seed.
      seed = 0.5 * ls.smallest_trial;
      dir = -1.0 * grad;
      continue;
    }

    auto next_grad = grad_jreg(ls.image, ctx);
    ++report.gradient_evals;

    const double gg = real_dot(grad.values(), grad.values());
    const double beta = std::max(0.0, (real_dot(next_grad.values(), next_grad.values()) -
                                       real_dot(next_grad.values(), grad.values())) / gg);
    auto next_dir = -1.0 * next_grad;
    {
      auto nd = next_dir.values();
      auto od = dir.values();
      for (std::size_t i = 0; i < nd.size(); ++i) nd[i] += beta * od[i];
    }

    const double decrease = (value.total - ls.value.total) / std::max(std::abs(value.total), 1e-300);
    f = std::move(ls.image);
    value = ls.value;
    grad = std::move(next_grad);
    dir = std::move(next_dir);
    grad_norm = norm2(grad.values());
    seed = ls.step;
    report.trace.push_back({k, value, ls.step, grad_norm, ls.evals});

    if (grad_norm <= config.grad_tol) return finish(StopReason::gradient_norm);
    if (decrease < config.rel_tol) return finish(StopReason::relative_decrease);
  }
  return finish(StopReason::max_iterations);
}

void write_trace_csv(const std::filesystem::path& path, const OptimReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "iteration,J_reg,J_ls,omega1,omega0,step,grad_norm\n" << std::setprecision(17);
  for (const auto& e : report.trace)
    out << e.iteration << ',' << e.value.total << ',' << e.value.jls << ',' << e.value.omega1 << ','
        << e.value.omega0 << ',' << e.step << ',' << e.grad_norm << '\n';
}

}  // namespace mrrecon
