#include <doctest.h>

#include <fstream>
#include <random>

#include "dense_oracle.hpp"
#include "mrrecon/kernels.hpp"
#include "mrrecon/optimizer.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace mrrecon;

namespace {

ObjectiveContext context_for(const Trajectory& traj, const std::vector<cplx>& samples, std::size_t n,
                             Hyperparameters hyper) {
  return ObjectiveContext(precompute_kernels(traj, samples, n), samples, hyper);
}

void check_contract(const OptimReport& r, const OptimConfig& cfg) {
  REQUIRE(!r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].value.total <= r.trace[i - 1].value.total);
  CHECK(r.trace.back().value.total <= r.trace.front().value.total);
  CHECK(r.gradient_evals <= r.iterations + 1);
  CHECK(r.criterion_evals <= 1 + r.iterations * cfg.ls_max_evals);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].criterion_evals <= cfg.ls_max_evals);
}

}  // namespace

TEST_CASE("complete Cartesian least squares converges to D within five iterations") {
  std::mt19937_64 rng(51);
  const std::size_t n = 8;
  const auto traj = cartesian_trajectory(n);
  const auto f = oracle::random_image(rng, n, 5.0);
  const auto s = nudft_forward(f, traj);
  const auto ctx = context_for(traj, s, n, {0.0, 1.0, 0.0, 1.0});
  OptimConfig cfg;
  cfg.max_iters = 5;
  const auto result = minimize(ctx, cfg);
  CHECK(result.report.iterations <= 5);
  CHECK(result.report.trace.back().value.jls < 1e-12 * ctx.data_norm());
  CHECK(oracle::max_abs_diff(result.image.values(), ctx.kernels().d.values()) <
        1e-8 * oracle::max_abs(ctx.kernels().d.values()));
  check_contract(result.report, cfg);
}

TEST_CASE("quadratic regime minimizer matches the dense normal equations") {
  std::mt19937_64 rng(52);
  const std::size_t n = 8;
  const auto traj = generate_spiral(3, 24, 2.0);
  const auto truth = oracle::random_image(rng, n, 5.0);
  auto s = add_noise(nudft_forward(truth, traj), {25.0, 9});
  const Hyperparameters hyper{0.1, 1e8, 0.5, 1e8};
  const auto ctx = context_for(traj, s, n, hyper);

  OptimConfig cfg;
  cfg.max_iters = 400;
  cfg.rel_tol = 0.0;
  const auto result = minimize(ctx, cfg);
  const auto expected = oracle::quadratic_minimizer(traj, s, n, hyper.lambda1, hyper.lambda0);
  const double rel = norm2((result.image - expected).values()) / norm2(expected.values());
  CHECK(rel < 1e-6);
  check_contract(result.report, cfg);
}

TEST_CASE("default configuration honours the monotone and budget contract") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 16;
    const auto traj = generate_spiral(4, 64, nyquist_turns(n, 4));
    const auto truth = oracle::random_image(rng, n, 50.0);
    const auto s = add_noise(nudft_forward(truth, traj), {30.0, static_cast<std::uint64_t>(trial)});
    const auto ctx = context_for(traj, s, n, {});
    OptimConfig cfg;
    cfg.init = trial % 2 ? InitKind::adjoint : InitKind::zero;
    const auto result = minimize(ctx, cfg);
    check_contract(result.report, cfg);
    CHECK(result.report.trace.size() == static_cast<std::size_t>(result.report.iterations) + 1);
    CHECK(result.report.final_grad_norm == result.report.trace.back().grad_norm);
  }
}

TEST_CASE("runs are bit-identical for identical inputs") {
  std::mt19937_64 rng(54);
  const std::size_t n = 16;
  const auto traj = generate_spiral(3, 80, 2.5);
  const auto s = nudft_forward(oracle::random_image(rng, n, 20.0), traj);
  const auto ctx = context_for(traj, s, n, {});
  OptimConfig cfg;
  cfg.max_iters = 20;
  const auto a = minimize(ctx, cfg);
  const auto b = minimize(ctx, cfg);
  CHECK(a.image == b.image);
  REQUIRE(a.report.trace.size() == b.report.trace.size());
  for (std::size_t i = 0; i < a.report.trace.size(); ++i) {
    CHECK(a.report.trace[i].value.total == b.report.trace[i].value.total);
    CHECK(a.report.trace[i].step == b.report.trace[i].step);
  }
}

TEST_CASE("restarting at the minimizer stops without raising the criterion") {
  std::mt19937_64 rng(55);
  const std::size_t n = 8;
  const auto traj = cartesian_trajectory(n);
  const auto s = nudft_forward(oracle::random_image(rng, n), traj);
  const auto ctx = context_for(traj, s, n, {0.0, 1.0, 0.0, 1.0});
  OptimConfig cfg;
  cfg.init = InitKind::user;
  cfg.user_init = ctx.kernels().d;
  const auto result = minimize(ctx, cfg);
  CHECK(result.report.stop_reason != StopReason::max_iterations);
  CHECK(result.report.trace.back().value.total <= result.report.trace.front().value.total);
  check_contract(result.report, cfg);
}

TEST_CASE("gradient tolerance stops immediately when already satisfied") {
  std::mt19937_64 rng(56);
  const auto traj = oracle::random_trajectory(rng, 10);
  const auto s = oracle::random_samples(rng, 10);
  const auto ctx = context_for(traj, s, 4, {});
  OptimConfig cfg;
  cfg.grad_tol = 1e300;
  const auto result = minimize(ctx, cfg);
  CHECK(result.report.iterations == 0);
  CHECK(result.report.stop_reason == StopReason::gradient_norm);
}

TEST_CASE("a single criterion evaluation per line search still descends") {
  std::mt19937_64 rng(57);
  const std::size_t n = 8;
  const auto traj = generate_spiral(4, 30, 2.0);
  const auto s = nudft_forward(oracle::random_image(rng, n, 10.0), traj);
  const auto ctx = context_for(traj, s, n, {});
  OptimConfig cfg;
  cfg.ls_max_evals = 1;
  const auto result = minimize(ctx, cfg);
  check_contract(result.report, cfg);
  CHECK(result.report.trace.back().value.total < result.report.trace.front().value.total);
}

TEST_CASE("optimizer configuration is validated") {
  OptimConfig cfg;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.ls_max_evals = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.rel_tol = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.init = InitKind::user;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(to_string(StopReason::stalled) == "stalled");
}

TEST_CASE("trace CSV has one row per trace entry") {
  TempDir dir("trace");
  std::mt19937_64 rng(58);
  const auto traj = generate_spiral(2, 20, 1.0);
  const auto s = nudft_forward(oracle::random_image(rng, 4), traj);
  const auto ctx = context_for(traj, s, 4, {});
  OptimConfig cfg;
  cfg.max_iters = 5;
  const auto result = minimize(ctx, cfg);
  write_trace_csv(dir / "trace.csv", result.report);
  std::ifstream in(dir / "trace.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,J_reg,J_ls,omega1,omega0,step,grad_norm");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == result.report.trace.size());
}
