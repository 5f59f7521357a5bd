#include <doctest.h>

#include <fstream>
#include <numeric>
#include <random>

#include "mrrecon/gridding.hpp"
#include "mrrecon/voronoi.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace mrrecon;

namespace {

double sum(const std::vector<double>& w) { return std::accumulate(w.begin(), w.end(), 0.0); }

Trajectory centred_grid(std::size_t n) {
  std::vector<KPoint> pts;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) pts.push_back({(c + 0.5) / n - 0.5, (r + 0.5) / n - 0.5});
  return Trajectory(std::move(pts));
}

double rel_err(const ComplexImage& a, const ComplexImage& b) {
  return norm2((a - b).values()) / norm2(b.values());
}

}  // namespace

TEST_CASE("Voronoi cells of a regular grid are all 1/N^2") {
  for (std::size_t n : {3, 8, 16}) {
    const auto w = voronoi_weights(centred_grid(n));
    for (double x : w) CHECK(x == doctest::Approx(1.0 / (n * n)).epsilon(1e-12));
    CHECK(std::abs(sum(w) - 1.0) < 1e-12);
  }
}

TEST_CASE("Voronoi weights tile the square") {
  std::mt19937_64 rng(61);
  for (std::size_t count : {3, 10, 57, 400}) {
    const auto t = oracle::random_trajectory(rng, count);
    const auto w = voronoi_weights(t);
    CHECK(std::abs(sum(w) - 1.0) < 1e-9);
    for (double x : w) CHECK(x > 0.0);
  }
  const auto spiral = generate_spiral(6, 512, nyquist_turns(128, 6));
  const auto w = voronoi_weights(spiral);
  CHECK(std::abs(sum(w) - 1.0) < 1e-9);
}

TEST_CASE("exact duplicates share one cell equally") {
  const Trajectory t({{0.1, 0.1}, {-0.3, 0.2}, {0.1, 0.1}, {0.25, -0.4}, {0.1, 0.1}});
  const auto w = voronoi_weights(t);
  CHECK(w[0] == w[2]);
  CHECK(w[0] == w[4]);
  const auto merged = voronoi_weights(Trajectory({{0.1, 0.1}, {-0.3, 0.2}, {0.25, -0.4}}));
  CHECK(3 * w[0] == doctest::Approx(merged[0]).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(merged[1]).epsilon(1e-12));
  CHECK(std::abs(sum(w) - 1.0) < 1e-12);

  // Every spiral arm starts at the origin.
  const auto spiral = generate_spiral(5, 40, 2.0);
  const auto ws = voronoi_weights(spiral);
  for (std::size_t a = 1; a < 5; ++a) CHECK(ws[a * 40] == ws[0]);
}

TEST_CASE("Voronoi areas agree with a Monte-Carlo nearest-neighbour estimate") {
  std::mt19937_64 rng(62);
  const auto t = oracle::random_trajectory(rng, 50);
  const auto w = voronoi_weights(t);

  // Stratified jittered sampling, 1000 x 1000 strata.
  const int side = 1000;
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<double> hits(t.size());
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j) {
      const double x = (i + jitter(rng)) / side - 0.5, y = (j + jitter(rng)) / side - 0.5;
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t l = 0; l < t.size(); ++l) {
        const double d = (t[l].kx - x) * (t[l].kx - x) + (t[l].ky - y) * (t[l].ky - y);
        if (d < best_d) {
          best_d = d;
          best = l;
        }
      }
      hits[best] += 1.0;
    }
  for (std::size_t l = 0; l < t.size(); ++l) {
    const double estimate = hits[l] / (side * side);
    CHECK(std::abs(estimate - w[l]) <= 0.02 * w[l]);
  }
}

TEST_CASE("degenerate Voronoi inputs point to another density") {
  CHECK_THROWS_AS(voronoi_weights(Trajectory({{0.0, 0.0}, {0.1, 0.1}})), DegenerateVoronoi);
  CHECK_THROWS_AS(voronoi_weights(Trajectory({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}})), DegenerateVoronoi);
  CHECK_THROWS_AS(voronoi_weights(Trajectory({{-0.2, -0.1}, {0.0, 0.0}, {0.2, 0.1}, {0.4, 0.2}})), DegenerateVoronoi);
  try {
    voronoi_weights(Trajectory({{-0.2, 0.0}, {0.0, 0.0}, {0.2, 0.0}}));
  } catch (const DegenerateVoronoi& e) {
    CHECK(std::string(e.what()).find("radial-spiral") != std::string::npos);
  }
}

TEST_CASE("radial-spiral weights grow linearly with the sample index") {
  const std::size_t s = 400;
  const auto t = generate_spiral(1, s, 8.0);
  const auto w = radial_spiral_weights(t, 1);
  CHECK(std::abs(sum(w) - 1.0) < 1e-12);
  // w_j / j is flat away from the centre.
  const double ref = w[s / 2] / (s / 2);
  for (std::size_t j = 20; j + 1 < s; j += 20) CHECK(w[j] / j == doctest::Approx(ref).epsilon(0.02));
  for (double x : w) CHECK(x >= 0.0);
}

TEST_CASE("radial-spiral weights require equal arms") {
  const auto t = generate_spiral(3, 10, 2.0);
  CHECK_THROWS_AS(radial_spiral_weights(t, 4), std::invalid_argument);
  const auto w = radial_spiral_weights(t, 3);
  CHECK(std::abs(sum(w) - 1.0) < 1e-12);
  for (std::size_t j = 0; j < 10; ++j) CHECK(w[j] == doctest::Approx(w[10 + j]).epsilon(1e-12));
}

TEST_CASE("Kaiser-Bessel window") {
  const double beta = auto_beta(7, 2.0);
  CHECK(beta == doctest::Approx(std::numbers::pi * std::sqrt(3.5 * 3.5 * 1.5 * 1.5 - 0.8)));
  CHECK(kaiser_bessel(0.0, 7, beta) > 0.0);
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng);
    CHECK(kaiser_bessel(x, 7, beta) == kaiser_bessel(-x, 7, beta));
    CHECK(kaiser_bessel(x, 7, beta) <= kaiser_bessel(0.0, 7, beta));
  }
  CHECK(kaiser_bessel(3.5001, 7, beta) == 0.0);
  CHECK(kaiser_bessel(-10.0, 7, beta) == 0.0);
}

TEST_CASE("an on-grid sample reconstructs its plane wave exactly") {
  // Separable spreading followed by exact deapodization: the 2-D response is
  // the product of the two 1-D responses.
  const std::size_t n = 16;
  GriddingConfig cfg;
  cfg.density = DensityKind::uniform;
  const double g = 32.0;
  const Trajectory t({{3.0 / g, -5.0 / g}});
  const std::vector<cplx> s{cplx(0.7, -0.2)};
  const std::vector<double> w{1.0};
  const auto img = grid_reconstruct(s, t, n, cfg, w);
  double worst = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const cplx expected = static_cast<double>(n) * s[0] * oracle::expi(-2.0 * std::numbers::pi * (t[0].kx * c + t[0].ky * r));
      worst = std::max(worst, std::abs(img(r, c) - expected));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("gridding approximates the weighted adjoint for off-grid samples") {
  std::mt19937_64 rng(64);
  const std::size_t n = 16;
  const auto t = oracle::random_trajectory(rng, 200);
  const auto s = oracle::random_samples(rng, 200);
  std::vector<double> w(200, 1.0 / 200);
  GriddingConfig cfg;
  const auto img = grid_reconstruct(s, t, n, cfg, w);
  std::vector<cplx> ws(200);
  for (std::size_t i = 0; i < 200; ++i) ws[i] = w[i] * s[i];
  const auto ref = static_cast<double>(n * n) * oracle::adjoint(ws, t, n);
  CHECK(rel_err(img, ref) < 1e-2);
}

TEST_CASE("fully sampled Cartesian data grids back to the image") {
  std::mt19937_64 rng(65);
  const std::size_t n = 16;
  const auto t = cartesian_trajectory(n);
  const auto f = oracle::random_image(rng, n);
  const auto s = nudft_forward(f, t);
  for (int width : {1, 3, 5, 7}) {
    GriddingConfig cfg;
    cfg.kernel_width = width;
    cfg.density = DensityKind::uniform;
    if (width < 5) cfg.beta = 2.0;
    CHECK(rel_err(grid_reconstruct(s, t, n, cfg), f) < 1e-2);
  }
}

TEST_CASE("gridding is linear and maps zero data to zero") {
  std::mt19937_64 rng(66);
  const std::size_t n = 12;
  const auto t = generate_spiral(4, 60, 3.0);
  GriddingConfig cfg;
  const auto w = density_weights(t, cfg);
  const auto zero = grid_reconstruct(std::vector<cplx>(t.size()), t, n, cfg, w);
  CHECK(oracle::max_abs(zero.values()) == 0.0);

  const auto a = oracle::random_samples(rng, t.size());
  const auto b = oracle::random_samples(rng, t.size());
  std::vector<cplx> mix(t.size());
  const cplx ca(1.5, -0.5), cb(-0.25, 2.0);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = ca * a[i] + cb * b[i];
  const auto lhs = grid_reconstruct(mix, t, n, cfg, w);
  const auto rhs = ca * grid_reconstruct(a, t, n, cfg, w) + cb * grid_reconstruct(b, t, n, cfg, w);
  CHECK(oracle::max_abs_diff(lhs.values(), rhs.values()) < 1e-12 * oracle::max_abs(rhs.values()));
}

TEST_CASE("vanishing apodization inside the field of view is a configuration error") {
  // A nearly flat 7-tap kernel on an unpadded grid has Dirichlet zeros at G/7.
  GriddingConfig cfg;
  cfg.oversampling = 1.0;
  cfg.beta = 1e-9;
  cfg.density = DensityKind::uniform;
  const auto t = generate_spiral(2, 20, 1.0);
  CHECK_THROWS_AS(grid_reconstruct(std::vector<cplx>(t.size(), 1.0), t, 14, cfg), std::invalid_argument);
}

TEST_CASE("gridding configuration and input validation") {
  GriddingConfig cfg;
  cfg.kernel_width = 4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.oversampling = 0.9;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  const auto t = generate_spiral(2, 20, 1.0);
  CHECK_THROWS_AS(grid_reconstruct(std::vector<cplx>(3), t, 8, cfg), std::invalid_argument);
  cfg.density = DensityKind::user;
  cfg.user_weights = {1.0, 2.0};
  CHECK_THROWS_AS(density_weights(t, cfg), std::invalid_argument);
}

TEST_CASE("weights CSV round trip") {
  TempDir dir("weights");
  const auto w = voronoi_weights(generate_spiral(3, 50, 2.0));
  write_weights_csv(dir / "w.csv", w);
  const auto back = read_weights_csv(dir / "w.csv");
  REQUIRE(back.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(back[i] == w[i]);
  {
    std::ofstream out(dir / "bad.csv");
    out << "weight\n0.5\n-1\n";
  }
  CHECK_THROWS(read_weights_csv(dir / "bad.csv"));
}
