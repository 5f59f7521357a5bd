#include <doctest.h>

#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mrrecon/array_io.hpp"
#include "mrrecon/experiment.hpp"
#include "mrrecon/kernels.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace mrrecon;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string(MRRECON_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* small_config = R"(
[run]
name = small
seed = 42
output = out
[grid]
n = 16
[trajectory]
arms = 2
samples = 64
[optimizer]
max_iters = 15
[sweep]
arms = 3, 2
samples = 64
snr_db = none, 30
)";

}  // namespace

TEST_CASE("default configuration mirrors the library defaults") {
  const auto c = default_experiment_config();
  CHECK(c.n_grid == 128);
  CHECK(c.trajectory.arms == 6);
  CHECK(c.trajectory.samples == 512);
  CHECK_FALSE(c.trajectory.turns.has_value());
  CHECK(c.hyper.lambda1 == 0.1);
  CHECK(c.hyper.alpha1 == 20.0);
  CHECK(c.hyper.lambda0 == 0.5);
  CHECK(c.hyper.alpha0 == 10.0);
  CHECK(c.optim.max_iters == 50);
  CHECK(c.optim.ls_max_evals == 3);
  CHECK(c.gridding.kernel_width == 7);
  CHECK(c.gridding.oversampling == 2.0);
  CHECK(c.phantom.n_grid == 128);
  CHECK(c.sweep.arms == std::vector<std::size_t>{6});
  CHECK(build_trajectory(c).size() == 3072);
}

TEST_CASE("config file parsing, save and reload") {
  TempDir dir("config");
  write_text(dir / "c.ini", small_config);
  const auto c = load_experiment_config(dir / "c.ini");
  CHECK(c.name == "small");
  CHECK(c.seed == 42);
  CHECK(c.n_grid == 16);
  CHECK(c.phantom.n_grid == 16);
  CHECK(c.output_dir == dir.path() / "out");
  CHECK(c.sweep.arms == std::vector<std::size_t>{3, 2});
  REQUIRE(c.sweep.snr_db.size() == 2);
  CHECK_FALSE(c.sweep.snr_db[0].has_value());
  CHECK(*c.sweep.snr_db[1] == 30.0);

  save_experiment_config(c, dir / "saved.ini");
  const auto back = load_experiment_config(dir / "saved.ini");
  CHECK(back.seed == c.seed);
  CHECK(back.sweep.arms == c.sweep.arms);
  CHECK(back.sweep.snr_db == c.sweep.snr_db);
  CHECK(back.phantom.vessels.size() == c.phantom.vessels.size());
  CHECK(back.hyper.alpha1 == c.hyper.alpha1);
}

TEST_CASE("config errors are reported") {
  TempDir dir("config_bad");
  write_text(dir / "a.ini", "[grid]\nn = sixteen\n");
  CHECK_THROWS_AS(load_experiment_config(dir / "a.ini"), std::invalid_argument);
  write_text(dir / "b.ini", "[sweep]\narms =\n");
  CHECK_THROWS_AS(load_experiment_config(dir / "b.ini"), std::invalid_argument);
  write_text(dir / "c.ini", "[trajectory]\nfile = nowhere.csv\n");
  CHECK_THROWS_AS(load_experiment_config(dir / "c.ini"), std::invalid_argument);
  write_text(dir / "d.ini", "[gridding]\ndensity = magic\n");
  CHECK_THROWS_AS(load_experiment_config(dir / "d.ini"), std::invalid_argument);
  write_text(dir / "e.ini", "[grid]\nn = 64\n[phantom]\nn_grid = 32\n");
  CHECK_THROWS_AS(load_experiment_config(dir / "e.ini"), std::invalid_argument);
  CHECK_THROWS(load_experiment_config(dir / "missing.ini"));
}

TEST_CASE("cell seeds are deterministic and distinct") {
  const CellSpec a{6, 512, 30.0}, b{6, 512, std::nullopt}, c{8, 512, 30.0};
  CHECK(cell_seed(1, a) == cell_seed(1, a));
  std::set<std::uint64_t> seeds{cell_seed(1, a), cell_seed(1, b), cell_seed(1, c), cell_seed(2, a)};
  CHECK(seeds.size() == 4);
  CHECK(a.run_id() == "a6_s512_snr30");
  CHECK(b.run_id() == "a6_s512_clean");
}

TEST_CASE("sweep cells are the sorted product of the lists") {
  auto c = default_experiment_config();
  c.sweep.arms = {8, 4};
  c.sweep.samples = {256};
  c.sweep.snr_db = {40.0, std::nullopt};
  const auto cells = sweep_cells(c);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].arms == 4);
  CHECK_FALSE(cells[0].snr_db.has_value());
  CHECK(cells[3].arms == 8);
  CHECK(*cells[3].snr_db == 40.0);
}

TEST_CASE("small sweep writes byte-identical results and loadable outputs") {
  TempDir dir("sweep");
  write_text(dir / "c.ini", small_config);
  auto c = load_experiment_config(dir / "c.ini");

  c.output_dir = dir / "run1";
  const auto results = run_sweep(c);
  REQUIRE(results.size() == 4);
  c.output_dir = dir / "run2";
  c.export_images = false;
  run_sweep(c);
  CHECK(slurp(dir / "run1" / "results.csv") == slurp(dir / "run2" / "results.csv"));

  const auto rows = read_results_csv(dir / "run1" / "results.csv");
  CHECK(rows.size() == 4 * 2 * 2);
  for (const auto& r : results) {
    CHECK(r.report.trace.back().value.total <= r.report.trace.front().value.total);
    const auto dir_cell = dir / "run1" / r.cell.run_id();
    CHECK(read_image(dir_cell / "regularized.bin") == r.regularized);
    CHECK(read_image(dir_cell / "gridding.bin") == r.gridding);
    CHECK(std::filesystem::exists(dir_cell / "regularized_difference.pgm"));
    CHECK(std::filesystem::exists(dir_cell / "gridding_phase.pgm"));
    CHECK(std::filesystem::exists(dir_cell / "trace.csv"));
  }
  const auto reloaded = load_experiment_config(dir / "run1" / "config.ini");
  CHECK(reloaded.seed == 42);
}

TEST_CASE("results CSV round trip and append") {
  TempDir dir("results");
  ResultRow r{"a1_s2_clean", 1, 2, std::nullopt, "gridding", "roi1", {3.5, std::nullopt}, 0.25};
  write_results_csv(dir / "r.csv", {r});
  r.snr_db = 20.0;
  r.error.normalized = 0.125;
  write_results_csv(dir / "r.csv", {r}, true);
  const auto rows = read_results_csv(dir / "r.csv");
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].error.normalized.has_value());
  CHECK(*rows[1].error.normalized == 0.125);
  CHECK(*rows[1].snr_db == 20.0);
  CHECK(rows[1].variance == 0.25);
}

TEST_CASE("cli: simulate writes one sample per trajectory point") {
  TempDir dir("cli_sim");
  REQUIRE(run_cli("simulate --out " + dir.path().string(), dir / "log.txt") == 0);
  CHECK(read_samples(dir / "samples.bin").size() == 3072);
}

TEST_CASE("cli: unregularized recon of complete Cartesian data equals D") {
  TempDir dir("cli_cart");
  std::mt19937_64 rng(91);
  const std::size_t n = 16;
  const auto traj = cartesian_trajectory(n);
  const auto samples = nudft_forward(oracle::random_image(rng, n, 10.0), traj);
  save_trajectory(traj, dir / "t.csv");
  write_samples(dir / "s.bin", samples);
  write_text(dir / "c.ini", "[grid]\nn = 16\n[regularization]\nlambda1 = 0\nlambda0 = 0\n");
  const std::string common = " --config " + (dir / "c.ini").string() + " --traj " + (dir / "t.csv").string() +
                             " --samples " + (dir / "s.bin").string() + " --out " + dir.path().string();
  REQUIRE(run_cli("recon-reg" + common, dir / "log.txt") == 0);
  const auto recon = read_image(dir / "regularized.bin");
  const auto d = compute_d(samples, traj, n);
  CHECK(oracle::max_abs_diff(recon.values(), d.values()) < 1e-8 * oracle::max_abs(d.values()));

  REQUIRE(run_cli("precompute" + common, dir / "log.txt") == 0);
  CHECK(std::filesystem::exists(dir / "g.bin.hash"));
  REQUIRE(run_cli("recon-grid" + common, dir / "log.txt") == 0);
  CHECK(std::filesystem::exists(dir / "gridding.bin"));
  REQUIRE(run_cli("psf --config " + (dir / "c.ini").string() + " --traj " + (dir / "t.csv").string() + " --out " +
                      dir.path().string(),
                  dir / "log.txt") == 0);
  CHECK(std::filesystem::exists(dir / "psf.pgm"));
}

TEST_CASE("cli: failures exit nonzero with a diagnostic") {
  TempDir dir("cli_fail");
  const auto traj = generate_spiral(2, 10, 1.0);
  save_trajectory(traj, dir / "t.csv");
  write_samples(dir / "s.bin", std::vector<cplx>(7, 1.0));
  write_text(dir / "c.ini", "[grid]\nn = 8\n[phantom]\nn_grid = 8\nsquare_side = 4\n"
                            "vessel1 = 4, 4, 2.5, 100, blunt, 0\n");
  const std::string cfg = " --config " + (dir / "c.ini").string();

  CHECK(run_cli("recon-grid" + cfg + " --traj " + (dir / "t.csv").string() + " --samples " +
                    (dir / "s.bin").string() + " --out " + dir.path().string(),
                dir / "log.txt") != 0);
  CHECK(slurp(dir / "log.txt").find("error") != std::string::npos);

  // G built for one trajectory cannot be reused with another.
  save_g_cache(dir / "g.bin", compute_g(generate_spiral(3, 10, 1.0), 8), fingerprint(generate_spiral(3, 10, 1.0)));
  write_samples(dir / "s20.bin", std::vector<cplx>(20, 1.0));
  CHECK(run_cli("recon-reg" + cfg + " --traj " + (dir / "t.csv").string() + " --samples " +
                    (dir / "s20.bin").string() + " --g " + (dir / "g.bin").string() + " --out " + dir.path().string(),
                dir / "log.txt") != 0);
  CHECK(slurp(dir / "log.txt").find("trajectory") != std::string::npos);

  CHECK(run_cli("metrics --recon " + (dir / "nothing.bin").string(), dir / "log.txt") != 0);
  CHECK(run_cli("bogus", dir / "log.txt") != 0);
  CHECK(run_cli("", dir / "log.txt") != 0);
}
