#include "mrrecon/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "mrrecon/array_io.hpp"
#include "mrrecon/kernels.hpp"
#include "mrrecon/pgm.hpp"

namespace mrrecon {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value))
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + text + "'");
  return value;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int value{};
  const auto t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + text + "'");
  return value;
}

std::optional<double> parse_optional_double(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t.empty() || t == "none" || t == "auto") return std::nullopt;
  return parse_double(key, t);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + text + "'");
}

// Reads section.key as a raw string, if present.
std::optional<std::string> raw(const pt::ptree& tree, const std::string& section, const std::string& key) {
  auto child = tree.get_child_optional(section);
  if (!child) return std::nullopt;
  auto v = child->get_optional<std::string>(key);
  if (!v) return std::nullopt;
  return trim(*v);
}

std::string format_snr(const std::optional<double>& snr) {
  if (!snr) return "none";
  std::ostringstream os;
  os << std::setprecision(17) << *snr;
  return os.str();
}

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

const char* density_name(DensityKind kind) {
  switch (kind) {
    case DensityKind::voronoi: return "voronoi";
    case DensityKind::radial_spiral: return "radial-spiral";
    case DensityKind::uniform: return "uniform";
    case DensityKind::user: return "user";
  }
  return "voronoi";
}

const char* init_name(InitKind kind) {
  switch (kind) {
    case InitKind::zero: return "zero";
    case InitKind::adjoint: return "adjoint";
    case InitKind::user: return "user";
  }
  return "zero";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_grid < 2) throw std::invalid_argument("grid size must be at least 2");
  if (phantom.n_grid != n_grid)
    throw std::invalid_argument("phantom grid size " + std::to_string(phantom.n_grid) + " differs from [grid] n = " +
                                std::to_string(n_grid));
  phantom.validate();
  hyper.validate();
  optim.validate();
  gridding.validate();
  if (trajectory.file && !std::filesystem::exists(*trajectory.file))
    throw std::invalid_argument("trajectory file not found: " + trajectory.file->string());
  if (trajectory.arms == 0 || trajectory.samples < 2) throw std::invalid_argument("trajectory needs arms >= 1, samples >= 2");
  if (trajectory.turns && !(*trajectory.turns > 0.0)) throw std::invalid_argument("trajectory turns must be positive");
  if (sweep.arms.empty() || sweep.samples.empty() || sweep.snr_db.empty())
    throw std::invalid_argument("sweep lists must be non-empty");
  for (auto a : sweep.arms)
    if (a == 0) throw std::invalid_argument("sweep arms must be positive");
  for (auto s : sweep.samples)
    if (s < 2) throw std::invalid_argument("sweep samples must be at least 2");
}

ExperimentConfig experiment_config_from_tree(const pt::ptree& tree, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).lexically_normal();
  };

  if (auto v = raw(tree, "run", "name")) c.name = *v;
  if (auto v = raw(tree, "run", "seed")) c.seed = parse_int<std::uint64_t>("run.seed", *v);
  if (auto v = raw(tree, "run", "output")) c.output_dir = resolve(*v);
  if (auto v = raw(tree, "run", "export_images")) c.export_images = parse_bool("run.export_images", *v);

  if (auto v = raw(tree, "grid", "n")) c.n_grid = parse_int<std::size_t>("grid.n", *v);

  if (auto v = raw(tree, "trajectory", "arms")) c.trajectory.arms = parse_int<std::size_t>("trajectory.arms", *v);
  if (auto v = raw(tree, "trajectory", "samples"))
    c.trajectory.samples = parse_int<std::size_t>("trajectory.samples", *v);
  if (auto v = raw(tree, "trajectory", "turns")) c.trajectory.turns = parse_optional_double("trajectory.turns", *v);
  if (auto v = raw(tree, "trajectory", "file"); v && !v->empty()) c.trajectory.file = resolve(*v);

  if (auto v = raw(tree, "noise", "snr_db")) c.snr_db = parse_optional_double("noise.snr_db", *v);

  if (auto v = raw(tree, "regularization", "lambda1")) c.hyper.lambda1 = parse_double("regularization.lambda1", *v);
  if (auto v = raw(tree, "regularization", "alpha1")) c.hyper.alpha1 = parse_double("regularization.alpha1", *v);
  if (auto v = raw(tree, "regularization", "lambda0")) c.hyper.lambda0 = parse_double("regularization.lambda0", *v);
  if (auto v = raw(tree, "regularization", "alpha0")) c.hyper.alpha0 = parse_double("regularization.alpha0", *v);

  if (auto v = raw(tree, "optimizer", "max_iters")) c.optim.max_iters = parse_int<int>("optimizer.max_iters", *v);
  if (auto v = raw(tree, "optimizer", "rel_tol")) c.optim.rel_tol = parse_double("optimizer.rel_tol", *v);
  if (auto v = raw(tree, "optimizer", "grad_tol")) c.optim.grad_tol = parse_double("optimizer.grad_tol", *v);
  if (auto v = raw(tree, "optimizer", "ls_max_evals"))
    c.optim.ls_max_evals = parse_int<int>("optimizer.ls_max_evals", *v);
  if (auto v = raw(tree, "optimizer", "init")) {
    if (*v == "zero")
      c.optim.init = InitKind::zero;
    else if (*v == "adjoint")
      c.optim.init = InitKind::adjoint;
    else if (*v == "user")
      c.optim.init = InitKind::user;
    else
      throw std::invalid_argument("optimizer.init must be zero, adjoint or user");
  }
  if (auto v = raw(tree, "optimizer", "init_file"); v && !v->empty()) c.optim.user_init = read_image(resolve(*v));

  if (auto v = raw(tree, "gridding", "kernel_width"))
    c.gridding.kernel_width = parse_int<int>("gridding.kernel_width", *v);
  if (auto v = raw(tree, "gridding", "oversampling"))
    c.gridding.oversampling = parse_double("gridding.oversampling", *v);
  if (auto v = raw(tree, "gridding", "beta")) c.gridding.beta = parse_optional_double("gridding.beta", *v);
  if (auto v = raw(tree, "gridding", "density")) {
    if (*v == "voronoi")
      c.gridding.density = DensityKind::voronoi;
    else if (*v == "radial-spiral")
      c.gridding.density = DensityKind::radial_spiral;
    else if (*v == "uniform")
      c.gridding.density = DensityKind::uniform;
    else if (*v == "user")
      c.gridding.density = DensityKind::user;
    else
      throw std::invalid_argument("gridding.density must be voronoi, radial-spiral, uniform or user");
  }
  if (auto v = raw(tree, "gridding", "weights_file"); v && !v->empty())
    c.gridding.user_weights = read_weights_csv(resolve(*v));
  c.gridding.arms = c.trajectory.arms;

  pt::ptree phantom_section = tree.get_child("phantom", pt::ptree{});
  if (!phantom_section.get_optional<std::string>("n_grid")) phantom_section.put("n_grid", c.n_grid);
  c.phantom = phantom_spec_from_tree(phantom_section);

  c.sweep.arms = {c.trajectory.arms};
  c.sweep.samples = {c.trajectory.samples};
  c.sweep.snr_db = {c.snr_db};
  if (auto v = raw(tree, "sweep", "arms")) {
    c.sweep.arms.clear();
    for (const auto& item : split_list(*v)) c.sweep.arms.push_back(parse_int<std::size_t>("sweep.arms", item));
  }
  if (auto v = raw(tree, "sweep", "samples")) {
    c.sweep.samples.clear();
    for (const auto& item : split_list(*v)) c.sweep.samples.push_back(parse_int<std::size_t>("sweep.samples", item));
  }
  if (auto v = raw(tree, "sweep", "snr_db")) {
    c.sweep.snr_db.clear();
    for (const auto& item : split_list(*v)) c.sweep.snr_db.push_back(parse_optional_double("sweep.snr_db", item));
  }

  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw std::runtime_error("config file not found: " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::runtime_error(e.what());
  }
  return experiment_config_from_tree(tree, path.parent_path());
}

ExperimentConfig default_experiment_config() { return experiment_config_from_tree(pt::ptree{}); }

void save_experiment_config(const ExperimentConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  auto join = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& item : items) s += (s.empty() ? "" : ", ") + fmt(item);
    return s;
  };
  out << "[run]\nname = " << c.name << "\nseed = " << c.seed << "\noutput = " << c.output_dir.string()
      << "\nexport_images = " << (c.export_images ? "true" : "false") << "\n\n";
  out << "[grid]\nn = " << c.n_grid << "\n\n";
  out << "[trajectory]\narms = " << c.trajectory.arms << "\nsamples = " << c.trajectory.samples
      << "\nturns = " << (c.trajectory.turns ? format_double(*c.trajectory.turns) : "auto") << '\n';
  if (c.trajectory.file) out << "file = " << c.trajectory.file->string() << '\n';
  out << "\n[noise]\nsnr_db = " << format_snr(c.snr_db) << "\n\n";
  out << "[regularization]\nlambda1 = " << format_double(c.hyper.lambda1) << "\nalpha1 = " << format_double(c.hyper.alpha1)
      << "\nlambda0 = " << format_double(c.hyper.lambda0) << "\nalpha0 = " << format_double(c.hyper.alpha0) << "\n\n";
  out << "[optimizer]\nmax_iters = " << c.optim.max_iters << "\nrel_tol = " << format_double(c.optim.rel_tol)
      << "\ngrad_tol = " << format_double(c.optim.grad_tol) << "\nls_max_evals = " << c.optim.ls_max_evals
      << "\ninit = " << init_name(c.optim.init) << "\n\n";
  out << "[gridding]\nkernel_width = " << c.gridding.kernel_width
      << "\noversampling = " << format_double(c.gridding.oversampling)
      << "\nbeta = " << (c.gridding.beta ? format_double(*c.gridding.beta) : "auto")
      << "\ndensity = " << density_name(c.gridding.density) << "\n\n";
  out << "[sweep]\narms = " << join(c.sweep.arms, [](std::size_t a) { return std::to_string(a); })
      << "\nsamples = " << join(c.sweep.samples, [](std::size_t s) { return std::to_string(s); })
      << "\nsnr_db = " << join(c.sweep.snr_db, format_snr) << "\n\n";
  out.close();

  // Phantom section shares the standalone phantom-spec format.
  const auto tmp = path.string() + ".phantom.tmp";
  save_phantom_spec(c.phantom, tmp);
  {
    std::ifstream in(tmp);
    std::ofstream app(path, std::ios::app);
    app << in.rdbuf();
  }
  std::filesystem::remove(tmp);
}

std::string CellSpec::run_id() const {
  std::ostringstream os;
  os << 'a' << arms << "_s" << samples << '_';
  if (snr_db)
    os << "snr" << std::setprecision(6) << *snr_db;
  else
    os << "clean";
  return os.str();
}

std::uint64_t cell_seed(std::uint64_t top_seed, const CellSpec& cell) {
  std::uint64_t x = splitmix64(top_seed);
  x = splitmix64(x ^ cell.arms);
  x = splitmix64(x ^ cell.samples);
  x = splitmix64(x ^ (cell.snr_db ? std::bit_cast<std::uint64_t>(*cell.snr_db) : ~std::uint64_t{0}));
  return x;
}

std::vector<CellSpec> sweep_cells(const ExperimentConfig& config) {
  std::vector<CellSpec> cells;
  for (auto a : config.sweep.arms)
    for (auto s : config.sweep.samples)
      for (const auto& snr : config.sweep.snr_db) cells.push_back({a, s, snr});
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

Trajectory build_trajectory(const ExperimentConfig& config) {
  return build_trajectory(config, {config.trajectory.arms, config.trajectory.samples, config.snr_db});
}

Trajectory build_trajectory(const ExperimentConfig& config, const CellSpec& cell) {
  if (config.trajectory.file) {
    auto traj = load_trajectory(*config.trajectory.file);
    require_valid(traj);
    return traj;
  }
  const double turns = config.trajectory.turns ? *config.trajectory.turns : nyquist_turns(config.n_grid, cell.arms);
  return generate_spiral(cell.arms, cell.samples, turns);
}

std::vector<ResultRow> metric_rows(const std::string& run_id, const CellSpec& cell, const std::string& method,
                                   const ComplexImage& recon, const Phantom& phantom) {
  std::vector<ResultRow> rows;
  for (const Roi* roi : {&phantom.roi1, &phantom.roi2}) {
    ResultRow row;
    row.run_id = run_id;
    row.arms = cell.arms;
    row.samples = cell.samples;
    row.snr_db = cell.snr_db;
    row.method = method;
    row.roi = roi->name;
    row.error = quad_error(recon, phantom.image, *roi);
    row.variance = roi_variance(recon, *roi);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows, bool append) {
  const bool header = !append || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (header) out << "run-id,arms,samples,snr_db,method,roi,absolute,normalized,variance\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.arms << ',' << r.samples << ',' << format_snr(r.snr_db) << ',' << r.method << ','
        << r.roi << ',' << r.error.absolute << ',';
    if (r.error.normalized)
      out << *r.error.normalized;
    else
      out << "undefined";
    out << ',' << r.variance << '\n';
  }
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1) {
      if (line != "run-id,arms,samples,snr_db,method,roi,absolute,normalized,variance")
        throw CsvFormatError(path.string() + ": unexpected results header", number);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() != 9) throw CsvFormatError(path.string() + ": expected 9 columns", number);
    try {
      ResultRow r;
      r.run_id = f[0];
      r.arms = parse_int<std::size_t>("arms", f[1]);
      r.samples = parse_int<std::size_t>("samples", f[2]);
      r.snr_db = parse_optional_double("snr_db", f[3]);
      r.method = f[4];
      r.roi = f[5];
      r.error.absolute = parse_double("absolute", f[6]);
      if (f[7] != "undefined") r.error.normalized = parse_double("normalized", f[7]);
      r.variance = parse_double("variance", f[8]);
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw CsvFormatError(path.string() + ": " + e.what(), number);
    }
  }
  return rows;
}

OptimResult reconstruct_regularized(const Trajectory& traj, std::span<const cplx> samples, std::size_t n_grid,
                                    const Hyperparameters& hyper, const OptimConfig& optim, const LagArray* cached_g) {
  require_valid(traj);
  if (samples.size() != traj.size())
    throw std::invalid_argument("trajectory has " + std::to_string(traj.size()) + " points but data has " +
                                std::to_string(samples.size()) + " samples");
  PrecomputedKernels kernels;
  if (cached_g) {
    if (cached_g->grid_size() != n_grid) throw std::invalid_argument("cached G was built for another grid size");
    kernels.g = *cached_g;
    kernels.d = compute_d(samples, traj, n_grid);
    kernels.n_grid = n_grid;
    kernels.trajectory_fingerprint = fingerprint(traj);
  } else {
    kernels = precompute_kernels(traj, samples, n_grid);
  }
  ObjectiveContext ctx(std::move(kernels), samples, hyper);
  return minimize(ctx, optim);
}

CellResult run_cell(const ExperimentConfig& config, const Phantom& phantom, const CellSpec& cell,
                    std::map<std::string, LagArray>* g_cache) {
  const std::size_t n = config.n_grid;
  const auto traj = build_trajectory(config, cell);
  const auto clean = nudft_forward(phantom.image, traj);
  const auto samples = add_noise(clean, {cell.snr_db, cell_seed(config.seed, cell)});

  CellResult result{cell, ComplexImage(n), ComplexImage(n), {}, {}, 0.0, 0.0, 0.0, 0.0};

  auto start = std::chrono::steady_clock::now();
  const auto fp = fingerprint(traj);
  const LagArray* g = nullptr;
  LagArray local;
  if (g_cache) {
    auto it = g_cache->find(fp);
    if (it == g_cache->end()) it = g_cache->emplace(fp, compute_g(traj, n)).first;
    g = &it->second;
  } else {
    local = compute_g(traj, n);
    g = &local;
  }
  PrecomputedKernels kernels{*g, compute_d(samples, traj, n), n, fp};
  result.precompute_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  ObjectiveContext ctx(std::move(kernels), samples, config.hyper);
  auto optimized = minimize(ctx, config.optim);
  result.optimize_seconds = seconds_since(start);
  result.regularized = std::move(optimized.image);
  result.report = std::move(optimized.report);

  GriddingConfig grid_cfg = config.gridding;
  grid_cfg.arms = cell.arms;
  result.gridding = grid_reconstruct(samples, traj, n, grid_cfg);

  const auto id = cell.run_id();
  result.rows = metric_rows(id, cell, "regularized", result.regularized, phantom);
  auto grid_rows = metric_rows(id, cell, "gridding", result.gridding, phantom);
  result.rows.insert(result.rows.end(), grid_rows.begin(), grid_rows.end());
  result.kspace_distance_regularized = kspace_distance(result.regularized, phantom.image);
  result.kspace_distance_gridding = kspace_distance(result.gridding, phantom.image);
  return result;
}

void export_images(const std::filesystem::path& prefix, const ComplexImage& image, const ComplexImage* reference,
                   double diff_scale) {
  const auto base = prefix.string();
  write_pgm16(base + "_magnitude.pgm", magnitude_gray(image));
  write_pgm16(base + "_phase.pgm", phase_gray(image));
  write_pgm16(base + "_kspace.pgm", magnitude_gray(kspace_of_image(image)));
  if (reference) {
    if (reference->size() != image.size()) throw std::invalid_argument("reference image size differs");
    std::vector<double> diff(image.pixel_count());
    double peak = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
      diff[i] = std::abs(image.values()[i] - reference->values()[i]);
      peak = std::max(peak, diff[i]);
    }
    const double hi = diff_scale > 0.0 ? diff_scale : peak;
    write_pgm16(base + "_difference.pgm", to_gray16(diff, image.size(), image.size(), 0.0, hi));
  }
}

std::vector<CellResult> run_sweep(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto phantom = make_phantom(config.phantom);
  std::filesystem::create_directories(config.output_dir);
  save_experiment_config(config, config.output_dir / "config.ini");
  if (config.export_images) {
    write_image(config.output_dir / "phantom.bin", phantom.image);
    export_images(config.output_dir / "phantom", phantom.image, nullptr);
  }

  std::map<std::string, LagArray> g_cache;
  std::vector<CellResult> results;
  std::vector<ResultRow> rows;
  for (const auto& cell : sweep_cells(config)) {
    auto result = run_cell(config, phantom, cell, &g_cache);
    if (config.export_images) {
      const auto dir = config.output_dir / cell.run_id();
      std::filesystem::create_directories(dir);
      write_image(dir / "regularized.bin", result.regularized);
      write_image(dir / "gridding.bin", result.gridding);
      write_trace_csv(dir / "trace.csv", result.report);
      double scale = 0.0;
      for (std::size_t i = 0; i < phantom.image.pixel_count(); ++i)
        scale = std::max({scale, std::abs(result.regularized.values()[i] - phantom.image.values()[i]),
                          std::abs(result.gridding.values()[i] - phantom.image.values()[i])});
      export_images(dir / "regularized", result.regularized, &phantom.image, scale);
      export_images(dir / "gridding", result.gridding, &phantom.image, scale);
    }
    rows.insert(rows.end(), result.rows.begin(), result.rows.end());
    if (progress) progress(result);
    results.push_back(std::move(result));
  }
  write_results_csv(config.output_dir / "results.csv", rows);
  return results;
}

}  // namespace mrrecon
