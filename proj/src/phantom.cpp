#include "mrrecon/phantom.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "mrrecon/fft.hpp"

namespace mrrecon {

PhantomSpec PhantomSpec::standard(std::size_t n_grid) {
  const auto n = static_cast<double>(n_grid);
  PhantomSpec spec;
  spec.n_grid = n_grid;
  spec.square_cx = spec.square_cy = static_cast<double>(n_grid / 2);
  spec.square_side = n / 2.0;
  spec.square_magnitude = 100.0;
  // Small grids still get a blunt vessel wide enough to hold ROI2.
  const double radius = std::max(n / 10.0, 3.0);
  spec.vessels = {
      {0.3 * n, 0.3 * n, radius, 200.0, FlowProfile::parabolic, 2.0},
      {0.72 * n, 0.72 * n, radius, 200.0, FlowProfile::blunt, 1.0},
  };
  return spec;
}

void PhantomSpec::validate() const {
  const auto n = static_cast<double>(n_grid);
  if (n_grid < 8) throw std::invalid_argument("phantom grid must be at least 8 pixels");
  if (!(square_side > 0.0) || !(square_magnitude >= 0.0)) throw std::invalid_argument("bad background square");
  if (square_cx - square_side / 2 < 0.0 || square_cy - square_side / 2 < 0.0 || square_cx + square_side / 2 > n ||
      square_cy + square_side / 2 > n)
    throw std::invalid_argument("background square leaves the grid");

  bool has_blunt = false;
  for (std::size_t i = 0; i < vessels.size(); ++i) {
    const auto& v = vessels[i];
    if (!(v.radius > 0.0) || !(v.magnitude >= 0.0) || !std::isfinite(v.peak_phase))
      throw std::invalid_argument("vessel " + std::to_string(i + 1) + ": radius must be > 0 and magnitude >= 0");
    if (v.cx - v.radius < 0.0 || v.cy - v.radius < 0.0 || v.cx + v.radius > n - 1 || v.cy + v.radius > n - 1)
      throw std::invalid_argument("vessel " + std::to_string(i + 1) + " leaves the grid");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& w = vessels[j];
      if (std::hypot(v.cx - w.cx, v.cy - w.cy) < v.radius + w.radius)
        throw std::invalid_argument("vessels " + std::to_string(j + 1) + " and " + std::to_string(i + 1) + " overlap");
    }
    if (v.profile == FlowProfile::blunt && v.radius > 2.0) has_blunt = true;
  }
  if (!has_blunt) throw std::invalid_argument("phantom needs a blunt vessel of radius > 2 for ROI2");
}

std::size_t Roi::count() const {
  std::size_t c = 0;
  for (bool b : mask) c += b ? 1 : 0;
  return c;
}

Phantom make_phantom(const PhantomSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_grid;
  Phantom out{ComplexImage(n), {"roi1", n, std::vector<bool>(n * n)}, {"roi2", n, std::vector<bool>(n * n)}};

  const double half = spec.square_side / 2.0;
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) {
      const auto x = static_cast<double>(col), y = static_cast<double>(row);
      if (x >= spec.square_cx - half && x < spec.square_cx + half && y >= spec.square_cy - half &&
          y < spec.square_cy + half) {
        out.image(row, col) = spec.square_magnitude;
        out.roi1.mask[row * n + col] = true;
      }
    }
  }

  const Vessel* roi_vessel = nullptr;
  for (const auto& v : spec.vessels) {
    if (!roi_vessel && v.profile == FlowProfile::blunt) roi_vessel = &v;
    for (std::size_t row = 0; row < n; ++row) {
      for (std::size_t col = 0; col < n; ++col) {
        const double r = std::hypot(static_cast<double>(col) - v.cx, static_cast<double>(row) - v.cy);
        if (r > v.radius) continue;
        const double phase =
            v.profile == FlowProfile::parabolic ? v.peak_phase * (1.0 - (r / v.radius) * (r / v.radius)) : v.peak_phase;
        out.image(row, col) = std::polar(v.magnitude, phase);
        if (&v == roi_vessel && r <= v.radius - 2.0) out.roi2.mask[row * n + col] = true;
      }
    }
  }
  return out;
}

QuadError quad_error(const ComplexImage& recon, const ComplexImage& reference, const Roi& roi) {
  if (recon.size() != reference.size() || recon.size() != roi.n_grid)
    throw std::invalid_argument("quad_error: image/ROI sizes differ");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < roi.mask.size(); ++i) {
    if (!roi.mask[i]) continue;
    err += std::norm(recon.values()[i] - reference.values()[i]);
    ref += std::norm(reference.values()[i]);
  }
  QuadError q{err, std::nullopt};
  if (ref > 0.0) q.normalized = err / ref;
  return q;
}

double roi_variance(const ComplexImage& recon, const Roi& roi) {
  if (recon.size() != roi.n_grid) throw std::invalid_argument("roi_variance: image/ROI sizes differ");
  const std::size_t count = roi.count();
  if (count == 0) throw std::invalid_argument("roi_variance: empty ROI");
  double mean = 0.0;
  for (std::size_t i = 0; i < roi.mask.size(); ++i)
    if (roi.mask[i]) mean += std::abs(recon.values()[i]);
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (std::size_t i = 0; i < roi.mask.size(); ++i) {
    if (!roi.mask[i]) continue;
    const double d = std::abs(recon.values()[i]) - mean;
    var += d * d;
  }
  return var / static_cast<double>(count);
}

ComplexImage kspace_of_image(const ComplexImage& image) {
  const std::size_t n = image.size();
  std::vector<cplx> buf(image.values().begin(), image.values().end());
  fft::forward_2d(buf, n);
  ComplexImage out(n);
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t col = 0; col < n; ++col)
      out((row + n / 2) % n, (col + n / 2) % n) = std::abs(buf[row * n + col]);
  return out;
}

double kspace_distance(const ComplexImage& image, const ComplexImage& reference) {
  const auto a = kspace_of_image(image);
  const auto b = kspace_of_image(reference);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    const double d = a.values()[i].real() - b.values()[i].real();
    num += d * d;
    den += b.values()[i].real() * b.values()[i].real();
  }
  return std::sqrt(num / den);
}

namespace {

Vessel parse_vessel(const std::string& key, const std::string& text) {
  std::stringstream ss(text);
  std::vector<std::string> fields;
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    fields.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  if (fields.size() != 6) throw std::invalid_argument(key + ": expected 'cx, cy, radius, magnitude, profile, phase'");
  Vessel v;
  try {
    v.cx = std::stod(fields[0]);
    v.cy = std::stod(fields[1]);
    v.radius = std::stod(fields[2]);
    v.magnitude = std::stod(fields[3]);
    v.peak_phase = std::stod(fields[5]);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": malformed number in '" + text + "'");
  }
  if (fields[4] == "parabolic")
    v.profile = FlowProfile::parabolic;
  else if (fields[4] == "blunt")
    v.profile = FlowProfile::blunt;
  else
    throw std::invalid_argument(key + ": flow profile must be parabolic or blunt");
  return v;
}

}  // namespace

PhantomSpec phantom_spec_from_tree(const boost::property_tree::ptree& section) {
  const auto n = section.get<std::size_t>("n_grid", 128);
  PhantomSpec spec = PhantomSpec::standard(n);
  spec.square_cx = section.get("square_cx", spec.square_cx);
  spec.square_cy = section.get("square_cy", spec.square_cy);
  spec.square_side = section.get("square_side", spec.square_side);
  spec.square_magnitude = section.get("square_magnitude", spec.square_magnitude);
  std::vector<Vessel> vessels;
  for (int i = 1;; ++i) {
    const auto key = "vessel" + std::to_string(i);
    auto text = section.get_optional<std::string>(key);
    if (!text) break;
    vessels.push_back(parse_vessel(key, *text));
  }
  if (!vessels.empty()) spec.vessels = std::move(vessels);
  spec.validate();
  return spec;
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::runtime_error(e.what());
  }
  return phantom_spec_from_tree(tree.get_child("phantom", boost::property_tree::ptree{}));
}

void save_phantom_spec(const PhantomSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17) << "[phantom]\n"
      << "n_grid = " << spec.n_grid << '\n'
      << "square_cx = " << spec.square_cx << '\n'
      << "square_cy = " << spec.square_cy << '\n'
      << "square_side = " << spec.square_side << '\n'
      << "square_magnitude = " << spec.square_magnitude << '\n';
  for (std::size_t i = 0; i < spec.vessels.size(); ++i) {
    const auto& v = spec.vessels[i];
    out << "vessel" << i + 1 << " = " << v.cx << ", " << v.cy << ", " << v.radius << ", " << v.magnitude << ", "
        << (v.profile == FlowProfile::parabolic ? "parabolic" : "blunt") << ", " << v.peak_phase << '\n';
  }
}

}  // namespace mrrecon
