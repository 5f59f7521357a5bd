#include "mrrecon/types.hpp"

#include <cmath>

namespace mrrecon {

bool ComplexImage::all_finite() const {
  for (const auto& z : values_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

ComplexImage& ComplexImage::operator+=(const ComplexImage& other) {
  if (other.n_ != n_) throw std::invalid_argument("ComplexImage: size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexImage& ComplexImage::operator-=(const ComplexImage& other) {
  if (other.n_ != n_) throw std::invalid_argument("ComplexImage: size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexImage& ComplexImage::operator*=(cplx a) {
  for (auto& z : values_) z *= a;
  return *this;
}

ComplexImage operator+(ComplexImage a, const ComplexImage& b) { return a += b; }
ComplexImage operator-(ComplexImage a, const ComplexImage& b) { return a -= b; }
ComplexImage operator*(cplx s, ComplexImage a) { return a *= s; }

double real_dot(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("real_dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return acc;
}

double norm2(std::span<const cplx> a) { return std::sqrt(real_dot(a, a)); }

}  // namespace mrrecon
