#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mrrecon {

using cplx = std::complex<double>;

// N x N complex image. Row index n pairs with k_y, column index m with k_x.
class ComplexImage {
public:
  ComplexImage() = default;
  explicit ComplexImage(std::size_t n, cplx fill = {}) : n_(n), values_(n * n, fill) {
    if (n == 0) throw std::invalid_argument("ComplexImage: grid size must be positive");
  }
  ComplexImage(std::size_t n, std::vector<cplx> values) : n_(n), values_(std::move(values)) {
    if (n == 0 || values_.size() != n * n)
      throw std::invalid_argument("ComplexImage: value count does not match N*N");
  }

  std::size_t size() const { return n_; }
  std::size_t pixel_count() const { return values_.size(); }

  cplx& operator()(std::size_t row, std::size_t col) { return values_[row * n_ + col]; }
  const cplx& operator()(std::size_t row, std::size_t col) const { return values_[row * n_ + col]; }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  bool all_finite() const;

  ComplexImage& operator+=(const ComplexImage& other);
  ComplexImage& operator-=(const ComplexImage& other);
  ComplexImage& operator*=(cplx a);

  friend bool operator==(const ComplexImage&, const ComplexImage&) = default;

private:
  std::size_t n_ = 0;
  std::vector<cplx> values_;
};

ComplexImage operator+(ComplexImage a, const ComplexImage& b);
ComplexImage operator-(ComplexImage a, const ComplexImage& b);
ComplexImage operator*(cplx s, ComplexImage a);

// Real inner product over the 2N^2 real coordinates: sum Re(conj(a) b).
double real_dot(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);

// (2N-1) x (2N-1) complex array indexed by lags u (column, k_x) and v (row, k_y)
// in [1-N, N-1]. Holds the trajectory kernel and image autocorrelations.
class LagArray {
public:
  LagArray() = default;
  explicit LagArray(std::size_t n) : n_(n), values_((2 * n - 1) * (2 * n - 1)) {
    if (n == 0) throw std::invalid_argument("LagArray: grid size must be positive");
  }
  LagArray(std::size_t n, std::vector<cplx> values) : n_(n), values_(std::move(values)) {
    if (n == 0 || values_.size() != (2 * n - 1) * (2 * n - 1))
      throw std::invalid_argument("LagArray: value count does not match (2N-1)^2");
  }

  std::size_t grid_size() const { return n_; }
  std::size_t side() const { return 2 * n_ - 1; }
  int max_lag() const { return static_cast<int>(n_) - 1; }

  cplx& at(int v, int u) { return values_[index(v, u)]; }
  const cplx& at(int v, int u) const { return values_[index(v, u)]; }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

private:
  std::size_t index(int v, int u) const {
    const int c = max_lag();
    return static_cast<std::size_t>(v + c) * side() + static_cast<std::size_t>(u + c);
  }

  std::size_t n_ = 0;
  std::vector<cplx> values_;
};

}  // namespace mrrecon
