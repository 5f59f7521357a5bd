#pragma once

#include <memory>
#include <span>

#include "mrrecon/kernels.hpp"
#include "mrrecon/trajectory.hpp"
#include "mrrecon/types.hpp"

namespace mrrecon {

struct Hyperparameters {
  double lambda1 = 0.1;  // edge-preserving smoothness weight
  double alpha1 = 20.0;  // Huber knee on pixel differences
  double lambda0 = 0.5;  // background weight
  double alpha0 = 10.0;  // Huber knee on pixel values

  void validate() const;
};

using CorrelationMap = LagArray;

// C(u,v) = sum_{p,q} f(q,p) conj(f(q-v, p-u)) over the overlapping support,
// computed through a zero-padded 2N x 2N FFT. Hermitian by construction.
CorrelationMap autocorrelation(const ComplexImage& image);

// Immutable evaluation context for the regularized criterion. Holds the
// kernels plus the FFT of the zero-padded convolution kernel used by the
// gradient, so it can be shared across threads.
class ObjectiveContext {
public:
  ObjectiveContext(std::shared_ptr<const PrecomputedKernels> kernels, double data_norm, Hyperparameters hyper);
  ObjectiveContext(PrecomputedKernels kernels, std::span<const cplx> samples, Hyperparameters hyper);

  const PrecomputedKernels& kernels() const { return *kernels_; }
  const Hyperparameters& hyper() const { return hyper_; }
  double data_norm() const { return data_norm_; }
  std::size_t n_grid() const { return kernels_->n_grid; }
  std::size_t padded_size() const { return 2 * kernels_->n_grid; }
  std::span<const cplx> kernel_spectrum() const { return kernel_spectrum_; }

  ObjectiveContext with_hyper(Hyperparameters hyper) const;

private:
  std::shared_ptr<const PrecomputedKernels> kernels_;
  double data_norm_;
  Hyperparameters hyper_;
  std::shared_ptr<const std::vector<cplx>> spectrum_owner_;
  std::span<const cplx> kernel_spectrum_;
};

class ConsistencyError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// J_LS = sum|s|^2 - 2 Re sum conj(f) D + sum C G.
double eval_jls_fast(const ComplexImage& image, const ObjectiveContext& ctx);
// J_LS = sum_l |s_l - (H f)_l|^2 by direct non-uniform DFT.
double eval_jls_direct(const ComplexImage& image, const Trajectory& traj, std::span<const cplx> samples);

// Packed real gradient: real part d/dRe f, imaginary part d/dIm f.
// grad = 2 (f * conj G) - 2 D, via zero-padded FFT convolution.
ComplexImage grad_jls(const ComplexImage& image, const ObjectiveContext& ctx);

double huber(double x, double alpha);
double huber_prime(double x, double alpha);

struct RegularizerTerms {
  double omega1 = 0.0;  // differences, both directions, non-periodic
  double omega0 = 0.0;  // pixel magnitudes
};

RegularizerTerms regularizer_terms(const ComplexImage& image, const Hyperparameters& hyper);
double eval_regularizer(const ComplexImage& image, const Hyperparameters& hyper);
ComplexImage grad_regularizer(const ComplexImage& image, const Hyperparameters& hyper);

struct CriterionValue {
  double jls = 0.0;
  double omega1 = 0.0;
  double omega0 = 0.0;
  double total = 0.0;
};

CriterionValue evaluate(const ComplexImage& image, const ObjectiveContext& ctx);
double eval_jreg(const ComplexImage& image, const ObjectiveContext& ctx);
ComplexImage grad_jreg(const ComplexImage& image, const ObjectiveContext& ctx);

}  // namespace mrrecon
