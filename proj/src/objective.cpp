#include "mrrecon/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "mrrecon/fft.hpp"
#include "mrrecon/forward_model.hpp"

namespace mrrecon {

void Hyperparameters::validate() const {
  for (double x : {lambda1, alpha1, lambda0, alpha0})
    if (!std::isfinite(x)) throw std::invalid_argument("hyperparameters must be finite");
  if (lambda1 < 0.0 || lambda0 < 0.0) throw std::invalid_argument("lambda values must be nonnegative");
  if (alpha1 <= 0.0 || alpha0 <= 0.0) throw std::invalid_argument("alpha values must be positive");
}

namespace {

// Wraps lag w in [1-N, N-1] onto a circular index of size p >= 2N-1.
std::size_t wrap(int w, std::size_t p) {
  return static_cast<std::size_t>(w < 0 ? w + static_cast<int>(p) : w);
}

std::vector<cplx> zero_pad(const ComplexImage& image, std::size_t p) {
  const std::size_t n = image.size();
  std::vector<cplx> out(p * p);
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t col = 0; col < n; ++col) out[row * p + col] = image(row, col);
  return out;
}

}  // namespace

CorrelationMap autocorrelation(const ComplexImage& image) {
  const std::size_t n = image.size();
  const std::size_t p = 2 * n;
  auto buf = zero_pad(image, p);
  fft::forward_2d(buf, p);
  for (auto& z : buf) z = std::norm(z);
  fft::backward_2d(buf, p);

  // Circular lag (v mod P, u mod P) holds sum f(q,p) conj(f(q-v,p-u)); P = 2N
  // leaves lags of magnitude N unused, so nothing aliases.
  const double scale = 1.0 / static_cast<double>(p * p);
  const int c = static_cast<int>(n) - 1;
  CorrelationMap corr(n);
  for (int v = 0; v <= c; ++v) {
    for (int u = (v == 0 ? 0 : -c); u <= c; ++u) {
      const cplx direct = buf[wrap(v, p) * p + wrap(u, p)];
      const cplx mirror = buf[wrap(-v, p) * p + wrap(-u, p)];
      const cplx value = 0.5 * (direct + std::conj(mirror)) * scale;
      corr.at(v, u) = value;
      corr.at(-v, -u) = std::conj(value);
    }
  }
  corr.at(0, 0) = cplx(corr.at(0, 0).real(), 0.0);
  return corr;
}

ObjectiveContext::ObjectiveContext(std::shared_ptr<const PrecomputedKernels> kernels, double data_norm,
                                   Hyperparameters hyper)
    : kernels_(std::move(kernels)), data_norm_(data_norm), hyper_(hyper) {
  if (!kernels_) throw std::invalid_argument("ObjectiveContext: null kernels");
  hyper_.validate();
  const std::size_t n = kernels_->n_grid;
  if (kernels_->g.grid_size() != n || kernels_->d.size() != n)
    throw std::invalid_argument("ObjectiveContext: kernel sizes disagree with N");
  if (!std::isfinite(data_norm_) || data_norm_ < 0.0)
    throw std::invalid_argument("ObjectiveContext: data norm must be finite and nonnegative");

  const std::size_t p = padded_size();
  const int c = static_cast<int>(n) - 1;
  auto spectrum = std::make_shared<std::vector<cplx>>(p * p);
  for (int v = -c; v <= c; ++v)
    for (int u = -c; u <= c; ++u) (*spectrum)[wrap(v, p) * p + wrap(u, p)] = std::conj(kernels_->g.at(v, u));
  fft::forward_2d(*spectrum, p);
  spectrum_owner_ = spectrum;
  kernel_spectrum_ = *spectrum;
}

ObjectiveContext::ObjectiveContext(PrecomputedKernels kernels, std::span<const cplx> samples, Hyperparameters hyper)
    : ObjectiveContext(std::make_shared<const PrecomputedKernels>(std::move(kernels)),
                       [&samples] {
                         double acc = 0.0;
                         for (const auto& z : samples) acc += std::norm(z);
                         return acc;
                       }(),
                       hyper) {}

ObjectiveContext ObjectiveContext::with_hyper(Hyperparameters hyper) const {
  hyper.validate();
  ObjectiveContext copy = *this;
  copy.hyper_ = hyper;
  return copy;
}

double eval_jls_fast(const ComplexImage& image, const ObjectiveContext& ctx) {
  if (image.size() != ctx.n_grid()) throw std::invalid_argument("eval_jls_fast: image size differs from context");
  const auto& d = ctx.kernels().d;
  const auto& g = ctx.kernels().g;

  double cross = 0.0;
  for (std::size_t i = 0; i < image.pixel_count(); ++i) cross += (std::conj(image.values()[i]) * d.values()[i]).real();

  const auto corr = autocorrelation(image);
  cplx quad = 0.0;
  for (std::size_t i = 0; i < corr.values().size(); ++i) quad += corr.values()[i] * g.values()[i];
  if (std::abs(quad.imag()) > 1e-9 * std::abs(quad.real()) + 1e-12)
    throw ConsistencyError("eval_jls_fast: sum C G has imaginary residue " + std::to_string(quad.imag()));

  return ctx.data_norm() - 2.0 * cross + quad.real();
}

double eval_jls_direct(const ComplexImage& image, const Trajectory& traj, std::span<const cplx> samples) {
  if (samples.size() != traj.size()) throw std::invalid_argument("eval_jls_direct: sample/trajectory length mismatch");
  const auto model = nudft_forward(image, traj);
  double acc = 0.0;
  for (std::size_t l = 0; l < samples.size(); ++l) acc += std::norm(samples[l] - model[l]);
  return acc;
}

ComplexImage grad_jls(const ComplexImage& image, const ObjectiveContext& ctx) {
  const std::size_t n = ctx.n_grid();
  if (image.size() != n) throw std::invalid_argument("grad_jls: image size differs from context");
  const std::size_t p = ctx.padded_size();

  auto buf = zero_pad(image, p);
  fft::forward_2d(buf, p);
  const auto spectrum = ctx.kernel_spectrum();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= spectrum[i];
  fft::backward_2d(buf, p);

  const double scale = 2.0 / static_cast<double>(p * p);
  const auto& d = ctx.kernels().d;
  ComplexImage grad(n);
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t col = 0; col < n; ++col) grad(row, col) = scale * buf[row * p + col] - 2.0 * d(row, col);
  return grad;
}

double huber(double x, double alpha) {
  const double a = std::abs(x);
  return a <= alpha ? x * x : 2.0 * alpha * a - alpha * alpha;
}

double huber_prime(double x, double alpha) {
  if (std::abs(x) <= alpha) return 2.0 * x;
  return x > 0.0 ? 2.0 * alpha : -2.0 * alpha;
}

namespace {

// Packed gradient of huber(|z|): 2z inside the knee, 2 alpha z/|z| outside.
cplx huber_complex_grad(cplx z, double alpha) {
  const double a = std::abs(z);
  return a <= alpha ? 2.0 * z : (2.0 * alpha / a) * z;
}

}  // namespace

RegularizerTerms regularizer_terms(const ComplexImage& image, const Hyperparameters& hyper) {
  const std::size_t n = image.size();
  RegularizerTerms terms;
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) {
      const cplx f = image(row, col);
      if (row + 1 < n) terms.omega1 += huber(std::abs(image(row + 1, col) - f), hyper.alpha1);
      if (col + 1 < n) terms.omega1 += huber(std::abs(image(row, col + 1) - f), hyper.alpha1);
      terms.omega0 += huber(std::abs(f), hyper.alpha0);
    }
  }
  return terms;
}

double eval_regularizer(const ComplexImage& image, const Hyperparameters& hyper) {
  const auto terms = regularizer_terms(image, hyper);
  return hyper.lambda1 * terms.omega1 + hyper.lambda0 * terms.omega0;
}

ComplexImage grad_regularizer(const ComplexImage& image, const Hyperparameters& hyper) {
  const std::size_t n = image.size();
  ComplexImage grad(n);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) {
      const cplx f = image(row, col);
      if (row + 1 < n) {
        const cplx psi = hyper.lambda1 * huber_complex_grad(image(row + 1, col) - f, hyper.alpha1);
        grad(row + 1, col) += psi;
        grad(row, col) -= psi;
      }
      if (col + 1 < n) {
        const cplx psi = hyper.lambda1 * huber_complex_grad(image(row, col + 1) - f, hyper.alpha1);
        grad(row, col + 1) += psi;
        grad(row, col) -= psi;
      }
      grad(row, col) += hyper.lambda0 * huber_complex_grad(f, hyper.alpha0);
    }
  }
  return grad;
}

CriterionValue evaluate(const ComplexImage& image, const ObjectiveContext& ctx) {
  CriterionValue value;
  value.jls = eval_jls_fast(image, ctx);
  const auto& hyper = ctx.hyper();
  const auto terms = regularizer_terms(image, hyper);
  value.omega1 = terms.omega1;
  value.omega0 = terms.omega0;
  value.total = value.jls + hyper.lambda1 * terms.omega1 + hyper.lambda0 * terms.omega0;
  return value;
}

double eval_jreg(const ComplexImage& image, const ObjectiveContext& ctx) { return evaluate(image, ctx).total; }

ComplexImage grad_jreg(const ComplexImage& image, const ObjectiveContext& ctx) {
  auto grad = grad_jls(image, ctx);
  const auto& hyper = ctx.hyper();
  if (hyper.lambda1 != 0.0 || hyper.lambda0 != 0.0) grad += grad_regularizer(image, hyper);
  return grad;
}

}  // namespace mrrecon
