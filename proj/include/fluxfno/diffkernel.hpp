#pragma once

// Differentiable primitives used by the FNO forward pass. Each primitive has a
// forward function and a reverse-mode rule that accumulates parameter gradients
// and returns (or accumulates) the input cotangent. Real and imaginary parts of
// complex tensors are treated as independent real parameters.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fluxfno {

using complex = std::complex<double>;

/// Real tensor of shape [batch, n, channels], row-major.
struct BatchedField {
  std::size_t batch = 0;
  std::size_t n = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  BatchedField() = default;
  BatchedField(std::size_t b, std::size_t n_, std::size_t c)
      : batch(b), n(n_), channels(c), values(b * n_ * c, 0.0) {}

  std::size_t rows() const { return batch * n; }
  double& at(std::size_t b, std::size_t j, std::size_t c) { return values[(b * n + j) * channels + c]; }
  double at(std::size_t b, std::size_t j, std::size_t c) const {
    return values[(b * n + j) * channels + c];
  }
  bool same_shape(const BatchedField& o) const {
    return batch == o.batch && n == o.n && channels == o.channels;
  }
};

/// Retained Fourier modes 0..kmax of a real signal, shape [batch, modes, channels].
struct SpectralCoeffs {
  std::size_t batch = 0;
  std::size_t modes = 0;
  std::size_t channels = 0;
  std::vector<complex> values;

  SpectralCoeffs() = default;
  SpectralCoeffs(std::size_t b, std::size_t k, std::size_t c)
      : batch(b), modes(k), channels(c), values(b * k * c) {}

  complex& at(std::size_t b, std::size_t k, std::size_t c) { return values[(b * modes + k) * channels + c]; }
  complex at(std::size_t b, std::size_t k, std::size_t c) const {
    return values[(b * modes + k) * channels + c];
  }
};

/// Exact cos/sin tables for the length-n DFT restricted to the first `modes` modes.
struct DftTable {
  std::size_t n = 0;
  std::size_t modes = 0;
  std::vector<double> cos;  // [modes, n]
  std::vector<double> sin;  // [modes, n]
  std::vector<double> inverse_weight;  // [modes], includes the 1/n factor and Hermitian doubling
};

/// Cached, thread-safe.
const DftTable& dft_table(std::size_t n, std::size_t modes);

// ---- Spectral transforms ----------------------------------------------------

/// Unnormalized forward DFT along the grid axis, modes 0..kmax.
SpectralCoeffs rdft_trunc(const BatchedField& v, std::size_t kmax);
/// Adjoint of rdft_trunc: accumulates into grad_v.
void rdft_trunc_backward(const SpectralCoeffs& grad_c, BatchedField& grad_v);

/// Inverse real DFT with 1/n normalization. Imaginary parts of the zero and
/// Nyquist modes are ignored.
BatchedField irdft(const SpectralCoeffs& c, std::size_t n);
SpectralCoeffs irdft_backward(const BatchedField& grad_out, std::size_t modes);

// ---- Channel mixing ---------------------------------------------------------

/// out[b,k,o] = sum_i R[k,i,o] c[b,k,i]. R is [modes, cin, cout].
SpectralCoeffs spectral_apply(std::span<const complex> weights, std::size_t cin, std::size_t cout,
                              const SpectralCoeffs& c);
/// Accumulates dR into grad_weights and returns the cotangent of c.
SpectralCoeffs spectral_apply_backward(std::span<const complex> weights, std::size_t cin,
                                       std::size_t cout, const SpectralCoeffs& c,
                                       const SpectralCoeffs& grad_out,
                                       std::span<complex> grad_weights);

/// Zero-padded cross-correlation with odd kernel size: out[j] = sum_m v[j + m - pad] K[m].
/// K is [kernel, cin, cout].
BatchedField conv1(std::span<const double> kernel, std::size_t kernel_size, std::size_t cin,
                   std::size_t cout, const BatchedField& v);
/// Accumulates dK and, when grad_v is non-null, the input cotangent.
void conv1_backward(std::span<const double> kernel, std::size_t kernel_size, std::size_t cin,
                    std::size_t cout, const BatchedField& v, const BatchedField& grad_out,
                    std::span<double> grad_kernel, BatchedField* grad_v);

/// out[b,j,:] = W^T v[b,j,:] + bias. W is [cin, cout].
BatchedField affine_pointwise(std::span<const double> weight, std::span<const double> bias,
                              std::size_t cin, std::size_t cout, const BatchedField& v);
void affine_pointwise_backward(std::span<const double> weight, std::size_t cin, std::size_t cout,
                               const BatchedField& v, const BatchedField& grad_out,
                               std::span<double> grad_weight, std::span<double> grad_bias,
                               BatchedField* grad_v);

// ---- Activation -------------------------------------------------------------

double gelu(double x);
double gelu_derivative(double x);
BatchedField gelu(const BatchedField& v);
/// grad_in = grad_out * gelu'(v)
BatchedField gelu_backward(const BatchedField& v, const BatchedField& grad_out);
/// Same, given the forward output out = gelu(v); skips the second erf.
BatchedField gelu_backward(const BatchedField& v, const BatchedField& out, const BatchedField& grad_out);

// ---- Finite-difference verification ----------------------------------------

/// A differentiable map (params, input) -> output with its reverse-mode rule.
struct DiffFunction {
  std::function<std::vector<double>(std::span<const double> params, std::span<const double> input)>
      forward;
  /// Writes dparams and dinput for the given output cotangent (both zeroed by the caller).
  std::function<void(std::span<const double> params, std::span<const double> input,
                     std::span<const double> cotangent, std::span<double> dparams,
                     std::span<double> dinput)>
      backward;
};

struct GradCheckReport {
  bool pass = true;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // e.g. "param[3]" or "input[17]"
  std::string failure;
};

/// Compares reverse-mode gradients of the probe sum(w * forward) against central
/// differences for every parameter and input entry. w is a fixed random
/// cotangent. Relative error is |rev - fd| / max(1, |fd|).
GradCheckReport grad_check(const DiffFunction& f, std::span<const double> params,
                           std::span<const double> input, double eps, double tol,
                           std::uint64_t seed = 0x5eed);

// Ready-made DiffFunctions over each primitive (shapes fixed at construction).
DiffFunction make_rdft_check(std::size_t batch, std::size_t n, std::size_t channels, std::size_t kmax);
DiffFunction make_irdft_check(std::size_t batch, std::size_t n, std::size_t channels, std::size_t kmax);
DiffFunction make_spectral_apply_check(std::size_t batch, std::size_t modes, std::size_t cin,
                                       std::size_t cout);
DiffFunction make_conv1_check(std::size_t batch, std::size_t n, std::size_t kernel_size,
                              std::size_t cin, std::size_t cout);
DiffFunction make_affine_check(std::size_t batch, std::size_t n, std::size_t cin, std::size_t cout);
DiffFunction make_gelu_check();

}  // namespace fluxfno
