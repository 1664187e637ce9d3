#include "fluxfno/diffkernel.hpp"

#include <Eigen/Core>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fluxfno {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

ConstMapMat rows_of(const BatchedField& f) {
  return {f.values.data(), static_cast<Eigen::Index>(f.rows()), static_cast<Eigen::Index>(f.channels)};
}
MapMat rows_of(BatchedField& f) {
  return {f.values.data(), static_cast<Eigen::Index>(f.rows()), static_cast<Eigen::Index>(f.channels)};
}
ConstMapMat slice(const BatchedField& f, std::size_t b) {
  return {f.values.data() + b * f.n * f.channels, static_cast<Eigen::Index>(f.n),
          static_cast<Eigen::Index>(f.channels)};
}
MapMat slice(BatchedField& f, std::size_t b) {
  return {f.values.data() + b * f.n * f.channels, static_cast<Eigen::Index>(f.n),
          static_cast<Eigen::Index>(f.channels)};
}

std::unique_ptr<DftTable> build_table(std::size_t n, std::size_t modes) {
  auto t = std::make_unique<DftTable>();
  t->n = n;
  t->modes = modes;
  t->cos.resize(modes * n);
  t->sin.resize(modes * n);
  t->inverse_weight.resize(modes);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < modes; ++k) {
    const bool self_conjugate = k == 0 || 2 * k == n;
    t->inverse_weight[k] = (self_conjugate ? 1.0 : 2.0) * inv_n;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t m = (j * k) % n;
      double c, s;
      if (m == 0) {
        c = 1.0, s = 0.0;
      } else if (2 * m == n) {
        c = -1.0, s = 0.0;
      } else if (4 * m == n) {
        c = 0.0, s = 1.0;
      } else if (4 * m == 3 * n) {
        c = 0.0, s = -1.0;
      } else {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) * inv_n;
        c = std::cos(angle);
        s = std::sin(angle);
      }
      t->cos[k * n + j] = c;
      t->sin[k * n + j] = s;
    }
  }
  return t;
}

void check_modes(std::size_t n, std::size_t modes) {
  if (modes == 0 || modes > n / 2 + 1) {
    throw std::invalid_argument("retained modes " + std::to_string(modes) +
                                " exceed n/2+1 for n=" + std::to_string(n));
  }
}

}  // namespace

const DftTable& dft_table(std::size_t n, std::size_t modes) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<DftTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, modes}];
  if (!slot) slot = build_table(n, modes);
  return *slot;
}

namespace {

// The DFT kernels work on a node-major copy [n x (batch * channels)] so that
// each transform is a single matrix product over the whole batch.
RowMat node_major(const BatchedField& f) {
  RowMat m(static_cast<Eigen::Index>(f.n), static_cast<Eigen::Index>(f.batch * f.channels));
  for (std::size_t b = 0; b < f.batch; ++b)
    for (std::size_t j = 0; j < f.n; ++j)
      for (std::size_t c = 0; c < f.channels; ++c)
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b * f.channels + c)) = f.at(b, j, c);
  return m;
}

// Splits coefficients into weighted real and imaginary [modes x (batch * channels)] blocks.
void split_coeffs(const SpectralCoeffs& c, std::span<const double> weight, RowMat& re, RowMat& im) {
  const auto cols = static_cast<Eigen::Index>(c.batch * c.channels);
  re.resize(static_cast<Eigen::Index>(c.modes), cols);
  im.resize(static_cast<Eigen::Index>(c.modes), cols);
  for (std::size_t b = 0; b < c.batch; ++b)
    for (std::size_t k = 0; k < c.modes; ++k)
      for (std::size_t ch = 0; ch < c.channels; ++ch) {
        const complex z = c.at(b, k, ch);
        const double w = weight.empty() ? 1.0 : weight[k];
        const auto r = static_cast<Eigen::Index>(k), col = static_cast<Eigen::Index>(b * c.channels + ch);
        re(r, col) = w * z.real();
        im(r, col) = w * z.imag();
      }
}

}  // namespace

SpectralCoeffs rdft_trunc(const BatchedField& v, std::size_t kmax) {
  const std::size_t modes = kmax + 1;
  check_modes(v.n, modes);
  const DftTable& t = dft_table(v.n, modes);
  const auto k = static_cast<Eigen::Index>(modes);
  const auto n = static_cast<Eigen::Index>(v.n);
  ConstMapMat cos_t(t.cos.data(), k, n), sin_t(t.sin.data(), k, n);
  const RowMat x = node_major(v);
  const RowMat re = cos_t * x;
  const RowMat im = sin_t * x;
  SpectralCoeffs out(v.batch, modes, v.channels);
  for (std::size_t b = 0; b < v.batch; ++b)
    for (std::size_t kk = 0; kk < modes; ++kk)
      for (std::size_t c = 0; c < v.channels; ++c) {
        const auto r = static_cast<Eigen::Index>(kk), col = static_cast<Eigen::Index>(b * v.channels + c);
        out.at(b, kk, c) = {re(r, col), -im(r, col)};
      }
  return out;
}

void rdft_trunc_backward(const SpectralCoeffs& grad_c, BatchedField& grad_v) {
  const DftTable& t = dft_table(grad_v.n, grad_c.modes);
  const auto k = static_cast<Eigen::Index>(grad_c.modes);
  const auto n = static_cast<Eigen::Index>(grad_v.n);
  ConstMapMat cos_t(t.cos.data(), k, n), sin_t(t.sin.data(), k, n);
  RowMat gre, gim;
  split_coeffs(grad_c, {}, gre, gim);
  RowMat dv = cos_t.transpose() * gre;
  dv.noalias() -= sin_t.transpose() * gim;
  for (std::size_t b = 0; b < grad_v.batch; ++b)
    for (std::size_t j = 0; j < grad_v.n; ++j)
      for (std::size_t c = 0; c < grad_v.channels; ++c)
        grad_v.at(b, j, c) += dv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b * grad_v.channels + c));
}

BatchedField irdft(const SpectralCoeffs& c, std::size_t n) {
  check_modes(n, c.modes);
  const DftTable& t = dft_table(n, c.modes);
  const auto k = static_cast<Eigen::Index>(c.modes);
  ConstMapMat cos_t(t.cos.data(), k, static_cast<Eigen::Index>(n));
  ConstMapMat sin_t(t.sin.data(), k, static_cast<Eigen::Index>(n));
  RowMat re, im;
  split_coeffs(c, t.inverse_weight, re, im);
  RowMat x = cos_t.transpose() * re;
  x.noalias() -= sin_t.transpose() * im;
  BatchedField out(c.batch, n, c.channels);
  for (std::size_t b = 0; b < c.batch; ++b)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t ch = 0; ch < c.channels; ++ch)
        out.at(b, j, ch) = x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b * c.channels + ch));
  return out;
}

SpectralCoeffs irdft_backward(const BatchedField& grad_out, std::size_t modes) {
  const std::size_t n = grad_out.n;
  check_modes(n, modes);
  const DftTable& t = dft_table(n, modes);
  const auto k = static_cast<Eigen::Index>(modes);
  ConstMapMat cos_t(t.cos.data(), k, static_cast<Eigen::Index>(n));
  ConstMapMat sin_t(t.sin.data(), k, static_cast<Eigen::Index>(n));
  const RowMat g = node_major(grad_out);
  const RowMat re = cos_t * g;
  const RowMat im = sin_t * g;
  SpectralCoeffs out(grad_out.batch, modes, grad_out.channels);
  for (std::size_t b = 0; b < grad_out.batch; ++b)
    for (std::size_t kk = 0; kk < modes; ++kk) {
      const double w = t.inverse_weight[kk];
      for (std::size_t c = 0; c < grad_out.channels; ++c) {
        const auto r = static_cast<Eigen::Index>(kk), col = static_cast<Eigen::Index>(b * grad_out.channels + c);
        out.at(b, kk, c) = {w * re(r, col), -w * im(r, col)};
      }
    }
  return out;
}

SpectralCoeffs spectral_apply(std::span<const complex> weights, std::size_t cin, std::size_t cout,
                              const SpectralCoeffs& c) {
  if (c.channels != cin || weights.size() != c.modes * cin * cout) {
    throw std::invalid_argument("spectral_apply: weight shape does not match coefficients");
  }
  SpectralCoeffs out(c.batch, c.modes, cout);
  for (std::size_t b = 0; b < c.batch; ++b)
    for (std::size_t k = 0; k < c.modes; ++k) {
      const complex* w = weights.data() + k * cin * cout;
      complex* o = &out.at(b, k, 0);
      // Written out in real arithmetic; complex operator* carries inf/nan
      // recovery that is far slower in this inner loop.
      for (std::size_t i = 0; i < cin; ++i) {
        const double xr = c.at(b, k, i).real(), xi = c.at(b, k, i).imag();
        for (std::size_t oo = 0; oo < cout; ++oo) {
          const double wr = w[i * cout + oo].real(), wi = w[i * cout + oo].imag();
          o[oo] += complex(wr * xr - wi * xi, wr * xi + wi * xr);
        }
      }
    }
  return out;
}

SpectralCoeffs spectral_apply_backward(std::span<const complex> weights, std::size_t cin,
                                       std::size_t cout, const SpectralCoeffs& c,
                                       const SpectralCoeffs& grad_out,
                                       std::span<complex> grad_weights) {
  // With out = R x split into real parts, the cotangents are
  //   dR = conj-free pairing: dRr = gr xr + gi xi, dRi = gi xr - gr xi
  //   dx:                     dxr = gr Rr + gi Ri, dxi = gi Rr - gr Ri
  // i.e. dR = g * conj(x) and dx = conj(R) * g in complex notation.
  SpectralCoeffs grad_c(c.batch, c.modes, cin);
  for (std::size_t b = 0; b < c.batch; ++b)
    for (std::size_t k = 0; k < c.modes; ++k) {
      const complex* w = weights.data() + k * cin * cout;
      complex* gw = grad_weights.data() + k * cin * cout;
      const complex* g = grad_out.values.data() + (b * grad_out.modes + k) * grad_out.channels;
      for (std::size_t i = 0; i < cin; ++i) {
        const double xr = c.at(b, k, i).real(), xi = c.at(b, k, i).imag();
        double ar = 0.0, ai = 0.0;
        for (std::size_t oo = 0; oo < cout; ++oo) {
          const double gr = g[oo].real(), gi = g[oo].imag();
          const double wr = w[i * cout + oo].real(), wi = w[i * cout + oo].imag();
          gw[i * cout + oo] += complex(gr * xr + gi * xi, gi * xr - gr * xi);
          ar += wr * gr + wi * gi;
          ai += wr * gi - wi * gr;
        }
        grad_c.at(b, k, i) = complex(ar, ai);
      }
    }
  return grad_c;
}

BatchedField conv1(std::span<const double> kernel, std::size_t kernel_size, std::size_t cin,
                   std::size_t cout, const BatchedField& v) {
  if (kernel_size % 2 == 0) throw std::invalid_argument("conv1: kernel size must be odd");
  if (kernel_size > v.n) throw std::invalid_argument("conv1: kernel wider than grid");
  if (v.channels != cin || kernel.size() != kernel_size * cin * cout) {
    throw std::invalid_argument("conv1: kernel shape does not match input");
  }
  BatchedField out(v.batch, v.n, cout);
  const long pad = static_cast<long>(kernel_size - 1) / 2;
  const long n = static_cast<long>(v.n);
  if (kernel_size == 1) {
    rows_of(out).noalias() = rows_of(v) * ConstMapMat(kernel.data(), static_cast<Eigen::Index>(cin),
                                                      static_cast<Eigen::Index>(cout));
    return out;
  }
  for (std::size_t b = 0; b < v.batch; ++b) {
    auto ob = slice(out, b);
    auto vb = slice(v, b);
    for (std::size_t j = 0; j < kernel_size; ++j) {
      const long shift = static_cast<long>(j) - pad;
      const long z0 = std::max(0L, -shift), z1 = std::min(n, n - shift);
      if (z1 <= z0) continue;
      ConstMapMat kj(kernel.data() + j * cin * cout, static_cast<Eigen::Index>(cin),
                     static_cast<Eigen::Index>(cout));
      ob.middleRows(z0, z1 - z0).noalias() += vb.middleRows(z0 + shift, z1 - z0) * kj;
    }
  }
  return out;
}

void conv1_backward(std::span<const double> kernel, std::size_t kernel_size, std::size_t cin,
                    std::size_t cout, const BatchedField& v, const BatchedField& grad_out,
                    std::span<double> grad_kernel, BatchedField* grad_v) {
  const long pad = static_cast<long>(kernel_size - 1) / 2;
  const long n = static_cast<long>(v.n);
  const auto ci = static_cast<Eigen::Index>(cin);
  const auto co = static_cast<Eigen::Index>(cout);
  if (kernel_size == 1) {
    MapMat(grad_kernel.data(), ci, co).noalias() += rows_of(v).transpose() * rows_of(grad_out);
    if (grad_v) rows_of(*grad_v).noalias() += rows_of(grad_out) * ConstMapMat(kernel.data(), ci, co).transpose();
    return;
  }
  for (std::size_t j = 0; j < kernel_size; ++j) {
    const long shift = static_cast<long>(j) - pad;
    const long z0 = std::max(0L, -shift), z1 = std::min(n, n - shift);
    if (z1 <= z0) continue;
    ConstMapMat kj(kernel.data() + j * cin * cout, ci, co);
    MapMat gk(grad_kernel.data() + j * cin * cout, ci, co);
    for (std::size_t b = 0; b < v.batch; ++b) {
      auto gb = slice(grad_out, b).middleRows(z0, z1 - z0);
      gk.noalias() += slice(v, b).middleRows(z0 + shift, z1 - z0).transpose() * gb;
      if (grad_v) slice(*grad_v, b).middleRows(z0 + shift, z1 - z0).noalias() += gb * kj.transpose();
    }
  }
}

BatchedField affine_pointwise(std::span<const double> weight, std::span<const double> bias,
                              std::size_t cin, std::size_t cout, const BatchedField& v) {
  if (v.channels != cin || weight.size() != cin * cout || bias.size() != cout) {
    throw std::invalid_argument("affine_pointwise: shape mismatch");
  }
  BatchedField out(v.batch, v.n, cout);
  auto o = rows_of(out);
  o.noalias() = rows_of(v) * ConstMapMat(weight.data(), static_cast<Eigen::Index>(cin),
                                         static_cast<Eigen::Index>(cout));
  o.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data(), static_cast<Eigen::Index>(cout));
  return out;
}

void affine_pointwise_backward(std::span<const double> weight, std::size_t cin, std::size_t cout,
                               const BatchedField& v, const BatchedField& grad_out,
                               std::span<double> grad_weight, std::span<double> grad_bias,
                               BatchedField* grad_v) {
  const auto ci = static_cast<Eigen::Index>(cin);
  const auto co = static_cast<Eigen::Index>(cout);
  auto g = rows_of(grad_out);
  MapMat(grad_weight.data(), ci, co).noalias() += rows_of(v).transpose() * g;
  Eigen::Map<Eigen::RowVectorXd>(grad_bias.data(), co) += g.colwise().sum();
  if (grad_v) rows_of(*grad_v).noalias() += g * ConstMapMat(weight.data(), ci, co).transpose();
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
  return cdf + x * pdf;
}

BatchedField gelu(const BatchedField& v) {
  BatchedField out = v;
  for (double& x : out.values) x = gelu(x);
  return out;
}

BatchedField gelu_backward(const BatchedField& v, const BatchedField& grad_out) {
  BatchedField g = grad_out;
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] *= gelu_derivative(v.values[i]);
  return g;
}

BatchedField gelu_backward(const BatchedField& v, const BatchedField& out, const BatchedField& grad_out) {
  constexpr double pdf_scale = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  BatchedField g = grad_out;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const double x = v.values[i];
    // gelu(x) = x cdf(x), so cdf = out / x away from the origin.
    const double d = std::abs(x) < 1e-3 ? gelu_derivative(x)
                                        : out.values[i] / x + x * std::exp(-0.5 * x * x) * pdf_scale;
    g.values[i] *= d;
  }
  return g;
}

// ---- Finite-difference verification ----------------------------------------

GradCheckReport grad_check(const DiffFunction& f, std::span<const double> params,
                           std::span<const double> input, double eps, double tol,
                           std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> x(input.begin(), input.end());
  const std::vector<double> out = f.forward(p, x);

  std::mt19937_64 gen(seed);
  std::vector<double> w(out.size());
  for (double& wi : w) wi = 2.0 * std::generate_canonical<double, 53>(gen) - 1.0;

  auto probe = [&](std::span<const double> pp, std::span<const double> xx) {
    const auto y = f.forward(pp, xx);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };

  std::vector<double> dp(p.size(), 0.0), dx(x.size(), 0.0);
  f.backward(p, x, w, dp, dx);

  GradCheckReport report;
  auto check = [&](std::vector<double>& vars, const std::vector<double>& grads, const char* label) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const std::string where = std::string(label) + "[" + std::to_string(i) + "]";
      if (!std::isfinite(grads[i])) {
        report.pass = false;
        report.failure = "non-finite gradient at " + where;
        report.worst = where;
        return;
      }
      const double saved = vars[i];
      vars[i] = saved + eps;
      const double up = probe(p, x);
      vars[i] = saved - eps;
      const double down = probe(p, x);
      vars[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double err = std::abs(grads[i] - fd) / std::max(1.0, std::abs(fd));
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = where;
      }
    }
  };
  check(p, dp, "param");
  if (report.failure.empty()) check(x, dx, "input");
  if (!report.failure.empty()) return report;
  report.pass = report.max_rel_error <= tol;
  if (!report.pass) report.failure = "relative error " + std::to_string(report.max_rel_error) + " at " + report.worst;
  return report;
}

namespace {

BatchedField as_field(std::span<const double> x, std::size_t b, std::size_t n, std::size_t c) {
  BatchedField f(b, n, c);
  std::copy(x.begin(), x.end(), f.values.begin());
  return f;
}

SpectralCoeffs as_coeffs(std::span<const double> x, std::size_t b, std::size_t k, std::size_t c) {
  SpectralCoeffs s(b, k, c);
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = {x[2 * i], x[2 * i + 1]};
  return s;
}

std::vector<double> flatten(const SpectralCoeffs& s) {
  std::vector<double> out(2 * s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    out[2 * i] = s.values[i].real();
    out[2 * i + 1] = s.values[i].imag();
  }
  return out;
}

std::span<const complex> as_complex(std::span<const double> x) {
  return {reinterpret_cast<const complex*>(x.data()), x.size() / 2};
}

}  // namespace

DiffFunction make_rdft_check(std::size_t batch, std::size_t n, std::size_t channels, std::size_t kmax) {
  DiffFunction f;
  f.forward = [=](std::span<const double>, std::span<const double> x) {
    return flatten(rdft_trunc(as_field(x, batch, n, channels), kmax));
  };
  f.backward = [=](std::span<const double>, std::span<const double>, std::span<const double> g,
                   std::span<double>, std::span<double> dx) {
    BatchedField grad(batch, n, channels);
    rdft_trunc_backward(as_coeffs(g, batch, kmax + 1, channels), grad);
    std::copy(grad.values.begin(), grad.values.end(), dx.begin());
  };
  return f;
}

DiffFunction make_irdft_check(std::size_t batch, std::size_t n, std::size_t channels, std::size_t kmax) {
  DiffFunction f;
  f.forward = [=](std::span<const double>, std::span<const double> x) {
    return irdft(as_coeffs(x, batch, kmax + 1, channels), n).values;
  };
  f.backward = [=](std::span<const double>, std::span<const double>, std::span<const double> g,
                   std::span<double>, std::span<double> dx) {
    const auto gc = irdft_backward(as_field(g, batch, n, channels), kmax + 1);
    const auto flat = flatten(gc);
    std::copy(flat.begin(), flat.end(), dx.begin());
  };
  return f;
}

DiffFunction make_spectral_apply_check(std::size_t batch, std::size_t modes, std::size_t cin,
                                       std::size_t cout) {
  DiffFunction f;
  f.forward = [=](std::span<const double> p, std::span<const double> x) {
    return flatten(spectral_apply(as_complex(p), cin, cout, as_coeffs(x, batch, modes, cin)));
  };
  f.backward = [=](std::span<const double> p, std::span<const double> x, std::span<const double> g,
                   std::span<double> dp, std::span<double> dx) {
    std::span<complex> gw(reinterpret_cast<complex*>(dp.data()), dp.size() / 2);
    const auto gc = spectral_apply_backward(as_complex(p), cin, cout, as_coeffs(x, batch, modes, cin),
                                            as_coeffs(g, batch, modes, cout), gw);
    const auto flat = flatten(gc);
    std::copy(flat.begin(), flat.end(), dx.begin());
  };
  return f;
}

DiffFunction make_conv1_check(std::size_t batch, std::size_t n, std::size_t kernel_size,
                              std::size_t cin, std::size_t cout) {
  DiffFunction f;
  f.forward = [=](std::span<const double> p, std::span<const double> x) {
    return conv1(p, kernel_size, cin, cout, as_field(x, batch, n, cin)).values;
  };
  f.backward = [=](std::span<const double> p, std::span<const double> x, std::span<const double> g,
                   std::span<double> dp, std::span<double> dx) {
    BatchedField grad(batch, n, cin);
    conv1_backward(p, kernel_size, cin, cout, as_field(x, batch, n, cin), as_field(g, batch, n, cout),
                   dp, &grad);
    std::copy(grad.values.begin(), grad.values.end(), dx.begin());
  };
  return f;
}

DiffFunction make_affine_check(std::size_t batch, std::size_t n, std::size_t cin, std::size_t cout) {
  // params = [W (cin*cout), b (cout)]
  DiffFunction f;
  f.forward = [=](std::span<const double> p, std::span<const double> x) {
    return affine_pointwise(p.first(cin * cout), p.subspan(cin * cout), cin, cout,
                            as_field(x, batch, n, cin))
        .values;
  };
  f.backward = [=](std::span<const double> p, std::span<const double> x, std::span<const double> g,
                   std::span<double> dp, std::span<double> dx) {
    BatchedField grad(batch, n, cin);
    affine_pointwise_backward(p.first(cin * cout), cin, cout, as_field(x, batch, n, cin),
                              as_field(g, batch, n, cout), dp.first(cin * cout),
                              dp.subspan(cin * cout), &grad);
    std::copy(grad.values.begin(), grad.values.end(), dx.begin());
  };
  return f;
}

DiffFunction make_gelu_check() {
  DiffFunction f;
  f.forward = [](std::span<const double>, std::span<const double> x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = gelu(x[i]);
    return y;
  };
  f.backward = [](std::span<const double>, std::span<const double> x, std::span<const double> g,
                  std::span<double>, std::span<double> dx) {
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = g[i] * gelu_derivative(x[i]);
  };
  return f;
}

}  // namespace fluxfno
