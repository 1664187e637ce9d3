#include "fluxfno/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fluxfno {

namespace {

std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  long r = i % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": size mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

GridFunction::GridFunction(std::vector<double> values)
    : GridFunction(std::move(values), 0.0) {}

GridFunction::GridFunction(std::vector<double> values, double dx) : values_(std::move(values)) {
  if (values_.size() < 4) {
    throw std::invalid_argument("GridFunction needs at least 4 cells, got " +
                                std::to_string(values_.size()));
  }
  dx_ = dx > 0.0 ? dx : 1.0 / static_cast<double>(values_.size());
}

GridFunction GridFunction::zeros(std::size_t n) { return constant(n, 0.0); }

GridFunction GridFunction::constant(std::size_t n, double value) {
  return GridFunction(std::vector<double>(n, value));
}

bool GridFunction::is_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Trajectory::Trajectory(GridFunction initial) { states_.push_back(std::move(initial)); }

Trajectory::Trajectory(std::vector<GridFunction> states, std::vector<double> dts)
    : states_(std::move(states)), dts_(std::move(dts)) {
  if (states_.empty() || states_.size() != dts_.size() + 1) {
    throw std::invalid_argument("Trajectory needs n_steps + 1 states");
  }
  for (const auto& s : states_) {
    if (s.size() != states_.front().size() || s.dx() != states_.front().dx()) {
      throw std::invalid_argument("Trajectory states must share N and dx");
    }
  }
  for (double dt : dts_) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw std::invalid_argument("Trajectory time steps must be positive and finite");
    }
  }
}

void Trajectory::push(GridFunction state, double dt) {
  if (!states_.empty() && state.size() != states_.front().size()) {
    throw std::invalid_argument("Trajectory states must share N");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("Trajectory time steps must be positive and finite");
  }
  states_.push_back(std::move(state));
  dts_.push_back(dt);
}

void roll_into(std::span<const double> src, long s, std::span<double> dst) {
  const std::size_t n = src.size();
  const std::size_t shift = wrap(s, n);
  // dst[i] = src[i - shift]
  std::copy(src.begin(), src.end() - static_cast<long>(shift), dst.begin() + static_cast<long>(shift));
  std::copy(src.end() - static_cast<long>(shift), src.end(), dst.begin());
}

GridFunction roll(const GridFunction& u, long s) {
  std::vector<double> out(u.size());
  roll_into(u.values(), s, out);
  return GridFunction(std::move(out), u.dx());
}

void fill_stencil(std::span<const double> u, int p, int q, bool right, std::span<double> out) {
  const std::size_t n = u.size();
  const std::size_t ch = static_cast<std::size_t>(p + q + 1);
  const long base = right ? -p - 1 : -p;
  for (std::size_t c = 0; c < ch; ++c) {
    const long off = base + static_cast<long>(c);
    for (std::size_t j = 0; j < n; ++j) {
      out[j * ch + c] = u[wrap(static_cast<long>(j) + off, n)];
    }
  }
}

std::pair<StencilField, StencilField> build_stencil_pair(const GridFunction& u, int p, int q) {
  if (p < 0 || q < 0) throw std::invalid_argument("stencil offsets must be non-negative");
  const std::size_t ch = static_cast<std::size_t>(p + q + 1);
  if (ch > u.size()) {
    throw std::invalid_argument("stencil of width " + std::to_string(ch) +
                                " does not fit a grid of " + std::to_string(u.size()) + " cells");
  }
  StencilField left{u.size(), ch, std::vector<double>(u.size() * ch)};
  StencilField right{u.size(), ch, std::vector<double>(u.size() * ch)};
  fill_stencil(u.values(), p, q, false, left.values);
  fill_stencil(u.values(), p, q, true, right.values);
  return {std::move(left), std::move(right)};
}

double rel_l2(std::span<const double> pred, std::span<const double> ref) {
  require_same_size(pred.size(), ref.size(), "rel_l2");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    const double d = pred[j] - ref[j];
    num += d * d;
    den += ref[j] * ref[j];
  }
  if (den == 0.0) throw std::invalid_argument("rel_l2: reference has zero norm");
  return std::sqrt(num) / std::sqrt(den);
}

double rel_l2(const GridFunction& pred, const GridFunction& ref) {
  return rel_l2(pred.values(), ref.values());
}

double linf(std::span<const double> pred, std::span<const double> ref) {
  require_same_size(pred.size(), ref.size(), "linf");
  double m = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) m = std::max(m, std::abs(pred[j] - ref[j]));
  return m;
}

double linf(const GridFunction& pred, const GridFunction& ref) {
  return linf(pred.values(), ref.values());
}

double total_variation(const GridFunction& u) {
  const std::size_t n = u.size();
  double tv = 0.0;
  for (std::size_t j = 0; j < n; ++j) tv += std::abs(u[(j + 1) % n] - u[j]);
  return tv;
}

double mass(const GridFunction& u) {
  double s = 0.0;
  for (double v : u.values()) s += v;
  return u.dx() * s;
}

}  // namespace fluxfno
