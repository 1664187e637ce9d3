#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fluxfno {

/// Cell values of a scalar state on the periodic unit interval.
///
/// Node j sits at x_j = j * dx. The default cell width is 1/N.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::vector<double> values);
  GridFunction(std::vector<double> values, double dx);

  static GridFunction zeros(std::size_t n);
  static GridFunction constant(std::size_t n, double value);

  std::size_t size() const { return values_.size(); }
  double dx() const { return dx_; }
  double x(std::size_t j) const { return static_cast<double>(j) * dx_; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& vector() const { return values_; }

  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }

  bool is_finite() const;
  double max_abs() const;

  friend bool operator==(const GridFunction&, const GridFunction&) = default;

 private:
  std::vector<double> values_;
  double dx_ = 0.0;
};

/// Shifted copies of a state, one channel per stencil offset.
/// Layout is [N, channels] row-major.
struct StencilField {
  std::size_t n = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  double at(std::size_t j, std::size_t c) const { return values[j * channels + c]; }
};

/// States at consecutive time levels plus the step between each pair.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(GridFunction initial);
  Trajectory(std::vector<GridFunction> states, std::vector<double> dts);

  void push(GridFunction state, double dt);

  std::size_t n_steps() const { return dts_.size(); }
  const std::vector<GridFunction>& states() const { return states_; }
  const std::vector<double>& dts() const { return dts_; }
  const GridFunction& state(std::size_t n) const { return states_.at(n); }
  const GridFunction& back() const { return states_.back(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<GridFunction> states_;
  std::vector<double> dts_;
};

/// Cyclic shift: result[i] = u[(i - s) mod N]. Positive s moves content right.
GridFunction roll(const GridFunction& u, long s);
void roll_into(std::span<const double> src, long s, std::span<double> dst);

/// Returns (U^l, U^r). Channel c of U^l at j holds u[j - p + c]; U^r is U^l shifted
/// one cell to the right, i.e. channel c holds u[j - p - 1 + c].
std::pair<StencilField, StencilField> build_stencil_pair(const GridFunction& u, int p, int q);

/// Writes the U^l (or, with `right`, U^r) stencil channels of a raw row.
void fill_stencil(std::span<const double> u, int p, int q, bool right, std::span<double> out);

double rel_l2(const GridFunction& pred, const GridFunction& ref);
double rel_l2(std::span<const double> pred, std::span<const double> ref);
double linf(const GridFunction& pred, const GridFunction& ref);
double linf(std::span<const double> pred, std::span<const double> ref);
double total_variation(const GridFunction& u);
double mass(const GridFunction& u);

}  // namespace fluxfno
