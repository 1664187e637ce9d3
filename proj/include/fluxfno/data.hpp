#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fluxfno/container.hpp"
#include "fluxfno/grid.hpp"
#include "fluxfno/rng.hpp"
#include "fluxfno/schemes.hpp"

namespace fluxfno {

/// Periodic stationary Gaussian field with covariance exp(-((x - y) / scale)^2).
struct GrfSpec {
  std::size_t n = 256;
  double scale = 0.1;
  std::uint64_t seed = 0;
};

/// Circulant spectral sampler. Precomputes sqrt eigenvalues and trig tables
/// so repeated draws at one (n, scale) are cheap.
class GrfSampler {
 public:
  GrfSampler(std::size_t n, double scale);

  GridFunction sample(Rng& rng) const;
  std::size_t size() const { return n_; }
  /// Eigenvalues of the circulant covariance (after clipping negatives to 0).
  const std::vector<double>& eigenvalues() const { return lambda_; }

 private:
  std::size_t n_;
  std::vector<double> lambda_;
  std::vector<double> amp_;  // per retained mode, includes Hermitian doubling and 1/n
  std::vector<double> cos_, sin_;
};

GridFunction grf_sample(const GrfSpec& spec);

/// Hat function: 0 outside [0.25, 0.75], peak 1 at x = 0.5.
GridFunction triangular_pulse(std::size_t n);
GridFunction step_function(std::size_t n, double uL = 1.0, double uR = 0.0, double x0 = 0.5);

/// Dataset description; also the JSON header of the on-disk file.
struct DatasetHeader {
  int version = 1;
  Equation equation = Equation::advection;
  std::size_t n_funcs = 0;
  std::size_t n_steps = 0;
  std::size_t nx = 256;
  double dt = 0.0;
  std::string generator = "exact";  // exact | reference | rollout
  std::uint64_t seed = 0;
  double grf_scale = 0.1;
  std::string initial = "grf";  // grf | pulse | step
  std::size_t substeps = 1;     // reference sub-steps per stored Burgers step
  double advection_speed = 1.0;
  std::vector<double> dts;  // per-step increments when not all equal to dt
  json extra = json::object();  // other header fields, preserved on round trip

  PhysicalFlux flux() const {
    return equation == Equation::advection ? PhysicalFlux::advection(advection_speed) : PhysicalFlux::burgers();
  }
  void validate() const;
};

json to_json(const DatasetHeader& h);
DatasetHeader dataset_header_from_json(const json& j);

struct Dataset {
  DatasetHeader header;
  std::vector<Trajectory> trajectories;
};

/// Initial condition of trajectory `index`: independent RNG stream per index.
/// Step data reads optional uL, uR and x0 from the extra header fields.
GridFunction dataset_initial_condition(const DatasetHeader& spec, std::size_t index);

/// Generates trajectories: exact translation for advection, reference_step
/// (with `substeps` equal sub-steps per stored step) for Burgers.
Dataset make_dataset(const DatasetHeader& spec);
DatasetHeader make_dataset(const DatasetHeader& spec, const std::filesystem::path& out_path);

void write_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset read_dataset(const std::filesystem::path& path);

/// Samples every `factor`-th node of a fine grid.
GridFunction restrict_injection(const GridFunction& fine, std::size_t factor);

}  // namespace fluxfno
