#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fluxfno/data.hpp"
#include "fluxfno/rollout.hpp"
#include "fluxfno/train.hpp"

namespace fluxfno {

/// (relative L2, absolute L-infinity) metric pairs, one row per label and time.
struct ExperimentReport {
  struct Row {
    std::string label;
    double time = 0.0;
    double rel_l2 = 0.0;
    double linf = 0.0;
    std::size_t count = 0;       // test functions averaged
    double time_offset = 0.0;    // evaluated time minus requested time
    bool truncated = false;      // some rollout stopped at the blow-up guard
  };
  std::string title;
  std::vector<Row> rows;
  json metadata = json::object();

  const Row* find(const std::string& label, double time) const;
  const Row& at(const std::string& label) const;  // first row with this label

  friend bool operator==(const ExperimentReport&, const ExperimentReport&);
};

json to_json(const ExperimentReport& r);
ExperimentReport report_from_json(const json& j);
/// Aligned plain-text table with (rel L2, L-inf) columns.
std::string to_text(const ExperimentReport& r);
void write_report(const std::filesystem::path& json_path, const ExperimentReport& r);

/// FNV-1a over the raw parameter bytes; recorded in report metadata.
std::string params_hash(const FnoParams& params);
std::string dataset_hash(const Dataset& d);

struct EvalOptions {
  Integrator integrator = Integrator::euler;
  double dt = 0.0;  // 0 selects the dataset time step
};

/// Rolls every test function out from its first state and compares against
/// the stored states at each requested time (mean over functions). Adds a row
/// labelled "all" holding metrics over the concatenation of the time slices.
ExperimentReport evaluate(const FluxOperator& G, const Dataset& test, const std::vector<double>& times,
                          const EvalOptions& options = {});

struct OodOptions {
  std::size_t nx = 256;
  double dt = 0.0;     // 0 selects dx (advection) or 0.001 (Burgers)
  double t_end = 0.0;  // 0 selects 1.0 (advection) or 0.3 (Burgers)
  double rough_scale = 0.03;
  std::size_t n_rough = 1;
  std::uint64_t seed = 7;
  Integrator integrator = Integrator::euler;
  double advection_speed = 1.0;
};

/// Advection: triangular pulse and rough GRF against exact translation.
/// Burgers: step (uL=1, uR=0, x0=0.5) against the exact solution and rough GRF
/// against a 4x-resolution reference run restricted to the grid.
ExperimentReport ood_suite(const FluxOperator& G, Equation equation, const OodOptions& options = {});

/// Burgers step-function case only; shared by ood_suite and the ablation.
ExperimentReport::Row ood_step_case(const FluxOperator& G, const OodOptions& options);

struct ResolutionOptions {
  std::vector<std::size_t> resolutions{128, 256, 512};
  double dt_over_dx = 1.0;  // kept fixed across resolutions
  double t_end = 1.0;
  std::size_t n_samples = 1;
  Integrator integrator = Integrator::euler;
  double advection_speed = 1.0;
};

/// Samples initial conditions once on the finest grid and injects them to each
/// resolution; dt scales with dx. References: exact translation (advection) or
/// a 4x-finest reference run (Burgers).
ExperimentReport resolution_suite(const FluxOperator& G, Equation equation, const GrfSpec& grf,
                                  const ResolutionOptions& options = {});

struct AblationResult {
  ExperimentReport report_lambda;
  ExperimentReport report_zero;
  std::vector<EpochLoss> history_lambda;
  std::vector<EpochLoss> history_zero;
  bool partial = false;
};

/// Trains with the configured lambda and with lambda = 0 (otherwise identical)
/// and evaluates both on the Burgers step case.
AblationResult ablation_compare(const Dataset& data, const FnoConfig& fno_config, const TrainConfig& train_config,
                                const OodOptions& ood = {});

struct BoundInputs {
  double eps_tm = 0.0;
  double eps_consi = 0.0;
  double m = 1.0;
  double delta = 0.05;
  double gamma = 1.0;
  double h = 0.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double C3 = 1.0;
  double eps_h = 0.0;

  void validate() const;
};

/// min(C3 g e_tm / sqrt(m) + e_tm^2 (1 + sqrt(2 ln(4/delta) / m)),
///     h (C1 g e_c / sqrt(m) + e_c^2 (1 + sqrt(2 ln(4/delta) / m)) + C2 eps_h))
double theorem1_bound(const BoundInputs& b);

}  // namespace fluxfno
