#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fluxfno/data.hpp"
#include "fluxfno/fno.hpp"
#include "fluxfno/rollout.hpp"

namespace fluxfno {

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t sched_step = 50;
  double sched_gamma = 0.5;
  std::size_t epochs = 1000;
  double lambda = 0.01;
  std::size_t batch_size = 0;  // 0 selects n_steps (one batch per trajectory)
  Integrator integrator = Integrator::euler;
  std::uint64_t seed = 0;
  int p = 0;
  int q = 1;

  void validate() const;
};

json to_json(const TrainConfig& c);
/// Rejects unknown keys; missing keys keep their defaults.
TrainConfig train_config_from_json(const json& j);

/// Consecutive transitions U^n -> U^{n+1} of one trajectory, layout [batch, N].
struct TrainBatch {
  std::size_t batch = 0;
  std::size_t n = 0;
  double dx = 0.0;
  std::vector<double> inputs;
  std::vector<double> targets;
  std::vector<double> dts;
  std::vector<double> times;  // time of each input state

  /// Transitions start .. start+len-1 of `traj`.
  static TrainBatch window(const Trajectory& traj, std::size_t start, std::size_t len);

  GridFunction input(std::size_t b) const;
  GridFunction target(std::size_t b) const;
  /// Throws unless every target is the next input and times advance by dt.
  void check_contiguous() const;
};

struct LossParts {
  double tm = 0.0;
  double consi = 0.0;
  double total = 0.0;
};

/// sum_b || U^{n+1} - step(G, U^n, dt) ||^2 with the chosen integrator.
double loss_tm(const FluxOperator& G, const TrainBatch& batch, Integrator integrator = Integrator::euler);

/// sum over states of || G(U, ..., U) - F(U) ||^2.
double loss_consi(const FluxOperator& G, const std::vector<GridFunction>& states, const PhysicalFlux& F);

double total_loss(const FluxOperator& G, const TrainBatch& batch, const PhysicalFlux& F, double lambda,
                  Integrator integrator = Integrator::euler);

/// Loss of one batch and, when `grads` is non-null, its gradient with respect
/// to every parameter (accumulated into `grads`). Gradients flow through both
/// stages of the RK2 composite.
LossParts batch_loss_grad(const FnoParams& params, const TrainBatch& batch, const PhysicalFlux& F,
                          double lambda, Integrator integrator, int p, int q, FnoParams* grads);

struct EpochLoss {
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss_tm = 0.0;
  double loss_consi = 0.0;
  double total = 0.0;
};

struct TrainState {
  FnoParams params;
  FnoParams m;
  FnoParams v;
  std::size_t step = 0;
  std::size_t epoch = 0;
  std::vector<EpochLoss> history;

  explicit TrainState(FnoParams initial);
};

double lr_at(std::size_t epoch, const TrainConfig& config);

/// Adam with bias correction and coupled weight decay (grad += wd * param),
/// using the learning rate of state.epoch. Throws on non-finite gradients.
void adam_step(TrainState& state, const FnoParams& grads, const TrainConfig& config);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::vector<EpochLoss> history, FnoParams last_good)
      : std::runtime_error(what), history(std::move(history)), last_good(std::move(last_good)) {}
  std::vector<EpochLoss> history;
  FnoParams last_good;  // parameters at the end of the last finite epoch
};

struct TrainResult {
  FnoParams params;
  std::vector<EpochLoss> history;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

/// Shared loop: per epoch, the batches (contiguous windows of one trajectory)
/// are visited in an order shuffled by (seed, epoch); one Adam step per batch.
TrainResult train(const Dataset& data, const FnoConfig& fno_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});
/// Euler residual; requires config.integrator == euler.
TrainResult train_basic(const Dataset& data, const FnoConfig& fno_config, const TrainConfig& config,
                        const EpochCallback& on_epoch = {});
/// RK2 residual; requires config.integrator == ssp_rk2.
TrainResult train_rk(const Dataset& data, const FnoConfig& fno_config, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

}  // namespace fluxfno
