#include "fluxfno/train.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "fluxfno/rng.hpp"

namespace fluxfno {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be positive");
  if (sched_step == 0) throw std::invalid_argument("sched_step must be positive");
  if (!(sched_gamma > 0.0)) throw std::invalid_argument("sched_gamma must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  if (p < 0 || q < 0) throw std::invalid_argument("stencil offsets p and q must be non-negative");
}

json to_json(const TrainConfig& c) {
  return json{{"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_eps", c.adam_eps},
              {"sched_step", c.sched_step},
              {"sched_gamma", c.sched_gamma},
              {"epochs", c.epochs},
              {"lambda", c.lambda},
              {"batch_size", c.batch_size},
              {"integrator", to_string(c.integrator)},
              {"seed", c.seed},
              {"p", c.p},
              {"q", c.q}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("train config must be a JSON object");
  static const std::set<std::string> known = {"lr",         "weight_decay", "adam_beta1", "adam_beta2",
                                              "adam_eps",   "sched_step",   "sched_gamma", "epochs",
                                              "lambda",     "batch_size",   "integrator", "seed",
                                              "p",          "q"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown train config key '" + key + "'");
  }
  TrainConfig c;
  try {
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.sched_step = j.value("sched_step", c.sched_step);
    c.sched_gamma = j.value("sched_gamma", c.sched_gamma);
    c.epochs = j.value("epochs", c.epochs);
    c.lambda = j.value("lambda", c.lambda);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("integrator")) c.integrator = parse_integrator(j.at("integrator").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.p = j.value("p", c.p);
    c.q = j.value("q", c.q);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid train config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---- Batches -----------------------------------------------------------------

TrainBatch TrainBatch::window(const Trajectory& traj, std::size_t start, std::size_t len) {
  if (len == 0 || start + len > traj.n_steps()) throw std::out_of_range("batch window outside the trajectory");
  TrainBatch b;
  b.batch = len;
  b.n = traj.state(0).size();
  b.dx = traj.state(0).dx();
  b.inputs.reserve(len * b.n);
  b.targets.reserve(len * b.n);
  double t = 0.0;
  for (std::size_t i = 0; i < start; ++i) t += traj.dts()[i];
  for (std::size_t i = start; i < start + len; ++i) {
    const auto& u = traj.state(i).values();
    const auto& v = traj.state(i + 1).values();
    b.inputs.insert(b.inputs.end(), u.begin(), u.end());
    b.targets.insert(b.targets.end(), v.begin(), v.end());
    b.dts.push_back(traj.dts()[i]);
    b.times.push_back(t);
    t += traj.dts()[i];
  }
  return b;
}

GridFunction TrainBatch::input(std::size_t b) const {
  return GridFunction(std::vector<double>(inputs.begin() + static_cast<long>(b * n),
                                          inputs.begin() + static_cast<long>((b + 1) * n)),
                      dx);
}

GridFunction TrainBatch::target(std::size_t b) const {
  return GridFunction(std::vector<double>(targets.begin() + static_cast<long>(b * n),
                                          targets.begin() + static_cast<long>((b + 1) * n)),
                      dx);
}

void TrainBatch::check_contiguous() const {
  if (inputs.size() != batch * n || targets.size() != batch * n || dts.size() != batch) {
    throw std::invalid_argument("batch arrays do not match its shape");
  }
  for (std::size_t b = 0; b + 1 < batch; ++b) {
    for (std::size_t j = 0; j < n; ++j) {
      if (targets[b * n + j] != inputs[(b + 1) * n + j]) {
        throw std::invalid_argument("batch is not time-contiguous: target " + std::to_string(b) +
                                    " is not the next input");
      }
    }
    if (!times.empty()) {
      const double expect = times[b] + dts[b];
      if (std::abs(times[b + 1] - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
        throw std::invalid_argument("batch is not time-contiguous at entry " + std::to_string(b + 1));
      }
    }
  }
}

// ---- Losses ------------------------------------------------------------------

double loss_tm(const FluxOperator& G, const TrainBatch& batch, Integrator integrator) {
  batch.check_contiguous();
  double sum = 0.0;
  for (std::size_t b = 0; b < batch.batch; ++b) {
    GridFunction pred;
    try {
      pred = step(G, batch.input(b), batch.dts[b], integrator);
    } catch (const BlowUp&) {
      return std::numeric_limits<double>::infinity();
    }
    for (std::size_t j = 0; j < batch.n; ++j) {
      const double r = batch.targets[b * batch.n + j] - pred[j];
      sum += r * r;
    }
  }
  return sum;
}

double loss_consi(const FluxOperator& G, const std::vector<GridFunction>& states, const PhysicalFlux& F) {
  double sum = 0.0;
  for (const auto& u : states) {
    BatchedField st(1, u.size(), G.channels());
    for (std::size_t j = 0; j < u.size(); ++j) {
      for (std::size_t c = 0; c < G.channels(); ++c) st.values[j * G.channels() + c] = u[j];
    }
    const std::vector<double> g = G.apply(st, u.dx());
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double e = g[j] - F(u[j]);
      sum += e * e;
    }
  }
  return sum;
}

double total_loss(const FluxOperator& G, const TrainBatch& batch, const PhysicalFlux& F, double lambda,
                  Integrator integrator) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  std::vector<GridFunction> states;
  for (std::size_t b = 0; b < batch.batch; ++b) states.push_back(batch.input(b));
  return loss_tm(G, batch, integrator) + lambda * loss_consi(G, states, F);
}

namespace {

// Fills stencil rows of `count` states stored back to back in `u` into rows
// [row0, row0 + count) of `out`.
void fill_stencils(const std::vector<double>& u, std::size_t count, std::size_t n, int p, int q, BatchedField& out,
                   std::size_t row0) {
  const std::size_t ch = out.channels;
  for (std::size_t b = 0; b < count; ++b) {
    fill_stencil(std::span<const double>(u.data() + b * n, n), p, q, false,
                 std::span<double>(out.values.data() + (row0 + b) * n * ch, n * ch));
  }
}

// Adjoint of fill_stencil (left stencil): du[j - p + c] += g[j, c].
void stencil_adjoint(const BatchedField& g, std::size_t count, int p, std::vector<double>& du) {
  const std::size_t n = g.n, ch = g.channels;
  for (std::size_t b = 0; b < count; ++b) {
    const double* gb = g.values.data() + b * n * ch;
    double* db = du.data() + b * n;
    for (std::size_t c = 0; c < ch; ++c) {
      const long off = static_cast<long>(c) - p;
      for (std::size_t j = 0; j < n; ++j) {
        long k = (static_cast<long>(j) + off) % static_cast<long>(n);
        if (k < 0) k += static_cast<long>(n);
        db[k] += gb[j * ch + c];
      }
    }
  }
}

// out = u - c (f - roll(f, 1)) per state, c = dt / dx.
void conservative_update(const std::vector<double>& u, const double* f, const std::vector<double>& ratio,
                         std::size_t count, std::size_t n, std::vector<double>& out) {
  out.resize(count * n);
  for (std::size_t b = 0; b < count; ++b) {
    const double c = ratio[b];
    const double* fb = f + b * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double right = fb[j == 0 ? n - 1 : j - 1];
      out[b * n + j] = u[b * n + j] - c * (fb[j] - right);
    }
  }
}

// Adjoint of conservative_update with respect to f: gf_j = -c (gout_j - gout_{j+1}).
void conservative_update_adjoint(const std::vector<double>& gout, const std::vector<double>& ratio,
                                 double scale, std::size_t count, std::size_t n, double* gf) {
  for (std::size_t b = 0; b < count; ++b) {
    const double c = scale * ratio[b];
    const double* g = gout.data() + b * n;
    for (std::size_t j = 0; j < n; ++j) {
      gf[b * n + j] = -c * (g[j] - g[j + 1 == n ? 0 : j + 1]);
    }
  }
}

}  // namespace

LossParts batch_loss_grad(const FnoParams& params, const TrainBatch& batch, const PhysicalFlux& F,
                          double lambda, Integrator integrator, int p, int q, FnoParams* grads) {
  const std::size_t B = batch.batch, n = batch.n;
  const std::size_t ch = static_cast<std::size_t>(p + q + 1);
  if (params.config().in_channels != ch) throw std::invalid_argument("model channels do not match the stencil");
  std::vector<double> ratio(B);
  for (std::size_t b = 0; b < B; ++b) ratio[b] = batch.dts[b] / batch.dx;

  // One forward pass covers the stencils (rows 0..B) and the replicated
  // consistency inputs (rows B..2B).
  BatchedField in0(2 * B, n, ch);
  fill_stencils(batch.inputs, B, n, p, q, in0, 0);
  for (std::size_t r = 0; r < B * n; ++r) {
    double* row = in0.values.data() + (B * n + r) * ch;
    for (std::size_t c = 0; c < ch; ++c) row[c] = batch.inputs[r];
  }
  FnoTrace tr0;
  const BatchedField out0 = forward(params, in0, grads ? &tr0 : nullptr);
  const double* f0 = out0.values.data();
  const double* h = out0.values.data() + B * n;

  LossParts parts;
  std::vector<double> consi_err(B * n);
  for (std::size_t r = 0; r < B * n; ++r) {
    consi_err[r] = h[r] - F(batch.inputs[r]);
    parts.consi += consi_err[r] * consi_err[r];
  }

  std::vector<double> u1, pred;
  FnoTrace tr1;
  BatchedField out1;
  conservative_update(batch.inputs, f0, ratio, B, n, u1);
  if (integrator == Integrator::euler) {
    pred = u1;
  } else {
    BatchedField in1(B, n, ch);
    fill_stencils(u1, B, n, p, q, in1, 0);
    out1 = forward(params, in1, grads ? &tr1 : nullptr);
    conservative_update(u1, out1.values.data(), ratio, B, n, pred);
    for (std::size_t r = 0; r < B * n; ++r) pred[r] = 0.5 * batch.inputs[r] + 0.5 * pred[r];
  }
  std::vector<double> resid(B * n);
  for (std::size_t r = 0; r < B * n; ++r) {
    resid[r] = batch.targets[r] - pred[r];
    parts.tm += resid[r] * resid[r];
  }
  parts.total = parts.tm + lambda * parts.consi;
  if (!grads) return parts;

  std::vector<double> g_pred(B * n);
  for (std::size_t r = 0; r < B * n; ++r) g_pred[r] = -2.0 * resid[r];

  BatchedField g_out0(2 * B, n, 1);
  if (integrator == Integrator::euler) {
    conservative_update_adjoint(g_pred, ratio, 1.0, B, n, g_out0.values.data());
  } else {
    BatchedField g_out1(B, n, 1);
    conservative_update_adjoint(g_pred, ratio, 0.5, B, n, g_out1.values.data());
    const BatchedField g_in1 = backward(params, tr1, g_out1, *grads);
    std::vector<double> g_u1(B * n);
    for (std::size_t r = 0; r < B * n; ++r) g_u1[r] = 0.5 * g_pred[r];
    stencil_adjoint(g_in1, B, p, g_u1);
    conservative_update_adjoint(g_u1, ratio, 1.0, B, n, g_out0.values.data());
  }
  for (std::size_t r = 0; r < B * n; ++r) g_out0.values[B * n + r] = 2.0 * lambda * consi_err[r];
  backward(params, tr0, g_out0, *grads);
  return parts;
}

// ---- Optimizer ---------------------------------------------------------------

TrainState::TrainState(FnoParams initial) : params(std::move(initial)), m(params.config()), v(params.config()) {}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  return config.lr * std::pow(config.sched_gamma, static_cast<double>(epoch / config.sched_step));
}

void adam_step(TrainState& state, const FnoParams& grads, const TrainConfig& config) {
  auto& params = state.params.tensors();
  const auto& g = grads.tensors();
  if (g.size() != params.size()) throw std::invalid_argument("gradient layout does not match parameters");
  for (std::size_t t = 0; t < g.size(); ++t) {
    if (g[t].data.size() != params[t].data.size()) {
      throw std::invalid_argument("gradient tensor " + g[t].name + " has the wrong size");
    }
    for (double x : g[t].data) {
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite gradient in tensor " + g[t].name);
    }
  }
  ++state.step;
  const double lr = lr_at(state.epoch, config);
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < g.size(); ++t) {
    auto& w = params[t].data;
    auto& m = state.m.tensor(t).data;
    auto& v = state.v.tensor(t).data;
    const auto& gt = g[t].data;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = gt[i] + config.weight_decay * w[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
  }
}

// ---- Training loops ----------------------------------------------------------

TrainResult train(const Dataset& data, const FnoConfig& fno_config_in, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  FnoConfig fno_config = fno_config_in;
  const auto channels = static_cast<std::size_t>(config.p + config.q + 1);
  if (fno_config.in_channels != channels) {
    throw std::invalid_argument("model has " + std::to_string(fno_config.in_channels) +
                                " input channels but the stencil needs " + std::to_string(channels));
  }
  fno_config.validate();
  if (data.trajectories.empty()) throw std::invalid_argument("training data has no trajectories");
  const PhysicalFlux F = data.header.flux();

  std::vector<TrainBatch> batches;
  for (const auto& traj : data.trajectories) {
    const std::size_t steps = traj.n_steps();
    if (steps == 0) throw std::invalid_argument("trajectory has no transitions");
    const std::size_t len = config.batch_size == 0 ? steps : config.batch_size;
    if (steps % len != 0) {
      throw std::invalid_argument("batch_size " + std::to_string(len) + " does not divide n_steps " +
                                  std::to_string(steps));
    }
    for (std::size_t s = 0; s < steps; s += len) batches.push_back(TrainBatch::window(traj, s, len));
  }

  TrainState state(init_params(fno_config, config.seed));
  FnoParams grads(state.params.config());
  std::vector<std::size_t> order(batches.size());
  for (std::size_t e = 0; e < config.epochs; ++e) {
    state.epoch = e;
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed, e + 1);
    rng.shuffle(order.begin(), order.end());
    const FnoParams epoch_start = state.params;
    EpochLoss rec;
    rec.epoch = e;
    rec.lr = lr_at(e, config);
    for (std::size_t idx : order) {
      grads.set_zero();
      const LossParts parts =
          batch_loss_grad(state.params, batches[idx], F, config.lambda, config.integrator, config.p, config.q, &grads);
      if (!std::isfinite(parts.total) || !grads.is_finite()) {
        throw TrainingDiverged("non-finite loss in epoch " + std::to_string(e), state.history, epoch_start);
      }
      adam_step(state, grads, config);
      rec.loss_tm += parts.tm;
      rec.loss_consi += parts.consi;
      rec.total += parts.total;
    }
    const double nb = static_cast<double>(batches.size());
    rec.loss_tm /= nb;
    rec.loss_consi /= nb;
    rec.total /= nb;
    if (!state.params.is_finite()) {
      throw TrainingDiverged("parameters became non-finite in epoch " + std::to_string(e), state.history,
                             epoch_start);
    }
    state.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return {std::move(state.params), std::move(state.history)};
}

TrainResult train_basic(const Dataset& data, const FnoConfig& fno_config, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  if (config.integrator != Integrator::euler) throw std::invalid_argument("train_basic needs the Euler integrator");
  return train(data, fno_config, config, on_epoch);
}

TrainResult train_rk(const Dataset& data, const FnoConfig& fno_config, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  if (config.integrator != Integrator::ssp_rk2) throw std::invalid_argument("train_rk needs the rk2 integrator");
  return train(data, fno_config, config, on_epoch);
}

}  // namespace fluxfno
