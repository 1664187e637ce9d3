#include "fluxfno/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "fluxfno/parallel.hpp"

namespace fluxfno {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) { return j.is_null() ? kInf : j.get<double>(); }

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

std::uint64_t fnv1a(std::uint64_t h, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Metric {
  double rel_l2 = kInf;
  double linf = kInf;
};

Metric compare(const GridFunction& pred, const GridFunction& ref) {
  return {rel_l2(pred, ref), linf(pred, ref)};
}

ExperimentReport::Row mean_row(std::string label, double time, const std::vector<Metric>& ms, bool truncated) {
  ExperimentReport::Row row;
  row.label = std::move(label);
  row.time = time;
  row.count = ms.size();
  row.truncated = truncated;
  row.rel_l2 = 0.0;
  row.linf = 0.0;
  for (const auto& m : ms) {
    row.rel_l2 += m.rel_l2;
    row.linf += m.linf;
  }
  if (!ms.empty()) {
    row.rel_l2 /= static_cast<double>(ms.size());
    row.linf /= static_cast<double>(ms.size());
  }
  return row;
}

// Fixed-dt rollout to t_end; returns the final state or nullopt on blow-up.
std::optional<GridFunction> rollout_final(const FluxOperator& G, const GridFunction& u0, double t_end, double dt,
                                          Integrator integrator, const PhysicalFlux& F) {
  SchemeConfig scheme;
  scheme.p = G.p();
  scheme.q = G.q();
  scheme.integrator = integrator;
  scheme.dt_mode = DtMode::fixed;
  scheme.dt = dt;
  RolloutResult r = integrate_to(G, u0, t_end, scheme, F);
  if (r.truncated) return std::nullopt;
  return r.trajectory.back();
}

ExperimentReport::Row case_row(const std::string& label, double t_end, const std::vector<std::optional<GridFunction>>& preds,
                               const std::vector<GridFunction>& refs) {
  std::vector<Metric> ms;
  bool truncated = false;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i]) {
      ms.push_back(compare(*preds[i], refs[i]));
    } else {
      ms.push_back(Metric{});
      truncated = true;
    }
  }
  return mean_row(label, t_end, ms, truncated);
}

json describe_flux(const FluxOperator& G) {
  json j{{"flux", G.describe()}, {"p", G.p()}, {"q", G.q()}};
  if (G.is_learned()) j["model_hash"] = params_hash(G.params());
  return j;
}

}  // namespace

// ---- Report -----------------------------------------------------------------

const ExperimentReport::Row* ExperimentReport::find(const std::string& label, double time) const {
  for (const auto& r : rows) {
    if (r.label == label && std::abs(r.time - time) <= 1e-12 * std::max(1.0, std::abs(time))) return &r;
  }
  return nullptr;
}

const ExperimentReport::Row& ExperimentReport::at(const std::string& label) const {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw std::out_of_range("report has no row labelled '" + label + "'");
}

bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.title != b.title || a.metadata != b.metadata || a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto &x = a.rows[i], &y = b.rows[i];
    if (x.label != y.label || !same_number(x.time, y.time) || !same_number(x.rel_l2, y.rel_l2) ||
        !same_number(x.linf, y.linf) || x.count != y.count || !same_number(x.time_offset, y.time_offset) ||
        x.truncated != y.truncated) {
      return false;
    }
  }
  return true;
}

json to_json(const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"label", row.label},
                    {"time", row.time},
                    {"rel_l2", number_or_null(row.rel_l2)},
                    {"linf", number_or_null(row.linf)},
                    {"count", row.count},
                    {"time_offset", row.time_offset},
                    {"truncated", row.truncated}});
  }
  return json{{"title", r.title}, {"rows", rows}, {"metadata", r.metadata}};
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  try {
    r.title = j.at("title").get<std::string>();
    for (const auto& row : j.at("rows")) {
      ExperimentReport::Row x;
      x.label = row.at("label").get<std::string>();
      x.time = row.at("time").get<double>();
      x.rel_l2 = number_from(row.at("rel_l2"));
      x.linf = number_from(row.at("linf"));
      x.count = row.value("count", std::size_t{0});
      x.time_offset = row.value("time_offset", 0.0);
      x.truncated = row.value("truncated", false);
      r.rows.push_back(std::move(x));
    }
    r.metadata = j.value("metadata", json::object());
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid report: ") + e.what());
  }
  return r;
}

std::string to_text(const ExperimentReport& r) {
  std::string out;
  if (!r.title.empty()) out += r.title + "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %10s %14s %14s %6s\n", "case", "time", "rel_l2", "linf", "n");
  out += line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-16s %10.4f %14.6e %14.6e %6zu%s\n", row.label.c_str(), row.time,
                  row.rel_l2, row.linf, row.count, row.truncated ? "  (truncated)" : "");
    out += line;
  }
  return out;
}

void write_report(const std::filesystem::path& json_path, const ExperimentReport& r) {
  {
    std::ofstream os(json_path);
    if (!os) throw std::runtime_error("cannot write " + json_path.string());
    os << to_json(r).dump(2) << "\n";
  }
  std::filesystem::path text_path = json_path;
  text_path.replace_extension(".txt");
  std::ofstream os(text_path);
  if (!os) throw std::runtime_error("cannot write " + text_path.string());
  os << to_text(r);
}

std::string params_hash(const FnoParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : params.tensors()) {
    for (double v : t.data) h = fnv1a(h, v);
  }
  return hex(h);
}

std::string dataset_hash(const Dataset& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& traj : d.trajectories) {
    for (const auto& s : traj.states()) {
      for (double v : s.values()) h = fnv1a(h, v);
    }
  }
  return hex(h);
}

// ---- evaluate ---------------------------------------------------------------

ExperimentReport evaluate(const FluxOperator& G, const Dataset& test, const std::vector<double>& times,
                          const EvalOptions& options) {
  const double dt = options.dt > 0.0 ? options.dt : test.header.dt;
  if (!(dt > 0.0)) throw std::invalid_argument("evaluate: time step must be positive");
  if (times.empty()) throw std::invalid_argument("evaluate: no evaluation times given");
  if (test.trajectories.empty()) throw std::invalid_argument("evaluate: test set is empty");
  const std::size_t horizon = test.header.n_steps;

  // Rollout step counts use the evaluation dt; reference states use the dataset dt.
  std::vector<std::size_t> steps(times.size()), ref_index(times.size());
  std::vector<double> offsets(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) throw std::invalid_argument("evaluate: negative time");
    const double k = std::round(times[i] / dt);
    steps[i] = static_cast<std::size_t>(k);
    offsets[i] = k * dt - times[i];
    ref_index[i] = static_cast<std::size_t>(std::round(times[i] / test.header.dt));
    if (ref_index[i] > horizon) {
      throw std::invalid_argument("evaluate: time " + std::to_string(times[i]) + " is beyond the dataset horizon");
    }
  }
  const std::size_t last = *std::max_element(steps.begin(), steps.end());

  const std::size_t nf = test.trajectories.size();
  std::vector<std::vector<Metric>> per_time(times.size(), std::vector<Metric>(nf));
  std::vector<Metric> whole(nf);
  std::vector<char> truncated(nf, 0);
  parallel_for(nf, [&](std::size_t f) {
    const Trajectory& ref = test.trajectories[f];
    GridFunction u = ref.state(0);
    std::vector<std::optional<GridFunction>> snapshots(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (steps[i] == 0) snapshots[i] = u;
    }
    for (std::size_t n = 1; n <= last; ++n) {
      try {
        u = step(G, u, dt, options.integrator);
        if (u.max_abs() > kBlowUpThreshold) throw BlowUp("threshold");
      } catch (const BlowUp&) {
        truncated[f] = 1;
        break;
      }
      for (std::size_t i = 0; i < times.size(); ++i) {
        if (steps[i] == n) snapshots[i] = u;
      }
    }
    std::vector<double> pred_all, ref_all;
    bool complete = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!snapshots[i]) {
        complete = false;
        continue;
      }
      const GridFunction& r = ref.state(ref_index[i]);
      per_time[i][f] = compare(*snapshots[i], r);
      pred_all.insert(pred_all.end(), snapshots[i]->values().begin(), snapshots[i]->values().end());
      ref_all.insert(ref_all.end(), r.values().begin(), r.values().end());
    }
    if (complete) whole[f] = {rel_l2(pred_all, ref_all), linf(pred_all, ref_all)};
  });

  ExperimentReport report;
  report.title = "evaluation (" + to_string(test.header.equation) + ")";
  const bool any_truncated = std::any_of(truncated.begin(), truncated.end(), [](char c) { return c != 0; });
  for (std::size_t i = 0; i < times.size(); ++i) {
    bool trunc = false;
    for (const auto& m : per_time[i]) trunc = trunc || !std::isfinite(m.rel_l2);
    auto row = mean_row("t", times[i], per_time[i], trunc);
    row.time_offset = offsets[i];
    report.rows.push_back(row);
  }
  report.rows.push_back(mean_row("all", times.back(), whole, any_truncated));
  report.metadata = describe_flux(G);
  report.metadata["dataset_hash"] = dataset_hash(test);
  report.metadata["equation"] = to_string(test.header.equation);
  report.metadata["dt"] = dt;
  report.metadata["integrator"] = to_string(options.integrator);
  report.metadata["aggregate"] = "row 'all': metrics over the concatenation of all evaluated time slices";
  report.metadata["linf"] = "absolute";
  return report;
}

// ---- OOD --------------------------------------------------------------------

namespace {

OodOptions resolve(const OodOptions& o, Equation equation) {
  OodOptions r = o;
  const double dx = 1.0 / static_cast<double>(o.nx);
  if (r.dt <= 0.0) r.dt = equation == Equation::advection ? dx / std::abs(o.advection_speed) : 0.001;
  if (r.t_end <= 0.0) r.t_end = equation == Equation::advection ? 1.0 : 0.3;
  return r;
}

}  // namespace

ExperimentReport::Row ood_step_case(const FluxOperator& G, const OodOptions& options) {
  const OodOptions o = resolve(options, Equation::burgers);
  const GridFunction u0 = step_function(o.nx, 1.0, 0.0, 0.5);
  const GridFunction ref = exact_burgers_periodic_step(o.nx, 1.0, 0.0, 0.5, o.t_end);
  return case_row("step", o.t_end, {rollout_final(G, u0, o.t_end, o.dt, o.integrator, PhysicalFlux::burgers())},
                  {ref});
}

ExperimentReport ood_suite(const FluxOperator& G, Equation equation, const OodOptions& options) {
  const OodOptions o = resolve(options, equation);
  ExperimentReport report;
  report.title = "out-of-distribution (" + to_string(equation) + ")";
  const PhysicalFlux F =
      equation == Equation::advection ? PhysicalFlux::advection(o.advection_speed) : PhysicalFlux::burgers();

  if (equation == Equation::advection) {
    const GridFunction pulse = triangular_pulse(o.nx);
    report.rows.push_back(case_row("pulse", o.t_end, {rollout_final(G, pulse, o.t_end, o.dt, o.integrator, F)},
                                   {exact_advection(pulse, o.advection_speed, o.t_end)}));
  } else {
    report.rows.push_back(ood_step_case(G, o));
  }

  std::vector<std::optional<GridFunction>> preds(o.n_rough);
  std::vector<GridFunction> refs(o.n_rough);
  const std::size_t factor = equation == Equation::advection ? 1 : 4;
  GrfSampler sampler(o.nx * factor, o.rough_scale);
  parallel_for(o.n_rough, [&](std::size_t i) {
    Rng rng(o.seed, i);
    const GridFunction fine = sampler.sample(rng);
    const GridFunction u0 = restrict_injection(fine, factor);
    if (equation == Equation::advection) {
      refs[i] = exact_advection(u0, o.advection_speed, o.t_end);
    } else {
      refs[i] = restrict_injection(reference_advance(fine, F, o.t_end, 0.5), factor);
    }
    preds[i] = rollout_final(G, u0, o.t_end, o.dt, o.integrator, F);
  });
  report.rows.push_back(case_row("rough_grf", o.t_end, preds, refs));

  report.metadata = describe_flux(G);
  report.metadata["nx"] = o.nx;
  report.metadata["dt"] = o.dt;
  report.metadata["rough_scale"] = o.rough_scale;
  report.metadata["integrator"] = to_string(o.integrator);
  report.metadata["reference"] = equation == Equation::advection
                                     ? "exact translation"
                                     : "step: exact two-wave solution; rough_grf: 4x-resolution reference run";
  return report;
}

// ---- Resolution ---------------------------------------------------------------

ExperimentReport resolution_suite(const FluxOperator& G, Equation equation, const GrfSpec& grf,
                                  const ResolutionOptions& options) {
  if (options.resolutions.empty()) throw std::invalid_argument("resolution_suite: no resolutions");
  const std::size_t finest = *std::max_element(options.resolutions.begin(), options.resolutions.end());
  const std::size_t fine_n = equation == Equation::advection ? finest : 4 * finest;
  for (std::size_t n : options.resolutions) {
    if (fine_n % n != 0) throw std::invalid_argument("resolutions must divide the finest resolution");
  }
  const PhysicalFlux F =
      equation == Equation::advection ? PhysicalFlux::advection(options.advection_speed) : PhysicalFlux::burgers();

  GrfSampler sampler(fine_n, grf.scale);
  std::vector<GridFunction> fine(options.n_samples), fine_ref(options.n_samples);
  parallel_for(options.n_samples, [&](std::size_t i) {
    Rng rng(grf.seed, i);
    fine[i] = sampler.sample(rng);
    if (equation == Equation::burgers) fine_ref[i] = reference_advance(fine[i], F, options.t_end, 0.5);
  });

  ExperimentReport report;
  report.title = "resolution transfer (" + to_string(equation) + ")";
  for (std::size_t n : options.resolutions) {
    const std::size_t factor = fine_n / n;
    const double dt = options.dt_over_dx / static_cast<double>(n);
    std::vector<std::optional<GridFunction>> preds(options.n_samples);
    std::vector<GridFunction> refs(options.n_samples);
    parallel_for(options.n_samples, [&](std::size_t i) {
      const GridFunction u0 = restrict_injection(fine[i], factor);
      refs[i] = equation == Equation::advection ? exact_advection(u0, options.advection_speed, options.t_end)
                                                : restrict_injection(fine_ref[i], factor);
      preds[i] = rollout_final(G, u0, options.t_end, dt, options.integrator, F);
    });
    report.rows.push_back(case_row("nx=" + std::to_string(n), options.t_end, preds, refs));
  }
  report.metadata = describe_flux(G);
  report.metadata["grf_scale"] = grf.scale;
  report.metadata["seed"] = grf.seed;
  report.metadata["dt_over_dx"] = options.dt_over_dx;
  report.metadata["integrator"] = to_string(options.integrator);
  return report;
}

// ---- Ablation -----------------------------------------------------------------

AblationResult ablation_compare(const Dataset& data, const FnoConfig& fno_config, const TrainConfig& train_config,
                                const OodOptions& ood) {
  AblationResult result;
  OodOptions o = ood;
  o.nx = data.header.nx;
  if (o.dt <= 0.0) o.dt = data.header.dt;
  o.integrator = train_config.integrator;

  auto run = [&](double lambda, ExperimentReport& report, std::vector<EpochLoss>& history) {
    TrainConfig cfg = train_config;
    cfg.lambda = lambda;
    FnoParams params;
    try {
      TrainResult r = train(data, fno_config, cfg);
      params = std::move(r.params);
      history = std::move(r.history);
    } catch (const TrainingDiverged& e) {
      result.partial = true;
      history = e.history;
      params = e.last_good;
      report.metadata["aborted"] = e.what();
    }
    const FluxOperator G = FluxOperator::learned(std::move(params), cfg.p, cfg.q);
    report.title = "ablation, lambda = " + std::to_string(lambda);
    report.rows.push_back(ood_step_case(G, o));
    report.metadata["lambda"] = lambda;
    report.metadata["model_hash"] = params_hash(G.params());
    if (!history.empty()) {
      report.metadata["loss_consi_first"] = history.front().loss_consi;
      report.metadata["loss_consi_last"] = history.back().loss_consi;
    }
  };
  run(train_config.lambda, result.report_lambda, result.history_lambda);
  run(0.0, result.report_zero, result.history_zero);
  return result;
}

// ---- Bound ----------------------------------------------------------------------

void BoundInputs::validate() const {
  for (double v : {eps_tm, eps_consi, m, delta, gamma, h, C1, C2, C3, eps_h}) {
    if (!std::isfinite(v)) throw std::invalid_argument("bound inputs must be finite");
  }
  if (eps_tm < 0.0 || eps_consi < 0.0) throw std::invalid_argument("losses must be non-negative");
  if (!(m > 0.0)) throw std::invalid_argument("sample count m must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

double theorem1_bound(const BoundInputs& b) {
  b.validate();
  const double conf = 1.0 + std::sqrt(2.0 * std::log(4.0 / b.delta) / b.m);
  const double root_m = std::sqrt(b.m);
  const double first = b.C3 * b.gamma * b.eps_tm / root_m + b.eps_tm * b.eps_tm * conf;
  const double second =
      b.h * (b.C1 * b.gamma * b.eps_consi / root_m + b.eps_consi * b.eps_consi * conf + b.C2 * b.eps_h);
  return std::min(first, second);
}

}  // namespace fluxfno
