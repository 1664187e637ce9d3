// fluxfno: dataset generation, training, inference, evaluation and plotting.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluxfno/data.hpp"
#include "fluxfno/eval.hpp"
#include "fluxfno/fno.hpp"
#include "fluxfno/parallel.hpp"
#include "fluxfno/rollout.hpp"
#include "fluxfno/train.hpp"

using namespace fluxfno;

namespace {

/// Bad flags or configuration; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open config " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

// Experiment configs carry sections {data, model, train, eval}; a bare
// document is read as the section itself.
json section(const json& doc, const std::string& name, const std::set<std::string>& section_names) {
  bool sectioned = false;
  for (const auto& s : section_names) sectioned = sectioned || doc.contains(s);
  if (!sectioned) return doc;
  check_keys(doc, {"data", "model", "train", "eval"}, "experiment config");
  return doc.value(name, json::object());
}

const std::set<std::string> kSections = {"data", "model", "train", "eval"};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::string fmt(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---- gen-data ----------------------------------------------------------------

struct GenArgs {
  std::string config;
  std::string equation = "advection";
  std::size_t n_funcs = 100;
  std::size_t nx = 256;
  double dt = 1.0 / 256.0;
  double t_end = 1.0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  double grf_scale = 0.1;
  std::string initial = "grf";
  std::size_t substeps = 1;
  double speed = 1.0;
  std::string out;
};

DatasetHeader resolve_gen(const GenArgs& a, const CLI::App& cmd) {
  DatasetHeader h;
  std::optional<double> t_end;
  std::optional<std::size_t> n_steps;
  try {
    h.equation = parse_equation(a.equation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  h.n_funcs = a.n_funcs;
  h.nx = a.nx;
  h.dt = a.dt;
  h.seed = a.seed;
  h.grf_scale = a.grf_scale;
  h.initial = a.initial;
  h.substeps = a.substeps;
  h.advection_speed = a.speed;
  if (cmd.count("--t-end")) t_end = a.t_end;
  if (cmd.count("--n-steps")) n_steps = a.n_steps;

  if (!a.config.empty()) {
    const json d = section(read_json_file(a.config), "data", kSections);
    check_keys(d, {"equation", "n_funcs", "nx", "dt", "t_end", "n_steps", "seed", "grf_scale", "initial",
                   "substeps", "advection_speed"},
               "data config");
    try {
      // Flags given explicitly on the command line take precedence.
      if (d.contains("equation") && !cmd.count("--equation")) h.equation = parse_equation(d["equation"]);
      if (d.contains("n_funcs") && !cmd.count("--n-funcs")) h.n_funcs = d["n_funcs"];
      if (d.contains("nx") && !cmd.count("--nx")) h.nx = d["nx"];
      if (d.contains("dt") && !cmd.count("--dt")) h.dt = d["dt"];
      if (d.contains("seed") && !cmd.count("--seed")) h.seed = d["seed"];
      if (d.contains("grf_scale") && !cmd.count("--grf-scale")) h.grf_scale = d["grf_scale"];
      if (d.contains("initial") && !cmd.count("--initial")) h.initial = d["initial"];
      if (d.contains("substeps") && !cmd.count("--substeps")) h.substeps = d["substeps"];
      if (d.contains("advection_speed") && !cmd.count("--speed")) h.advection_speed = d["advection_speed"];
      if (d.contains("t_end") && !t_end && !n_steps) t_end = d["t_end"].get<double>();
      if (d.contains("n_steps") && !t_end && !n_steps) n_steps = d["n_steps"].get<std::size_t>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("invalid data config: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (!(h.dt > 0.0)) throw UsageError("--dt must be positive");
  if (n_steps) {
    h.n_steps = *n_steps;
  } else {
    const double T = t_end.value_or(a.t_end);
    if (T < 0.0) throw UsageError("--t-end must be non-negative");
    const double k = std::round(T / h.dt);
    if (std::abs(k * h.dt - T) > 1e-9 * std::max(1.0, T)) {
      throw UsageError("--t-end " + fmt(T) + " is not a whole number of steps of --dt " + fmt(h.dt));
    }
    h.n_steps = static_cast<std::size_t>(k);
  }
  if (h.n_funcs == 0) throw UsageError("--n-funcs must be positive");
  try {
    h.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return h;
}

int cmd_gen_data(const GenArgs& a, const CLI::App& cmd) {
  const DatasetHeader spec = resolve_gen(a, cmd);
  const DatasetHeader h = make_dataset(spec, a.out);
  json sidecar = to_json(h);
  sidecar["out"] = a.out;
  write_text(a.out + ".json", sidecar.dump(2) + "\n");
  std::cerr << "wrote " << a.out << ": " << h.n_funcs << " trajectories x " << (h.n_steps + 1) << " states x "
            << h.nx << " cells\n";
  return 0;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string config;
  std::string out;
  std::string loss_csv;
  std::optional<std::size_t> epochs;
  std::optional<double> lambda;
  std::optional<std::string> integrator;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> width;
  std::optional<std::size_t> depth;
  std::optional<std::size_t> kmax;
  std::optional<std::size_t> batch_size;
  std::size_t log_every = 10;
};

std::string loss_csv_text(const std::vector<EpochLoss>& history) {
  std::ostringstream os;
  os << "epoch,lr,loss_tm,loss_consi,total\n";
  for (const auto& e : history) {
    os << e.epoch << "," << fmt(e.lr, 17) << "," << fmt(e.loss_tm, 17) << "," << fmt(e.loss_consi, 17) << ","
       << fmt(e.total, 17) << "\n";
  }
  return os.str();
}

json model_metadata(const TrainConfig& tc, const Dataset& data, const std::vector<EpochLoss>& history) {
  json meta;
  meta["train"] = to_json(tc);
  meta["data"] = {{"equation", to_string(data.header.equation)},
                  {"dt", data.header.dt},
                  {"nx", data.header.nx},
                  {"n_funcs", data.header.n_funcs},
                  {"n_steps", data.header.n_steps},
                  {"advection_speed", data.header.advection_speed},
                  {"dataset_hash", dataset_hash(data)}};
  meta["epochs_completed"] = history.size();
  if (!history.empty()) {
    meta["final_loss"] = {{"loss_tm", history.back().loss_tm},
                          {"loss_consi", history.back().loss_consi},
                          {"total", history.back().total}};
  }
  return meta;
}

int cmd_train(const TrainArgs& a) {
  FnoConfig fc;
  fc.width = 64;
  TrainConfig tc;
  if (!a.config.empty()) {
    const json doc = read_json_file(a.config);
    try {
      const bool sectioned = doc.contains("train") || doc.contains("model");
      if (sectioned) {
        check_keys(doc, kSections, "experiment config");
        if (doc.contains("model")) fc = fno_config_from_json(doc["model"]);
        if (doc.contains("train")) tc = train_config_from_json(doc["train"]);
      } else {
        tc = train_config_from_json(doc);
      }
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    } catch (const json::exception& e) {
      throw UsageError(std::string("invalid config: ") + e.what());
    }
  }
  if (a.epochs) tc.epochs = *a.epochs;
  if (a.lambda) tc.lambda = *a.lambda;
  if (a.seed) tc.seed = *a.seed;
  if (a.batch_size) tc.batch_size = *a.batch_size;
  if (a.width) fc.width = *a.width;
  if (a.depth) fc.depth = *a.depth;
  if (a.kmax) fc.kmax = *a.kmax;
  try {
    if (a.integrator) tc.integrator = parse_integrator(*a.integrator);
    fc.in_channels = static_cast<std::size_t>(tc.p + tc.q + 1);
    tc.validate();
    fc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const Dataset data = read_dataset(a.data);
  for (const auto& traj : data.trajectories) {
    const std::size_t len = tc.batch_size == 0 ? traj.n_steps() : tc.batch_size;
    if (len == 0 || traj.n_steps() % len != 0) {
      throw UsageError("batch_size " + std::to_string(len) + " does not divide n_steps " +
                       std::to_string(traj.n_steps()));
    }
  }
  if (data.header.nx < 2 * fc.kmax + 2) throw UsageError("grid too small for kmax");

  const std::string csv = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
  auto log = [&](const EpochLoss& e) {
    if (a.log_every > 0 && (e.epoch % a.log_every == 0 || e.epoch + 1 == tc.epochs)) {
      std::cerr << "epoch " << e.epoch << "  lr " << fmt(e.lr, 4) << "  loss_tm " << fmt(e.loss_tm, 6)
                << "  loss_consi " << fmt(e.loss_consi, 6) << "  total " << fmt(e.total, 6) << "\n";
    }
  };
  try {
    TrainResult r = train(data, fc, tc, log);
    save_model(a.out, r.params, model_metadata(tc, data, r.history));
    write_text(csv, loss_csv_text(r.history));
    std::cerr << "wrote " << a.out << " and " << csv << "\n";
    return 0;
  } catch (const TrainingDiverged& e) {
    json meta = model_metadata(tc, data, e.history);
    meta["aborted"] = e.what();
    save_model(a.out, e.last_good, meta);
    write_text(csv, loss_csv_text(e.history));
    std::cerr << "training diverged: " << e.what() << "; last finite checkpoint kept in " << a.out << "\n";
    return 1;
  }
}

// ---- flux selection shared by infer/eval ---------------------------------------

struct FluxArgs {
  std::string model;
  std::string analytic;
  std::string equation;  // for analytic fluxes without a dataset
  double speed = 1.0;
};

struct ResolvedFlux {
  FluxOperator G;
  std::optional<FnoModelFile> file;
  PhysicalFlux F;
  double train_dt = 0.0;
  std::size_t train_nx = 0;
};

ResolvedFlux resolve_flux(const FluxArgs& a, std::optional<PhysicalFlux> data_flux, double lf_dt) {
  if (a.model.empty() == a.analytic.empty()) throw UsageError("give exactly one of --model or --analytic");
  std::optional<PhysicalFlux> F = data_flux;
  if (!a.equation.empty()) {
    try {
      const Equation e = parse_equation(a.equation);
      F = e == Equation::advection ? PhysicalFlux::advection(a.speed) : PhysicalFlux::burgers();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (!a.model.empty()) {
    FnoModelFile file = load_model(a.model);
    const json& meta = file.metadata;
    int p = 0, q = 1;
    if (meta.contains("train")) {
      p = meta["train"].value("p", 0);
      q = meta["train"].value("q", 1);
    }
    double train_dt = 0.0;
    std::size_t train_nx = 0;
    if (meta.contains("data")) {
      const json& d = meta["data"];
      train_dt = d.value("dt", 0.0);
      train_nx = d.value("nx", std::size_t{0});
      if (!F) {
        F = parse_equation(d.value("equation", std::string("burgers"))) == Equation::advection
                ? PhysicalFlux::advection(d.value("advection_speed", 1.0))
                : PhysicalFlux::burgers();
      }
    }
    if (!F) throw UsageError("cannot tell the equation; pass --equation");
    FluxOperator G = FluxOperator::learned(file.params, p, q);
    return {std::move(G), std::move(file), *F, train_dt, train_nx};
  }
  if (!F) throw UsageError("--analytic needs --equation or a dataset");
  AnalyticFlux kind;
  try {
    kind = parse_analytic_flux(a.analytic);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (kind == AnalyticFlux::lax_friedrichs && !(lf_dt > 0.0)) {
    throw UsageError("--analytic lax needs a time step (--dt)");
  }
  return {FluxOperator::analytic(kind, *F, 0, 1, lf_dt), std::nullopt, *F, 0.0, 0};
}

// ---- infer -------------------------------------------------------------------

struct InferArgs {
  FluxArgs flux;
  std::string init = "grf";
  std::string init_file;
  std::size_t index = 0;
  std::size_t nx = 0;
  double t_end = 1.0;
  std::string scheme = "euler";
  std::string dt_mode = "fixed";
  double dt = 0.0;
  double courant = 0.5;
  std::uint64_t seed = 0;
  double grf_scale = 0.1;
  std::string out;
};

int cmd_infer(const InferArgs& a) {
  std::optional<Dataset> init_data;
  if (a.init == "file") {
    if (a.init_file.empty()) throw UsageError("--init file needs --init-file");
    init_data = read_dataset(a.init_file);
    if (a.index >= init_data->trajectories.size()) throw UsageError("--index out of range");
  }
  ResolvedFlux rf = resolve_flux(a.flux, init_data ? std::optional(init_data->header.flux()) : std::nullopt, a.dt);

  SchemeConfig scheme;
  scheme.p = rf.G.p();
  scheme.q = rf.G.q();
  scheme.courant = a.courant;
  try {
    scheme.integrator = parse_integrator(a.scheme);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.dt_mode != "fixed" && a.dt_mode != "cfl") throw UsageError("--dt-mode must be fixed or cfl");
  scheme.dt_mode = a.dt_mode == "fixed" ? DtMode::fixed : DtMode::cfl;

  GridFunction u0;
  if (init_data) {
    u0 = init_data->trajectories[a.index].state(0);
  } else {
    std::size_t nx = a.nx ? a.nx : (rf.train_nx ? rf.train_nx : 256);
    if (nx < 8) throw UsageError("--nx must be at least 8");
    if (a.init == "grf") {
      u0 = grf_sample({nx, a.grf_scale, a.seed});
    } else if (a.init == "step") {
      u0 = step_function(nx);
    } else if (a.init == "pulse") {
      u0 = triangular_pulse(nx);
    } else {
      throw UsageError("--init must be file, grf, step or pulse");
    }
  }
  double dt = a.dt;
  if (dt <= 0.0 && rf.train_dt > 0.0) {
    // Keep the training ratio dt/dx when running at another resolution.
    dt = rf.train_dt * static_cast<double>(rf.train_nx) / static_cast<double>(u0.size());
  }
  if (dt <= 0.0 && init_data) dt = init_data->header.dt;
  if (scheme.dt_mode == DtMode::fixed) {
    if (!(dt > 0.0)) throw UsageError("fixed time stepping needs --dt");
    scheme.dt = dt;
  }
  if (a.t_end < 0.0) throw UsageError("--t-end must be non-negative");

  const RolloutResult r = integrate_to(rf.G, u0, a.t_end, scheme, rf.F);
  Dataset out;
  out.header.equation = rf.F.kind;
  out.header.advection_speed = rf.F.speed;
  out.header.nx = u0.size();
  out.header.dt = scheme.dt_mode == DtMode::fixed ? scheme.dt : (r.trajectory.n_steps() ? r.trajectory.dts()[0] : 0.0);
  if (!(out.header.dt > 0.0)) out.header.dt = scheme.dt > 0.0 ? scheme.dt : 1.0;
  out.header.generator = "rollout";
  out.header.seed = a.seed;
  out.header.grf_scale = a.grf_scale;
  out.header.initial = a.init == "file" ? "grf" : a.init;
  out.header.extra["truncated"] = r.truncated;
  out.header.extra["flux"] = rf.G.describe();
  out.header.extra["integrator"] = to_string(scheme.integrator);
  out.header.extra["t_end"] = a.t_end;
  if (rf.file) out.header.extra["model_hash"] = params_hash(rf.file->params);
  out.trajectories.push_back(r.trajectory);
  write_dataset(a.out, out);
  if (r.truncated) {
    std::cerr << "rollout stopped: " << r.message << "; partial trajectory written to " << a.out << "\n";
    return 1;
  }
  std::cerr << "wrote " << a.out << " (" << r.trajectory.n_steps() << " steps)\n";
  return 0;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
  FluxArgs flux;
  std::string data;
  std::string config;
  std::vector<double> times;
  std::string scheme = "euler";
  std::string suite = "test";
  std::string out;
  std::uint64_t seed = 7;
  std::size_t n_samples = 1;
};

int cmd_eval(const EvalArgs& a) {
  Integrator integrator;
  try {
    integrator = parse_integrator(a.scheme);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<double> times = a.times;
  std::string suite = a.suite;
  if (!a.config.empty()) {
    const json e = section(read_json_file(a.config), "eval", kSections);
    check_keys(e, {"times", "suites", "scheme"}, "eval config");
    try {
      if (times.empty() && e.contains("times")) times = e["times"].get<std::vector<double>>();
      if (e.contains("suites") && !e["suites"].empty()) suite = e["suites"][0].get<std::string>();
      if (e.contains("scheme")) integrator = parse_integrator(e["scheme"].get<std::string>());
    } catch (const std::exception& ex) {
      throw UsageError(std::string("invalid eval config: ") + ex.what());
    }
  }

  ExperimentReport report;
  if (suite == "test") {
    if (a.data.empty()) throw UsageError("eval --suite test needs --data");
    if (times.empty()) throw UsageError("eval needs --times");
    const Dataset test = read_dataset(a.data);
    const ResolvedFlux rf = resolve_flux(a.flux, test.header.flux(), test.header.dt);
    report = evaluate(rf.G, test, times, {integrator, 0.0});
  } else if (suite == "ood" || suite == "resolution") {
    const ResolvedFlux rf = resolve_flux(a.flux, std::nullopt, 0.0);
    const Equation eq = rf.F.kind;
    if (suite == "ood") {
      OodOptions o;
      if (rf.train_nx) o.nx = rf.train_nx;
      if (rf.train_dt > 0.0) o.dt = rf.train_dt;
      if (!times.empty()) o.t_end = times.back();
      o.integrator = integrator;
      o.seed = a.seed;
      o.n_rough = a.n_samples;
      o.advection_speed = rf.F.speed;
      report = ood_suite(rf.G, eq, o);
    } else {
      ResolutionOptions o;
      if (rf.train_dt > 0.0 && rf.train_nx) o.dt_over_dx = rf.train_dt * static_cast<double>(rf.train_nx);
      o.t_end = times.empty() ? (eq == Equation::advection ? 1.0 : 0.3) : times.back();
      o.integrator = integrator;
      o.n_samples = a.n_samples;
      o.advection_speed = rf.F.speed;
      report = resolution_suite(rf.G, eq, {256, 0.1, a.seed}, o);
    }
  } else {
    throw UsageError("--suite must be test, ood or resolution");
  }
  std::cout << to_text(report);
  if (!a.out.empty()) write_report(a.out, report);
  return 0;
}

// ---- capacity ----------------------------------------------------------------

int cmd_capacity(const std::string& model, double p, const std::string& q_text) {
  double q;
  if (q_text == "inf") {
    q = std::numeric_limits<double>::infinity();
  } else {
    try {
      q = std::stod(q_text);
    } catch (const std::exception&) {
      throw UsageError("--q must be a number or inf");
    }
  }
  if (!(p >= 1.0 && p <= 2.0)) throw UsageError("--p must lie in [1, 2]");
  if (!(q >= 1.0)) throw UsageError("--q must be at least 1");
  const FnoParams params = load_params(model);
  std::cout << fmt(capacity_gamma(params, p, q), 12) << "\n";
  return 0;
}

// ---- plot --------------------------------------------------------------------

struct PlotArgs {
  std::string traj;
  std::string ref;
  std::size_t ref_index = 0;
  std::vector<double> times;
  std::string out;
  std::string svg;
};

// Reference state at step k of a predicted trajectory when no reference file is given.
GridFunction auto_reference(const DatasetHeader& h, const Trajectory& pred, double t) {
  const GridFunction& u0 = pred.state(0);
  if (h.equation == Equation::advection) return exact_advection(u0, h.advection_speed, t);
  if (h.initial == "step") return exact_burgers_periodic_step(u0.size(), 1.0, 0.0, 0.5, t);
  if (t == 0.0) return u0;
  return reference_advance(u0, PhysicalFlux::burgers(), t, 0.5);
}

std::string svg_chart(const std::vector<double>& times, const std::vector<GridFunction>& preds,
                      const std::vector<GridFunction>& refs) {
  const double W = 640, H = 360, L = 50, R = 20, T = 20, B = 40;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto* set : {&preds, &refs}) {
    for (const auto& g : *set) {
      for (double v : g.values()) {
        if (first) lo = hi = v, first = false;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](double x) { return L + x * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - lo) / (hi - lo) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  char buf[128];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L,
                H - B, W - R, H - B);
  os << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L, T,
                L, H - B);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">%.3g</text>\n", 4.0, py(hi) + 4, hi);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">%.3g</text>\n", 4.0, py(lo) + 4, lo);
  os << buf;
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 8 << "\" font-size=\"12\">x</text>\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    const char* color = colors[i % 6];
    for (int kind = 0; kind < 2; ++kind) {
      const GridFunction& g = kind == 0 ? preds[i] : refs[i];
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
         << (kind == 1 ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
      for (std::size_t j = 0; j < g.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", j ? " " : "", px(g.x(j)), py(g[j]));
        os << buf;
      }
      os << "\"/>\n";
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" fill=\"%s\">t=%.4g</text>\n",
                  W - R - 70, T + 14.0 * static_cast<double>(i + 1), color, times[i]);
    os << buf;
  }
  os << "<text x=\"" << L + 4 << "\" y=\"" << T + 12
     << "\" font-size=\"11\">solid: prediction, dashed: reference</text>\n";
  os << "</svg>\n";
  return os.str();
}

int cmd_plot(const PlotArgs& a) {
  if (a.times.empty()) throw UsageError("plot needs --times");
  const Dataset pred = read_dataset(a.traj);
  if (pred.trajectories.empty()) throw UsageError("trajectory file is empty");
  const Trajectory& tp = pred.trajectories.front();
  std::optional<Dataset> ref;
  if (!a.ref.empty()) {
    ref = read_dataset(a.ref);
    if (a.ref_index >= ref->trajectories.size()) throw UsageError("--ref-index out of range");
  }
  // Time of every stored state of the prediction.
  std::vector<double> t_of(tp.n_steps() + 1, 0.0);
  for (std::size_t n = 0; n < tp.n_steps(); ++n) t_of[n + 1] = t_of[n] + tp.dts()[n];

  std::vector<GridFunction> preds, refs;
  std::ostringstream csv;
  csv << "time,x,u_pred,u_ref\n";
  for (double t : a.times) {
    std::size_t k = 0;
    for (std::size_t n = 0; n < t_of.size(); ++n) {
      if (std::abs(t_of[n] - t) < std::abs(t_of[k] - t)) k = n;
    }
    if (std::abs(t_of[k] - t) > 1e-9 * std::max(1.0, t) + 0.5 * (tp.n_steps() ? tp.dts()[0] : 0.0)) {
      throw UsageError("time " + fmt(t) + " is outside the trajectory");
    }
    const GridFunction& up = tp.state(k);
    GridFunction ur;
    if (ref) {
      const Trajectory& tr = ref->trajectories[a.ref_index];
      const auto kr = static_cast<std::size_t>(std::llround(t / ref->header.dt));
      if (kr > tr.n_steps()) throw UsageError("time " + fmt(t) + " is outside the reference");
      ur = tr.state(kr);
      if (ur.size() != up.size()) throw UsageError("reference and trajectory grids differ");
    } else {
      ur = auto_reference(pred.header, tp, t_of[k]);
    }
    for (std::size_t j = 0; j < up.size(); ++j) {
      csv << fmt(t_of[k], 12) << "," << fmt(up.x(j), 12) << "," << fmt(up[j], 17) << "," << fmt(ur[j], 17) << "\n";
    }
    preds.push_back(up);
    refs.push_back(ur);
  }
  write_text(a.out, csv.str());
  if (!a.svg.empty()) write_text(a.svg, svg_chart(a.times, preds, refs));
  std::cerr << "wrote " << a.out << (a.svg.empty() ? "" : " and " + a.svg) << "\n";
  return 0;
}

void add_flux_options(CLI::App* cmd, FluxArgs& f) {
  cmd->add_option("--model", f.model, "Trained model file");
  cmd->add_option("--analytic", f.analytic, "Classical flux instead of a model: upwind, lax or godunov");
  cmd->add_option("--equation", f.equation, "advection or burgers (analytic fluxes without a dataset)");
  cmd->add_option("--speed", f.speed, "Advection speed for --equation advection");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative finite-volume solver with a learned FNO numerical flux"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a trajectory dataset");
  gen_cmd->add_option("--config", gen.config, "JSON config (data section)");
  gen_cmd->add_option("--equation", gen.equation, "advection or burgers")->capture_default_str();
  gen_cmd->add_option("--n-funcs", gen.n_funcs, "Number of trajectories")->capture_default_str();
  gen_cmd->add_option("--nx", gen.nx, "Grid cells")->capture_default_str();
  gen_cmd->add_option("--dt", gen.dt, "Stored time step")->capture_default_str();
  gen_cmd->add_option("--t-end", gen.t_end, "Final time (whole number of steps)")->capture_default_str();
  gen_cmd->add_option("--n-steps", gen.n_steps, "Number of steps (instead of --t-end)");
  gen_cmd->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  gen_cmd->add_option("--grf-scale", gen.grf_scale, "GRF covariance length")->capture_default_str();
  gen_cmd->add_option("--initial", gen.initial, "grf, pulse or step")->capture_default_str();
  gen_cmd->add_option("--substeps", gen.substeps, "Reference sub-steps per stored Burgers step")
      ->capture_default_str();
  gen_cmd->add_option("--speed", gen.speed, "Advection speed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output dataset file")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a flux model");
  train_cmd->add_option("--data", tr.data, "Training dataset")->required();
  train_cmd->add_option("--config", tr.config, "JSON config (train section, or model + train)");
  train_cmd->add_option("--out", tr.out, "Output model file")->required();
  train_cmd->add_option("--loss-csv", tr.loss_csv, "Per-epoch loss CSV (default <out>.loss.csv)");
  train_cmd->add_option("--epochs", tr.epochs, "Override epochs");
  train_cmd->add_option("--lambda", tr.lambda, "Override consistency weight");
  train_cmd->add_option("--integrator", tr.integrator, "euler or rk2");
  train_cmd->add_option("--seed", tr.seed, "Override seed");
  train_cmd->add_option("--width", tr.width, "Override model width");
  train_cmd->add_option("--depth", tr.depth, "Override Fourier layer count");
  train_cmd->add_option("--kmax", tr.kmax, "Override retained modes");
  train_cmd->add_option("--batch-size", tr.batch_size, "Override batch size");
  train_cmd->add_option("--log-every", tr.log_every, "Print every N epochs (0 = quiet)")->capture_default_str();

  InferArgs inf;
  auto* infer_cmd = app.add_subcommand("infer", "Roll a flux model forward in time");
  add_flux_options(infer_cmd, inf.flux);
  infer_cmd->add_option("--init", inf.init, "file, grf, step or pulse")->capture_default_str();
  infer_cmd->add_option("--init-file", inf.init_file, "Dataset holding the initial state");
  infer_cmd->add_option("--index", inf.index, "Trajectory index in --init-file")->capture_default_str();
  infer_cmd->add_option("--nx", inf.nx, "Grid cells (default: training grid)");
  infer_cmd->add_option("--t-end", inf.t_end, "Final time")->capture_default_str();
  infer_cmd->add_option("--scheme", inf.scheme, "euler or rk2")->capture_default_str();
  infer_cmd->add_option("--dt-mode", inf.dt_mode, "fixed or cfl")->capture_default_str();
  infer_cmd->add_option("--dt", inf.dt, "Time step (default: training dt scaled to the grid)");
  infer_cmd->add_option("--courant", inf.courant, "Courant number in cfl mode")->capture_default_str();
  infer_cmd->add_option("--seed", inf.seed, "Seed for --init grf")->capture_default_str();
  infer_cmd->add_option("--grf-scale", inf.grf_scale, "GRF covariance length")->capture_default_str();
  infer_cmd->add_option("--out", inf.out, "Output trajectory file")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a flux model");
  add_flux_options(eval_cmd, ev.flux);
  eval_cmd->add_option("--data", ev.data, "Test dataset");
  eval_cmd->add_option("--config", ev.config, "JSON config (eval section)");
  eval_cmd->add_option("--times", ev.times, "Evaluation times")->delimiter(',');
  eval_cmd->add_option("--scheme", ev.scheme, "euler or rk2")->capture_default_str();
  eval_cmd->add_option("--suite", ev.suite, "test, ood or resolution")->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed, "Seed for sampled initial conditions")->capture_default_str();
  eval_cmd->add_option("--n-samples", ev.n_samples, "Sampled initial conditions per case")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Report JSON (a .txt table is written alongside)");

  std::string cap_model, cap_q = "2";
  double cap_p = 2.0;
  auto* cap_cmd = app.add_subcommand("capacity", "Print the weight-norm capacity of a model");
  cap_cmd->add_option("--model", cap_model, "Model file")->required();
  cap_cmd->add_option("--p", cap_p, "Inner norm exponent in [1, 2]")->capture_default_str();
  cap_cmd->add_option("--q", cap_q, "Outer norm exponent (>= 1 or inf)")->capture_default_str();

  PlotArgs pl;
  auto* plot_cmd = app.add_subcommand("plot", "Export snapshots as CSV and SVG");
  plot_cmd->add_option("--traj", pl.traj, "Trajectory file from infer")->required();
  plot_cmd->add_option("--ref", pl.ref, "Reference dataset (default: computed reference)");
  plot_cmd->add_option("--ref-index", pl.ref_index, "Trajectory index in --ref")->capture_default_str();
  plot_cmd->add_option("--times", pl.times, "Snapshot times")->delimiter(',')->required();
  plot_cmd->add_option("--out", pl.out, "Output CSV")->required();
  plot_cmd->add_option("--svg", pl.svg, "Optional SVG chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  thread_limit() = threads;

  try {
    if (*gen_cmd) return cmd_gen_data(gen, *gen_cmd);
    if (*train_cmd) return cmd_train(tr);
    if (*infer_cmd) return cmd_infer(inf);
    if (*eval_cmd) return cmd_eval(ev);
    if (*cap_cmd) return cmd_capacity(cap_model, cap_p, cap_q);
    if (*plot_cmd) return cmd_plot(pl);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
