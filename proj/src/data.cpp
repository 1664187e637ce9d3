#include "fluxfno/data.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "fluxfno/parallel.hpp"

namespace fluxfno {

namespace {

constexpr std::string_view kDatasetMagic = "FFNO";

}  // namespace

GrfSampler::GrfSampler(std::size_t n, double scale) : n_(n) {
  if (n < 8) throw std::invalid_argument("GRF grid needs at least 8 cells, got " + std::to_string(n));
  if (!(scale > 0.0)) throw std::invalid_argument("GRF scale must be positive");
  const double dx = 1.0 / static_cast<double>(n);
  cos_.resize(n);
  sin_.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    cos_[m] = std::cos(th);
    sin_[m] = std::sin(th);
  }
  std::vector<double> row(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lag = static_cast<double>(std::min(j, n - j)) * dx / scale;
    row[j] = std::exp(-lag * lag);
  }
  // The covariance row is even, so its DFT is real.
  lambda_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * cos_[(j * k) % n];
    lambda_[k] = std::max(acc, 0.0);
  }
  const std::size_t half = n / 2;
  amp_.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    const bool self_conjugate = k == 0 || (n % 2 == 0 && k == half);
    amp_[k] = std::sqrt((self_conjugate ? 1.0 : 2.0) * lambda_[k] / static_cast<double>(n));
  }
}

GridFunction GrfSampler::sample(Rng& rng) const {
  const std::size_t n = n_;
  const std::size_t half = n / 2;
  std::vector<double> a(half + 1, 0.0), b(half + 1, 0.0);
  for (std::size_t k = 0; k <= half; ++k) {
    a[k] = amp_[k] * rng.normal();
    const bool self_conjugate = k == 0 || (n % 2 == 0 && k == half);
    if (!self_conjugate) b[k] = amp_[k] * rng.normal();
  }
  std::vector<double> u(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0.0;
    for (std::size_t k = 0; k <= half; ++k) {
      const std::size_t m = (j * k) % n;
      v += a[k] * cos_[m] - b[k] * sin_[m];
    }
    u[j] = v;
  }
  return GridFunction(std::move(u));
}

GridFunction grf_sample(const GrfSpec& spec) {
  GrfSampler sampler(spec.n, spec.scale);
  Rng rng(spec.seed);
  return sampler.sample(rng);
}

GridFunction triangular_pulse(std::size_t n) {
  if (n < 8) throw std::invalid_argument("triangular_pulse needs at least 8 cells");
  GridFunction u = GridFunction::zeros(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = u.x(j);
    u[j] = std::max(0.0, 1.0 - 4.0 * std::abs(x - 0.5));
  }
  return u;
}

GridFunction step_function(std::size_t n, double uL, double uR, double x0) {
  if (!(x0 > 0.0 && x0 < 1.0)) throw std::invalid_argument("step position must lie in (0, 1)");
  GridFunction u = GridFunction::zeros(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = u.x(j) < x0 ? uL : uR;
  return u;
}

void DatasetHeader::validate() const {
  if (version != 1) throw std::invalid_argument("unsupported dataset version " + std::to_string(version));
  if (nx < 8) throw std::invalid_argument("nx must be at least 8, got " + std::to_string(nx));
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (substeps == 0) throw std::invalid_argument("substeps must be at least 1");
  if (!(grf_scale > 0.0)) throw std::invalid_argument("grf_scale must be positive");
  if (initial != "grf" && initial != "pulse" && initial != "step") {
    throw std::invalid_argument("unknown initial condition '" + initial + "' (expected grf, pulse or step)");
  }
  if (!dts.empty() && dts.size() != n_steps) {
    throw std::invalid_argument("dts has " + std::to_string(dts.size()) + " entries, expected " +
                                std::to_string(n_steps));
  }
}

json to_json(const DatasetHeader& h) {
  json j = h.extra;
  j["version"] = h.version;
  j["equation"] = to_string(h.equation);
  j["n_funcs"] = h.n_funcs;
  j["n_steps"] = h.n_steps;
  j["nx"] = h.nx;
  j["dt"] = h.dt;
  j["generator"] = h.generator;
  j["seed"] = h.seed;
  j["grf_scale"] = h.grf_scale;
  j["initial"] = h.initial;
  j["substeps"] = h.substeps;
  j["advection_speed"] = h.advection_speed;
  if (!h.dts.empty()) j["dts"] = h.dts;
  return j;
}

DatasetHeader dataset_header_from_json(const json& j) {
  static const std::set<std::string> known = {"version", "equation", "n_funcs",   "n_steps",
                                              "nx",      "dt",       "generator", "seed",
                                              "grf_scale", "initial", "substeps", "advection_speed",
                                              "dts"};
  DatasetHeader h;
  try {
    h.version = j.at("version").get<int>();
    if (h.version != 1) throw FormatError("unsupported dataset version " + std::to_string(h.version));
    h.equation = parse_equation(j.at("equation").get<std::string>());
    h.n_funcs = j.at("n_funcs").get<std::size_t>();
    h.n_steps = j.at("n_steps").get<std::size_t>();
    h.nx = j.at("nx").get<std::size_t>();
    h.dt = j.at("dt").get<double>();
    h.generator = j.value("generator", std::string("exact"));
    h.seed = j.value("seed", std::uint64_t{0});
    h.grf_scale = j.value("grf_scale", 0.1);
    h.initial = j.value("initial", std::string("grf"));
    h.substeps = j.value("substeps", std::size_t{1});
    h.advection_speed = j.value("advection_speed", 1.0);
    if (j.contains("dts")) h.dts = j.at("dts").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid dataset header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid dataset header: ") + e.what());
  }
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) h.extra[key] = value;
  }
  return h;
}

GridFunction dataset_initial_condition(const DatasetHeader& spec, std::size_t index) {
  if (spec.initial == "pulse") return triangular_pulse(spec.nx);
  if (spec.initial == "step") {
    // Optional step geometry carried as extra header fields.
    return step_function(spec.nx, spec.extra.value("uL", 1.0), spec.extra.value("uR", 0.0),
                         spec.extra.value("x0", 0.5));
  }
  GrfSampler sampler(spec.nx, spec.grf_scale);
  Rng rng(spec.seed, index);
  return sampler.sample(rng);
}

namespace {

Trajectory generate_trajectory(const DatasetHeader& spec, const GridFunction& u0, std::size_t index) {
  Trajectory traj(u0);
  if (spec.equation == Equation::advection) {
    for (std::size_t n = 1; n <= spec.n_steps; ++n) {
      const double t = static_cast<double>(n) * spec.dt;
      traj.push(exact_advection(u0, spec.advection_speed, t), spec.dt);
    }
    return traj;
  }
  const PhysicalFlux F = spec.flux();
  const double h = spec.dt / static_cast<double>(spec.substeps);
  GridFunction u = u0;
  for (std::size_t n = 0; n < spec.n_steps; ++n) {
    for (std::size_t s = 0; s < spec.substeps; ++s) {
      try {
        u = reference_step(u, F, h);
      } catch (const CflViolation& e) {
        throw CflViolation("trajectory " + std::to_string(index) + ", step " + std::to_string(n) + ": " +
                           e.what());
      }
    }
    traj.push(u, spec.dt);
  }
  return traj;
}

}  // namespace

Dataset make_dataset(const DatasetHeader& spec_in) {
  DatasetHeader spec = spec_in;
  spec.validate();
  spec.generator = spec.equation == Equation::advection ? "exact" : "reference";
  spec.dts.clear();
  Dataset d;
  d.header = spec;
  d.trajectories.resize(spec.n_funcs);
  parallel_for(spec.n_funcs, [&](std::size_t i) {
    d.trajectories[i] = generate_trajectory(spec, dataset_initial_condition(spec, i), i);
  });
  return d;
}

DatasetHeader make_dataset(const DatasetHeader& spec, const std::filesystem::path& out_path) {
  Dataset d = make_dataset(spec);
  write_dataset(out_path, d);
  return d.header;
}

void write_dataset(const std::filesystem::path& path, const Dataset& d) {
  DatasetHeader h = d.header;
  h.n_funcs = d.trajectories.size();
  if (!d.trajectories.empty()) {
    h.n_steps = d.trajectories.front().n_steps();
    h.nx = d.trajectories.front().state(0).size();
  }
  bool uniform = true;
  for (const auto& traj : d.trajectories) {
    if (traj.n_steps() != h.n_steps) throw std::invalid_argument("all trajectories must have equal length");
    for (const auto& s : traj.states()) {
      if (s.size() != h.nx) throw std::invalid_argument("all states must have nx cells");
    }
    for (double dt : traj.dts()) uniform = uniform && dt == h.dt;
  }
  h.dts.clear();
  if (!uniform) {
    if (d.trajectories.size() != 1) {
      throw std::invalid_argument("non-uniform time steps are only stored for single-trajectory files");
    }
    h.dts = d.trajectories.front().dts();
  }

  std::vector<std::uint8_t> payload;
  payload.reserve(8 * h.n_funcs * (h.n_steps + 1) * h.nx);
  for (const auto& traj : d.trajectories) {
    for (const auto& s : traj.states()) append_f64_le(payload, s.values());
  }
  write_container(path, kDatasetMagic, to_json(h), payload);
}

Dataset read_dataset(const std::filesystem::path& path) {
  Container c = read_container(path, kDatasetMagic);
  Dataset d;
  d.header = dataset_header_from_json(c.header);
  const DatasetHeader& h = d.header;
  if (h.nx < 4) throw FormatError(path.string() + ": nx too small");
  const std::size_t count = h.n_funcs * (h.n_steps + 1) * h.nx;
  if (c.payload.size() != 8 * count) {
    throw FormatError(path.string() + ": payload length mismatch: expected " + std::to_string(8 * count) +
                      " bytes, got " + std::to_string(c.payload.size()) + " bytes");
  }
  if (!h.dts.empty() && h.dts.size() != h.n_steps) throw FormatError(path.string() + ": dts length mismatch");
  const std::vector<double> values = read_f64_le(c.payload, 0, count);
  const double dx = 1.0 / static_cast<double>(h.nx);
  d.trajectories.reserve(h.n_funcs);
  std::size_t offset = 0;
  for (std::size_t f = 0; f < h.n_funcs; ++f) {
    std::vector<GridFunction> states;
    states.reserve(h.n_steps + 1);
    for (std::size_t n = 0; n <= h.n_steps; ++n, offset += h.nx) {
      states.emplace_back(std::vector<double>(values.begin() + offset, values.begin() + offset + h.nx), dx);
    }
    std::vector<double> dts = h.dts.empty() ? std::vector<double>(h.n_steps, h.dt) : h.dts;
    d.trajectories.emplace_back(std::move(states), std::move(dts));
  }
  return d;
}

GridFunction restrict_injection(const GridFunction& fine, std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0) {
    throw std::invalid_argument("restriction factor must divide the fine grid size");
  }
  std::vector<double> out(fine.size() / factor);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = fine[j * factor];
  return GridFunction(std::move(out), fine.dx() * static_cast<double>(factor));
}

}  // namespace fluxfno
