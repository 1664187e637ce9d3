#include "fluxfno/fno.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fluxfno/rng.hpp"

namespace fluxfno {

namespace {

constexpr int kModelVersion = 1;

ParamTensor make_tensor(std::string name, std::vector<std::size_t> shape, bool is_complex) {
  ParamTensor t{std::move(name), std::move(shape), is_complex, {}};
  t.data.assign(t.elements() * (is_complex ? 2 : 1), 0.0);
  return t;
}

void add_bias(BatchedField& f, std::span<const double> bias) {
  for (std::size_t r = 0; r < f.rows(); ++r) {
    double* row = f.values.data() + r * f.channels;
    for (std::size_t c = 0; c < f.channels; ++c) row[c] += bias[c];
  }
}

void accumulate_bias_grad(const BatchedField& g, std::span<double> grad_bias) {
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const double* row = g.values.data() + r * g.channels;
    for (std::size_t c = 0; c < g.channels; ++c) grad_bias[c] += row[c];
  }
}

std::size_t get_size(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw std::invalid_argument(std::string("model config: '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

void FnoConfig::validate() const {
  if (in_channels == 0 || out_channels == 0 || width == 0 || depth == 0) {
    throw std::invalid_argument("FNO config: channel counts, width and depth must be positive");
  }
  if (conv_kernel == 0 || conv_kernel % 2 == 0) {
    throw std::invalid_argument("FNO config: conv_kernel must be odd, got " + std::to_string(conv_kernel));
  }
}

json to_json(const FnoConfig& c) {
  return json{{"in_channels", c.in_channels}, {"out_channels", c.out_channels},
              {"width", c.width},             {"depth", c.depth},
              {"kmax", c.kmax},               {"conv_kernel", c.conv_kernel},
              {"lift_layers", 1},             {"proj_layers", 2},
              {"proj_hidden", c.hidden()}};
}

FnoConfig fno_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("model config must be a JSON object");
  static const std::vector<std::string> known = {"in_channels", "out_channels", "width",
                                                 "depth",       "kmax",         "conv_kernel",
                                                 "lift_layers", "proj_layers",  "proj_hidden"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("model config: unknown key '" + key + "'");
    }
  }
  FnoConfig c;
  c.in_channels = get_size(j, "in_channels", c.in_channels);
  c.out_channels = get_size(j, "out_channels", c.out_channels);
  c.width = get_size(j, "width", c.width);
  c.depth = get_size(j, "depth", c.depth);
  c.kmax = get_size(j, "kmax", c.kmax);
  c.conv_kernel = get_size(j, "conv_kernel", c.conv_kernel);
  c.proj_hidden = get_size(j, "proj_hidden", 0);
  if (get_size(j, "lift_layers", 1) != 1) throw std::invalid_argument("model config: lift_layers must be 1");
  if (get_size(j, "proj_layers", 2) != 2) throw std::invalid_argument("model config: proj_layers must be 2");
  c.validate();
  return c;
}

std::size_t ParamTensor::elements() const {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

FnoParams::FnoParams(const FnoConfig& config) : config_(config) {
  config_.validate();
  config_.proj_hidden = config_.hidden();
  const auto w = config_.width;
  tensors_.push_back(make_tensor("lift.weight", {config_.in_channels, w}, false));
  tensors_.push_back(make_tensor("lift.bias", {w}, false));
  for (std::size_t l = 0; l < config_.depth; ++l) {
    const std::string prefix = "layers." + std::to_string(l) + ".";
    tensors_.push_back(make_tensor(prefix + "spectral", {config_.modes(), w, w}, true));
    tensors_.push_back(make_tensor(prefix + "conv.weight", {config_.conv_kernel, w, w}, false));
    tensors_.push_back(make_tensor(prefix + "conv.bias", {w}, false));
  }
  tensors_.push_back(make_tensor("proj1.weight", {w, config_.hidden()}, false));
  tensors_.push_back(make_tensor("proj1.bias", {config_.hidden()}, false));
  tensors_.push_back(make_tensor("proj2.weight", {config_.hidden(), config_.out_channels}, false));
  tensors_.push_back(make_tensor("proj2.bias", {config_.out_channels}, false));
}

std::size_t FnoParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.data.size();
  return n;
}

void FnoParams::set_zero() {
  for (auto& t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

bool FnoParams::is_finite() const {
  for (const auto& t : tensors_)
    for (double v : t.data)
      if (!std::isfinite(v)) return false;
  return true;
}

FnoParams init_params(const FnoConfig& config, std::uint64_t seed) {
  FnoParams params(config);
  Rng rng(seed);
  auto fill_uniform = [&](ParamTensor& t, std::size_t fan_in) {
    const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-a, a);
  };
  const auto w = config.width;
  fill_uniform(params.tensor(0), config.in_channels);
  for (std::size_t l = 0; l < config.depth; ++l) {
    const double scale = 1.0 / static_cast<double>(w * w);
    for (double& v : params.tensor(2 + 3 * l).data) v = scale * rng.uniform();
    fill_uniform(params.tensor(3 + 3 * l), config.conv_kernel * w);
  }
  fill_uniform(params.tensor(2 + 3 * config.depth), w);
  fill_uniform(params.tensor(4 + 3 * config.depth), config.hidden());
  return params;
}

BatchedField forward(const FnoParams& params, const BatchedField& input, FnoTrace* trace) {
  const FnoConfig& cfg = params.config();
  if (input.channels != cfg.in_channels) {
    throw std::invalid_argument("FNO forward: expected " + std::to_string(cfg.in_channels) +
                                " input channels, got " + std::to_string(input.channels));
  }
  if (input.n < 2 * cfg.kmax + 2) {
    throw std::invalid_argument("FNO forward: grid of " + std::to_string(input.n) +
                                " cells is too small for kmax=" + std::to_string(cfg.kmax));
  }
  const auto w = cfg.width;
  BatchedField h = affine_pointwise(params.lift_weight().data, params.lift_bias().data,
                                    cfg.in_channels, w, input);
  if (trace) {
    trace->input = input;
    trace->layer_inputs.clear();
    trace->spectra.clear();
    trace->pre_activations.clear();
  }
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    SpectralCoeffs coeffs = rdft_trunc(h, cfg.kmax);
    BatchedField z = irdft(spectral_apply(params.spectral(l).as_complex(), w, w, coeffs), input.n);
    const BatchedField local = conv1(params.conv_weight(l).data, cfg.conv_kernel, w, w, h);
    for (std::size_t i = 0; i < z.values.size(); ++i) z.values[i] += local.values[i];
    add_bias(z, params.conv_bias(l).data);
    BatchedField next = gelu(z);
    if (trace) {
      trace->layer_inputs.push_back(std::move(h));
      trace->spectra.push_back(std::move(coeffs));
      trace->pre_activations.push_back(std::move(z));
    }
    h = std::move(next);
  }
  BatchedField pre = affine_pointwise(params.proj1_weight().data, params.proj1_bias().data, w,
                                      cfg.hidden(), h);
  BatchedField hidden = gelu(pre);
  BatchedField out = affine_pointwise(params.proj2_weight().data, params.proj2_bias().data,
                                      cfg.hidden(), cfg.out_channels, hidden);
  if (trace) {
    trace->layer_inputs.push_back(std::move(h));
    trace->proj_pre = std::move(pre);
    trace->proj_hidden = std::move(hidden);
  }
  return out;
}

BatchedField backward(const FnoParams& params, const FnoTrace& trace, const BatchedField& grad_out,
                      FnoParams& grads) {
  const FnoConfig& cfg = params.config();
  const auto w = cfg.width;
  const std::size_t d = cfg.depth;
  auto& g = grads.tensors();

  BatchedField d_hidden(trace.proj_hidden.batch, trace.proj_hidden.n, cfg.hidden());
  affine_pointwise_backward(params.proj2_weight().data, cfg.hidden(), cfg.out_channels,
                            trace.proj_hidden, grad_out, g[4 + 3 * d].data, g[5 + 3 * d].data,
                            &d_hidden);
  const BatchedField d_pre = gelu_backward(trace.proj_pre, trace.proj_hidden, d_hidden);
  const BatchedField& h_last = trace.layer_inputs[d];
  BatchedField dh(h_last.batch, h_last.n, w);
  affine_pointwise_backward(params.proj1_weight().data, w, cfg.hidden(), h_last, d_pre,
                            g[2 + 3 * d].data, g[3 + 3 * d].data, &dh);

  for (std::size_t l = d; l-- > 0;) {
    const BatchedField dz = gelu_backward(trace.pre_activations[l], trace.layer_inputs[l + 1], dh);
    accumulate_bias_grad(dz, g[4 + 3 * l].data);
    const BatchedField& h_in = trace.layer_inputs[l];
    BatchedField dh_prev(h_in.batch, h_in.n, w);
    conv1_backward(params.conv_weight(l).data, cfg.conv_kernel, w, w, h_in, dz, g[3 + 3 * l].data,
                   &dh_prev);
    const SpectralCoeffs ds = irdft_backward(dz, cfg.modes());
    const SpectralCoeffs dc = spectral_apply_backward(params.spectral(l).as_complex(), w, w,
                                                      trace.spectra[l], ds, g[2 + 3 * l].as_complex());
    rdft_trunc_backward(dc, dh_prev);
    dh = std::move(dh_prev);
  }

  BatchedField d_input(trace.input.batch, trace.input.n, cfg.in_channels);
  affine_pointwise_backward(params.lift_weight().data, cfg.in_channels, w, trace.input, dh, g[0].data,
                            g[1].data, &d_input);
  return d_input;
}

double mixed_norm(std::span<const double> magnitudes, std::size_t inner, std::size_t outer, double p,
                  double q) {
  double total = 0.0;
  for (std::size_t o = 0; o < outer; ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < inner; ++i) s += std::pow(std::abs(magnitudes[i * outer + o]), p);
    const double col = std::pow(s, 1.0 / p);
    if (std::isinf(q)) {
      total = std::max(total, col);
    } else {
      total += std::pow(col, q);
    }
  }
  return std::isinf(q) ? total : std::pow(total, 1.0 / q);
}

double capacity_gamma(const FnoParams& params, double p, double q) {
  if (!(p >= 1.0 && p <= 2.0) || !(q >= 1.0)) {
    throw std::invalid_argument("capacity_gamma: need 1 <= p <= 2 and q >= 1");
  }
  // 1/p* with p* = p/(p-1); p = 1 gives p* = inf.
  const double inv_pstar = (p - 1.0) / p;
  const FnoConfig& cfg = params.config();
  auto norm2d = [&](const ParamTensor& t) {
    const std::size_t outer = t.shape.back();
    return mixed_norm(t.data, t.data.size() / outer, outer, p, q);
  };
  const double lift = norm2d(params.lift_weight());
  const double proj = norm2d(params.proj1_weight()) * norm2d(params.proj2_weight());
  double gamma = lift * proj;
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    const double k_norm = norm2d(params.conv_weight(l));
    const auto r = params.spectral(l).as_complex();
    std::vector<double> mags(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) mags[i] = std::abs(r[i]);
    const double r_norm = mixed_norm(mags, mags.size() / cfg.width, cfg.width, p, q);
    const double kernel_factor = std::pow(static_cast<double>(cfg.conv_kernel), inv_pstar);
    const double mode_factor = std::pow(static_cast<double>(cfg.modes()), inv_pstar);
    gamma *= k_norm * kernel_factor + mode_factor * r_norm;
  }
  return gamma;
}

void save_model(const std::filesystem::path& path, const FnoParams& params, const json& metadata) {
  json manifest = json::array();
  std::vector<std::uint8_t> payload;
  for (const auto& t : params.tensors()) {
    manifest.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", t.is_complex ? "c128" : "f64"}});
    append_f64_le(payload, t.data);
  }
  json header = {{"version", kModelVersion},
                 {"config", to_json(params.config())},
                 {"tensors", manifest},
                 {"metadata", metadata}};
  write_container(path, "FFNM", header, payload);
}

FnoModelFile load_model(const std::filesystem::path& path) {
  const Container c = read_container(path, "FFNM");
  const json& h = c.header;
  FnoModelFile out;
  try {
    if (h.at("version").get<int>() != kModelVersion) {
      throw FormatError(path.string() + ": unsupported model version " + h.at("version").dump());
    }
    out.params = FnoParams(fno_config_from_json(h.at("config")));
    if (h.contains("metadata")) out.metadata = h.at("metadata");
    const json& manifest = h.at("tensors");
    auto& tensors = out.params.tensors();
    if (!manifest.is_array() || manifest.size() != tensors.size()) {
      throw FormatError(path.string() + ": tensor manifest does not match the configured architecture");
    }
    std::size_t offset = 0;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const json& m = manifest[i];
      auto& t = tensors[i];
      const auto shape = m.at("shape").get<std::vector<std::size_t>>();
      const bool cplx = m.at("dtype").get<std::string>() == "c128";
      if (m.at("name").get<std::string>() != t.name || shape != t.shape || cplx != t.is_complex) {
        throw FormatError(path.string() + ": tensor '" + m.at("name").get<std::string>() +
                          "' has unexpected name, shape or dtype");
      }
      const std::size_t count = t.data.size();
      if (offset + 8 * count > c.payload.size()) {
        throw FormatError(path.string() + ": payload truncated at tensor '" + t.name + "' (need " +
                          std::to_string(offset + 8 * count) + " bytes, have " +
                          std::to_string(c.payload.size()) + ")");
      }
      t.data = read_f64_le(c.payload, offset, count);
      offset += 8 * count;
    }
    if (offset != c.payload.size()) {
      throw FormatError(path.string() + ": payload has " + std::to_string(c.payload.size() - offset) +
                        " trailing bytes");
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed model header: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace fluxfno
