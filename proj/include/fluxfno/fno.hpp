#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fluxfno/container.hpp"
#include "fluxfno/diffkernel.hpp"

namespace fluxfno {

/// Architecture of the FNO-with-CNN flux model. The lift is one affine layer and
/// the projection is affine -> GELU -> affine.
struct FnoConfig {
  std::size_t in_channels = 2;
  std::size_t out_channels = 1;
  std::size_t width = 64;
  std::size_t depth = 1;
  std::size_t kmax = 5;
  std::size_t conv_kernel = 1;
  std::size_t proj_hidden = 0;  // 0 selects `width`

  std::size_t modes() const { return kmax + 1; }
  std::size_t hidden() const { return proj_hidden == 0 ? width : proj_hidden; }
  void validate() const;

  friend bool operator==(const FnoConfig&, const FnoConfig&) = default;
};

json to_json(const FnoConfig& c);
/// Rejects unknown keys.
FnoConfig fno_config_from_json(const json& j);

struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  bool is_complex = false;
  std::vector<double> data;  // complex entries stored as (re, im) pairs

  std::size_t elements() const;  // product of shape
  std::span<const complex> as_complex() const {
    return {reinterpret_cast<const complex*>(data.data()), data.size() / 2};
  }
  std::span<complex> as_complex() { return {reinterpret_cast<complex*>(data.data()), data.size() / 2}; }

  friend bool operator==(const ParamTensor&, const ParamTensor&) = default;
};

/// All trainable tensors. Order: lift.weight, lift.bias, then per Fourier layer
/// (spectral, conv.weight, conv.bias), then proj1.weight, proj1.bias,
/// proj2.weight, proj2.bias.
class FnoParams {
 public:
  FnoParams() = default;
  explicit FnoParams(const FnoConfig& config);  // all zeros

  const FnoConfig& config() const { return config_; }
  std::vector<ParamTensor>& tensors() { return tensors_; }
  const std::vector<ParamTensor>& tensors() const { return tensors_; }

  std::size_t scalar_count() const;
  void set_zero();
  bool is_finite() const;

  const ParamTensor& lift_weight() const { return tensors_[0]; }
  const ParamTensor& lift_bias() const { return tensors_[1]; }
  const ParamTensor& spectral(std::size_t layer) const { return tensors_[2 + 3 * layer]; }
  const ParamTensor& conv_weight(std::size_t layer) const { return tensors_[3 + 3 * layer]; }
  const ParamTensor& conv_bias(std::size_t layer) const { return tensors_[4 + 3 * layer]; }
  const ParamTensor& proj1_weight() const { return tensors_[2 + 3 * config_.depth]; }
  const ParamTensor& proj1_bias() const { return tensors_[3 + 3 * config_.depth]; }
  const ParamTensor& proj2_weight() const { return tensors_[4 + 3 * config_.depth]; }
  const ParamTensor& proj2_bias() const { return tensors_[5 + 3 * config_.depth]; }

  ParamTensor& tensor(std::size_t i) { return tensors_[i]; }

  friend bool operator==(const FnoParams&, const FnoParams&) = default;

 private:
  FnoConfig config_;
  std::vector<ParamTensor> tensors_;
};

/// Uniform(-a, a) weights with a = sqrt(1/fan_in), spectral weights
/// (re and im) drawn from Uniform(0, 1) / (width * width), zero biases.
FnoParams init_params(const FnoConfig& config, std::uint64_t seed);

/// Intermediate values kept by forward() for the reverse pass.
struct FnoTrace {
  BatchedField input;
  std::vector<BatchedField> layer_inputs;  // depth + 1 entries; last is the projection input
  std::vector<SpectralCoeffs> spectra;     // rdft of each layer input
  std::vector<BatchedField> pre_activations;
  BatchedField proj_pre;  // proj1 output before GELU
  BatchedField proj_hidden;
};

BatchedField forward(const FnoParams& params, const BatchedField& input, FnoTrace* trace = nullptr);

/// Accumulates parameter gradients into `grads` (same layout as params) and
/// returns the cotangent of the input.
BatchedField backward(const FnoParams& params, const FnoTrace& trace, const BatchedField& grad_out,
                      FnoParams& grads);

/// Mixed (p, q) weight-norm capacity: ||P|| ||Q|| prod_l (||K_l|| c^(1/p*) + M^(1/p*) ||R_l||),
/// with M = kmax + 1 retained modes and ||Q|| = ||proj1|| ||proj2||.
double capacity_gamma(const FnoParams& params, double p, double q);

/// || M ||_{p over `inner` leading axes grouped, q over the rest}.
double mixed_norm(std::span<const double> magnitudes, std::size_t inner, std::size_t outer, double p,
                  double q);

struct FnoModelFile {
  FnoParams params;
  json metadata = json::object();
};

void save_model(const std::filesystem::path& path, const FnoParams& params,
                const json& metadata = json::object());
FnoModelFile load_model(const std::filesystem::path& path);
inline FnoParams load_params(const std::filesystem::path& path) { return load_model(path).params; }

}  // namespace fluxfno
