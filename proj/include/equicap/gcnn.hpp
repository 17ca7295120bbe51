#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "equicap/representation.hpp"
#include "equicap/separability.hpp"

namespace equicap {

// W x L x C tensor, stored with the channel index fastest.
class FeatureMap {
 public:
  FeatureMap(int width, int length, int channels);
  FeatureMap(int width, int length, int channels, std::vector<double> data);

  int width() const noexcept { return width_; }
  int length() const noexcept { return length_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int i, int j, int c) { return data_[index(i, j, c)]; }
  double operator()(int i, int j, int c) const { return data_[index(i, j, c)]; }

  const std::vector<double>& data() const noexcept { return data_; }
  Vector flatten() const;
  bool all_finite() const;

 private:
  std::size_t index(int i, int j, int c) const {
    return (static_cast<std::size_t>(i) * length_ + j) * channels_ + c;
  }
  int width_, length_, channels_;
  std::vector<double> data_;
};

// I.i.d. standard normal entries.
FeatureMap gaussian_feature_map(int width, int length, int channels, std::uint64_t seed);

// out(i, j, c) = in((i - s) mod W, (j - t) mod L, c).
FeatureMap shift(const FeatureMap& x, int s, int t);

FeatureMap relu(const FeatureMap& x);

enum class Boundary { kPeriodic, kZeroPad };
enum class Nonlinearity { kRelu, kIdentity };

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_width = 0;
  int kernel_length = 0;
  // weights[((n * kernel_width + a) * kernel_length + b) * in_channels + m]
  std::vector<double> weights;
  Boundary boundary = Boundary::kPeriodic;
  int padding = 0;
  Nonlinearity nonlinearity = Nonlinearity::kRelu;

  double weight(int n, int a, int b, int m) const {
    return weights[((static_cast<std::size_t>(n) * kernel_width + a) * kernel_length + b) * in_channels + m];
  }
};

// Normal weights with standard deviation 1/sqrt(fan-in); zero bias.
ConvLayer random_conv_layer(int in_channels, int out_channels, int kernel_width, int kernel_length,
                            std::uint64_t seed, Nonlinearity nonlinearity = Nonlinearity::kRelu,
                            Boundary boundary = Boundary::kPeriodic, int padding = 0);

// Cross-correlation. Periodic: W x L output, indices wrap. Zero-pad(p):
// (W + 2p - kw + 1) x (L + 2p - kl + 1) output over the padded input.
FeatureMap periodic_conv(const FeatureMap& input, const ConvLayer& layer);

// First `n` output channels of a layer.
ConvLayer leading_channels(const ConvLayer& layer, int n);

FeatureMap avg_pool(const FeatureMap& x, int k);
FeatureMap max_pool(const FeatureMap& x, int k);

enum class PoolKind { kAvg, kMax };
Vector global_pool(const FeatureMap& x, PoolKind kind);

// Conv over a (m1 m2) x (m1 m2) signal, per-channel averaging of entries
// spaced m1 apart (m1 x m1 block) and m2 apart (m2 x m2 block), then a final
// relu. The conv stage nonlinearity is `conv.nonlinearity`.
struct DirectSumLayer {
  ConvLayer conv;
  int m1 = 0;
  int m2 = 0;
};

DirectSumLayer make_direct_sum_layer(ConvLayer conv, int m1, int m2, bool allow_non_coprime = false);

// Output of length (m1^2 + m2^2) * N, channel-major; within a channel the
// m1 block (row-major) precedes the m2 block.
Vector direct_sum_forward(const FeatureMap& input, const DirectSumLayer& layer);

// Action of the shift (s, t) on one channel of the direct-sum output.
Vector direct_sum_shift(const Vector& out, int m1, int m2, int channels, int s, int t);

// The per-channel output representation of Z_{m1 m2} x Z_{m1 m2}, built
// densely: keep m1 m2 small.
Representation direct_sum_output_representation(int m1, int m2);

// N0 per channel of the output representation, by counting orbits of the
// shift action on block cells (Burnside).
int direct_sum_fixed_dim(int m1, int m2);

// --- Equivariance checks ----------------------------------------------------

struct ShiftAction {
  int s = 0;
  int t = 0;
};

struct EquivarianceReport {
  double max_residual = 0.0;
  double tol = 0.0;
  int checks = 0;
  ShiftAction worst;
  bool pass() const { return max_residual < tol; }
};

using LayerFn = std::function<Vector(const FeatureMap&)>;
using OutputAction = std::function<Vector(const Vector&, ShiftAction)>;

// max over group elements and `trials` Gaussian inputs of
// ||layer(g x) - g layer(x)||_inf.
EquivarianceReport verify_equivariance(const LayerFn& layer, const std::vector<ShiftAction>& elements,
                                       const OutputAction& output_action, int width, int length,
                                       int channels, int trials, double tol, std::uint64_t seed);

// All shifts of a W x L grid, optionally restricted to multiples of `step`.
std::vector<ShiftAction> all_shifts(int width, int length, int step = 1);

// Output action for feature-map-valued layers whose output grid is the input
// grid divided by `factor` (1 for convs, k for pooling).
OutputAction feature_map_shift_action(int width, int length, int channels, int factor = 1);

// --- Capacity sweeps --------------------------------------------------------

enum class Arch { kConv, kConvMaxPool, kConvAvgPool, kDirectSum };

struct ArchSpec {
  Arch arch = Arch::kConv;
  int m1 = 0;
  int m2 = 0;
  std::string str() const;
};

// "conv", "conv-maxpool", "conv-avgpool" or "dsum:m1,m2".
ArchSpec parse_arch(const std::string& spec);

struct SweepConfig {
  ArchSpec arch;
  int p = 40;
  std::vector<int> channels = {10, 15, 20, 25, 30, 40, 60};
  int trials = 100;
  std::uint64_t seed = 0;
  int input_seeds = 5;
  int width = 10;
  int length = 10;
  int in_channels = 3;
  int filter = 10;
  int pool = 2;
  bool allow_non_coprime = false;
  // Conv stage nonlinearity of the direct-sum layer.
  Nonlinearity dsum_conv = Nonlinearity::kIdentity;
  EstimateOptions estimate;
};

struct SweepPoint {
  int channels = 0;
  int n0 = 0;
  double alpha = 0.0;
  long separable = 0;
  long trials = 0;
  double fraction = 0.0;
  WilsonInterval ci;
  ExactFraction theory;
};

// Per anchor, the points that decide separability of its full orbit: the
// per-channel means (conv, avg pool), the per-channel means of the k^2
// pooled maps of coset-representative shifts (max pool), or the per-channel
// block means (direct sum). Rows are channels, or 2 per channel for dsum.
std::vector<Matrix> reduced_orbit_points(const SweepConfig& config, const ConvLayer& conv,
                                         const std::vector<FeatureMap>& inputs);

// Every orbit point of every anchor, flattened (small sizes only).
std::vector<Matrix> raw_orbit_points(const SweepConfig& config, const ConvLayer& conv,
                                     const std::vector<FeatureMap>& inputs);

// Counts pooled over `input_seeds` independent filter and input draws.
std::vector<SweepPoint> gcnn_sweep(const SweepConfig& config);

}  // namespace equicap
