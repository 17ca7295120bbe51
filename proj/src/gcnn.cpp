#include "equicap/gcnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "equicap/error.hpp"
#include "equicap/random.hpp"

namespace equicap {

namespace {

int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

void require_positive(int w, int l, int c) {
  if (w < 1 || l < 1 || c < 1) {
    std::ostringstream os;
    os << "feature map dimensions must be positive, got " << w << "x" << l << "x" << c;
    throw Error(ErrorCode::kShapeMismatch, os.str());
  }
}

void require_divisible(const FeatureMap& x, int k) {
  if (k < 1 || x.width() % k != 0 || x.length() % k != 0) {
    std::ostringstream os;
    os << "pool window " << k << " does not divide " << x.width() << "x" << x.length();
    throw Error(ErrorCode::kShapeMismatch, os.str());
  }
}

}  // namespace

FeatureMap::FeatureMap(int width, int length, int channels)
    : width_(width), length_(length), channels_(channels) {
  require_positive(width, length, channels);
  data_.assign(static_cast<std::size_t>(width) * length * channels, 0.0);
}

FeatureMap::FeatureMap(int width, int length, int channels, std::vector<double> data)
    : width_(width), length_(length), channels_(channels), data_(std::move(data)) {
  require_positive(width, length, channels);
  if (data_.size() != static_cast<std::size_t>(width) * length * channels) {
    throw Error(ErrorCode::kShapeMismatch, "data size does not match feature map shape");
  }
  if (!all_finite()) throw Error(ErrorCode::kInvalidArgument, "feature map contains NaN or Inf");
}

Vector FeatureMap::flatten() const {
  return Eigen::Map<const Vector>(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

bool FeatureMap::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

FeatureMap gaussian_feature_map(int width, int length, int channels, std::uint64_t seed) {
  FeatureMap x(width, length, channels);
  Rng rng(seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < width; ++i)
    for (int j = 0; j < length; ++j)
      for (int c = 0; c < channels; ++c) x(i, j, c) = normal(rng);
  return x;
}

FeatureMap shift(const FeatureMap& x, int s, int t) {
  FeatureMap out(x.width(), x.length(), x.channels());
  for (int i = 0; i < x.width(); ++i)
    for (int j = 0; j < x.length(); ++j)
      for (int c = 0; c < x.channels(); ++c) out(i, j, c) = x(wrap(i - s, x.width()), wrap(j - t, x.length()), c);
  return out;
}

FeatureMap relu(const FeatureMap& x) {
  std::vector<double> d = x.data();
  for (double& v : d) v = std::max(v, 0.0);
  return FeatureMap(x.width(), x.length(), x.channels(), std::move(d));
}

ConvLayer random_conv_layer(int in_channels, int out_channels, int kernel_width, int kernel_length,
                            std::uint64_t seed, Nonlinearity nonlinearity, Boundary boundary, int padding) {
  if (in_channels < 1 || out_channels < 1 || kernel_width < 1 || kernel_length < 1) {
    throw Error(ErrorCode::kShapeMismatch, "conv layer dimensions must be positive");
  }
  if (padding < 0) throw Error(ErrorCode::kInvalidArgument, "padding must be non-negative");
  ConvLayer layer;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.kernel_width = kernel_width;
  layer.kernel_length = kernel_length;
  layer.boundary = boundary;
  layer.padding = padding;
  layer.nonlinearity = nonlinearity;
  const double stddev = 1.0 / std::sqrt(static_cast<double>(kernel_width) * kernel_length * in_channels);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  layer.weights.resize(static_cast<std::size_t>(out_channels) * kernel_width * kernel_length * in_channels);
  for (double& w : layer.weights) w = normal(rng);
  return layer;
}

ConvLayer leading_channels(const ConvLayer& layer, int n) {
  if (n < 1 || n > layer.out_channels) throw Error(ErrorCode::kInvalidArgument, "channel slice out of range");
  ConvLayer out = layer;
  out.out_channels = n;
  out.weights.resize(static_cast<std::size_t>(n) * layer.kernel_width * layer.kernel_length * layer.in_channels);
  return out;
}

FeatureMap periodic_conv(const FeatureMap& input, const ConvLayer& layer) {
  if (input.channels() != layer.in_channels) {
    std::ostringstream os;
    os << "conv expects " << layer.in_channels << " input channels, got " << input.channels();
    throw Error(ErrorCode::kShapeMismatch, os.str());
  }
  const int w = input.width();
  const int l = input.length();
  const int m = layer.in_channels;
  const bool periodic = layer.boundary == Boundary::kPeriodic;
  const int p = periodic ? 0 : layer.padding;
  const int ow = periodic ? w : w + 2 * p - layer.kernel_width + 1;
  const int ol = periodic ? l : l + 2 * p - layer.kernel_length + 1;
  if (ow < 1 || ol < 1) throw Error(ErrorCode::kShapeMismatch, "kernel larger than padded input");

  FeatureMap out(ow, ol, layer.out_channels);
  for (int n = 0; n < layer.out_channels; ++n) {
    for (int i = 0; i < ow; ++i) {
      for (int j = 0; j < ol; ++j) {
        double acc = 0.0;
        for (int a = 0; a < layer.kernel_width; ++a) {
          int ii = i + a - p;
          if (periodic) {
            ii = wrap(ii, w);
          } else if (ii < 0 || ii >= w) {
            continue;
          }
          for (int b = 0; b < layer.kernel_length; ++b) {
            int jj = j + b - p;
            if (periodic) {
              jj = wrap(jj, l);
            } else if (jj < 0 || jj >= l) {
              continue;
            }
            for (int c = 0; c < m; ++c) acc += layer.weight(n, a, b, c) * input(ii, jj, c);
          }
        }
        out(i, j, n) = layer.nonlinearity == Nonlinearity::kRelu ? std::max(acc, 0.0) : acc;
      }
    }
  }
  return out;
}

FeatureMap avg_pool(const FeatureMap& x, int k) {
  require_divisible(x, k);
  FeatureMap out(x.width() / k, x.length() / k, x.channels());
  const double scale = 1.0 / (k * k);
  for (int i = 0; i < out.width(); ++i)
    for (int j = 0; j < out.length(); ++j)
      for (int c = 0; c < x.channels(); ++c) {
        double acc = 0.0;
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) acc += x(i * k + a, j * k + b, c);
        out(i, j, c) = acc * scale;
      }
  return out;
}

FeatureMap max_pool(const FeatureMap& x, int k) {
  require_divisible(x, k);
  FeatureMap out(x.width() / k, x.length() / k, x.channels());
  for (int i = 0; i < out.width(); ++i)
    for (int j = 0; j < out.length(); ++j)
      for (int c = 0; c < x.channels(); ++c) {
        double best = x(i * k, j * k, c);
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) best = std::max(best, x(i * k + a, j * k + b, c));
        out(i, j, c) = best;
      }
  return out;
}

Vector global_pool(const FeatureMap& x, PoolKind kind) {
  Vector out(x.channels());
  for (int c = 0; c < x.channels(); ++c) {
    double acc = kind == PoolKind::kAvg ? 0.0 : x(0, 0, c);
    for (int i = 0; i < x.width(); ++i)
      for (int j = 0; j < x.length(); ++j) acc = kind == PoolKind::kAvg ? acc + x(i, j, c) : std::max(acc, x(i, j, c));
    out(c) = kind == PoolKind::kAvg ? acc / (static_cast<double>(x.width()) * x.length()) : acc;
  }
  return out;
}

// --- Direct-sum layer -------------------------------------------------------

DirectSumLayer make_direct_sum_layer(ConvLayer conv, int m1, int m2, bool allow_non_coprime) {
  if (m1 < 1 || m2 < 1) throw Error(ErrorCode::kInvalidArgument, "direct-sum moduli must be positive");
  if (!allow_non_coprime && std::gcd(m1, m2) != 1) {
    std::ostringstream os;
    os << "direct-sum moduli " << m1 << " and " << m2 << " are not coprime";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  if (conv.boundary != Boundary::kPeriodic) {
    throw Error(ErrorCode::kInvalidArgument, "direct-sum layer needs a periodic conv");
  }
  return DirectSumLayer{std::move(conv), m1, m2};
}

Vector direct_sum_forward(const FeatureMap& input, const DirectSumLayer& layer) {
  const int size = layer.m1 * layer.m2;
  if (input.width() != size || input.length() != size) {
    std::ostringstream os;
    os << "direct-sum layer expects a " << size << "x" << size << " input, got " << input.width() << "x"
       << input.length();
    throw Error(ErrorCode::kShapeMismatch, os.str());
  }
  const FeatureMap a = periodic_conv(input, layer.conv);
  const int n_ch = layer.conv.out_channels;
  const int per = layer.m1 * layer.m1 + layer.m2 * layer.m2;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(per) * n_ch);
  for (int n = 0; n < n_ch; ++n) {
    const Eigen::Index base = static_cast<Eigen::Index>(n) * per;
    Eigen::Index offset = base;
    for (int m : {layer.m1, layer.m2}) {
      const double scale = 1.0 / (static_cast<double>(size / m) * (size / m));
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) out(offset + (i % m) * m + (j % m)) += a(i, j, n) * scale;
      offset += static_cast<Eigen::Index>(m) * m;
    }
  }
  return out.cwiseMax(0.0);
}

Vector direct_sum_shift(const Vector& out, int m1, int m2, int channels, int s, int t) {
  const int per = m1 * m1 + m2 * m2;
  if (out.size() != static_cast<Eigen::Index>(per) * channels) {
    throw Error(ErrorCode::kShapeMismatch, "direct-sum output has the wrong length");
  }
  Vector shifted(out.size());
  for (int n = 0; n < channels; ++n) {
    Eigen::Index offset = static_cast<Eigen::Index>(n) * per;
    for (int m : {m1, m2}) {
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) shifted(offset + a * m + b) = out(offset + wrap(a - s, m) * m + wrap(b - t, m));
      offset += static_cast<Eigen::Index>(m) * m;
    }
  }
  return shifted;
}

Representation direct_sum_output_representation(int m1, int m2) {
  const int size = m1 * m2;
  auto g = std::make_shared<const FiniteGroup>(direct_product(cyclic_group(size), cyclic_group(size)));
  const int dim = m1 * m1 + m2 * m2;
  std::vector<Matrix> mats;
  mats.reserve(g->order());
  for (int s = 0; s < size; ++s) {
    for (int t = 0; t < size; ++t) {
      Matrix p = Matrix::Zero(dim, dim);
      for (int j = 0; j < dim; ++j) {
        Vector e = Vector::Zero(dim);
        e(j) = 1.0;
        p.col(j) = direct_sum_shift(e, m1, m2, 1, s, t);
      }
      mats.push_back(std::move(p));
    }
  }
  std::ostringstream label;
  label << "dsum-output(" << m1 << "," << m2 << ")";
  return Representation(std::move(g), std::move(mats), label.str());
}

int direct_sum_fixed_dim(int m1, int m2) {
  const long size = static_cast<long>(m1) * m2;
  long fixed = 0;
  for (long s = 0; s < size; ++s)
    for (long t = 0; t < size; ++t)
      for (long m : {m1, m2})
        if (s % m == 0 && t % m == 0) fixed += m * m;
  const long order = size * size;
  if (fixed % order != 0) throw Error(ErrorCode::kInconsistentRepresentation, "orbit count is not an integer");
  return static_cast<int>(fixed / order);
}

// --- Equivariance -----------------------------------------------------------

std::vector<ShiftAction> all_shifts(int width, int length, int step) {
  std::vector<ShiftAction> out;
  for (int s = 0; s < width; s += step)
    for (int t = 0; t < length; t += step) out.push_back({s, t});
  return out;
}

OutputAction feature_map_shift_action(int width, int length, int channels, int factor) {
  return [=](const Vector& v, ShiftAction g) {
    const int w = width / factor;
    const int l = length / factor;
    std::vector<double> d(v.data(), v.data() + v.size());
    const FeatureMap shifted = shift(FeatureMap(w, l, channels, std::move(d)), g.s / factor, g.t / factor);
    return shifted.flatten();
  };
}

EquivarianceReport verify_equivariance(const LayerFn& layer, const std::vector<ShiftAction>& elements,
                                       const OutputAction& output_action, int width, int length,
                                       int channels, int trials, double tol, std::uint64_t seed) {
  EquivarianceReport report;
  report.tol = tol;
  for (int trial = 0; trial < trials; ++trial) {
    const FeatureMap x = gaussian_feature_map(width, length, channels, derive_seed(seed, kInputStream, trial));
    const Vector fx = layer(x);
    for (const ShiftAction g : elements) {
      const Vector lhs = layer(shift(x, g.s, g.t));
      const Vector rhs = output_action(fx, g);
      const double r = lhs.size() == rhs.size() ? (lhs - rhs).cwiseAbs().maxCoeff()
                                                 : std::numeric_limits<double>::infinity();
      ++report.checks;
      if (report.checks == 1 || r > report.max_residual) {
        report.max_residual = r;
        report.worst = g;
      }
    }
  }
  return report;
}

// --- Sweeps -----------------------------------------------------------------

std::string ArchSpec::str() const {
  switch (arch) {
    case Arch::kConv:
      return "conv";
    case Arch::kConvMaxPool:
      return "conv-maxpool";
    case Arch::kConvAvgPool:
      return "conv-avgpool";
    case Arch::kDirectSum:
      return "dsum:" + std::to_string(m1) + "," + std::to_string(m2);
  }
  return "?";
}

ArchSpec parse_arch(const std::string& spec) {
  if (spec == "conv") return {Arch::kConv};
  if (spec == "conv-maxpool") return {Arch::kConvMaxPool};
  if (spec == "conv-avgpool") return {Arch::kConvAvgPool};
  if (spec.rfind("dsum:", 0) == 0) {
    int m1 = 0;
    int m2 = 0;
    char comma = 0;
    std::istringstream in(spec.substr(5));
    if (in >> m1 >> comma >> m2 && comma == ',' && in.peek() == EOF && m1 > 0 && m2 > 0) {
      return {Arch::kDirectSum, m1, m2};
    }
  }
  throw Error(ErrorCode::kConfig, "unknown architecture '" + spec + "'");
}

namespace {

int input_size(const SweepConfig& c, bool width) {
  if (c.arch.arch == Arch::kDirectSum) return c.arch.m1 * c.arch.m2;
  return width ? c.width : c.length;
}

FeatureMap pooled(const FeatureMap& a, const SweepConfig& c) {
  return c.arch.arch == Arch::kConvMaxPool ? max_pool(a, c.pool) : avg_pool(a, c.pool);
}

bool is_pooling(const SweepConfig& c) {
  return c.arch.arch == Arch::kConvMaxPool || c.arch.arch == Arch::kConvAvgPool;
}

// 2 block means per channel.
Vector block_means(const Vector& out, int m1, int m2, int channels) {
  const int per = m1 * m1 + m2 * m2;
  Vector means(2 * channels);
  for (int n = 0; n < channels; ++n) {
    const Eigen::Index base = static_cast<Eigen::Index>(n) * per;
    means(2 * n) = out.segment(base, m1 * m1).mean();
    means(2 * n + 1) = out.segment(base + m1 * m1, m2 * m2).mean();
  }
  return means;
}

int n0_for(const SweepConfig& c, int channels) {
  if (c.arch.arch == Arch::kDirectSum) return direct_sum_fixed_dim(c.arch.m1, c.arch.m2) * channels;
  return channels;
}

int rows_for(const SweepConfig& c, int channels) {
  return c.arch.arch == Arch::kDirectSum ? 2 * channels : channels;
}

}  // namespace

std::vector<Matrix> reduced_orbit_points(const SweepConfig& config, const ConvLayer& conv,
                                         const std::vector<FeatureMap>& inputs) {
  std::vector<Matrix> groups(inputs.size());
  const int n_ch = conv.out_channels;
  const auto body = [&](int mu) {
    const FeatureMap& x = inputs[mu];
    if (config.arch.arch == Arch::kDirectSum) {
      const DirectSumLayer layer = make_direct_sum_layer(conv, config.arch.m1, config.arch.m2, config.allow_non_coprime);
      groups[mu] = block_means(direct_sum_forward(x, layer), config.arch.m1, config.arch.m2, n_ch);
      return;
    }
    const FeatureMap a = periodic_conv(x, conv);
    if (!is_pooling(config)) {
      groups[mu] = global_pool(a, PoolKind::kAvg);
      return;
    }
    const int k = config.pool;
    Matrix g(n_ch, k * k);
    for (int s = 0; s < k; ++s)
      for (int t = 0; t < k; ++t) g.col(s * k + t) = global_pool(pooled(shift(a, s, t), config), PoolKind::kAvg);
    groups[mu] = std::move(g);
  };
  parallel_for(static_cast<int>(inputs.size()), body, config.estimate.workers);
  return groups;
}

std::vector<Matrix> raw_orbit_points(const SweepConfig& config, const ConvLayer& conv,
                                     const std::vector<FeatureMap>& inputs) {
  std::vector<Matrix> groups;
  groups.reserve(inputs.size());
  for (const FeatureMap& x : inputs) {
    const auto shifts = all_shifts(x.width(), x.length());
    std::vector<Vector> cols;
    cols.reserve(shifts.size());
    if (config.arch.arch == Arch::kDirectSum) {
      const DirectSumLayer layer = make_direct_sum_layer(conv, config.arch.m1, config.arch.m2, config.allow_non_coprime);
      for (const ShiftAction g : shifts) cols.push_back(direct_sum_forward(shift(x, g.s, g.t), layer));
    } else {
      const FeatureMap a = periodic_conv(x, conv);
      for (const ShiftAction g : shifts) {
        const FeatureMap moved = shift(a, g.s, g.t);
        cols.push_back(is_pooling(config) ? pooled(moved, config).flatten() : moved.flatten());
      }
    }
    Matrix m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
    groups.push_back(std::move(m));
  }
  return groups;
}

std::vector<SweepPoint> gcnn_sweep(const SweepConfig& config) {
  if (config.p < 2) throw Error(ErrorCode::kConfig, "gcnn sweep needs P >= 2");
  if (config.trials < 1 || config.input_seeds < 1) throw Error(ErrorCode::kConfig, "need trials and input seeds");
  if (config.channels.empty()) throw Error(ErrorCode::kConfig, "channel list is empty");
  for (int n : config.channels)
    if (n < 1) throw Error(ErrorCode::kConfig, "channel counts must be positive");
  if (config.arch.arch == Arch::kDirectSum) {
    if (!config.allow_non_coprime && std::gcd(config.arch.m1, config.arch.m2) != 1) {
      throw Error(ErrorCode::kConfig, "dsum moduli " + std::to_string(config.arch.m1) + "," +
                                          std::to_string(config.arch.m2) +
                                          " are not coprime (pass --allow-non-coprime)");
    }
  } else if (config.width < 1 || config.length < 1 || config.in_channels < 1 || config.filter < 1) {
    throw Error(ErrorCode::kConfig, "input and filter sizes must be positive");
  } else if (is_pooling(config) && (config.pool < 1 || config.width % config.pool || config.length % config.pool)) {
    throw Error(ErrorCode::kConfig, "pool window must divide the input size");
  }

  const int max_ch = *std::max_element(config.channels.begin(), config.channels.end());
  const int w = input_size(config, true);
  const int l = input_size(config, false);
  const Nonlinearity phi = config.arch.arch == Arch::kDirectSum ? config.dsum_conv : Nonlinearity::kRelu;

  std::vector<SweepPoint> points(config.channels.size());
  for (int s = 0; s < config.input_seeds; ++s) {
    const std::uint64_t instance = derive_seed(config.seed, kInstanceStream, s);
    const ConvLayer conv = random_conv_layer(config.in_channels, max_ch, config.filter, config.filter,
                                             derive_seed(instance, kFilterStream, 0), phi);
    std::vector<FeatureMap> inputs;
    inputs.reserve(config.p);
    for (int mu = 0; mu < config.p; ++mu) {
      inputs.push_back(gaussian_feature_map(w, l, config.in_channels, derive_seed(instance, kInputStream, mu)));
    }
    const std::vector<Matrix> groups = reduced_orbit_points(config, conv, inputs);
    for (std::size_t i = 0; i < config.channels.size(); ++i) {
      const int n = config.channels[i];
      std::vector<Matrix> sliced;
      sliced.reserve(groups.size());
      for (const Matrix& g : groups) sliced.push_back(g.topRows(rows_for(config, n)));
      const CapacityEstimate est = estimate_fraction(sliced, n0_for(config, n), config.trials, instance, config.estimate);
      points[i].separable += est.separable_count;
      points[i].trials += est.trials;
    }
  }
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    SweepPoint& pt = points[i];
    pt.channels = config.channels[i];
    pt.n0 = n0_for(config, pt.channels);
    pt.alpha = static_cast<double>(config.p) / pt.n0;
    pt.fraction = static_cast<double>(pt.separable) / pt.trials;
    pt.ci = wilson_interval(pt.separable, pt.trials);
    pt.theory = cover_fraction(config.p, pt.n0);
  }
  return points;
}

}  // namespace equicap
