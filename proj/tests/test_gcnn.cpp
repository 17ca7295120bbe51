#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "equicap/error.hpp"
#include "equicap/gcnn.hpp"
#include "equicap/random.hpp"

using namespace equicap;

namespace {

FeatureMap grid2x2(double a, double b, double c, double d) { return FeatureMap(2, 2, 1, {a, b, c, d}); }

LayerFn conv_fn(const ConvLayer& layer) {
  return [layer](const FeatureMap& x) { return periodic_conv(x, layer).flatten(); };
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  return (a.flatten() - b.flatten()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(FeatureMap, Validation) {
  EXPECT_THROW(FeatureMap(0, 3, 1), Error);
  EXPECT_THROW(FeatureMap(2, 2, 1, {1, 2, 3}), Error);
  EXPECT_THROW(FeatureMap(1, 1, 1, {std::numeric_limits<double>::quiet_NaN()}), Error);
  EXPECT_THROW(FeatureMap(1, 1, 1, {std::numeric_limits<double>::infinity()}), Error);
  EXPECT_EQ(FeatureMap(3, 4, 5).size(), 60u);
}

TEST(Conv, OneByOneIdentityFilter) {
  ConvLayer layer = random_conv_layer(1, 1, 1, 1, 0u);
  layer.weights = {1.0};
  const FeatureMap x = relu(gaussian_feature_map(5, 4, 1, 3u));
  EXPECT_EQ(max_abs_diff(periodic_conv(x, layer), x), 0.0);
}

TEST(Conv, DeltaFilterShiftsInput) {
  const FeatureMap x = gaussian_feature_map(4, 4, 1, 21u);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      ConvLayer layer = random_conv_layer(1, 1, 3, 3, 0u, Nonlinearity::kIdentity);
      std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
      layer.weights[a * 3 + b] = 1.0;
      const FeatureMap y = periodic_conv(x, layer);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_EQ(y(i, j, 0), x((i + a) % 4, (j + b) % 4, 0));
    }
  }
}

TEST(Conv, ChannelMismatch) {
  const ConvLayer layer = random_conv_layer(2, 1, 3, 3, 0u);
  EXPECT_THROW(periodic_conv(gaussian_feature_map(4, 4, 3, 0u), layer), Error);
}

TEST(Conv, FilterScaleIsInverseSqrtFanIn) {
  const ConvLayer layer = random_conv_layer(3, 200, 10, 10, 5u);
  double sq = 0.0;
  for (double w : layer.weights) sq += w * w;
  const double var = sq / static_cast<double>(layer.weights.size());
  EXPECT_NEAR(var, 1.0 / 300.0, 0.05 / 300.0);
}

TEST(Conv, PeriodicReluIsShiftEquivariant) {
  for (int size : {4, 7, 12}) {
    const ConvLayer layer = random_conv_layer(2, 3, 3, 5, 9u + size);
    const auto report = verify_equivariance(conv_fn(layer), all_shifts(size, size),
                                            feature_map_shift_action(size, size, 3), size, size, 2, 50,
                                            1e-10, 17u);
    EXPECT_TRUE(report.pass()) << size << ": " << report.max_residual;
    EXPECT_EQ(report.checks, 50 * size * size);
  }
}

TEST(Conv, ShiftByOneRowShiftsOutput) {
  const ConvLayer layer = random_conv_layer(3, 4, 10, 10, 1u);
  const FeatureMap x = gaussian_feature_map(10, 10, 3, 2u);
  EXPECT_LT(max_abs_diff(periodic_conv(shift(x, 1, 0), layer), shift(periodic_conv(x, layer), 1, 0)), 1e-12);
}

TEST(Conv, ZeroPaddingBreaksEquivariance) {
  const ConvLayer layer = random_conv_layer(1, 2, 3, 3, 4u, Nonlinearity::kRelu, Boundary::kZeroPad, 1);
  EXPECT_EQ(periodic_conv(gaussian_feature_map(6, 6, 1, 0u), layer).width(), 6);
  const auto report = verify_equivariance(conv_fn(layer), all_shifts(6, 6), feature_map_shift_action(6, 6, 2),
                                          6, 6, 1, 10, 1e-10, 5u);
  EXPECT_FALSE(report.pass());
  EXPECT_GT(report.max_residual, 1e-3);
}

TEST(AvgPool, Examples) {
  EXPECT_EQ(avg_pool(grid2x2(1, 2, 3, 4), 2)(0, 0, 0), 2.5);
  FeatureMap c(4, 6, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 2; ++k) c(i, j, k) = 1.75;
  const FeatureMap pc = avg_pool(c, 2);
  EXPECT_EQ(pc.width(), 2);
  EXPECT_EQ(pc.length(), 3);
  for (double v : pc.data()) EXPECT_EQ(v, 1.75);
  const FeatureMap x = gaussian_feature_map(4, 4, 3, 8u);
  const FeatureMap whole = avg_pool(x, 4);
  const Vector g = global_pool(x, PoolKind::kAvg);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(whole(0, 0, k), g(k), 1e-15);
  EXPECT_THROW(avg_pool(x, 3), Error);
}

TEST(AvgPool, CommutesWithSubgroupShifts) {
  const auto pool = [](const FeatureMap& x) { return avg_pool(x, 2).flatten(); };
  const auto sub = verify_equivariance(pool, all_shifts(8, 8, 2), feature_map_shift_action(8, 8, 2, 2), 8, 8,
                                       2, 50, 1e-12, 1u);
  EXPECT_TRUE(sub.pass()) << sub.max_residual;
}

TEST(MaxPool, Examples) {
  EXPECT_EQ(max_pool(grid2x2(1, 2, 3, 4), 2)(0, 0, 0), 4.0);
  EXPECT_EQ(max_pool(grid2x2(-1, -2, -3, -4), 2)(0, 0, 0), -1.0);
  EXPECT_THROW(max_pool(gaussian_feature_map(6, 4, 1, 0u), 4), Error);
}

TEST(MaxPool, EquivariantToSubgroupShifts) {
  const auto pool = [](const FeatureMap& x) { return max_pool(x, 2).flatten(); };
  const auto sub = verify_equivariance(pool, all_shifts(8, 8, 2), feature_map_shift_action(8, 8, 1, 2), 8, 8,
                                       1, 50, 1e-12, 2u);
  EXPECT_TRUE(sub.pass());
  EXPECT_EQ(sub.max_residual, 0.0);
}

TEST(MaxPool, ShiftByOneChangesPooledValues) {
  const FeatureMap x = gaussian_feature_map(8, 8, 1, 6u);
  const FeatureMap a = max_pool(x, 2);
  const FeatureMap b = max_pool(shift(x, 1, 0), 2);
  // No shift of the pooled grid reproduces the pooled shifted input.
  for (ShiftAction g : all_shifts(4, 4)) EXPECT_GT(max_abs_diff(shift(a, g.s, g.t), b), 1e-6);
}

TEST(GlobalPool, ShiftInvariant) {
  const FeatureMap x = gaussian_feature_map(5, 6, 3, 11u);
  for (ShiftAction g : all_shifts(5, 6)) {
    const FeatureMap y = shift(x, g.s, g.t);
    EXPECT_LT((global_pool(y, PoolKind::kAvg) - global_pool(x, PoolKind::kAvg)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(global_pool(y, PoolKind::kMax), global_pool(x, PoolKind::kMax));
  }
}

TEST(GlobalPool, AvgEqualsGroupAverageOfRegularRep) {
  // A single-channel W x L map flattens into the regular representation of Z_W x Z_L.
  auto g = std::make_shared<const FiniteGroup>(direct_product(cyclic_group(4), cyclic_group(3)));
  const Representation reg = regular_representation(g);
  const FeatureMap x = gaussian_feature_map(4, 3, 1, 12u);
  for (ShiftAction s : all_shifts(4, 3)) {
    EXPECT_LT((reg.matrix(s.s * 3 + s.t) * x.flatten() - shift(x, s.s, s.t).flatten()).cwiseAbs().maxCoeff(), 1e-15);
  }
  const Vector centroid = group_average(reg) * x.flatten();
  const double mean = global_pool(x, PoolKind::kAvg)(0);
  for (Eigen::Index i = 0; i < centroid.size(); ++i) EXPECT_NEAR(centroid(i), mean, 1e-14);
}

TEST(DirectSum, CoprimalityAndShape) {
  const ConvLayer conv = random_conv_layer(1, 2, 3, 3, 0u, Nonlinearity::kIdentity);
  EXPECT_THROW(make_direct_sum_layer(conv, 10, 8), Error);
  EXPECT_NO_THROW(make_direct_sum_layer(conv, 10, 8, true));
  const DirectSumLayer layer = make_direct_sum_layer(conv, 2, 3);
  EXPECT_THROW(direct_sum_forward(gaussian_feature_map(5, 5, 1, 0u), layer), Error);
  EXPECT_EQ(direct_sum_forward(gaussian_feature_map(6, 6, 1, 0u), layer).size(), 2 * 13);
  EXPECT_EQ(direct_sum_forward(FeatureMap(6, 6, 1), layer), Vector::Zero(26));
}

TEST(DirectSum, DiagonalShiftRotatesBothBlocks) {
  const DirectSumLayer layer = make_direct_sum_layer(random_conv_layer(2, 3, 4, 4, 7u, Nonlinearity::kIdentity), 2, 3);
  const FeatureMap x = gaussian_feature_map(6, 6, 2, 3u);
  const Vector before = direct_sum_forward(x, layer);
  const Vector after = direct_sum_forward(shift(x, 1, 1), layer);
  for (int n = 0; n < 3; ++n) {
    const int base = n * 13;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        EXPECT_NEAR(after(base + a * 2 + b), before(base + ((a + 1) % 2) * 2 + (b + 1) % 2), 1e-12);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        EXPECT_NEAR(after(base + 4 + a * 3 + b), before(base + 4 + ((a + 2) % 3) * 3 + (b + 2) % 3), 1e-12);
  }
}

TEST(DirectSum, EquivariantUnderEveryShift) {
  for (Nonlinearity phi : {Nonlinearity::kIdentity, Nonlinearity::kRelu}) {
    const DirectSumLayer layer = make_direct_sum_layer(random_conv_layer(1, 2, 3, 3, 8u, phi), 2, 3);
    const auto report = verify_equivariance(
        [&](const FeatureMap& x) { return direct_sum_forward(x, layer); }, all_shifts(6, 6),
        [](const Vector& v, ShiftAction g) { return direct_sum_shift(v, 2, 3, 2, g.s, g.t); }, 6, 6, 1, 50, 1e-10,
        4u);
    EXPECT_TRUE(report.pass()) << report.max_residual;
  }
}

TEST(DirectSum, OutputRepresentationHasTwoTrivialIrreps) {
  const Representation rep = direct_sum_output_representation(2, 3);
  EXPECT_EQ(rep.dim(), 13);
  EXPECT_LT(homomorphism_residual(rep), 1e-12);
  EXPECT_EQ(fixed_subspace_dim(rep), 2);
  EXPECT_EQ(direct_sum_fixed_dim(2, 3), 2);
  EXPECT_EQ(direct_sum_fixed_dim(10, 8), 2);
  EXPECT_EQ(direct_sum_fixed_dim(3, 5), 2);
  // The dense construction and the permutation action agree.
  const Vector v = Vector::LinSpaced(13, -1.0, 2.0);
  EXPECT_EQ(rep.matrix(1 * 6 + 4) * v, direct_sum_shift(v, 2, 3, 1, 1, 4));
}

TEST(DirectSum, ReluBeforeSpacedAveragingCollapsesBlockMeans) {
  // With a relu conv stage every block entry is non-negative, so the final
  // relu is inactive and both block means equal the channel mean.
  const FeatureMap x = gaussian_feature_map(6, 6, 2, 5u);
  const DirectSumLayer relu_layer = make_direct_sum_layer(random_conv_layer(2, 3, 3, 3, 6u), 2, 3);
  const Vector r = direct_sum_forward(x, relu_layer);
  DirectSumLayer linear_layer = relu_layer;
  linear_layer.conv.nonlinearity = Nonlinearity::kIdentity;
  const Vector l = direct_sum_forward(x, linear_layer);
  int distinct = 0;
  for (int n = 0; n < 3; ++n) {
    EXPECT_NEAR(r.segment(n * 13, 4).mean(), r.segment(n * 13 + 4, 9).mean(), 1e-12);
    distinct += std::abs(l.segment(n * 13, 4).mean() - l.segment(n * 13 + 4, 9).mean()) > 1e-6;
  }
  EXPECT_GT(distinct, 0);
}

TEST(Arch, Parse) {
  EXPECT_EQ(parse_arch("conv").arch, Arch::kConv);
  EXPECT_EQ(parse_arch("conv-maxpool").arch, Arch::kConvMaxPool);
  EXPECT_EQ(parse_arch("conv-avgpool").arch, Arch::kConvAvgPool);
  const ArchSpec d = parse_arch("dsum:10,8");
  EXPECT_EQ(d.arch, Arch::kDirectSum);
  EXPECT_EQ(d.m1, 10);
  EXPECT_EQ(d.m2, 8);
  EXPECT_EQ(d.str(), "dsum:10,8");
  for (const char* bad : {"dsum:10", "dsum:1,2,3", "dsum:a,b", "mlp", "dsum:0,3"}) {
    EXPECT_THROW(parse_arch(bad), Error) << bad;
  }
}

TEST(Reduction, ReducedPointsDecideLikeFullOrbits) {
  for (const char* arch : {"conv", "conv-maxpool", "conv-avgpool", "dsum:2,3"}) {
    SweepConfig c;
    c.arch = parse_arch(arch);
    c.width = c.length = 4;
    c.in_channels = 2;
    c.filter = 3;
    const bool dsum = c.arch.arch == Arch::kDirectSum;
    const int w = dsum ? 6 : 4;
    const int n_ch = dsum ? 2 : 3;
    const ConvLayer conv = random_conv_layer(2, n_ch, 3, 3, 31u, dsum ? Nonlinearity::kIdentity : Nonlinearity::kRelu);
    const int p = 5;
    std::vector<FeatureMap> inputs;
    for (int mu = 0; mu < p; ++mu) inputs.push_back(gaussian_feature_map(w, w, 2, 100u + mu));
    const auto reduced = reduced_orbit_points(c, conv, inputs);
    const auto raw = raw_orbit_points(c, conv, inputs);
    int agree = 0;
    int separable = 0;
    for (int t = 0; t < 40; ++t) {
      const Labels y = sample_dichotomy(p, 77u, t);
      Labels ry;
      Labels fy;
      Matrix rp(reduced.front().rows(), 0);
      Matrix fp(raw.front().rows(), 0);
      for (int mu = 0; mu < p; ++mu) {
        Matrix a(rp.rows(), rp.cols() + reduced[mu].cols());
        a << rp, reduced[mu];
        rp = a;
        ry.insert(ry.end(), reduced[mu].cols(), y[mu]);
        Matrix b(fp.rows(), fp.cols() + raw[mu].cols());
        b << fp, raw[mu];
        fp = b;
        fy.insert(fy.end(), raw[mu].cols(), y[mu]);
      }
      const bool r = decide_separable(rp, ry).separable;
      const bool f = decide_separable(fp, fy).separable;
      agree += r == f;
      separable += f;
    }
    EXPECT_EQ(agree, 40) << arch;
    EXPECT_GT(separable, 0) << arch;
    EXPECT_LT(separable, 40) << arch;
  }
}

TEST(Sweep, DeterministicAndConsistent) {
  SweepConfig c;
  c.arch = parse_arch("conv");
  c.p = 12;
  c.channels = {3, 6, 12};
  c.trials = 30;
  c.input_seeds = 2;
  c.width = c.length = 6;
  c.filter = 3;
  c.seed = 4;
  const auto a = gcnn_sweep(c);
  c.estimate.workers = 1;
  const auto b = gcnn_sweep(c);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].separable, b[i].separable);
    EXPECT_EQ(a[i].trials, 60);
    EXPECT_EQ(a[i].n0, c.channels[i]);
    EXPECT_DOUBLE_EQ(a[i].alpha, 12.0 / c.channels[i]);
    EXPECT_EQ(a[i].theory, cover_fraction(12, c.channels[i]));
  }
  EXPECT_EQ(a[2].separable, 60);
}

TEST(Sweep, ConfigErrors) {
  SweepConfig c;
  c.arch = parse_arch("dsum:10,8");
  EXPECT_THROW(gcnn_sweep(c), Error);
  c.arch = parse_arch("conv-maxpool");
  c.width = 9;
  EXPECT_THROW(gcnn_sweep(c), Error);
  c.width = 10;
  c.channels = {};
  EXPECT_THROW(gcnn_sweep(c), Error);
}

TEST(Sweep, AvgPoolPreservesCapacity) {
  SweepConfig c;
  c.p = 16;
  c.channels = {4, 8, 12};
  c.trials = 60;
  c.input_seeds = 2;
  c.width = c.length = 6;
  c.filter = 3;
  c.arch = parse_arch("conv");
  const auto pre = gcnn_sweep(c);
  c.arch = parse_arch("conv-avgpool");
  const auto post = gcnn_sweep(c);
  for (std::size_t i = 0; i < pre.size(); ++i) EXPECT_EQ(pre[i].separable, post[i].separable);
}

TEST(Sweep, PooledProblemUnderSubgroupIsRegular) {
  // Classifying max-pooled maps under H only: one centroid per anchor, so the
  // fraction follows f(P, N).
  const int p = 16;
  const int n = 8;
  const ConvLayer conv = random_conv_layer(3, n, 5, 5, 42u);
  std::vector<Matrix> groups;
  for (int mu = 0; mu < p; ++mu) {
    const FeatureMap a = periodic_conv(gaussian_feature_map(8, 8, 3, 500u + mu), conv);
    groups.push_back(global_pool(max_pool(a, 2), PoolKind::kAvg));
  }
  const auto est = estimate_fraction(groups, n, 600, 3u);
  const auto wide = wilson_interval(est.separable_count, est.trials, 3.2905267314919255);
  EXPECT_LE(wide.lo, 0.5);
  EXPECT_GE(wide.hi, 0.5);
}
