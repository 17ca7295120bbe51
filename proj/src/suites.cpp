#include "equicap/suites.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>

#include "equicap/cover.hpp"
#include "equicap/error.hpp"
#include "equicap/gcnn.hpp"
#include "equicap/random.hpp"
#include "equicap/separability.hpp"

namespace equicap {

namespace {

using nlohmann::json;
using RepPtr = std::shared_ptr<const Representation>;

RepPtr share(Representation r) { return std::make_shared<const Representation>(std::move(r)); }

std::shared_ptr<const FiniteGroup> cyc(int m) { return std::make_shared<const FiniteGroup>(cyclic_group(m)); }

RepPtr regular_copies(int m, int copies) {
  std::vector<Representation> parts(copies, regular_representation(cyc(m)));
  return share(direct_sum(parts));
}

bool intervals_overlap(const WilsonInterval& a, const WilsonInterval& b) { return a.lo <= b.hi && b.lo <= a.hi; }

json ci_json(const WilsonInterval& ci) { return json::array({ci.lo, ci.hi}); }

std::vector<RepPtr> lemma_pool() {
  std::vector<RepPtr> reps;
  for (int m = 2; m <= 6; ++m) reps.push_back(share(regular_representation(cyc(m))));
  for (int m = 3; m <= 6; ++m) {
    reps.push_back(share(rotation_representation(m)));
    reps.push_back(share(augment_trivial(rotation_representation(m), 2)));
  }
  reps.push_back(share(cyclic_direct_sum_representation(std::vector<int>{2, 3})));
  reps.push_back(share(cyclic_direct_sum_representation(std::vector<int>{3, 4})));
  reps.push_back(share(regular_representation(
      std::make_shared<const FiniteGroup>(direct_product(cyclic_group(2), cyclic_group(2))))));
  reps.push_back(regular_copies(3, 3));
  const auto h = std::make_shared<const FiniteGroup>(make_subgroup(cyclic_group(6), {0, 2, 4}).group);
  reps.push_back(share(induced_representation(cyc(6), {0, 2, 4}, regular_representation(h))));
  return reps;
}

SuiteResult lemma1_suite(const SuiteOptions& o) {
  const auto reps = lemma_pool();
  constexpr int kInstances = 200;
  std::vector<char> agree(kInstances, 0);
  std::vector<char> separable(kInstances, 0);
  parallel_for(
      kInstances,
      [&](int i) {
        Rng rng(derive_seed(o.seed, kInstanceStream, static_cast<std::uint64_t>(i)));
        const auto& rep = reps[std::uniform_int_distribution<std::size_t>(0, reps.size() - 1)(rng)];
        const int p = std::uniform_int_distribution<int>(2, 10)(rng);
        const std::uint64_t s = rng();
        const OrbitSet orbits = sample_orbit_instance(rep, p, s).with_labels(sample_dichotomy(p, s, 0));
        const bool full = decide_separable(orbits.points(), orbits.point_labels()).separable;
        const bool reduced = decide_separable(fixed_coordinates(orbits), orbits.labels()).separable;
        agree[i] = full == reduced;
        separable[i] = full;
      },
      o.workers);
  const long agreements = std::count(agree.begin(), agree.end(), 1);
  SuiteResult r{"lemma1", agreements == kInstances, json{}};
  r.details = {{"instances", kInstances},
               {"agreements", agreements},
               {"separable_instances", std::count(separable.begin(), separable.end(), 1)}};
  return r;
}

SuiteResult cover_suite(const SuiteOptions& o) {
  int checked = 0;
  json mismatches = json::array();
  for (int p = 2; p <= 8; ++p) {
    for (int n = 1; n <= 5; ++n) {
      for (std::uint64_t s = 0; s < 5; ++s) {
        const Matrix pts = gaussian_matrix(n, p, derive_seed(o.seed, kAnchorStream, (p * 16 + n) * 64 + s));
        const ExactFraction brute = brute_force_fraction(pts);
        ++checked;
        if (!(brute == cover_fraction(p, n))) {
          mismatches.push_back({{"p", p}, {"n", n}, {"brute", brute.str()}, {"cover", cover_fraction(p, n).str()}});
        }
      }
    }
  }
  SuiteResult r{"cover", mismatches.empty(), json{}};
  r.details = {{"cases", checked}, {"mismatches", mismatches}};
  return r;
}

SuiteResult theorem1_suite(const SuiteOptions& o) {
  json points = json::array();
  int inside = 0;
  const std::vector<int> n0s = {4, 6, 8, 10, 12, 16};
  for (std::size_t i = 0; i < n0s.size(); ++i) {
    EstimateOptions eo;
    eo.workers = o.workers;
    const auto est = empirical_fraction(regular_copies(5, n0s[i]), 16, 200, derive_seed(o.seed, kInstanceStream, i), eo);
    const double theory = est.theory.to_double();
    const bool ok = est.wilson_ci_95.lo <= theory && theory <= est.wilson_ci_95.hi;
    inside += ok;
    points.push_back({{"n0", est.n0},
                      {"fraction", est.fraction},
                      {"wilson_ci_95", ci_json(est.wilson_ci_95)},
                      {"theory", theory},
                      {"inside", ok}});
  }
  SuiteResult r{"theorem1", inside >= 5, json{}};
  r.details = {{"p", 16}, {"trials", 200}, {"points", points}, {"inside", inside}, {"required", 5}};
  return r;
}

SuiteResult vc_suite(const SuiteOptions& o) {
  json rows = json::array();
  bool pass = true;
  for (int n0 = 2; n0 <= 8; ++n0) {
    const RepPtr rep = regular_copies(3, n0);
    int shattered = 0;
    int broken = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const std::uint64_t seed = derive_seed(o.seed, kAnchorStream, n0 * 100 + s);
      shattered += brute_force_fraction(sample_orbit_instance(rep, n0, seed)) == ExactFraction(BigInt(1), BigInt(1));
      broken += brute_force_fraction(sample_orbit_instance(rep, n0 + 1, seed)) < ExactFraction(BigInt(1), BigInt(1));
    }
    pass = pass && shattered == 10 && broken == 10;
    rows.push_back({{"n0", n0}, {"shattered_at_n0", shattered}, {"not_shattered_at_n0_plus_1", broken}, {"seeds", 10}});
  }
  SuiteResult r{"vc", pass, json{}};
  r.details = {{"rows", rows}};
  return r;
}

struct InducedCase {
  const char* name;
  int g;
  std::vector<Element> h;
  bool regular;
};

SuiteResult induced_suite(const SuiteOptions& o) {
  const std::vector<InducedCase> cases = {
      {"Z6/Z2 trivial", 6, {0, 3}, false}, {"Z6/Z3 regular", 6, {0, 2, 4}, true}, {"Z4/Z2 regular", 4, {0, 2}, true}};
  json rows = json::array();
  bool pass = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto h = std::make_shared<const FiniteGroup>(make_subgroup(cyclic_group(c.g), c.h).group);
    const Representation rho = c.regular ? regular_representation(h) : trivial_representation(h);
    const RepPtr ind = share(induced_representation(cyc(c.g), c.h, rho));
    const int n0_ind = fixed_subspace_dim(*ind);
    const int n0_rho = fixed_subspace_dim(rho);
    EstimateOptions eo;
    eo.workers = o.workers;
    const std::uint64_t seed = derive_seed(o.seed, kInstanceStream, i);
    const auto a = empirical_fraction(ind, 8, 200, seed, eo);
    const auto b = empirical_fraction(share(rho), 8, 200, seed + 1, eo);
    const bool ok = n0_ind == n0_rho && intervals_overlap(a.wilson_ci_95, b.wilson_ci_95);
    pass = pass && ok;
    rows.push_back({{"case", c.name},
                    {"n0_induced", n0_ind},
                    {"n0_rho", n0_rho},
                    {"induced_dim", ind->dim()},
                    {"fraction_induced", a.fraction},
                    {"fraction_rho", b.fraction},
                    {"ci_induced", ci_json(a.wilson_ci_95)},
                    {"ci_rho", ci_json(b.wilson_ci_95)},
                    {"pass", ok}});
  }
  SuiteResult r{"induced", pass, json{}};
  r.details = {{"p", 8}, {"cases", rows}};
  return r;
}

SuiteResult structural_suite(const SuiteOptions& o) {
  json checks = json::object();
  bool pass = true;
  const auto record = [&](const std::string& name, double value, double tol, bool below = true) {
    const bool ok = below ? value < tol : value > tol;
    checks[name] = {{"value", value}, {"tol", tol}, {"pass", ok}};
    pass = pass && ok;
  };

  std::vector<RepPtr> reps = lemma_pool();
  reps.push_back(share(regular_representation(
      std::make_shared<const FiniteGroup>(direct_product(cyclic_group(10), cyclic_group(10))))));
  double hom = 0.0;
  double idem = 0.0;
  for (const auto& rep : reps) {
    hom = std::max(hom, homomorphism_residual(*rep));
    const Matrix avg = group_average(*rep);
    idem = std::max(idem, (avg * avg - avg).cwiseAbs().maxCoeff());
  }
  record("homomorphism_residual", hom, 1e-10);
  record("average_idempotence", idem, 1e-8);

  double irrep_avg = 0.0;
  for (int m = 1; m <= 12; ++m) {
    const IrrepDecomposition dec = irrep_decompose_cyclic(m);
    const Matrix avg = group_average(regular_representation(cyc(m)));
    const Matrix in_basis = dec.basis.transpose() * avg * dec.basis;
    Eigen::Index offset = 0;
    for (const IrrepBlock& b : dec.blocks) {
      if (b.kind != IrrepKind::kTrivial) {
        irrep_avg = std::max(irrep_avg, in_basis.block(offset, offset, b.size, b.size).cwiseAbs().maxCoeff());
      }
      offset += b.size;
    }
  }
  record("nontrivial_irrep_average", irrep_avg, 1e-10);

  const std::uint64_t eq_seed = derive_seed(o.seed, kInputStream, 0);
  const ConvLayer conv = random_conv_layer(2, 3, 3, 3, derive_seed(o.seed, kFilterStream, 0));
  const auto conv_fn = [&](const ConvLayer& l) {
    return [l](const FeatureMap& x) { return periodic_conv(x, l).flatten(); };
  };
  record("equivariance_periodic_conv",
         verify_equivariance(conv_fn(conv), all_shifts(8, 8), feature_map_shift_action(8, 8, 3), 8, 8, 2, 50,
                             1e-10, eq_seed)
             .max_residual,
         1e-10);
  const ConvLayer padded =
      random_conv_layer(2, 3, 3, 3, derive_seed(o.seed, kFilterStream, 1), Nonlinearity::kRelu, Boundary::kZeroPad, 1);
  record("equivariance_zero_pad_conv_breaks",
         verify_equivariance(conv_fn(padded), all_shifts(8, 8), feature_map_shift_action(8, 8, 3), 8, 8, 2, 10,
                             1e-10, eq_seed)
             .max_residual,
         1e-10, false);
  record("equivariance_max_pool_subgroup",
         verify_equivariance([](const FeatureMap& x) { return max_pool(x, 2).flatten(); }, all_shifts(8, 8, 2),
                             feature_map_shift_action(8, 8, 2, 2), 8, 8, 2, 50, 1e-12, eq_seed)
             .max_residual,
         1e-12);
  record("equivariance_avg_pool_subgroup",
         verify_equivariance([](const FeatureMap& x) { return avg_pool(x, 2).flatten(); }, all_shifts(8, 8, 2),
                             feature_map_shift_action(8, 8, 2, 2), 8, 8, 2, 50, 1e-12, eq_seed)
             .max_residual,
         1e-12);
  const DirectSumLayer dsum = make_direct_sum_layer(
      random_conv_layer(1, 2, 3, 3, derive_seed(o.seed, kFilterStream, 2), Nonlinearity::kIdentity), 2, 3);
  record("equivariance_direct_sum",
         verify_equivariance([&](const FeatureMap& x) { return direct_sum_forward(x, dsum); }, all_shifts(6, 6),
                             [](const Vector& v, ShiftAction g) { return direct_sum_shift(v, 2, 3, 2, g.s, g.t); },
                             6, 6, 1, 50, 1e-10, eq_seed)
             .max_residual,
         1e-10);
  const int dsum_n0 = fixed_subspace_dim(direct_sum_output_representation(2, 3));
  checks["direct_sum_trivial_irreps_per_channel"] = {{"dense", dsum_n0},
                                                     {"orbit_count_10_8", direct_sum_fixed_dim(10, 8)}};
  pass = pass && dsum_n0 == 2 && direct_sum_fixed_dim(10, 8) == 2;

  long recursion_failures = 0;
  for (long p = 1; p < 64; ++p)
    for (long n = 1; n <= 65; ++n) recursion_failures += cover_count(p + 1, n) != cover_count(p, n) + cover_count(p, n - 1);
  checks["cover_recursion_p_le_64"] = {{"failures", recursion_failures}};
  pass = pass && recursion_failures == 0;

  SuiteResult r{"structural", pass, json{}};
  r.details = checks;
  return r;
}

SuiteResult subgroup_suite(const SuiteOptions& o) {
  const RepPtr full = regular_copies(6, 2);
  const RepPtr sub = share(restrict_to_subgroup(*full, {0, 2, 4}));
  const int n0_full = fixed_subspace_dim(*full);
  const int n0_sub = fixed_subspace_dim(*sub);
  int implications = 0;
  int violations = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const std::uint64_t seed = derive_seed(o.seed, kAnchorStream, s);
    const Matrix anchors = gaussian_matrix(full->dim(), 5, seed);
    const Labels y = sample_dichotomy(5, seed, 0);
    const OrbitSet a(full, anchors, y);
    if (!decide_separable(a.points(), a.point_labels()).separable) continue;
    ++implications;
    const OrbitSet b(sub, anchors, y);
    violations += !decide_separable(b.points(), b.point_labels()).separable;
  }
  EstimateOptions eo;
  eo.workers = o.workers;
  const auto ef = empirical_fraction(full, 6, 200, derive_seed(o.seed, kInstanceStream, 0), eo);
  const auto es = empirical_fraction(sub, 6, 200, derive_seed(o.seed, kInstanceStream, 1), eo);
  const bool pass = n0_sub >= n0_full && violations == 0 && es.wilson_ci_95.hi >= ef.wilson_ci_95.lo;
  SuiteResult r{"subgroup", pass, json{}};
  r.details = {{"n0_group", n0_full},
               {"n0_subgroup", n0_sub},
               {"separable_under_group", implications},
               {"not_separable_under_subgroup", violations},
               {"fraction_group", ef.fraction},
               {"fraction_subgroup", es.fraction}};
  return r;
}

SuiteResult general_position_suite(const SuiteOptions& o) {
  const RepPtr rep = regular_copies(4, 3);
  const auto instance = [&](std::uint64_t s, bool duplicate) {
    Matrix anchors = gaussian_matrix(rep->dim(), 6, derive_seed(o.seed, kAnchorStream, s));
    if (duplicate) anchors.col(5) = anchors.col(1);
    return general_position_violation(fixed_coordinates(OrbitSet(rep, anchors)), 3);
  };
  int clean_violations = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) clean_violations += instance(s, false).has_value();
  const bool injected_flagged = instance(0, true).has_value();
  const auto main = instance(0, o.inject_duplicate_anchor);

  SuiteResult r{"general-position", !main.has_value() && clean_violations == 0 && injected_flagged, json{}};
  r.details = {{"clean_instances", 5},
               {"clean_violations", clean_violations},
               {"self_check_duplicate_flagged", injected_flagged},
               {"injected", o.inject_duplicate_anchor}};
  if (main) r.details["violation"] = *main;
  return r;
}

SuiteResult pooling_suite(const SuiteOptions& o) {
  json checks = json::object();
  bool pass = true;

  SweepConfig c;
  c.width = c.length = 8;
  c.in_channels = 3;
  c.filter = 4;
  c.p = 20;
  c.channels = {4, 8, 12, 16};
  c.trials = 100;
  c.input_seeds = 2;
  c.seed = o.seed;
  c.estimate.workers = o.workers;

  // Reduced points decide full pooled orbits.
  {
    SweepConfig small = c;
    small.arch = parse_arch("conv-maxpool");
    small.width = small.length = 4;
    const ConvLayer conv = random_conv_layer(2, 3, 3, 3, derive_seed(o.seed, kFilterStream, 7));
    small.in_channels = 2;
    std::vector<FeatureMap> inputs;
    for (int mu = 0; mu < 5; ++mu) inputs.push_back(gaussian_feature_map(4, 4, 2, derive_seed(o.seed, kInputStream, 50 + mu)));
    const auto reduced = reduced_orbit_points(small, conv, inputs);
    const auto raw = raw_orbit_points(small, conv, inputs);
    int agree = 0;
    for (int t = 0; t < 40; ++t) {
      const Labels y = sample_dichotomy(5, o.seed, t);
      const auto flat = [&](const std::vector<Matrix>& groups, Labels& labels) {
        Eigen::Index cols = 0;
        for (const auto& g : groups) cols += g.cols();
        Matrix m(groups.front().rows(), cols);
        labels.clear();
        Eigen::Index at = 0;
        for (std::size_t mu = 0; mu < groups.size(); ++mu) {
          m.middleCols(at, groups[mu].cols()) = groups[mu];
          at += groups[mu].cols();
          labels.insert(labels.end(), groups[mu].cols(), y[mu]);
        }
        return m;
      };
      Labels ly;
      Labels fy;
      const Matrix rp = flat(reduced, ly);
      const Matrix fp = flat(raw, fy);
      agree += decide_separable(rp, ly).separable == decide_separable(fp, fy).separable;
    }
    checks["coset_reduction_agreement"] = {{"agreements", agree}, {"dichotomies", 40}};
    pass = pass && agree == 40;
  }

  c.arch = parse_arch("conv");
  const auto pre = gcnn_sweep(c);
  c.arch = parse_arch("conv-avgpool");
  const auto avg = gcnn_sweep(c);
  c.arch = parse_arch("conv-maxpool");
  const auto mx = gcnn_sweep(c);
  json rows = json::array();
  for (std::size_t i = 0; i < pre.size(); ++i) {
    const bool avg_ok = intervals_overlap(pre[i].ci, avg[i].ci);
    const double lower = cover_fraction(c.p, pre[i].channels / (c.pool * c.pool)).to_double();
    const double upper = pre[i].theory.to_double();
    const bool max_ok = mx[i].ci.hi >= lower && mx[i].ci.lo <= upper;
    pass = pass && avg_ok && max_ok;
    rows.push_back({{"channels", pre[i].channels},
                    {"conv", pre[i].fraction},
                    {"avg_pool", avg[i].fraction},
                    {"max_pool", mx[i].fraction},
                    {"max_pool_bounds", json::array({lower, upper})},
                    {"avg_pool_preserved", avg_ok},
                    {"max_pool_within_bounds", max_ok}});
  }
  checks["sweep"] = rows;

  long recursion = 0;
  for (long k = 1; k <= 4; ++k)
    for (long p = 1; p <= 40; ++p)
      for (long n0 = k; n0 <= 40; ++n0) recursion += cover_count(p + 1, n0) < cover_count(p, n0) + cover_count(p, n0 - k);
  checks["pooling_recursion_failures"] = recursion;
  pass = pass && recursion == 0;

  SuiteResult r{"pooling", pass, json{}};
  r.details = checks;
  return r;
}

const std::map<std::string, std::function<SuiteResult(const SuiteOptions&)>>& registry() {
  static const std::map<std::string, std::function<SuiteResult(const SuiteOptions&)>> r = {
      {"lemma1", lemma1_suite},       {"cover", cover_suite},
      {"theorem1", theorem1_suite},   {"vc", vc_suite},
      {"induced", induced_suite},     {"structural", structural_suite},
      {"subgroup", subgroup_suite},   {"general-position", general_position_suite},
      {"pooling", pooling_suite}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"lemma1",     "cover",    "theorem1",         "vc",     "induced",
                                                 "structural", "subgroup", "general-position", "pooling"};
  return names;
}

std::vector<SuiteResult> run_suites(const std::string& name, const SuiteOptions& options) {
  std::vector<std::string> selected;
  if (name == "all") {
    selected = suite_names();
  } else if (registry().count(name)) {
    selected = {name};
  } else {
    throw Error(ErrorCode::kConfig, "unknown suite '" + name + "'");
  }
  std::vector<SuiteResult> results;
  for (const auto& s : selected) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult r = registry().at(s)(options);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }
  return results;
}

nlohmann::json suites_report(const std::vector<SuiteResult>& results, const SuiteOptions& options) {
  json suites = json::array();
  bool pass = true;
  for (const auto& r : results) {
    pass = pass && r.pass;
    suites.push_back({{"name", r.name}, {"pass", r.pass}, {"seconds", r.seconds}, {"details", r.details}});
  }
  return {{"pass", pass}, {"seed", options.seed}, {"suites", suites}};
}

}  // namespace equicap
