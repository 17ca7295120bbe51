// Acceptance gate: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "equicap/cover.hpp"
#include "equicap/gcnn.hpp"
#include "equicap/random.hpp"
#include "equicap/separability.hpp"
#include "equicap/suites.hpp"

using namespace equicap;

namespace {

constexpr std::uint64_t kSeed = 20240601;

using RepPtr = std::shared_ptr<const Representation>;

struct Outcome {
  bool pass;
  std::string detail;
};

RepPtr share(Representation r) { return std::make_shared<const Representation>(std::move(r)); }

std::shared_ptr<const FiniteGroup> cyc(int m) { return std::make_shared<const FiniteGroup>(cyclic_group(m)); }

RepPtr regular_copies(int m, int copies) {
  std::vector<Representation> parts(copies, regular_representation(cyc(m)));
  return share(direct_sum(parts));
}

bool overlap(const WilsonInterval& a, const WilsonInterval& b) { return a.lo <= b.hi && b.lo <= a.hi; }

bool inside(double v, const WilsonInterval& ci) { return ci.lo <= v && v <= ci.hi; }

std::vector<Matrix> orbit_groups(const OrbitSet& orbits) {
  const int order = orbits.rep().group().order();
  const Matrix all = orbits.points();
  std::vector<Matrix> groups;
  for (int mu = 0; mu < orbits.size(); ++mu) groups.push_back(all.middleCols(static_cast<Eigen::Index>(mu) * order, order));
  return groups;
}

Outcome cover_oracle() {
  const auto start = std::chrono::steady_clock::now();
  int equal = 0;
  int total = 0;
  for (int p = 2; p <= 8; ++p)
    for (int n = 1; n <= 5; ++n)
      for (std::uint64_t s = 0; s < 20; ++s) {
        ++total;
        equal += brute_force_fraction(gaussian_matrix(n, p, derive_seed(kSeed, kAnchorStream, (p * 8 + n) * 32 + s))) ==
                 cover_fraction(p, n);
      }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << equal << "/" << total << " exact rational matches, " << secs << " s (limit 120 s)";
  return {equal == total && secs < 120.0, os.str()};
}

Outcome lemma_one() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<RepPtr> pool;
  for (int m = 2; m <= 7; ++m) pool.push_back(share(regular_representation(cyc(m))));
  for (int m = 3; m <= 8; ++m) {
    pool.push_back(share(rotation_representation(m)));
    pool.push_back(share(augment_trivial(rotation_representation(m), 1 + m % 3)));
  }
  pool.push_back(share(cyclic_direct_sum_representation(std::vector<int>{2, 5})));
  pool.push_back(share(cyclic_direct_sum_representation(std::vector<int>{3, 4})));
  pool.push_back(share(regular_representation(std::make_shared<const FiniteGroup>(cyclic_product(std::vector<int>{2, 3, 2})))));
  pool.push_back(regular_copies(4, 2));
  const auto h = std::make_shared<const FiniteGroup>(make_subgroup(cyclic_group(4), {0, 2}).group);
  pool.push_back(share(induced_representation(cyc(4), {0, 2}, regular_representation(h))));

  Rng rng(derive_seed(kSeed, kInstanceStream, 2));
  int agree = 0;
  int separable = 0;
  for (int i = 0; i < 200; ++i) {
    const RepPtr& rep = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    const int p = std::uniform_int_distribution<int>(1, 10)(rng);
    const std::uint64_t s = rng();
    const OrbitSet orbits = sample_orbit_instance(rep, p, s).with_labels(sample_dichotomy(p, s, 1));
    const bool full = decide_separable(orbits.points(), orbits.point_labels()).separable;
    const bool reduced = decide_separable(fixed_coordinates(orbits), orbits.labels()).separable;
    agree += full == reduced;
    separable += full;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << agree << "/200 verdicts agree (" << separable << " separable), " << secs << " s (limit 300 s)";
  return {agree == 200 && secs < 300.0, os.str()};
}

Outcome theorem_one() {
  int hits = 0;
  std::ostringstream os;
  const int n0s[] = {4, 6, 8, 10, 12, 16};
  for (int i = 0; i < 6; ++i) {
    const auto est = empirical_fraction(regular_copies(5, n0s[i]), 16, 200, derive_seed(kSeed, kInstanceStream, 30 + i));
    const bool ok = inside(est.theory.to_double(), est.wilson_ci_95);
    hits += ok;
    os << " N0=" << n0s[i] << ":" << est.fraction << (ok ? "" : "*");
  }
  return {hits >= 5, std::to_string(hits) + "/6 within 95% Wilson (need 5);" + os.str()};
}

SweepConfig figure_2a(const char* arch) {
  SweepConfig c;
  c.arch = parse_arch(arch);
  c.p = 40;
  c.channels = {10, 15, 20, 25, 30, 40, 60};
  c.trials = 100;
  c.input_seeds = 5;
  c.seed = kSeed;
  return c;
}

std::vector<SweepPoint> conv_sweep() {
  static const std::vector<SweepPoint> points = gcnn_sweep(figure_2a("conv"));
  return points;
}

Outcome figure_2a_curves() {
  const auto start = std::chrono::steady_clock::now();
  const auto conv = conv_sweep();
  const auto mx = gcnn_sweep(figure_2a("conv-maxpool"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int conv_ok = 0;
  int max_ok = 0;
  std::ostringstream os;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const int n = conv[i].channels;
    const bool a = inside(conv[i].theory.to_double(), conv[i].ci);
    const double lower = cover_fraction(40, n / 4).to_double();
    const double upper = cover_fraction(40, n).to_double();
    const bool b = mx[i].ci.hi >= lower && mx[i].ci.lo <= upper;
    conv_ok += a;
    max_ok += b;
    os << " N=" << n << ":" << conv[i].fraction << (a ? "" : "*") << "/" << mx[i].fraction << (b ? "" : "*");
  }
  std::ostringstream head;
  head << "conv " << conv_ok << "/7 match f(40,N), max-pool " << max_ok << "/7 within [f(40,N/4), f(40,N)], " << secs
       << " s (limit 1800 s); conv/maxpool:" << os.str();
  return {conv_ok == 7 && max_ok == 7 && secs < 1800.0, head.str()};
}

Outcome avg_pool_preservation() {
  const auto conv = conv_sweep();
  const auto avg = gcnn_sweep(figure_2a("conv-avgpool"));
  int ok = 0;
  std::ostringstream os;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const bool b = overlap(conv[i].ci, avg[i].ci);
    ok += b;
    os << " N=" << conv[i].channels << ":" << conv[i].fraction << "/" << avg[i].fraction << (b ? "" : "*");
  }
  return {ok == 7, std::to_string(ok) + "/7 pre/post intervals overlap;" + os.str()};
}

Outcome figure_2c() {
  SweepConfig c;
  c.arch = parse_arch("dsum:10,8");
  c.allow_non_coprime = true;
  c.p = 16;
  c.channels = {2, 4, 6, 8, 10, 12};
  c.trials = 100;
  c.input_seeds = 5;
  c.seed = kSeed;
  const auto pts = gcnn_sweep(c);
  int ok = 0;
  std::ostringstream os;
  for (const auto& pt : pts) {
    const bool b = pt.n0 == 2 * pt.channels && inside(cover_fraction(16, 2 * pt.channels).to_double(), pt.ci);
    ok += b;
    os << " N=" << pt.channels << ":" << pt.fraction << (b ? "" : "*");
  }
  return {ok >= 5, std::to_string(ok) + "/6 match f(16,2N) (need 5);" + os.str()};
}

Outcome induced() {
  struct Case {
    int g;
    std::vector<Element> h;
    bool regular;
  };
  const Case cases[] = {{6, {0, 3}, false}, {6, {0, 2, 4}, true}, {4, {0, 2}, true}};
  int ok = 0;
  std::ostringstream os;
  for (int i = 0; i < 3; ++i) {
    const auto hg = std::make_shared<const FiniteGroup>(make_subgroup(cyclic_group(cases[i].g), cases[i].h).group);
    const Representation rho = cases[i].regular ? regular_representation(hg) : trivial_representation(hg);
    const RepPtr ind = share(induced_representation(cyc(cases[i].g), cases[i].h, rho));
    const int a = fixed_subspace_dim(*ind);
    const int b = fixed_subspace_dim(rho);
    const auto ea = empirical_fraction(ind, 8, 200, derive_seed(kSeed, kInstanceStream, 70 + i));
    const auto eb = empirical_fraction(share(rho), 8, 200, derive_seed(kSeed, kInstanceStream, 80 + i));
    const bool pass = a == b && overlap(ea.wilson_ci_95, eb.wilson_ci_95);
    ok += pass;
    os << " Z" << cases[i].g << "/|H|=" << cases[i].h.size() << ": N0 " << a << "=" << b << ", " << ea.fraction << " vs "
       << eb.fraction << (pass ? "" : "*");
  }
  return {ok == 3, std::to_string(ok) + "/3 cases;" + os.str()};
}

Outcome vc_dimension_check() {
  int ok = 0;
  const ExactFraction one(BigInt(1), BigInt(1));
  for (int n0 = 2; n0 <= 8; ++n0) {
    const RepPtr rep = regular_copies(3, n0);
    int seeds = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const std::uint64_t seed = derive_seed(kSeed, kAnchorStream, 1000 + n0 * 10 + s);
      const bool shattered = brute_force_fraction(orbit_groups(sample_orbit_instance(rep, n0, seed))) == one;
      const bool broken = brute_force_fraction(orbit_groups(sample_orbit_instance(rep, n0 + 1, seed))) < one;
      seeds += shattered && broken;
    }
    ok += seeds == 10;
  }
  return {ok == 7, std::to_string(ok) + "/7 values of N0 shattered at P=N0 and not at P=N0+1 for 10/10 seeds"};
}

Outcome structural() {
  SuiteOptions o;
  o.seed = kSeed;
  const auto results = run_suites("all", o);
  int ok = 0;
  std::string failed;
  for (const auto& r : results) {
    ok += r.pass;
    if (!r.pass) failed += " " + r.name;
  }
  std::ostringstream os;
  os << ok << "/" << results.size() << " suites green in verify --suite all";
  if (!failed.empty()) os << "; failing:" << failed;
  return {ok == static_cast<int>(results.size()), os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Cover-formula oracle equivalence", cover_oracle},
      {"Lemma-1 equivalence", lemma_one},
      {"Theorem-1 capacity, pure representations", theorem_one},
      {"Random conv curve and max-pool sandwich", figure_2a_curves},
      {"Average-pool capacity preservation", avg_pool_preservation},
      {"Direct-sum layer doubles capacity", figure_2c},
      {"Induced representations", induced},
      {"VC dimension", vc_dimension_check},
      {"Structural invariant suites", structural},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
