#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "equicap/cover.hpp"
#include "equicap/representation.hpp"

namespace equicap {

// Labels are +1 / -1.
using Labels = std::vector<int>;

struct SeparabilityVerdict {
  bool separable = false;
  // Present iff separable; scaled so that min_i y_i <w, x_i> = 1.
  Vector witness_w;
  // min_i y_i <w, x_i> / ||w|| for the witness (0 when non-separable).
  double min_margin = 0.0;
  // Present iff non-separable: lambda >= 0, sum 1, sum_i lambda_i y_i x_i ~ 0.
  Vector certificate;
  int iterations = 0;
};

struct SolverOptions {
  double margin_tol = 1e-7;
  double certificate_tol = 1e-7;
  // Major-cycle budget; 0 picks 200 * points + 1000.
  int max_iterations = 0;
};

// Decides whether some w satisfies y_i <w, x_i> > 0 for every column x_i of
// `points`. Always returns a verified witness or a verified convex-hull
// certificate; throws kUndecided if neither can be produced within budget.
SeparabilityVerdict decide_separable(const Matrix& points, std::span<const int> labels,
                                     const SolverOptions& options = {});

// Independent re-check of a verdict's witness or certificate. Returns an
// empty string when valid, else a description of the failure.
std::string check_verdict(const Matrix& points, std::span<const int> labels,
                          const SeparabilityVerdict& verdict, const SolverOptions& options = {});

// Unregularized-ish logistic regression probe (C = 1e8, no intercept,
// at most 500 Newton steps). True iff the fit classifies every point
// correctly. Kept for comparison with logistic-regression protocols.
bool logistic_probe_separable(const Matrix& points, std::span<const int> labels);

enum class Probe { kLp, kLogistic };

// --- Orbits -----------------------------------------------------------------

class OrbitSet {
 public:
  OrbitSet(std::shared_ptr<const Representation> rep, Matrix anchors, Labels labels = {});

  const Representation& rep() const noexcept { return *rep_; }
  const std::shared_ptr<const Representation>& rep_ptr() const noexcept { return rep_; }
  const Matrix& anchors() const noexcept { return anchors_; }
  const Labels& labels() const noexcept { return labels_; }
  int size() const noexcept { return static_cast<int>(anchors_.cols()); }

  OrbitSet with_labels(Labels labels) const { return OrbitSet(rep_, anchors_, std::move(labels)); }

  // pi(g) r^mu.
  Vector point(int mu, Element g) const;
  // All P |G| orbit points, orbit-major (column mu * |G| + g).
  Matrix points() const;
  // Labels expanded to match points().
  Labels point_labels() const;

 private:
  std::shared_ptr<const Representation> rep_;
  Matrix anchors_;
  Labels labels_;
};

// <pi> r^mu for every anchor (columns).
Matrix centroid_reduce(const OrbitSet& orbits);

// Centroids expressed in an orthonormal basis of the fixed subspace (N0 x P).
// Separability is unchanged, and with N0 = 0 every centroid is exactly zero.
Matrix fixed_coordinates(const OrbitSet& orbits);

// <pi>^T w: lifts a separator of the centroids to one of the full orbits.
Vector separating_w_lift(const Vector& w_centroid, const Representation& rep);

// P i.i.d. standard normal anchors in R^N; deterministic in the seed.
OrbitSet sample_orbit_instance(std::shared_ptr<const Representation> rep, int p, std::uint64_t seed);

// --- Monte Carlo estimation -------------------------------------------------

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for k successes in n trials.
WilsonInterval wilson_interval(long k, long n, double z = 1.959963984540054);

struct CapacityEstimate {
  int p = 0;
  int n0 = 0;
  int trials = 0;
  int separable_count = 0;
  double fraction = 0.0;
  WilsonInterval wilson_ci_95;
  std::uint64_t seed = 0;
  ExactFraction theory;
};

// Uniform labels in {+1,-1}^P for dichotomy `trial` of a run seeded by `seed`.
Labels sample_dichotomy(int p, std::uint64_t seed, std::uint64_t trial);

struct EstimateOptions {
  Probe probe = Probe::kLp;
  bool raw_orbits = false;  // representation route: solve full orbits instead of centroids
  int workers = 0;          // 0 = worker_count()
  SolverOptions solver;
};

// One point set per anchor: the columns of groups[mu] all carry label y^mu.
// Estimates the separable fraction over `trials` random dichotomies; the
// result is independent of the worker count.
CapacityEstimate estimate_fraction(const std::vector<Matrix>& groups, int n0, int trials,
                                   std::uint64_t seed, const EstimateOptions& options = {});

// Samples one Gaussian anchor set for `rep` and estimates the separable
// fraction of its orbits (centroid-reduced unless options.raw_orbits).
CapacityEstimate empirical_fraction(std::shared_ptr<const Representation> rep, int p, int trials,
                                    std::uint64_t seed, const EstimateOptions& options = {});

// Exact fraction over all 2^P dichotomies (P <= 20) of the given point groups.
ExactFraction brute_force_fraction(const std::vector<Matrix>& groups,
                                   const SolverOptions& options = {});
// Single points (columns).
ExactFraction brute_force_fraction(const Matrix& points, const SolverOptions& options = {});
// Centroids of a sampled orbit instance.
ExactFraction brute_force_fraction(const OrbitSet& orbits, const SolverOptions& options = {});

// Splits the columns of `points` into single-column groups.
std::vector<Matrix> singleton_groups(const Matrix& points);

// First subset of at most `dim` columns that is linearly dependent (relative
// singular-value tolerance `tol`), or nullopt when the columns are in general
// position in a `dim`-dimensional space. Enumerates subsets, so keep
// C(P, min(P, dim)) small.
std::optional<std::vector<int>> general_position_violation(const Matrix& points, int dim,
                                                           double tol = 1e-9);

}  // namespace equicap
