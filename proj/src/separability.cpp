#include "equicap/separability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "equicap/error.hpp"
#include "equicap/random.hpp"

namespace equicap {

namespace {

// Points closer to the origin than this (after normalizing every signed point
// to unit length) are treated as the origin itself.
constexpr double kZeroNorm = 1e-9;
// Wolfe optimality slack on unit-norm points.
constexpr double kOptimalitySlack = 1e-12;
constexpr double kPositiveWeight = 1e-14;

void check_inputs(const Matrix& points, std::span<const int> labels) {
  if (points.cols() < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one point");
  if (static_cast<Eigen::Index>(labels.size()) != points.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "one label per point is required");
  }
  for (int y : labels) {
    if (y != 1 && y != -1) throw Error(ErrorCode::kInvalidArgument, "labels must be +1 or -1");
  }
}

// Coordinates of the columns of `z` in an orthonormal basis of their span
// (inner products are preserved exactly up to rounding).
Matrix reduced_coordinates(const Matrix& z) {
  if (z.rows() <= z.cols()) return z;
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix r = qr.matrixQR().topRows(z.cols()).triangularView<Eigen::Upper>();
  return r;
}

struct MinNormResult {
  Vector lambda;
  int iterations = 0;
  bool converged = false;
};

// Affine minimizer of ||sum_i a_i y_i|| over sum a_i = 1 for the columns in
// `support`, solved as a least-squares problem in the differences y_i - y_0.
Vector affine_minimizer(const Matrix& y, const std::vector<int>& support) {
  const int k = static_cast<int>(support.size());
  Vector alpha(k);
  if (k == 1) {
    alpha(0) = 1.0;
    return alpha;
  }
  Matrix diff(y.rows(), k - 1);
  const auto y0 = y.col(support[0]);
  for (int i = 1; i < k; ++i) diff.col(i - 1) = y.col(support[i]) - y0;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(diff);
  const Vector t = cod.solve(-y0);
  alpha(0) = 1.0 - t.sum();
  alpha.tail(k - 1) = t;
  return alpha;
}

// Wolfe's minimum-norm-point algorithm over the convex hull of the columns
// of `y` (assumed unit length).
MinNormResult min_norm_point(const Matrix& y, int max_iterations) {
  const int n = static_cast<int>(y.cols());
  std::vector<int> support = {0};
  Vector weights = Vector::Ones(1);
  Vector x = y.col(0);
  std::vector<char> in_support(n, 0);
  in_support[0] = 1;

  MinNormResult result;
  for (int it = 0; it < max_iterations; ++it) {
    result.iterations = it + 1;
    const double xx = x.squaredNorm();
    if (xx < kZeroNorm * kZeroNorm) {
      result.converged = true;
      break;
    }
    const Vector g = y.transpose() * x;
    Eigen::Index j = 0;
    g.minCoeff(&j);
    if (g(j) >= xx - kOptimalitySlack || in_support[j]) {
      result.converged = true;
      break;
    }
    support.push_back(static_cast<int>(j));
    in_support[j] = 1;
    weights.conservativeResize(weights.size() + 1);
    weights(weights.size() - 1) = 0.0;

    // Minor cycles: move toward the affine minimizer, dropping points whose
    // weight reaches zero, until the minimizer lies inside the simplex.
    for (;;) {
      const Vector alpha = affine_minimizer(y, support);
      if (alpha.minCoeff() > kPositiveWeight) {
        weights = alpha;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha(i) <= kPositiveWeight) {
          const double denom = weights(i) - alpha(i);
          if (denom > 0) theta = std::min(theta, weights(i) / denom);
        }
      }
      theta = std::clamp(theta, 0.0, 1.0);
      weights = (1.0 - theta) * weights + theta * alpha;
      std::vector<int> kept;
      std::vector<double> kept_weights;
      for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights(i) > kPositiveWeight) {
          kept.push_back(support[i]);
          kept_weights.push_back(weights(i));
        } else {
          in_support[support[i]] = 0;
        }
      }
      if (kept.empty()) {
        // Cannot happen in exact arithmetic; restart from the newest point.
        kept.push_back(static_cast<int>(j));
        kept_weights.push_back(1.0);
        in_support[j] = 1;
      }
      support = std::move(kept);
      weights = Eigen::Map<Vector>(kept_weights.data(), static_cast<Eigen::Index>(kept_weights.size()));
      weights /= weights.sum();
      if (support.size() == 1) break;
    }
    x.setZero();
    for (std::size_t i = 0; i < support.size(); ++i) x += weights(static_cast<Eigen::Index>(i)) * y.col(support[i]);
  }

  result.lambda = Vector::Zero(n);
  for (std::size_t i = 0; i < support.size(); ++i) result.lambda(support[i]) = weights(static_cast<Eigen::Index>(i));
  return result;
}

}  // namespace

SeparabilityVerdict decide_separable(const Matrix& points, std::span<const int> labels,
                                     const SolverOptions& options) {
  check_inputs(points, labels);
  const Eigen::Index n = points.cols();

  Matrix signed_points = points;
  for (Eigen::Index i = 0; i < n; ++i) signed_points.col(i) *= labels[i];
  const Vector norms = signed_points.colwise().norm();

  SeparabilityVerdict verdict;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms(i) > 0.0)) {
      // A point at the origin can never be strictly separated.
      verdict.certificate = Vector::Zero(n);
      verdict.certificate(i) = 1.0;
      return verdict;
    }
  }

  // Positive rescaling of each signed point does not change separability.
  Matrix unit = signed_points;
  for (Eigen::Index i = 0; i < n; ++i) unit.col(i) /= norms(i);

  const int budget = options.max_iterations > 0 ? options.max_iterations
                                                 : 200 * static_cast<int>(n) + 1000;
  const MinNormResult mn = min_norm_point(reduced_coordinates(unit), budget);
  verdict.iterations = mn.iterations;
  if (!mn.converged) {
    throw Error(ErrorCode::kUndecided,
                "min-norm solver hit its budget of " + std::to_string(budget) + " iterations");
  }

  const Vector x = unit * mn.lambda;
  const double xnorm = x.norm();
  if (xnorm > kZeroNorm) {
    const Vector margins = signed_points.transpose() * x;
    const double min_margin = margins.minCoeff();
    if (min_margin > 0.0) {
      verdict.separable = true;
      verdict.witness_w = x / min_margin;
      verdict.min_margin = min_margin / xnorm;
      return verdict;
    }
  } else {
    // Convert weights on unit points into weights on the original points.
    Vector lambda = mn.lambda.cwiseQuotient(norms);
    lambda /= lambda.sum();
    const double residual = (signed_points * lambda).norm();
    if (residual < options.certificate_tol) {
      verdict.certificate = std::move(lambda);
      return verdict;
    }
  }
  std::ostringstream os;
  os << "min-norm point has norm " << xnorm << " but yields neither a witness nor a certificate";
  throw Error(ErrorCode::kUndecided, os.str());
}

std::string check_verdict(const Matrix& points, std::span<const int> labels,
                          const SeparabilityVerdict& verdict, const SolverOptions& options) {
  check_inputs(points, labels);
  const Eigen::Index n = points.cols();
  std::ostringstream os;
  if (verdict.separable) {
    if (verdict.witness_w.size() != points.rows()) return "witness has the wrong dimension";
    if (verdict.certificate.size() != 0) return "separable verdict carries a certificate";
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = labels[i] * verdict.witness_w.dot(points.col(i));
      if (m < 1.0 - options.margin_tol) {
        os << "witness margin " << m << " at point " << i;
        return os.str();
      }
    }
    return {};
  }
  if (verdict.witness_w.size() != 0) return "non-separable verdict carries a witness";
  if (verdict.certificate.size() != n) return "certificate has the wrong length";
  if (verdict.certificate.minCoeff() < 0.0) return "certificate has a negative coefficient";
  if (std::abs(verdict.certificate.sum() - 1.0) > 1e-9) return "certificate does not sum to 1";
  Vector combo = Vector::Zero(points.rows());
  for (Eigen::Index i = 0; i < n; ++i) combo += verdict.certificate(i) * labels[i] * points.col(i);
  if (combo.norm() >= options.certificate_tol) {
    os << "certificate residual " << combo.norm();
    return os.str();
  }
  return {};
}

bool logistic_probe_separable(const Matrix& points, std::span<const int> labels) {
  check_inputs(points, labels);
  constexpr double kInverseRegularization = 1e8;
  constexpr int kMaxIterations = 500;
  constexpr double kTolerance = 1e-18;

  Matrix z = points;
  for (Eigen::Index i = 0; i < z.cols(); ++i) z.col(i) *= labels[i];
  z = reduced_coordinates(z);
  const Eigen::Index d = z.rows();

  auto loss = [&](const Vector& w) {
    const Vector m = z.transpose() * w;
    double l = 0.5 * w.squaredNorm() / kInverseRegularization;
    for (Eigen::Index i = 0; i < m.size(); ++i) l += std::max(-m(i), 0.0) + std::log1p(std::exp(-std::abs(m(i))));
    return l;
  };

  Vector w = Vector::Zero(d);
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vector m = z.transpose() * w;
    if (m.minCoeff() > 0.0) return true;
    Vector grad = w / kInverseRegularization;
    Matrix hess = Matrix::Identity(d, d) / kInverseRegularization;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(m(i)));  // sigma(-m)
      grad -= s * z.col(i);
      hess.noalias() += s * (1.0 - s) * z.col(i) * z.col(i).transpose();
    }
    if (grad.norm() < kTolerance) break;
    const Vector step = hess.ldlt().solve(-grad);
    const double base = loss(w);
    double t = 1.0;
    while (t > 1e-12 && loss(w + t * step) > base + 1e-4 * t * grad.dot(step)) t *= 0.5;
    if (t <= 1e-12) break;
    w += t * step;
  }
  return (z.transpose() * w).minCoeff() > 0.0;
}

// --- Orbits -----------------------------------------------------------------

OrbitSet::OrbitSet(std::shared_ptr<const Representation> rep, Matrix anchors, Labels labels)
    : rep_(std::move(rep)), anchors_(std::move(anchors)), labels_(std::move(labels)) {
  if (!rep_) throw Error(ErrorCode::kInvalidArgument, "orbit set without a representation");
  if (anchors_.rows() != rep_->dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "anchors must live in the representation space");
  }
  if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != anchors_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "one label per anchor is required");
  }
}

Vector OrbitSet::point(int mu, Element g) const { return rep_->matrix(g) * anchors_.col(mu); }

Matrix OrbitSet::points() const {
  const int order = rep_->group().order();
  Matrix out(rep_->dim(), static_cast<Eigen::Index>(size()) * order);
  for (int mu = 0; mu < size(); ++mu)
    for (Element g = 0; g < order; ++g) out.col(static_cast<Eigen::Index>(mu) * order + g) = point(mu, g);
  return out;
}

Labels OrbitSet::point_labels() const {
  const int order = rep_->group().order();
  Labels out;
  out.reserve(labels_.size() * order);
  for (int y : labels_) out.insert(out.end(), order, y);
  return out;
}

Matrix centroid_reduce(const OrbitSet& orbits) { return group_average(orbits.rep()) * orbits.anchors(); }

Matrix fixed_coordinates(const OrbitSet& orbits) {
  return fixed_subspace_basis(orbits.rep()).transpose() * centroid_reduce(orbits);
}

Vector separating_w_lift(const Vector& w_centroid, const Representation& rep) {
  if (w_centroid.size() != rep.dim()) throw Error(ErrorCode::kDimensionMismatch, "weight dimension");
  return group_average(rep).transpose() * w_centroid;
}

OrbitSet sample_orbit_instance(std::shared_ptr<const Representation> rep, int p, std::uint64_t seed) {
  if (p < 1) throw Error(ErrorCode::kInvalidArgument, "need P >= 1 anchors");
  const int n = rep->dim();
  return OrbitSet(std::move(rep), gaussian_matrix(n, p, seed));
}

// --- Monte Carlo estimation -------------------------------------------------

WilsonInterval wilson_interval(long k, long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  WilsonInterval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Guard the endpoints against rounding at k = 0 and k = n.
  ci.lo = std::min(ci.lo, phat);
  ci.hi = std::max(ci.hi, phat);
  return ci;
}

Labels sample_dichotomy(int p, std::uint64_t seed, std::uint64_t trial) {
  Rng rng(derive_seed(seed, kDichotomyStream, trial));
  std::bernoulli_distribution coin(0.5);
  Labels y(p);
  for (int& v : y) v = coin(rng) ? 1 : -1;
  return y;
}

namespace {

Matrix concatenate(const std::vector<Matrix>& groups, const Labels& group_labels, Labels& point_labels) {
  Eigen::Index total = 0;
  for (const auto& g : groups) total += g.cols();
  Matrix out(groups.front().rows(), total);
  point_labels.clear();
  point_labels.reserve(total);
  Eigen::Index col = 0;
  for (std::size_t mu = 0; mu < groups.size(); ++mu) {
    out.middleCols(col, groups[mu].cols()) = groups[mu];
    col += groups[mu].cols();
    point_labels.insert(point_labels.end(), groups[mu].cols(), group_labels[mu]);
  }
  return out;
}

bool decide(const Matrix& pts, const Labels& labels, Probe probe, const SolverOptions& solver) {
  if (probe == Probe::kLogistic) return logistic_probe_separable(pts, labels);
  const SeparabilityVerdict v = decide_separable(pts, labels, solver);
  const std::string problem = check_verdict(pts, labels, v, solver);
  if (!problem.empty()) throw Error(ErrorCode::kUndecided, "verdict failed re-check: " + problem);
  return v.separable;
}

void check_groups(const std::vector<Matrix>& groups) {
  if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "need at least one anchor");
  for (const auto& g : groups) {
    if (g.rows() != groups.front().rows()) throw Error(ErrorCode::kDimensionMismatch, "anchor point dimensions differ");
    if (g.cols() < 1) throw Error(ErrorCode::kInvalidArgument, "every anchor needs at least one point");
  }
}

}  // namespace

CapacityEstimate estimate_fraction(const std::vector<Matrix>& groups, int n0, int trials,
                                   std::uint64_t seed, const EstimateOptions& options) {
  check_groups(groups);
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one trial");
  const int p = static_cast<int>(groups.size());

  std::vector<char> outcome(trials, 0);
  parallel_for(
      trials,
      [&](int t) {
        const Labels y = sample_dichotomy(p, seed, static_cast<std::uint64_t>(t));
        Labels point_labels;
        const Matrix pts = concatenate(groups, y, point_labels);
        try {
          outcome[t] = decide(pts, point_labels, options.probe, options.solver) ? 1 : 0;
        } catch (const Error& e) {
          std::ostringstream os;
          os << "trial " << t << " (seed " << seed << ", P=" << p << "): " << e.what();
          throw Error(e.code(), os.str());
        }
      },
      options.workers);

  CapacityEstimate est;
  est.p = p;
  est.n0 = n0;
  est.trials = trials;
  est.separable_count = static_cast<int>(std::count(outcome.begin(), outcome.end(), 1));
  est.fraction = static_cast<double>(est.separable_count) / trials;
  est.wilson_ci_95 = wilson_interval(est.separable_count, trials);
  est.seed = seed;
  est.theory = cover_fraction(p, n0);
  return est;
}

CapacityEstimate empirical_fraction(std::shared_ptr<const Representation> rep, int p, int trials,
                                    std::uint64_t seed, const EstimateOptions& options) {
  if (p < 2) throw Error(ErrorCode::kInvalidArgument, "empirical_fraction needs P >= 2");
  const int n0 = fixed_subspace_dim(*rep);
  const OrbitSet orbits = sample_orbit_instance(rep, p, derive_seed(seed, kAnchorStream, 0));
  std::vector<Matrix> groups;
  groups.reserve(p);
  if (options.raw_orbits) {
    const int order = rep->group().order();
    const Matrix all = orbits.points();
    for (int mu = 0; mu < p; ++mu) groups.push_back(all.middleCols(static_cast<Eigen::Index>(mu) * order, order));
  } else {
    groups = singleton_groups(fixed_coordinates(orbits));
  }
  return estimate_fraction(groups, n0, trials, seed, options);
}

ExactFraction brute_force_fraction(const std::vector<Matrix>& groups, const SolverOptions& options) {
  check_groups(groups);
  const int p = static_cast<int>(groups.size());
  if (p > 20) throw Error(ErrorCode::kInvalidArgument, "brute force enumeration is limited to P <= 20");
  const std::uint64_t total = 1ull << p;
  long separable = 0;
  Labels y(p);
  Labels point_labels;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (int mu = 0; mu < p; ++mu) y[mu] = (mask >> mu) & 1 ? 1 : -1;
    const Matrix pts = concatenate(groups, y, point_labels);
    if (decide(pts, point_labels, Probe::kLp, options)) ++separable;
  }
  return ExactFraction(BigInt(separable), BigInt(static_cast<unsigned long>(total)));
}

ExactFraction brute_force_fraction(const Matrix& points, const SolverOptions& options) {
  return brute_force_fraction(singleton_groups(points), options);
}

ExactFraction brute_force_fraction(const OrbitSet& orbits, const SolverOptions& options) {
  return brute_force_fraction(fixed_coordinates(orbits), options);
}

std::vector<Matrix> singleton_groups(const Matrix& points) {
  std::vector<Matrix> groups;
  groups.reserve(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) groups.emplace_back(points.col(i));
  return groups;
}

std::optional<std::vector<int>> general_position_violation(const Matrix& points, int dim, double tol) {
  const int p = static_cast<int>(points.cols());
  const int s = std::min(p, dim);
  if (s <= 0) return std::nullopt;
  const double subsets = std::exp(std::lgamma(p + 1.0) - std::lgamma(s + 1.0) - std::lgamma(p - s + 1.0));
  if (subsets > 2e6) {
    throw Error(ErrorCode::kInvalidArgument, "too many subsets to check general position exhaustively");
  }
  const double scale = std::max(points.colwise().norm().maxCoeff(), std::numeric_limits<double>::min());
  std::vector<int> idx(s);
  std::iota(idx.begin(), idx.end(), 0);
  Matrix sub(points.rows(), s);
  for (;;) {
    for (int i = 0; i < s; ++i) sub.col(i) = points.col(idx[i]);
    Eigen::JacobiSVD<Matrix> svd(sub);
    const auto& sv = svd.singularValues();
    if (sv.size() < s || sv(s - 1) <= tol * scale) return idx;
    int i = s - 1;
    while (i >= 0 && idx[i] == p - s + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int k = i + 1; k < s; ++k) idx[k] = idx[k - 1] + 1;
  }
  return std::nullopt;
}

}  // namespace equicap
