#include "equicap/representation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "equicap/error.hpp"

namespace equicap {

Representation::Representation(std::shared_ptr<const FiniteGroup> group,
                               std::vector<Matrix> matrices, std::string label)
    : group_(std::move(group)), matrices_(std::move(matrices)), label_(std::move(label)) {
  if (!group_) throw Error(ErrorCode::kInvalidArgument, "representation without a group");
  if (static_cast<int>(matrices_.size()) != group_->order()) {
    throw Error(ErrorCode::kDimensionMismatch, "need one matrix per group element");
  }
  dim_ = static_cast<int>(matrices_.front().rows());
  if (dim_ < 1) throw Error(ErrorCode::kDimensionMismatch, "representation dimension must be positive");
  for (const auto& m : matrices_) {
    if (m.rows() != dim_ || m.cols() != dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "matrices must all be square of the same size");
    }
  }
}

Representation regular_representation(std::shared_ptr<const FiniteGroup> g) {
  const int n = g->order();
  std::vector<Matrix> mats;
  mats.reserve(n);
  for (Element x = 0; x < n; ++x) {
    Matrix m = Matrix::Zero(n, n);
    for (Element h = 0; h < n; ++h) m(g->mul(x, h), h) = 1.0;
    mats.push_back(std::move(m));
  }
  std::string label = "regular(" + g->label() + ")";
  return Representation(std::move(g), std::move(mats), std::move(label));
}

Representation trivial_representation(std::shared_ptr<const FiniteGroup> g, int dim) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "trivial representation needs dim >= 1");
  std::vector<Matrix> mats(g->order(), Matrix::Identity(dim, dim));
  std::string label = "trivial(" + g->label() + ")^" + std::to_string(dim);
  return Representation(std::move(g), std::move(mats), std::move(label));
}

Representation rotation_representation(int m) {
  auto g = std::make_shared<const FiniteGroup>(cyclic_group(m));
  std::vector<Matrix> mats;
  for (int k = 0; k < m; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / m;
    Matrix r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    mats.push_back(std::move(r));
  }
  return Representation(std::move(g), std::move(mats), "rotation(" + std::to_string(m) + ")");
}

Representation direct_sum(std::shared_ptr<const FiniteGroup> g, std::span<const Representation> reps,
                          std::span<const std::vector<Element>> element_maps) {
  if (reps.empty()) throw Error(ErrorCode::kInvalidArgument, "direct sum of nothing");
  if (!element_maps.empty() && element_maps.size() != reps.size()) {
    throw Error(ErrorCode::kBadHomomorphism, "one element map per summand is required");
  }
  std::vector<std::vector<Element>> maps(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (element_maps.empty() || element_maps[i].empty()) {
      if (!reps[i].group().same_table(*g)) {
        throw Error(ErrorCode::kBadHomomorphism,
                    "summand " + std::to_string(i) + " lives on a different group and no map was given");
      }
      maps[i].resize(g->order());
      for (Element x = 0; x < g->order(); ++x) maps[i][x] = x;
    } else {
      if (!is_homomorphism(*g, reps[i].group(), element_maps[i])) {
        throw Error(ErrorCode::kBadHomomorphism,
                    "element map " + std::to_string(i) + " is not a homomorphism into " +
                        reps[i].group().label());
      }
      maps[i] = element_maps[i];
    }
  }

  int total = 0;
  for (const auto& r : reps) total += r.dim();
  std::vector<Matrix> mats;
  mats.reserve(g->order());
  for (Element x = 0; x < g->order(); ++x) {
    Matrix m = Matrix::Zero(total, total);
    int off = 0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const int d = reps[i].dim();
      m.block(off, off, d, d) = reps[i].matrix(maps[i][x]);
      off += d;
    }
    mats.push_back(std::move(m));
  }
  std::ostringstream label;
  for (std::size_t i = 0; i < reps.size(); ++i) label << (i ? " + " : "") << reps[i].label();
  return Representation(std::move(g), std::move(mats), label.str());
}

Representation direct_sum(std::span<const Representation> reps) {
  if (reps.empty()) throw Error(ErrorCode::kInvalidArgument, "direct sum of nothing");
  return direct_sum(reps.front().group_ptr(), reps, {});
}

Representation augment_trivial(const Representation& rep, int extra_dims) {
  if (extra_dims < 0) throw Error(ErrorCode::kInvalidArgument, "extra_dims must be >= 0");
  if (extra_dims == 0) return rep;
  const int n = rep.dim() + extra_dims;
  std::vector<Matrix> mats;
  mats.reserve(rep.group().order());
  for (const auto& m : rep.matrices()) {
    Matrix a = Matrix::Identity(n, n);
    a.topLeftCorner(rep.dim(), rep.dim()) = m;
    mats.push_back(std::move(a));
  }
  return Representation(rep.group_ptr(), std::move(mats),
                        rep.label() + " + I_" + std::to_string(extra_dims));
}

Representation cyclic_direct_sum_representation(std::span<const int> moduli) {
  int m = 1;
  for (int mi : moduli) m *= mi;
  auto g = std::make_shared<const FiniteGroup>(cyclic_group(m));
  std::vector<Representation> reps;
  std::vector<std::vector<Element>> maps;
  for (int mi : moduli) {
    reps.push_back(regular_representation(std::make_shared<const FiniteGroup>(cyclic_group(mi))));
    const int from[] = {m};
    const int to[] = {mi};
    maps.push_back(cyclic_reduction_map(from, to));
  }
  return direct_sum(std::move(g), reps, maps);
}

Matrix group_average(const Representation& rep) {
  Matrix avg = Matrix::Zero(rep.dim(), rep.dim());
  for (const auto& m : rep.matrices()) avg += m;
  return avg / static_cast<double>(rep.group().order());
}

double homomorphism_residual(const Representation& rep) {
  const FiniteGroup& g = rep.group();
  const int n = g.order();
  std::vector<Element> right(n);
  for (Element b = 0; b < n; ++b) right[b] = b;
  if (n > 64) {
    // Sample the right factor; the left factor stays exhaustive.
    std::mt19937_64 rng(0x7a11u);
    std::shuffle(right.begin(), right.end(), rng);
    right.resize(64);
  }
  double worst = 0.0;
  for (Element a = 0; a < n; ++a) {
    for (Element b : right) {
      const Matrix diff = rep.matrix(g.mul(a, b)) - rep.matrix(a) * rep.matrix(b);
      worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

std::vector<double> character(const Representation& rep) {
  std::vector<double> chi;
  chi.reserve(rep.group().order());
  for (const auto& m : rep.matrices()) chi.push_back(m.trace());
  return chi;
}

int numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return static_cast<int>((s.array() > tol).count());
}

Matrix fixed_subspace_basis(const Representation& rep) {
  Eigen::BDCSVD<Matrix> svd(group_average(rep), Eigen::ComputeThinU);
  const int r = static_cast<int>((svd.singularValues().array() > 1e-8).count());
  return svd.matrixU().leftCols(r);
}

int fixed_subspace_dim(const Representation& rep) {
  const auto chi = character(rep);
  double avg = 0.0;
  for (double c : chi) avg += c;
  avg /= static_cast<double>(chi.size());
  const double rounded = std::round(avg);
  if (std::abs(avg - rounded) > 1e-6) {
    std::ostringstream os;
    os << "character average " << avg << " of " << rep.label() << " is not an integer";
    throw Error(ErrorCode::kInconsistentRepresentation, os.str());
  }
  const int by_character = static_cast<int>(rounded);
  const int by_rank = numerical_rank(group_average(rep), 1e-8);
  if (by_character != by_rank) {
    std::ostringstream os;
    os << "character average gives N0=" << by_character << " but rank(<pi>)=" << by_rank
       << " for " << rep.label();
    throw Error(ErrorCode::kInconsistentRepresentation, os.str());
  }
  return by_character;
}

Representation restrict_to_subgroup(const Representation& rep, std::vector<Element> subgroup) {
  Subgroup h = make_subgroup(rep.group(), std::move(subgroup));
  std::vector<Matrix> mats;
  mats.reserve(h.embedding.size());
  for (Element x : h.embedding) mats.push_back(rep.matrix(x));
  auto group = std::make_shared<const FiniteGroup>(std::move(h.group));
  return Representation(group, std::move(mats), rep.label() + "|" + group->label());
}

Representation induced_representation(std::shared_ptr<const FiniteGroup> g,
                                      std::vector<Element> subgroup, const Representation& rho) {
  const Subgroup h = make_subgroup(*g, subgroup);
  if (!rho.group().same_table(h.group)) {
    throw Error(ErrorCode::kBadHomomorphism,
                "rho must be a representation of the subgroup " + h.group.label());
  }
  const CosetDecomposition cd = coset_decompose(*g, h.embedding);
  std::vector<int> local(g->order(), -1);
  for (std::size_t i = 0; i < h.embedding.size(); ++i) local[h.embedding[i]] = static_cast<int>(i);

  const int k = static_cast<int>(cd.index());
  const int d = rho.dim();
  std::vector<Matrix> mats;
  mats.reserve(g->order());
  for (Element x = 0; x < g->order(); ++x) {
    Matrix m = Matrix::Zero(k * d, k * d);
    for (int i = 0; i < k; ++i) {
      const Element y = g->mul(x, cd.representatives[i]);
      const int j = cd.coset_of[y];
      m.block(j * d, i * d, d, d) = rho.matrix(local[cd.subgroup_part[y]]);
    }
    mats.push_back(std::move(m));
  }
  Representation out(g, std::move(mats), "Ind(" + rho.label() + ")");
  const double residual = homomorphism_residual(out);
  if (residual > 1e-10) {
    std::ostringstream os;
    os << "induced representation fails the homomorphism check (residual " << residual << ")";
    throw Error(ErrorCode::kInconsistentRepresentation, os.str());
  }
  return out;
}

IrrepDecomposition irrep_decompose_cyclic(int m) {
  if (m < 1) throw Error(ErrorCode::kInvalidOrder, "cyclic group order must be >= 1");
  IrrepDecomposition dec;
  dec.basis = Matrix::Zero(m, m);
  int col = 0;
  dec.basis.col(col++).setConstant(1.0 / std::sqrt(double(m)));
  dec.blocks.push_back({IrrepKind::kTrivial, 1, 0});
  const double scale = std::sqrt(2.0 / m);
  for (int k = 1; 2 * k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      const double a = 2.0 * std::numbers::pi * k * j / m;
      dec.basis(j, col) = scale * std::cos(a);
      dec.basis(j, col + 1) = scale * std::sin(a);
    }
    col += 2;
    dec.blocks.push_back({IrrepKind::kRotation, 2, k});
  }
  if (m % 2 == 0) {
    for (int j = 0; j < m; ++j) dec.basis(j, col) = (j % 2 ? -1.0 : 1.0) / std::sqrt(double(m));
    ++col;
    dec.blocks.push_back({IrrepKind::kSign, 1, m / 2});
  }
  dec.trivial_count = 1;
  return dec;
}

double block_diagonal_residual(const IrrepDecomposition& dec, const Representation& rep) {
  const int n = static_cast<int>(dec.basis.rows());
  Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(n, n);
  int off = 0;
  for (const auto& b : dec.blocks) {
    mask.block(off, off, b.size, b.size).setOnes();
    off += b.size;
  }
  double worst = 0.0;
  for (const auto& m : rep.matrices()) {
    const Matrix c = dec.basis.transpose() * m * dec.basis;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!mask(i, j)) worst = std::max(worst, std::abs(c(i, j)));
  }
  return worst;
}

int so3_trivial_count(std::span<const int> irrep_orders) {
  return static_cast<int>(std::count(irrep_orders.begin(), irrep_orders.end(), 0));
}

}  // namespace equicap
