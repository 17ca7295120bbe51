#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equicap/group.hpp"

namespace equicap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A linear representation pi: G -> GL(R^N) stored as one dense N x N matrix
// per group element. Construction checks shapes only; the algebraic
// invariants are measured by homomorphism_residual and friends.
class Representation {
 public:
  Representation(std::shared_ptr<const FiniteGroup> group, std::vector<Matrix> matrices,
                 std::string label);

  const FiniteGroup& group() const noexcept { return *group_; }
  const std::shared_ptr<const FiniteGroup>& group_ptr() const noexcept { return group_; }
  int dim() const noexcept { return dim_; }
  const std::string& label() const noexcept { return label_; }
  const Matrix& matrix(Element g) const { return matrices_[g]; }
  const std::vector<Matrix>& matrices() const noexcept { return matrices_; }

 private:
  std::shared_ptr<const FiniteGroup> group_;
  std::vector<Matrix> matrices_;
  std::string label_;
  int dim_ = 0;
};

// --- Constructors -----------------------------------------------------------

// matrix(g) sends basis vector e_h to e_{gh}. For Z_m this is the cyclic
// shift (pi(g) v)_i = v_{i-g}.
Representation regular_representation(std::shared_ptr<const FiniteGroup> g);

// Every element acts as the identity on R^dim.
Representation trivial_representation(std::shared_ptr<const FiniteGroup> g, int dim = 1);

// 2x2 rotations R(2 pi g / m) of Z_m.
Representation rotation_representation(int m);

// Block-diagonal sum over a common group `g`. element_maps[i][x] gives the
// element of reps[i]'s group that acts for x; an empty map means identity
// (the groups must then share a table). Throws kBadHomomorphism otherwise.
Representation direct_sum(std::shared_ptr<const FiniteGroup> g,
                          std::span<const Representation> reps,
                          std::span<const std::vector<Element>> element_maps = {});

// Convenience: all reps over the same group.
Representation direct_sum(std::span<const Representation> reps);

// pi(g) (+) I_extra.
Representation augment_trivial(const Representation& rep, int extra_dims);

// Regular representation of Z_{m1 * m2 * ...} realized as the direct sum of
// the regular representations of each Z_{m_i} through g -> g mod m_i.
Representation cyclic_direct_sum_representation(std::span<const int> moduli);

// --- Structural quantities --------------------------------------------------

// (1/|G|) sum_g pi(g).
Matrix group_average(const Representation& rep);

// max over (a, b) of || pi(ab) - pi(a) pi(b) ||_inf.
double homomorphism_residual(const Representation& rep);

// Character g -> Tr pi(g).
std::vector<double> character(const Representation& rep);

// Numerical rank with singular values above `tol`.
int numerical_rank(const Matrix& m, double tol = 1e-8);

// Orthonormal basis of range(<pi>), i.e. the fixed point subspace.
Matrix fixed_subspace_basis(const Representation& rep);

// N0 from the character average, cross-checked against rank(<pi>). Throws
// kInconsistentRepresentation if the average is not within 1e-6 of an
// integer or the two routes disagree.
int fixed_subspace_dim(const Representation& rep);

// --- Subgroups and induction ------------------------------------------------

// Restriction of rep to H; element i of the result's group is
// subgroup.embedding[i].
Representation restrict_to_subgroup(const Representation& rep, std::vector<Element> subgroup);

// Ind_H^G rho as block-permutation matrices. `rho` must be a representation
// of make_subgroup(*g, subgroup).group (same element ordering). The basis is
// indexed by (coset representative, rho basis vector); pi(x) sends block i to
// block j with x r_i = r_j h and applies rho(h). The homomorphism property is
// verified after construction.
Representation induced_representation(std::shared_ptr<const FiniteGroup> g,
                                      std::vector<Element> subgroup, const Representation& rho);

// --- Cyclic irreps ----------------------------------------------------------

enum class IrrepKind { kTrivial, kSign, kRotation };

struct IrrepBlock {
  IrrepKind kind;
  int size;       // 1 or 2
  int frequency;  // 0 for trivial, m/2 for sign, k for rotation
};

struct IrrepDecomposition {
  Matrix basis;  // orthogonal V; columns span the blocks in order
  std::vector<IrrepBlock> blocks;
  int trivial_count = 0;
};

// Real DFT basis block-diagonalizing regular(Z_m): the constant column,
// a (cos, sin) pair per frequency 1..floor((m-1)/2), and the alternating
// column when m is even.
IrrepDecomposition irrep_decompose_cyclic(int m);

// Largest entry of V^T pi(g) V outside the declared blocks, over all g.
double block_diagonal_residual(const IrrepDecomposition& dec, const Representation& rep);

// Number of k_m = 0 entries; N0 of an SO(3) code built from Wigner blocks of
// those orders.
int so3_trivial_count(std::span<const int> irrep_orders);

}  // namespace equicap
