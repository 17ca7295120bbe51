#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace equicap {

// Groups are dense element indices 0..order-1 with an explicit
// multiplication table. Tables stay small enough (|G| up to a few thousand)
// that O(|G|^2) storage is the simplest exact representation.
using Element = int;

class FiniteGroup {
 public:
  // Builds a group from a row-major table. Only the shape and index range
  // are checked here; use verify_group_axioms for the algebra. Inverses that
  // do not exist are stored as -1.
  static FiniteGroup from_table(std::string label, std::vector<Element> mul_table,
                                Element identity);

  int order() const noexcept { return order_; }
  Element identity() const noexcept { return identity_; }
  const std::string& label() const noexcept { return label_; }

  Element mul(Element a, Element b) const {
    return table_[static_cast<std::size_t>(a) * order_ + b];
  }
  Element inverse(Element g) const { return inverse_[g]; }

  std::span<const Element> mul_table() const noexcept { return table_; }

  // Smallest k >= 1 with g^k = e, or 0 if the powers of g never reach e.
  int element_order(Element g) const;

  bool same_table(const FiniteGroup& other) const noexcept {
    return order_ == other.order_ && identity_ == other.identity_ && table_ == other.table_;
  }

 private:
  FiniteGroup() = default;

  std::string label_;
  int order_ = 0;
  Element identity_ = 0;
  std::vector<Element> table_;
  std::vector<Element> inverse_;
};

// Z_m as {0..m-1} under addition mod m.
FiniteGroup cyclic_group(int m);

// Componentwise product; element (a, b) has index a * |G2| + b.
FiniteGroup direct_product(const FiniteGroup& g1, const FiniteGroup& g2);

// Z_{m1} x Z_{m2} x ... with mixed-radix indexing (first factor most significant).
FiniteGroup cyclic_product(std::span<const int> moduli);

struct AxiomViolation {
  std::string axiom;  // "closure", "identity", "inverse", "associativity"
  std::vector<Element> witness;
};

struct AxiomReport {
  std::vector<AxiomViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Exhaustive associativity check up to order 64, 10000 seeded random triples
// above that.
AxiomReport verify_group_axioms(const FiniteGroup& g);

// A subgroup H realized as a group in its own right. Element i of `group`
// corresponds to element embedding[i] of the parent. Elements are sorted so
// the embedding is increasing.
struct Subgroup {
  FiniteGroup group;
  std::vector<Element> embedding;
};

// Throws kNotASubgroup (naming the violating pair) unless `elements` is
// closed under multiplication and inversion.
Subgroup make_subgroup(const FiniteGroup& g, std::vector<Element> elements);

struct CosetDecomposition {
  std::vector<Element> subgroup_elements;  // sorted
  std::vector<Element> representatives;    // minimal index per left coset, ascending
  std::vector<int> coset_of;               // element -> index into representatives
  std::vector<Element> subgroup_part;      // element g -> h with g = r * h

  std::size_t index() const noexcept { return representatives.size(); }
};

// Left cosets gH with the unique factorization g = r * h.
CosetDecomposition coset_decompose(const FiniteGroup& g, std::vector<Element> subgroup_elements);

// True iff map[mul(a, b)] == mul(map[a], map[b]) for every pair.
bool is_homomorphism(const FiniteGroup& from, const FiniteGroup& to, std::span<const Element> map);

// Reduction map Z_{a1} x ... -> Z_{b1} x ... with b_i | a_i, reducing each
// coordinate modulo b_i. Throws kBadHomomorphism when some b_i does not divide a_i.
std::vector<Element> cyclic_reduction_map(std::span<const int> from_moduli,
                                          std::span<const int> to_moduli);

}  // namespace equicap
