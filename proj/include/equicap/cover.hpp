#pragma once

#include <compare>
#include <string>

#include <gmpxx.h>

namespace equicap {

using BigInt = mpz_class;

// Reduced rational with positive denominator.
class ExactFraction {
 public:
  ExactFraction() : num_(0), den_(1) {}
  ExactFraction(BigInt num, BigInt den);

  const BigInt& numerator() const noexcept { return num_; }
  const BigInt& denominator() const noexcept { return den_; }

  // Plotting view only; all decisions use the exact value.
  double to_double() const;
  // "num/den", or "num" when the denominator is 1.
  std::string str() const;

  friend bool operator==(const ExactFraction&, const ExactFraction&) = default;
  friend std::strong_ordering operator<=>(const ExactFraction& a, const ExactFraction& b);

 private:
  BigInt num_;
  BigInt den_;
};

// Binomial C(n, k) by multiplicative accumulation; 0 when k > n or k < 0.
BigInt binomial(unsigned long n, long k);

// Number of homogeneously separable dichotomies of P general-position points
// in N dimensions: 2 * sum_{k<N} C(P-1, k).
BigInt cover_count(long p, long n);

// cover_count / 2^P as an exact reduced fraction.
ExactFraction cover_fraction(long p, long n);

// Thermodynamic limit of cover_fraction(alpha N, N): 1 below alpha = 2,
// 1/2 at alpha = 2, 0 above.
double gardner_limit(double alpha);

// The largest P for which some anchor placement realizes every dichotomy
// equals the fixed-subspace dimension.
constexpr long vc_dimension(long n0) { return n0; }

struct PooledBounds {
  ExactFraction lower;  // f(P, floor(N0 / k))
  ExactFraction upper;  // f(P, N0)
};

// Separable-fraction bounds for a G-equivariant code with N0 trivial
// dimensions after nonlinear pooling to a subgroup of index k.
PooledBounds pooled_capacity_bounds(long p, long n0, long k);

}  // namespace equicap
