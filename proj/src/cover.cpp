#include "equicap/cover.hpp"

#include "equicap/error.hpp"

namespace equicap {

ExactFraction::ExactFraction(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_ == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  BigInt g;
  mpz_gcd(g.get_mpz_t(), num_.get_mpz_t(), den_.get_mpz_t());
  if (g > 1) {
    mpz_divexact(num_.get_mpz_t(), num_.get_mpz_t(), g.get_mpz_t());
    mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
  }
}

double ExactFraction::to_double() const {
  mpq_class q(num_, den_);
  return q.get_d();
}

std::string ExactFraction::str() const {
  if (den_ == 1) return num_.get_str();
  return num_.get_str() + "/" + den_.get_str();
}

std::strong_ordering operator<=>(const ExactFraction& a, const ExactFraction& b) {
  const BigInt lhs = a.num_ * b.den_;
  const BigInt rhs = b.num_ * a.den_;
  const int c = cmp(lhs, rhs);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

BigInt binomial(unsigned long n, long k) {
  if (k < 0 || static_cast<unsigned long>(k) > n) return 0;
  unsigned long kk = static_cast<unsigned long>(k);
  if (kk > n - kk) kk = n - kk;
  BigInt c = 1;
  for (unsigned long i = 1; i <= kk; ++i) {
    c *= n - kk + i;
    mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), i);
  }
  return c;
}

BigInt cover_count(long p, long n) {
  if (p < 1) throw Error(ErrorCode::kInvalidArgument, "cover_count needs P >= 1");
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "cover_count needs N >= 0");
  const unsigned long m = static_cast<unsigned long>(p - 1);
  const long top = std::min<long>(n - 1, static_cast<long>(m));
  // Walk the row of Pascal's triangle incrementally: C(m, k+1) = C(m, k) (m-k)/(k+1).
  BigInt sum = 0;
  BigInt term = 1;
  for (long k = 0; k <= top; ++k) {
    sum += term;
    term *= m - static_cast<unsigned long>(k);
    mpz_divexact_ui(term.get_mpz_t(), term.get_mpz_t(), static_cast<unsigned long>(k + 1));
  }
  return 2 * sum;
}

ExactFraction cover_fraction(long p, long n) {
  BigInt den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(p));
  return ExactFraction(cover_count(p, n), den);
}

double gardner_limit(double alpha) {
  if (alpha < 0) throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  if (alpha < 2.0) return 1.0;
  if (alpha == 2.0) return 0.5;
  return 0.0;
}

PooledBounds pooled_capacity_bounds(long p, long n0, long k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "pooling index k must be >= 1");
  return {cover_fraction(p, n0 / k), cover_fraction(p, n0)};
}

}  // namespace equicap
