#include "equicap/group.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "equicap/error.hpp"

namespace equicap {

FiniteGroup FiniteGroup::from_table(std::string label, std::vector<Element> mul_table,
                                    Element identity) {
  if (mul_table.empty()) throw Error(ErrorCode::kInvalidOrder, "empty multiplication table");
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(double(mul_table.size()))));
  if (n * n != mul_table.size()) {
    throw Error(ErrorCode::kInvalidArgument, "multiplication table is not square");
  }
  const int order = static_cast<int>(n);
  for (std::size_t i = 0; i < mul_table.size(); ++i) {
    if (mul_table[i] < 0 || mul_table[i] >= order) {
      std::ostringstream os;
      os << "closure: table entry (" << i / n << ", " << i % n << ") = " << mul_table[i]
         << " is not an element";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
  }
  if (identity < 0 || identity >= order) {
    throw Error(ErrorCode::kInvalidArgument, "identity index out of range");
  }

  FiniteGroup g;
  g.label_ = std::move(label);
  g.order_ = order;
  g.identity_ = identity;
  g.table_ = std::move(mul_table);
  g.inverse_.assign(n, -1);
  for (Element a = 0; a < order; ++a) {
    for (Element b = 0; b < order; ++b) {
      if (g.mul(a, b) == identity && g.mul(b, a) == identity) {
        g.inverse_[a] = b;
        break;
      }
    }
  }
  return g;
}

int FiniteGroup::element_order(Element g) const {
  Element x = g;
  for (int k = 1; k <= order_; ++k) {
    if (x == identity_) return k;
    x = mul(x, g);
  }
  return 0;
}

FiniteGroup cyclic_group(int m) {
  if (m < 1) throw Error(ErrorCode::kInvalidOrder, "cyclic group order must be >= 1, got " + std::to_string(m));
  std::vector<Element> table(static_cast<std::size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) table[static_cast<std::size_t>(a) * m + b] = (a + b) % m;
  return FiniteGroup::from_table("Z_" + std::to_string(m), std::move(table), 0);
}

FiniteGroup direct_product(const FiniteGroup& g1, const FiniteGroup& g2) {
  const int n1 = g1.order();
  const int n2 = g2.order();
  const int n = n1 * n2;
  std::vector<Element> table(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Element first = g1.mul(a / n2, b / n2);
      const Element second = g2.mul(a % n2, b % n2);
      table[static_cast<std::size_t>(a) * n + b] = first * n2 + second;
    }
  }
  return FiniteGroup::from_table(g1.label() + " x " + g2.label(), std::move(table),
                                 g1.identity() * n2 + g2.identity());
}

FiniteGroup cyclic_product(std::span<const int> moduli) {
  if (moduli.empty()) throw Error(ErrorCode::kInvalidOrder, "cyclic_product needs at least one factor");
  FiniteGroup g = cyclic_group(moduli[0]);
  for (std::size_t i = 1; i < moduli.size(); ++i) g = direct_product(g, cyclic_group(moduli[i]));
  return g;
}

AxiomReport verify_group_axioms(const FiniteGroup& g) {
  AxiomReport report;
  const int n = g.order();
  const Element e = g.identity();

  for (Element a = 0; a < n; ++a) {
    if (g.mul(e, a) != a || g.mul(a, e) != a) {
      report.violations.push_back({"identity", {e, a}});
      break;
    }
  }
  for (Element a = 0; a < n; ++a) {
    if (g.inverse(a) < 0) {
      report.violations.push_back({"inverse", {a}});
      break;
    }
  }

  auto check = [&](Element a, Element b, Element c) {
    if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) {
      report.violations.push_back({"associativity", {a, b, c}});
      return false;
    }
    return true;
  };
  if (n <= 64) {
    for (Element a = 0; a < n; ++a)
      for (Element b = 0; b < n; ++b)
        for (Element c = 0; c < n; ++c)
          if (!check(a, b, c)) return report;
  } else {
    std::mt19937_64 rng(0x5eedu);
    std::uniform_int_distribution<Element> pick(0, n - 1);
    for (int t = 0; t < 10000; ++t) {
      if (!check(pick(rng), pick(rng), pick(rng))) return report;
    }
  }
  return report;
}

namespace {

std::vector<Element> validated_subgroup(const FiniteGroup& g, std::vector<Element> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  if (elements.empty()) throw Error(ErrorCode::kNotASubgroup, "empty element list");
  std::vector<char> member(g.order(), 0);
  for (Element x : elements) {
    if (x < 0 || x >= g.order()) {
      throw Error(ErrorCode::kNotASubgroup, "element " + std::to_string(x) + " is out of range");
    }
    member[x] = 1;
  }
  for (Element a : elements) {
    for (Element b : elements) {
      if (!member[g.mul(a, b)]) {
        std::ostringstream os;
        os << "not closed: " << a << " * " << b << " = " << g.mul(a, b);
        throw Error(ErrorCode::kNotASubgroup, os.str());
      }
    }
  }
  for (Element a : elements) {
    const Element inv = g.inverse(a);
    if (inv < 0 || !member[inv]) {
      throw Error(ErrorCode::kNotASubgroup, "inverse of " + std::to_string(a) + " is missing");
    }
  }
  return elements;
}

}  // namespace

Subgroup make_subgroup(const FiniteGroup& g, std::vector<Element> elements) {
  elements = validated_subgroup(g, std::move(elements));
  const int h = static_cast<int>(elements.size());
  std::vector<int> local(g.order(), -1);
  for (int i = 0; i < h; ++i) local[elements[i]] = i;
  std::vector<Element> table(static_cast<std::size_t>(h) * h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j)
      table[static_cast<std::size_t>(i) * h + j] = local[g.mul(elements[i], elements[j])];
  std::ostringstream label;
  label << "H<" << g.label() << ">{";
  for (int i = 0; i < h; ++i) label << (i ? "," : "") << elements[i];
  label << "}";
  return Subgroup{FiniteGroup::from_table(label.str(), std::move(table), local[g.identity()]),
                  std::move(elements)};
}

CosetDecomposition coset_decompose(const FiniteGroup& g, std::vector<Element> subgroup_elements) {
  CosetDecomposition cd;
  cd.subgroup_elements = validated_subgroup(g, std::move(subgroup_elements));
  cd.coset_of.assign(g.order(), -1);
  cd.subgroup_part.assign(g.order(), -1);
  // Scanning in index order makes the first unseen element the minimal
  // representative of its coset.
  for (Element r = 0; r < g.order(); ++r) {
    if (cd.coset_of[r] >= 0) continue;
    const int idx = static_cast<int>(cd.representatives.size());
    cd.representatives.push_back(r);
    for (Element h : cd.subgroup_elements) {
      const Element x = g.mul(r, h);
      cd.coset_of[x] = idx;
      cd.subgroup_part[x] = h;
    }
  }
  return cd;
}

bool is_homomorphism(const FiniteGroup& from, const FiniteGroup& to, std::span<const Element> map) {
  if (static_cast<int>(map.size()) != from.order()) return false;
  for (Element x : map)
    if (x < 0 || x >= to.order()) return false;
  for (Element a = 0; a < from.order(); ++a)
    for (Element b = 0; b < from.order(); ++b)
      if (map[from.mul(a, b)] != to.mul(map[a], map[b])) return false;
  return true;
}

std::vector<Element> cyclic_reduction_map(std::span<const int> from_moduli,
                                          std::span<const int> to_moduli) {
  if (from_moduli.size() != to_moduli.size() || from_moduli.empty()) {
    throw Error(ErrorCode::kBadHomomorphism, "factor counts differ");
  }
  for (std::size_t i = 0; i < from_moduli.size(); ++i) {
    if (to_moduli[i] < 1 || from_moduli[i] % to_moduli[i] != 0) {
      throw Error(ErrorCode::kBadHomomorphism,
                  "Z_" + std::to_string(to_moduli[i]) + " is not a quotient of Z_" +
                      std::to_string(from_moduli[i]));
    }
  }
  const int n = std::accumulate(from_moduli.begin(), from_moduli.end(), 1, std::multiplies<>());
  std::vector<Element> map(n);
  for (int x = 0; x < n; ++x) {
    int rest = x;
    std::vector<int> digits(from_moduli.size());
    for (std::size_t i = from_moduli.size(); i-- > 0;) {
      digits[i] = rest % from_moduli[i];
      rest /= from_moduli[i];
    }
    int y = 0;
    for (std::size_t i = 0; i < to_moduli.size(); ++i) y = y * to_moduli[i] + digits[i] % to_moduli[i];
    map[x] = y;
  }
  return map;
}

}  // namespace equicap
