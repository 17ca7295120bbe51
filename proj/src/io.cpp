#include "equicap/io.hpp"

#include <filesystem>
#include <fstream>
#include <regex>

#include "equicap/error.hpp"

namespace equicap {

using nlohmann::json;

namespace {

int parse_positive(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || v < 1) throw Error(ErrorCode::kConfig, "bad " + what + " '" + s + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.push_back(parse_positive(s.substr(start, comma - start), what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::shared_ptr<const FiniteGroup> cyc(int m) { return std::make_shared<const FiniteGroup>(cyclic_group(m)); }

}  // namespace

json group_to_json(const FiniteGroup& g) {
  const auto t = g.mul_table();
  return {{"label", g.label()},
          {"order", g.order()},
          {"mul_table", std::vector<Element>(t.begin(), t.end())},
          {"identity", g.identity()}};
}

FiniteGroup group_from_json(const json& j) {
  try {
    auto table = j.at("mul_table").get<std::vector<Element>>();
    const int order = j.at("order").get<int>();
    if (static_cast<long>(table.size()) != static_cast<long>(order) * order) {
      throw Error(ErrorCode::kConfig, "mul_table does not have order^2 entries");
    }
    FiniteGroup g = FiniteGroup::from_table(j.value("label", std::string("G")), std::move(table),
                                            j.at("identity").get<Element>());
    const AxiomReport report = verify_group_axioms(g);
    if (!report.ok()) {
      std::string w;
      for (Element e : report.violations.front().witness) w += (w.empty() ? "" : ",") + std::to_string(e);
      throw Error(ErrorCode::kConfig, "group table violates " + report.violations.front().axiom + " at (" + w + ")");
    }
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed group JSON: ") + e.what());
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json representation_to_json(const Representation& rep) {
  json mats = json::array();
  for (const Matrix& m : rep.matrices()) mats.push_back(matrix_to_json(m));
  return {{"label", rep.label()}, {"group_label", rep.group().label()}, {"dim", rep.dim()}, {"matrices", mats}};
}

Representation representation_from_json(const json& j, std::shared_ptr<const FiniteGroup> group) {
  try {
    if (j.contains("group")) group = std::make_shared<const FiniteGroup>(group_from_json(j.at("group")));
    if (!group) throw Error(ErrorCode::kConfig, "representation JSON has no group and none was supplied");
    const int dim = j.at("dim").get<int>();
    const auto& mats = j.at("matrices");
    if (static_cast<int>(mats.size()) != group->order()) {
      throw Error(ErrorCode::kConfig, "need one matrix per group element");
    }
    std::vector<Matrix> out;
    for (const auto& mj : mats) {
      Matrix m(dim, dim);
      if (static_cast<int>(mj.size()) != dim) throw Error(ErrorCode::kConfig, "matrix has the wrong number of rows");
      for (int r = 0; r < dim; ++r) {
        if (static_cast<int>(mj[r].size()) != dim) throw Error(ErrorCode::kConfig, "matrix row has the wrong length");
        for (int c = 0; c < dim; ++c) m(r, c) = mj[r][c].get<double>();
      }
      out.push_back(std::move(m));
    }
    return Representation(std::move(group), std::move(out), j.value("label", std::string("rep")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed representation JSON: ") + e.what());
  }
}

json estimate_to_json(const CapacityEstimate& est) {
  return {{"p", est.p},
          {"n0", est.n0},
          {"trials", est.trials},
          {"separable_count", est.separable_count},
          {"fraction", est.fraction},
          {"wilson_ci_95", {est.wilson_ci_95.lo, est.wilson_ci_95.hi}},
          {"seed", est.seed},
          {"theory", est.theory.str()},
          {"theory_fraction", est.theory.to_double()}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "cannot parse '" + path + "': " + e.what());
  }
}

FiniteGroup parse_group(const std::string& spec) {
  static const std::regex factor(R"(\s*Z_?(\d+)\s*)");
  static const std::regex cyclic(R"(cyclic:(\d+))");
  std::smatch m;
  if (std::regex_match(spec, m, cyclic)) return cyclic_group(parse_positive(m[1], "group order"));
  std::vector<int> moduli;
  std::size_t start = 0;
  bool ok = !spec.empty();
  while (ok) {
    const std::size_t x = spec.find('x', start);
    const std::string part = spec.substr(start, x - start);
    ok = std::regex_match(part, m, factor);
    if (ok) moduli.push_back(parse_positive(m[1], "group order"));
    if (x == std::string::npos) break;
    start = x + 1;
  }
  if (ok) return cyclic_product(moduli);
  if (std::filesystem::exists(spec)) return group_from_json(read_json_file(spec));
  throw Error(ErrorCode::kConfig, "unknown group '" + spec + "'");
}

Representation parse_representation(const std::string& spec, const std::string& group_spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (spec == "regular") {
    return regular_representation(std::make_shared<const FiniteGroup>(parse_group(group_spec)));
  }
  if (head == "regular" && colon != std::string::npos) return regular_representation(cyc(parse_positive(arg, "order")));
  if (head == "regular-sum") {
    const auto v = parse_int_list(arg, "regular-sum argument");
    if (v.size() != 2) throw Error(ErrorCode::kConfig, "regular-sum needs m,copies");
    std::vector<Representation> parts(v[1], regular_representation(cyc(v[0])));
    Representation r = direct_sum(parts);
    return Representation(r.group_ptr(), r.matrices(),
                          std::to_string(v[1]) + " x regular(Z_" + std::to_string(v[0]) + ")");
  }
  if (head == "rotation") return rotation_representation(parse_positive(arg, "rotation order"));
  if (head == "dsum") {
    const auto v = parse_int_list(arg, "dsum moduli");
    if (v.size() != 2) throw Error(ErrorCode::kConfig, "dsum needs m1,m2");
    return cyclic_direct_sum_representation(v);
  }
  if (head == "regular-augmented") {
    const int k = parse_positive(arg, "augmentation");
    return augment_trivial(regular_representation(std::make_shared<const FiniteGroup>(parse_group(group_spec))), k);
  }
  if (std::filesystem::exists(spec)) {
    std::shared_ptr<const FiniteGroup> g;
    const json j = read_json_file(spec);
    if (!j.contains("group")) g = std::make_shared<const FiniteGroup>(parse_group(group_spec));
    Representation rep = representation_from_json(j, g);
    const double residual = homomorphism_residual(rep);
    if (residual > 1e-8) {
      throw Error(ErrorCode::kConfig, "representation in '" + spec + "' is not a homomorphism (residual " +
                                          std::to_string(residual) + ")");
    }
    return rep;
  }
  throw Error(ErrorCode::kConfig, "unknown representation '" + spec + "'");
}

}  // namespace equicap
