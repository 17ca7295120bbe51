#include "equicap/experiment.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "equicap/error.hpp"
#include "equicap/io.hpp"
#include "equicap/random.hpp"
#include "equicap/suites.hpp"

namespace equicap {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Probe parse_probe(const std::string& s) {
  if (s == "lp") return Probe::kLp;
  if (s == "logistic") return Probe::kLogistic;
  throw Error(ErrorCode::kConfig, "unknown probe '" + s + "' (expected lp or logistic)");
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kConfig, "cannot write '" + path + "'");
  f << content;
  if (!f) throw Error(ErrorCode::kConfig, "failed writing '" + path + "'");
}

void emit(const ExperimentConfig& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_file(c.out, text);
  }
}

}  // namespace

json ExperimentConfig::to_json() const {
  json j = {{"subcommand", subcommand},
            {"rep", rep},
            {"group", group},
            {"arch", arch},
            {"p", p},
            {"n", n},
            {"trials", trials},
            {"channels", channels},
            {"out", out},
            {"probe", probe},
            {"suite", suite},
            {"exact", exact},
            {"count", count},
            {"raw_orbits", raw_orbits},
            {"allow_non_coprime", allow_non_coprime},
            {"inject_duplicate_anchor", inject_duplicate_anchor},
            {"input_seeds", input_seeds},
            {"width", width},
            {"length", length},
            {"in_channels", in_channels},
            {"filter", filter},
            {"pool", pool}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.subcommand = j.at("subcommand").get<std::string>();
    c.rep = j.value("rep", c.rep);
    c.group = j.value("group", c.group);
    c.arch = j.value("arch", c.arch);
    c.p = j.value("p", c.p);
    c.n = j.value("n", c.n);
    c.trials = j.value("trials", c.trials);
    c.channels = j.value("channels", c.channels);
    c.out = j.value("out", c.out);
    c.probe = j.value("probe", c.probe);
    c.suite = j.value("suite", c.suite);
    c.exact = j.value("exact", c.exact);
    c.count = j.value("count", c.count);
    c.raw_orbits = j.value("raw_orbits", c.raw_orbits);
    c.allow_non_coprime = j.value("allow_non_coprime", c.allow_non_coprime);
    c.inject_duplicate_anchor = j.value("inject_duplicate_anchor", c.inject_duplicate_anchor);
    c.input_seeds = j.value("input_seeds", c.input_seeds);
    c.width = j.value("width", c.width);
    c.length = j.value("length", c.length);
    c.in_channels = j.value("in_channels", c.in_channels);
    c.filter = j.value("filter", c.filter);
    c.pool = j.value("pool", c.pool);
    if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed config JSON: ") + e.what());
  }
  return c;
}

std::string CapacityCurve::to_csv() const {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const CurvePoint& pt : points) {
    os << pt.channels << "," << pt.n0 << "," << format_double(pt.alpha) << "," << format_double(pt.fraction) << ","
       << format_double(pt.ci_lo) << "," << format_double(pt.ci_hi) << "," << format_double(pt.theory) << "\n";
  }
  return os.str();
}

std::string CapacityCurve::check() const {
  for (const CurvePoint& pt : points) {
    std::ostringstream os;
    if (pt.n0 < 1) {
      os << "channels " << pt.channels << ": n0 must be positive";
      return os.str();
    }
    if (pt.alpha != static_cast<double>(p) / pt.n0) {
      os << "channels " << pt.channels << ": alpha " << pt.alpha << " != " << p << "/" << pt.n0;
      return os.str();
    }
    if (pt.theory != cover_fraction(p, pt.n0).to_double()) {
      os << "channels " << pt.channels << ": theory " << pt.theory << " != f(" << p << "," << pt.n0 << ")";
      return os.str();
    }
    if (!(pt.ci_lo <= pt.fraction && pt.fraction <= pt.ci_hi)) {
      os << "channels " << pt.channels << ": fraction outside its interval";
      return os.str();
    }
  }
  return "";
}

CapacityCurve make_curve(long p, const std::vector<SweepPoint>& points) {
  CapacityCurve curve;
  curve.p = p;
  for (const SweepPoint& s : points) {
    curve.points.push_back({s.channels, s.n0, s.alpha, s.fraction, s.ci.lo, s.ci.hi, s.theory.to_double()});
  }
  return curve;
}

CapacityCurve parse_csv(const std::string& csv, long p) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(ErrorCode::kConfig, "unexpected CSV header");
  CapacityCurve curve;
  curve.p = p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw Error(ErrorCode::kConfig, "CSV row needs 7 fields: " + line);
    CurvePoint pt;
    const auto parse = [&](const std::string& s, auto& v) {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(ErrorCode::kConfig, "bad CSV field " + s);
    };
    parse(f[0], pt.channels);
    parse(f[1], pt.n0);
    parse(f[2], pt.alpha);
    parse(f[3], pt.fraction);
    parse(f[4], pt.ci_lo);
    parse(f[5], pt.ci_hi);
    parse(f[6], pt.theory);
    curve.points.push_back(pt);
  }
  return curve;
}

ExperimentConfig resolve(ExperimentConfig c) {
  if (!c.seed) c.seed = fresh_seed();
  if (c.subcommand == "gcnn-sweep") {
    const ArchSpec arch = parse_arch(c.arch);
    const bool dsum = arch.arch == Arch::kDirectSum;
    if (c.p == 0) c.p = dsum ? 16 : 40;
    if (c.channels.empty()) {
      c.channels = dsum ? std::vector<int>{2, 4, 6, 8, 10, 12} : std::vector<int>{10, 15, 20, 25, 30, 40, 60};
    }
  }
  return c;
}

SweepConfig sweep_config(const ExperimentConfig& c) {
  SweepConfig s;
  s.arch = parse_arch(c.arch);
  s.p = static_cast<int>(c.p);
  s.channels = c.channels;
  s.trials = c.trials;
  s.seed = c.seed.value_or(0);
  s.input_seeds = c.input_seeds;
  s.width = c.width;
  s.length = c.length;
  s.in_channels = c.in_channels;
  s.filter = c.filter;
  s.pool = c.pool;
  s.allow_non_coprime = c.allow_non_coprime;
  s.estimate.probe = parse_probe(c.probe);
  return s;
}

json figure1_data(std::uint64_t seed) {
  struct Panel {
    const char* name;
    Representation rep;
  };
  const auto z3 = std::make_shared<const FiniteGroup>(cyclic_group(3));
  std::vector<Panel> panels = {{"a", rotation_representation(4)},
                               {"b", augment_trivial(rotation_representation(4), 1)},
                               {"c", regular_representation(z3)}};
  json out = {{"seed", seed}, {"panels", json::array()}};
  for (std::size_t i = 0; i < panels.size(); ++i) {
    auto rep = std::make_shared<const Representation>(panels[i].rep);
    const Labels labels = {1, -1};
    const OrbitSet orbits(rep, gaussian_matrix(rep->dim(), 2, derive_seed(seed, kAnchorStream, i)), labels);
    const Matrix centroids = centroid_reduce(orbits);
    json orbit_list = json::array();
    for (int mu = 0; mu < 2; ++mu) {
      Matrix pts(rep->dim(), rep->group().order());
      for (Element g = 0; g < rep->group().order(); ++g) pts.col(g) = orbits.point(mu, g);
      orbit_list.push_back({{"label", labels[mu]},
                            {"anchor", matrix_to_json(orbits.anchors().col(mu).transpose())[0]},
                            {"points", matrix_to_json(pts.transpose())},
                            {"centroid", matrix_to_json(centroids.col(mu).transpose())[0]}});
    }
    const bool separable = decide_separable(orbits.points(), orbits.point_labels()).separable;
    out["panels"].push_back({{"panel", panels[i].name},
                             {"representation", rep->label()},
                             {"group_order", rep->group().order()},
                             {"dim", rep->dim()},
                             {"n0", fixed_subspace_dim(*rep)},
                             {"fixed_subspace_basis", matrix_to_json(fixed_subspace_basis(*rep).transpose())},
                             {"orbits", orbit_list},
                             {"separable", separable}});
  }
  return out;
}

int run(const ExperimentConfig& raw, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig c = resolve(raw);
    const std::uint64_t seed = *c.seed;
    if (c.subcommand == "cover") {
      if (c.p < 1 || c.n < 0) throw Error(ErrorCode::kConfig, "cover needs --p >= 1 and --n >= 0");
      if (c.count) {
        out << cover_count(c.p, c.n).get_str() << "\n";
      } else if (c.exact) {
        out << cover_fraction(c.p, c.n).str() << "\n";
      } else {
        out << format_double(cover_fraction(c.p, c.n).to_double()) << "\n";
      }
      return kExitOk;
    }
    if (c.subcommand == "fraction") {
      if (c.p < 2) throw Error(ErrorCode::kConfig, "fraction needs --p >= 2");
      if (c.trials < 1) throw Error(ErrorCode::kConfig, "fraction needs --trials >= 1");
      auto rep = std::make_shared<const Representation>(parse_representation(c.rep, c.group));
      EstimateOptions eo;
      eo.probe = parse_probe(c.probe);
      eo.raw_orbits = c.raw_orbits;
      const CapacityEstimate est = empirical_fraction(rep, static_cast<int>(c.p), c.trials, seed, eo);
      json j = estimate_to_json(est);
      j["representation"] = rep->label();
      j["probe"] = c.probe;
      j["raw_orbits"] = c.raw_orbits;
      emit(c, out, j.dump(2) + "\n");
      return kExitOk;
    }
    if (c.subcommand == "gcnn-sweep") {
      const auto start = std::chrono::steady_clock::now();
      CapacityCurve curve = make_curve(c.p, gcnn_sweep(sweep_config(c)));
      const std::string problem = curve.check();
      if (!problem.empty()) throw std::logic_error("inconsistent curve: " + problem);
      curve.metadata = {{"timestamp", utc_timestamp()},
                        {"version", kVersion},
                        {"seed", seed},
                        {"wall_seconds",
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
                        {"config", c.to_json()},
                        {"csv_columns", kCsvHeader}};
      emit(c, out, curve.to_csv());
      if (!c.out.empty()) write_file(c.out + ".meta.json", curve.metadata.dump(2) + "\n");
      return kExitOk;
    }
    if (c.subcommand == "verify") {
      SuiteOptions so;
      so.seed = seed;
      so.inject_duplicate_anchor = c.inject_duplicate_anchor;
      const auto results = run_suites(c.suite, so);
      json report = suites_report(results, so);
      report["version"] = kVersion;
      emit(c, out, report.dump(2) + "\n");
      return report["pass"].get<bool>() ? kExitOk : kExitVerifyFailed;
    }
    if (c.subcommand == "figure1-data") {
      emit(c, out, figure1_data(seed).dump(2) + "\n");
      return kExitOk;
    }
    throw Error(ErrorCode::kConfig, "unknown subcommand '" + c.subcommand + "'");
  } catch (const Error& e) {
    err << "equicap: " << e.what() << "\n";
    return e.code() == ErrorCode::kUndecided ? kExitUndecided : kExitConfig;
  } catch (const std::exception& e) {
    err << "equicap: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace equicap
