#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "equicap/gcnn.hpp"

namespace equicap {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitUndecided = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVerifyFailed = 3;

struct ExperimentConfig {
  std::string subcommand;  // cover, fraction, gcnn-sweep, verify, figure1-data
  std::string rep = "regular";
  std::string group = "Z5";
  std::string arch = "conv";
  long p = 0;  // 0 picks the subcommand default
  long n = 0;
  int trials = 100;
  std::optional<std::uint64_t> seed;
  std::vector<int> channels;  // empty picks the architecture default
  std::string out;
  std::string probe = "lp";
  std::string suite = "all";
  bool exact = false;
  bool count = false;
  bool raw_orbits = false;
  bool allow_non_coprime = false;
  bool inject_duplicate_anchor = false;
  int input_seeds = 5;
  int width = 10;
  int length = 10;
  int in_channels = 3;
  int filter = 10;
  int pool = 2;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  bool operator==(const ExperimentConfig&) const = default;
};

struct CurvePoint {
  int channels = 0;
  int n0 = 0;
  double alpha = 0.0;
  double fraction = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  double theory = 0.0;
};

struct CapacityCurve {
  long p = 0;
  std::vector<CurvePoint> points;
  nlohmann::json metadata;

  // Header: channels,n0,alpha,fraction,wilson_lo,wilson_hi,theory_fraction
  std::string to_csv() const;
  // Empty when alpha = p / n0 and theory = f(p, n0) hold for every point.
  std::string check() const;
};

inline constexpr const char* kCsvHeader = "channels,n0,alpha,fraction,wilson_lo,wilson_hi,theory_fraction";

CapacityCurve make_curve(long p, const std::vector<SweepPoint>& points);
CapacityCurve parse_csv(const std::string& csv, long p);

// Resolves subcommand defaults (P, channels) and the seed, leaving the
// config fully explicit.
ExperimentConfig resolve(ExperimentConfig config);

SweepConfig sweep_config(const ExperimentConfig& config);

// Runs a resolved or unresolved config. Results go to `out` (or to
// config.out), diagnostics to `err`. Returns an exit code.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

// Orbits, centroids and fixed subspaces of the three small examples.
nlohmann::json figure1_data(std::uint64_t seed);

}  // namespace equicap
