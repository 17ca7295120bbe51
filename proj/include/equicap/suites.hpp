#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace equicap {

struct SuiteOptions {
  std::uint64_t seed = 0;
  // Duplicates one anchor in the general-position suite's main instance.
  bool inject_duplicate_anchor = false;
  int workers = 0;
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  nlohmann::json details;
  double seconds = 0.0;
};

// lemma1, cover, theorem1, vc, induced, structural, subgroup,
// general-position, pooling.
const std::vector<std::string>& suite_names();

// Runs one suite, or every suite for "all". Throws kConfig for unknown names.
std::vector<SuiteResult> run_suites(const std::string& name, const SuiteOptions& options = {});

// {"pass": bool, "seed": ..., "suites": [{"name", "pass", "seconds", "details"}]}
nlohmann::json suites_report(const std::vector<SuiteResult>& results, const SuiteOptions& options);

}  // namespace equicap
