#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "equicap/group.hpp"
#include "equicap/representation.hpp"
#include "equicap/separability.hpp"

namespace equicap {

// {label, order, mul_table (row-major), identity}
nlohmann::json group_to_json(const FiniteGroup& g);
FiniteGroup group_from_json(const nlohmann::json& j);

// {label, group_label, dim, matrices}; matrices[g][row][col].
nlohmann::json representation_to_json(const Representation& rep);
// The JSON may embed its group under "group"; otherwise `group` is used.
Representation representation_from_json(const nlohmann::json& j,
                                         std::shared_ptr<const FiniteGroup> group = nullptr);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json estimate_to_json(const CapacityEstimate& est);

nlohmann::json read_json_file(const std::string& path);

// "Z5", "Z_5", "cyclic:5", products such as "Z4xZ4" or "Z_2 x Z_3", or a
// path to a group JSON file.
FiniteGroup parse_group(const std::string& spec);

// "regular", "regular:m", "regular-sum:m,copies", "rotation:m",
// "dsum:m1,m2", "regular-augmented:k" or a representation JSON path.
// `group_spec` supplies the group for "regular" and "regular-augmented:k".
Representation parse_representation(const std::string& spec, const std::string& group_spec);

}  // namespace equicap
