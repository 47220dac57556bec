#pragma once

// Feature records with their generating parameters, and the feature CSV:
//   record_id, f11, ..., alpha22, d, beta, delta, f
// Invalid features are written as nan.

#include "hybrid/features.hpp"
#include "hybrid/simulation.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hybrid {

struct Record {
    std::string id;
    SystemParams params;
    FeatureVector features;
};

using Dataset = std::vector<Record>;

[[nodiscard]] double target_value(const Record& r, TargetParameter target);
[[nodiscard]] std::vector<double> target_column(const Dataset& data, TargetParameter target);
[[nodiscard]] std::vector<double> feature_column(const Dataset& data, std::size_t feature);

/// Rows whose every feature is valid.
[[nodiscard]] Dataset valid_rows(const Dataset& data);

void write_feature_csv(std::ostream& out, const Dataset& data);
void write_feature_csv(const std::string& path, const Dataset& data);

/// Parameters absent from the file (omega0, epsilon) take their defaults.
/// Throws ParseError on malformed input.
[[nodiscard]] Dataset read_feature_csv(std::istream& in);
[[nodiscard]] Dataset read_feature_csv(const std::string& path);

}  // namespace hybrid
