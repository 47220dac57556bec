#pragma once

// File formats shared by the library and the CLI. Numbers are written with
// round-trip precision so that re-reading a file reproduces it bit for bit.

#include "hybrid/continuation.hpp"
#include "hybrid/simulation.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hybrid::io {

using nlohmann::json;

/// Shortest decimal form that parses back to the same double; non-finite values as nan/inf.
[[nodiscard]] std::string format_double(double v);

/// Accepts anything format_double writes. Throws ParseError.
[[nodiscard]] double parse_double(std::string_view s);

/// Comma-separated split, no quoting (none of our fields need it).
[[nodiscard]] std::vector<std::string> split_csv_line(const std::string& line);

/// Opens for writing, creating parent directories. Throws InvalidArgument on failure.
[[nodiscard]] std::ofstream open_output(const std::string& path);
[[nodiscard]] std::ifstream open_input(const std::string& path);

[[nodiscard]] json to_json(const SystemParams& p);
/// Missing keys keep their defaults; the result is validated.
[[nodiscard]] SystemParams params_from_json(const json& j);
[[nodiscard]] json read_json(const std::string& path);
void write_json(const std::string& path, const json& j);

/// sigma1, omega, a1, gamma1, a2, gamma2, u1, u2, stable
void write_branch_csv(std::ostream& out, const ResponseBranch& branch);
/// sigma1, u1, u2, kind, resonance
void write_folds_csv(std::ostream& out, const std::vector<FoldPoint>& folds);
/// omega, amp_x, amp_y, direction
void write_sweep_csv(std::ostream& out, const SweptResponse& sweep);

/// t, x1, v1, x2, v2 plus a sidecar `<path>.json` with the parameters and Omega.
void write_time_series(const std::string& csv_path, const TimeSeries& ts);
[[nodiscard]] TimeSeries read_time_series(const std::string& csv_path);

}  // namespace hybrid::io
