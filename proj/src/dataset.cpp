#include "hybrid/dataset.hpp"

#include "hybrid/error.hpp"
#include "hybrid/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace hybrid {

double target_value(const Record& r, TargetParameter target) { return get_parameter(r.params, target); }

std::vector<double> target_column(const Dataset& data, TargetParameter target) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& r : data) out.push_back(target_value(r, target));
    return out;
}

std::vector<double> feature_column(const Dataset& data, std::size_t feature) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& r : data) out.push_back(r.features[feature]);
    return out;
}

Dataset valid_rows(const Dataset& data) {
    Dataset out;
    for (const auto& r : data) {
        if (r.features.all_valid()) out.push_back(r);
    }
    return out;
}

void write_feature_csv(std::ostream& out, const Dataset& data) {
    out << "record_id";
    for (const auto& n : feature_names()) out << ',' << n;
    out << ",d,beta,delta,f\n";
    for (const auto& r : data) {
        out << r.id;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            out << ',' << io::format_double(r.features.valid[i] ? r.features.values[i] : std::nan(""));
        }
        out << ',' << io::format_double(r.params.d) << ',' << io::format_double(r.params.beta) << ','
            << io::format_double(r.params.delta) << ',' << io::format_double(r.params.f) << '\n';
    }
}

void write_feature_csv(const std::string& path, const Dataset& data) {
    auto out = io::open_output(path);
    write_feature_csv(out, data);
}

Dataset read_feature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "feature file is empty");
    const auto header = io::split_csv_line(line);

    // Locate every expected column by name so that column order is not load-bearing.
    auto column_of = [&](const std::string& name) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
        }
        return -1;
    };
    const auto id_col = column_of("record_id");
    if (id_col < 0) throw Error(ErrorCode::ParseError, "feature file lacks a record_id column");
    std::array<std::ptrdiff_t, kFeatureCount> feat_cols{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        feat_cols[i] = column_of(feature_names()[i]);
        if (feat_cols[i] < 0) throw Error(ErrorCode::ParseError, "feature file lacks column " + feature_names()[i]);
    }
    const auto d_col = column_of("d"), beta_col = column_of("beta"), delta_col = column_of("delta"),
               f_col = column_of("f"), omega0_col = column_of("omega0"), eps_col = column_of("epsilon");

    Dataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = io::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(header.size()) + " columns, got " +
                                                   std::to_string(cells.size()));
        }
        auto cell = [&](std::ptrdiff_t c) { return io::parse_double(cells[static_cast<std::size_t>(c)]); };
        Record r;
        r.id = cells[static_cast<std::size_t>(id_col)];
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            const double v = cell(feat_cols[i]);
            r.features.values[i] = v;
            r.features.valid[i] = std::isfinite(v);
        }
        if (d_col >= 0) r.params.d = cell(d_col);
        if (beta_col >= 0) r.params.beta = cell(beta_col);
        if (delta_col >= 0) r.params.delta = cell(delta_col);
        if (f_col >= 0) r.params.f = cell(f_col);
        if (omega0_col >= 0) r.params.omega0 = cell(omega0_col);
        if (eps_col >= 0) r.params.epsilon = cell(eps_col);
        data.push_back(std::move(r));
    }
    return data;
}

Dataset read_feature_csv(const std::string& path) {
    auto in = io::open_input(path);
    return read_feature_csv(in);
}

}  // namespace hybrid
