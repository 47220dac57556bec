#include "hybrid/io.hpp"

#include "hybrid/error.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hybrid::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan" || s == "NaN" || s == "-nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::ofstream open_output(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::EmptyInput, "cannot read '" + path + "'");
    return in;
}

json to_json(const SystemParams& p) {
    return json{{"omega0", p.omega0}, {"d", p.d},     {"beta", p.beta},
                {"delta", p.delta},   {"f", p.f},     {"epsilon", p.epsilon}};
}

SystemParams params_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "parameters must be a JSON object");
    SystemParams p;
    try {
        p.omega0 = j.value("omega0", p.omega0);
        p.d = j.value("d", p.d);
        p.beta = j.value("beta", p.beta);
        p.delta = j.value("delta", p.delta);
        p.f = j.value("f", p.f);
        p.epsilon = j.value("epsilon", p.epsilon);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad parameter value: ") + e.what());
    }
    p.validate();
    return p;
}

json read_json(const std::string& path) {
    auto in = open_input(path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

void write_branch_csv(std::ostream& out, const ResponseBranch& branch) {
    out << "sigma1,omega,a1,gamma1,a2,gamma2,u1,u2,stable\n";
    for (const auto& pt : branch.points) {
        out << format_double(pt.sigma1) << ',' << format_double(excitation_frequency(branch.params, pt.sigma1))
            << ',' << format_double(pt.state.a1) << ',' << format_double(pt.state.gamma1) << ','
            << format_double(pt.state.a2) << ',' << format_double(pt.state.gamma2) << ','
            << format_double(pt.response.u1) << ',' << format_double(pt.response.u2) << ','
            << (pt.stable ? 1 : 0) << '\n';
    }
}

void write_folds_csv(std::ostream& out, const std::vector<FoldPoint>& folds) {
    out << "sigma1,u1,u2,kind,resonance\n";
    for (const auto& f : folds) {
        out << format_double(f.sigma1) << ',' << format_double(f.u1) << ',' << format_double(f.u2) << ','
            << to_string(f.kind) << ',' << to_string(f.resonance) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const SweptResponse& sweep) {
    out << "omega,amp_x,amp_y,direction\n";
    for (const auto& pt : sweep.points) {
        out << format_double(pt.Omega) << ',' << format_double(pt.amp_x) << ',' << format_double(pt.amp_y) << ','
            << to_string(sweep.direction) << '\n';
    }
}

void write_time_series(const std::string& csv_path, const TimeSeries& ts) {
    {
        auto out = open_output(csv_path);
        out << "t,x1,v1,x2,v2\n";
        for (std::size_t i = 0; i < ts.samples.size(); ++i) {
            const auto& s = ts.samples[i];
            out << format_double(ts.t0 + static_cast<double>(i) * ts.dt) << ',' << format_double(s[0]) << ','
                << format_double(s[1]) << ',' << format_double(s[2]) << ',' << format_double(s[3]) << '\n';
        }
    }
    write_json(csv_path + ".json", json{{"params", to_json(ts.params)},
                                        {"Omega", ts.Omega},
                                        {"dt", ts.dt},
                                        {"t0", ts.t0},
                                        {"final_phase", ts.final_phase}});
}

TimeSeries read_time_series(const std::string& csv_path) {
    const json meta = read_json(csv_path + ".json");
    TimeSeries ts;
    try {
        ts.params = params_from_json(meta.at("params"));
        ts.Omega = meta.at("Omega").get<double>();
        ts.dt = meta.at("dt").get<double>();
        ts.t0 = meta.value("t0", 0.0);
        ts.final_phase = meta.value("final_phase", 0.0);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, csv_path + ".json: " + e.what());
    }
    auto in = open_input(csv_path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 5) throw Error(ErrorCode::ParseError, csv_path + ": expected 5 columns");
        ts.samples.push_back({parse_double(cells[1]), parse_double(cells[2]), parse_double(cells[3]),
                              parse_double(cells[4])});
    }
    if (ts.samples.size() < 2 || !(ts.dt > 0.0)) {
        throw Error(ErrorCode::ParseError, csv_path + ": a time series needs dt > 0 and two samples");
    }
    return ts;
}

}  // namespace hybrid::io
