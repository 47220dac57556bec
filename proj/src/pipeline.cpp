#include "hybrid/pipeline.hpp"

#include "hybrid/continuation.hpp"
#include "hybrid/error.hpp"
#include "hybrid/io.hpp"
#include "hybrid/log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace hybrid {

using nlohmann::json;

namespace {

const std::vector<std::string> kParameterKeys{"d", "beta", "delta", "f"};

double& param_ref(SystemParams& p, const std::string& key) {
    if (key == "d") return p.d;
    if (key == "beta") return p.beta;
    if (key == "delta") return p.delta;
    if (key == "f") return p.f;
    throw Error(ErrorCode::InvalidArgument, "unknown scenario parameter '" + key + "'");
}

bool is_parameter_key(const std::string& key) {
    return std::find(kParameterKeys.begin(), kParameterKeys.end(), key) != kParameterKeys.end();
}

std::string format_value(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << v;
    std::string s = ss.str();
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// -----------------------------------------------------------------------------
// Scenario
// -----------------------------------------------------------------------------

void Scenario::validate() const {
    fixed.validate();
    if (counts.train < 1 || counts.test < 1 || counts.cross < 0) {
        throw Error(ErrorCode::InvalidArgument, "scenario needs train and test records and a non-negative cross count");
    }
    for (const auto& [key, u] : sampled) {
        if (!is_parameter_key(key)) throw Error(ErrorCode::InvalidArgument, "cannot sample '" + key + "'");
        if (!(u.low <= u.high) || !std::isfinite(u.low) || !std::isfinite(u.high)) {
            throw Error(ErrorCode::InvalidArgument, "sampled range of '" + key + "' is empty");
        }
        if (key != "beta" && u.low < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "sampled range of '" + key + "' leaves the physical range");
        }
    }
    if (!grid_parameter.empty()) {
        if (!is_parameter_key(grid_parameter)) {
            throw Error(ErrorCode::InvalidArgument, "unknown grid parameter '" + grid_parameter + "'");
        }
        if (sampled.count(grid_parameter)) {
            throw Error(ErrorCode::InvalidArgument, "'" + grid_parameter + "' is both gridded and sampled");
        }
        if (grid_values.empty()) throw Error(ErrorCode::InvalidArgument, "grid has no values");
        for (std::size_t c = 0; c < grid_values.size(); ++c) cell_params(c).validate();
    } else if (!grid_values.empty()) {
        throw Error(ErrorCode::InvalidArgument, "grid values given without a grid parameter");
    }
    for (const auto& f : features) (void)feature_index(f);
    if (noise.sigma_rel < 0.0 || noise.sigma_abs < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "noise levels must be non-negative");
    }
    if (max_redraws < 0 || max_rejection_rate < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "redraw budget and rejection rate must be non-negative");
    }
}

SystemParams Scenario::cell_params(std::size_t cell) const {
    SystemParams p = fixed;
    if (!grid_parameter.empty()) {
        if (cell >= grid_values.size()) throw Error(ErrorCode::InvalidArgument, "grid cell out of range");
        param_ref(p, grid_parameter) = grid_values[cell];
    }
    return p;
}

std::string Scenario::cell_label(std::size_t cell) const {
    if (grid_parameter.empty()) return "all";
    return grid_parameter + "-" + format_value(grid_values.at(cell));
}

json to_json(const Scenario& s) {
    json sampled = json::object();
    for (const auto& [k, u] : s.sampled) sampled[k] = {{"dist", "uniform"}, {"low", u.low}, {"high", u.high}};
    json j{
        {"name", s.name},
        {"target", to_string(s.target)},
        {"fixed", io::to_json(s.fixed)},
        {"sampled", sampled},
        {"counts", {{"train", s.counts.train}, {"test", s.counts.test}, {"cross", s.counts.cross}}},
        {"noise", {{"sigma_rel", s.noise.sigma_rel}, {"sigma_abs", s.noise.sigma_abs}}},
        {"seed", s.seed},
        {"monostable_policy", to_string(s.policy)},
        {"features", s.features},
        {"hyper", {{"hidden", s.hyper.hidden}, {"lambda", s.hyper.lambda}, {"learning_rate", s.hyper.learning_rate}}},
        {"tune", s.tune},
        {"max_redraws", s.max_redraws},
        {"max_rejection_rate", s.max_rejection_rate},
    };
    if (!s.grid_parameter.empty()) j["grid"] = {{"parameter", s.grid_parameter}, {"values", s.grid_values}};
    return j;
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    try {
        s.name = j.value("name", s.name);
        s.target = parse_target(j.at("target").get<std::string>());
        if (j.contains("fixed")) s.fixed = io::params_from_json(j.at("fixed"));
        if (j.contains("sampled")) {
            for (const auto& [key, u] : j.at("sampled").items()) {
                if (u.value("dist", std::string("uniform")) != "uniform") {
                    throw Error(ErrorCode::InvalidArgument, "only uniform distributions are supported");
                }
                s.sampled[key] = {u.at("low").get<double>(), u.at("high").get<double>()};
            }
        }
        if (j.contains("grid")) {
            s.grid_parameter = j.at("grid").at("parameter").get<std::string>();
            s.grid_values = j.at("grid").at("values").get<std::vector<double>>();
        }
        if (j.contains("counts")) {
            const auto& c = j.at("counts");
            s.counts.train = c.value("train", s.counts.train);
            s.counts.test = c.value("test", s.counts.test);
            s.counts.cross = c.value("cross", s.counts.cross);
        }
        if (j.contains("noise")) {
            s.noise.sigma_rel = j.at("noise").value("sigma_rel", s.noise.sigma_rel);
            s.noise.sigma_abs = j.at("noise").value("sigma_abs", s.noise.sigma_abs);
        }
        s.seed = j.value("seed", s.seed);
        if (j.contains("monostable_policy")) s.policy = parse_policy(j.at("monostable_policy").get<std::string>());
        s.features = j.value("features", s.features);
        if (j.contains("hyper")) {
            const auto& h = j.at("hyper");
            s.hyper.hidden = h.value("hidden", s.hyper.hidden);
            s.hyper.lambda = h.value("lambda", s.hyper.lambda);
            s.hyper.learning_rate = h.value("learning_rate", s.hyper.learning_rate);
        }
        s.tune = j.value("tune", s.tune);
        s.max_redraws = j.value("max_redraws", s.max_redraws);
        s.max_rejection_rate = j.value("max_rejection_rate", s.max_rejection_rate);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario builtin_scenario(const std::string& name) {
    Scenario s;
    s.name = name;
    s.fixed = SystemParams{};
    s.policy = MonostablePolicy::steepest_flank;
    s.hyper = HyperParams{15, 0.0, 1e-2};
    s.tune = true;
    const std::vector<double> grid{1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
    if (name == "table1") {
        s.target = TargetParameter::delta;
        s.sampled = {{"delta", {1.0, 2.0}}, {"f", {0.9, 1.1}}};
        s.grid_parameter = "d";
        s.grid_values = grid;
        s.features = {"f12", "f13", "f22", "f23"};
    } else if (name == "table2") {
        s.target = TargetParameter::d;
        s.sampled = {{"d", {1.0, 2.0}}, {"f", {0.9, 1.1}}};
        s.grid_parameter = "delta";
        s.grid_values = grid;
        s.features = {"p11", "p12", "p13", "p14", "p21", "p22", "p23", "p24", "f11", "f21"};
    } else if (name == "ideal") {
        s.target = TargetParameter::delta;
        s.sampled = {{"delta", {1.0, 2.0}}};
        s.noise = NoiseConfig{0.0, 0.0};
        s.features = {"f12", "f13", "f22", "f23"};
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + name + "' (table1, table2, ideal)");
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& name_or_path) {
    if (name_or_path == "table1" || name_or_path == "table2" || name_or_path == "ideal") {
        return builtin_scenario(name_or_path);
    }
    return scenario_from_json(io::read_json(name_or_path));
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    // splitmix64 finalizer folded over the tags
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(base);
    for (const auto t : tags) h = mix(h ^ mix(t));
    return h;
}

// -----------------------------------------------------------------------------
// Dataset generation
// -----------------------------------------------------------------------------

SystemParams sample_params(const Scenario& s, std::size_t cell, std::uint64_t seed) {
    SystemParams p = s.cell_params(cell);
    std::mt19937_64 rng(seed);
    for (const auto& [key, u] : s.sampled) {
        param_ref(p, key) = std::uniform_real_distribution<double>(u.low, u.high)(rng);
    }
    return p;
}

GeneratedSet generate_records(const Scenario& s, std::size_t cell, RecordSet kind, int count) {
    static const char* const kind_names[] = {"", "train", "test", "cross"};
    GeneratedSet out;
    for (int r = 0; r < count; ++r) {
        const std::string id = std::string(kind_names[static_cast<int>(kind)]) + "-" + std::to_string(cell) + "-" +
                               std::to_string(r);
        bool ok = false;
        for (int attempt = 0; attempt <= s.max_redraws && !ok; ++attempt) {
            const std::uint64_t seed = derive_seed(
                s.seed, {cell, static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(r),
                         static_cast<std::uint64_t>(attempt)});
            const SystemParams p = sample_params(s, cell, seed);
            try {
                const auto [lo, hi] = default_window(p);
                const auto branch = trace_branch(p, lo, hi);
                const auto clean = extract(branch, s.policy);
                out.records.push_back({id, p, inject_noise(clean, s.noise, derive_seed(seed, {0x6e6f697365}))});
                ok = true;
            } catch (const Error& e) {
                out.rejections.push_back({id, attempt, e.what(), attempt == s.max_redraws});
            }
        }
        if (!ok) ++out.exhausted;
    }
    if (out.exhausted > s.max_rejection_rate * count) {
        throw Error(ErrorCode::TooManyRejections,
                    std::to_string(out.exhausted) + " of " + std::to_string(count) +
                        " records found no valid draw in " + s.name + " " + s.cell_label(cell) +
                        (out.rejections.empty() ? std::string() : " (last: " + out.rejections.back().reason + ")"));
    }
    return out;
}

CellData generate_dataset(const Scenario& s, std::size_t cell) {
    CellData data;
    auto train = generate_records(s, cell, RecordSet::train, s.counts.train);
    auto test = generate_records(s, cell, RecordSet::test, s.counts.test);
    data.train = std::move(train.records);
    data.test = std::move(test.records);
    data.rejections = std::move(train.rejections);
    data.rejections.insert(data.rejections.end(), test.rejections.begin(), test.rejections.end());
    return data;
}

namespace {

std::string cell_dir(const Scenario& s, std::size_t cell, const std::string& dir) {
    return s.grid_parameter.empty() ? dir : (std::filesystem::path(dir) / s.cell_label(cell)).string();
}

void write_rejections(const std::string& path, const std::vector<Rejection>& rejections) {
    auto out = io::open_output(path);
    out << "record_id,attempt,exhausted,reason\n";
    for (const auto& r : rejections) {
        std::string reason = r.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        out << r.record_id << ',' << r.attempt << ',' << (r.exhausted ? 1 : 0) << ',' << reason << '\n';
    }
}

}  // namespace

void write_dataset(const Scenario& s, const std::string& dir) {
    s.validate();
    io::write_json((std::filesystem::path(dir) / "scenario.json").string(), to_json(s));
    for (std::size_t c = 0; c < s.cell_count(); ++c) {
        const auto data = generate_dataset(s, c);
        const auto base = std::filesystem::path(cell_dir(s, c, dir));
        write_feature_csv((base / "train.csv").string(), data.train);
        write_feature_csv((base / "test.csv").string(), data.test);
        write_rejections((base / "rejections.csv").string(), data.rejections);
    }
}

// -----------------------------------------------------------------------------
// Sweep features
// -----------------------------------------------------------------------------

SweepExtraction default_sweep_extraction(const Scenario& s, std::size_t cell) {
    const SystemParams p = s.cell_params(cell);
    double delta_hi = p.delta;
    if (const auto it = s.sampled.find("delta"); it != s.sampled.end()) delta_hi = it->second.high;
    SweepExtraction x;
    x.omega_min = std::max(0.1, p.omega0 - 0.3);
    x.omega_max = std::sqrt(p.omega0 * p.omega0 + 2.0 * delta_hi) + 0.5;
    x.steps = static_cast<int>(std::lround((x.omega_max - x.omega_min) / 0.005)) + 1;
    return x;
}

namespace {

struct Jump {
    std::size_t index = 0;  // grid point on the near side of the jump
    double size = 0.0;
};

// Two largest amplitude changes in the sweep direction (`sign` +1 for drops, -1 for rises),
// at least `gap` apart in frequency, returned in ascending frequency.
std::vector<Jump> two_jumps(const SweptResponse& sw, double sign, double gap) {
    const auto& pts = sw.points;
    std::vector<Jump> cand;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double change = sign * (pts[i].amp_x - pts[i + 1].amp_x);
        if (change > 0.0) cand.push_back({i, change});
    }
    std::stable_sort(cand.begin(), cand.end(), [](const Jump& a, const Jump& b) { return a.size > b.size; });
    std::vector<Jump> picked;
    for (const auto& c : cand) {
        if (picked.empty() || std::abs(pts[c.index].Omega - pts[picked[0].index].Omega) >= gap) {
            picked.push_back(c);
            if (picked.size() == 2) break;
        }
    }
    std::sort(picked.begin(), picked.end(),
              [&](const Jump& a, const Jump& b) { return pts[a.index].Omega < pts[b.index].Omega; });
    return picked;
}

}  // namespace

FeatureVector sweep_features(const SystemParams& p, const SweepExtraction& x, MonostablePolicy policy) {
    const auto up = sweep(p, omega_grid(x.omega_min, x.omega_max, x.steps, SweepDirection::up), SweepDirection::up,
                          x.sweep);
    const auto down = sweep(p, omega_grid(x.omega_min, x.omega_max, x.steps, SweepDirection::down),
                            SweepDirection::down, x.sweep);
    const auto drops = two_jumps(up, 1.0, x.resonance_gap);
    const auto rises = two_jumps(down, -1.0, x.resonance_gap);
    if (drops.size() < 2 || rises.size() < 2) throw Error(ErrorCode::MissingFolds, "sweeps show fewer than four jumps");
    if (policy == MonostablePolicy::reject) {
        for (const auto* set : {&drops, &rises}) {
            const auto& pts = set == &drops ? up.points : down.points;
            for (const auto& j : *set) {
                const double near = pts[j.index].amp_x, far = pts[j.index + 1].amp_x;
                if (j.size < x.min_jump_ratio * std::max(near, far)) {
                    throw Error(ErrorCode::MissingFolds, "a resonance shows no jump in the sweeps");
                }
            }
        }
    }
    FeatureVector v;
    auto put = [&](int point, const SweepPoint& sp) {
        const double sigma = detuning_of(p, sp.Omega);
        v.values[freq_index(1, point)] = sigma;
        v.values[freq_index(2, point)] = sigma;
        v.values[amp_index(1, point)] = sp.amp_x;
        v.values[amp_index(2, point)] = sp.amp_y;
    };
    // Ascending frequency: drops[0] is the first resonance's jump-down; the down-sweep
    // meets the second resonance first, but in ascending order rises[1] is still the second.
    put(1, up.points[drops[0].index]);
    put(2, up.points[drops[1].index]);
    put(3, down.points[rises[1].index]);
    put(4, down.points[rises[0].index]);
    v.valid.fill(true);
    for (const Resonance r : {Resonance::first, Resonance::second}) {
        const int ri = r == Resonance::first ? 1 : 2;
        for (int i = 1; i <= 2; ++i) v.values[slope_index(i, ri)] = secant_slope(v, i, r);
        const auto [jd, ju] = jump_points(r);
        if (v.values[freq_index(1, jd)] == v.values[freq_index(1, ju)]) {
            throw Error(ErrorCode::MissingFolds, "jump-down and jump-up coincide on the grid");
        }
    }
    return v;
}

CrossSourceResult cross_source_test(const TrainedEstimator& model, const Scenario& s, std::size_t cell,
                                    const std::vector<SystemParams>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "cross-source test needs at least one record");
    const auto x = default_sweep_extraction(s, cell);
    CrossSourceResult out;
    for (const auto& p : records) {
        try {
            const auto v = sweep_features(p, x, s.policy);
            out.predicted.push_back(predict(model, v));
            out.truth.push_back(get_parameter(p, s.target));
            ++out.used;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MissingFolds) throw;
            ++out.mismatched;
        }
    }
    if (out.used < 0.75 * static_cast<double>(records.size())) {
        throw Error(ErrorCode::SweepFeatureMismatch, std::to_string(out.mismatched) + " of " +
                                                         std::to_string(records.size()) +
                                                         " sweeps lack four detectable jumps");
    }
    out.rmse = rmse(out.truth, out.predicted);
    return out;
}

// -----------------------------------------------------------------------------
// Experiments
// -----------------------------------------------------------------------------

CellReport run_cell(const Scenario& s, std::size_t cell, const ExperimentOptions& opts) {
    s.validate();
    if (s.counts.cross < 1 && (opts.graybox || opts.cross_source)) {
        throw Error(ErrorCode::InvalidArgument, "gray-box and cross-source comparisons need counts.cross >= 1");
    }
    CellReport rep;
    rep.label = s.cell_label(cell);
    rep.value = s.grid_parameter.empty() ? 0.0 : s.grid_values[cell];

    auto t0 = std::chrono::steady_clock::now();
    const CellData data = generate_dataset(s, cell);
    const GeneratedSet matched = generate_records(s, cell, RecordSet::cross, s.counts.cross);
    rep.seconds_generate = seconds_since(t0);
    rep.n_train = data.train.size();
    rep.n_test = data.test.size();
    rep.n_matched = matched.records.size();

    const std::uint64_t train_seed = derive_seed(s.seed, {cell, 0x616e6e});
    std::vector<std::string> features = s.features;
    if (features.empty()) features.assign(feature_names().begin(), feature_names().end());

    if (opts.audit) {
        rep.ranking = rank_features(data.train, s.target);
        rep.search = forward_search(data.train, rep.ranking, s.target, HyperPolicy{false, s.hyper, {}}, train_seed);
    }

    t0 = std::chrono::steady_clock::now();
    if (s.tune) {
        GridSpec grid;
        grid.hidden = {s.hyper.hidden};
        rep.model = grid_search(data.train, features, s.target, grid, train_seed).model;
    } else {
        rep.model = train(data.train, features, s.target, s.hyper, train_seed);
    }
    rep.seconds_train = seconds_since(t0);

    rep.test_truth = target_column(data.test, s.target);
    rep.test_predicted = predict(rep.model, data.test);
    rep.rmse_adaptive = rmse(rep.test_truth, rep.test_predicted);

    if (!matched.records.empty()) {
        rep.matched_truth = target_column(matched.records, s.target);
        t0 = std::chrono::steady_clock::now();
        rep.matched_predicted = predict(rep.model, matched.records);
        rep.seconds_predict = seconds_since(t0);
        rep.rmse_adaptive_matched = rmse(rep.matched_truth, rep.matched_predicted);
    }

    if (opts.graybox) {
        // The modeler knows the fixed parameters but not the random load, so the
        // gray box assumes its mean.
        const GrayBoxSettings gs = default_graybox_settings(s.target);
        SystemParams assumed = s.cell_params(cell);
        if (const auto it = s.sampled.find("f"); it != s.sampled.end()) {
            assumed.f = 0.5 * (it->second.low + it->second.high);
        }
        for (const auto& [key, u] : s.sampled) {
            if (key != "f" && key != to_string(s.target)) param_ref(assumed, key) = 0.5 * (u.low + u.high);
        }
        set_parameter(assumed, s.target, gs.init);
        const auto freqs = graybox_frequencies(assumed);
        t0 = std::chrono::steady_clock::now();
        for (const auto& rec : matched.records) {
            std::vector<TimeSeries> observed;
            for (const double W : freqs) observed.push_back(simulate_observation(rec.params, W, gs));
            const auto est = graybox_fit(observed, assumed, s.target, gs);
            rep.graybox_predicted.push_back(est.final);
            if (est.stalled) ++rep.graybox_stalled;
        }
        rep.seconds_graybox = seconds_since(t0);
        rep.rmse_graybox = rmse(rep.matched_truth, rep.graybox_predicted);
    }

    if (opts.cross_source) {
        std::vector<SystemParams> params;
        for (const auto& rec : matched.records) params.push_back(rec.params);
        t0 = std::chrono::steady_clock::now();
        try {
            const auto cs = cross_source_test(rep.model, s, cell, params);
            rep.rmse_cross_source = cs.rmse;
            rep.cross_mismatched = cs.mismatched;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SweepFeatureMismatch) throw;
            log::warn(rep.label + ": " + e.what());
            rep.cross_mismatched = -1;
        }
        rep.seconds_cross = seconds_since(t0);
    }
    return rep;
}

ExperimentReport run_experiment(const Scenario& s, const ExperimentOptions& opts) {
    ExperimentReport report;
    report.scenario = s;
    for (std::size_t c = 0; c < s.cell_count(); ++c) {
        log::info("running " + s.name + " " + s.cell_label(c));
        try {
            report.cells.push_back(run_cell(s, c, opts));
        } catch (const Error& e) {
            report.complete = false;
            report.failures.push_back(s.cell_label(c) + ": " + e.what());
            log::warn(report.failures.back());
        }
    }
    return report;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    const auto& s = report.scenario;
    io::write_json((fs::path(dir) / "scenario.json").string(), to_json(s));
    using io::format_double;
    {
        auto out = io::open_output((fs::path(dir) / "report.csv").string());
        out << "# scenario=" << s.name << " target=" << to_string(s.target)
            << " complete=" << (report.complete ? 1 : 0) << '\n';
        out << "cell," << (s.grid_parameter.empty() ? "value" : s.grid_parameter)
            << ",n_train,n_test,n_matched,rmse_adaptive,rmse_adaptive_matched,rmse_graybox,rmse_cross_source,"
               "graybox_stalled,cross_mismatched\n";
        for (const auto& c : report.cells) {
            out << c.label << ',' << format_double(c.value) << ',' << c.n_train << ',' << c.n_test << ','
                << c.n_matched << ',' << format_double(c.rmse_adaptive) << ','
                << format_double(c.rmse_adaptive_matched) << ',' << format_double(c.rmse_graybox) << ','
                << format_double(c.rmse_cross_source) << ',' << c.graybox_stalled << ',' << c.cross_mismatched
                << '\n';
        }
        for (const auto& f : report.failures) out << "# incomplete: " << f << '\n';
    }
    {
        auto out = io::open_output((fs::path(dir) / "timing.csv").string());
        out << "cell,seconds_generate,seconds_train,seconds_predict,seconds_graybox,seconds_cross_source\n";
        for (const auto& c : report.cells) {
            out << c.label << ',' << format_double(c.seconds_generate) << ',' << format_double(c.seconds_train)
                << ',' << format_double(c.seconds_predict) << ',' << format_double(c.seconds_graybox) << ','
                << format_double(c.seconds_cross) << '\n';
        }
    }
    for (const auto& c : report.cells) {
        const fs::path base = s.grid_parameter.empty() ? fs::path(dir) : fs::path(dir) / c.label;
        {
            auto out = io::open_output((base / "parity.csv").string());
            out << "set,truth,predicted\n";
            for (std::size_t i = 0; i < c.test_truth.size(); ++i) {
                out << "test," << format_double(c.test_truth[i]) << ',' << format_double(c.test_predicted[i]) << '\n';
            }
            for (std::size_t i = 0; i < c.matched_truth.size(); ++i) {
                out << "matched," << format_double(c.matched_truth[i]) << ','
                    << format_double(c.matched_predicted[i]) << '\n';
            }
            for (std::size_t i = 0; i < c.graybox_predicted.size(); ++i) {
                out << "graybox," << format_double(c.matched_truth[i]) << ','
                    << format_double(c.graybox_predicted[i]) << '\n';
            }
        }
        io::write_json((base / "model.json").string(), to_json(c.model));
        if (!c.ranking.entries.empty()) {
            auto out = io::open_output((base / "rank.csv").string());
            write_ranking_csv(out, c.ranking);
        }
        if (c.search) {
            auto out = io::open_output((base / "search.csv").string());
            out << "# selected_k=" << c.search->selected_k << '\n';
            out << "k,validation_rmse,features\n";
            for (const auto& st : c.search->steps) {
                out << st.k << ',' << format_double(st.validation_rmse) << ',';
                for (std::size_t i = 0; i < st.features.size(); ++i) out << (i ? ";" : "") << st.features[i];
                out << '\n';
            }
        }
    }
}

}  // namespace hybrid
