// Command-line front end. Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 data error.

#include "hybrid/ann.hpp"
#include "hybrid/continuation.hpp"
#include "hybrid/dataset.hpp"
#include "hybrid/error.hpp"
#include "hybrid/io.hpp"
#include "hybrid/log.hpp"
#include "hybrid/mi.hpp"
#include "hybrid/pipeline.hpp"
#include "hybrid/simulation.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace hybrid;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kData = 3 };

void add_params(CLI::App* cmd, SystemParams& p) {
    cmd->add_option("--omega0", p.omega0, "undamped natural frequency")->capture_default_str();
    cmd->add_option("--d", p.d, "damping")->capture_default_str();
    cmd->add_option("--beta", p.beta, "cubic stiffness")->capture_default_str();
    cmd->add_option("--delta", p.delta, "coupling")->capture_default_str();
    cmd->add_option("--f", p.f, "forcing amplitude")->capture_default_str();
    cmd->add_option("--epsilon", p.epsilon, "small parameter")->capture_default_str();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid adaptive modeling of coupled Duffing oscillators"};
    app.require_subcommand(1);
    app.fallthrough();
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "progress messages");
    app.add_flag("-q,--quiet", quiet, "errors only");

    // respond
    SystemParams rp;
    double sigma_min = std::nan(""), sigma_max = std::nan("");
    std::string respond_out, folds_out;
    auto* respond = app.add_subcommand("respond", "trace the frequency response by continuation");
    add_params(respond, rp);
    respond->add_option("--sigma1-min", sigma_min, "left edge (default -15)");
    respond->add_option("--sigma1-max", sigma_max, "right edge (default sigma2 + 15)");
    respond->add_option("--out", respond_out, "branch CSV")->required();
    respond->add_option("--folds", folds_out, "fold CSV");

    // sweep
    SystemParams sp;
    double omega_min = 0.7, omega_max = 2.2;
    int steps = 301;
    std::string direction = "up", sweep_out;
    SweepSettings sweep_settings;
    auto* sweep_cmd = app.add_subcommand("sweep", "stepped-sine sweep of the full equations");
    add_params(sweep_cmd, sp);
    sweep_cmd->add_option("--omega-min", omega_min)->capture_default_str();
    sweep_cmd->add_option("--omega-max", omega_max)->capture_default_str();
    sweep_cmd->add_option("--steps", steps, "grid points")->capture_default_str();
    sweep_cmd->add_option("--direction", direction, "up or down")->capture_default_str();
    sweep_cmd->add_option("--settle-periods", sweep_settings.settle_periods)->capture_default_str();
    sweep_cmd->add_option("--measure-periods", sweep_settings.measure_periods)->capture_default_str();
    sweep_cmd->add_option("--steps-per-period", sweep_settings.steps_per_period)->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "sweep CSV")->required();

    // dataset
    std::string scenario_name, dataset_out;
    std::optional<std::uint64_t> dataset_seed;
    auto* dataset_cmd = app.add_subcommand("dataset", "generate feature datasets for a scenario");
    dataset_cmd->add_option("--scenario", scenario_name, "table1, table2, ideal or a JSON file")->required();
    dataset_cmd->add_option("--seed", dataset_seed, "overrides the scenario seed");
    dataset_cmd->add_option("--out", dataset_out, "output directory")->required();

    // rank
    std::string rank_data, rank_target = "delta", rank_out;
    MIConfig mi_config;
    bool equal_mass = false, strict_bins = false;
    auto* rank_cmd = app.add_subcommand("rank", "rank features by mutual information with the target");
    rank_cmd->add_option("--data", rank_data, "feature CSV")->required();
    rank_cmd->add_option("--target", rank_target, "delta or d")->capture_default_str();
    rank_cmd->add_option("--bins", mi_config.feature_bins)->capture_default_str();
    rank_cmd->add_option("--classes", mi_config.target_classes)->capture_default_str();
    rank_cmd->add_flag("--equal-mass", equal_mass, "rank-based bins instead of equal width");
    rank_cmd->add_flag("--strict-bins", strict_bins, "fail instead of shrinking bins for small data");
    rank_cmd->add_option("--out", rank_out, "ranking CSV")->required();

    // search
    std::string search_data, search_rank, search_target = "delta", search_out;
    std::uint64_t search_seed = 1;
    HyperPolicy search_policy;
    auto* search_cmd = app.add_subcommand("search", "forward search over MI-ranked feature prefixes");
    search_cmd->add_option("--data", search_data, "feature CSV")->required();
    search_cmd->add_option("--rank", search_rank, "ranking CSV")->required();
    search_cmd->add_option("--target", search_target, "delta or d")->capture_default_str();
    search_cmd->add_option("--seed", search_seed)->capture_default_str();
    search_cmd->add_option("--hidden", search_policy.fixed.hidden)->capture_default_str();
    search_cmd->add_option("--lambda", search_policy.fixed.lambda)->capture_default_str();
    search_cmd->add_option("--lr", search_policy.fixed.learning_rate)->capture_default_str();
    search_cmd->add_flag("--grid", search_policy.use_grid, "grid-search hyperparameters at every k");
    search_cmd->add_option("--out", search_out, "search CSV")->required();

    // train
    std::string train_data, train_features, train_target = "delta", train_out;
    HyperParams train_hp;
    std::uint64_t train_seed = 1;
    bool train_grid = false;
    auto* train_cmd = app.add_subcommand("train", "train the regressor on a feature set");
    train_cmd->add_option("--data", train_data, "feature CSV")->required();
    train_cmd->add_option("--features", train_features, "comma-separated names")->required();
    train_cmd->add_option("--target", train_target, "delta or d")->capture_default_str();
    train_cmd->add_option("--hidden", train_hp.hidden)->capture_default_str();
    train_cmd->add_option("--lambda", train_hp.lambda)->capture_default_str();
    train_cmd->add_option("--lr", train_hp.learning_rate)->capture_default_str();
    train_cmd->add_flag("--grid", train_grid, "grid-search hidden width, lambda and learning rate");
    train_cmd->add_option("--seed", train_seed)->capture_default_str();
    train_cmd->add_option("--out", train_out, "model JSON")->required();

    // predict
    std::string predict_model, predict_data, predict_out;
    auto* predict_cmd = app.add_subcommand("predict", "apply a trained model to a feature CSV");
    predict_cmd->add_option("--model", predict_model, "model JSON")->required();
    predict_cmd->add_option("--data", predict_data, "feature CSV")->required();
    predict_cmd->add_option("--out", predict_out, "prediction CSV")->required();

    // graybox
    std::string gb_params, gb_target = "delta", gb_out;
    std::optional<double> gb_init, gb_reg, gb_assumed_f;
    int gb_freqs = 10;
    auto* gb_cmd = app.add_subcommand("graybox", "fit one parameter to simulated time series");
    gb_cmd->add_option("--params", gb_params, "JSON with the true parameters")->required();
    gb_cmd->add_option("--target", gb_target, "delta or d")->capture_default_str();
    gb_cmd->add_option("--init", gb_init, "initial guess (default 1.5)");
    gb_cmd->add_option("--regularization", gb_reg, "weight toward the initial guess");
    gb_cmd->add_option("--assumed-f", gb_assumed_f, "forcing the model believes in (default: the true one)");
    gb_cmd->add_option("--freqs", gb_freqs, "number of fit frequencies")->capture_default_str();
    gb_cmd->add_option("--out", gb_out, "estimate CSV")->required();

    // experiment
    std::string exp_name, exp_out;
    std::optional<std::uint64_t> exp_seed;
    ExperimentOptions exp_opts;
    bool no_graybox = false, no_cross = false, no_audit = false;
    auto* exp_cmd = app.add_subcommand("experiment", "run table1, table2 or ideal end to end");
    exp_cmd->add_option("--name", exp_name, "table1, table2, ideal or a scenario JSON")->required();
    exp_cmd->add_option("--seed", exp_seed, "overrides the scenario seed");
    exp_cmd->add_flag("--no-graybox", no_graybox);
    exp_cmd->add_flag("--no-cross-source", no_cross);
    exp_cmd->add_flag("--no-audit", no_audit, "skip ranking and forward search");
    exp_cmd->add_option("--out", exp_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }
    log::set_level(quiet ? log::Level::silent : verbose ? log::Level::info : log::Level::warn);

    try {
        if (*respond) {
            rp.validate();
            const auto [lo, hi] = default_window(rp);
            const auto branch = trace_branch(rp, std::isnan(sigma_min) ? lo : sigma_min,
                                             std::isnan(sigma_max) ? hi : sigma_max);
            auto out = io::open_output(respond_out);
            io::write_branch_csv(out, branch);
            if (!folds_out.empty()) {
                auto fo = io::open_output(folds_out);
                io::write_folds_csv(fo, branch.folds);
            }
            std::cout << branch.points.size() << " points, " << branch.folds.size() << " folds\n";
        } else if (*sweep_cmd) {
            const auto dir = parse_direction(direction);
            const auto result = sweep(sp, omega_grid(omega_min, omega_max, steps, dir), dir, sweep_settings);
            auto out = io::open_output(sweep_out);
            io::write_sweep_csv(out, result);
        } else if (*dataset_cmd) {
            Scenario s = load_scenario(scenario_name);
            if (dataset_seed) s.seed = *dataset_seed;
            write_dataset(s, dataset_out);
        } else if (*rank_cmd) {
            mi_config.binning = equal_mass ? Binning::equal_mass : Binning::equal_width;
            mi_config.adapt_to_samples = !strict_bins;
            const auto ranking = rank_features(read_feature_csv(rank_data), parse_target(rank_target), mi_config);
            auto out = io::open_output(rank_out);
            write_ranking_csv(out, ranking);
        } else if (*search_cmd) {
            auto rin = io::open_input(search_rank);
            const auto ranking = read_ranking_csv(rin);
            const auto report = forward_search(read_feature_csv(search_data), ranking, parse_target(search_target),
                                               search_policy, search_seed);
            auto out = io::open_output(search_out);
            out << "# selected_k=" << report.selected_k << '\n';
            out << "k,validation_rmse,hidden,lambda,learning_rate,features\n";
            for (const auto& st : report.steps) {
                out << st.k << ',' << io::format_double(st.validation_rmse) << ',' << st.hp.hidden << ','
                    << io::format_double(st.hp.lambda) << ',' << io::format_double(st.hp.learning_rate) << ',';
                for (std::size_t i = 0; i < st.features.size(); ++i) out << (i ? ";" : "") << st.features[i];
                out << '\n';
            }
            std::cout << "selected k = " << report.selected_k << '\n';
        } else if (*train_cmd) {
            const auto data = read_feature_csv(train_data);
            const auto features = split_list(train_features);
            const auto target = parse_target(train_target);
            TrainedEstimator model;
            if (train_grid) {
                model = grid_search(data, features, target, GridSpec{}, train_seed).model;
            } else {
                model = train(data, features, target, train_hp, train_seed);
            }
            io::write_json(train_out, to_json(model));
            std::cout << "train rmse " << model.metrics.train_rmse << ", validation rmse "
                      << model.metrics.validation_rmse << ", test rmse " << model.metrics.test_rmse << '\n';
        } else if (*predict_cmd) {
            const auto model = model_from_json(io::read_json(predict_model));
            const auto data = read_feature_csv(predict_data);
            const auto pred = predict(model, data);
            auto out = io::open_output(predict_out);
            out << "record_id,predicted,d,delta\n";
            for (std::size_t i = 0; i < data.size(); ++i) {
                out << data[i].id << ',' << io::format_double(pred[i]) << ',' << io::format_double(data[i].params.d)
                    << ',' << io::format_double(data[i].params.delta) << '\n';
            }
        } else if (*gb_cmd) {
            const SystemParams truth = io::params_from_json(io::read_json(gb_params));
            const auto target = parse_target(gb_target);
            GrayBoxSettings gs = default_graybox_settings(target);
            if (gb_init) gs.init = *gb_init;
            if (gb_reg) gs.regularization = *gb_reg;
            SystemParams model = truth;
            if (gb_assumed_f) model.f = *gb_assumed_f;
            set_parameter(model, target, gs.init);
            std::vector<TimeSeries> observed;
            for (const double W : graybox_frequencies(model, gb_freqs)) {
                observed.push_back(simulate_observation(truth, W, gs));
            }
            const auto est = graybox_fit(observed, model, target, gs);
            auto out = io::open_output(gb_out);
            out << "# target=" << to_string(target) << " initial_guess=" << io::format_double(est.initial_guess)
                << " final=" << io::format_double(est.final) << " stalled=" << (est.stalled ? 1 : 0) << '\n';
            out << "omega,estimate,objective,objective_init,evaluations,stalled\n";
            for (const auto& fe : est.per_frequency) {
                out << io::format_double(fe.Omega) << ',' << io::format_double(fe.estimate) << ','
                    << io::format_double(fe.objective) << ',' << io::format_double(fe.objective_init) << ','
                    << fe.evaluations << ',' << (fe.stalled ? 1 : 0) << '\n';
            }
            std::cout << "estimate " << est.final << " (truth " << get_parameter(truth, target) << ")\n";
        } else if (*exp_cmd) {
            Scenario s = load_scenario(exp_name);
            if (exp_seed) s.seed = *exp_seed;
            exp_opts.graybox = !no_graybox;
            exp_opts.cross_source = !no_cross;
            exp_opts.audit = !no_audit;
            const auto report = run_experiment(s, exp_opts);
            write_report(report, exp_out);
            for (const auto& c : report.cells) {
                std::cout << c.label << ": rmse_adaptive " << c.rmse_adaptive << ", rmse_graybox " << c.rmse_graybox
                          << ", rmse_cross_source " << c.rmse_cross_source << '\n';
            }
            if (!report.complete) return kData;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::InvalidArgument) return kUsage;
        return e.category() == ErrorCategory::numerical ? kNumerical : kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kOk;
}
