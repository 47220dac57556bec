#pragma once

// Scenarios, synthetic dataset generation and the table/ideal experiments.

#include "hybrid/ann.hpp"
#include "hybrid/dataset.hpp"
#include "hybrid/features.hpp"
#include "hybrid/mi.hpp"
#include "hybrid/simulation.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hybrid {

struct Uniform {
    double low = 0.0;
    double high = 0.0;
};

struct Counts {
    int train = 100;
    int test = 30;
    int cross = 40;  // parameter-matched records for the gray box and the cross-source test
};

struct Scenario {
    std::string name = "custom";
    TargetParameter target = TargetParameter::delta;
    SystemParams fixed;
    std::map<std::string, Uniform> sampled;  // keys: d, beta, delta, f
    std::string grid_parameter;              // empty: a single cell
    std::vector<double> grid_values;
    Counts counts;
    NoiseConfig noise;
    std::uint64_t seed = 1;
    MonostablePolicy policy = MonostablePolicy::reject;
    std::vector<std::string> features;  // empty: every feature
    HyperParams hyper;
    bool tune = false;  // grid-search lambda and learning rate at the configured hidden width
    int max_redraws = 10;
    double max_rejection_rate = 0.05;

    /// Throws InvalidArgument.
    void validate() const;
    [[nodiscard]] std::size_t cell_count() const { return grid_values.empty() ? 1 : grid_values.size(); }
    /// Parameters of a grid cell before sampling.
    [[nodiscard]] SystemParams cell_params(std::size_t cell) const;
    [[nodiscard]] std::string cell_label(std::size_t cell) const;
};

[[nodiscard]] nlohmann::json to_json(const Scenario& s);
/// Throws ParseError or InvalidArgument.
[[nodiscard]] Scenario scenario_from_json(const nlohmann::json& j);

/// Built-in scenarios: table1, table2, ideal. Throws InvalidArgument for other names.
[[nodiscard]] Scenario builtin_scenario(const std::string& name);
/// A built-in name or a path to a JSON file.
[[nodiscard]] Scenario load_scenario(const std::string& name_or_path);

/// Independent stream for every (seed, tags...) combination.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

enum class RecordSet : std::uint64_t { train = 1, test = 2, cross = 3 };

struct Rejection {
    std::string record_id;
    int attempt = 0;
    std::string reason;
    bool exhausted = false;  // no valid draw within the redraw budget
};

struct GeneratedSet {
    Dataset records;
    std::vector<Rejection> rejections;
    int exhausted = 0;
};

/// Draws the cell's records of one kind: sample, trace, extract, add noise. Invalid draws
/// are redrawn up to max_redraws times. Throws TooManyRejections beyond the allowed rate.
[[nodiscard]] GeneratedSet generate_records(const Scenario& s, std::size_t cell, RecordSet kind, int count);

/// Sampled parameters of the records, without tracing (for the matched simulated sets).
[[nodiscard]] SystemParams sample_params(const Scenario& s, std::size_t cell, std::uint64_t seed);

struct CellData {
    Dataset train, test;
    std::vector<Rejection> rejections;
};

[[nodiscard]] CellData generate_dataset(const Scenario& s, std::size_t cell);

/// Writes train.csv, test.csv and rejections.csv for every cell (one sub-directory per
/// grid cell) plus the scenario itself.
void write_dataset(const Scenario& s, const std::string& dir);

// -----------------------------------------------------------------------------
// Cross-source features from stepped-sine sweeps
// -----------------------------------------------------------------------------

struct SweepExtraction {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int steps = 0;
    SweepSettings sweep;
    double resonance_gap = 0.2;    // minimum Omega separation of the two resonances' jumps
    double min_jump_ratio = 0.25;  // relative size of a real jump (reject policy only)
};

/// Sweep window covering the scenario's coupling range at a 0.005 frequency step.
[[nodiscard]] SweepExtraction default_sweep_extraction(const Scenario& s, std::size_t cell);

/// Jump-down points from the largest drops of the up-sweep, jump-up points from the largest
/// rises of the down-sweep; slopes are secants. Throws MissingFolds when the jumps are not
/// all found.
[[nodiscard]] FeatureVector sweep_features(const SystemParams& p, const SweepExtraction& x, MonostablePolicy policy);

struct CrossSourceResult {
    double rmse = 0.0;
    int used = 0;
    int mismatched = 0;
    std::vector<double> truth, predicted;
};

/// Throws EmptyInput for no records and SweepFeatureMismatch below 75% usable sweeps.
[[nodiscard]] CrossSourceResult cross_source_test(const TrainedEstimator& model, const Scenario& s,
                                                  std::size_t cell, const std::vector<SystemParams>& records);

// -----------------------------------------------------------------------------
// Experiments
// -----------------------------------------------------------------------------

struct ExperimentOptions {
    bool graybox = true;
    bool cross_source = true;
    bool audit = true;  // rank and forward search per cell
};

struct CellReport {
    std::string label;
    double value = 0.0;  // grid value
    std::size_t n_train = 0, n_test = 0, n_matched = 0;
    double rmse_adaptive = 0.0;          // continuation test set
    double rmse_adaptive_matched = 0.0;  // parameter-matched records
    double rmse_graybox = std::nan("");
    double rmse_cross_source = std::nan("");
    int graybox_stalled = 0;
    int cross_mismatched = 0;
    // wall-clock seconds
    double seconds_generate = 0.0, seconds_train = 0.0, seconds_predict = 0.0, seconds_graybox = 0.0,
           seconds_cross = 0.0;
    std::vector<double> test_truth, test_predicted;
    std::vector<double> matched_truth, matched_predicted, graybox_predicted;
    MIRanking ranking;
    std::optional<ForwardSearchReport> search;
    TrainedEstimator model;
};

struct ExperimentReport {
    Scenario scenario;
    std::vector<CellReport> cells;
    bool complete = true;
    std::vector<std::string> failures;
};

[[nodiscard]] CellReport run_cell(const Scenario& s, std::size_t cell, const ExperimentOptions& opts = {});
[[nodiscard]] ExperimentReport run_experiment(const Scenario& s, const ExperimentOptions& opts = {});

/// report.csv (deterministic), timing.csv, and per cell: parity, graybox, rank, search, model.
void write_report(const ExperimentReport& report, const std::string& dir);

}  // namespace hybrid
