#pragma once

// One-hidden-layer regressor (tanh hidden units, linear output) trained by
// full-batch gradient descent with momentum on MSE + lambda * sum(W^2), with
// validation-based early stopping. Everything is seeded and deterministic.

#include "hybrid/dataset.hpp"
#include "hybrid/mi.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hybrid {

struct Network {
    Eigen::MatrixXd W1;  // hidden x inputs
    Eigen::VectorXd b1;
    Eigen::VectorXd W2;  // hidden
    double b2 = 0.0;
};

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
[[nodiscard]] Network init_network(int inputs, int hidden, std::uint64_t seed);

/// X holds one sample per row.
[[nodiscard]] Eigen::VectorXd forward(const Network& net, const Eigen::MatrixXd& X);

/// mean((out - y)^2) + lambda * (|W1|^2 + |W2|^2); fills `grad` when given.
double loss_and_gradient(const Network& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                         Network* grad);

struct HyperParams {
    int hidden = 15;
    double lambda = 0.0;
    double learning_rate = 1e-2;
};

struct TrainingOptions {
    double momentum = 0.9;
    int max_epochs = 20000;
    int patience = 200;
    bool restore_best = true;  // false: keep the last iterate instead of the best-validation one
};

struct Split {
    std::vector<std::size_t> train, validation, test;
};

/// 60/20/20 by seeded shuffle; at least one training row.
[[nodiscard]] Split split_indices(std::size_t n, std::uint64_t seed);

struct Metrics {
    double train_rmse = 0.0;
    double validation_rmse = 0.0;  // nan without validation rows
    double test_rmse = 0.0;        // nan without test rows
    int epochs = 0;
    int best_epoch = 0;
};

struct TrainedEstimator {
    std::vector<std::string> features;
    std::vector<double> means;
    std::vector<double> stds;
    int hidden = 0;
    Network net;  // acts on normalized inputs, outputs the target in its own units
    std::string activation = "tanh";
    double lambda = 0.0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    Metrics metrics;

    [[nodiscard]] double predict_row(std::span<const double> x) const;
};

struct Seeds {
    std::uint64_t split = 0;
    std::uint64_t init = 0;
};

/// Trains on rows X (raw feature values) with targets y. Throws DegenerateFeature
/// when a feature is constant over two or more training rows, NonFinite on divergence.
[[nodiscard]] TrainedEstimator train_arrays(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const std::vector<std::string>& names, const HyperParams& hp, Seeds seeds,
                                            const TrainingOptions& opts = {});

/// Rows lacking a selected feature are skipped. Throws EmptyInput if none remain.
[[nodiscard]] TrainedEstimator train(const Dataset& data, const std::vector<std::string>& features,
                                     TargetParameter target, const HyperParams& hp, std::uint64_t seed,
                                     const TrainingOptions& opts = {});

/// Throws MissingFeature when a selected feature is invalid in v.
[[nodiscard]] double predict(const TrainedEstimator& model, const FeatureVector& v);
[[nodiscard]] std::vector<double> predict(const TrainedEstimator& model, const Dataset& data);

[[nodiscard]] double rmse(std::span<const double> truth, std::span<const double> estimate);

/// Feature matrix of the rows with every selected feature valid, and their targets.
struct DesignMatrix {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::size_t> rows;  // indices into the source dataset
};
[[nodiscard]] DesignMatrix design_matrix(const Dataset& data, const std::vector<std::string>& features,
                                         TargetParameter target);

struct GridSpec {
    std::vector<int> hidden{5, 10, 15, 20};
    std::vector<double> lambda{0.0, 1e-4, 1e-3, 1e-2};
    std::vector<double> learning_rate{1e-3, 1e-2};
};

struct GridCell {
    HyperParams hp;
    double validation_rmse = 0.0;
};

struct GridSearchResult {
    HyperParams best;
    TrainedEstimator model;
    std::vector<GridCell> cells;  // in evaluation order
};

/// Exhaustive search by validation RMSE; ties go to the smaller hidden width, then the
/// smaller lambda. All cells share the split; cell c initializes with seed + c.
[[nodiscard]] GridSearchResult grid_search(const Dataset& data, const std::vector<std::string>& features,
                                           TargetParameter target, const GridSpec& grid, std::uint64_t seed,
                                           const TrainingOptions& opts = {});

struct HyperPolicy {
    bool use_grid = false;
    HyperParams fixed;
    GridSpec grid;
};

struct ForwardStep {
    std::size_t k = 0;
    std::vector<std::string> features;
    double validation_rmse = 0.0;
    HyperParams hp;
};

struct ForwardSearchReport {
    std::vector<ForwardStep> steps;
    std::size_t selected_k = 0;
};

/// Trains on each top-k prefix of the ranking, k = 1..size; selects the smallest k
/// reaching the minimum validation RMSE.
[[nodiscard]] ForwardSearchReport forward_search(const Dataset& data, const MIRanking& ranking, TargetParameter target,
                                                 const HyperPolicy& policy, std::uint64_t seed,
                                                 const TrainingOptions& opts = {});

[[nodiscard]] nlohmann::json to_json(const TrainedEstimator& model);
/// Throws ParseError on malformed input.
[[nodiscard]] TrainedEstimator model_from_json(const nlohmann::json& j);

}  // namespace hybrid
