#include "hybrid/ann.hpp"

#include "hybrid/error.hpp"
#include "hybrid/log.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hybrid {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Network init_network(int inputs, int hidden, std::uint64_t seed) {
    if (inputs < 1 || hidden < 1) throw Error(ErrorCode::InvalidArgument, "network needs inputs and hidden units");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double limit) {
        return std::uniform_real_distribution<double>(-limit, limit)(rng);
    };
    Network net;
    net.W1.resize(hidden, inputs);
    const double l1 = std::sqrt(6.0 / (inputs + hidden));
    for (int r = 0; r < hidden; ++r) {
        for (int c = 0; c < inputs; ++c) net.W1(r, c) = uniform(l1);
    }
    net.b1 = VectorXd::Zero(hidden);
    net.W2.resize(hidden);
    const double l2 = std::sqrt(6.0 / (hidden + 1));
    for (int r = 0; r < hidden; ++r) net.W2[r] = uniform(l2);
    net.b2 = 0.0;
    return net;
}

namespace {

MatrixXd hidden_activations(const Network& net, const MatrixXd& X) {
    MatrixXd Z = X * net.W1.transpose();
    Z.rowwise() += net.b1.transpose();
    return Z.array().tanh().matrix();
}

}  // namespace

VectorXd forward(const Network& net, const MatrixXd& X) {
    return (hidden_activations(net, X) * net.W2).array() + net.b2;
}

double loss_and_gradient(const Network& net, const MatrixXd& X, const VectorXd& y, double lambda, Network* grad) {
    const double n = static_cast<double>(X.rows());
    const MatrixXd H = hidden_activations(net, X);
    const VectorXd r = (H * net.W2).array() + net.b2 - y.array();
    const double loss = r.squaredNorm() / n + lambda * (net.W1.squaredNorm() + net.W2.squaredNorm());
    if (grad) {
        const VectorXd dout = 2.0 / n * r;
        grad->W2 = H.transpose() * dout + 2.0 * lambda * net.W2;
        grad->b2 = dout.sum();
        const MatrixXd dZ = ((dout * net.W2.transpose()).array() * (1.0 - H.array().square())).matrix();
        grad->W1 = dZ.transpose() * X + 2.0 * lambda * net.W1;
        grad->b1 = dZ.colwise().sum().transpose();
    }
    return loss;
}

Split split_indices(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorCode::EmptyInput, "cannot split an empty dataset");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit draw so the order does not depend on the library's shuffle.
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i)(rng);
        std::swap(idx[i], idx[j]);
    }
    const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n))));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n))));
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                        idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    return s;
}

double rmse(std::span<const double> truth, std::span<const double> estimate) {
    if (truth.size() != estimate.size()) throw Error(ErrorCode::InvalidArgument, "rmse: size mismatch");
    if (truth.empty()) throw Error(ErrorCode::EmptyInput, "rmse of an empty set");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) s += (truth[i] - estimate[i]) * (truth[i] - estimate[i]);
    return std::sqrt(s / static_cast<double>(truth.size()));
}

double TrainedEstimator::predict_row(std::span<const double> x) const {
    if (x.size() != features.size()) throw Error(ErrorCode::InvalidArgument, "input width does not match the model");
    VectorXd z(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) z[static_cast<Eigen::Index>(i)] = (x[i] - means[i]) / stds[i];
    const VectorXd h = (net.W1 * z + net.b1).array().tanh();
    return h.dot(net.W2) + net.b2;
}

namespace {

MatrixXd take_rows(const MatrixXd& X, const std::vector<std::size_t>& rows) {
    MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

VectorXd take(const VectorXd& y, const std::vector<std::size_t>& rows) {
    VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
    return out;
}

double rmse_of(const Network& net, const MatrixXd& Z, const VectorXd& y) {
    if (Z.rows() == 0) return std::nan("");
    return std::sqrt((forward(net, Z) - y).squaredNorm() / static_cast<double>(Z.rows()));
}

}  // namespace

TrainedEstimator train_arrays(const MatrixXd& X, const VectorXd& y, const std::vector<std::string>& names,
                              const HyperParams& hp, Seeds seeds, const TrainingOptions& opts) {
    if (X.rows() == 0) throw Error(ErrorCode::EmptyInput, "no training rows");
    if (X.rows() != y.size() || static_cast<std::size_t>(X.cols()) != names.size()) {
        throw Error(ErrorCode::InvalidArgument, "design matrix, targets and feature names disagree");
    }
    if (hp.hidden < 1 || hp.lambda < 0.0 || !(hp.learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "hidden >= 1, lambda >= 0 and learning rate > 0 required");
    }
    const Split split = split_indices(static_cast<std::size_t>(X.rows()), seeds.split);
    const MatrixXd Xtr = take_rows(X, split.train);
    const VectorXd ytr = take(y, split.train);
    const auto n_train = static_cast<double>(Xtr.rows());

    TrainedEstimator model;
    model.features = names;
    model.hidden = hp.hidden;
    model.lambda = hp.lambda;
    model.learning_rate = hp.learning_rate;
    model.seed = seeds.init;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double mean = Xtr.col(c).mean();
        double sd = 1.0;
        if (Xtr.rows() >= 2) {
            sd = std::sqrt((Xtr.col(c).array() - mean).square().sum() / (n_train - 1.0));
            if (!(sd > 0.0)) {
                throw Error(ErrorCode::DegenerateFeature,
                            "feature '" + names[static_cast<std::size_t>(c)] + "' is constant on the training split");
            }
        }
        model.means.push_back(mean);
        model.stds.push_back(sd);
    }
    MatrixXd Z = X;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        Z.col(c) = (X.col(c).array() - model.means[static_cast<std::size_t>(c)]) / model.stds[static_cast<std::size_t>(c)];
    }

    // The network learns the standardized target; the scaling is folded into the output layer afterwards.
    const double y_mean = ytr.mean();
    double y_std = 1.0;
    if (ytr.size() >= 2) {
        const double s = std::sqrt((ytr.array() - y_mean).square().sum() / (n_train - 1.0));
        if (s > 0.0) y_std = s;
    }
    const VectorXd t = (y.array() - y_mean) / y_std;
    const MatrixXd Ztr = take_rows(Z, split.train), Zva = take_rows(Z, split.validation), Zte = take_rows(Z, split.test);
    const VectorXd ttr = take(t, split.train), tva = take(t, split.validation);

    Network net = init_network(static_cast<int>(X.cols()), hp.hidden, seeds.init);
    Network velocity{MatrixXd::Zero(net.W1.rows(), net.W1.cols()), VectorXd::Zero(net.b1.size()),
                     VectorXd::Zero(net.W2.size()), 0.0};
    Network grad;
    Network best = net;
    const bool monitor_validation = Zva.rows() > 0;
    double best_score = monitor_validation ? rmse_of(net, Zva, tva) : rmse_of(net, Ztr, ttr);
    int best_epoch = 0;
    int epoch = 0;
    for (epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        const double loss = loss_and_gradient(net, Ztr, ttr, hp.lambda, &grad);
        if (!std::isfinite(loss)) {
            throw Error(ErrorCode::NonFinite, "training diverged at epoch " + std::to_string(epoch));
        }
        velocity.W1 = opts.momentum * velocity.W1 - hp.learning_rate * grad.W1;
        velocity.b1 = opts.momentum * velocity.b1 - hp.learning_rate * grad.b1;
        velocity.W2 = opts.momentum * velocity.W2 - hp.learning_rate * grad.W2;
        velocity.b2 = opts.momentum * velocity.b2 - hp.learning_rate * grad.b2;
        net.W1 += velocity.W1;
        net.b1 += velocity.b1;
        net.W2 += velocity.W2;
        net.b2 += velocity.b2;

        const double score = monitor_validation ? rmse_of(net, Zva, tva) : rmse_of(net, Ztr, ttr);
        if (!std::isfinite(score)) throw Error(ErrorCode::NonFinite, "training diverged at epoch " + std::to_string(epoch));
        if (score < best_score) {
            best_score = score;
            best = net;
            best_epoch = epoch;
        } else if (epoch - best_epoch >= opts.patience) {
            break;
        }
    }

    if (!opts.restore_best) best = net;
    best.W2 *= y_std;
    best.b2 = best.b2 * y_std + y_mean;
    model.net = best;
    model.metrics.epochs = std::min(epoch, opts.max_epochs);
    model.metrics.best_epoch = best_epoch;
    model.metrics.train_rmse = rmse_of(best, Ztr, take(y, split.train));
    model.metrics.validation_rmse = rmse_of(best, Zva, take(y, split.validation));
    model.metrics.test_rmse = rmse_of(best, Zte, take(y, split.test));
    return model;
}

DesignMatrix design_matrix(const Dataset& data, const std::vector<std::string>& features, TargetParameter target) {
    if (features.empty()) throw Error(ErrorCode::InvalidArgument, "no features selected");
    std::vector<std::size_t> cols;
    for (const auto& f : features) cols.push_back(feature_index(f));
    DesignMatrix dm;
    for (std::size_t r = 0; r < data.size(); ++r) {
        const auto& v = data[r].features;
        if (std::all_of(cols.begin(), cols.end(), [&](std::size_t c) { return v.valid[c]; })) dm.rows.push_back(r);
    }
    if (dm.rows.size() < data.size()) {
        log::info(std::to_string(data.size() - dm.rows.size()) + " rows lack a selected feature and were skipped");
    }
    dm.X.resize(static_cast<Eigen::Index>(dm.rows.size()), static_cast<Eigen::Index>(cols.size()));
    dm.y.resize(static_cast<Eigen::Index>(dm.rows.size()));
    for (std::size_t i = 0; i < dm.rows.size(); ++i) {
        const auto& rec = data[dm.rows[i]];
        for (std::size_t c = 0; c < cols.size(); ++c) {
            dm.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rec.features.values[cols[c]];
        }
        dm.y[static_cast<Eigen::Index>(i)] = target_value(rec, target);
    }
    return dm;
}

TrainedEstimator train(const Dataset& data, const std::vector<std::string>& features, TargetParameter target,
                       const HyperParams& hp, std::uint64_t seed, const TrainingOptions& opts) {
    const auto dm = design_matrix(data, features, target);
    if (dm.rows.empty()) throw Error(ErrorCode::EmptyInput, "no rows carry every selected feature");
    return train_arrays(dm.X, dm.y, features, hp, {seed, seed}, opts);
}

double predict(const TrainedEstimator& model, const FeatureVector& v) {
    std::vector<double> x;
    x.reserve(model.features.size());
    for (const auto& name : model.features) {
        const std::size_t i = feature_index(name);
        if (!v.valid[i]) throw Error(ErrorCode::MissingFeature, "feature '" + name + "' is invalid");
        x.push_back(v.values[i]);
    }
    return model.predict_row(x);
}

std::vector<double> predict(const TrainedEstimator& model, const Dataset& data) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& r : data) out.push_back(predict(model, r.features));
    return out;
}

GridSearchResult grid_search(const Dataset& data, const std::vector<std::string>& features, TargetParameter target,
                             const GridSpec& grid, std::uint64_t seed, const TrainingOptions& opts) {
    if (grid.hidden.empty() || grid.lambda.empty() || grid.learning_rate.empty()) {
        throw Error(ErrorCode::InvalidArgument, "every hyperparameter grid needs at least one value");
    }
    const auto dm = design_matrix(data, features, target);
    if (dm.rows.empty()) throw Error(ErrorCode::EmptyInput, "no rows carry every selected feature");

    GridSearchResult result;
    bool have_best = false;
    double best_score = 0.0;
    std::uint64_t cell = 0;
    for (const int hidden : grid.hidden) {
        for (const double lambda : grid.lambda) {
            for (const double lr : grid.learning_rate) {
                const HyperParams hp{hidden, lambda, lr};
                auto model = train_arrays(dm.X, dm.y, features, hp, {seed, seed + cell}, opts);
                ++cell;
                const double score = std::isnan(model.metrics.validation_rmse) ? model.metrics.train_rmse
                                                                              : model.metrics.validation_rmse;
                result.cells.push_back({hp, score});
                const bool better =
                    !have_best || score < best_score ||
                    (score == best_score && (hidden < result.best.hidden ||
                                             (hidden == result.best.hidden && lambda < result.best.lambda)));
                if (better) {
                    have_best = true;
                    best_score = score;
                    result.best = hp;
                    result.model = std::move(model);
                }
            }
        }
    }
    return result;
}

ForwardSearchReport forward_search(const Dataset& data, const MIRanking& ranking, TargetParameter target,
                                   const HyperPolicy& policy, std::uint64_t seed, const TrainingOptions& opts) {
    if (ranking.entries.size() != kFeatureCount) {
        throw Error(ErrorCode::InvalidArgument, "forward search needs a ranking of all " +
                                                    std::to_string(kFeatureCount) + " features");
    }
    ForwardSearchReport report;
    double best = 0.0;
    for (std::size_t k = 1; k <= ranking.entries.size(); ++k) {
        ForwardStep step;
        step.k = k;
        step.features = ranking.top(k);
        TrainedEstimator model;
        if (policy.use_grid) {
            auto g = grid_search(data, step.features, target, policy.grid, seed, opts);
            step.hp = g.best;
            model = std::move(g.model);
        } else {
            step.hp = policy.fixed;
            model = train(data, step.features, target, policy.fixed, seed, opts);
        }
        step.validation_rmse =
            std::isnan(model.metrics.validation_rmse) ? model.metrics.train_rmse : model.metrics.validation_rmse;
        if (report.selected_k == 0 || step.validation_rmse < best) {
            best = step.validation_rmse;
            report.selected_k = k;
        }
        report.steps.push_back(std::move(step));
    }
    return report;
}

// -----------------------------------------------------------------------------
// Persistence
// -----------------------------------------------------------------------------

namespace {

nlohmann::json matrix_json(const MatrixXd& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw Error(ErrorCode::ParseError, "matrix dimensions do not match its data");
    }
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

nlohmann::json metric_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double metric_from_json(const nlohmann::json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

nlohmann::json to_json(const TrainedEstimator& model) {
    return {
        {"features", model.features},
        {"norm", {{"means", model.means}, {"stds", model.stds}}},
        {"hidden", model.hidden},
        {"W1", matrix_json(model.net.W1)},
        {"b1", std::vector<double>(model.net.b1.data(), model.net.b1.data() + model.net.b1.size())},
        {"W2", matrix_json(model.net.W2.transpose())},
        {"b2", model.net.b2},
        {"activation", model.activation},
        {"lambda", model.lambda},
        {"learning_rate", model.learning_rate},
        {"seed", model.seed},
        {"metrics",
         {{"train_rmse", metric_json(model.metrics.train_rmse)},
          {"validation_rmse", metric_json(model.metrics.validation_rmse)},
          {"test_rmse", metric_json(model.metrics.test_rmse)},
          {"epochs", model.metrics.epochs},
          {"best_epoch", model.metrics.best_epoch}}},
    };
}

TrainedEstimator model_from_json(const nlohmann::json& j) {
    TrainedEstimator m;
    try {
        m.features = j.at("features").get<std::vector<std::string>>();
        m.means = j.at("norm").at("means").get<std::vector<double>>();
        m.stds = j.at("norm").at("stds").get<std::vector<double>>();
        m.hidden = j.at("hidden").get<int>();
        m.net.W1 = matrix_from_json(j.at("W1"));
        const auto b1 = j.at("b1").get<std::vector<double>>();
        m.net.b1 = Eigen::Map<const VectorXd>(b1.data(), static_cast<Eigen::Index>(b1.size()));
        m.net.W2 = matrix_from_json(j.at("W2")).transpose();
        m.net.b2 = j.at("b2").get<double>();
        m.activation = j.at("activation").get<std::string>();
        m.lambda = j.at("lambda").get<double>();
        m.learning_rate = j.value("learning_rate", 0.0);
        m.seed = j.at("seed").get<std::uint64_t>();
        const auto& mj = j.at("metrics");
        m.metrics.train_rmse = metric_from_json(mj.at("train_rmse"));
        m.metrics.validation_rmse = metric_from_json(mj.at("validation_rmse"));
        m.metrics.test_rmse = metric_from_json(mj.at("test_rmse"));
        m.metrics.epochs = mj.value("epochs", 0);
        m.metrics.best_epoch = mj.value("best_epoch", 0);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("model file: ") + e.what());
    }
    const auto k = static_cast<Eigen::Index>(m.features.size());
    if (m.activation != "tanh") throw Error(ErrorCode::ParseError, "unsupported activation '" + m.activation + "'");
    if (m.means.size() != m.features.size() || m.stds.size() != m.features.size() || m.net.W1.rows() != m.hidden ||
        m.net.W1.cols() != k || m.net.b1.size() != m.hidden || m.net.W2.size() != m.hidden) {
        throw Error(ErrorCode::ParseError, "model dimensions are inconsistent");
    }
    for (const auto& f : m.features) (void)feature_index(f);
    return m;
}

}  // namespace hybrid
