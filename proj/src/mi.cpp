#include "hybrid/mi.hpp"

#include "hybrid/error.hpp"
#include "hybrid/io.hpp"
#include "hybrid/log.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hybrid {

const char* to_string(Binning b) noexcept { return b == Binning::equal_width ? "equal_width" : "equal_mass"; }

std::vector<int> quantize(std::span<const double> v, int bins, Binning binning) {
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "bin count must be positive");
    const std::size_t n = v.size();
    std::vector<int> out(n, 0);
    if (n == 0) return out;
    if (binning == Binning::equal_width) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double width = *hi - *lo;
        if (!(width > 0.0)) return out;
        for (std::size_t i = 0; i < n; ++i) {
            const int b = static_cast<int>(std::floor((v[i] - *lo) / width * bins));
            out[i] = std::clamp(b, 0, bins - 1);
        }
        return out;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::size_t r = 0;
    while (r < n) {
        std::size_t end = r;
        while (end < n && v[order[end]] == v[order[r]]) ++end;
        const int b = static_cast<int>(r * static_cast<std::size_t>(bins) / n);
        for (std::size_t k = r; k < end; ++k) out[order[k]] = b;
        r = end;
    }
    return out;
}

namespace {

double entropy(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (const double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

}  // namespace

double estimate_mi(std::span<const double> x, std::span<const double> y, int bx, int nk, Binning binning) {
    if (bx < 1 || nk < 1) throw Error(ErrorCode::InvalidArgument, "bin counts must be positive");
    if (x.size() != y.size()) throw Error(ErrorCode::InsufficientSamples, "feature and target sizes differ");
    const std::size_t need = 10 * static_cast<std::size_t>(std::max(bx, nk));
    if (x.size() < need) {
        throw Error(ErrorCode::InsufficientSamples,
                    std::to_string(x.size()) + " samples, need " + std::to_string(need));
    }
    const auto xq = quantize(x, bx, binning);
    const auto yq = quantize(y, nk, binning);
    const double n = static_cast<double>(x.size());

    std::vector<double> class_counts(static_cast<std::size_t>(nk), 0.0);
    std::vector<std::vector<double>> conditional(static_cast<std::size_t>(nk),
                                                 std::vector<double>(static_cast<std::size_t>(bx), 0.0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        class_counts[static_cast<std::size_t>(yq[i])] += 1.0;
        conditional[static_cast<std::size_t>(yq[i])][static_cast<std::size_t>(xq[i])] += 1.0;
    }

    // p(x) by total probability over the classes.
    std::vector<double> marginal(static_cast<std::size_t>(bx), 0.0);
    for (const auto& row : conditional) {
        for (std::size_t b = 0; b < row.size(); ++b) marginal[b] += row[b];
    }
    double mi = entropy(marginal, n);
    for (std::size_t k = 0; k < class_counts.size(); ++k) {
        if (class_counts[k] > 0.0) mi -= class_counts[k] / n * entropy(conditional[k], class_counts[k]);
    }
    return std::max(mi, 0.0);
}

std::vector<std::string> MIRanking::top(std::size_t k) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(k, entries.size()); ++i) out.push_back(entries[i].feature);
    return out;
}

MIRanking rank_features(const Dataset& data, TargetParameter target, const MIConfig& config) {
    const Dataset rows = valid_rows(data);
    if (rows.size() < 50) {
        throw Error(ErrorCode::InsufficientSamples,
                    "ranking needs 50 rows with every feature valid, got " + std::to_string(rows.size()));
    }
    MIRanking ranking;
    ranking.samples = rows.size();
    ranking.binning = config.binning;
    ranking.feature_bins = config.feature_bins;
    ranking.target_classes = config.target_classes;
    if (config.adapt_to_samples) {
        const int cap = static_cast<int>(rows.size() / 10);
        if (ranking.feature_bins > cap || ranking.target_classes > cap) {
            log::info("reducing MI bins to " + std::to_string(cap) + " for " + std::to_string(rows.size()) +
                      " samples");
            ranking.feature_bins = std::min(ranking.feature_bins, cap);
            ranking.target_classes = std::min(ranking.target_classes, cap);
        }
    }
    const auto y = target_column(rows, target);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const auto x = feature_column(rows, i);
        ranking.entries.push_back(
            {feature_names()[i], estimate_mi(x, y, ranking.feature_bins, ranking.target_classes, config.binning)});
    }
    std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                     [](const MIEntry& a, const MIEntry& b) { return a.mi > b.mi; });
    return ranking;
}

void write_ranking_csv(std::ostream& out, const MIRanking& ranking) {
    out << "# bins=" << ranking.feature_bins << " classes=" << ranking.target_classes
        << " binning=" << to_string(ranking.binning) << " samples=" << ranking.samples << " unit=nats\n";
    out << "feature,mi_nats,rank\n";
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        out << ranking.entries[i].feature << ',' << io::format_double(ranking.entries[i].mi) << ',' << i + 1 << '\n';
    }
}

MIRanking read_ranking_csv(std::istream& in) {
    MIRanking ranking;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream ss(line.substr(1));
            std::string token;
            while (ss >> token) {
                const auto eq = token.find('=');
                if (eq == std::string::npos) continue;
                const auto key = token.substr(0, eq), value = token.substr(eq + 1);
                if (key == "bins") ranking.feature_bins = std::stoi(value);
                if (key == "classes") ranking.target_classes = std::stoi(value);
                if (key == "samples") ranking.samples = std::stoul(value);
                if (key == "binning") ranking.binning = value == "equal_mass" ? Binning::equal_mass : Binning::equal_width;
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto cells = io::split_csv_line(line);
        if (cells.size() < 2) throw Error(ErrorCode::ParseError, "ranking row needs feature and mi_nats");
        (void)feature_index(cells[0]);
        ranking.entries.push_back({cells[0], io::parse_double(cells[1])});
    }
    if (ranking.entries.empty()) throw Error(ErrorCode::ParseError, "ranking file has no entries");
    return ranking;
}

}  // namespace hybrid
