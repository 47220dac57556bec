#pragma once

// Plug-in histogram estimate of the mutual information between one feature and
// a target quantized into classes y_k:
//   I = H(X) - sum_k p(y_k) H(X | y_k),   p(x) = sum_k p(x | y_k) p(y_k)
// in nats.

#include "hybrid/dataset.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hybrid {

enum class Binning { equal_width, equal_mass };

[[nodiscard]] const char* to_string(Binning b) noexcept;

/// Bin index in [0, bins) of every sample. Equal-width bins span the observed range
/// (a constant sample lands in bin 0); equal-mass bins follow the sample ranks, with
/// tied values sharing a bin.
[[nodiscard]] std::vector<int> quantize(std::span<const double> v, int bins, Binning binning);

/// Throws InsufficientSamples unless both sizes agree and n >= 10 max(bx, nk).
[[nodiscard]] double estimate_mi(std::span<const double> x, std::span<const double> y, int bx, int nk,
                                 Binning binning = Binning::equal_width);

struct MIConfig {
    int feature_bins = 16;
    int target_classes = 10;
    Binning binning = Binning::equal_width;
    // Shrink both bin counts to n / 10 when the data are too few for the requested ones.
    bool adapt_to_samples = true;
};

struct MIEntry {
    std::string feature;
    double mi = 0.0;  // nats
};

struct MIRanking {
    std::vector<MIEntry> entries;  // descending; ties keep canonical feature order
    int feature_bins = 0;          // as actually used
    int target_classes = 0;
    Binning binning = Binning::equal_width;
    std::size_t samples = 0;

    [[nodiscard]] std::vector<std::string> top(std::size_t k) const;
};

/// Needs at least 50 rows with every feature valid; other rows are ignored.
[[nodiscard]] MIRanking rank_features(const Dataset& data, TargetParameter target, const MIConfig& config = {});

/// Comment header line with bins, classes, samples and unit, then feature,mi_nats,rank.
void write_ranking_csv(std::ostream& out, const MIRanking& ranking);
[[nodiscard]] MIRanking read_ranking_csv(std::istream& in);

}  // namespace hybrid
