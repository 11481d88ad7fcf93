#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "udemd/diffusion.hpp"
#include "udemd/error.hpp"
#include "udemd/metric.hpp"
#include "udemd/parallel.hpp"
#include "udemd/signal_set.hpp"

namespace udemd {

/// Sign of the exponent in the per-band weight 2^{s (K-k-1) alpha}.
enum class WeightSign : std::uint8_t {
    CoarseHeavy = 0,  // s = -1: the weighting in the distance definition (default)
    FineHeavy = 1,    // s = +1: the sign printed in the algorithm listing
};

struct SubsampleSpec {
    double rate = 1.0;
    std::uint64_t seed = 0;

    bool active() const noexcept { return rate < 1.0; }
    bool operator==(const SubsampleSpec&) const = default;
};

struct UdemdConfig {
    unsigned scales = 4;   // K
    double alpha = 0.5;
    SubsampleSpec subsample;
    WeightSign weight_sign = WeightSign::CoarseHeavy;
    /// Accept columns that are not probability vectors.
    bool keep_mass = false;

    static constexpr unsigned max_scales = 30;

    void validate() const {
        require(alpha > 0.0 && alpha <= 0.5, ErrorCode::InvalidArgument, "alpha must lie in (0, 1/2]");
        require(scales <= max_scales, ErrorCode::InvalidArgument,
                "K = " + std::to_string(scales) + " exceeds the cap of " + std::to_string(max_scales));
        require(subsample.rate > 0.0 && subsample.rate <= 1.0, ErrorCode::InvalidArgument,
                "subsample rate must lie in (0, 1]");
    }

    bool operator==(const UdemdConfig&) const = default;
};

/// Weight of difference band k < K; the final low-pass band has weight 1.
inline double band_weight(const UdemdConfig& cfg, unsigned k) {
    if (k >= cfg.scales) return 1.0;
    const double s = cfg.weight_sign == WeightSign::CoarseHeavy ? -1.0 : 1.0;
    const double exponent = s * (static_cast<double>(cfg.scales) - static_cast<double>(k) - 1.0) * cfg.alpha;
    return std::exp2(exponent);
}

/// m x (K+1)*w matrix (w = n, or fewer when subsampled). Row i is the
/// concatenation of the K weighted difference bands and the final
/// low-pass band of signal i.
class MultiscaleEmbedding {
public:
    MultiscaleEmbedding() = default;

    MultiscaleEmbedding(std::size_t signals, std::size_t nodes, std::size_t band_width, UdemdConfig cfg,
                        std::uint64_t graph_fingerprint)
        : signals_(signals), nodes_(nodes), band_width_(band_width), config_(cfg),
          graph_fingerprint_(graph_fingerprint),
          values_(signals * (cfg.scales + 1) * band_width, 0.0) {
        weights_.resize(cfg.scales + 1);
        for (unsigned k = 0; k <= cfg.scales; ++k) weights_[k] = band_weight(cfg, k);
    }

    std::size_t signal_count() const noexcept { return signals_; }
    std::size_t node_count() const noexcept { return nodes_; }
    std::size_t band_count() const noexcept { return config_.scales + 1; }
    std::size_t band_width() const noexcept { return band_width_; }
    std::size_t dimension() const noexcept { return band_count() * band_width_; }

    const UdemdConfig& config() const noexcept { return config_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::uint64_t graph_fingerprint() const noexcept { return graph_fingerprint_; }

    /// Retained node indices per band; empty when no subsampling applied.
    const std::vector<std::vector<std::size_t>>& kept_coordinates() const noexcept { return kept_; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dimension(), dimension()}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * dimension(), dimension()}; }

    std::span<const double> band(std::size_t i, std::size_t k) const {
        return row(i).subspan(k * band_width_, band_width_);
    }
    std::span<double> band(std::size_t i, std::size_t k) { return row(i).subspan(k * band_width_, band_width_); }

    const std::vector<double>& data() const noexcept { return values_; }
    std::vector<double>& mutable_data() noexcept { return values_; }

    RowMatrixView view() const { return {std::span<const double>(values_), signals_, dimension()}; }

    void set_weights(std::vector<double> w) { weights_ = std::move(w); }
    void set_kept_coordinates(std::vector<std::vector<std::size_t>> kept) { kept_ = std::move(kept); }

    bool operator==(const MultiscaleEmbedding&) const = default;

private:
    std::size_t signals_ = 0;
    std::size_t nodes_ = 0;
    std::size_t band_width_ = 0;
    UdemdConfig config_;
    std::uint64_t graph_fingerprint_ = 0;
    std::vector<double> weights_;
    std::vector<std::vector<std::size_t>> kept_;
    std::vector<double> values_;
};

/// Keeps a seeded uniform fraction of coordinates in every band (the same
/// mask for all signals) and rescales the survivors by 1/rate.
inline MultiscaleEmbedding subsample_embedding(const MultiscaleEmbedding& e, const SubsampleSpec& spec) {
    require(spec.rate > 0.0 && spec.rate <= 1.0, ErrorCode::InvalidArgument, "subsample rate must lie in (0, 1]");
    if (!spec.active()) return e;
    require(e.kept_coordinates().empty(), ErrorCode::InvalidArgument, "embedding is already subsampled");
    const std::size_t w = e.band_width();
    const auto keep = static_cast<std::size_t>(std::llround(spec.rate * static_cast<double>(w)));
    require(keep > 0, ErrorCode::EmptyBandAfterSubsample,
            "rate " + std::to_string(spec.rate) + " keeps no coordinate of a band of width " + std::to_string(w));

    std::mt19937_64 rng(spec.seed);
    std::vector<std::vector<std::size_t>> kept(e.band_count());
    std::vector<std::size_t> all(w);
    for (auto& band : kept) {
        std::iota(all.begin(), all.end(), std::size_t{0});
        // Partial Fisher-Yates: the first `keep` slots form a uniform sample.
        for (std::size_t i = 0; i < keep; ++i) {
            const auto j = std::uniform_int_distribution<std::size_t>(i, w - 1)(rng);
            std::swap(all[i], all[j]);
        }
        band.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep));
        std::sort(band.begin(), band.end());
    }

    UdemdConfig cfg = e.config();
    cfg.subsample = spec;
    MultiscaleEmbedding out(e.signal_count(), e.node_count(), keep, cfg, e.graph_fingerprint());
    out.set_weights(e.weights());
    const double scale = 1.0 / spec.rate;
    for (std::size_t i = 0; i < e.signal_count(); ++i)
        for (std::size_t k = 0; k < e.band_count(); ++k) {
            auto src = e.band(i, k);
            auto dst = out.band(i, k);
            for (std::size_t c = 0; c < keep; ++c) dst[c] = scale * src[kept[k][c]];
        }
    out.set_kept_coordinates(std::move(kept));
    return out;
}

/// Multiscale diffusion embedding. Scale k holds mu^(2^k) = P^{2^k} mu,
/// reached by cumulative pushes (2^K in total per signal). Band k < K is
/// w_k (mu^(2^{k+1}) - mu^(2^k)); band K is mu^(2^K).
/// Cost is O(2^K m nnz(P)).
inline MultiscaleEmbedding udemd_embed(const DiffusionOperator& op, const SignalSet& signals, const UdemdConfig& cfg) {
    cfg.validate();
    const std::size_t n = op.node_count();
    const std::size_t m = signals.signal_count();
    require(signals.node_count() == n, ErrorCode::DimensionMismatch,
            "signals have " + std::to_string(signals.node_count()) + " rows but the graph has " + std::to_string(n) +
                " nodes");
    if (!cfg.keep_mass) {
        for (std::size_t j = 0; j < m; ++j)
            require(std::abs(signals.column_sum(j) - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
                    "signal " + std::to_string(j) + " is not normalized; normalize or enable keep_mass");
    }

    UdemdConfig full_cfg = cfg;
    full_cfg.subsample = {};
    MultiscaleEmbedding e(m, n, n, full_cfg, op.graph_fingerprint());
    const unsigned K = cfg.scales;
    std::atomic<bool> non_finite{false};

    parallel_for(m, [&](std::size_t j) {
        std::vector<double> prev(signals.column(j).begin(), signals.column(j).end());
        std::vector<double> cur(n), scratch(n);
        op.push_forward(std::span<const double>(prev), std::span<double>(cur));  // mu^(2^0) = P mu
        for (unsigned k = 0; k < K; ++k) {
            prev = cur;
            op.push_forward(cur, scratch, std::size_t{1} << k);  // 2^k more steps reach 2^{k+1}
            const double w = e.weights()[k];
            auto band = e.band(j, k);
            for (std::size_t v = 0; v < n; ++v) band[v] = w * (cur[v] - prev[v]);
        }
        auto last = e.band(j, K);
        std::copy(cur.begin(), cur.end(), last.begin());
        for (double v : e.row(j))
            if (!std::isfinite(v)) {
                non_finite = true;
                break;
            }
    });
    require(!non_finite, ErrorCode::NonFiniteValue, "embedding produced a non-finite coordinate");

    if (cfg.subsample.active()) return subsample_embedding(e, cfg.subsample);
    return e;
}

inline double udemd_distance(const MultiscaleEmbedding& e, std::size_t i, std::size_t j) {
    require(i < e.signal_count() && j < e.signal_count(), ErrorCode::IndexOutOfRange,
            "signal index out of range (" + std::to_string(i) + ", " + std::to_string(j) + ") for " +
                std::to_string(e.signal_count()) + " signals");
    return l1_distance(e.row(i), e.row(j));
}

inline DistanceMatrix udemd_distance_matrix(const MultiscaleEmbedding& e) { return pairwise_l1(e.view(), "udemd"); }

} // namespace udemd
