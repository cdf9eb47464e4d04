#pragma once

#include "genrehawkes/hawkes.hpp"
#include "genrehawkes/taggraph.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace genrehawkes {

/// p_{i->j} = beta exp(-omega (t_j - t_i)) / lambda(t_j), where lambda sums
/// over every event before j in the canonical order. Throws
/// std::invalid_argument unless i < j < times.size().
[[nodiscard]] double triggering_probability(const HawkesParams& p, std::span<const double> times, std::size_t i,
                                            std::size_t j);

/// Pairs with omega (t_j - t_i) above this are skipped; their weight is < e^-40.
inline constexpr double kPairCutoff = 40.0;

enum class PopularityAverage {
    prior,     // mean over the uploader's uploads strictly before j (canonical order)
    all_time,  // mean over every upload by that uploader
};

/// Per-video popularity psi = views + w_comments * comments and the uploader
/// threshold psi_avg each pair is compared against. Built once from the full
/// stream, so thresholds are platform-wide rather than cluster-restricted.
/// An uploader with no earlier uploads has threshold 0.
class PopularityIndex {
public:
    PopularityIndex(const EventStream& stream, double w_comments, PopularityAverage mode = PopularityAverage::prior);

    [[nodiscard]] double psi(const std::string& video_id) const;
    /// Threshold used when `video_id` is the later event j of a pair.
    [[nodiscard]] double threshold(const std::string& video_id) const;
    [[nodiscard]] double w_comments() const noexcept { return w_comments_; }
    [[nodiscard]] PopularityAverage mode() const noexcept { return mode_; }

private:
    struct Entry {
        double psi;
        double threshold;
    };
    const Entry& at(const std::string& video_id) const;

    double w_comments_;
    PopularityAverage mode_;
    std::unordered_map<std::string, Entry> entries_;
};

struct PairScores {
    double total{0.0};       // sum of p_{i->j} over i < j
    double same_uploader{0.0};
    double popular{0.0};
    std::size_t n_pairs{0};  // pairs actually visited
};

/// One pass over the cluster accumulating the numerators of the self and
/// popularity scores. The denominator uses the exact identity
/// sum_{i<j} p_{i->j} = (lambda_j - mu) / lambda_j; numerators skip pairs
/// beyond kPairCutoff.
[[nodiscard]] PairScores accumulate_pair_scores(const GenreCluster& cluster, const HawkesParams& p,
                                                const PopularityIndex* popularity);

/// Share of triggering mass between uploads by the same uploader. Throws
/// genrehawkes::Error("no endogenous mass to attribute") when beta = 0 or the
/// cluster has fewer than two events.
[[nodiscard]] double self_score(const GenreCluster& cluster, const HawkesParams& p);

/// Share of triggering mass from pairs where psi_i exceeds the threshold of
/// uploader(j). Same errors as self_score.
[[nodiscard]] double pop_score(const GenreCluster& cluster, const HawkesParams& p, const PopularityIndex& popularity);

[[nodiscard]] inline double exo_score(double s_self, double s_pop) { return 1.0 - (s_self + s_pop); }

struct AttributionReport {
    int cluster_id{0};
    bool attributable{false};
    std::string reason;  // set when not attributable
    double s_self{0.0};
    double s_pop{0.0};
    double s_exo{0.0};
    std::size_t n_pairs_evaluated{0};
    double w_comments{1.0};
    bool negative_exo{false};
};

/// One report per cluster, in cluster order. `fits` maps cluster_id to the
/// Hawkes fit of that cluster; a missing entry throws. Clusters that cannot
/// be scored (unconverged fit, beta = 0, fewer than two events) get
/// attributable = false and a reason.
[[nodiscard]] std::vector<AttributionReport> attribution_report(const std::vector<GenreCluster>& clusters,
                                                                const std::map<int, FitResult>& fits,
                                                                const PopularityIndex& popularity,
                                                                unsigned threads = 1);

}  // namespace genrehawkes
