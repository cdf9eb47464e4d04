#pragma once

#include "genrehawkes/hawkes.hpp"
#include "genrehawkes/ingest.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace genrehawkes {

struct SimConfig {
    std::uint64_t seed{0};
    double t_start{0.0};
    double t_end{1.0};
    std::vector<double> history;  // conditioning events, sorted, none after t_start
    std::uint64_t stream{0};      // independent substream under the same seed
};

/// Ogata thinning for the exponential-kernel Hawkes process. Returns event
/// times in (t_start, t_end]. Throws std::invalid_argument when the branching
/// ratio is >= 1 or the config is malformed.
[[nodiscard]] std::vector<double> simulate_hawkes(const HawkesParams& p, const SimConfig& config);

/// Thinning against a constant bound. Throws std::invalid_argument if the
/// rate function ever exceeds `rate_bound`.
[[nodiscard]] std::vector<double> simulate_nhpp(const std::function<double(double)>& rate, double rate_bound,
                                                const SimConfig& config);

struct UploaderModel {
    std::vector<std::string> pool;
    /// Probability that an upload reuses the previous uploader of the cluster.
    double stickiness{0.0};
};

struct PopularityModel {
    double quality_sigma{0.5};  // q ~ lognormal(0, sigma^2) per uploader
    double views_scale{50.0};   // views ~ Poisson(views_scale q)
    double comments_scale{5.0}; // comments ~ Poisson(comments_scale q)
};

struct ClusterSpec {
    std::vector<std::string> tags;
    HawkesParams params;
    UploaderModel uploaders;
    PopularityModel popularity;
};

struct CorpusOptions {
    /// Every cluster's first `link_eta` uploads carry all of its tags, so each
    /// intra-cluster tag pair co-occurs at least that often.
    std::int64_t link_eta{2};
    /// Later uploads keep the cluster's first tag and each other tag with
    /// this probability.
    double extra_tag_probability{0.5};
    double origin_epoch{1301616000.0};  // 2011-04-01T00:00:00Z
};

struct SyntheticCorpus {
    EventStream stream;  // horizon = T
    std::vector<ClusterSpec> truth;
    std::map<std::string, int> labels;  // video_id -> index into truth
};

/// Simulates each cluster independently (its own Philox stream), then merges.
/// Throws std::invalid_argument when tag sets overlap.
[[nodiscard]] SyntheticCorpus make_synthetic_corpus(const std::vector<ClusterSpec>& spec, double horizon,
                                                    std::uint64_t seed, const CorpusOptions& opts = {},
                                                    unsigned threads = 1);

}  // namespace genrehawkes
