#pragma once

#include "genrehawkes/attribution.hpp"
#include "genrehawkes/fit_result.hpp"
#include "genrehawkes/forecast.hpp"
#include "genrehawkes/simulate.hpp"
#include "genrehawkes/taggraph.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace genrehawkes {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
[[nodiscard]] std::string format_number(double v);

/// {model, <named params>, branching_ratio?, loglik, aic, k, converged, n_iter, warnings}.
/// For Hawkes fits this is {model:"hawkes", mu, beta, omega, branching_ratio, loglik, aic, ...}.
[[nodiscard]] Json to_json(const FitResult& fit);
[[nodiscard]] FitResult fit_from_json(const Json& j);

[[nodiscard]] Json to_json(const AttributionReport& r);
[[nodiscard]] Json to_json(const ForecastRow& r);
[[nodiscard]] Json to_json(const ComparisonTable& t);
[[nodiscard]] Json to_json(const HawkesParams& p);
[[nodiscard]] HawkesParams hawkes_from_json(const Json& j);

/// Columns: cluster_id,model,train_days,horizon_days,loglik,aic,predicted,
/// actual,abs_error,rel_error,test_loglik,mc_std,status
void write_comparison_csv(std::ostream& out, const ComparisonTable& t);

/// Stacked-bar data: cluster_id,factor,value with factor in {self,popularity,exogenous}.
void write_attribution_csv(std::ostream& out, const std::vector<AttributionReport>& reports);

/// video_id,cluster_id
void write_assignments_csv(std::ostream& out, const std::vector<GenreCluster>& clusters);
/// Inverse of write_assignments_csv. Throws ParseError on malformed lines.
[[nodiscard]] std::map<std::string, int> read_assignments_csv(std::istream& in, const std::string& source);

/// Rebuilds clusters from a stream and a video_id -> cluster_id map. Every
/// video must be assigned; tag sets are the union of member tags.
[[nodiscard]] std::vector<GenreCluster> clusters_from_assignments(const EventStream& stream,
                                                                  const std::map<std::string, int>& assignment);

/// Per cluster: {cluster_id, tags, n_events, first_time, last_time}.
[[nodiscard]] Json cluster_summary_json(const std::vector<GenreCluster>& clusters, std::int64_t eta);

[[nodiscard]] Json ground_truth_json(const SyntheticCorpus& corpus, std::uint64_t seed);

/// Parses the cluster list accepted by `genrehawkes simulate --corpus-spec`:
/// {"horizon_days": T, "link_eta": k, "clusters": [{"tags": [...], "mu":..,
/// "beta":.., "omega":.., "uploaders": [...] | n, "stickiness": s}]}.
struct CorpusRequest {
    std::vector<ClusterSpec> clusters;
    double horizon{365.0};
    CorpusOptions options;
};
[[nodiscard]] CorpusRequest corpus_request_from_json(const Json& j);

}  // namespace genrehawkes
