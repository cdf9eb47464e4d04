#pragma once

#include "genrehawkes/ingest.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace genrehawkes {

/// Tag co-occurrence graph. Nodes are kept sorted; edges are keyed by the
/// (smaller, larger) node index pair and always carry weight >= 1.
class TagGraph {
public:
    using NodeIndex = std::uint32_t;
    using EdgeKey = std::pair<NodeIndex, NodeIndex>;

    TagGraph() = default;
    /// `nodes` must be sorted and unique; every edge key must satisfy first < second.
    TagGraph(std::vector<std::string> nodes, std::map<EdgeKey, std::uint64_t> edges);

    [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::map<EdgeKey, std::uint64_t>& edges() const noexcept { return edges_; }
    [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }

    [[nodiscard]] std::optional<NodeIndex> index_of(const std::string& tag) const;
    /// 0 when the pair is absent (or a tag is unknown, or a == b).
    [[nodiscard]] std::uint64_t weight(const std::string& a, const std::string& b) const;
    [[nodiscard]] std::uint64_t max_weight() const;

    friend bool operator==(const TagGraph&, const TagGraph&) = default;

private:
    std::vector<std::string> nodes_;
    std::map<EdgeKey, std::uint64_t> edges_;
};

/// w(a, b) = number of videos tagged with both a and b. `threads` splits the
/// count into per-worker partial maps (0 = hardware concurrency).
[[nodiscard]] TagGraph build_affinity_graph(const EventStream& stream, unsigned threads = 1);

/// Keeps edges with weight >= eta; nodes are never removed. Throws
/// std::invalid_argument when eta < 1.
[[nodiscard]] TagGraph prune_graph(const TagGraph& graph, std::int64_t eta);

using TagSet = std::vector<std::string>;  // sorted

/// Maximal connected tag sets, each sorted, listed by smallest member tag.
[[nodiscard]] std::vector<TagSet> connected_components(const TagGraph& graph);

struct GenreCluster {
    int cluster_id{0};
    TagSet tags;
    EventStream events;  // shares origin and horizon with the source stream
};

/// Puts every video in the component holding the plurality of its tags. Ties
/// go to the component whose smallest tag sorts first. Empty clusters are
/// dropped and the survivors are numbered 0..k-1 in component order.
/// Throws genrehawkes::Error when a video carries a tag no component holds.
[[nodiscard]] std::vector<GenreCluster> assign_videos(const EventStream& stream, const std::vector<TagSet>& components);

struct EtaSweepRow {
    std::int64_t eta{0};
    std::size_t n_components{0};
    std::size_t n_singletons{0};
    std::size_t largest{0};
    std::size_t smallest{0};
    double mean_size{0.0};
};

/// Component statistics of the pruned graph for every eta in [eta_min, eta_max].
[[nodiscard]] std::vector<EtaSweepRow> sweep_eta(const TagGraph& graph, std::int64_t eta_min, std::int64_t eta_max);

}  // namespace genrehawkes
