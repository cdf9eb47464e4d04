#include "genrehawkes/taggraph.hpp"

#include "genrehawkes/error.hpp"
#include "genrehawkes/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace genrehawkes {

TagGraph::TagGraph(std::vector<std::string> nodes, std::map<EdgeKey, std::uint64_t> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {}

std::optional<TagGraph::NodeIndex> TagGraph::index_of(const std::string& tag) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), tag);
    if (it == nodes_.end() || *it != tag) return std::nullopt;
    return static_cast<NodeIndex>(it - nodes_.begin());
}

std::uint64_t TagGraph::weight(const std::string& a, const std::string& b) const {
    auto ia = index_of(a);
    auto ib = index_of(b);
    if (!ia || !ib || *ia == *ib) return 0;
    auto it = edges_.find(std::minmax(*ia, *ib));
    return it == edges_.end() ? 0 : it->second;
}

std::uint64_t TagGraph::max_weight() const {
    std::uint64_t best = 0;
    for (const auto& [key, w] : edges_) best = std::max(best, w);
    return best;
}

TagGraph build_affinity_graph(const EventStream& stream, unsigned threads) {
    std::vector<std::string> nodes;
    for (const auto& e : stream.events()) nodes.insert(nodes.end(), e.tags.begin(), e.tags.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    auto index = [&](const std::string& tag) {
        return static_cast<TagGraph::NodeIndex>(std::lower_bound(nodes.begin(), nodes.end(), tag) - nodes.begin());
    };

    const auto events = stream.events();
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), events.size()));
    std::vector<std::map<TagGraph::EdgeKey, std::uint64_t>> partial(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t begin = events.size() * c / chunks;
        const std::size_t end = events.size() * (c + 1) / chunks;
        std::vector<TagGraph::NodeIndex> ids;
        for (std::size_t v = begin; v < end; ++v) {
            ids.clear();
            for (const auto& t : events[v].tags) ids.push_back(index(t));
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            for (std::size_t a = 0; a < ids.size(); ++a) {
                for (std::size_t b = a + 1; b < ids.size(); ++b) ++partial[c][{ids[a], ids[b]}];
            }
        }
    });

    auto edges = std::move(partial.front());
    for (std::size_t c = 1; c < chunks; ++c) {
        for (const auto& [key, w] : partial[c]) edges[key] += w;
    }
    return TagGraph(std::move(nodes), std::move(edges));
}

TagGraph prune_graph(const TagGraph& graph, std::int64_t eta) {
    if (eta < 1) throw std::invalid_argument("prune_graph: eta must be >= 1");
    std::map<TagGraph::EdgeKey, std::uint64_t> kept;
    for (const auto& [key, w] : graph.edges()) {
        if (w >= static_cast<std::uint64_t>(eta)) kept.emplace_hint(kept.end(), key, w);
    }
    return TagGraph(graph.nodes(), std::move(kept));
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

}  // namespace

std::vector<TagSet> connected_components(const TagGraph& graph) {
    const auto& nodes = graph.nodes();
    DisjointSets sets(nodes.size());
    for (const auto& [key, w] : graph.edges()) sets.unite(key.first, key.second);

    // Nodes are sorted, so the first node seen for a root is its smallest tag
    // and components come out ordered by smallest member.
    std::vector<std::size_t> slot(nodes.size(), SIZE_MAX);
    std::vector<TagSet> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::size_t root = sets.find(i);
        if (slot[root] == SIZE_MAX) {
            slot[root] = out.size();
            out.emplace_back();
        }
        out[slot[root]].push_back(nodes[i]);
    }
    return out;
}

std::vector<GenreCluster> assign_videos(const EventStream& stream, const std::vector<TagSet>& components) {
    // Order components by smallest tag so "lowest index" is the tie-break rule.
    std::vector<std::size_t> order(components.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto smallest = [&](std::size_t c) -> const std::string& {
        static const std::string empty;
        return components[c].empty() ? empty : *std::min_element(components[c].begin(), components[c].end());
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return smallest(a) < smallest(b); });

    std::map<std::string, std::size_t> owner;  // tag -> position in `order`
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        for (const auto& tag : components[order[pos]]) {
            if (!owner.emplace(tag, pos).second) {
                throw Error("assign_videos: tag '" + tag + "' appears in more than one component");
            }
        }
    }

    std::vector<std::vector<Event>> members(order.size());
    std::map<std::size_t, std::size_t> votes;
    for (const auto& e : stream.events()) {
        votes.clear();
        for (const auto& tag : e.tags) {
            auto it = owner.find(tag);
            if (it == owner.end()) {
                throw Error("assign_videos: video '" + e.video_id + "' has tag '" + tag + "' outside every component");
            }
            ++votes[it->second];
        }
        std::size_t best = votes.begin()->first;
        std::size_t best_votes = votes.begin()->second;
        for (const auto& [pos, n] : votes) {
            if (n > best_votes) {
                best = pos;
                best_votes = n;
            }
        }
        members[best].push_back(e);
    }

    std::vector<GenreCluster> clusters;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        if (members[pos].empty()) continue;
        TagSet tags = components[order[pos]];
        std::sort(tags.begin(), tags.end());
        clusters.push_back(GenreCluster{static_cast<int>(clusters.size()), std::move(tags),
                                        stream.with_events(std::move(members[pos]))});
    }
    return clusters;
}

std::vector<EtaSweepRow> sweep_eta(const TagGraph& graph, std::int64_t eta_min, std::int64_t eta_max) {
    if (eta_min < 1 || eta_max < eta_min) throw std::invalid_argument("sweep_eta: need 1 <= eta_min <= eta_max");
    std::vector<EtaSweepRow> rows;
    for (std::int64_t eta = eta_min; eta <= eta_max; ++eta) {
        const auto comps = connected_components(prune_graph(graph, eta));
        EtaSweepRow row;
        row.eta = eta;
        row.n_components = comps.size();
        if (!comps.empty()) {
            row.smallest = SIZE_MAX;
            std::size_t total = 0;
            for (const auto& c : comps) {
                row.largest = std::max(row.largest, c.size());
                row.smallest = std::min(row.smallest, c.size());
                row.n_singletons += c.size() == 1 ? 1 : 0;
                total += c.size();
            }
            row.mean_size = static_cast<double>(total) / static_cast<double>(comps.size());
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace genrehawkes
