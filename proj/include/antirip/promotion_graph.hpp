#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "antirip/crawler.hpp"

namespace antirip {

enum class NodeKind { channel, bot };
enum class EdgeKind { ch_ch, ch_bot, bot_ch };
enum class Role { regular, super, terminal, isolated };

std::string to_string(NodeKind k);
std::string to_string(EdgeKind k);
std::string to_string(Role r);

struct GraphNode {
    std::string id;
    NodeKind kind = NodeKind::channel;
    /// Link target outside the crawled set; carries no role.
    bool external = false;
    std::string handle;
};

struct GraphEdge {
    std::string src;
    std::string dst;
    EdgeKind kind = EdgeKind::ch_ch;
    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Directed promotion graph. Ids of external stubs are "ext:<handle>".
class PromotionGraph {
public:
    /// Adds or returns the existing node.
    const GraphNode& add_node(const std::string& id, NodeKind kind, bool external = false,
                              std::string handle = {});
    /// False for self-loops, duplicates and bot-to-bot links. Both endpoints must exist.
    bool add_edge(const std::string& src, const std::string& dst);
    void exclude_invite_only(const std::string& id);

    const std::map<std::string, GraphNode>& nodes() const { return nodes_; }
    /// Sorted by (src, dst).
    std::vector<GraphEdge> edges() const;
    std::size_t edge_count() const { return edge_count_; }
    const std::set<std::string>& invite_only_excluded() const { return invite_only_; }
    const std::set<std::string>& successors(const std::string& id) const;
    std::size_t outdeg(const std::string& id) const;
    std::size_t indeg(const std::string& id) const;
    bool has_edge(const std::string& src, const std::string& dst) const;

private:
    std::map<std::string, GraphNode> nodes_;
    std::map<std::string, std::set<std::string>> out_;
    std::map<std::string, std::size_t> in_;
    std::set<std::string> invite_only_;
    std::size_t edge_count_ = 0;
};

/// One node per crawled entity plus stubs for unresolved targets; one edge per distinct pair.
/// Channels whose only links are invites keep their node but lose their outgoing edges.
PromotionGraph build_graph(const DiscoveryResult& discovery);

struct RoleThresholds {
    double mean_outdeg = 0;
    double median_outdeg = 0;
    double stddev_outdeg = 0;
    double super_cutoff = 0;
    std::size_t sample_size = 0;
};

/// Population statistics of an out-degree sample. Throws EmptyGraph on an empty sample.
RoleThresholds thresholds_from_degrees(const std::vector<double>& outdegrees);

/// Over crawled channel nodes outside invite_only_excluded.
RoleThresholds compute_thresholds(const PromotionGraph& graph);

struct NodeRole {
    std::string id;
    Role role = Role::isolated;
    std::size_t outdeg = 0;
    std::size_t indeg = 0;
};

/// One role per crawled channel node, ordered by id.
std::vector<NodeRole> classify_roles(const PromotionGraph& graph, const RoleThresholds& thresholds);

/// Weakly connected components; each sorted, listed by first member.
std::vector<std::vector<std::string>> components(const PromotionGraph& graph);

/// (u, v) with a directed path of length >= 2 from u to v and no edge u -> v.
std::set<std::pair<std::string, std::string>> transitive_pairs(const PromotionGraph& graph);

/// Headers go in as comment lines ("# ..."); pass an empty string for none.
std::string edges_csv(const PromotionGraph& graph, const std::string& header);
std::string roles_csv(const PromotionGraph& graph, const std::vector<NodeRole>& roles,
                      const std::string& header);
std::string to_dot(const PromotionGraph& graph, const std::vector<NodeRole>& roles,
                   const std::string& header);

} // namespace antirip
