#include "antirip/promotion_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "antirip/errors.hpp"
#include "antirip/links.hpp"

namespace antirip {

std::string to_string(NodeKind k) { return k == NodeKind::bot ? "bot" : "channel"; }

std::string to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::ch_ch: return "ch_ch";
    case EdgeKind::ch_bot: return "ch_bot";
    case EdgeKind::bot_ch: return "bot_ch";
    }
    return "?";
}

std::string to_string(Role r) {
    switch (r) {
    case Role::regular: return "regular";
    case Role::super: return "super";
    case Role::terminal: return "terminal";
    case Role::isolated: return "isolated";
    }
    return "?";
}

const GraphNode& PromotionGraph::add_node(const std::string& id, NodeKind kind, bool external, std::string handle) {
    auto [it, inserted] = nodes_.try_emplace(id, GraphNode{id, kind, external, std::move(handle)});
    if (inserted) {
        out_[id];
        in_[id] = 0;
    }
    return it->second;
}

bool PromotionGraph::add_edge(const std::string& src, const std::string& dst) {
    auto s = nodes_.find(src), d = nodes_.find(dst);
    if (s == nodes_.end() || d == nodes_.end()) throw std::out_of_range("edge endpoint missing: " + src + " -> " + dst);
    if (src == dst) return false;
    if (s->second.kind == NodeKind::bot && d->second.kind == NodeKind::bot) return false;
    if (!out_[src].insert(dst).second) return false;
    ++in_[dst];
    ++edge_count_;
    return true;
}

void PromotionGraph::exclude_invite_only(const std::string& id) {
    if (!nodes_.count(id)) throw std::out_of_range("unknown node " + id);
    for (const auto& dst : out_[id]) --in_[dst];
    edge_count_ -= out_[id].size();
    out_[id].clear();
    invite_only_.insert(id);
}

std::vector<GraphEdge> PromotionGraph::edges() const {
    std::vector<GraphEdge> out;
    for (const auto& [src, dsts] : out_) {
        const bool src_bot = nodes_.at(src).kind == NodeKind::bot;
        for (const auto& dst : dsts) {
            const bool dst_bot = nodes_.at(dst).kind == NodeKind::bot;
            out.push_back({src, dst, src_bot ? EdgeKind::bot_ch : dst_bot ? EdgeKind::ch_bot : EdgeKind::ch_ch});
        }
    }
    return out;
}

const std::set<std::string>& PromotionGraph::successors(const std::string& id) const { return out_.at(id); }
std::size_t PromotionGraph::outdeg(const std::string& id) const { return out_.at(id).size(); }
std::size_t PromotionGraph::indeg(const std::string& id) const { return in_.at(id); }

bool PromotionGraph::has_edge(const std::string& src, const std::string& dst) const {
    auto it = out_.find(src);
    return it != out_.end() && it->second.count(dst) > 0;
}

PromotionGraph build_graph(const DiscoveryResult& discovery) {
    PromotionGraph g;
    std::map<std::string, std::string> id_by_handle;
    std::vector<const DiscoveredEntity*> all;
    for (const auto& e : discovery.channels) all.push_back(&e);
    for (const auto& e : discovery.bots) all.push_back(&e);
    for (const auto* e : all) {
        std::string handle = e->record.handle.value_or("");
        for (auto& c : handle) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        g.add_node(e->record.id, e->record.is_bot ? NodeKind::bot : NodeKind::channel, false, handle);
        if (!handle.empty()) id_by_handle.emplace(handle, e->record.id);
    }
    for (const auto* e : all) {
        bool any_public = false, any_invite = false;
        for (const auto& l : e->links) {
            if (l.kind == LinkKind::invite) {
                any_invite = true;
                continue;
            }
            any_public = true;
            auto it = id_by_handle.find(l.target);
            std::string dst;
            if (it != id_by_handle.end()) {
                dst = it->second;
            } else {
                dst = "ext:" + l.target;
                g.add_node(dst, looks_like_bot_handle(l.target) ? NodeKind::bot : NodeKind::channel, true, l.target);
            }
            g.add_edge(e->record.id, dst);
        }
        if (any_invite && !any_public) g.exclude_invite_only(e->record.id);
    }
    return g;
}

RoleThresholds thresholds_from_degrees(const std::vector<double>& outdegrees) {
    if (outdegrees.empty()) throw EmptyGraph();
    RoleThresholds t;
    const auto n = static_cast<double>(outdegrees.size());
    t.sample_size = outdegrees.size();
    double sum = 0;
    for (double d : outdegrees) sum += d;
    t.mean_outdeg = sum / n;
    double ss = 0;
    for (double d : outdegrees) ss += (d - t.mean_outdeg) * (d - t.mean_outdeg);
    t.stddev_outdeg = std::sqrt(ss / n);
    auto sorted = outdegrees;
    std::sort(sorted.begin(), sorted.end());
    const auto m = sorted.size();
    t.median_outdeg = m % 2 ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0;
    t.super_cutoff = t.mean_outdeg + 2.0 * t.stddev_outdeg;
    return t;
}

namespace {

bool role_bearing(const GraphNode& n) { return n.kind == NodeKind::channel && !n.external; }

} // namespace

RoleThresholds compute_thresholds(const PromotionGraph& graph) {
    std::vector<double> degrees;
    for (const auto& [id, n] : graph.nodes()) {
        if (role_bearing(n) && !graph.invite_only_excluded().count(id)) {
            degrees.push_back(static_cast<double>(graph.outdeg(id)));
        }
    }
    return thresholds_from_degrees(degrees);
}

std::vector<NodeRole> classify_roles(const PromotionGraph& graph, const RoleThresholds& thresholds) {
    std::vector<NodeRole> out;
    for (const auto& [id, n] : graph.nodes()) {
        if (!role_bearing(n)) continue;
        NodeRole r{id, Role::isolated, graph.outdeg(id), graph.indeg(id)};
        if (static_cast<double>(r.outdeg) > thresholds.super_cutoff) r.role = Role::super;
        else if (r.outdeg > 0) r.role = Role::regular;
        else if (r.indeg > 0) r.role = Role::terminal;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::vector<std::string>> components(const PromotionGraph& graph) {
    std::map<std::string, std::vector<std::string>> undirected;
    for (const auto& [id, n] : graph.nodes()) undirected[id];
    for (const auto& e : graph.edges()) {
        undirected[e.src].push_back(e.dst);
        undirected[e.dst].push_back(e.src);
    }
    std::set<std::string> seen;
    std::vector<std::vector<std::string>> out;
    for (const auto& [start, adj] : undirected) {
        if (seen.count(start)) continue;
        std::vector<std::string> comp;
        std::deque<std::string> queue{start};
        seen.insert(start);
        while (!queue.empty()) {
            auto cur = std::move(queue.front());
            queue.pop_front();
            for (const auto& nb : undirected[cur]) {
                if (seen.insert(nb).second) queue.push_back(nb);
            }
            comp.push_back(std::move(cur));
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::set<std::pair<std::string, std::string>> transitive_pairs(const PromotionGraph& graph) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [src, node] : graph.nodes()) {
        std::set<std::string> reached;
        std::deque<std::string> queue;
        for (const auto& s : graph.successors(src)) {
            if (reached.insert(s).second) queue.push_back(s);
        }
        while (!queue.empty()) {
            auto cur = std::move(queue.front());
            queue.pop_front();
            for (const auto& s : graph.successors(cur)) {
                if (reached.insert(s).second) queue.push_back(s);
            }
        }
        for (const auto& dst : reached) {
            if (dst != src && !graph.has_edge(src, dst)) out.emplace(src, dst);
        }
    }
    return out;
}

namespace {

void put_header(std::ostringstream& os, const std::string& header, const char* comment) {
    if (header.empty()) return;
    os << comment << ' ' << header << '\n';
}

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out + "\"";
}

} // namespace

std::string edges_csv(const PromotionGraph& graph, const std::string& header) {
    std::ostringstream os;
    put_header(os, header, "#");
    os << "src,dst,edge_kind\n";
    for (const auto& e : graph.edges()) os << e.src << ',' << e.dst << ',' << to_string(e.kind) << '\n';
    return os.str();
}

std::string roles_csv(const PromotionGraph& graph, const std::vector<NodeRole>& roles, const std::string& header) {
    std::ostringstream os;
    put_header(os, header, "#");
    os << "id,kind,role,outdeg,indeg\n";
    for (const auto& r : roles) {
        os << r.id << ',' << to_string(graph.nodes().at(r.id).kind) << ',' << to_string(r.role) << ',' << r.outdeg
           << ',' << r.indeg << '\n';
    }
    return os.str();
}

std::string to_dot(const PromotionGraph& graph, const std::vector<NodeRole>& roles, const std::string& header) {
    std::map<std::string, Role> role_of;
    for (const auto& r : roles) role_of[r.id] = r.role;
    std::ostringstream os;
    put_header(os, header, "//");
    os << "digraph promotion {\n";
    for (const auto& [id, n] : graph.nodes()) {
        os << "  " << dot_quote(id) << " [label=" << dot_quote(n.handle.empty() ? id : n.handle);
        if (n.kind == NodeKind::bot) os << ", shape=diamond";
        if (n.external) {
            os << ", color=gray";
        } else if (auto it = role_of.find(id); it != role_of.end()) {
            os << ", role=" << to_string(it->second);
            if (it->second == Role::super) os << ", color=red";
            if (it->second == Role::terminal) os << ", color=blue";
        }
        os << "];\n";
    }
    for (const auto& e : graph.edges()) {
        os << "  " << dot_quote(e.src) << " -> " << dot_quote(e.dst) << " [kind=" << to_string(e.kind) << "];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace antirip
