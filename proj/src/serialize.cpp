#include "antirip/serialize.hpp"

#include <algorithm>

#include "antirip/errors.hpp"

namespace antirip {

void to_json(Json& j, const PostKey& k) { j = Json{{"channel_id", k.channel_id}, {"post_id", k.post_id}}; }

void from_json(const Json& j, PostKey& k) {
    k.channel_id = j.at("channel_id").get<std::string>();
    k.post_id = j.at("post_id").get<std::int64_t>();
}

void to_json(Json& j, const LabelAssignment& a) {
    j = Json{{"group", std::string(to_string(a.label.group()))},
             {"leaf", std::string(to_string(a.label.leaf))},
             {"justification", a.justification}};
}

void from_json(const Json& j, LabelAssignment& a) {
    const auto name = j.at("leaf").get<std::string>();
    auto leaf = leaf_from_string(name);
    if (!leaf) throw InvalidSpec("unknown taxonomy leaf " + name);
    a.label = TaxonomyLabel{*leaf};
    a.justification = j.value("justification", std::string());
}

void to_json(Json& j, const PostVerdict& v) {
    j = Json{{"channel_id", v.post.channel_id}, {"post_id", v.post.post_id}, {"is_piracy", v.is_piracy}};
    if (!v.labels.empty()) {
        j["primary_label"] = v.labels.front();
        j["secondary_labels"] = std::vector<LabelAssignment>(v.labels.begin() + 1, v.labels.end());
    } else {
        j["primary_label"] = nullptr;
        j["secondary_labels"] = Json::array();
    }
}

void from_json(const Json& j, PostVerdict& v) {
    v.post = j.get<PostKey>();
    v.is_piracy = j.at("is_piracy").get<bool>();
    v.labels.clear();
    if (j.contains("primary_label") && !j["primary_label"].is_null()) {
        v.labels.push_back(j["primary_label"].get<LabelAssignment>());
        for (const auto& s : j.value("secondary_labels", Json::array())) v.labels.push_back(s.get<LabelAssignment>());
    }
    if (!verdict_well_formed(v)) {
        throw InvalidSpec("malformed verdict for " + v.post.channel_id + "/" + std::to_string(v.post.post_id));
    }
}

void to_json(Json& j, const TitleMatch& m) {
    Json pairs = Json::array();
    for (const auto& [a, b] : m.matched_tokens) pairs.push_back(Json::array({a, b}));
    j = Json{{"entry_id", m.entry_id},
             {"channel_id", m.post.channel_id},
             {"post_id", m.post.post_id},
             {"confidence", m.confidence},
             {"ambiguous", m.ambiguous},
             {"matched_tokens", pairs}};
}

void from_json(const Json& j, TitleMatch& m) {
    m.entry_id = j.at("entry_id").get<std::string>();
    m.post = j.get<PostKey>();
    m.confidence = j.at("confidence").get<double>();
    m.ambiguous = j.value("ambiguous", false);
    m.matched_tokens.clear();
    for (const auto& p : j.value("matched_tokens", Json::array())) {
        m.matched_tokens.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    }
}

void to_json(Json& j, const DiscoveredEntity& e) {
    j = e.record;
    j["depth"] = e.depth;
    j["origin"] = to_string(e.origin);
    j["links"] = e.links;
}

void from_json(const Json& j, DiscoveredEntity& e) {
    e.record = j.get<ChannelRecord>();
    e.depth = j.at("depth").get<int>();
    e.origin = j.value("origin", std::string()) == "link" ? Origin::link : Origin::handle_synthesis;
    e.links = j.value("links", std::vector<InternalLink>{});
}

void to_json(Json& j, const CatalogEntry& e) {
    j = Json{{"id", e.id},           {"title", e.title},         {"alt_titles", e.alt_titles},
             {"year", e.year},       {"kind", std::string(to_string(e.kind))},
             {"companies", e.companies}, {"countries", e.countries}};
}

void from_json(const Json& j, CatalogEntry& e) {
    e.id = j.at("id").get<std::string>();
    e.title = j.at("title").get<std::string>();
    e.alt_titles = j.value("alt_titles", std::vector<std::string>{});
    e.year = j.at("year").get<int>();
    e.kind = media_kind_from_string(j.value("kind", std::string("movie")));
    e.companies = j.value("companies", std::vector<std::string>{});
    e.countries = j.value("countries", std::vector<std::string>{});
}

std::vector<Json> discovery_rows(const DiscoveryResult& d) {
    std::vector<Json> rows;
    // Channels and bots interleaved by (depth, id) so the file reads in BFS order.
    std::vector<const DiscoveredEntity*> all;
    for (const auto& e : d.channels) all.push_back(&e);
    for (const auto& e : d.bots) all.push_back(&e);
    std::stable_sort(all.begin(), all.end(), [](const DiscoveredEntity* a, const DiscoveredEntity* b) {
        return std::tie(a->depth, a->record.id) < std::tie(b->depth, b->record.id);
    });
    for (const auto* e : all) rows.push_back(*e);
    rows.push_back(Json{{"summary", true}, {"dead_links", d.dead_links}, {"malformed_links", d.malformed_links}});
    return rows;
}

DiscoveryResult discovery_from_rows(const std::vector<Json>& rows) {
    DiscoveryResult d;
    for (const auto& r : rows) {
        if (r.value("summary", false)) {
            d.dead_links = r.value("dead_links", std::size_t{0});
            d.malformed_links = r.value("malformed_links", std::size_t{0});
            continue;
        }
        auto e = r.get<DiscoveredEntity>();
        (e.record.is_bot ? d.bots : d.channels).push_back(std::move(e));
    }
    return d;
}

} // namespace antirip
