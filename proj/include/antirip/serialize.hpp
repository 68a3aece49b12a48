#pragma once

#include "antirip/catalog.hpp"
#include "antirip/crawler.hpp"
#include "antirip/json_io.hpp"
#include "antirip/taxonomy.hpp"

namespace antirip {

void to_json(Json& j, const PostKey& k);
void from_json(const Json& j, PostKey& k);
void to_json(Json& j, const LabelAssignment& a);
void from_json(const Json& j, LabelAssignment& a);
void to_json(Json& j, const PostVerdict& v);
void from_json(const Json& j, PostVerdict& v);
void to_json(Json& j, const TitleMatch& m);
void from_json(const Json& j, TitleMatch& m);
void to_json(Json& j, const DiscoveredEntity& e);
void from_json(const Json& j, DiscoveredEntity& e);
void to_json(Json& j, const CatalogEntry& e);
void from_json(const Json& j, CatalogEntry& e);

/// One line per entity; bots carry is_bot. dead_links and malformed_links go in a trailing summary row.
std::vector<Json> discovery_rows(const DiscoveryResult& d);
DiscoveryResult discovery_from_rows(const std::vector<Json>& rows);

} // namespace antirip
