#include "antirip/loss.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "antirip/errors.hpp"
#include "antirip/text.hpp"

namespace antirip {

LanguageMap LanguageMap::load(const std::filesystem::path& path) {
    LanguageMap m;
    std::size_t n = 0;
    for (const auto& line : read_lines(path)) {
        ++n;
        auto parts = text::split(line, ' ');
        parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
        if (parts.size() != 2) throw ParseError(path.string(), n, "expected '<language> <REGION>'");
        std::string region = parts[1];
        for (auto& c : region) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        m.regions[text::to_lower(parts[0])] = region;
    }
    return m;
}

std::string infer_region(const PostRecord& post, const LanguageMap& map) {
    if (!post.language_tag || post.language_tag->empty()) return kUnknownRegion;
    auto tag = text::to_lower(*post.language_tag);
    if (auto it = map.regions.find(tag); it != map.regions.end()) return it->second;
    // "pt-BR" style tags fall back to the bare language.
    if (auto dash = tag.find_first_of("-_"); dash != std::string::npos) {
        if (auto it = map.regions.find(tag.substr(0, dash)); it != map.regions.end()) return it->second;
    }
    return kUnknownRegion;
}

std::string to_string(AccessMode m) {
    switch (m) {
    case AccessMode::streaming: return "streaming";
    case AccessMode::rental: return "rental";
    case AccessMode::physical: return "physical";
    }
    return "?";
}

void PricingTable::add(PricingEntry entry) {
    if (entry.streaming.empty() && !entry.rental && entry.physical.empty()) {
        throw InvalidSpec("pricing entry for " + entry.title_id + " has no access mode");
    }
    auto positive = [&](double c) {
        if (!(c > 0)) throw InvalidSpec("non-positive cost for " + entry.title_id);
    };
    for (const auto& s : entry.streaming) positive(s.monthly_cost);
    if (entry.rental) positive(entry.rental->cost);
    for (const auto& p : entry.physical) positive(p.cost);
    auto key = std::make_pair(entry.title_id, entry.region);
    entries_.insert_or_assign(std::move(key), std::move(entry));
}

const PricingEntry* PricingTable::find(const std::string& title_id, const std::string& region) const {
    if (auto it = entries_.find({title_id, region}); it != entries_.end()) return &it->second;
    if (auto it = entries_.find({title_id, "*"}); it != entries_.end()) return &it->second;
    return nullptr;
}

namespace {

Price price_from(const Json& j) { return {j.at("cost").get<double>(), j.value("currency", std::string("USD"))}; }

StreamingOffer offer_from(const Json& j) {
    return {j.at("service").get<std::string>(), j.at("monthly_cost").get<double>(),
            j.value("currency", std::string("USD"))};
}

template <typename T, typename F>
std::vector<T> one_or_many(const Json& j, F&& parse) {
    std::vector<T> out;
    if (j.is_array()) {
        for (const auto& x : j) out.push_back(parse(x));
    } else if (j.is_object()) {
        out.push_back(parse(j));
    }
    return out;
}

} // namespace

PricingTable load_pricing(const std::filesystem::path& path) {
    PricingTable t;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(path)) {
        ++line;
        try {
            PricingEntry e;
            e.title_id = j.at("title_id").get<std::string>();
            e.region = j.value("region", std::string("*"));
            if (j.contains("streaming")) e.streaming = one_or_many<StreamingOffer>(j["streaming"], offer_from);
            if (j.contains("rental")) {
                auto r = one_or_many<Price>(j["rental"], price_from);
                if (!r.empty()) {
                    e.rental = *std::min_element(r.begin(), r.end(),
                                                 [](const Price& a, const Price& b) { return a.cost < b.cost; });
                }
            }
            if (j.contains("physical")) e.physical = one_or_many<Price>(j["physical"], price_from);
            t.add(std::move(e));
        } catch (const Json::exception& ex) {
            throw ParseError(path.string(), line, ex.what());
        }
    }
    return t;
}

double ExchangeTable::to_usd(double amount, const std::string& currency) const {
    auto it = rates.find(currency);
    if (it == rates.end()) throw MissingFxRate(currency);
    return amount * it->second;
}

void ExchangeTable::validate() const {
    for (const auto& [c, r] : rates) {
        if (!(r > 0)) throw InvalidSpec("exchange rate for " + c + " must be positive");
    }
    auto usd = rates.find("USD");
    if (usd == rates.end() || usd->second != 1.0) throw InvalidSpec("USD rate must be 1");
}

ExchangeTable ExchangeTable::load(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::exception& ex) {
        throw ParseError(path.string(), 0, ex.what());
    }
    ExchangeTable t;
    t.rates.clear();
    if (j.contains("_header")) j.erase("_header");
    t.as_of = j.value("as_of", std::string());
    for (const auto& [c, r] : j.at("rates").items()) t.rates[c] = r.get<double>();
    t.validate();
    return t;
}

LossEstimate estimate(const std::vector<ViewedTitle>& items, const PricingTable& pricing, const ExchangeTable& fx) {
    LossEstimate est;

    // Views per (title, region), in a stable order.
    std::map<std::pair<std::string, std::string>, std::uint64_t> views;
    for (const auto& it : items) views[{it.title_id, it.region}] += it.views;

    std::map<std::string, LossGroup> streaming;
    std::map<std::string, LossGroup> single;
    std::map<std::string, std::string> failed_group; // streaming group key -> reason

    // Lowest USD price per (service, region) across every title priced in that region.
    auto lowest_service_price = [&](const std::string& service, const std::string& region) {
        std::optional<double> best;
        std::optional<std::string> missing;
        for (const auto& [key, e] : pricing.entries()) {
            if (e.region != region && e.region != "*") continue;
            for (const auto& o : e.streaming) {
                if (o.service != service) continue;
                try {
                    const double usd = fx.to_usd(o.monthly_cost, o.currency);
                    if (!best || usd < *best) best = usd;
                } catch (const MissingFxRate& m) {
                    missing = m.currency;
                }
            }
        }
        if (missing) throw MissingFxRate(*missing);
        return *best;
    };

    for (const auto& [key, v] : views) {
        const auto& [title, region] = key;
        const PricingEntry* e = pricing.find(title, region);
        if (!e) {
            est.unpriced.push_back({title, region, v, "no pricing"});
            continue;
        }
        try {
            if (!e->streaming.empty()) {
                const StreamingOffer* cheapest = nullptr;
                double cheapest_usd = 0;
                for (const auto& o : e->streaming) {
                    const double usd = fx.to_usd(o.monthly_cost, o.currency);
                    if (!cheapest || usd < cheapest_usd || (usd == cheapest_usd && o.service < cheapest->service)) {
                        cheapest = &o;
                        cheapest_usd = usd;
                    }
                }
                const auto gkey = cheapest->service + "|" + region;
                auto& g = streaming[gkey];
                if (g.key.empty()) {
                    g.key = gkey;
                    g.mode = AccessMode::streaming;
                    g.service = cheapest->service;
                    g.region = region;
                }
                g.title_ids.push_back(title);
                g.views_by_title[title] += v;
                g.views_total += v;
                continue;
            }
            LossGroup g;
            g.key = title + "|" + region;
            g.region = region;
            g.title_ids = {title};
            g.views_by_title[title] = v;
            g.views_total = v;
            if (e->rental) {
                g.mode = AccessMode::rental;
                g.unit_cost_usd = fx.to_usd(e->rental->cost, e->rental->currency);
            } else {
                g.mode = AccessMode::physical;
                std::optional<double> best;
                for (const auto& p : e->physical) {
                    const double usd = fx.to_usd(p.cost, p.currency);
                    if (!best || usd < *best) best = usd;
                }
                g.unit_cost_usd = *best;
            }
            g.consumptions = consumptions_for(g.views_total);
            g.loss_usd = static_cast<double>(g.consumptions) * g.unit_cost_usd;
            single.emplace(g.key, std::move(g));
        } catch (const MissingFxRate& m) {
            est.unpriced.push_back({title, region, v, "missing exchange rate for " + m.currency});
        }
    }

    for (auto& [key, g] : streaming) {
        try {
            g.unit_cost_usd = lowest_service_price(g.service, g.region);
        } catch (const MissingFxRate& m) {
            for (const auto& [title, v] : g.views_by_title) {
                est.unpriced.push_back({title, g.region, v, "missing exchange rate for " + m.currency});
            }
            continue;
        }
        g.consumptions = consumptions_for(g.views_total);
        g.loss_usd = static_cast<double>(g.consumptions) * g.unit_cost_usd;
        est.groups.push_back(std::move(g));
    }
    for (auto& [key, g] : single) est.groups.push_back(std::move(g));
    for (const auto& g : est.groups) est.total_usd += g.loss_usd;
    return est;
}

std::vector<ViewedTitle> viewed_titles(const std::vector<PostRecord>& posts, const std::vector<PostVerdict>& verdicts,
                                       const std::map<PostKey, std::vector<TitleMatch>>& matches,
                                       const LanguageMap& languages) {
    std::set<PostKey> piracy;
    for (const auto& v : verdicts) {
        if (v.is_piracy) piracy.insert(v.post);
    }
    std::vector<ViewedTitle> out;
    for (const auto& p : posts) {
        const auto key = key_of(p);
        if (!piracy.count(key)) continue;
        auto it = matches.find(key);
        if (it == matches.end()) continue;
        const auto hit = std::find_if(it->second.begin(), it->second.end(), [](const TitleMatch& m) { return !m.ambiguous; });
        if (hit == it->second.end()) continue;
        out.push_back({hit->entry_id, key, p.view_count, infer_region(p, languages)});
    }
    return out;
}

std::vector<RollupCell> rollup(const LossEstimate& est, const Catalog& catalog) {
    std::map<std::pair<std::string, MediaKind>, double> cells;
    for (const auto& g : est.groups) {
        if (g.views_total == 0 || g.loss_usd == 0) continue;
        for (const auto& [title, v] : g.views_by_title) {
            const double share = g.loss_usd * static_cast<double>(v) / static_cast<double>(g.views_total);
            const CatalogEntry* e = catalog.find(title);
            const MediaKind kind = e ? e->kind : MediaKind::movie;
            std::vector<std::string> countries;
            if (e) countries = e->countries;
            if (countries.empty()) countries = {kUnknownRegion};
            for (const auto& c : countries) cells[{c, kind}] += share / static_cast<double>(countries.size());
        }
    }
    std::vector<RollupCell> out;
    for (const auto& [k, usd] : cells) out.push_back({k.first, k.second, usd});
    return out;
}

Json loss_report_json(const LossEstimate& est, const std::vector<RollupCell>& cells) {
    Json groups = Json::array();
    for (const auto& g : est.groups) {
        groups.push_back(Json{{"key", g.key},
                              {"mode", to_string(g.mode)},
                              {"service", g.service},
                              {"region", g.region},
                              {"title_ids", g.title_ids},
                              {"views_total", g.views_total},
                              {"consumptions", g.consumptions},
                              {"unit_cost_usd", g.unit_cost_usd},
                              {"loss_usd", g.loss_usd}});
    }
    Json unpriced = Json::array();
    for (const auto& u : est.unpriced) {
        unpriced.push_back(Json{{"title_id", u.title_id}, {"region", u.region}, {"views", u.views}, {"reason", u.reason}});
    }
    Json by_country = Json::array();
    for (const auto& c : cells) {
        by_country.push_back(Json{{"country", c.country}, {"kind", std::string(to_string(c.kind))}, {"loss_usd", c.loss_usd}});
    }
    return Json{{"method",
                 Json{{"views_per_consumption", kViewsPerConsumption},
                      {"rounding", "floor"},
                      {"streaming", "one month of the lowest subscription price per consumption, grouped by service and region"},
                      {"other", "rental price, else lowest physical media price, per title and region"}}},
                {"groups", groups},
                {"unpriced", unpriced},
                {"by_country_kind", by_country},
                {"total_usd", est.total_usd}};
}

} // namespace antirip
