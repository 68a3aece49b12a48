#include "antirip/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "antirip/hash.hpp"
#include "antirip/serialize.hpp"
#include "antirip/text.hpp"

namespace antirip {

std::string to_string(ReportMode m) { return m == ReportMode::event ? "event" : "batched"; }

ReportMode report_mode_from_string(const std::string& s) {
    if (s == "event") return ReportMode::event;
    if (s == "batched") return ReportMode::batched;
    throw InvalidConfig("report mode must be event or batched, got " + s);
}

RightsHolderMap RightsHolderMap::load(const std::filesystem::path& path) {
    RightsHolderMap m;
    std::size_t n = 0;
    for (const auto& line : read_lines(path)) {
        ++n;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path.string(), n, "expected '<company>=<contact>'");
        m.contacts[text::trim(line.substr(0, eq))] = text::trim(line.substr(eq + 1));
    }
    return m;
}

std::optional<std::string> RightsHolderMap::contact_for(const std::string& company) const {
    const auto want = text::to_lower(company);
    for (const auto& [name, contact] : contacts) {
        if (text::to_lower(name) == want) return contact;
    }
    return std::nullopt;
}

std::string Recipient::slug() const { return kind == "platform" ? "platform" : text::slug(name); }

std::size_t AbuseReport::item_count() const {
    std::size_t n = 0;
    for (const auto& c : channels) n += c.items.size();
    return n;
}

namespace {

struct Index {
    std::map<std::string, const ChannelRecord*> channels;
    std::map<std::string, std::vector<const PostRecord*>> posts_by_channel;
    std::map<PostKey, const PostVerdict*> verdicts;
};

Index index_inputs(const ReportInputs& in) {
    Index ix;
    for (const auto& c : in.channels) ix.channels[c.id] = &c;
    for (const auto& p : in.posts) ix.posts_by_channel[p.channel_id].push_back(&p);
    for (auto& [id, v] : ix.posts_by_channel) {
        std::sort(v.begin(), v.end(), [](const PostRecord* a, const PostRecord* b) { return a->post_id < b->post_id; });
    }
    for (const auto& v : in.verdicts) ix.verdicts[v.post] = &v;
    return ix;
}

const TitleMatch* best_match(const ReportInputs& in, const PostKey& key) {
    auto it = in.matches.find(key);
    if (it == in.matches.end() || it->second.empty() || it->second.front().ambiguous) return nullptr;
    return &it->second.front();
}

std::string post_url(const ChannelRecord& c, std::int64_t post_id) {
    if (c.handle) return "https://t.me/" + *c.handle + "/" + std::to_string(post_id);
    return "https://t.me/c/" + c.id + "/" + std::to_string(post_id);
}

// True when the post's matched title belongs to the recipient.
bool concerns(const ReportInputs& in, const PostKey& key, const Recipient& r) {
    if (r.kind == "platform") return true;
    const TitleMatch* m = best_match(in, key);
    if (!m || !in.catalog) return false;
    const CatalogEntry* e = in.catalog->find(m->entry_id);
    if (!e) return false;
    return std::any_of(e->companies.begin(), e->companies.end(),
                       [&](const std::string& c) { return text::to_lower(c) == text::to_lower(r.name); });
}

ReportedChannel evidence_with(const ReportInputs& in, const Index& ix, const std::string& channel_id,
                              const Recipient& recipient) {
    auto c = ix.channels.find(channel_id);
    if (c == ix.channels.end()) throw NoEvidence("unknown channel " + channel_id);
    ReportedChannel rc{*c->second, {}};
    auto posts = ix.posts_by_channel.find(channel_id);
    if (posts != ix.posts_by_channel.end()) {
        for (const PostRecord* p : posts->second) {
            const auto key = key_of(*p);
            auto v = ix.verdicts.find(key);
            if (v == ix.verdicts.end() || !v->second->is_piracy) continue;
            if (!concerns(in, key, recipient)) continue;
            EvidenceItem item;
            item.post = key;
            item.time = p->time;
            item.url = post_url(rc.channel, p->post_id);
            if (const TitleMatch* m = best_match(in, key)) {
                item.title_id = m->entry_id;
                if (in.catalog) {
                    if (const CatalogEntry* e = in.catalog->find(m->entry_id)) item.title = e->title;
                }
            }
            item.screenshot_ref = p->screenshot_ref;
            item.internal_links = p->internal_links;
            item.external_links = p->external_links;
            item.labels = v->second->labels;
            rc.items.push_back(std::move(item));
        }
    }
    if (rc.items.empty()) throw NoEvidence("no piracy evidence in " + channel_id + " for " + recipient.name);
    return rc;
}

struct Detection {
    Timestamp at = 0;
    ReportedChannel evidence;
};

std::string make_report_id(const Recipient& r, Timestamp created, const std::vector<ReportedChannel>& channels) {
    std::string basis = r.kind + "|" + r.name + "|" + std::to_string(created);
    for (const auto& c : channels) {
        for (const auto& i : c.items) basis += "|" + i.post.channel_id + "/" + std::to_string(i.post.post_id);
    }
    return "r" + hex64(fnv1a64(basis));
}

AbuseReport assemble(const Recipient& r, std::vector<Detection> batch, const ReportOptions& opts) {
    std::sort(batch.begin(), batch.end(),
              [](const Detection& a, const Detection& b) { return a.evidence.channel.id < b.evidence.channel.id; });
    AbuseReport rep;
    rep.recipient = r;
    rep.mode = opts.mode;
    rep.url_only = opts.url_only;
    rep.first_detection = batch.front().at;
    rep.last_detection = batch.front().at;
    for (auto& d : batch) {
        rep.first_detection = std::min(rep.first_detection, d.at);
        rep.last_detection = std::max(rep.last_detection, d.at);
        rep.channels.push_back(std::move(d.evidence));
    }
    rep.created_at = opts.now;
    rep.report_id = make_report_id(r, rep.created_at, rep.channels);
    return rep;
}

} // namespace

ReportedChannel evidence_for(const ReportInputs& in, const std::string& channel_id, const Recipient& recipient) {
    return evidence_with(in, index_inputs(in), channel_id, recipient);
}

ReportBuild build_reports(const ReportInputs& in, const ReportOptions& opts) {
    const Index ix = index_inputs(in);
    ReportBuild out;

    // Recipients: the platform, then every mapped company that owns a matched title.
    std::vector<Recipient> recipients{Recipient{}};
    std::set<std::string> unmapped;
    std::set<std::string> seen_companies;
    if (in.catalog) {
        for (const auto& v : in.verdicts) {
            if (!v.is_piracy) continue;
            const TitleMatch* m = best_match(in, v.post);
            if (!m) continue;
            const CatalogEntry* e = in.catalog->find(m->entry_id);
            if (!e) continue;
            for (const auto& company : e->companies) {
                if (!seen_companies.insert(text::to_lower(company)).second) continue;
                if (auto contact = in.rights_holders.contact_for(company)) {
                    recipients.push_back(Recipient{"rights_holder", company, *contact});
                } else {
                    unmapped.insert(company);
                }
            }
        }
    }
    std::sort(recipients.begin() + 1, recipients.end(),
              [](const Recipient& a, const Recipient& b) { return a.name < b.name; });
    out.unmapped_companies.assign(unmapped.begin(), unmapped.end());

    for (const auto& r : recipients) {
        std::vector<Detection> detections;
        for (const auto& [id, rec] : ix.channels) {
            try {
                auto ev = evidence_with(in, ix, id, r);
                Timestamp at = 0;
                for (const auto& i : ev.items) at = std::max(at, i.time);
                detections.push_back({at, std::move(ev)});
            } catch (const NoEvidence&) {
                if (r.kind == "platform") out.skipped_no_evidence.push_back(id);
            }
        }
        std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
            return std::tie(a.at, a.evidence.channel.id) < std::tie(b.at, b.evidence.channel.id);
        });
        if (opts.mode == ReportMode::event) {
            for (auto& d : detections) out.reports.push_back(assemble(r, {std::move(d)}, opts));
            continue;
        }
        std::vector<Detection> batch;
        for (auto& d : detections) {
            if (!batch.empty() && d.at - batch.front().at >= kBatchWindow) {
                out.reports.push_back(assemble(r, std::move(batch), opts));
                batch.clear();
            }
            batch.push_back(std::move(d));
        }
        if (!batch.empty()) out.reports.push_back(assemble(r, std::move(batch), opts));
    }
    return out;
}

Json report_json(const AbuseReport& r) {
    Json channels = Json::array();
    for (const auto& c : r.channels) {
        Json items = Json::array();
        for (const auto& i : c.items) {
            Json item{{"channel_id", i.post.channel_id}, {"post_id", i.post.post_id}, {"url", i.url}};
            if (!r.url_only) {
                item["time"] = i.time;
                item["title"] = i.title ? Json(*i.title) : Json();
                item["title_id"] = i.title_id ? Json(*i.title_id) : Json();
                item["screenshot_ref"] = i.screenshot_ref ? Json(*i.screenshot_ref) : Json();
                item["internal_links"] = i.internal_links;
                item["external_links"] = i.external_links;
                item["labels"] = i.labels;
            }
            items.push_back(std::move(item));
        }
        channels.push_back(Json{{"channel", c.channel}, {"items", items}});
    }
    return Json{{"report_id", r.report_id},
                {"recipient", Json{{"kind", r.recipient.kind}, {"name", r.recipient.name}, {"contact", r.recipient.contact}}},
                {"created_at", r.created_at},
                {"mode", to_string(r.mode)},
                {"url_only", r.url_only},
                {"first_detection", r.first_detection},
                {"last_detection", r.last_detection},
                {"channels", channels}};
}

AbuseReport report_from_json(const Json& j) {
    AbuseReport r;
    r.report_id = j.at("report_id").get<std::string>();
    const auto& rc = j.at("recipient");
    r.recipient = {rc.at("kind").get<std::string>(), rc.at("name").get<std::string>(), rc.value("contact", std::string())};
    r.created_at = j.at("created_at").get<Timestamp>();
    r.mode = report_mode_from_string(j.at("mode").get<std::string>());
    r.url_only = j.value("url_only", false);
    r.first_detection = j.value("first_detection", r.created_at);
    r.last_detection = j.value("last_detection", r.created_at);
    for (const auto& c : j.at("channels")) {
        ReportedChannel ch{c.at("channel").get<ChannelRecord>(), {}};
        for (const auto& i : c.at("items")) {
            EvidenceItem item;
            item.post = i.get<PostKey>();
            item.url = i.value("url", std::string());
            item.time = i.value("time", Timestamp{0});
            if (i.contains("title") && !i["title"].is_null()) item.title = i["title"].get<std::string>();
            if (i.contains("title_id") && !i["title_id"].is_null()) item.title_id = i["title_id"].get<std::string>();
            if (i.contains("screenshot_ref") && !i["screenshot_ref"].is_null()) {
                item.screenshot_ref = i["screenshot_ref"].get<std::string>();
            }
            item.internal_links = i.value("internal_links", std::vector<InternalLink>{});
            item.external_links = i.value("external_links", std::vector<std::string>{});
            item.labels = i.value("labels", std::vector<LabelAssignment>{});
            ch.items.push_back(std::move(item));
        }
        r.channels.push_back(std::move(ch));
    }
    return r;
}

std::string render_text(const AbuseReport& r) {
    std::ostringstream os;
    os << "Report " << r.report_id << "\n";
    os << "To: " << r.recipient.name;
    if (!r.recipient.contact.empty()) os << " <" << r.recipient.contact << ">";
    os << "\nMode: " << to_string(r.mode) << (r.url_only ? " (URLs only)" : "") << "\n";
    os << "Channels: " << r.channels.size() << ", items: " << r.item_count() << "\n";
    for (const auto& c : r.channels) {
        os << "\nChannel " << c.channel.id;
        if (c.channel.handle) os << " (@" << *c.channel.handle << ")";
        os << (c.channel.is_bot ? " [bot]" : "") << "\n";
        for (const auto& i : c.items) {
            os << "  - " << i.url << "\n";
            if (r.url_only) continue;
            if (i.title) os << "    title: " << *i.title << "\n";
            if (i.screenshot_ref) os << "    screenshot: " << *i.screenshot_ref << "\n";
            for (const auto& l : i.internal_links) os << "    internal: " << to_string(l.kind) << " " << l.target << "\n";
            for (const auto& l : i.external_links) os << "    external: " << l << "\n";
            for (const auto& l : i.labels) {
                os << "    label: " << to_string(l.label.group()) << "/" << to_string(l.label.leaf) << " - "
                   << l.justification << "\n";
            }
        }
    }
    return os.str();
}

std::vector<std::filesystem::path> write_outbox(const std::vector<AbuseReport>& reports,
                                                const std::filesystem::path& outbox, const Json& header) {
    std::vector<std::filesystem::path> written;
    for (const auto& r : reports) {
        const auto dir = outbox / r.recipient.slug();
        Json doc = report_json(r);
        if (!header.is_null()) doc["_header"] = header;
        const auto json_path = dir / (r.report_id + ".json");
        const auto txt_path = dir / (r.report_id + ".txt");
        std::string txt;
        if (!header.is_null()) txt = "# " + header.dump() + "\n";
        txt += render_text(r);
        write_text_file(json_path, doc.dump(2) + "\n");
        write_text_file(txt_path, txt);
        written.push_back(json_path);
        written.push_back(txt_path);
    }
    return written;
}

// ---- tracking ------------------------------------------------------------------

std::string to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::alive: return "alive";
    case CheckStatus::gone: return "gone";
    case CheckStatus::skipped: return "skipped";
    }
    return "?";
}

CheckStatus check_status_from_string(const std::string& s) {
    if (s == "alive") return CheckStatus::alive;
    if (s == "gone") return CheckStatus::gone;
    if (s == "skipped") return CheckStatus::skipped;
    throw InvalidSpec("unknown check status " + s);
}

std::optional<CheckStatus> TrackingRecord::last_status() const {
    for (auto it = checks.rbegin(); it != checks.rend(); ++it) {
        if (it->status != CheckStatus::skipped) return it->status;
    }
    return std::nullopt;
}

std::vector<TrackingRecord> tracking_records(const std::vector<AbuseReport>& reports) {
    std::map<std::string, TrackingRecord> by_id;
    for (const auto& r : reports) {
        for (const auto& c : r.channels) {
            auto& rec = by_id[c.channel.id];
            if (rec.entity_id.empty()) {
                rec.entity_id = c.channel.id;
                rec.is_bot = c.channel.is_bot;
                rec.reported_at = r.created_at;
            }
            rec.reported_at = std::min(rec.reported_at, r.created_at);
            rec.recipients.push_back(r.recipient.kind == "platform" ? "platform" : r.recipient.name);
            for (const auto& i : c.items) rec.reported_post_ids.push_back(i.post.post_id);
        }
    }
    std::vector<TrackingRecord> out;
    for (auto& [id, rec] : by_id) {
        auto uniq = [](auto& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        uniq(rec.recipients);
        uniq(rec.reported_post_ids);
        out.push_back(std::move(rec));
    }
    return out;
}

void check_entity(PlatformClient& client, TrackingRecord& record, Timestamp now, std::size_t post_limit) {
    const Timestamp end = record.reported_at + static_cast<Timestamp>(record.window_days) * kSecondsPerDay;
    if (now < record.reported_at || now > end) {
        throw OutsideWindow("check of " + record.entity_id + " at " + std::to_string(now) + " is outside [" +
                            std::to_string(record.reported_at) + ", " + std::to_string(end) + "]");
    }
    TrackingCheck check;
    check.time = now;
    try {
        auto meta = client.channel_meta(record.entity_id);
        if (!meta) {
            check.status = CheckStatus::gone;
        } else if (record.is_bot || record.reported_post_ids.empty()) {
            check.status = CheckStatus::alive;
        } else {
            check.status = CheckStatus::alive;
            const auto posts = fetch_posts(client, record.entity_id, post_limit);
            std::set<std::int64_t> present;
            std::int64_t oldest = posts.empty() ? 0 : posts.back().post_id;
            for (const auto& p : posts) present.insert(p.post_id);
            const bool complete = posts.size() < post_limit;
            for (auto id : record.reported_post_ids) {
                if (!present.count(id) && (complete || id > oldest)) ++check.post_removed;
            }
        }
    } catch (const ChannelGone&) {
        check.status = CheckStatus::gone;
    } catch (const TransportExhausted& e) {
        check.status = CheckStatus::skipped;
        check.note = e.what();
    } catch (const TransportFailure& e) {
        check.status = CheckStatus::skipped;
        check.note = e.what();
    } catch (const RateLimited& e) {
        check.status = CheckStatus::skipped;
        check.note = e.what();
    }
    record.checks.push_back(std::move(check));
}

TrackStats track(PlatformClient& client, std::vector<TrackingRecord>& records, Timestamp now, std::size_t post_limit) {
    TrackStats s;
    for (auto& r : records) {
        try {
            check_entity(client, r, now, post_limit);
            ++s.checked;
            if (r.checks.back().status == CheckStatus::skipped) ++s.skipped;
        } catch (const OutsideWindow&) {
            ++s.outside_window;
        }
    }
    return s;
}

Json tracking_json(const TrackingRecord& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        Json j{{"time", c.time}, {"status", to_string(c.status)}, {"post_removed", c.post_removed}};
        if (!c.note.empty()) j["note"] = c.note;
        checks.push_back(std::move(j));
    }
    Json j{{"entity_id", r.entity_id},
           {"is_bot", r.is_bot},
           {"reported_at", r.reported_at},
           {"window_days", r.window_days},
           {"recipients", r.recipients},
           {"reported_post_ids", r.reported_post_ids},
           {"checks", checks}};
    if (r.enforcement_feedback) {
        j["enforcement_feedback"] = *r.enforcement_feedback == EnforcementFeedback::confirmed ? "confirmed" : "none";
    }
    return j;
}

TrackingRecord tracking_from_json(const Json& j) {
    TrackingRecord r;
    r.entity_id = j.at("entity_id").get<std::string>();
    r.is_bot = j.value("is_bot", false);
    r.reported_at = j.at("reported_at").get<Timestamp>();
    r.window_days = j.value("window_days", kTrackingWindowDays);
    r.recipients = j.value("recipients", std::vector<std::string>{});
    r.reported_post_ids = j.value("reported_post_ids", std::vector<std::int64_t>{});
    for (const auto& c : j.value("checks", Json::array())) {
        r.checks.push_back({c.at("time").get<Timestamp>(), check_status_from_string(c.at("status").get<std::string>()),
                            c.value("post_removed", std::size_t{0}), c.value("note", std::string())});
    }
    if (j.contains("enforcement_feedback")) {
        r.enforcement_feedback = j["enforcement_feedback"] == "confirmed" ? EnforcementFeedback::confirmed
                                                                          : EnforcementFeedback::none;
    }
    return r;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

class RemovalTally {
public:
    void add(const TrackingRecord& r) {
        ++stats_.reported;
        const auto s = r.last_status();
        if (s == CheckStatus::gone) {
            ++stats_.gone;
        } else if (s == CheckStatus::alive) {
            for (auto it = r.checks.rbegin(); it != r.checks.rend(); ++it) {
                if (it->status == CheckStatus::alive) {
                    removed_.push_back(static_cast<double>(it->post_removed));
                    break;
                }
            }
        }
    }
    RemovalStats finish() const {
        RemovalStats s = stats_;
        if (s.reported) s.removal_rate = static_cast<double>(s.gone) / static_cast<double>(s.reported);
        if (!removed_.empty()) s.median_posts_removed = median(removed_);
        return s;
    }

private:
    RemovalStats stats_;
    std::vector<double> removed_;
};

Json removal_json(const RemovalStats& s) {
    return Json{{"reported", s.reported},
                {"gone", s.gone},
                {"removal_rate", s.removal_rate ? Json(*s.removal_rate) : Json()},
                {"median_posts_removed", s.median_posts_removed ? Json(*s.median_posts_removed) : Json()}};
}

} // namespace

OutcomeSummary outcome_summary(const std::vector<TrackingRecord>& records) {
    RemovalTally all, channels, bots;
    std::map<std::string, RemovalTally> per;
    for (const auto& r : records) {
        all.add(r);
        (r.is_bot ? bots : channels).add(r);
        for (const auto& rc : r.recipients) per[rc].add(r);
    }
    OutcomeSummary s{all.finish(), channels.finish(), bots.finish(), {}};
    for (const auto& [name, t] : per) s.by_recipient[name] = t.finish();
    return s;
}

Json outcome_json(const OutcomeSummary& s) {
    Json per = Json::object();
    for (const auto& [name, r] : s.by_recipient) per[name] = removal_json(r);
    return Json{{"overall", removal_json(s.overall)},
                {"channels", removal_json(s.channels)},
                {"bots", removal_json(s.bots)},
                {"by_recipient", per}};
}

} // namespace antirip
