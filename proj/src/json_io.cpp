#include "antirip/json_io.hpp"

#include <fstream>
#include <sstream>

#include "antirip/errors.hpp"
#include "antirip/text.hpp"

namespace antirip {

namespace {

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void get_optional(const Json& j, const char* key, std::optional<T>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        out.reset();
    } else {
        out = it->template get<T>();
    }
}

} // namespace

void to_json(Json& j, const InternalLink& l) {
    j = Json{{"kind", to_string(l.kind)}, {"target", l.target}};
}

void from_json(const Json& j, InternalLink& l) {
    l.kind = link_kind_from_string(j.at("kind").get<std::string>());
    l.target = j.at("target").get<std::string>();
}

void to_json(Json& j, const Attachment& a) {
    j = Json{{"file_name", a.file_name}, {"file_size_bytes", a.size_bytes}};
}

void from_json(const Json& j, Attachment& a) {
    a.file_name = j.at("file_name").get<std::string>();
    a.size_bytes = j.at("file_size_bytes").get<std::uint64_t>();
}

void to_json(Json& j, const ChannelRecord& c) {
    j = Json::object();
    j["id"] = c.id;
    put_optional(j, "handle", c.handle);
    j["title"] = c.title;
    j["subscriber_count"] = c.subscriber_count;
    j["earliest_post_time"] = c.earliest_post_time;
    j["is_bot"] = c.is_bot;
}

void from_json(const Json& j, ChannelRecord& c) {
    c.id = j.at("id").get<std::string>();
    get_optional(j, "handle", c.handle);
    c.title = j.value("title", std::string());
    c.subscriber_count = j.value("subscriber_count", std::uint64_t{0});
    c.earliest_post_time = j.value("earliest_post_time", Timestamp{0});
    c.is_bot = j.value("is_bot", false);
}

void to_json(Json& j, const PostRecord& p) {
    j = Json::object();
    j["channel_id"] = p.channel_id;
    j["post_id"] = p.post_id;
    j["time"] = p.time;
    j["text"] = p.text;
    j["view_count"] = p.view_count;
    j["internal_links"] = p.internal_links;
    j["external_links"] = p.external_links;
    put_optional(j, "attachment", p.attachment);
    put_optional(j, "language_tag", p.language_tag);
    put_optional(j, "screenshot_ref", p.screenshot_ref);
}

void from_json(const Json& j, PostRecord& p) {
    p.channel_id = j.at("channel_id").get<std::string>();
    p.post_id = j.at("post_id").get<std::int64_t>();
    p.time = j.value("time", Timestamp{0});
    p.text = j.value("text", std::string());
    p.view_count = j.value("view_count", std::uint64_t{0});
    p.internal_links = j.value("internal_links", std::vector<InternalLink>{});
    p.external_links = j.value("external_links", std::vector<std::string>{});
    get_optional(j, "attachment", p.attachment);
    get_optional(j, "language_tag", p.language_tag);
    get_optional(j, "screenshot_ref", p.screenshot_ref);
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInput("cannot open " + path.string());
    std::vector<Json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
        if (j.is_object() && j.contains("_header")) continue;
        rows.push_back(std::move(j));
    }
    return rows;
}

std::string jsonl_text(const std::vector<Json>& rows, const Json& header) {
    std::ostringstream out;
    if (!header.is_null()) out << Json{{"_header", header}}.dump() << '\n';
    for (const auto& r : rows) out << r.dump() << '\n';
    return out.str();
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows,
                 const Json& header) {
    write_text_file(path, jsonl_text(rows, header));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInput("cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace antirip
