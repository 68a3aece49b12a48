#include "antirip/config.hpp"

#include <chrono>
#include <functional>
#include <sstream>

#include "antirip/errors.hpp"
#include "antirip/hash.hpp"
#include "antirip/json_io.hpp"
#include "antirip/text.hpp"

namespace antirip {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        T out;
        if constexpr (std::is_floating_point_v<T>) {
            out = static_cast<T>(std::stod(value, &used));
        } else if constexpr (std::is_signed_v<T>) {
            out = static_cast<T>(std::stoll(value, &used));
        } else {
            if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
            out = static_cast<T>(std::stoull(value, &used));
        }
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw InvalidConfig("bad number for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto v = text::to_lower(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidConfig("bad boolean for " + key + ": '" + value + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal();
}

} // namespace

void PipelineConfig::set(const std::string& key, const std::string& value, const std::filesystem::path& base) {
    using Setter = std::function<void()>;
    const std::map<std::string, Setter> setters{
        {"lexicon", [&] { lexicon = resolve(base, value); }},
        {"observed_handles", [&] { observed_handles = resolve(base, value); }},
        {"catalog", [&] { catalog = resolve(base, value); }},
        {"stoplist", [&] { stoplist = resolve(base, value); }},
        {"pricing", [&] { pricing = resolve(base, value); }},
        {"fx", [&] { fx = resolve(base, value); }},
        {"language_map", [&] { language_map = resolve(base, value); }},
        {"rights_holders", [&] { rights_holders = resolve(base, value); }},
        {"rules_dir", [&] { rules_dir = resolve(base, value); }},
        {"platform_dir", [&] { platform_dir = resolve(base, value); }},
        {"run_dir", [&] { run_dir = resolve(base, value); }},
        {"window_days", [&] { window_days = parse_number<int>(key, value); }},
        {"probe_posts", [&] { probe_posts = parse_number<std::size_t>(key, value); }},
        {"hydrate_posts", [&] { hydrate_posts = parse_number<std::size_t>(key, value); }},
        {"max_depth", [&] { max_depth = parse_number<int>(key, value); }},
        {"higher_order", [&] { higher_order = parse_number<std::size_t>(key, value); }},
        {"classifier", [&] { classifier = value; }},
        {"group_priority", [&] { group_priority = value; }},
        {"report_mode", [&] { report_mode = value; }},
        {"url_only", [&] { url_only = parse_bool(key, value); }},
        {"parse_mentions", [&] { parse_mentions = parse_bool(key, value); }},
        {"match_threshold", [&] { match_threshold = parse_number<double>(key, value); }},
        {"parallelism", [&] { parallelism = parse_number<std::size_t>(key, value); }},
        {"seed", [&] { seed = parse_number<std::uint64_t>(key, value); }},
        {"now", [&] { now = parse_number<Timestamp>(key, value); }},
        {"tracking_window_days", [&] { tracking_window_days = parse_number<int>(key, value); }},
        {"backoff_base_ms", [&] { backoff_base_ms = parse_number<std::size_t>(key, value); }},
        {"max_retries", [&] { max_retries = parse_number<std::size_t>(key, value); }},
        {"run_id", [&] { run_id = value; }},
    };
    auto it = setters.find(key);
    if (it == setters.end()) throw InvalidConfig("unknown config key '" + key + "'");
    it->second();
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    PipelineConfig c;
    const auto base = path.parent_path();
    std::size_t n = 0;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        ++n;
        const auto t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw InvalidConfig(path.string() + ":" + std::to_string(n) + ": expected key = value");
        c.set(text::trim(t.substr(0, eq)), text::trim(t.substr(eq + 1)), base);
    }
    return c;
}

std::string PipelineConfig::canonical() const {
    std::ostringstream os;
    auto path_line = [&](const char* k, const std::filesystem::path& p) {
        // Input contents, not locations, decide the artifacts.
        std::string digest = "-";
        if (!p.empty() && std::filesystem::is_regular_file(p)) digest = hex64(fnv1a64(read_text_file(p)));
        os << k << '=' << digest << '\n';
    };
    path_line("lexicon", lexicon);
    path_line("observed_handles", observed_handles);
    path_line("catalog", catalog);
    path_line("stoplist", stoplist);
    path_line("pricing", pricing);
    path_line("fx", fx);
    path_line("language_map", language_map);
    path_line("rights_holders", rights_holders);
    for (const char* f : {"cloud_hosts.txt", "streaming_hosts.txt", "shortener_hosts.txt"}) {
        path_line(f, rules_dir.empty() ? std::filesystem::path() : rules_dir / f);
    }
    os << "window_days=" << window_days << '\n'
       << "probe_posts=" << probe_posts << '\n'
       << "hydrate_posts=" << hydrate_posts << '\n'
       << "max_depth=" << max_depth << '\n'
       << "higher_order=" << higher_order << '\n'
       << "classifier=" << classifier << '\n'
       << "group_priority=" << group_priority << '\n'
       << "report_mode=" << report_mode << '\n'
       << "url_only=" << url_only << '\n'
       << "parse_mentions=" << parse_mentions << '\n'
       << "match_threshold=" << match_threshold << '\n'
       << "seed=" << seed << '\n'
       << "now=" << (now ? std::to_string(*now) : "-") << '\n'
       << "tracking_window_days=" << tracking_window_days << '\n';
    return os.str();
}

std::string PipelineConfig::hash() const { return hex64(fnv1a64(canonical())); }

std::string PipelineConfig::effective_run_id() const { return run_id.empty() ? "run-" + hash().substr(0, 12) : run_id; }

Timestamp PipelineConfig::clock() const {
    if (now) return *now;
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

void PipelineConfig::validate() const {
    if (window_days < 0) throw InvalidConfig("window_days must be >= 0");
    if (probe_posts == 0) throw InvalidConfig("probe_posts must be >= 1");
    if (hydrate_posts == 0) throw InvalidConfig("hydrate_posts must be >= 1");
    if (max_depth < 0) throw InvalidConfig("max_depth must be >= 0");
    if (parallelism == 0) throw InvalidConfig("parallelism must be >= 1");
    if (match_threshold <= 0 || match_threshold > 1) throw InvalidConfig("match_threshold must lie in (0, 1]");
    if (report_mode != "event" && report_mode != "batched") throw InvalidConfig("report_mode must be event or batched");
    if (tracking_window_days < 1) throw InvalidConfig("tracking_window_days must be >= 1");
    auto need = [](const char* key, const std::filesystem::path& p, bool dir = false) {
        if (p.empty()) throw InvalidConfig(std::string(key) + " is not set");
        if (dir ? !std::filesystem::is_directory(p) : !std::filesystem::is_regular_file(p)) {
            throw InvalidConfig(std::string(key) + " does not exist: " + p.string());
        }
    };
    need("lexicon", lexicon);
    need("catalog", catalog);
    need("pricing", pricing);
    need("fx", fx);
    need("language_map", language_map);
    need("rules_dir", rules_dir, true);
    need("platform_dir", platform_dir, true);
    if (!stoplist.empty()) need("stoplist", stoplist);
    if (!observed_handles.empty()) need("observed_handles", observed_handles);
    if (!rights_holders.empty()) need("rights_holders", rights_holders);
}

} // namespace antirip
