#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "antirip/catalog.hpp"
#include "antirip/config.hpp"
#include "antirip/json_io.hpp"
#include "antirip/platform.hpp"
#include "antirip/report.hpp"
#include "antirip/taxonomy.hpp"

namespace antirip {

/// Shared state of one pipeline invocation.
class RunContext {
public:
    /// `platform` may be null for stages that do not touch the network.
    RunContext(PipelineConfig config, PlatformClient* platform, std::ostream* log = nullptr);

    const PipelineConfig& config() const { return config_; }
    const std::string& run_id() const { return run_id_; }
    const std::string& config_hash() const { return config_hash_; }
    Timestamp now() const { return now_; }
    void set_now(Timestamp t) { now_ = t; }

    /// Platform wrapped in the retry policy. Throws InvalidConfig when none was given.
    PlatformClient& platform();

    Json header(const std::string& stage) const;

    /// Writes the file unless it already holds `content`. Returns true if it changed.
    bool write(const std::filesystem::path& path, const std::string& content);
    std::size_t artifacts_written() const { return written_; }
    /// Every path passed to write() since the last call, in order.
    std::vector<std::filesystem::path> take_touched();

    const Catalog& catalog();
    std::unique_ptr<ClassifierAdapter> make_classifier();

    void log(const std::string& line);

private:
    PipelineConfig config_;
    std::string run_id_;
    std::string config_hash_;
    Timestamp now_;
    PlatformClient* raw_platform_;
    std::unique_ptr<PlatformClient> retrying_;
    std::ostream* log_;
    std::size_t written_ = 0;
    std::vector<std::filesystem::path> touched_;
    std::optional<Catalog> catalog_;
};

/// Stage functions. Each reads its inputs from files (MissingInput if absent) and writes its outputs.
void stage_synth(RunContext& ctx, const std::filesystem::path& out);
void stage_discover(RunContext& ctx, const std::filesystem::path& candidates, const std::filesystem::path& out);
void stage_hydrate(RunContext& ctx, const std::filesystem::path& discovery, const std::filesystem::path& out);
void stage_classify(RunContext& ctx, const std::filesystem::path& posts, const std::filesystem::path& out);
void stage_match(RunContext& ctx, const std::filesystem::path& posts, const std::filesystem::path& verdicts,
                 const std::filesystem::path& out);
void stage_graph(RunContext& ctx, const std::filesystem::path& discovery, const std::filesystem::path& out_dir);
void stage_estimate(RunContext& ctx, const std::filesystem::path& posts, const std::filesystem::path& verdicts,
                    const std::filesystem::path& matches, const std::filesystem::path& out);
void stage_report(RunContext& ctx, const std::filesystem::path& discovery, const std::filesystem::path& posts,
                  const std::filesystem::path& verdicts, const std::filesystem::path& matches,
                  const std::filesystem::path& outbox, const std::filesystem::path& index_out);
/// Starts tracking.jsonl from the report index when absent or when `restart` is set, else appends
/// one check per record. Rewrites the outcome summary.
void stage_track(RunContext& ctx, const std::filesystem::path& reports, const std::filesystem::path& tracking,
                 const std::filesystem::path& outcome, bool restart = false);

std::vector<TrackingRecord> load_tracking(const std::filesystem::path& path);

struct RunSummary {
    std::string run_id;
    std::vector<std::string> stages_run;
    std::vector<std::string> stages_skipped;
    std::size_t artifacts_written = 0;
};

/// Runs every stage into config.run_dir. Stages whose recorded outputs are intact are skipped.
RunSummary run_pipeline(RunContext& ctx);

/// Artifact names inside a run directory.
namespace artifact {
inline constexpr const char* candidates = "candidates.txt";
inline constexpr const char* discovery = "discovery.jsonl";
inline constexpr const char* posts = "posts.jsonl";
inline constexpr const char* verdicts = "verdicts.jsonl";
inline constexpr const char* matches = "matches.jsonl";
inline constexpr const char* graph_dir = "graph";
inline constexpr const char* loss = "loss_report.json";
inline constexpr const char* outbox = "outbox";
inline constexpr const char* reports = "reports.jsonl";
inline constexpr const char* tracking = "tracking.jsonl";
inline constexpr const char* outcome = "outcome.json";
inline constexpr const char* state = "state.json";
} // namespace artifact

} // namespace antirip
