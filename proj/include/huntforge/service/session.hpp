#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "huntforge/hunt.hpp"

namespace huntforge::service {

struct HuntOptions {
    AnalystGate gate = AnalystGate::required;
    bool analyst_override = false;
    std::optional<double> beacon_threshold;
    std::optional<double> beacon_window;

    static HuntOptions from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Applies gate settings and detector overrides to a bound config.
void apply_options(HuntConfig& config, const HuntOptions& options);

enum class AdvanceMode { step, run };
AdvanceMode parse_advance_mode(std::string_view s);

/// One hunt: live state plus its journal. Mutations are serialised and the
/// journal line reaches disk before the new state becomes visible.
class HuntSession {
public:
    /// Binds the spec and writes the session directory when `dir` is set.
    static std::shared_ptr<HuntSession> create(std::string id, const std::string& spec_text,
                                               telemetry::TelemetryCorpus corpus, const HuntOptions& options,
                                               std::optional<std::filesystem::path> dir);
    /// Rebuilds a session from its directory by replaying the journal.
    /// A torn final line (crash during append) is discarded.
    static std::shared_ptr<HuntSession> recover(const std::filesystem::path& dir);

    const std::string& id() const noexcept { return id_; }
    HuntState snapshot() const;
    std::vector<StepRecord> journal() const;
    std::string spec_text() const { return spec_text_; }

    /// step: at most one invocation; run: until no work is left.
    std::vector<StepRecord> advance(AdvanceMode mode);
    StepRecord decide(const std::string& hypothesis_id, Decision verdict, const std::string& analyst);
    StepRecord dispose(const std::string& recommendation_id, deliberation::RecommendationStatus decision,
                       const std::string& analyst);
    StepRecord inject(Hypothesis h, const std::string& analyst);
    /// Appends NDJSON telemetry; returns the number of records.
    std::size_t append_telemetry(std::string_view ndjson);

    ~HuntSession();

private:
    HuntSession() = default;
    void open_journal();
    void commit(std::pair<HuntState, StepRecord> step);

    std::string id_;
    std::string spec_text_;
    HuntOptions options_;
    std::optional<std::filesystem::path> dir_;
    int journal_fd_ = -1;
    std::size_t batches_ = 0;

    mutable std::shared_mutex mu_;
    HuntState state_;
    std::vector<StepRecord> journal_;
};

/// All hunts of one service instance, optionally persisted under a data root.
class SessionManager {
public:
    explicit SessionManager(std::optional<std::filesystem::path> data_root = std::nullopt);

    std::string create(const std::string& spec_text, telemetry::TelemetryCorpus corpus, const HuntOptions& options);
    std::shared_ptr<HuntSession> get(const std::string& id) const;
    std::vector<std::string> ids() const;
    /// Loads every session directory under the data root. Returns how many were recovered.
    std::size_t recover_all();

private:
    std::optional<std::filesystem::path> root_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<HuntSession>> sessions_;
    std::size_t next_ = 1;
};

/// The SHARE payload: accepted facts with their provenance.
nlohmann::json hunt_bundle(const HuntState& state);

}  // namespace huntforge::service
