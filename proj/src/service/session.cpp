#include "huntforge/service/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "huntforge/dsl/dsl.hpp"
#include "huntforge/errors.hpp"

namespace huntforge::service {
namespace fs = std::filesystem;
namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw not_found("missing " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw HuntError(ErrorCode::io, "cannot write " + p.string());
    out << text;
}

std::shared_ptr<const HuntConfig> build_config(const std::string& spec, telemetry::TelemetryCorpus corpus,
                                               const HuntOptions& options) {
    auto cfg = dsl::load_config(spec);
    apply_options(*cfg, options);
    cfg->telemetry = std::make_shared<telemetry::TelemetryCorpus>(std::move(corpus));
    return cfg;
}

}  // namespace

HuntOptions HuntOptions::from_json(const nlohmann::json& j) {
    HuntOptions o;
    if (!j.is_object()) return o;
    if (j.contains("gate")) o.gate = parse_analyst_gate(j.at("gate").get<std::string>());
    if (j.value("auto_accept", false)) o.gate = AnalystGate::auto_accept_on_verifier_accept;
    o.analyst_override = j.value("analyst_override", false);
    if (j.contains("beacon_threshold")) o.beacon_threshold = j.at("beacon_threshold").get<double>();
    if (j.contains("beacon_window")) o.beacon_window = j.at("beacon_window").get<double>();
    return o;
}

nlohmann::json HuntOptions::to_json() const {
    nlohmann::json j{{"gate", huntforge::to_string(gate)}, {"analyst_override", analyst_override}};
    if (beacon_threshold) j["beacon_threshold"] = *beacon_threshold;
    if (beacon_window) j["beacon_window"] = *beacon_window;
    return j;
}

void apply_options(HuntConfig& config, const HuntOptions& options) {
    config.gate.gate = options.gate;
    config.gate.analyst_override = options.analyst_override;
    for (auto& d : config.detectors) {
        if (options.beacon_threshold) d.params.score_threshold = *options.beacon_threshold;
        if (options.beacon_window) d.params.window = *options.beacon_window;
        d.params.validate();
    }
}

AdvanceMode parse_advance_mode(std::string_view s) {
    if (s == "step") return AdvanceMode::step;
    if (s == "run") return AdvanceMode::run;
    throw invalid("mode must be \"step\" or \"run\"");
}

std::shared_ptr<HuntSession> HuntSession::create(std::string id, const std::string& spec_text,
                                                 telemetry::TelemetryCorpus corpus, const HuntOptions& options,
                                                 std::optional<fs::path> dir) {
    std::shared_ptr<HuntSession> s(new HuntSession);
    s->id_ = std::move(id);
    s->spec_text_ = spec_text;
    s->options_ = options;
    s->dir_ = std::move(dir);
    auto cfg = build_config(spec_text, corpus, options);
    s->state_ = init_hunt(cfg);
    if (s->dir_) {
        fs::create_directories(*s->dir_ / "telemetry");
        write_file(*s->dir_ / "spec.hunt", spec_text);
        write_file(*s->dir_ / "options.json", options.to_json().dump(2));
        telemetry::write_corpus(corpus, *s->dir_ / "telemetry", "base");
        write_file(*s->dir_ / "journal.ndjson", "");
        s->open_journal();
    }
    return s;
}

std::shared_ptr<HuntSession> HuntSession::recover(const fs::path& dir) {
    std::shared_ptr<HuntSession> s(new HuntSession);
    s->id_ = dir.filename().string();
    s->dir_ = dir;
    s->spec_text_ = read_file(dir / "spec.hunt");
    s->options_ = HuntOptions::from_json(nlohmann::json::parse(read_file(dir / "options.json")));
    auto corpus = telemetry::load_corpus(dir / "telemetry");
    for (const auto& e : fs::directory_iterator(dir / "telemetry"))
        if (e.path().filename().string().starts_with("batch")) ++s->batches_;
    auto cfg = build_config(s->spec_text_, std::move(corpus), s->options_);

    std::string text = read_file(dir / "journal.ndjson");
    auto last = text.rfind('\n');
    std::string complete = last == std::string::npos ? std::string{} : text.substr(0, last + 1);
    if (complete.size() != text.size()) write_file(dir / "journal.ndjson", complete);
    s->journal_ = parse_journal(complete);
    s->state_ = replay(s->journal_, cfg);
    s->open_journal();
    return s;
}

HuntSession::~HuntSession() {
    if (journal_fd_ >= 0) ::close(journal_fd_);
}

void HuntSession::open_journal() {
    journal_fd_ = ::open((*dir_ / "journal.ndjson").c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
    if (journal_fd_ < 0) throw HuntError(ErrorCode::io, "cannot open journal in " + dir_->string());
}

void HuntSession::commit(std::pair<HuntState, StepRecord> step) {
    if (journal_fd_ >= 0) {
        std::string line = write_journal_line(step.second) + "\n";
        std::size_t off = 0;
        while (off < line.size()) {
            auto n = ::write(journal_fd_, line.data() + off, line.size() - off);
            if (n < 0) throw HuntError(ErrorCode::io, "journal write failed");
            off += static_cast<std::size_t>(n);
        }
        ::fsync(journal_fd_);
    }
    journal_.push_back(std::move(step.second));
    state_ = std::move(step.first);
}

HuntState HuntSession::snapshot() const {
    std::shared_lock lock(mu_);
    return state_;
}

std::vector<StepRecord> HuntSession::journal() const {
    std::shared_lock lock(mu_);
    return journal_;
}

std::vector<StepRecord> HuntSession::advance(AdvanceMode mode) {
    std::unique_lock lock(mu_);
    std::vector<StepRecord> out;
    while (true) {
        bool applied = false;
        for (const auto& inv : pending_work(state_)) {
            auto step = apply_step(state_, inv);
            if (!step) continue;
            out.push_back(step->second);
            commit(std::move(*step));
            applied = true;
            break;
        }
        if (!applied || mode == AdvanceMode::step) break;
    }
    return out;
}

StepRecord HuntSession::decide(const std::string& hid, Decision verdict, const std::string& analyst) {
    std::unique_lock lock(mu_);
    auto step = promote(state_, hid, verdict, Actor::analyst_named(analyst));
    StepRecord r = step.second;
    commit(std::move(step));
    return r;
}

StepRecord HuntSession::dispose(const std::string& rid, deliberation::RecommendationStatus decision,
                                const std::string& analyst) {
    std::unique_lock lock(mu_);
    auto step = dispose_recommendation(state_, rid, decision, Actor::analyst_named(analyst));
    StepRecord r = step.second;
    commit(std::move(step));
    return r;
}

StepRecord HuntSession::inject(Hypothesis h, const std::string& analyst) {
    std::unique_lock lock(mu_);
    auto step = inject_hypothesis(state_, std::move(h), Actor::analyst_named(analyst));
    StepRecord r = step.second;
    commit(std::move(step));
    return r;
}

std::size_t HuntSession::append_telemetry(std::string_view ndjson) {
    std::unique_lock lock(mu_);
    telemetry::TelemetryCorpus batch;
    std::size_t n = telemetry::ingest_ndjson(batch, ndjson);
    if (n == 0) return 0;
    auto corpus = std::make_shared<telemetry::TelemetryCorpus>(*state_.config->telemetry);
    corpus->http.insert(corpus->http.end(), batch.http.begin(), batch.http.end());
    corpus->syslog.insert(corpus->syslog.end(), batch.syslog.begin(), batch.syslog.end());
    if (dir_) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "batch%06zu", ++batches_);
        telemetry::write_corpus(batch, *dir_ / "telemetry", stem);
    }
    state_.config = with_telemetry(*state_.config, corpus);
    return n;
}

SessionManager::SessionManager(std::optional<fs::path> data_root) : root_(std::move(data_root)) {
    if (root_) fs::create_directories(*root_);
}

std::string SessionManager::create(const std::string& spec_text, telemetry::TelemetryCorpus corpus,
                                   const HuntOptions& options) {
    std::lock_guard lock(mu_);
    std::string id;
    do id = "hunt-" + std::to_string(next_++);
    while (sessions_.count(id) || (root_ && fs::exists(*root_ / id)));
    std::optional<fs::path> dir;
    if (root_) dir = *root_ / id;
    try {
        sessions_[id] = HuntSession::create(id, spec_text, std::move(corpus), options, dir);
    } catch (...) {
        if (dir) fs::remove_all(*dir);
        throw;
    }
    return id;
}

std::shared_ptr<HuntSession> SessionManager::get(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw not_found("unknown hunt " + id);
    return it->second;
}

std::vector<std::string> SessionManager::ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

std::size_t SessionManager::recover_all() {
    if (!root_) return 0;
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(*root_)) {
        if (!e.is_directory() || !fs::exists(e.path() / "journal.ndjson")) continue;
        auto s = HuntSession::recover(e.path());
        sessions_[s->id()] = s;
        ++n;
    }
    return n;
}

nlohmann::json hunt_bundle(const HuntState& state) {
    nlohmann::json facts = nlohmann::json::array();
    for (const auto& f : state.k.facts) {
        nlohmann::json prov = nlohmann::json::array();
        for (const auto& r : f.provenance) prov.push_back(r.to_string());
        facts.push_back({{"fact", f.predicate.to_string()}, {"provenance", prov}});
    }
    return {{"hunt", state.config ? state.config->name : ""}, {"seq", state.seq}, {"facts", facts}};
}

}  // namespace huntforge::service
