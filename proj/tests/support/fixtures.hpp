#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "huntforge/dsl/dsl.hpp"
#include "huntforge/hunt.hpp"
#include "huntforge/scenario.hpp"

namespace hftest {

using namespace huntforge;

std::filesystem::path source_dir();
std::filesystem::path zeus_hunt_path();
std::string zeus_hunt_text();

/// zeus.hunt bound against the seed-42 scenario corpus (or the given one).
std::shared_ptr<HuntConfig> zeus_config(AnalystGate gate = AnalystGate::required, std::uint64_t seed = 42);

/// Runs pending work to quiescence, always taking the first invocation.
struct Run {
    HuntState state;
    std::vector<StepRecord> journal;
};
Run run_machine(HuntState state);
Run run_machine(std::shared_ptr<const HuntConfig> cfg);

/// Path of the built `huntforge` binary.
std::filesystem::path cli_path();

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};
/// Runs the CLI with shell-quoted arguments.
CommandResult run_cli(const std::vector<std::string>& args);

/// A scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Small randomized hunt: a few clients, a one-day window, optional beacons,
/// lateral SMB access, partial forensic coverage, random intel and profiles.
std::shared_ptr<HuntConfig> random_hunt(std::mt19937_64& rng);

/// Outcome of one property suite.
struct PropertyResult {
    std::size_t cases = 0;
    std::size_t failures = 0;
    std::string first_failure;
    std::size_t transitions = 0;  // journaled steps exercised
    std::size_t facts = 0;        // facts promoted during the walks

    bool ok() const { return failures == 0; }
    void fail(std::size_t index, const std::string& why);
};

/// Random walks over random hunts mixing machine steps with analyst decisions.
/// Each checks one invariant after every transition.
PropertyResult property_knowledge_monotonicity(std::size_t cases, std::uint64_t seed);
PropertyResult property_promotion_soundness(std::size_t cases, std::uint64_t seed);
PropertyResult property_disjointness(std::size_t cases, std::uint64_t seed);
PropertyResult property_replay_fixpoint(std::size_t cases, std::uint64_t seed);
PropertyResult property_step_purity(std::size_t cases, std::uint64_t seed);
PropertyResult property_rank_invariance(std::size_t cases, std::uint64_t seed);
PropertyResult property_dsl_roundtrip(std::size_t cases, std::uint64_t seed);

/// A random parse-normal AST.
dsl::HuntSpecAst random_ast(std::mt19937_64& rng);

}  // namespace hftest
