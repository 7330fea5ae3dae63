#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"

using namespace huntforge;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("check accepts the fixture and reports positions") {
    auto ok = hftest::run_cli({"check", hftest::zeus_hunt_path().string()});
    CHECK(ok.exit_code == 0);
    CHECK(ok.output.find("ok") != std::string::npos);

    hftest::TempDir dir("check");
    spit(dir.path() / "bad.hunt", "hunt bad { detector beac on http @ }\n");
    auto bad = hftest::run_cli({"check", (dir.path() / "bad.hunt").string()});
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("bad.hunt:1:34:") != std::string::npos);
}

TEST_CASE("fmt is idempotent") {
    hftest::TempDir dir("fmt");
    const auto file = dir.path() / "z.hunt";
    spit(file, hftest::zeus_hunt_text());
    auto once = hftest::run_cli({"fmt", file.string()});
    REQUIRE(once.exit_code == 0);
    CHECK(hftest::run_cli({"fmt", "-w", file.string()}).exit_code == 0);
    CHECK(slurp(file) == once.output);
    CHECK(hftest::run_cli({"fmt", file.string()}).output == once.output);
}

TEST_CASE("simulate, run and replay") {
    hftest::TempDir dir("run");
    const auto corpus = dir.path() / "corpus";
    auto sim = hftest::run_cli({"simulate", "--seed", "42", "--out", corpus.string(), "--truth",
                                (dir.path() / "truth.json").string()});
    REQUIRE(sim.exit_code == 0);
    CHECK(fs::exists(corpus / "scenario.http.ndjson"));
    CHECK(telemetry::load_corpus(corpus) == telemetry::generate_scenario(42).corpus);
    auto truth = nlohmann::json::parse(slurp(dir.path() / "truth.json"));
    CHECK(truth.at("infected_hosts").size() == 2);

    const auto journal = dir.path() / "journal.ndjson";
    const auto state = dir.path() / "state.json";
    auto run = hftest::run_cli({"run", "--spec", hftest::zeus_hunt_path().string(), "--telemetry", corpus.string(),
                                "--auto-accept", "--journal", journal.string(), "--state-out", state.string()});
    REQUIRE(run.exit_code == 0);
    CHECK(run.output.find("14 steps, 3 facts, 4 recommendations") != std::string::npos);
    CHECK(read_journal(journal).size() == 14);

    auto rep = hftest::run_cli({"replay", "--journal", journal.string(), "--spec", hftest::zeus_hunt_path().string(),
                                "--assert-final", state.string()});
    CHECK(rep.exit_code == 0);
    CHECK(rep.output.find("final state matches") != std::string::npos);

    auto lines = slurp(journal);
    spit(dir.path() / "short.ndjson", lines.substr(0, lines.rfind('\n', lines.size() - 2) + 1));
    auto diff = hftest::run_cli({"replay", "--journal", (dir.path() / "short.ndjson").string(), "--spec",
                                 hftest::zeus_hunt_path().string(), "--assert-final", state.string()});
    CHECK(diff.exit_code != 0);
}

TEST_CASE("gated run stops for the analyst") {
    auto run = hftest::run_cli({"run", "--spec", hftest::zeus_hunt_path().string(), "--seed", "42"});
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("awaiting analyst: h2") != std::string::npos);
    CHECK(run.output.find("awaiting analyst: h3") != std::string::npos);
}

TEST_CASE("errors exit nonzero") {
    CHECK(hftest::run_cli({"run", "--spec", "/no/such.hunt", "--seed", "1"}).exit_code != 0);
    CHECK(hftest::run_cli({"run", "--spec", hftest::zeus_hunt_path().string(), "--telemetry", "/no/dir"}).exit_code != 0);
    CHECK(hftest::run_cli({"bogus"}).exit_code != 0);
}

}
