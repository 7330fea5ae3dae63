#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "huntforge/errors.hpp"
#include "huntforge/reasoning.hpp"

using namespace huntforge;
using namespace huntforge::reasoning;

namespace {

const std::string kC2 = "203.0.113.7";

KnowledgeBase zeus_k(bool with_intel = true) {
    KnowledgeBase k;
    std::vector<std::string> clients;
    for (int i = 1; i <= 10; ++i) clients.push_back("client" + std::to_string(i));
    k.internal = std::make_shared<InternalKnowledge>(InternalKnowledge{clients, {"http", "syslog"}});
    auto intel = std::make_shared<IntelStore>();
    if (with_intel) {
        intel->cc_hosts = {kC2};
        intel->malware = {{"zeus", telemetry::zeus_hash_fixture()}};
    }
    k.intel = intel;
    return k;
}

Hypothesis beacon(const std::string& remote, const std::string& client, double conf = 0.8) {
    Hypothesis h;
    h.id = "h1";
    h.kind = HypothesisKind::detection;
    h.predicate = Predicate("beacon", {remote, client});
    h.confidence = conf;
    h.evidence = {EvidenceRef::telemetry("http", 3)};
    h.origin = "beac";
    return h;
}

Hypothesis threat(const std::string& id, Predicate p) {
    Hypothesis h;
    h.id = id;
    h.predicate = std::move(p);
    h.confidence = 0.5;
    h.evidence = {EvidenceRef::hypothesis("h1")};
    return h;
}

bool grounded(const Hypothesis& h) {
    return !h.evidence.empty() && std::all_of(h.evidence.begin(), h.evidence.end(), [](const EvidenceRef& e) {
        return e.kind == EvidenceKind::telemetry || e.kind == EvidenceKind::intel ||
               e.kind == EvidenceKind::hypothesis || e.kind == EvidenceKind::fact;
    });
}

}  // namespace

TEST_SUITE("reasoning") {

TEST_CASE("kge expands a matched beacon") {
    auto out = kge_expand(beacon(kC2, "client1"), zeus_k());
    REQUIRE(out.size() == 2);
    CHECK(out[0].predicate == Predicate("cec", {kC2}));
    CHECK(out[1].predicate == Predicate("infected", {"client1", "zeus"}));
    for (const auto& h : out) {
        CHECK(h.kind == HypothesisKind::threat);
        CHECK(h.origin == "kge");
        CHECK(h.evidence.front() == EvidenceRef::hypothesis("h1"));
        CHECK(grounded(h));
    }
    CHECK(std::count(out[1].evidence.begin(), out[1].evidence.end(), EvidenceRef::intel("malware/zeus")) == 1);
}

TEST_CASE("kge without intel emits a weak cec only") {
    auto out = kge_expand(beacon(kC2, "client1"), zeus_k(false));
    REQUIRE(out.size() == 1);
    CHECK(out[0].predicate == Predicate("cec", {kC2}));
    CHECK(out[0].confidence < 0.8);
}

TEST_CASE("kge confidence propagation") {
    CHECK(kge_expand(beacon(kC2, "client1", 0.8), zeus_k())[0].confidence == doctest::Approx(0.8));
    CHECK(kge_expand(beacon("198.51.100.1", "client1", 0.8), zeus_k())[0].confidence == doctest::Approx(0.4));
    CHECK(kge_expand(beacon("198.51.100.1", "client1", 0.8), zeus_k(), 0.25)[0].confidence == doctest::Approx(0.2));
}

TEST_CASE("kge rejects the wrong shape") {
    auto h = beacon(kC2, "client1");
    h.predicate = Predicate("beacon", {kC2});
    CHECK_THROWS_AS(kge_expand(h, zeus_k()), HuntError);
    auto t = threat("h2", Predicate("cec", {kC2}));
    CHECK_THROWS_AS(kge_expand(t, zeus_k()), HuntError);
}

TEST_CASE("impact over the scenario syslog") {
    auto s = telemetry::generate_scenario(42);
    auto k = zeus_k();
    const Predicate fact("infected", {"client1", "zeus"});
    k.facts.push_back({fact, {EvidenceRef::hypothesis("h3")}});
    auto out = impact_assess(fact, k, s.corpus.syslog);
    REQUIRE(out.size() == 2);
    CHECK(out[0].predicate == Predicate("infected", {"client2", "zeus"}));
    CHECK(out[1].predicate == Predicate("infected", {"client7", "zeus"}));
    for (const auto& h : out) {
        CHECK(h.origin == "impact");
        CHECK(h.evidence.front() == EvidenceRef::fact(fact.to_string()));
        bool syslog_ref = false;
        for (const auto& e : h.evidence) {
            if (e.kind != EvidenceKind::telemetry) continue;
            syslog_ref = true;
            const auto& ev = s.corpus.syslog.at(e.offset);
            CHECK(ev.event_type == "smb_access");
            CHECK(ev.peer == std::optional<std::string>("client1"));
            CHECK(ev.host == h.predicate.args[0]);
        }
        CHECK(syslog_ref);
    }

    SUBCASE("known infections are skipped") {
        k.facts.push_back({Predicate("infected", {"client2", "zeus"}), {}});
        auto again = impact_assess(fact, k, s.corpus.syslog);
        REQUIRE(again.size() == 1);
        CHECK(again[0].predicate == Predicate("infected", {"client7", "zeus"}));
    }
    SUBCASE("no access from the source host") {
        std::vector<telemetry::SyslogEvent> quiet;
        for (const auto& e : s.corpus.syslog)
            if (e.peer != std::optional<std::string>("client1")) quiet.push_back(e);
        CHECK(impact_assess(fact, k, quiet).empty());
    }
}

TEST_CASE("impact needs the fact in knowledge") {
    auto s = telemetry::generate_scenario(42);
    try {
        impact_assess(Predicate("infected", {"client1", "zeus"}), zeus_k(), s.corpus.syslog);
        FAIL("expected not_applicable");
    } catch (const HuntError& e) {
        CHECK(e.code() == ErrorCode::not_applicable);
    }
}

TEST_CASE("analytics verdicts") {
    auto yes = verify_analytics(threat("h2", Predicate("cec", {kC2})), zeus_k());
    CHECK(yes.decision == Decision::accepted);
    CHECK(yes.verifier == "analytics");
    CHECK(yes.rationale == std::vector<EvidenceRef>{EvidenceRef::intel("cc/" + kC2)});

    CHECK(verify_analytics(threat("h2", Predicate("cec", {"192.0.2.5"})), zeus_k()).decision == Decision::rejected);
    CHECK(verify_analytics(threat("h2", Predicate("cec", {kC2})), zeus_k(false)).decision == Decision::rejected);
    CHECK_THROWS_AS(verify_analytics(threat("h2", Predicate("infected", {"client1", "zeus"})), zeus_k()), HuntError);
}

TEST_CASE("forensics verdicts") {
    auto s = telemetry::generate_scenario(42);
    auto inv = s.corpus.inventories;
    inv.erase("client3");
    auto two = verify_forensics(threat("h4", Predicate("infected", {"client2", "zeus"})), inv, zeus_k());
    CHECK(two.decision == Decision::accepted);
    REQUIRE(!two.rationale.empty());
    CHECK(two.rationale.front().kind == EvidenceKind::artifact);
    CHECK(two.rationale.front().source == "client2");
    CHECK(std::count(two.rationale.begin(), two.rationale.end(), EvidenceRef::intel("malware/zeus")) == 1);

    auto seven = verify_forensics(threat("h5", Predicate("infected", {"client7", "zeus"})), inv, zeus_k());
    CHECK(seven.decision == Decision::rejected);

    try {
        verify_forensics(threat("h6", Predicate("infected", {"client3", "zeus"})), inv, zeus_k());
        FAIL("expected unavailable");
    } catch (const HuntError& e) {
        CHECK(e.code() == ErrorCode::unavailable);
    }
}

TEST_CASE("verifiers are pure") {
    auto s = telemetry::generate_scenario(42);
    auto h = threat("h4", Predicate("infected", {"client2", "zeus"}));
    auto k = zeus_k();
    CHECK(verify_forensics(h, s.corpus.inventories, k) == verify_forensics(h, s.corpus.inventories, k));
    auto c = threat("h2", Predicate("cec", {kC2}));
    CHECK(verify_analytics(c, k) == verify_analytics(c, k));
}

TEST_CASE("intel lookup") {
    auto k = zeus_k();
    auto cc = intel_lookup(*k.intel, kC2);
    REQUIRE(cc.size() == 1);
    CHECK(cc[0] == IntelMatch{IntelMatchKind::cc, "cc/" + kC2, kC2});
    CHECK(intel_lookup(*k.intel, "unknown").empty());
    auto m = intel_lookup(*k.intel, telemetry::zeus_hash_fixture());
    REQUIRE(m.size() == 1);
    CHECK(m[0] == IntelMatch{IntelMatchKind::malware, "malware/zeus", "zeus"});
    CHECK(intel_lookup(*k.intel, telemetry::zeus_hash_fixture().substr(0, 63)).empty());
}

TEST_CASE("intel store validation") {
    IntelStore s;
    s.malware = {{"zeus", "014E7"}};
    CHECK_THROWS_AS(s.validate(), HuntError);
    s.malware = {{"zeus", telemetry::zeus_hash_fixture()}, {"zeus", telemetry::zeus_hash_fixture()}};
    CHECK_THROWS_AS(s.validate(), HuntError);
    auto j = to_json(*zeus_k().intel);
    CHECK(parse_intel(j) == *zeus_k().intel);
}

TEST_CASE("natural host order") {
    CHECK(natural_less("client2", "client10"));
    CHECK_FALSE(natural_less("client10", "client2"));
    CHECK(natural_less("a", "b"));
}

TEST_CASE("accepted facts match ground truth on seeded scenarios") {
    for (std::uint64_t seed : {42, 7, 1234}) {
        auto cfg = hftest::zeus_config(AnalystGate::auto_accept_on_verifier_accept, seed);
        auto scenario = telemetry::generate_scenario(seed);
        auto run = hftest::run_machine(cfg);
        std::set<std::string> infected;
        for (const auto& f : run.state.k.facts)
            if (f.predicate.name == "infected") infected.insert(f.predicate.args[0]);
        std::set<std::string> truth(scenario.truth.infected_hosts.begin(), scenario.truth.infected_hosts.end());
        CHECK(infected == truth);
        CHECK(run.state.k.has_fact(Predicate("cec", {kC2})));
    }
}

TEST_CASE("every raised hypothesis is grounded") {
    auto run = hftest::run_machine(hftest::zeus_config(AnalystGate::auto_accept_on_verifier_accept));
    for (const auto& h : run.state.hypotheses) {
        CHECK(grounded(h));
        for (const auto& e : h.evidence)
            if (e.kind == EvidenceKind::hypothesis) CHECK(run.state.find_hypothesis(std::string_view(e.source)));
    }
}

}
