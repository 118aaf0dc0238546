#include <chrono>

#include "doctest.h"
#include "tenq/backend.hpp"
#include "tenq/error.hpp"
#include "tenq/layout.hpp"
#include "tenq/pipeline.hpp"
#include "test_support.hpp"

using namespace tenq;
using namespace tenq::classifiers;
using namespace std::chrono_literals;

namespace {

std::string stub(const std::string& flags = {}) {
    return flags.empty() ? std::string(TENQ_STUB_BACKEND) : std::string(TENQ_STUB_BACKEND) + " " + flags;
}

candidates::ContextSnippet snippet(std::string text, bool bold) {
    Block b;
    b.text = std::move(text);
    b.bold = bold;
    candidates::ContextSnippet s;
    s.blocks = {Block{}, b, Block{}};
    s.blocks[0].text = "before";
    s.blocks[2].text = "after";
    s.candidate_offset = 1;
    return s;
}

const std::string kLong(150, 'x');

Prediction marker(std::size_t i) { return {false, 0.25 + 0.001 * double(i)}; }

}  // namespace

TEST_CASE("stub backend passes conformance") {
    const auto checks = run_protocol_conformance(stub(), 5000ms);
    REQUIRE_FALSE(checks.empty());
    for (const auto& c : checks) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.passed);
    }
}

TEST_CASE("conformance flags broken backends") {
    auto failed = [](const std::vector<ConformanceCheck>& checks) {
        return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; });
    };
    CHECK(failed(run_protocol_conformance(stub("--no-hello"), 2000ms)));
    CHECK(failed(run_protocol_conformance(stub("--bad-score"), 2000ms)));
    CHECK(failed(run_protocol_conformance(stub("--garbage-reply"), 2000ms)));
    CHECK(failed(run_protocol_conformance("/nonexistent/backend-binary", 2000ms)));
}

TEST_CASE("classify returns backend scores in order") {
    BackendHandle b(stub());
    CHECK(b.name() == "stub");
    CHECK(b.alive());
    CHECK(b.classify(snippet("Item 2. Properties", false)) == 0.9);
    CHECK(b.classify(snippet(kLong, false)) == 0.1);
    CHECK(b.classify(snippet(kLong, true)) == 0.9);

    ExternalStats stats;
    const auto preds = external_classify(b, {snippet(kLong, false), snippet("short", false)}, marker, &stats);
    REQUIRE(preds.size() == 2);
    CHECK_FALSE(preds[0].label);
    CHECK(preds[0].score == 0.1);
    CHECK(preds[1].label);
    CHECK(stats.from_backend == 2);
    CHECK(stats.from_fallback == 0);
    b.shutdown();
    CHECK_FALSE(b.alive());
}

TEST_CASE("a dying backend hands the rest to the fallback") {
    BackendHandle b(stub("--die-after 2"));
    std::vector<candidates::ContextSnippet> snips(5, snippet("short", true));
    ExternalStats stats;
    const auto preds = external_classify(b, snips, marker, &stats);
    REQUIRE(preds.size() == 5);
    CHECK(preds[0].score == 0.9);
    CHECK(preds[1].score == 0.9);
    for (std::size_t i = 2; i < 5; ++i) CHECK(preds[i].score == doctest::Approx(marker(i).score));
    CHECK(stats.from_backend == 2);
    CHECK(stats.from_fallback == 3);
    CHECK_FALSE(b.alive());
}

TEST_CASE("slow backends time out per snippet") {
    BackendHandle b(stub("--delay-ms 400"), 100ms);
    ExternalStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    const auto preds = external_classify(b, {snippet("a", true), snippet("b", true)}, marker, &stats);
    const auto took = std::chrono::steady_clock::now() - t0;
    CHECK(stats.from_fallback == 2);
    CHECK(preds[0].score == doctest::Approx(marker(0).score));
    CHECK(took < 2s);
}

TEST_CASE("protocol violations") {
    BackendHandle bad(stub("--bad-score"));
    CHECK_THROWS_AS(bad.classify(snippet("a", true)), ProtocolError);
    BackendHandle garbage(stub("--garbage-reply"));
    CHECK_THROWS_AS(garbage.classify(snippet("a", true)), ProtocolError);
    CHECK_THROWS_AS(BackendHandle(stub("--no-hello"), 1000ms, 2000ms), BackendUnavailable);
    CHECK_THROWS_AS(BackendHandle("/nonexistent/backend-binary", 1000ms, 1000ms), BackendUnavailable);
}

TEST_CASE("external classifier matches the local model once the backend is gone") {
    const auto f = eval::generate_filing(eval::SyntheticSpec::perturbed(4, 1, 0.5), 0);
    const auto doc = testing::normalized(f);
    const auto cands = candidates::find_candidates(doc, canonical_layout());
    REQUIRE(cands.size() > 3);
    const auto model = train(split_dataset(pipeline::make_training_set(4, 300), 4).train, ModelKind::Logistic, 4);

    BackendHandle dead(stub("--die-after 0"));
    ExternalStats stats;
    const auto ext = pipeline::external_classifier(dead, model, &stats)(doc, cands);
    const auto local = pipeline::local_classifier(model)(doc, cands);
    REQUIRE(ext.size() == local.size());
    for (std::size_t i = 0; i < ext.size(); ++i) CHECK(ext[i].score == local[i].score);
    CHECK(stats.from_backend == 0);
    CHECK(stats.from_fallback == cands.size());

    BackendHandle dead2(stub("--die-after 0"));
    for (const auto& p : pipeline::external_classifier(dead2, std::nullopt)(doc, cands)) CHECK_FALSE(p.label);
}
