#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "decon/cleanse.hpp"
#include "decon/synth.hpp"
#include "test_support.hpp"

using namespace decon;

namespace {

SynthConfig base_config(std::uint64_t seed, std::size_t pairs) {
    SynthConfig cfg;
    cfg.n_pairs = pairs;
    cfg.rng_seed = seed;
    std::tie(cfg.vocab_human, cfg.vocab_llm) = make_default_vocabs(seed, 250, 0.5);
    return cfg;
}

std::array<std::size_t, kCategoryCount> truth_counts(const SynthResult& synth) {
    std::array<std::size_t, kCategoryCount> counts{};
    for (const auto& [id, cat] : synth.ground_truth) {
        if (cat) counts[static_cast<int>(*cat)] += 1;
    }
    return counts;
}

}  // namespace

TEST_CASE("generate: deterministic per seed") {
    auto cfg = base_config(42, 50);
    cfg.contamination_rate = {{Category::beginning, 0.4}, {Category::rejection, 0.1}};
    auto a = generate(cfg);
    auto b = generate(cfg);
    REQUIRE(a.corpus.size() == b.corpus.size());
    for (std::size_t i = 0; i < a.corpus.size(); ++i) {
        CHECK(a.corpus.records[i] == b.corpus.records[i]);
    }
    CHECK(a.ground_truth == b.ground_truth);

    cfg.rng_seed = 43;
    std::tie(cfg.vocab_human, cfg.vocab_llm) = make_default_vocabs(43, 250, 0.5);
    auto c = generate(cfg);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.corpus.size(); ++i) {
        any_diff |= !(a.corpus.records[i] == c.corpus.records[i]);
    }
    CHECK(any_diff);
}

TEST_CASE("generate: all-zero rates give a clean corpus") {
    auto cfg = base_config(7, 120);
    auto synth = generate(cfg);
    auto catalog = PatternCatalog::builtin();
    for (const auto& [id, cat] : synth.ground_truth) CHECK(!cat.has_value());
    auto table = scan(synth.corpus, catalog);
    CHECK(table.total == 0);
    // and the base vocabulary never grazes a pattern, no matter the domain
    for (const auto& rec : synth.corpus.records) {
        CHECK(all_findings(rec, catalog).empty());
        Record h = rec;
        h.llm_text = rec.human_text;
        CHECK(all_findings(h, catalog).empty());
    }
}

TEST_CASE("generate: invalid configs are rejected") {
    auto cfg = base_config(1, 10);
    cfg.vocab_llm.clear();
    CHECK_THROWS_AS(generate(cfg), std::invalid_argument);

    auto cfg2 = base_config(1, 10);
    cfg2.contamination_rate = {{Category::beginning, 0.8}, {Category::rejection, 0.4}};
    CHECK_THROWS_AS(generate(cfg2), std::invalid_argument);
}

TEST_CASE("generate: high beginning rate mirrors the dominant-generator setting") {
    auto cfg = base_config(11, 1000);
    cfg.contamination_rate = {{Category::beginning, 0.947}};
    auto synth = generate(cfg);
    auto catalog = PatternCatalog::builtin();
    auto table = scan(synth.corpus, catalog);
    auto truth = truth_counts(synth);
    CHECK(table.count(cfg.llm_type_label, Category::beginning) ==
          truth[static_cast<int>(Category::beginning)]);
    CHECK(table.total == truth[static_cast<int>(Category::beginning)]);
    // the draw frequency lands near the configured rate
    CHECK(truth[static_cast<int>(Category::beginning)] > 900);
    CHECK(truth[static_cast<int>(Category::beginning)] < 990);
}

TEST_CASE("property: scan reproduces the ground truth exactly, all categories") {
    std::mt19937_64 rng(314);
    auto catalog = PatternCatalog::builtin();
    for (int round = 0; round < 8; ++round) {
        auto cfg = base_config(rng(), 40 + rng() % 160);
        cfg.contamination_rate = {{Category::rejection, 0.05 + (rng() % 10) / 100.0},
                                  {Category::prompt, 0.05 + (rng() % 10) / 100.0},
                                  {Category::beginning, 0.1 + (rng() % 20) / 100.0},
                                  {Category::domain, 0.05 + (rng() % 15) / 100.0},
                                  {Category::assistant, 0.05 + (rng() % 10) / 100.0}};
        auto synth = generate(cfg);
        auto table = scan(synth.corpus, catalog);
        auto truth = truth_counts(synth);
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            CHECK(table.count(cfg.llm_type_label, static_cast<Category>(c)) == truth[c]);
        }
        // per-record classify agrees with the injected category
        for (const auto& rec : synth.corpus.records) {
            auto f = classify(rec, catalog);
            const auto& want = synth.ground_truth.at(rec.id);
            CHECK(f.has_value() == want.has_value());
            if (f && want) CHECK(f->category == *want);
        }
    }
}

TEST_CASE("property: cleanse removes exactly the injected spans") {
    std::mt19937_64 rng(2718);
    auto catalog = PatternCatalog::builtin();
    for (int round = 0; round < 5; ++round) {
        auto cfg = base_config(rng(), 60 + rng() % 100);
        cfg.contamination_rate = {{Category::rejection, 0.1},
                                  {Category::prompt, 0.15},
                                  {Category::beginning, 0.25},
                                  {Category::domain, 0.15},
                                  {Category::assistant, 0.15}};
        auto synth = generate(cfg);
        auto cleansed = cleanse_corpus(synth.corpus, catalog, DomainPolicy::automatic);
        for (std::size_t i = 0; i < synth.corpus.size(); ++i) {
            const Record& rec = cleansed.corpus.records[i];
            const auto& want = synth.ground_truth.at(rec.id);
            const std::string& base = synth.pre_injection.at(rec.id);
            if (want && *want == Category::rejection) {
                CHECK(!rec.llm_text.has_value());
                continue;
            }
            REQUIRE(rec.llm_text.has_value());
            CHECK(*rec.llm_text == base);  // byte-exact restoration
        }
    }
}

TEST_CASE("make_default_vocabs: overlap and determinism") {
    auto [h1, l1] = make_default_vocabs(5, 100, 0.3);
    auto [h2, l2] = make_default_vocabs(5, 100, 0.3);
    CHECK(h1 == h2);
    CHECK(l1 == l2);
    CHECK(h1.size() == 100);
    CHECK(l1.size() == 100);
    std::size_t shared = 0;
    for (const auto& w : h1) {
        shared += std::find(l1.begin(), l1.end(), w) != l1.end();
    }
    CHECK(shared == 30);

    CHECK_THROWS_AS(make_default_vocabs(5, 0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(make_default_vocabs(5, 10, 1.5), std::invalid_argument);
}

TEST_CASE("config: JSON round trip") {
    auto cfg = base_config(9, 33);
    cfg.contamination_rate = {{Category::beginning, 0.3}, {Category::domain, 0.1}};
    cfg.domain_mix = {{Domain::arxiv, 0.5}, {Domain::yelp, 0.5}};
    auto restored = SynthConfig::from_json(cfg.to_json());
    CHECK(restored.n_pairs == cfg.n_pairs);
    CHECK(restored.rng_seed == cfg.rng_seed);
    CHECK(restored.contamination_rate == cfg.contamination_rate);
    CHECK(restored.domain_mix == cfg.domain_mix);
    CHECK(restored.vocab_human == cfg.vocab_human);
    CHECK(restored.vocab_llm == cfg.vocab_llm);

    auto a = generate(cfg);
    auto b = generate(restored);
    for (std::size_t i = 0; i < a.corpus.size(); ++i) {
        CHECK(a.corpus.records[i] == b.corpus.records[i]);
    }
}
