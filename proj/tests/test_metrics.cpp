#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "decon/metrics.hpp"

using namespace decon;

namespace {

// Oracle: direct pair counting over every (positive, negative) pair.
double brute_auc(const std::vector<ScoredLabel>& scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (const ScoredLabel& p : scores) {
        if (!p.is_llm) continue;
        for (const ScoredLabel& n : scores) {
            if (n.is_llm) continue;
            ++pairs;
            if (p.score > n.score) wins += 1.0;
            else if (p.score == n.score) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Oracle: exhaustive sweep over thresholds between all observed scores.
TprAtFprResult brute_tpr_at_fpr(const std::vector<ScoredLabel>& scores,
                                double fpr_target) {
    std::vector<double> candidates;
    for (const ScoredLabel& s : scores) candidates.push_back(s.score);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates.push_back(std::numeric_limits<double>::infinity());

    std::size_t n_pos = 0, n_neg = 0;
    for (const ScoredLabel& s : scores) (s.is_llm ? n_pos : n_neg) += 1;

    TprAtFprResult best;
    best.tpr = -1.0;
    for (double t : candidates) {
        std::size_t tp = 0, fp = 0;
        for (const ScoredLabel& s : scores) {
            if (s.score >= t) (s.is_llm ? tp : fp) += 1;
        }
        double fpr = double(fp) / double(n_neg);
        double tpr = double(tp) / double(n_pos);
        if (fpr <= fpr_target && tpr > best.tpr) {
            best.tpr = tpr;
            best.threshold = t;
        }
    }
    if (best.tpr < 0.0) { best.tpr = 0.0; }
    return best;
}

std::vector<ScoredLabel> random_scores(std::mt19937_64& rng, std::size_t n,
                                       bool quantized) {
    std::vector<ScoredLabel> out;
    bool saw_pos = false, saw_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        ScoredLabel s;
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        s.score = quantized ? std::round(u * 10.0) / 10.0 : u;
        s.is_llm = rng() % 2 == 0;
        if (i == n - 2 && !saw_pos) s.is_llm = true;
        if (i == n - 1 && !saw_neg) s.is_llm = false;
        (s.is_llm ? saw_pos : saw_neg) = true;
        out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("roc_auc: frozen examples") {
    CHECK(roc_auc({{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}}) == 1.0);
    CHECK(roc_auc({{0.9, true}, {0.4, true}, {0.5, false}, {0.1, false}}) == 0.75);
    CHECK(roc_auc({{0.5, true}, {0.5, true}, {0.5, false}}) == 0.5);
    CHECK_THROWS_AS(roc_auc({{0.5, true}, {0.6, true}}), std::invalid_argument);
    CHECK_THROWS_AS(roc_auc({}), std::invalid_argument);
}

TEST_CASE("roc_auc: equals brute-force pair counting") {
    std::mt19937_64 rng(41);
    for (int round = 0; round < 60; ++round) {
        auto scores = random_scores(rng, 2 + rng() % 198, round % 2 == 0);
        CHECK(roc_auc(scores) == doctest::Approx(brute_auc(scores)).epsilon(1e-12));
    }
}

TEST_CASE("roc_auc: invariant under strictly monotone transforms") {
    std::mt19937_64 rng(43);
    for (int round = 0; round < 20; ++round) {
        auto scores = random_scores(rng, 2 + rng() % 100, false);
        auto transformed = scores;
        for (auto& s : transformed) s.score = std::exp(3.0 * s.score) - 0.5;
        CHECK(roc_auc(scores) == doctest::Approx(roc_auc(transformed)).epsilon(1e-12));
    }
}

TEST_CASE("tpr_at_fpr: frozen examples") {
    std::vector<ScoredLabel> perfect{{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}};
    CHECK(tpr_at_fpr(perfect, 0.0001).tpr == 1.0);
    CHECK(tpr_at_fpr(perfect, 0.25).tpr == 1.0);

    // threshold lands just above .3: FPR 1/4, TPR 4/4
    std::vector<ScoredLabel> mixed{{0.1, false}, {0.2, false}, {0.3, false},
                                   {0.4, false},  {0.35, true}, {0.5, true},
                                   {0.6, true},  {0.7, true}};
    auto r = tpr_at_fpr(mixed, 0.25);
    CHECK(r.tpr == 1.0);
    CHECK(r.threshold == 0.35);

    CHECK_THROWS_AS(tpr_at_fpr({{0.5, true}}, 0.1), std::invalid_argument);
}

TEST_CASE("tpr_at_fpr: small-sample caveat and zero-FPR fallback") {
    std::vector<ScoredLabel> scores{{0.6, true}, {0.7, true}, {0.4, false}, {0.3, false}};
    auto r = tpr_at_fpr(scores, 0.0001);  // fewer than 10,000 negatives
    CHECK(r.small_sample);
    CHECK(r.tpr == 1.0);          // separable: threshold above max negative
    CHECK(r.threshold == 0.6);

    // overlapping scores: nothing clears the max negative
    std::vector<ScoredLabel> tangled{{0.4, true}, {0.5, false}, {0.3, true}, {0.2, false}};
    auto z = tpr_at_fpr(tangled, 0.0001);
    CHECK(z.tpr == 0.0);
}

TEST_CASE("tpr_at_fpr: equals exhaustive sweep, non-decreasing in target") {
    std::mt19937_64 rng(47);
    for (int round = 0; round < 40; ++round) {
        auto scores = random_scores(rng, 2 + rng() % 150, round % 2 == 0);
        double prev = -1.0;
        for (double target : {0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0}) {
            auto fast = tpr_at_fpr(scores, target);
            auto brute = brute_tpr_at_fpr(scores, target);
            CHECK(fast.tpr == doctest::Approx(brute.tpr).epsilon(1e-12));
            CHECK(fast.tpr >= prev);
            prev = fast.tpr;
        }
    }
}

TEST_CASE("f1_accuracy: frozen confusion-matrix example") {
    // 2 TP, 1 FP, 1 FN, 4 TN at threshold 0.5
    std::vector<ScoredLabel> scores{
        {0.9, true},  {0.8, true},   // TP, TP
        {0.7, false},                // FP
        {0.2, true},                 // FN
        {0.1, false}, {0.2, false}, {0.3, false}, {0.4, false},  // TN x4
    };
    auto r = f1_accuracy(scores, 0.5);
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(0.75).epsilon(1e-12));

    auto perfect = f1_accuracy({{0.9, true}, {0.1, false}}, 0.5);
    CHECK(perfect.f1 == 1.0);
    CHECK(perfect.accuracy == 1.0);
}

TEST_CASE("f1_accuracy: zero predicted positives reports F1 = 0 with a diagnostic flag") {
    auto r = f1_accuracy({{0.2, true}, {0.1, false}}, 0.5);
    CHECK(r.f1 == 0.0);
    CHECK(r.no_predicted_positives);
    CHECK(r.accuracy == 0.5);
}

TEST_CASE("evaluate_scores: assembles the full row") {
    std::vector<ScoredLabel> scores{{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}};
    auto r = evaluate_scores(scores, 0.5, 0.5);
    CHECK(r.roc_auc == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.accuracy == 1.0);
    CHECK(r.tpr_at_fpr == 1.0);
    CHECK(r.n == 4);
    CHECK(r.fpr_target == 0.5);
    CHECK(!r.tpr_small_sample);  // 2 negatives suffice for a 0.5 target

    // at the default 0.01% target, 2 negatives are a small sample
    CHECK(evaluate_scores(scores).tpr_small_sample);
}
