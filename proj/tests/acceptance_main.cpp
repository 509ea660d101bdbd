// Acceptance suite: one line per criterion, [PASS]/[FAIL]/[SKIP], nonzero
// exit when anything fails. Criterion 9 needs the upstream benchmark corpus
// and is skipped unless --detectrl <corpus.jsonl> is given.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "decon/attack.hpp"
#include "decon/cleanse.hpp"
#include "decon/corpus.hpp"
#include "decon/detector.hpp"
#include "decon/metrics.hpp"
#include "decon/patterns.hpp"
#include "decon/synth.hpp"
#include "test_support.hpp"

using namespace decon;

namespace {

struct Outcome {
    enum class Status { pass, fail, skip } status = Status::pass;
    std::string detail;
};

Outcome pass(std::string detail = {}) { return {Outcome::Status::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::Status::fail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Outcome::Status::skip, std::move(detail)}; }

SynthConfig random_synth_config(std::mt19937_64& rng) {
    SynthConfig cfg;
    // Corpora well under the 1,000-record cap. The brute-force oracle runs
    // the leading-.* patterns naively, so record count x length dominates
    // this suite's runtime.
    cfg.n_pairs = 20 + rng() % 110;
    cfg.rng_seed = rng();
    cfg.min_sentences = 3;
    cfg.max_sentences = 5;
    cfg.contamination_rate = {
        {Category::rejection, (rng() % 12) / 100.0},
        {Category::prompt, (rng() % 15) / 100.0},
        {Category::beginning, (rng() % 30) / 100.0},
        {Category::domain, (rng() % 18) / 100.0},
        {Category::assistant, (rng() % 12) / 100.0},
    };
    std::tie(cfg.vocab_human, cfg.vocab_llm) =
        make_default_vocabs(cfg.rng_seed, 150 + rng() % 200, (rng() % 70) / 100.0);
    return cfg;
}

// fixed settings of the desk-scale spoofing experiment (criteria 5 and 6)
constexpr std::uint64_t kExperimentSeed = 46017;
constexpr std::uint64_t kSplitSeed = 604;

SynthConfig experiment_synth_config() {
    SynthConfig cfg;
    cfg.n_pairs = 2000;
    cfg.rng_seed = kExperimentSeed;
    cfg.contamination_rate = {{Category::beginning, 0.3}};
    std::tie(cfg.vocab_human, cfg.vocab_llm) = make_default_vocabs(kExperimentSeed, 400, 0.5);
    return cfg;
}

PairedExperimentResult run_experiment(const SynthResult& synth) {
    ExperimentConfig cfg;
    cfg.attack_eval_count = 200;
    cfg.train.epochs = 200;
    return paired_experiment(synth.corpus, PatternCatalog::builtin(), AttackSpec{},
                             kSplitSeed, cfg);
}

// ---- criteria ---------------------------------------------------------------

Outcome criterion_pattern_fidelity() {
    auto catalog = PatternCatalog::builtin();
    struct Fixture {
        const char* text;
        Domain domain;
        Category want;
    };
    const Fixture fixtures[] = {
        {"Sure! Here is the academic article abstract:", Domain::arxiv,
         Category::beginning},
        {"I apologize, upon further reflection I do not feel comfortable generating "
         "fictional negative reviews.",
         Domain::yelp, Category::rejection},
        {"Here is a 10 sentence abstract for the article title \"Fundamental Limits to "
         "Position Determination by Concentration Gradients\":Organisms across nature "
         "have evolved to determine their position using concentration gradients of "
         "signaling molecules.",
         Domain::arxiv, Category::beginning},
        {"in a human conversational style", Domain::xsum, Category::prompt},
    };
    int i = 0;
    for (const Fixture& fx : fixtures) {
        Record rec;
        rec.id = "fixture-" + std::to_string(i++);
        rec.domain = fx.domain;
        rec.llm_type_raw = "Claude-instant";
        rec.llm_text = fx.text;
        auto finding = classify(rec, catalog);
        if (!finding) return fail("no finding for fixture " + rec.id);
        if (finding->category != fx.want) {
            return fail("fixture " + rec.id + " classified " +
                        category_name(finding->category) + ", expected " +
                        category_name(fx.want));
        }
    }
    return pass("4/4 fixtures exact");
}

Outcome criterion_claude_arithmetic() {
    ContaminationTable table;
    table.add_count("Claude-instant", Category::rejection, 448);
    table.add_count("Claude-instant", Category::prompt, 79);
    table.add_count("Claude-instant", Category::beginning, 13261);
    table.add_count("Claude-instant", Category::domain, 8);
    table.records_per_llm["Claude-instant"] = 14000;
    table.corpus_size = 56000;

    double rate = contamination_rate(table, "Claude-instant");
    if (std::abs(rate - 0.9854) > 0.001) {
        return fail("overall rate " + std::to_string(rate) + " not within 0.9854 +- 0.001");
    }
    double beginning = category_rate(table, "Claude-instant", Category::beginning);
    if (std::abs(beginning - 0.9472) > 0.001) {
        return fail("beginning rate " + std::to_string(beginning) +
                    " not within 0.9472 +- 0.001");
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "13796/14000 = %.4f, 13261/14000 = %.4f", rate,
                  beginning);
    return pass(buf);
}

Outcome criterion_scan_oracle() {
    std::mt19937_64 rng(7001);
    auto catalog = PatternCatalog::builtin();
    std::size_t records_checked = 0;
    for (int draw = 0; draw < 50; ++draw) {
        auto cfg = random_synth_config(rng);
        auto synth = generate(cfg);
        auto table = scan(synth.corpus, catalog);

        std::array<std::uint64_t, kCategoryCount> truth{};
        for (const auto& [id, cat] : synth.ground_truth) {
            if (cat) truth[static_cast<int>(*cat)] += 1;
        }
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            if (table.count(cfg.llm_type_label, static_cast<Category>(c)) != truth[c]) {
                return fail("draw " + std::to_string(draw) + ": scan count for " +
                            category_name(static_cast<Category>(c)) +
                            " diverges from ground truth");
            }
        }
        for (const Record& rec : synth.corpus.records) {
            auto fast = classify(rec, catalog);
            auto brute = testsupport::brute_classify(rec, catalog);
            bool same = fast.has_value() == brute.has_value() &&
                        (!fast || (fast->category == brute->category &&
                                   fast->pattern_id == brute->pattern_id &&
                                   fast->span == brute->span));
            if (!same) return fail("draw " + std::to_string(draw) +
                                   ": classify disagrees with brute force on " + rec.id);
            ++records_checked;
        }
    }
    return pass("50 draws, " + std::to_string(records_checked) + " records");
}

Outcome criterion_cleanse_soundness() {
    std::mt19937_64 rng(7001);  // same draws as the scan criterion
    auto catalog = PatternCatalog::builtin();
    for (int draw = 0; draw < 50; ++draw) {
        auto cfg = random_synth_config(rng);
        auto synth = generate(cfg);
        auto once = cleanse_corpus(synth.corpus, catalog, DomainPolicy::automatic);

        for (const Record& rec : once.corpus.records) {
            for (const auto& f : all_findings(rec, catalog)) {
                if (f.category == Category::beginning || f.category == Category::prompt ||
                    f.category == Category::assistant) {
                    return fail("draw " + std::to_string(draw) + ": residual " +
                                std::string(category_name(f.category)) + " finding in " +
                                rec.id);
                }
            }
        }

        auto twice = cleanse_corpus(once.corpus, catalog, DomainPolicy::automatic);
        for (std::size_t i = 0; i < once.corpus.size(); ++i) {
            if (once.corpus.records[i].llm_text != twice.corpus.records[i].llm_text) {
                return fail("draw " + std::to_string(draw) + ": cleanse not idempotent on " +
                            once.corpus.records[i].id);
            }
            const auto& orig = synth.corpus.records[i].llm_text;
            const auto& cleaned = once.corpus.records[i].llm_text;
            if (orig && cleaned &&
                !testsupport::is_subsequence(testsupport::squash(*cleaned),
                                             testsupport::squash(*orig))) {
                return fail("draw " + std::to_string(draw) +
                            ": cleaned text is not a subsequence of the original for " +
                            once.corpus.records[i].id);
            }
        }
    }
    return pass("50 draws: zero residuals, idempotent, subsequence-sound");
}

Outcome criterion_spoof_divergence(const PairedExperimentResult& result) {
    std::ostringstream detail;
    detail.precision(4);
    detail << std::fixed << "raw attacked " << result.attacked_raw.accuracy_on_attacked
           << ", cleaned attacked " << result.attacked_cleaned.accuracy_on_attacked
           << ", unattacked " << result.unattacked_raw.accuracy << "/"
           << result.unattacked_cleaned.accuracy;
    if (result.attacked_raw.n_evaluated != 200) {
        return fail("expected 200 attacked texts, got " +
                    std::to_string(result.attacked_raw.n_evaluated));
    }
    if (!(result.attacked_raw.accuracy_on_attacked < 0.5)) {
        return fail("raw-model attacked accuracy not < 0.5: " + detail.str());
    }
    if (!(result.attacked_cleaned.accuracy_on_attacked > 0.9)) {
        return fail("cleaned-model attacked accuracy not > 0.9: " + detail.str());
    }
    if (!(result.unattacked_raw.accuracy >= 0.9) ||
        !(result.unattacked_cleaned.accuracy >= 0.9)) {
        return fail("unattacked accuracy below 0.9: " + detail.str());
    }
    return pass(detail.str());
}

Outcome criterion_attribution_concentration(const SynthResult& synth,
                                            const PairedExperimentResult& result) {
    // a contaminated text from the shared test split
    std::set<std::string> test_ids(result.test_ids.begin(), result.test_ids.end());
    const Record* contaminated = nullptr;
    for (const Record& rec : synth.corpus.records) {
        if (test_ids.count(rec.id) &&
            synth.ground_truth.at(rec.id) == Category::beginning) {
            contaminated = &rec;
            break;
        }
    }
    if (!contaminated) return fail("no contaminated record in the test split");
    const std::string& text = *contaminated->llm_text;
    std::size_t colon = text.find(':');
    auto phrase_list = tokenize(text.substr(0, colon + 1));
    std::set<std::string> phrase_tokens(phrase_list.begin(), phrase_list.end());

    auto count_hits = [&](const DetectorModel& model) {
        auto top = top_tokens(attribute(model, text), 10);
        int hits = 0;
        for (const auto& t : top) {
            if (t.contribution > 0.0 && phrase_tokens.count(t.token)) ++hits;
        }
        return hits;
    };
    int raw_hits = count_hits(result.model_raw);
    int cleaned_hits = count_hits(result.model_cleaned);
    std::string detail = "raw model: " + std::to_string(raw_hits) +
                         "/10 phrase tokens, cleaned model: " +
                         std::to_string(cleaned_hits) + "/10";
    if (raw_hits < 3) return fail(detail + " (need >= 3 for raw)");
    if (cleaned_hits != 0) return fail(detail + " (need 0 for cleaned)");
    return pass(detail);
}

Outcome criterion_metric_oracles() {
    std::mt19937_64 rng(9001);
    auto random_scores = [&rng](std::size_t n, bool quantized) {
        std::vector<ScoredLabel> out;
        for (std::size_t i = 0; i < n; ++i) {
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            ScoredLabel s;
            s.score = quantized ? std::round(u * 8.0) / 8.0 : u;
            s.is_llm = rng() % 2 == 0;
            out.push_back(s);
        }
        out.push_back({0.5, true});
        out.push_back({0.5, false});  // both classes guaranteed
        return out;
    };
    auto brute_auc = [](const std::vector<ScoredLabel>& scores) {
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
    };

    for (int round = 0; round < 100; ++round) {
        auto scores = random_scores(rng() % 198, round % 2 == 0);
        double fast = roc_auc(scores);
        double brute = brute_auc(scores);
        if (std::abs(fast - brute) > 1e-12) {
            return fail("roc_auc deviates from pair counting at round " +
                        std::to_string(round));
        }
        for (double target : {0.0, 0.01, 0.1, 0.3, 1.0}) {
            auto fast_t = tpr_at_fpr(scores, target);
            // exhaustive sweep oracle
            std::size_t n_pos = 0, n_neg = 0;
            for (const auto& s : scores) (s.is_llm ? n_pos : n_neg) += 1;
            double best = -1.0;
            std::vector<double> cands;
            for (const auto& s : scores) cands.push_back(s.score);
            cands.push_back(std::numeric_limits<double>::infinity());
            for (double t : cands) {
                std::size_t tp = 0, fp = 0;
                for (const auto& s : scores) {
                    if (s.score >= t) (s.is_llm ? tp : fp) += 1;
                }
                if (double(fp) / double(n_neg) <= target) {
                    best = std::max(best, double(tp) / double(n_pos));
                }
            }
            if (best < 0.0) best = 0.0;
            if (std::abs(fast_t.tpr - best) > 1e-12) {
                return fail("tpr_at_fpr deviates from the sweep at round " +
                            std::to_string(round));
            }
        }
    }

    // fixed 8-point confusion-matrix example: F1 = 2/3, accuracy = 0.75
    std::vector<ScoredLabel> fixed{{0.9, true},  {0.8, true},  {0.7, false},
                                   {0.2, true},  {0.1, false}, {0.2, false},
                                   {0.3, false}, {0.4, false}};
    auto fa = f1_accuracy(fixed, 0.5);
    if (std::abs(fa.f1 - 2.0 / 3.0) > 1e-12 || std::abs(fa.accuracy - 0.75) > 1e-12) {
        return fail("fixed example gave f1 " + std::to_string(fa.f1) + ", accuracy " +
                    std::to_string(fa.accuracy));
    }
    return pass("100 auc sets, 500 tpr sweeps, fixed confusion example");
}

Outcome criterion_detector_numerics() {
    // gradient vs central differences
    std::mt19937_64 rng(1101);
    for (int round = 0; round < 20; ++round) {
        const std::size_t dim = 10;
        std::vector<FeatureVector> features;
        std::vector<int> labels;
        for (int i = 0; i < 5; ++i) {
            FeatureVector fv;
            std::vector<double> raw(dim);
            double norm_sq = 0.0;
            for (auto& v : raw) {
                v = static_cast<double>(rng() % 5);
                norm_sq += v * v;
            }
            if (norm_sq == 0.0) { raw[0] = 1.0; norm_sq = 1.0; }
            fv.norm = std::sqrt(norm_sq);
            for (std::size_t j = 0; j < dim; ++j) {
                if (raw[j] != 0.0) {
                    fv.indices.push_back(static_cast<std::uint32_t>(j));
                    fv.values.push_back(raw[j] / fv.norm);
                }
            }
            features.push_back(std::move(fv));
            labels.push_back(static_cast<int>(rng() % 2));
        }
        labels[0] = 1;
        labels[1] = 0;

        std::vector<double> w(dim);
        for (auto& x : w) x = (static_cast<double>(rng() % 2000) - 1000.0) / 941.0;
        double b = (static_cast<double>(rng() % 2000) - 1000.0) / 941.0;
        std::vector<double> grad(dim);
        double grad_b = 0.0;
        logistic_loss_and_grad(features, labels, w, b, 0.01, &grad, &grad_b);
        const double h = 1e-6;
        for (std::size_t j = 0; j <= dim; ++j) {
            double fp, fm, analytic;
            if (j < dim) {
                auto wp = w; wp[j] += h;
                auto wm = w; wm[j] -= h;
                fp = logistic_loss_and_grad(features, labels, wp, b, 0.01, nullptr, nullptr);
                fm = logistic_loss_and_grad(features, labels, wm, b, 0.01, nullptr, nullptr);
                analytic = grad[j];
            } else {
                fp = logistic_loss_and_grad(features, labels, w, b + h, 0.01, nullptr, nullptr);
                fm = logistic_loss_and_grad(features, labels, w, b - h, 0.01, nullptr, nullptr);
                analytic = grad_b;
            }
            double fd = (fp - fm) / (2.0 * h);
            double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
            if (std::abs(fd - analytic) / denom > 1e-4) {
                return fail("gradient check failed at round " + std::to_string(round) +
                            " coordinate " + std::to_string(j));
            }
        }
    }

    // attribution additivity on 1,000 random texts
    std::vector<TrainExample> examples;
    std::mt19937_64 trng(1102);
    auto rand_text = [&trng]() {
        static const char* words[] = {"kavo", "lemi", "dotu", "rupa", "sige", "nuvo",
                                      "tefa", "bilo", ".",    "!",    "?",    ","};
        std::string s;
        std::size_t n = trng() % 60;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) s.push_back(' ');
            s += words[trng() % 12];
        }
        return s;
    };
    for (int i = 0; i < 30; ++i) {
        examples.push_back({rand_text(), i % 2 ? Label::llm : Label::human});
    }
    TrainConfig tc;
    tc.epochs = 60;
    auto model = train(examples, tc);
    for (int i = 0; i < 1000; ++i) {
        std::string text = rand_text();
        auto attr = attribute(model, text);
        double sum = attr.bias_term;
        for (const auto& t : attr.tokens) sum += t.contribution;
        double z = logit(model, text);
        double denom = std::max(std::abs(z), 1e-9);
        if (std::abs(sum - z) / denom > 1e-9) {
            return fail("additivity identity violated on text " + std::to_string(i));
        }
    }
    return pass("20 gradient rounds, 1000 additivity texts");
}

Outcome criterion_upstream_corpus(const std::string& path) {
    if (path.empty()) {
        return skip("supply --detectrl <corpus.jsonl> to check the upstream counts");
    }
    auto loaded = load_corpus(path);
    if (loaded.corpus.size() == 0) return fail("corpus at " + path + " loaded empty");
    auto table = scan(loaded.corpus, PatternCatalog::builtin(), 2);

    struct Expected {
        const char* llm;
        Category category;
        std::uint64_t count;
        bool exact;
    };
    const Expected expected[] = {
        {"Claude-instant", Category::beginning, 13261, true},
        {"Google-PaLM", Category::beginning, 1585, true},
        {"Llama-2-70b", Category::beginning, 1352, true},
        {"Claude-instant", Category::rejection, 448, false},
        {"Google-PaLM", Category::rejection, 1703, false},
        {"Llama-2-70b", Category::prompt, 520, false},
    };
    std::ostringstream detail;
    bool ok = true;
    for (const Expected& e : expected) {
        std::uint64_t got = table.count(e.llm, e.category);
        if (got != e.count) {
            detail << e.llm << "/" << category_name(e.category) << " got " << got
                   << " want " << e.count << (e.exact ? " [exact]" : " [approx]") << "; ";
            if (e.exact) ok = false;
        }
    }
    detail << "records " << loaded.corpus.size() << " (reference: 56,000), total "
           << table.total << " (reference: 20,325; the incomplete rejection/prompt "
           << "families stay approximate)";
    if (!ok) return fail(detail.str());
    return pass(detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    std::string detectrl_path;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--detectrl" && i + 1 < argc) {
            detectrl_path = argv[++i];
        } else {
            std::fprintf(stderr, "usage: %s [--detectrl corpus.jsonl]\n", argv[0]);
            return 2;
        }
    }

    // shared corpus and experiment for criteria 5 and 6
    auto synth = generate(experiment_synth_config());
    PairedExperimentResult experiment;
    std::string experiment_error;
    double experiment_seconds = 0.0;
    {
        auto t0 = std::chrono::steady_clock::now();
        try {
            experiment = run_experiment(synth);
        } catch (const std::exception& e) {
            experiment_error = e.what();
        }
        experiment_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;
        std::function<Outcome()> body;
        double extra_seconds = 0.0;  // work done up front, counted against the budget
    };
    const std::vector<Criterion> criteria = {
        {1, "pattern fidelity on embedded known-artifact fixtures", 1.0,
         criterion_pattern_fidelity},
        {2, "per-generator contamination-rate arithmetic", 1.0,
         criterion_claude_arithmetic},
        {3, "scan equals ground truth and brute force on 50 random corpora", 30.0,
         criterion_scan_oracle},
        {4, "cleanse soundness and idempotence on the same corpora", 30.0,
         criterion_cleanse_soundness},
        {5, "spoofing divergence between raw- and cleaned-trained models", 120.0,
         [&] {
             if (!experiment_error.empty()) return fail("experiment: " + experiment_error);
             return criterion_spoof_divergence(experiment);
         },
         experiment_seconds},
        {6, "attribution concentration on the injected phrase", 10.0,
         [&] {
             if (!experiment_error.empty()) return fail("experiment: " + experiment_error);
             return criterion_attribution_concentration(synth, experiment);
         }},
        {7, "metric oracles: pair counting, threshold sweep, confusion example", 10.0,
         criterion_metric_oracles},
        {8, "detector numerics: gradient check and attribution additivity", 30.0,
         criterion_detector_numerics},
        {9, "upstream corpus reproduction (conditional)", 600.0,
         [&] { return criterion_upstream_corpus(detectrl_path); }},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.body();
        } catch (const std::exception& e) {
            outcome = fail(std::string("exception: ") + e.what());
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() +
            c.extra_seconds;
        if (outcome.status == Outcome::Status::pass && seconds > c.budget_seconds) {
            outcome = fail("runtime " + std::to_string(seconds) + "s exceeds " +
                           std::to_string(c.budget_seconds) + "s budget");
        }
        const char* tag = outcome.status == Outcome::Status::pass   ? "PASS"
                          : outcome.status == Outcome::Status::fail ? "FAIL"
                                                                    : "SKIP";
        if (outcome.status == Outcome::Status::fail) ++failures;
        std::printf("[%s] criterion %d: %s (%.2fs/%.0fs)%s%s\n", tag, c.id, c.name,
                    seconds, c.budget_seconds, outcome.detail.empty() ? "" : " - ",
                    outcome.detail.c_str());
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    return 0;
}
