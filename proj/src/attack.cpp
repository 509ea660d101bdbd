#include "decon/attack.hpp"

#include <random>
#include <stdexcept>

namespace decon {

namespace {

// Stdlib-independent Fisher-Yates so a split seed means the same split
// everywhere.
void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = indices.size(); i > 1; --i) {
        std::size_t j = rng() % i;
        std::swap(indices[i - 1], indices[j]);
    }
}

std::vector<TrainExample> examples_from_records(const Corpus& corpus,
                                                const std::vector<std::size_t>& idx) {
    std::vector<TrainExample> examples;
    examples.reserve(idx.size() * 2);
    for (std::size_t i : idx) {
        const Record& rec = corpus.records[i];
        if (rec.human_text) examples.push_back({*rec.human_text, Label::human});
        if (rec.llm_text) examples.push_back({*rec.llm_text, Label::llm});
    }
    return examples;
}

EvalResult evaluate_model(const DetectorModel& model,
                          const std::vector<TrainExample>& examples,
                          double threshold, double fpr_target) {
    std::vector<ScoredLabel> scores;
    scores.reserve(examples.size());
    for (const TrainExample& ex : examples) {
        scores.push_back({predict(model, ex.text), ex.label == Label::llm});
    }
    return evaluate_scores(scores, threshold, fpr_target);
}

}  // namespace

std::string apply_attack(const std::string& text, const AttackSpec& spec) {
    return spec.phrase + text;
}

AttackReport evaluate_attack(const DetectorModel& model,
                             const std::vector<std::string>& human_texts,
                             const AttackSpec& spec, double threshold) {
    if (human_texts.empty()) {
        throw std::invalid_argument("evaluate_attack: no texts to evaluate");
    }
    AttackReport report;
    report.n_evaluated = human_texts.size();
    report.threshold = threshold;
    report.phrase = spec.phrase;
    for (const std::string& text : human_texts) {
        double score = predict(model, apply_attack(text, spec));
        if (score > threshold) {
            ++report.predicted_llm;
        } else {
            ++report.predicted_human;
        }
    }
    report.accuracy_on_attacked = static_cast<double>(report.predicted_human) /
                                  static_cast<double>(report.n_evaluated);
    return report;
}

PairedExperimentResult paired_experiment(const Corpus& corpus,
                                         const PatternCatalog& catalog,
                                         const AttackSpec& attack_spec,
                                         std::uint64_t split_seed,
                                         const ExperimentConfig& config) {
    const std::size_t n = corpus.records.size();
    if (n < 4) throw std::invalid_argument("paired_experiment: corpus too small");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_indices(order, split_seed);

    std::size_t n_test = static_cast<std::size_t>(config.test_fraction *
                                                  static_cast<double>(n) + 0.5);
    if (n_test == 0) n_test = 1;
    if (n_test >= n) n_test = n - 1;
    std::vector<std::size_t> test_idx(order.begin(), order.begin() + n_test);
    std::vector<std::size_t> train_idx(order.begin() + n_test, order.end());

    CleanseResult cleansed =
        cleanse_corpus(corpus, catalog, config.domain_policy, config.jobs);

    auto raw_train = examples_from_records(corpus, train_idx);
    auto raw_test = examples_from_records(corpus, test_idx);
    auto clean_train = examples_from_records(cleansed.corpus, train_idx);
    auto clean_test = examples_from_records(cleansed.corpus, test_idx);

    PairedExperimentResult result;
    result.model_raw = train(raw_train, config.train);
    result.model_cleaned = train(clean_train, config.train);
    result.n_train_records = train_idx.size();
    result.n_test_records = test_idx.size();
    result.cleanse_summary = cleansed.summary;
    for (std::size_t i : test_idx) result.test_ids.push_back(corpus.records[i].id);
    result.unattacked_raw =
        evaluate_model(result.model_raw, raw_test, config.threshold, config.fpr_target);
    result.unattacked_cleaned = evaluate_model(result.model_cleaned, clean_test,
                                               config.threshold, config.fpr_target);

    std::vector<std::string> attack_texts;
    for (std::size_t i : test_idx) {
        if (attack_texts.size() >= config.attack_eval_count) break;
        const Record& rec = corpus.records[i];
        if (rec.human_text) attack_texts.push_back(*rec.human_text);
    }
    result.attacked_raw =
        evaluate_attack(result.model_raw, attack_texts, attack_spec, config.threshold);
    result.attacked_cleaned = evaluate_attack(result.model_cleaned, attack_texts,
                                              attack_spec, config.threshold);
    return result;
}

}  // namespace decon
