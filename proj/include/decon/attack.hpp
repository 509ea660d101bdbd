#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decon/cleanse.hpp"
#include "decon/corpus.hpp"
#include "decon/detector.hpp"
#include "decon/metrics.hpp"
#include "decon/patterns.hpp"

namespace decon {

// Spoofing attack: a contamination-style phrase prefixed to human-written
// evaluation texts.
struct AttackSpec {
    std::string phrase =
        "Here is a 7 sentence abstract for the provided article title: ";
};

std::string apply_attack(const std::string& text, const AttackSpec& spec);

struct AttackReport {
    std::size_t n_evaluated = 0;
    std::size_t predicted_human = 0;
    std::size_t predicted_llm = 0;
    double accuracy_on_attacked = 0.0;
    double threshold = 0.5;
    std::string phrase;
};

// Scores every attacked human text; a score above the threshold counts as a
// (wrong) LLM prediction. Throws std::invalid_argument on empty input.
AttackReport evaluate_attack(const DetectorModel& model,
                             const std::vector<std::string>& human_texts,
                             const AttackSpec& spec, double threshold = 0.5);

struct ExperimentConfig {
    double test_fraction = 0.2;
    double threshold = 0.5;
    double fpr_target = 0.0001;
    std::size_t attack_eval_count = 200;
    TrainConfig train;
    DomainPolicy domain_policy = DomainPolicy::automatic;
    int jobs = 1;
};

struct PairedExperimentResult {
    AttackReport attacked_raw;
    AttackReport attacked_cleaned;
    EvalResult unattacked_raw;      // raw-trained model on its raw test half
    EvalResult unattacked_cleaned;  // cleaned-trained model on the cleaned test half
    std::size_t n_train_records = 0;
    std::size_t n_test_records = 0;
    CleanseSummary cleanse_summary;
    DetectorModel model_raw;
    DetectorModel model_cleaned;
    std::vector<std::string> test_ids;  // record ids of the shared test split
};

// One shared train/test split; two models (trained on the corpus as-is and
// on its cleansed counterpart); both evaluated on the unattacked test set
// and on attacked human test texts. Deterministic for a given split seed.
PairedExperimentResult paired_experiment(const Corpus& corpus,
                                         const PatternCatalog& catalog,
                                         const AttackSpec& attack_spec,
                                         std::uint64_t split_seed,
                                         const ExperimentConfig& config = {});

}  // namespace decon
