#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace decon {

// A scored example: score in [0,1] with 1 = LLM-like, label true = LLM.
struct ScoredLabel {
    double score = 0.0;
    bool is_llm = false;
};

// Mann-Whitney statistic: P(score_llm > score_human) + 0.5 * P(equal),
// computed with average ranks so ties are exact. Throws std::invalid_argument
// unless both classes are present.
double roc_auc(const std::vector<ScoredLabel>& scores);

struct TprAtFprResult {
    double tpr = 0.0;
    double threshold = 0.0;     // predict LLM when score >= threshold
    bool small_sample = false;  // fewer negatives than 1/fpr_target
};

// TPR at the smallest threshold whose empirical FPR does not exceed
// fpr_target. Ties at the threshold are resolved conservatively: tied
// negatives count as false positives, so the chosen threshold sits strictly
// above them.
TprAtFprResult tpr_at_fpr(const std::vector<ScoredLabel>& scores, double fpr_target);

struct F1Accuracy {
    double f1 = 0.0;
    double accuracy = 0.0;
    bool no_predicted_positives = false;  // F1 defined as 0 in that case
};

// Confusion-matrix metrics with LLM as the positive class; a score counts as
// a positive prediction when it exceeds the threshold.
F1Accuracy f1_accuracy(const std::vector<ScoredLabel>& scores, double threshold = 0.5);

// The standard evaluation row: ROC-AUC, F1, accuracy, TPR at a fixed FPR.
struct EvalResult {
    double roc_auc = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double tpr_at_fpr = 0.0;
    double fpr_target = 0.0001;
    std::size_t n = 0;
    bool tpr_small_sample = false;
};

EvalResult evaluate_scores(const std::vector<ScoredLabel>& scores,
                           double threshold = 0.5, double fpr_target = 0.0001);

}  // namespace decon
