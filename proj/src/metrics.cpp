#include "decon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace decon {

namespace {

std::pair<std::size_t, std::size_t> class_counts(const std::vector<ScoredLabel>& scores) {
    std::size_t pos = 0, neg = 0;
    for (const ScoredLabel& s : scores) {
        if (s.is_llm) ++pos; else ++neg;
    }
    return {pos, neg};
}

}  // namespace

double roc_auc(const std::vector<ScoredLabel>& scores) {
    auto [n_pos, n_neg] = class_counts(scores);
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("roc_auc: both classes must be present");
    }

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].score < scores[b].score;
    });

    // Average ranks over tie groups, then the rank-sum formula.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]].score == scores[order[i]].score) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (scores[order[k]].is_llm) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    double np = static_cast<double>(n_pos);
    double nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

TprAtFprResult tpr_at_fpr(const std::vector<ScoredLabel>& scores, double fpr_target) {
    auto [n_pos, n_neg] = class_counts(scores);
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("tpr_at_fpr: both classes must be present");
    }

    TprAtFprResult result;
    result.small_sample =
        fpr_target > 0.0 && static_cast<double>(n_neg) < 1.0 / fpr_target;

    // Candidate thresholds: every observed score, plus one past the maximum
    // (predict nothing positive). Prediction rule: positive when score >= t.
    std::vector<double> candidates;
    candidates.reserve(scores.size() + 1);
    for (const ScoredLabel& s : scores) candidates.push_back(s.score);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    candidates.push_back(std::numeric_limits<double>::infinity());

    for (double t : candidates) {
        std::size_t fp = 0, tp = 0;
        for (const ScoredLabel& s : scores) {
            if (s.score >= t) {
                if (s.is_llm) ++tp; else ++fp;
            }
        }
        double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        if (fpr <= fpr_target) {
            result.threshold = t;
            result.tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
            return result;
        }
    }
    result.threshold = std::numeric_limits<double>::infinity();
    result.tpr = 0.0;
    return result;
}

F1Accuracy f1_accuracy(const std::vector<ScoredLabel>& scores, double threshold) {
    auto [n_pos, n_neg] = class_counts(scores);
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("f1_accuracy: both classes must be present");
    }

    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const ScoredLabel& s : scores) {
        bool predicted_llm = s.score > threshold;
        if (predicted_llm && s.is_llm) ++tp;
        else if (predicted_llm && !s.is_llm) ++fp;
        else if (!predicted_llm && s.is_llm) ++fn;
        else ++tn;
    }

    F1Accuracy out;
    out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
    if (tp + fp == 0) {
        out.no_predicted_positives = true;
        out.f1 = 0.0;
    } else {
        out.f1 = 2.0 * static_cast<double>(tp) /
                 static_cast<double>(2 * tp + fp + fn);
    }
    return out;
}

EvalResult evaluate_scores(const std::vector<ScoredLabel>& scores, double threshold,
                           double fpr_target) {
    EvalResult r;
    r.n = scores.size();
    r.roc_auc = roc_auc(scores);
    auto fa = f1_accuracy(scores, threshold);
    r.f1 = fa.f1;
    r.accuracy = fa.accuracy;
    auto tpr = tpr_at_fpr(scores, fpr_target);
    r.tpr_at_fpr = tpr.tpr;
    r.fpr_target = fpr_target;
    r.tpr_small_sample = tpr.small_sample;
    return r;
}

}  // namespace decon
