#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decon/corpus.hpp"

namespace decon {

enum class QcReason {
    under_removal_suspected,
    too_few_tokens,
    length_mismatch,
    empty_after_clean,
};

const char* qc_reason_name(QcReason r);

struct QcFlag {
    std::string record_id;
    QcReason reason = QcReason::too_few_tokens;
    std::map<std::string, double> evidence;  // every metric that was checked
};

struct QcConfig {
    std::size_t min_tokens = 20;
    double max_token_ratio_dev = 0.5;
    double max_sentence_ratio_dev = 0.5;
    double detector_score_quantile = 0.95;
};

// Over-removal heuristics on one cleaned record: too few tokens absolutely,
// or token/sentence counts diverging from the paired human text by more than
// the configured relative deviation. Without human_text only the absolute
// check applies. Sentence counts use the {?, !, .} terminator set.
std::optional<QcFlag> flag_over_removal(const Record& cleaned, const QcConfig& config);

// Batch under-removal detection: records scoring at or above the configured
// empirical quantile of the batch are suspect. Returned flags are ordered by
// score (descending), ties by record id.
struct ScoredRecordRef {
    const Record* record = nullptr;
    double score = 0.0;
};

std::vector<QcFlag> flag_under_removal(const std::vector<ScoredRecordRef>& scored,
                                       const QcConfig& config);

// File exchange with an external re-cleaner. Export writes one JSONL line
// per flagged record: {v, id, llm_text, human_text, instruction_template}.
void export_for_recleaning(const std::vector<QcFlag>& flags, const Corpus& corpus,
                           const std::string& path,
                           const std::string& instruction_template = {});

extern const char* const kDefaultRecleanInstruction;

// Import validates each returned text before substituting it: the id must
// have been exported, the text's tokens must be a >= 90% in-order subsequence
// of the original's, and the token count must not grow. Violations reject
// the line with a diagnostic carrying both texts.
struct RecleanImportResult {
    Corpus corpus;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<Diagnostic> diagnostics;
};

RecleanImportResult import_recleaned(const std::string& path, const Corpus& corpus,
                                     const std::vector<std::string>& exported_ids);

// Fraction of `candidate` tokens matchable, in order, against `original`
// tokens (greedy two-pointer). Empty candidate scores 1.
double token_containment(const std::string& original, const std::string& candidate);

}  // namespace decon
