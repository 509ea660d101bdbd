#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "decon/corpus.hpp"
#include "decon/patterns.hpp"

namespace decon {

enum class CleanseAction { unchanged, spans_removed, nulled, review };

const char* cleanse_action_name(CleanseAction a);

enum class DomainPolicy { automatic, review };

// Per-record cleansing result. removed_spans index the original llm_text and
// are already excised from cleaned_text; proposed_spans index cleaned_text
// and are pending human adjudication (review action only).
struct CleanseOutcome {
    std::string record_id;
    CleanseAction action = CleanseAction::unchanged;
    std::vector<Span> removed_spans;
    std::optional<std::string> cleaned_text;
    std::vector<ContaminationFinding> proposed;  // spans into cleaned_text

    bool operator==(const CleanseOutcome&) const = default;
};

struct CleanseSummary {
    std::size_t unchanged = 0;
    std::size_t spans_removed = 0;
    std::size_t nulled = 0;
    std::size_t review = 0;
};

// Expands a contaminant match into the removal span: from the match start to
// the next {?, !, ., :} inclusive, or to the end of text when none follows.
Span expand_to_terminator(const std::string& text, std::size_t match_start);

// Excises sorted disjoint spans from text, collapsing each seam to a single
// space (nothing at the text edges).
std::string excise_spans(const std::string& text, const std::vector<Span>& spans);

// Applies the removal rules to one record:
//   rejection match            -> whole text nulled
//   beginning/prompt/assistant -> contaminant-to-terminator spans excised,
//                                 iterated to a fixpoint
//   domain                     -> excised when policy is automatic and the
//                                 match sits in the first sentence, otherwise
//                                 queued for review with proposed spans
// A record whose llm_text is already absent passes through unchanged.
CleanseOutcome cleanse_record(const Record& record, const PatternCatalog& catalog,
                              DomainPolicy policy = DomainPolicy::review);

// Whole-corpus cleansing. The output corpus has the same length and order;
// nulled records keep all metadata. One outcome per record.
struct CleanseResult {
    Corpus corpus;
    std::vector<CleanseOutcome> outcomes;
    CleanseSummary summary;
};

CleanseResult cleanse_corpus(const Corpus& corpus, const PatternCatalog& catalog,
                             DomainPolicy policy = DomainPolicy::review,
                             int jobs = 1);

// Writes every review outcome as JSONL, one line per proposed span, with
// +-200 characters of context and a "decision" field to edit by hand.
void review_queue_export(const std::vector<CleanseOutcome>& outcomes,
                         const std::string& path, std::size_t context_chars = 200);

// Applies an adjudicated review queue: accepted proposals are excised from
// the matching record's llm_text, rejected or pending ones are kept. Lines
// whose id is unknown or whose excerpt no longer matches are rejected with a
// diagnostic.
struct ReviewImportResult {
    Corpus corpus;
    std::size_t accepted = 0;
    std::size_t rejected = 0;  // decisions "reject" honoured
    std::vector<Diagnostic> diagnostics;
};

ReviewImportResult review_queue_import(const std::string& path, const Corpus& corpus);

}  // namespace decon
