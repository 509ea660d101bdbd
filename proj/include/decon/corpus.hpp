#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace decon {

// Byte range [start, end) into a text.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const Span&) const = default;
    std::size_t length() const { return end - start; }
    bool empty() const { return end <= start; }
};

enum class Domain { arxiv, xsum, yelp, writing, other };

enum class LlmType { chatgpt, claude_instant, google_palm, llama2_70b, other };

Domain domain_from_string(const std::string& s);
LlmType llm_type_from_string(const std::string& s);

// One benchmark row: a paired human/LLM sample plus its provenance metadata.
// `domain_raw` / `llm_type_raw` keep the verbatim input string so that values
// outside the known vocabulary survive a load/save round trip.
struct Record {
    std::string id;
    Domain domain = Domain::other;
    std::string domain_raw;
    LlmType llm_type = LlmType::other;
    std::string llm_type_raw;
    std::string task_variant;
    std::optional<std::string> human_text;
    std::optional<std::string> llm_text;  // absent == nulled by cleansing

    bool operator==(const Record&) const = default;
};

struct Corpus {
    std::vector<Record> records;  // iteration order equals file order
    std::string source_path;

    std::size_t size() const { return records.size(); }
};

// Maps the canonical field names onto the names used in a particular JSONL
// release, so upstream exports can be ingested unchanged.
struct SchemaMap {
    std::string id = "id";
    std::string domain = "domain";
    std::string llm_type = "llm_type";
    std::string task_variant = "task_variant";
    std::string human_text = "human_text";
    std::string llm_text = "llm_text";
};

struct Diagnostic {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct LoadResult {
    Corpus corpus;
    std::vector<Diagnostic> diagnostics;  // one per skipped line
    std::size_t skipped = 0;
};

// Streaming JSONL ingestion: one JSON object per line. Malformed lines are
// skipped with a diagnostic; whitespace-only lines are ignored. Throws
// std::runtime_error if the file cannot be opened.
LoadResult load_corpus(const std::string& path, const SchemaMap& schema = {});

// One JSON object per line, fixed field order; a nulled llm_text is written
// as an explicit JSON null. Throws std::runtime_error on I/O failure (the
// destination may then hold a partial file).
void save_corpus(const Corpus& corpus, const std::string& path,
                 const SchemaMap& schema = {});

std::string record_to_json_line(const Record& record, const SchemaMap& schema = {});
std::optional<Record> record_from_json_line(const std::string& line,
                                            const SchemaMap& schema,
                                            std::string& error);

// Whitespace-and-punctuation segmentation. A token is either a maximal run
// of word characters (alphanumeric or byte >= 0x80) or a single punctuation
// character. Total and deterministic; this is the one tokenizer shared by
// the QC counts and the detector featurizer.
std::vector<std::string> tokenize(const std::string& text);
std::size_t token_count(const std::string& text);

// Sentence spans with terminator set {?, !, ., :}. Spans are sorted,
// disjoint, start and end on non-whitespace, and include their terminator;
// trailing text without a terminator forms a final span.
std::vector<Span> split_sentences(const std::string& text);

// Same segmentation with a caller-chosen terminator set. The QC sentence
// counter uses {?, !, .} so headers ending in a colon do not count.
std::vector<Span> split_spans(const std::string& text, const std::string& terminators);
std::size_t sentence_count_qc(const std::string& text);

}  // namespace decon
