#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "decon/corpus.hpp"

namespace decon {

// The five contamination categories. Enum order is the precedence order used
// for without-replacement counting: a record is attributed to the first
// matching category in this order.
enum class Category : int {
    rejection = 0,
    prompt = 1,
    beginning = 2,
    domain = 3,
    assistant = 4,
};

inline constexpr std::size_t kCategoryCount = 5;

const char* category_name(Category c);
std::optional<Category> category_from_string(const std::string& s);

struct PatternEntry {
    Category category = Category::rejection;
    std::string id;
    std::string source;                    // regex source, kept for serialization
    std::optional<Domain> applies_domain;  // domain-bound patterns fire only there
    std::string applies_task;              // optional task_variant substring filter
    // Literal substrings at least one of which any match must contain; lets
    // the scanner skip the regex on the vast majority of clean records.
    // Empty means "always run the regex".
    std::vector<std::string> prefilter;
    std::shared_ptr<const std::regex> compiled;

    bool applies_to(const Record& rec) const;
};

class PatternCatalog {
public:
    // The built-in catalog: one entry per published pattern row. The
    // rejection and polishing bodies are published truncated; extension
    // slots are ordinary extra entries in a user catalog file.
    static PatternCatalog builtin(bool case_insensitive = false);

    static PatternCatalog from_json_file(const std::string& path,
                                         bool case_insensitive = false);
    void to_json_file(const std::string& path) const;
    std::string to_json() const;
    static PatternCatalog from_json(const std::string& text,
                                    bool case_insensitive = false);

    // Throws std::runtime_error if the pattern does not compile.
    void add(Category category, std::string id, std::string source,
             std::optional<Domain> applies_domain = std::nullopt,
             std::vector<std::string> prefilter = {},
             std::string applies_task = {});

    const std::vector<PatternEntry>& entries() const { return entries_; }
    bool case_insensitive() const { return case_insensitive_; }

    // Category precedence, defaulting to enum order. rank(c) is the position
    // of c in the configured order; lower fires first.
    void set_precedence(const std::vector<Category>& order);
    int rank(Category c) const { return precedence_rank_[static_cast<int>(c)]; }
    std::vector<Category> precedence() const;

private:
    std::vector<PatternEntry> entries_;
    std::array<int, kCategoryCount> precedence_rank_{0, 1, 2, 3, 4};
    bool case_insensitive_ = false;
};

// One detected artifact. For the rejection category the span is the whole
// text (the record is about to be nulled); for every other category it is
// the exact regex match.
struct ContaminationFinding {
    std::string record_id;
    Category category = Category::rejection;
    std::string pattern_id;
    Span span;

    bool operator==(const ContaminationFinding&) const = default;
};

// Table of counts grouped (llm_type, category), plus the per-LLM record
// counts needed for contamination rates.
struct ContaminationTable {
    std::map<std::string, std::array<std::uint64_t, kCategoryCount>> counts;
    std::map<std::string, std::uint64_t> records_per_llm;
    std::uint64_t total = 0;
    std::uint64_t corpus_size = 0;

    std::uint64_t count(const std::string& llm, Category c) const;
    void add_count(const std::string& llm, Category c, std::uint64_t n = 1);
    std::uint64_t llm_total(const std::string& llm) const;
};

// Without-replacement classification: the finding of the first category in
// precedence order with a matching applicable pattern, using the first such
// pattern in catalog order and its leftmost match. At most one finding per
// record; absent llm_text yields none.
std::optional<ContaminationFinding> classify(const Record& record,
                                             const PatternCatalog& catalog);

// Diagnostic mode: every match of every applicable pattern, all categories,
// sorted by span start (ties by category precedence, then catalog order).
std::vector<ContaminationFinding> all_findings(const Record& record,
                                               const PatternCatalog& catalog);

// One classify call per record with llm_text; deterministic for any worker
// count because per-record results are aggregated in corpus order.
ContaminationTable scan(const Corpus& corpus, const PatternCatalog& catalog,
                        int jobs = 1);

// Sum of the LLM's category counts divided by its record count.
// Throws std::invalid_argument when the record count is zero or unknown.
double contamination_rate(const ContaminationTable& table, const std::string& llm);
double category_rate(const ContaminationTable& table, const std::string& llm,
                     Category category);

// Fixed llm_type row order for reports: the known generators first, then any
// others alphabetically.
std::vector<std::string> table_llm_order(const ContaminationTable& table);

}  // namespace decon
