#include "decon/patterns.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <stdexcept>

#include <json.hpp>

namespace decon {

namespace {

using ordered_json = nlohmann::ordered_json;

std::shared_ptr<const std::regex> compile(const std::string& source,
                                          bool case_insensitive,
                                          const std::string& id) {
    auto flags = std::regex::ECMAScript | std::regex::optimize;
    if (case_insensitive) flags |= std::regex::icase;
    try {
        return std::make_shared<const std::regex>(source, flags);
    } catch (const std::regex_error& e) {
        throw std::runtime_error("pattern '" + id + "' does not compile: " + e.what());
    }
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

bool prefilter_hit(const PatternEntry& entry, const std::string& text,
                   bool case_insensitive) {
    if (entry.prefilter.empty()) return true;
    for (const std::string& lit : entry.prefilter) {
        if (case_insensitive ? contains_ci(text, lit)
                             : text.find(lit) != std::string::npos) {
            return true;
        }
    }
    return false;
}

const char* domain_label(Domain d) {
    switch (d) {
        case Domain::arxiv: return "arxiv";
        case Domain::xsum: return "xsum";
        case Domain::yelp: return "yelp";
        case Domain::writing: return "writing";
        case Domain::other: return "other";
    }
    return "other";
}

}  // namespace

const char* category_name(Category c) {
    switch (c) {
        case Category::rejection: return "rejection";
        case Category::prompt: return "prompt";
        case Category::beginning: return "beginning";
        case Category::domain: return "domain";
        case Category::assistant: return "assistant";
    }
    return "?";
}

std::optional<Category> category_from_string(const std::string& s) {
    if (s == "rejection") return Category::rejection;
    if (s == "prompt") return Category::prompt;
    if (s == "beginning") return Category::beginning;
    if (s == "domain") return Category::domain;
    if (s == "assistant") return Category::assistant;
    return std::nullopt;
}

bool PatternEntry::applies_to(const Record& rec) const {
    if (applies_domain && rec.domain != *applies_domain) return false;
    if (!applies_task.empty() &&
        rec.task_variant.find(applies_task) == std::string::npos) {
        return false;
    }
    return true;
}

void PatternCatalog::add(Category category, std::string id, std::string source,
                         std::optional<Domain> applies_domain,
                         std::vector<std::string> prefilter,
                         std::string applies_task) {
    PatternEntry entry;
    entry.category = category;
    entry.id = std::move(id);
    entry.source = std::move(source);
    entry.applies_domain = applies_domain;
    entry.applies_task = std::move(applies_task);
    entry.prefilter = std::move(prefilter);
    entry.compiled = compile(entry.source, case_insensitive_, entry.id);
    entries_.push_back(std::move(entry));
}

PatternCatalog PatternCatalog::builtin(bool case_insensitive) {
    PatternCatalog cat;
    cat.case_insensitive_ = case_insensitive;

    cat.add(Category::rejection, "rejection",
            R"((.*I apologize, upon further reflection.*)|(.*((only)|(just)) a language model.*))",
            std::nullopt,
            {"I apologize, upon further reflection", "a language model"});
    cat.add(Category::prompt, "prompt-sico",
            R"((in a human\s?\w{0,20}\s?style))", std::nullopt, {"in a human"});
    cat.add(Category::prompt, "prompt-polishing",
            R"((grammar[\w\s,]{1,40}spelling))", std::nullopt, {"grammar"});
    cat.add(Category::beginning, "beginning",
            R"((Voici un|Here is|Here are|Here's|Sure[,!]?\s?here))", std::nullopt,
            {"Voici un", "Here is", "Here are", "Here's", "Sure"});
    cat.add(Category::domain, "domain-article",
            R"((given article title|provided article title))", Domain::writing,
            {"given article title", "provided article title"});
    cat.add(Category::domain, "domain-yelp",
            R"((review's first sentence|review))", Domain::yelp, {"review"});
    cat.add(Category::domain, "domain-arxiv",
            R"((abstract|academic article))", Domain::arxiv,
            {"abstract", "academic article"});
    cat.add(Category::domain, "domain-xsum",
            R"((article))", Domain::xsum, {"article"});
    cat.add(Category::assistant, "assistant",
            R"((?:.*)(((\[system\])|(\[user\])|(\[assistant\]))\s*\w{0,20}|(\*\*assistant))([:]?[\*]{2}|[:]))",
            std::nullopt, {"[system]", "[user]", "[assistant]", "**assistant"});

    return cat;
}

void PatternCatalog::set_precedence(const std::vector<Category>& order) {
    if (order.size() != kCategoryCount) {
        throw std::invalid_argument("precedence order must list all five categories");
    }
    std::array<bool, kCategoryCount> seen{};
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        int idx = static_cast<int>(order[rank]);
        if (seen[idx]) throw std::invalid_argument("duplicate category in precedence order");
        seen[idx] = true;
        precedence_rank_[idx] = static_cast<int>(rank);
    }
}

std::vector<Category> PatternCatalog::precedence() const {
    std::vector<Category> order(kCategoryCount);
    for (int c = 0; c < static_cast<int>(kCategoryCount); ++c) {
        order[precedence_rank_[c]] = static_cast<Category>(c);
    }
    return order;
}

std::string PatternCatalog::to_json() const {
    ordered_json doc;
    doc["version"] = 1;
    ordered_json entries = ordered_json::array();
    for (const PatternEntry& e : entries_) {
        ordered_json obj;
        obj["category"] = category_name(e.category);
        obj["id"] = e.id;
        obj["pattern"] = e.source;
        if (e.applies_domain) obj["applies_to"] = domain_label(*e.applies_domain);
        if (!e.applies_task.empty()) obj["applies_task"] = e.applies_task;
        if (!e.prefilter.empty()) obj["prefilter"] = e.prefilter;
        entries.push_back(std::move(obj));
    }
    doc["entries"] = std::move(entries);
    return doc.dump(2);
}

void PatternCatalog::to_json_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open catalog file for writing: " + path);
    out << to_json() << '\n';
}

PatternCatalog PatternCatalog::from_json(const std::string& text,
                                         bool case_insensitive) {
    ordered_json doc = ordered_json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("entries") ||
        !doc["entries"].is_array()) {
        throw std::runtime_error("catalog: expected a JSON object with an 'entries' array");
    }
    PatternCatalog cat;
    cat.case_insensitive_ = case_insensitive;
    for (const auto& obj : doc["entries"]) {
        auto category = category_from_string(obj.value("category", std::string()));
        if (!category) {
            throw std::runtime_error("catalog: unknown category in entry '" +
                                     obj.value("id", std::string("?")) + "'");
        }
        std::optional<Domain> applies;
        if (obj.contains("applies_to")) {
            applies = domain_from_string(obj["applies_to"].get<std::string>());
        }
        std::vector<std::string> prefilter;
        if (obj.contains("prefilter")) {
            prefilter = obj["prefilter"].get<std::vector<std::string>>();
        }
        cat.add(*category, obj.value("id", std::string()),
                obj.value("pattern", std::string()), applies, std::move(prefilter),
                obj.value("applies_task", std::string()));
    }
    return cat;
}

PatternCatalog PatternCatalog::from_json_file(const std::string& path,
                                              bool case_insensitive) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open catalog file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json(text, case_insensitive);
}

std::uint64_t ContaminationTable::count(const std::string& llm, Category c) const {
    auto it = counts.find(llm);
    if (it == counts.end()) return 0;
    return it->second[static_cast<int>(c)];
}

void ContaminationTable::add_count(const std::string& llm, Category c, std::uint64_t n) {
    counts[llm][static_cast<int>(c)] += n;
    total += n;
}

std::uint64_t ContaminationTable::llm_total(const std::string& llm) const {
    auto it = counts.find(llm);
    if (it == counts.end()) return 0;
    std::uint64_t sum = 0;
    for (std::uint64_t v : it->second) sum += v;
    return sum;
}

std::optional<ContaminationFinding> classify(const Record& record,
                                             const PatternCatalog& catalog) {
    if (!record.llm_text) return std::nullopt;
    const std::string& text = *record.llm_text;

    const auto& entries = catalog.entries();
    int best_rank = -1;
    const PatternEntry* best_entry = nullptr;
    Span best_span{};

    for (const PatternEntry& entry : entries) {
        int rank = catalog.rank(entry.category);
        if (best_entry && rank >= best_rank) continue;  // catalog order breaks ties
        if (!entry.applies_to(record)) continue;
        if (!prefilter_hit(entry, text, catalog.case_insensitive())) continue;
        std::smatch m;
        if (!std::regex_search(text, m, *entry.compiled)) continue;
        best_rank = rank;
        best_entry = &entry;
        best_span = {static_cast<std::size_t>(m.position(0)),
                     static_cast<std::size_t>(m.position(0) + m.length(0))};
    }

    if (!best_entry) return std::nullopt;
    ContaminationFinding finding;
    finding.record_id = record.id;
    finding.category = best_entry->category;
    finding.pattern_id = best_entry->id;
    if (best_entry->category == Category::rejection) {
        finding.span = {0, text.size()};  // whole-text category
    } else {
        finding.span = best_span;
    }
    return finding;
}

std::vector<ContaminationFinding> all_findings(const Record& record,
                                               const PatternCatalog& catalog) {
    std::vector<ContaminationFinding> findings;
    if (!record.llm_text) return findings;
    const std::string& text = *record.llm_text;

    const auto& entries = catalog.entries();
    std::vector<std::size_t> entry_index;  // parallel to findings, for tie order
    for (std::size_t ei = 0; ei < entries.size(); ++ei) {
        const PatternEntry& entry = entries[ei];
        if (!entry.applies_to(record)) continue;
        if (!prefilter_hit(entry, text, catalog.case_insensitive())) continue;
        if (entry.category == Category::rejection) {
            std::smatch m;
            if (std::regex_search(text, m, *entry.compiled)) {
                findings.push_back({record.id, entry.category, entry.id, {0, text.size()}});
                entry_index.push_back(ei);
            }
            continue;
        }
        auto begin = std::sregex_iterator(text.begin(), text.end(), *entry.compiled);
        auto end = std::sregex_iterator();
        for (auto it = begin; it != end; ++it) {
            Span span{static_cast<std::size_t>(it->position(0)),
                      static_cast<std::size_t>(it->position(0) + it->length(0))};
            findings.push_back({record.id, entry.category, entry.id, span});
            entry_index.push_back(ei);
        }
    }

    std::vector<std::size_t> order(findings.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (findings[a].span.start != findings[b].span.start)
            return findings[a].span.start < findings[b].span.start;
        int ra = catalog.rank(findings[a].category);
        int rb = catalog.rank(findings[b].category);
        if (ra != rb) return ra < rb;
        return entry_index[a] < entry_index[b];
    });
    std::vector<ContaminationFinding> sorted;
    sorted.reserve(findings.size());
    for (std::size_t i : order) sorted.push_back(std::move(findings[i]));
    return sorted;
}

ContaminationTable scan(const Corpus& corpus, const PatternCatalog& catalog,
                        int jobs) {
    ContaminationTable table;
    table.corpus_size = corpus.records.size();

    const std::size_t n = corpus.records.size();
    std::vector<std::optional<ContaminationFinding>> findings(n);

    if (jobs > 1 && n > 1) {
        const std::size_t workers = std::min<std::size_t>(jobs, n);
        std::vector<std::future<void>> futures;
        futures.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < n; i += workers) {
                    findings[i] = classify(corpus.records[i], catalog);
                }
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            findings[i] = classify(corpus.records[i], catalog);
        }
    }

    // Aggregation in corpus order keeps the table identical for any jobs value.
    for (std::size_t i = 0; i < n; ++i) {
        const Record& rec = corpus.records[i];
        table.records_per_llm[rec.llm_type_raw] += 1;
        if (findings[i]) {
            table.add_count(rec.llm_type_raw, findings[i]->category);
        } else if (!table.counts.count(rec.llm_type_raw)) {
            table.counts[rec.llm_type_raw] = {};  // keep all-zero rows visible
        }
    }
    return table;
}

double contamination_rate(const ContaminationTable& table, const std::string& llm) {
    auto it = table.records_per_llm.find(llm);
    if (it == table.records_per_llm.end() || it->second == 0) {
        throw std::invalid_argument("contamination_rate: no records for llm_type '" +
                                    llm + "'");
    }
    return static_cast<double>(table.llm_total(llm)) / static_cast<double>(it->second);
}

double category_rate(const ContaminationTable& table, const std::string& llm,
                     Category category) {
    auto it = table.records_per_llm.find(llm);
    if (it == table.records_per_llm.end() || it->second == 0) {
        throw std::invalid_argument("category_rate: no records for llm_type '" + llm +
                                    "'");
    }
    return static_cast<double>(table.count(llm, category)) /
           static_cast<double>(it->second);
}

std::vector<std::string> table_llm_order(const ContaminationTable& table) {
    static const char* known[] = {"ChatGPT", "Claude-instant", "Google-PaLM",
                                  "Llama-2-70b"};
    std::vector<std::string> order;
    for (const char* k : known) {
        if (table.counts.count(k) || table.records_per_llm.count(k)) order.push_back(k);
    }
    for (const auto& [llm, _] : table.records_per_llm) {
        if (std::find(order.begin(), order.end(), llm) == order.end()) {
            order.push_back(llm);
        }
    }
    for (const auto& [llm, _] : table.counts) {
        if (std::find(order.begin(), order.end(), llm) == order.end()) {
            order.push_back(llm);
        }
    }
    return order;
}

}  // namespace decon
