#include "decon/corpus.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace decon {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* domain_name(Domain d) {
    switch (d) {
        case Domain::arxiv: return "arxiv";
        case Domain::xsum: return "xsum";
        case Domain::yelp: return "yelp";
        case Domain::writing: return "writing";
        case Domain::other: return "other";
    }
    return "other";
}

const char* llm_type_name(LlmType t) {
    switch (t) {
        case LlmType::chatgpt: return "ChatGPT";
        case LlmType::claude_instant: return "Claude-instant";
        case LlmType::google_palm: return "Google-PaLM";
        case LlmType::llama2_70b: return "Llama-2-70b";
        case LlmType::other: return "other";
    }
    return "other";
}

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

bool is_space_byte(unsigned char c) {
    return std::isspace(c);
}

}  // namespace

Domain domain_from_string(const std::string& s) {
    if (s == "arxiv") return Domain::arxiv;
    if (s == "xsum") return Domain::xsum;
    if (s == "yelp") return Domain::yelp;
    if (s == "writing") return Domain::writing;
    return Domain::other;
}

LlmType llm_type_from_string(const std::string& s) {
    if (s == "ChatGPT") return LlmType::chatgpt;
    if (s == "Claude-instant") return LlmType::claude_instant;
    if (s == "Google-PaLM") return LlmType::google_palm;
    if (s == "Llama-2-70b") return LlmType::llama2_70b;
    return LlmType::other;
}

std::optional<Record> record_from_json_line(const std::string& line,
                                            const SchemaMap& schema,
                                            std::string& error) {
    ordered_json obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
        error = "invalid JSON";
        return std::nullopt;
    }
    if (!obj.is_object()) {
        error = "line is not a JSON object";
        return std::nullopt;
    }

    auto text_field = [&](const std::string& key) -> std::optional<std::string> {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        if (it->is_string()) return it->get<std::string>();
        return std::nullopt;
    };
    auto string_field = [&](const std::string& key) -> std::string {
        auto v = text_field(key);
        return v ? *v : std::string();
    };

    Record rec;
    rec.id = string_field(schema.id);
    rec.domain_raw = string_field(schema.domain);
    rec.domain = domain_from_string(rec.domain_raw);
    rec.llm_type_raw = string_field(schema.llm_type);
    rec.llm_type = llm_type_from_string(rec.llm_type_raw);
    rec.task_variant = string_field(schema.task_variant);
    rec.human_text = text_field(schema.human_text);
    rec.llm_text = text_field(schema.llm_text);

    // A record that was nulled by cleansing legitimately has only human_text;
    // a line with neither text field carries no usable sample.
    if (!rec.human_text && !rec.llm_text) {
        error = "missing both text fields";
        return std::nullopt;
    }
    return rec;
}

LoadResult load_corpus(const std::string& path, const SchemaMap& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open corpus file: " + path);
    }

    LoadResult result;
    result.corpus.source_path = path;
    std::unordered_set<std::string> seen_ids;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = true;
        for (unsigned char c : line) {
            if (!is_space_byte(c)) { blank = false; break; }
        }
        if (blank) continue;

        std::string error;
        auto rec = record_from_json_line(line, schema, error);
        if (!rec) {
            result.diagnostics.push_back({line_no, error});
            ++result.skipped;
            continue;
        }
        if (rec->id.empty()) {
            // Tolerate releases without an id column; ids stay unique and
            // reproducible because they derive from the line number.
            rec->id = "line-" + std::to_string(line_no);
        }
        if (!seen_ids.insert(rec->id).second) {
            result.diagnostics.push_back({line_no, "duplicate id: " + rec->id});
            ++result.skipped;
            continue;
        }
        result.corpus.records.push_back(std::move(*rec));
    }
    return result;
}

std::string record_to_json_line(const Record& record, const SchemaMap& schema) {
    ordered_json obj;
    obj[schema.id] = record.id;
    obj[schema.domain] =
        record.domain == Domain::other && !record.domain_raw.empty()
            ? record.domain_raw
            : std::string(domain_name(record.domain));
    obj[schema.llm_type] =
        record.llm_type == LlmType::other && !record.llm_type_raw.empty()
            ? record.llm_type_raw
            : std::string(llm_type_name(record.llm_type));
    obj[schema.task_variant] = record.task_variant;
    if (record.human_text) {
        obj[schema.human_text] = *record.human_text;
    } else {
        obj[schema.human_text] = nullptr;
    }
    if (record.llm_text) {
        obj[schema.llm_text] = *record.llm_text;
    } else {
        obj[schema.llm_text] = nullptr;  // nulled, not dropped
    }
    return obj.dump();
}

void save_corpus(const Corpus& corpus, const std::string& path,
                 const SchemaMap& schema) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    for (const Record& rec : corpus.records) {
        out << record_to_json_line(rec, schema) << '\n';
        if (!out) {
            throw std::runtime_error("write failed (partial file left): " + path);
        }
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed (partial file left): " + path);
    }
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_space_byte(c)) {
            ++i;
            continue;
        }
        if (is_word_byte(c)) {
            std::size_t start = i;
            while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
            tokens.emplace_back(text, start, i - start);
        } else {
            tokens.emplace_back(1, text[i]);
            ++i;
        }
    }
    return tokens;
}

std::size_t token_count(const std::string& text) {
    std::size_t count = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_space_byte(c)) {
            ++i;
        } else if (is_word_byte(c)) {
            while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
            ++count;
        } else {
            ++i;
            ++count;
        }
    }
    return count;
}

std::vector<Span> split_spans(const std::string& text, const std::string& terminators) {
    std::vector<Span> spans;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        while (i < n && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        std::size_t start = i;
        std::size_t end = n;
        bool terminated = false;
        while (i < n) {
            if (terminators.find(text[i]) != std::string::npos) {
                end = i + 1;
                terminated = true;
                ++i;
                break;
            }
            ++i;
        }
        if (!terminated) {
            // Final span without terminator: trim trailing whitespace.
            end = n;
            while (end > start && is_space_byte(static_cast<unsigned char>(text[end - 1]))) --end;
        }
        if (end > start) spans.push_back({start, end});
    }
    return spans;
}

std::vector<Span> split_sentences(const std::string& text) {
    return split_spans(text, "?!.:");
}

std::size_t sentence_count_qc(const std::string& text) {
    return split_spans(text, "?!.").size();
}

}  // namespace decon
