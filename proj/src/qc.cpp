#include "decon/qc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace decon {

namespace {

using ordered_json = nlohmann::ordered_json;

}  // namespace

const char* const kDefaultRecleanInstruction =
    "Remove any generation artifacts (introductory boilerplate, task echoes, "
    "role markers) that are unrelated to the writing task itself. Keep every "
    "other part of the text unchanged and return only the revised text.";

const char* qc_reason_name(QcReason r) {
    switch (r) {
        case QcReason::under_removal_suspected: return "under_removal_suspected";
        case QcReason::too_few_tokens: return "too_few_tokens";
        case QcReason::length_mismatch: return "length_mismatch";
        case QcReason::empty_after_clean: return "empty_after_clean";
    }
    return "?";
}

std::optional<QcFlag> flag_over_removal(const Record& cleaned, const QcConfig& config) {
    if (!cleaned.llm_text) return std::nullopt;  // nulled records are settled

    const std::size_t llm_tokens = token_count(*cleaned.llm_text);
    QcFlag flag;
    flag.record_id = cleaned.id;
    flag.evidence["token_count"] = static_cast<double>(llm_tokens);

    double token_dev = -1.0;
    double sentence_dev = -1.0;
    if (cleaned.human_text) {
        const std::size_t human_tokens = token_count(*cleaned.human_text);
        const std::size_t llm_sentences = sentence_count_qc(*cleaned.llm_text);
        const std::size_t human_sentences = sentence_count_qc(*cleaned.human_text);
        if (human_tokens > 0) {
            double ratio = static_cast<double>(llm_tokens) /
                           static_cast<double>(human_tokens);
            token_dev = std::abs(ratio - 1.0);
            flag.evidence["token_ratio"] = ratio;
            flag.evidence["token_ratio_dev"] = token_dev;
        }
        if (human_sentences > 0) {
            double ratio = static_cast<double>(llm_sentences) /
                           static_cast<double>(human_sentences);
            sentence_dev = std::abs(ratio - 1.0);
            flag.evidence["sentence_ratio"] = ratio;
            flag.evidence["sentence_ratio_dev"] = sentence_dev;
        }
    }

    if (llm_tokens == 0) {
        flag.reason = QcReason::empty_after_clean;
        return flag;
    }
    if (llm_tokens < config.min_tokens) {
        flag.reason = QcReason::too_few_tokens;
        return flag;
    }
    if (token_dev > config.max_token_ratio_dev ||
        sentence_dev > config.max_sentence_ratio_dev) {
        flag.reason = QcReason::length_mismatch;
        return flag;
    }
    return std::nullopt;
}

std::vector<QcFlag> flag_under_removal(const std::vector<ScoredRecordRef>& scored,
                                       const QcConfig& config) {
    std::vector<QcFlag> flags;
    if (scored.empty()) return flags;

    // Empirical quantile at index floor(q * n): with n distinct scores and
    // q = 0.95 this flags exactly the top 5%, and degenerates to the whole
    // batch when all scores tie.
    std::vector<double> sorted_scores;
    sorted_scores.reserve(scored.size());
    for (const ScoredRecordRef& s : scored) sorted_scores.push_back(s.score);
    std::sort(sorted_scores.begin(), sorted_scores.end());
    std::size_t idx = static_cast<std::size_t>(
        config.detector_score_quantile * static_cast<double>(sorted_scores.size()));
    if (idx >= sorted_scores.size()) idx = sorted_scores.size() - 1;
    const double threshold = sorted_scores[idx];

    std::vector<const ScoredRecordRef*> picked;
    for (const ScoredRecordRef& s : scored) {
        if (s.score >= threshold) picked.push_back(&s);
    }
    std::sort(picked.begin(), picked.end(),
              [](const ScoredRecordRef* a, const ScoredRecordRef* b) {
                  if (a->score != b->score) return a->score > b->score;
                  return a->record->id < b->record->id;
              });
    for (const ScoredRecordRef* s : picked) {
        QcFlag flag;
        flag.record_id = s->record->id;
        flag.reason = QcReason::under_removal_suspected;
        flag.evidence["detector_score"] = s->score;
        flag.evidence["score_threshold"] = threshold;
        flags.push_back(std::move(flag));
    }
    return flags;
}

void export_for_recleaning(const std::vector<QcFlag>& flags, const Corpus& corpus,
                           const std::string& path,
                           const std::string& instruction_template) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open re-cleaning export: " + path);

    std::map<std::string, const Record*> by_id;
    for (const Record& rec : corpus.records) by_id[rec.id] = &rec;

    const std::string& instruction =
        instruction_template.empty() ? kDefaultRecleanInstruction : instruction_template;

    std::set<std::string> emitted;
    for (const QcFlag& flag : flags) {
        auto it = by_id.find(flag.record_id);
        if (it == by_id.end()) {
            throw std::invalid_argument("flag references unknown record: " +
                                        flag.record_id);
        }
        if (!emitted.insert(flag.record_id).second) continue;  // one line per record
        const Record& rec = *it->second;
        ordered_json line;
        line["v"] = 1;
        line["id"] = rec.id;
        if (rec.llm_text) line["llm_text"] = *rec.llm_text; else line["llm_text"] = nullptr;
        if (rec.human_text) line["human_text"] = *rec.human_text; else line["human_text"] = nullptr;
        line["instruction_template"] = instruction;
        out << line.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

double token_containment(const std::string& original, const std::string& candidate) {
    std::vector<std::string> orig = tokenize(original);
    std::vector<std::string> cand = tokenize(candidate);
    if (cand.empty()) return 1.0;
    std::size_t matched = 0;
    std::size_t oi = 0;
    for (const std::string& tok : cand) {
        while (oi < orig.size() && orig[oi] != tok) ++oi;
        if (oi < orig.size()) {
            ++matched;
            ++oi;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(cand.size());
}

RecleanImportResult import_recleaned(const std::string& path, const Corpus& corpus,
                                     const std::vector<std::string>& exported_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open re-cleaned file: " + path);

    RecleanImportResult result;
    result.corpus = corpus;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        index[corpus.records[i].id] = i;
    }
    std::set<std::string> allowed(exported_ids.begin(), exported_ids.end());

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        ordered_json obj = ordered_json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            result.diagnostics.push_back({line_no, "invalid JSON"});
            ++result.rejected;
            continue;
        }
        std::string id = obj.value("id", std::string());
        if (!allowed.count(id)) {
            result.diagnostics.push_back({line_no, "id was not exported: " + id});
            ++result.rejected;
            continue;
        }
        auto it = index.find(id);
        if (it == index.end()) {
            result.diagnostics.push_back({line_no, "unknown id: " + id});
            ++result.rejected;
            continue;
        }
        Record& rec = result.corpus.records[it->second];
        if (!rec.llm_text) {
            result.diagnostics.push_back({line_no, "record is nulled: " + id});
            ++result.rejected;
            continue;
        }
        if (!obj.contains("llm_text") || !obj["llm_text"].is_string()) {
            result.diagnostics.push_back({line_no, "missing llm_text for id: " + id});
            ++result.rejected;
            continue;
        }
        std::string revised = obj["llm_text"].get<std::string>();
        double containment = token_containment(*rec.llm_text, revised);
        std::size_t orig_tokens = token_count(*rec.llm_text);
        std::size_t new_tokens = token_count(revised);
        if (containment < 0.9 || new_tokens > orig_tokens) {
            result.diagnostics.push_back(
                {line_no, "rejected " + id + ": containment " +
                              std::to_string(containment) + ", tokens " +
                              std::to_string(orig_tokens) + " -> " +
                              std::to_string(new_tokens) + "; original: \"" +
                              *rec.llm_text + "\"; returned: \"" + revised + "\""});
            ++result.rejected;
            continue;
        }
        rec.llm_text = std::move(revised);
        ++result.accepted;
    }
    return result;
}

}  // namespace decon
