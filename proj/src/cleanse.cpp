#include "decon/cleanse.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace decon {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kTerminators = "?!.:";

bool is_space_byte(unsigned char c) { return std::isspace(c); }

std::vector<Span> merge_spans(std::vector<Span> spans) {
    if (spans.empty()) return spans;
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
        return a.start != b.start ? a.start < b.start : a.end < b.end;
    });
    std::vector<Span> merged;
    merged.push_back(spans.front());
    for (std::size_t i = 1; i < spans.size(); ++i) {
        if (spans[i].start <= merged.back().end) {
            merged.back().end = std::max(merged.back().end, spans[i].end);
        } else {
            merged.push_back(spans[i]);
        }
    }
    return merged;
}

struct MappedText {
    std::string text;
    std::vector<std::size_t> orig;  // orig[i] = index into the original text
};

// Excision with seam normalization: each removed span collapses to a single
// space between its neighbours, or to nothing at the text edges. `orig`
// tracks, for every character of the result, where it came from; the
// synthetic seam space borrows the position of the following character.
MappedText excise_with_map(const std::string& original, const std::vector<Span>& spans) {
    struct Segment {
        std::size_t begin;
        std::size_t end;
    };
    std::vector<Segment> segments;
    std::size_t pos = 0;
    for (const Span& span : spans) {
        if (span.start > pos) segments.push_back({pos, span.start});
        pos = std::max(pos, span.end);
    }
    if (pos < original.size()) segments.push_back({pos, original.size()});

    const std::size_t n = original.size();
    std::vector<Segment> kept;
    for (Segment seg : segments) {
        if (seg.begin != 0) {  // preceded by a seam
            while (seg.begin < seg.end &&
                   is_space_byte(static_cast<unsigned char>(original[seg.begin]))) {
                ++seg.begin;
            }
        }
        if (seg.end != n) {  // followed by a seam
            while (seg.end > seg.begin &&
                   is_space_byte(static_cast<unsigned char>(original[seg.end - 1]))) {
                --seg.end;
            }
        }
        if (seg.begin < seg.end) kept.push_back(seg);
    }

    MappedText out;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        if (k > 0) {
            out.text.push_back(' ');
            out.orig.push_back(kept[k].begin);
        }
        for (std::size_t i = kept[k].begin; i < kept[k].end; ++i) {
            out.text.push_back(original[i]);
            out.orig.push_back(i);
        }
    }
    return out;
}

bool is_excision_target(const ContaminationFinding& f, DomainPolicy policy,
                        std::size_t first_sentence_end) {
    switch (f.category) {
        case Category::beginning:
        case Category::prompt:
        case Category::assistant:
            return true;
        case Category::domain:
            return policy == DomainPolicy::automatic &&
                   f.span.start < first_sentence_end;
        case Category::rejection:
            return false;
    }
    return false;
}

std::size_t first_sentence_end(const std::string& text) {
    auto spans = split_sentences(text);
    return spans.empty() ? text.size() : spans.front().end;
}

// Proposals with overlapping removal spans collapse into one, keeping the
// first contributor's category and pattern id.
std::vector<ContaminationFinding> expand_proposals(
    const std::string& text, const std::vector<ContaminationFinding>& findings) {
    std::vector<ContaminationFinding> proposals;
    for (const ContaminationFinding& f : findings) {
        ContaminationFinding p = f;
        p.span = expand_to_terminator(text, f.span.start);
        bool overlaps = false;
        for (ContaminationFinding& existing : proposals) {
            if (p.span.start < existing.span.end && existing.span.start < p.span.end) {
                existing.span.start = std::min(existing.span.start, p.span.start);
                existing.span.end = std::max(existing.span.end, p.span.end);
                overlaps = true;
                break;
            }
        }
        if (!overlaps) proposals.push_back(std::move(p));
    }
    std::sort(proposals.begin(), proposals.end(),
              [](const ContaminationFinding& a, const ContaminationFinding& b) {
                  return a.span.start < b.span.start;
              });
    return proposals;
}

}  // namespace

const char* cleanse_action_name(CleanseAction a) {
    switch (a) {
        case CleanseAction::unchanged: return "unchanged";
        case CleanseAction::spans_removed: return "spans_removed";
        case CleanseAction::nulled: return "nulled";
        case CleanseAction::review: return "review";
    }
    return "?";
}

Span expand_to_terminator(const std::string& text, std::size_t match_start) {
    std::size_t i = std::min(match_start, text.size());
    while (i < text.size()) {
        if (std::string_view(kTerminators).find(text[i]) != std::string_view::npos) {
            return {match_start, i + 1};
        }
        ++i;
    }
    return {match_start, text.size()};
}

std::string excise_spans(const std::string& text, const std::vector<Span>& spans) {
    return excise_with_map(text, merge_spans(spans)).text;
}

CleanseOutcome cleanse_record(const Record& record, const PatternCatalog& catalog,
                              DomainPolicy policy) {
    CleanseOutcome outcome;
    outcome.record_id = record.id;
    if (!record.llm_text) {
        outcome.action = CleanseAction::unchanged;
        return outcome;  // already nulled; never resurrected
    }
    const std::string& original = *record.llm_text;

    std::vector<ContaminationFinding> findings = all_findings(record, catalog);
    for (const ContaminationFinding& f : findings) {
        if (f.category == Category::rejection) {
            outcome.action = CleanseAction::nulled;
            outcome.removed_spans = {{0, original.size()}};
            return outcome;
        }
    }

    std::size_t initial_targets = 0;
    {
        std::size_t fse = first_sentence_end(original);
        for (const ContaminationFinding& f : findings) {
            if (is_excision_target(f, policy, fse)) ++initial_targets;
        }
    }
    const std::size_t max_passes = initial_targets + 3;

    std::vector<Span> removed;  // original coordinates, merged
    MappedText current;
    current.text = original;
    current.orig.resize(original.size());
    for (std::size_t i = 0; i < original.size(); ++i) current.orig[i] = i;

    Record probe = record;
    std::vector<ContaminationFinding> leftover;
    bool bound_exceeded = false;
    std::size_t pass = 0;
    while (true) {
        probe.llm_text = current.text;
        findings = all_findings(probe, catalog);
        std::size_t fse = first_sentence_end(current.text);
        std::vector<ContaminationFinding> targets;
        for (const ContaminationFinding& f : findings) {
            if (is_excision_target(f, policy, fse)) targets.push_back(f);
        }
        if (targets.empty()) break;
        if (pass >= max_passes) {
            bound_exceeded = true;
            leftover = std::move(targets);
            break;
        }
        std::vector<Span> spans_here;
        for (const ContaminationFinding& f : targets) {
            spans_here.push_back(expand_to_terminator(current.text, f.span.start));
        }
        spans_here = merge_spans(spans_here);
        for (const Span& s : spans_here) {
            if (s.end <= s.start) continue;
            std::size_t orig_start = current.orig[s.start];
            std::size_t orig_end = current.orig[s.end - 1] + 1;
            removed.push_back({orig_start, orig_end});
        }
        removed = merge_spans(removed);
        current = excise_with_map(original, removed);
        ++pass;
    }

    outcome.removed_spans = removed;
    outcome.cleaned_text = current.text;

    if (bound_exceeded) {
        outcome.action = CleanseAction::review;  // pathological input
        outcome.proposed = expand_proposals(current.text, leftover);
        return outcome;
    }

    if (policy == DomainPolicy::review) {
        std::vector<ContaminationFinding> domain_findings;
        for (const ContaminationFinding& f : findings) {
            if (f.category == Category::domain) domain_findings.push_back(f);
        }
        if (!domain_findings.empty()) {
            outcome.action = CleanseAction::review;
            outcome.proposed = expand_proposals(current.text, domain_findings);
            return outcome;
        }
    }

    outcome.action = removed.empty() ? CleanseAction::unchanged
                                     : CleanseAction::spans_removed;
    return outcome;
}

CleanseResult cleanse_corpus(const Corpus& corpus, const PatternCatalog& catalog,
                             DomainPolicy policy, int jobs) {
    CleanseResult result;
    result.corpus.source_path = corpus.source_path;
    result.corpus.records = corpus.records;
    const std::size_t n = corpus.records.size();
    result.outcomes.resize(n);

    auto work = [&](std::size_t i) {
        result.outcomes[i] = cleanse_record(corpus.records[i], catalog, policy);
    };
    if (jobs > 1 && n > 1) {
        const std::size_t workers = std::min<std::size_t>(jobs, n);
        std::vector<std::future<void>> futures;
        for (std::size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < n; i += workers) work(i);
            }));
        }
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < n; ++i) work(i);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const CleanseOutcome& o = result.outcomes[i];
        Record& rec = result.corpus.records[i];
        switch (o.action) {
            case CleanseAction::unchanged:
                ++result.summary.unchanged;
                break;
            case CleanseAction::spans_removed:
                rec.llm_text = o.cleaned_text;
                ++result.summary.spans_removed;
                break;
            case CleanseAction::nulled:
                rec.llm_text.reset();
                ++result.summary.nulled;
                break;
            case CleanseAction::review:
                rec.llm_text = o.cleaned_text;  // proposals stay unapplied
                ++result.summary.review;
                break;
        }
    }
    return result;
}

void review_queue_export(const std::vector<CleanseOutcome>& outcomes,
                         const std::string& path, std::size_t context_chars) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open review queue for writing: " + path);
    for (const CleanseOutcome& o : outcomes) {
        if (o.action != CleanseAction::review || !o.cleaned_text) continue;
        const std::string& text = *o.cleaned_text;
        for (const ContaminationFinding& p : o.proposed) {
            if (p.span.end > text.size() || p.span.start >= p.span.end) continue;
            std::size_t ctx_begin = p.span.start > context_chars
                                        ? p.span.start - context_chars
                                        : 0;
            std::size_t ctx_end = std::min(text.size(), p.span.end + context_chars);
            ordered_json line;
            line["v"] = 1;
            line["id"] = o.record_id;
            line["category"] = category_name(p.category);
            line["pattern_id"] = p.pattern_id;
            line["span"] = {{"start", p.span.start}, {"end", p.span.end}};
            line["excerpt"] = text.substr(p.span.start, p.span.length());
            line["context_before"] = text.substr(ctx_begin, p.span.start - ctx_begin);
            line["context_after"] = text.substr(p.span.end, ctx_end - p.span.end);
            line["decision"] = "pending";
            out << line.dump() << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

ReviewImportResult review_queue_import(const std::string& path, const Corpus& corpus) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open review queue: " + path);

    ReviewImportResult result;
    result.corpus = corpus;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        index[corpus.records[i].id] = i;
    }

    std::map<std::size_t, std::vector<Span>> accepted_spans;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        ordered_json obj = ordered_json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            result.diagnostics.push_back({line_no, "invalid JSON"});
            continue;
        }
        std::string decision = obj.value("decision", std::string("pending"));
        if (decision == "reject") {
            ++result.rejected;
            continue;
        }
        if (decision != "accept") {
            if (decision != "pending") {
                result.diagnostics.push_back({line_no, "unknown decision: " + decision});
            }
            continue;
        }
        std::string id = obj.value("id", std::string());
        auto it = index.find(id);
        if (it == index.end()) {
            result.diagnostics.push_back({line_no, "unknown id: " + id});
            continue;
        }
        const Record& rec = result.corpus.records[it->second];
        if (!rec.llm_text) {
            result.diagnostics.push_back({line_no, "record already nulled: " + id});
            continue;
        }
        if (!obj.contains("span") || !obj["span"].is_object()) {
            result.diagnostics.push_back({line_no, "missing span"});
            continue;
        }
        Span span{obj["span"].value("start", std::size_t{0}),
                  obj["span"].value("end", std::size_t{0})};
        const std::string& text = *rec.llm_text;
        if (span.start >= span.end || span.end > text.size()) {
            result.diagnostics.push_back({line_no, "span out of bounds for id: " + id});
            continue;
        }
        if (obj.contains("excerpt") &&
            obj["excerpt"].get<std::string>() != text.substr(span.start, span.length())) {
            result.diagnostics.push_back({line_no, "stale excerpt for id: " + id});
            continue;
        }
        accepted_spans[it->second].push_back(span);
        ++result.accepted;
    }

    for (auto& [idx, spans] : accepted_spans) {
        Record& rec = result.corpus.records[idx];
        rec.llm_text = excise_spans(*rec.llm_text, spans);
    }
    return result;
}

}  // namespace decon
