#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "decon/attack.hpp"
#include "decon/cleanse.hpp"
#include "decon/corpus.hpp"
#include "decon/detector.hpp"
#include "decon/metrics.hpp"
#include "decon/patterns.hpp"
#include "decon/qc.hpp"
#include "decon/report.hpp"
#include "decon/synth.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace decon;

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_file_or_die(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// The pipeline writes one of these next to its outputs: rerunning with
// identical inputs must reproduce identical output hashes.
class Manifest {
public:
    void begin_step(const std::string& name, const std::string& config_text,
                    std::vector<std::string> inputs = {}) {
        current_ = ordered_json();
        current_["name"] = name;
        current_["config_hash"] = hex64(fnv1a64(config_text));
        current_["inputs"] = inputs;
        current_["outputs"] = ordered_json::array();
        t0_ = std::chrono::steady_clock::now();
    }
    // `path` is read for hashing; the manifest records the name relative to
    // its own directory so reruns into different directories compare equal.
    void add_output(const std::string& path) {
        ordered_json entry;
        entry["path"] = std::filesystem::path(path).filename().string();
        entry["fnv1a64"] = hex64(fnv1a64(read_file_or_die(path)));
        current_["outputs"].push_back(std::move(entry));
    }
    void end_step() {
        auto t1 = std::chrono::steady_clock::now();
        current_["wall_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0_).count();
        steps_.push_back(std::move(current_));
    }
    void write(const std::string& path) const {
        ordered_json doc;
        doc["tool_version"] = kVersion;
        doc["steps"] = steps_;
        write_text(path, doc.dump(2) + "\n");
    }

private:
    ordered_json current_;
    std::vector<ordered_json> steps_;
    std::chrono::steady_clock::time_point t0_;
};

struct CatalogOptions {
    std::string path;
    bool case_insensitive = false;
    std::string order;
};

void add_catalog_options(CLI::App* cmd, CatalogOptions& opts) {
    cmd->add_option("--catalog", opts.path, "pattern catalog JSON (default: built-ins)");
    cmd->add_flag("--case-insensitive", opts.case_insensitive,
                  "match patterns case-insensitively");
    cmd->add_option("--order", opts.order,
                    "category precedence, e.g. rejection,prompt,beginning,domain,assistant");
}

PatternCatalog make_catalog(const CatalogOptions& opts) {
    PatternCatalog catalog = opts.path.empty()
        ? PatternCatalog::builtin(opts.case_insensitive)
        : PatternCatalog::from_json_file(opts.path, opts.case_insensitive);
    if (!opts.order.empty()) {
        std::vector<Category> order;
        std::stringstream ss(opts.order);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto cat = category_from_string(item);
            if (!cat) throw std::runtime_error("unknown category in --order: " + item);
            order.push_back(*cat);
        }
        catalog.set_precedence(order);
    }
    return catalog;
}

Corpus load_or_die(const std::string& path) {
    auto result = load_corpus(path);
    for (const auto& d : result.diagnostics) {
        std::cerr << path << ":" << d.line << ": skipped: " << d.message << "\n";
    }
    if (result.skipped > 0) {
        std::cerr << path << ": skipped " << result.skipped << " line(s)\n";
    }
    return std::move(result.corpus);
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
    }
}

ordered_json span_json(const Span& s) {
    return ordered_json{{"start", s.start}, {"end", s.end}};
}

std::string outcomes_to_jsonl(const std::vector<CleanseOutcome>& outcomes) {
    std::string out;
    for (const auto& o : outcomes) {
        ordered_json line;
        line["id"] = o.record_id;
        line["action"] = cleanse_action_name(o.action);
        ordered_json spans = ordered_json::array();
        for (const Span& s : o.removed_spans) spans.push_back(span_json(s));
        line["removed_spans"] = std::move(spans);
        if (!o.proposed.empty()) {
            ordered_json props = ordered_json::array();
            for (const auto& p : o.proposed) {
                ordered_json prop;
                prop["category"] = category_name(p.category);
                prop["pattern_id"] = p.pattern_id;
                prop["span"] = span_json(p.span);
                props.push_back(std::move(prop));
            }
            line["proposed"] = std::move(props);
        }
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::string scores_to_jsonl(const ScoreResult& result) {
    std::string out;
    for (const auto& s : result.scores) {
        ordered_json line;
        line["id"] = s.id;
        line["score"] = s.score;
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::pair<std::string, double>> scores_from_jsonl(const std::string& path) {
    std::vector<std::pair<std::string, double>> scores;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scores file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        ordered_json obj = ordered_json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.contains("id") || !obj.contains("score")) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected {id, score}");
        }
        scores.emplace_back(obj["id"].get<std::string>(), obj["score"].get<double>());
    }
    return scores;
}

std::string flags_to_jsonl(const std::vector<QcFlag>& flags) {
    std::string out;
    for (const auto& f : flags) {
        ordered_json line;
        line["v"] = 1;
        line["id"] = f.record_id;
        line["reason"] = qc_reason_name(f.reason);
        ordered_json ev;
        for (const auto& [k, v] : f.evidence) ev[k] = v;
        line["evidence"] = std::move(ev);
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::string> flag_ids_from_jsonl(const std::string& path) {
    std::vector<std::string> ids;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open flags file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        ordered_json obj = ordered_json::parse(line, nullptr, false);
        if (!obj.is_discarded() && obj.contains("id")) {
            ids.push_back(obj["id"].get<std::string>());
        }
    }
    return ids;
}

QcConfig qc_config_from_json_text(const ordered_json& doc) {
    QcConfig cfg;
    cfg.min_tokens = doc.value("min_tokens", cfg.min_tokens);
    cfg.max_token_ratio_dev = doc.value("max_token_ratio_dev", cfg.max_token_ratio_dev);
    cfg.max_sentence_ratio_dev =
        doc.value("max_sentence_ratio_dev", cfg.max_sentence_ratio_dev);
    cfg.detector_score_quantile =
        doc.value("detector_score_quantile", cfg.detector_score_quantile);
    return cfg;
}

ContaminationTable table_from_json(const ordered_json& doc) {
    ContaminationTable table;
    for (const auto& row : doc.at("rows")) {
        auto cat = category_from_string(row.at("category").get<std::string>());
        if (!cat) throw std::runtime_error("unknown category in scan json");
        std::uint64_t c = row.at("count").get<std::uint64_t>();
        std::string llm = row.at("llm_type").get<std::string>();
        if (c > 0) {
            table.add_count(llm, *cat, c);
        } else if (!table.counts.count(llm)) {
            table.counts[llm] = {};
        }
    }
    if (doc.contains("records_per_llm")) {
        for (const auto& [llm, n] : doc.at("records_per_llm").items()) {
            table.records_per_llm[llm] = n.get<std::uint64_t>();
        }
    }
    table.corpus_size = doc.value("corpus_size", std::uint64_t{0});
    return table;
}

AttackReport attack_from_json(const ordered_json& doc) {
    AttackReport r;
    r.n_evaluated = doc.value("n_evaluated", std::size_t{0});
    r.predicted_human = doc.value("predicted_human", std::size_t{0});
    r.predicted_llm = doc.value("predicted_llm", std::size_t{0});
    r.accuracy_on_attacked = doc.value("accuracy_on_attacked", 0.0);
    r.threshold = doc.value("threshold", 0.5);
    r.phrase = doc.value("phrase", std::string());
    return r;
}

EvalResult eval_from_json(const ordered_json& doc) {
    EvalResult r;
    r.roc_auc = doc.value("roc_auc", 0.0);
    r.f1 = doc.value("f1", 0.0);
    r.accuracy = doc.value("accuracy", 0.0);
    r.tpr_at_fpr = doc.value("tpr_at_fpr", 0.0);
    r.fpr_target = doc.value("fpr_target", 0.0001);
    r.n = doc.value("n", std::size_t{0});
    r.tpr_small_sample = doc.value("tpr_small_sample", false);
    return r;
}

ordered_json eval_to_json(const std::string& name, const EvalResult& r) {
    ordered_json obj;
    obj["name"] = name;
    obj["roc_auc"] = r.roc_auc;
    obj["f1"] = r.f1;
    obj["accuracy"] = r.accuracy;
    obj["tpr_at_fpr"] = r.tpr_at_fpr;
    obj["fpr_target"] = r.fpr_target;
    obj["n"] = r.n;
    obj["tpr_small_sample"] = r.tpr_small_sample;
    return obj;
}

std::vector<TrainExample> corpus_examples(const Corpus& corpus) {
    std::vector<TrainExample> examples;
    for (const Record& rec : corpus.records) {
        if (rec.human_text) examples.push_back({*rec.human_text, Label::human});
        if (rec.llm_text) examples.push_back({*rec.llm_text, Label::llm});
    }
    return examples;
}

std::string truth_to_jsonl(const SynthResult& synth) {
    std::string out;
    for (const Record& rec : synth.corpus.records) {
        ordered_json line;
        line["id"] = rec.id;
        const auto& cat = synth.ground_truth.at(rec.id);
        if (cat) line["category"] = category_name(*cat);
        else line["category"] = nullptr;
        out += line.dump();
        out += '\n';
    }
    return out;
}

// ---- subcommand bodies ------------------------------------------------------

int run_synth(const std::string& config_path, const std::string& out_path,
              const std::string& truth_path, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> pairs) {
    SynthConfig cfg;
    if (!config_path.empty()) {
        cfg = SynthConfig::from_json(read_file_or_die(config_path));
    } else {
        cfg.contamination_rate = {{Category::beginning, 0.3}};
        std::tie(cfg.vocab_human, cfg.vocab_llm) = make_default_vocabs(cfg.rng_seed);
    }
    if (seed) {
        cfg.rng_seed = *seed;
        if (config_path.empty()) {
            std::tie(cfg.vocab_human, cfg.vocab_llm) = make_default_vocabs(*seed);
        }
    }
    if (pairs) cfg.n_pairs = *pairs;

    auto synth = generate(cfg);
    save_corpus(synth.corpus, out_path);
    if (!truth_path.empty()) write_text(truth_path, truth_to_jsonl(synth));
    std::cerr << "synth: wrote " << synth.corpus.size() << " records to " << out_path
              << "\n";
    return 0;
}

int run_scan(const std::string& in_path, const CatalogOptions& copts,
             const std::string& format, const std::string& out_path,
             const std::string& dump_catalog, int jobs) {
    auto catalog = make_catalog(copts);
    if (!dump_catalog.empty()) {
        catalog.to_json_file(dump_catalog);
        std::cerr << "scan: wrote effective catalog to " << dump_catalog << "\n";
        if (in_path.empty()) return 0;
    }
    Corpus corpus = load_or_die(in_path);
    auto table = scan(corpus, catalog, jobs);
    emit(render_report(table, report_format_from_string(format)), out_path);
    return 0;
}

int run_cleanse(const std::string& in_path, const std::string& out_path,
                const std::string& outcomes_path, const std::string& policy,
                const std::string& review_queue, const std::string& apply_review,
                const CatalogOptions& copts, int jobs) {
    Corpus corpus = load_or_die(in_path);

    if (!apply_review.empty()) {
        auto result = review_queue_import(apply_review, corpus);
        for (const auto& d : result.diagnostics) {
            std::cerr << apply_review << ":" << d.line << ": " << d.message << "\n";
        }
        save_corpus(result.corpus, out_path);
        std::cerr << "cleanse: applied " << result.accepted << " accepted proposal(s), "
                  << result.rejected << " rejected\n";
        return 0;
    }

    auto catalog = make_catalog(copts);
    DomainPolicy dp;
    if (policy == "auto") dp = DomainPolicy::automatic;
    else if (policy == "review") dp = DomainPolicy::review;
    else throw std::runtime_error("--domain-policy must be auto or review");

    auto result = cleanse_corpus(corpus, catalog, dp, jobs);
    save_corpus(result.corpus, out_path);
    if (!outcomes_path.empty()) {
        write_text(outcomes_path, outcomes_to_jsonl(result.outcomes));
    }
    if (!review_queue.empty()) review_queue_export(result.outcomes, review_queue);
    std::cerr << "cleanse: unchanged " << result.summary.unchanged << ", spans_removed "
              << result.summary.spans_removed << ", nulled " << result.summary.nulled
              << ", review " << result.summary.review << "\n";
    return 0;
}

int run_qc(const std::string& in_path, const std::string& scores_path,
           const std::string& config_path, const std::string& flags_out,
           const std::string& reclean_out, const std::string& instruction,
           const std::string& import_path, const std::string& import_flags,
           const std::string& out_path) {
    Corpus corpus = load_or_die(in_path);
    QcConfig cfg = config_path.empty()
        ? QcConfig{}
        : qc_config_from_json_text(ordered_json::parse(read_file_or_die(config_path)));

    if (!import_path.empty()) {
        if (import_flags.empty() || out_path.empty()) {
            throw std::runtime_error("--import-recleaned needs --flags and --out");
        }
        auto result =
            import_recleaned(import_path, corpus, flag_ids_from_jsonl(import_flags));
        for (const auto& d : result.diagnostics) {
            std::cerr << import_path << ":" << d.line << ": " << d.message << "\n";
        }
        save_corpus(result.corpus, out_path);
        std::cerr << "qc: accepted " << result.accepted << ", rejected "
                  << result.rejected << " re-cleaned record(s)\n";
        return 0;
    }

    std::vector<QcFlag> flags;
    for (const Record& rec : corpus.records) {
        if (auto flag = flag_over_removal(rec, cfg)) flags.push_back(std::move(*flag));
    }
    std::size_t over = flags.size();

    if (!scores_path.empty()) {
        auto scores = scores_from_jsonl(scores_path);
        std::map<std::string, const Record*> by_id;
        for (const Record& rec : corpus.records) by_id[rec.id] = &rec;
        std::vector<ScoredRecordRef> scored;
        for (const auto& [id, score] : scores) {
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                std::cerr << "qc: score for unknown id " << id << " ignored\n";
                continue;
            }
            scored.push_back({it->second, score});
        }
        for (auto& flag : flag_under_removal(scored, cfg)) {
            flags.push_back(std::move(flag));
        }
    }

    if (!flags_out.empty()) write_text(flags_out, flags_to_jsonl(flags));
    if (!reclean_out.empty()) {
        export_for_recleaning(flags, corpus, reclean_out, instruction);
    }
    std::cerr << "qc: " << over << " over-removal flag(s), " << flags.size() - over
              << " under-removal flag(s)\n";
    return 0;
}

int run_train(const std::string& in_path, const std::string& model_path,
              const TrainConfig& cfg) {
    Corpus corpus = load_or_die(in_path);
    auto examples = corpus_examples(corpus);
    TrainLog log;
    auto model = train(examples, cfg, &log);
    model.save(model_path);
    std::cerr << "train: " << examples.size() << " examples, final loss "
              << log.epoch_losses.back() << ", model " << model_path << "\n";
    return 0;
}

int run_score(const std::string& model_path, const std::string& in_path,
              const std::string& out_path) {
    auto model = DetectorModel::load(model_path);
    Corpus corpus = load_or_die(in_path);
    auto result = score_corpus(model, corpus);
    emit(scores_to_jsonl(result), out_path);
    if (result.skipped_nulled > 0) {
        std::cerr << "score: skipped " << result.skipped_nulled << " nulled record(s)\n";
    }
    return 0;
}

int run_attribute(const std::string& model_path, const std::string& text_arg,
                  const std::string& file_arg, std::size_t top_k) {
    auto model = DetectorModel::load(model_path);
    std::string text = text_arg;
    if (!file_arg.empty()) text = read_file_or_die(file_arg);
    auto attr = attribute(model, text);
    auto top = top_tokens(attr, top_k);

    ordered_json doc;
    doc["logit"] = attr.logit;
    doc["bias"] = attr.bias_term;
    doc["prediction"] = predict(model, text);
    doc["n_tokens"] = attr.tokens.size();
    ordered_json toks = ordered_json::array();
    for (const auto& t : top) {
        toks.push_back(ordered_json{{"token", t.token}, {"contribution", t.contribution}});
    }
    doc["top_tokens"] = std::move(toks);
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run_attack(const std::string& model_path, const std::string& phrase,
               const std::string& in_path, const std::string& report_path,
               double threshold) {
    auto model = DetectorModel::load(model_path);
    Corpus corpus = load_or_die(in_path);
    std::vector<std::string> texts;
    for (const Record& rec : corpus.records) {
        if (rec.human_text) texts.push_back(*rec.human_text);
    }
    AttackSpec spec;
    if (!phrase.empty()) spec.phrase = phrase;
    auto report = evaluate_attack(model, texts, spec, threshold);
    if (!report_path.empty()) {
        write_text(report_path, render_report(report, ReportFormat::json));
    }
    std::cout << render_report(report, ReportFormat::markdown);
    return 0;
}

int run_report(const std::string& kind, const std::string& in_path,
               const std::string& format, const std::string& out_path) {
    ordered_json doc = ordered_json::parse(read_file_or_die(in_path));
    ReportFormat fmt = report_format_from_string(format);
    if (kind == "scan") {
        emit(render_report(table_from_json(doc), fmt), out_path);
    } else if (kind == "attack") {
        emit(render_report(attack_from_json(doc), fmt), out_path);
    } else if (kind == "eval") {
        std::vector<std::pair<std::string, EvalResult>> rows;
        for (const auto& entry : doc) {
            rows.emplace_back(entry.value("name", std::string("eval")),
                              eval_from_json(entry));
        }
        emit(render_report(rows, fmt), out_path);
    } else {
        throw std::runtime_error("--kind must be scan, attack or eval");
    }
    return 0;
}

int run_pipeline(const std::string& config_path, const std::string& outdir, int jobs) {
    ordered_json cfg = ordered_json::parse(read_file_or_die(config_path));
    std::filesystem::create_directories(outdir);
    auto at = [&](const std::string& name) {
        return (std::filesystem::path(outdir) / name).string();
    };

    SynthConfig scfg = SynthConfig::from_json(
        cfg.contains("synth") ? cfg["synth"].dump() : std::string("{}"));

    ExperimentConfig xcfg;
    AttackSpec spec;
    std::uint64_t split_seed = 1;
    if (cfg.contains("experiment")) {
        const auto& x = cfg["experiment"];
        xcfg.test_fraction = x.value("test_fraction", xcfg.test_fraction);
        xcfg.threshold = x.value("threshold", xcfg.threshold);
        xcfg.fpr_target = x.value("fpr_target", xcfg.fpr_target);
        xcfg.attack_eval_count = x.value("attack_eval_count", xcfg.attack_eval_count);
        split_seed = x.value("split_seed", split_seed);
        if (x.contains("attack_phrase")) {
            spec.phrase = x["attack_phrase"].get<std::string>();
        }
    }
    if (cfg.contains("train")) {
        const auto& t = cfg["train"];
        xcfg.train.learning_rate = t.value("learning_rate", xcfg.train.learning_rate);
        xcfg.train.epochs = t.value("epochs", xcfg.train.epochs);
        xcfg.train.l2 = t.value("l2", xcfg.train.l2);
        xcfg.train.seed = t.value("seed", xcfg.train.seed);
    }
    QcConfig qcfg = cfg.contains("qc") ? qc_config_from_json_text(cfg["qc"]) : QcConfig{};
    DomainPolicy dp = cfg.value("domain_policy", std::string("auto")) == "review"
                          ? DomainPolicy::review
                          : DomainPolicy::automatic;
    xcfg.domain_policy = dp;
    xcfg.jobs = jobs;

    auto catalog = PatternCatalog::builtin();
    Manifest manifest;

    manifest.begin_step("synth", scfg.to_json());
    auto synth = generate(scfg);
    save_corpus(synth.corpus, at("corpus.jsonl"));
    write_text(at("truth.jsonl"), truth_to_jsonl(synth));
    manifest.add_output(at("corpus.jsonl"));
    manifest.add_output(at("truth.jsonl"));
    manifest.end_step();

    manifest.begin_step("scan", "builtin-catalog", {"corpus.jsonl"});
    auto table_raw = scan(synth.corpus, catalog, jobs);
    write_text(at("scan_raw.json"), render_report(table_raw, ReportFormat::json));
    write_text(at("scan_raw.md"), render_report(table_raw, ReportFormat::markdown));
    manifest.add_output(at("scan_raw.json"));
    manifest.add_output(at("scan_raw.md"));
    manifest.end_step();

    manifest.begin_step("cleanse", cfg.value("domain_policy", std::string("auto")),
                        {"corpus.jsonl"});
    auto cleansed = cleanse_corpus(synth.corpus, catalog, dp, jobs);
    save_corpus(cleansed.corpus, at("cleaned.jsonl"));
    write_text(at("outcomes.jsonl"), outcomes_to_jsonl(cleansed.outcomes));
    manifest.add_output(at("cleaned.jsonl"));
    manifest.add_output(at("outcomes.jsonl"));
    if (dp == DomainPolicy::review) {
        review_queue_export(cleansed.outcomes, at("review_queue.jsonl"));
        manifest.add_output(at("review_queue.jsonl"));
    }
    manifest.end_step();

    manifest.begin_step("rescan", "builtin-catalog", {"cleaned.jsonl"});
    auto table_clean = scan(cleansed.corpus, catalog, jobs);
    write_text(at("scan_cleaned.json"), render_report(table_clean, ReportFormat::json));
    manifest.add_output(at("scan_cleaned.json"));
    manifest.end_step();

    // A model trained on the contaminated corpus scores the cleaned corpus;
    // cleaned samples it still finds LLM-like are under-removal suspects.
    manifest.begin_step("train_contaminated_scorer",
                        ordered_json{{"learning_rate", xcfg.train.learning_rate},
                                     {"epochs", xcfg.train.epochs},
                                     {"l2", xcfg.train.l2},
                                     {"seed", xcfg.train.seed}}
                            .dump(),
                        {"corpus.jsonl"});
    auto scorer = train(corpus_examples(synth.corpus), xcfg.train);
    scorer.save(at("model_contaminated.json"));
    manifest.add_output(at("model_contaminated.json"));
    manifest.end_step();

    manifest.begin_step("score_cleaned", "model_contaminated",
                        {"model_contaminated.json", "cleaned.jsonl"});
    auto score_result = score_corpus(scorer, cleansed.corpus);
    write_text(at("scores.jsonl"), scores_to_jsonl(score_result));
    manifest.add_output(at("scores.jsonl"));
    manifest.end_step();

    manifest.begin_step("qc",
                        ordered_json{{"min_tokens", qcfg.min_tokens},
                                     {"max_token_ratio_dev", qcfg.max_token_ratio_dev},
                                     {"max_sentence_ratio_dev", qcfg.max_sentence_ratio_dev},
                                     {"detector_score_quantile",
                                      qcfg.detector_score_quantile}}
                            .dump(),
                        {"cleaned.jsonl", "scores.jsonl"});
    std::vector<QcFlag> flags;
    for (const Record& rec : cleansed.corpus.records) {
        if (auto flag = flag_over_removal(rec, qcfg)) flags.push_back(std::move(*flag));
    }
    {
        std::map<std::string, const Record*> by_id;
        for (const Record& rec : cleansed.corpus.records) by_id[rec.id] = &rec;
        std::vector<ScoredRecordRef> scored;
        for (const auto& s : score_result.scores) {
            scored.push_back({by_id.at(s.id), s.score});
        }
        for (auto& flag : flag_under_removal(scored, qcfg)) {
            flags.push_back(std::move(flag));
        }
    }
    write_text(at("flags.jsonl"), flags_to_jsonl(flags));
    export_for_recleaning(flags, cleansed.corpus, at("reclean_export.jsonl"));
    manifest.add_output(at("flags.jsonl"));
    manifest.add_output(at("reclean_export.jsonl"));
    manifest.end_step();

    manifest.begin_step("paired_experiment",
                        ordered_json{{"split_seed", split_seed},
                                     {"test_fraction", xcfg.test_fraction},
                                     {"attack_eval_count", xcfg.attack_eval_count},
                                     {"phrase", spec.phrase}}
                            .dump(),
                        {"corpus.jsonl"});
    auto experiment = paired_experiment(synth.corpus, catalog, spec, split_seed, xcfg);
    ordered_json xdoc;
    xdoc["attacked_raw"] =
        ordered_json::parse(render_report(experiment.attacked_raw, ReportFormat::json));
    xdoc["attacked_cleaned"] = ordered_json::parse(
        render_report(experiment.attacked_cleaned, ReportFormat::json));
    xdoc["unattacked"] =
        ordered_json::array({eval_to_json("raw_model", experiment.unattacked_raw),
                             eval_to_json("cleaned_model", experiment.unattacked_cleaned)});
    xdoc["n_train_records"] = experiment.n_train_records;
    xdoc["n_test_records"] = experiment.n_test_records;
    write_text(at("experiment.json"), xdoc.dump(2) + "\n");
    std::vector<std::pair<std::string, EvalResult>> rows{
        {"raw_model", experiment.unattacked_raw},
        {"cleaned_model", experiment.unattacked_cleaned}};
    std::string md = "# Paired spoofing experiment\n\n## Unattacked test set\n\n" +
                     render_report(rows, ReportFormat::markdown) +
                     "\n## Attacked human texts, raw-trained model\n\n" +
                     render_report(experiment.attacked_raw, ReportFormat::markdown) +
                     "\n## Attacked human texts, cleaned-trained model\n\n" +
                     render_report(experiment.attacked_cleaned, ReportFormat::markdown);
    write_text(at("experiment.md"), md);
    manifest.add_output(at("experiment.json"));
    manifest.add_output(at("experiment.md"));
    manifest.end_step();

    manifest.write(at("manifest.json"));
    std::cerr << "pipeline: outputs and manifest.json written to " << outdir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contamination forensics for generated-text benchmarks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::string synth_config, synth_out, synth_truth;
    std::optional<std::uint64_t> synth_seed;
    std::optional<std::size_t> synth_pairs;
    synth_cmd->add_option("--config", synth_config, "SynthConfig JSON");
    synth_cmd->add_option("--out", synth_out, "output corpus JSONL")->required();
    synth_cmd->add_option("--truth", synth_truth, "ground-truth JSONL");
    synth_cmd->add_option("--seed", synth_seed, "override rng seed");
    synth_cmd->add_option("--pairs", synth_pairs, "override pair count");

    auto* scan_cmd =
        app.add_subcommand("scan", "count contamination by llm_type x category");
    std::string scan_in, scan_format = "md", scan_out, scan_dump;
    int scan_jobs = 1;
    CatalogOptions scan_copts;
    scan_cmd->add_option("--in", scan_in, "corpus JSONL");
    scan_cmd->add_option("--dump-catalog", scan_dump,
                         "write the effective catalog JSON and continue");
    scan_cmd->add_option("--format", scan_format, "md|csv|json");
    scan_cmd->add_option("--out", scan_out, "output file (default stdout)");
    scan_cmd->add_option("--jobs", scan_jobs, "worker count");
    add_catalog_options(scan_cmd, scan_copts);

    auto* cleanse_cmd = app.add_subcommand("cleanse", "remove detected contamination");
    std::string cl_in, cl_out, cl_outcomes, cl_policy = "review", cl_queue, cl_apply;
    int cl_jobs = 1;
    CatalogOptions cl_copts;
    cleanse_cmd->add_option("--in", cl_in, "corpus JSONL")->required();
    cleanse_cmd->add_option("--out", cl_out, "cleaned corpus JSONL")->required();
    cleanse_cmd->add_option("--outcomes", cl_outcomes, "per-record outcome JSONL");
    cleanse_cmd->add_option("--domain-policy", cl_policy, "auto|review (default review)");
    cleanse_cmd->add_option("--review-queue", cl_queue, "export review proposals here");
    cleanse_cmd->add_option("--apply-review", cl_apply,
                            "apply an adjudicated review queue instead of cleansing");
    cleanse_cmd->add_option("--jobs", cl_jobs, "worker count");
    add_catalog_options(cleanse_cmd, cl_copts);

    auto* qc_cmd =
        app.add_subcommand("qc", "over/under-removal checks and re-clean exchange");
    std::string qc_in, qc_scores, qc_config, qc_flags, qc_reclean, qc_instruction;
    std::string qc_import, qc_import_flags, qc_out;
    qc_cmd->add_option("--in", qc_in, "cleaned corpus JSONL")->required();
    qc_cmd->add_option("--scores", qc_scores, "detector scores JSONL {id, score}");
    qc_cmd->add_option("--config", qc_config, "QC thresholds JSON");
    qc_cmd->add_option("--export-flags", qc_flags, "write flags JSONL");
    qc_cmd->add_option("--export-recleaning", qc_reclean,
                       "write re-clean exchange JSONL");
    qc_cmd->add_option("--instruction", qc_instruction, "re-clean instruction template");
    qc_cmd->add_option("--import-recleaned", qc_import, "returned re-clean JSONL");
    qc_cmd->add_option("--flags", qc_import_flags, "flags JSONL used for the export");
    qc_cmd->add_option("--out", qc_out, "output corpus for --import-recleaned");

    auto* train_cmd = app.add_subcommand("train", "fit the baseline linear detector");
    std::string tr_in, tr_model;
    TrainConfig tr_cfg;
    train_cmd->add_option("--in", tr_in, "labeled corpus JSONL")->required();
    train_cmd->add_option("--model", tr_model, "output model JSON")->required();
    train_cmd->add_option("--lr", tr_cfg.learning_rate, "learning rate");
    train_cmd->add_option("--epochs", tr_cfg.epochs, "full-batch epochs");
    train_cmd->add_option("--l2", tr_cfg.l2, "L2 strength");
    train_cmd->add_option("--seed", tr_cfg.seed, "hash seed");

    auto* score_cmd = app.add_subcommand("score", "score llm_text of every record");
    std::string sc_model, sc_in, sc_out;
    score_cmd->add_option("--model", sc_model, "model JSON")->required();
    score_cmd->add_option("--in", sc_in, "corpus JSONL")->required();
    score_cmd->add_option("--out", sc_out, "scores JSONL (default stdout)");

    auto* attr_cmd = app.add_subcommand("attribute", "exact per-token attributions");
    std::string at_model, at_text, at_file;
    std::size_t at_topk = 10;
    attr_cmd->add_option("--model", at_model, "model JSON")->required();
    attr_cmd->add_option("--text", at_text, "text to attribute");
    attr_cmd->add_option("--file", at_file, "read the text from a file");
    attr_cmd->add_option("--top-k", at_topk, "how many tokens to report");

    auto* attack_cmd =
        app.add_subcommand("attack", "spoof human texts with a phrase prefix");
    std::string ak_model, ak_phrase, ak_in, ak_report;
    double ak_threshold = 0.5;
    attack_cmd->add_option("--model", ak_model, "model JSON")->required();
    attack_cmd->add_option("--phrase", ak_phrase, "attack phrase (default built-in)");
    attack_cmd->add_option("--in", ak_in, "corpus JSONL with human_text")->required();
    attack_cmd->add_option("--report", ak_report, "write report JSON here");
    attack_cmd->add_option("--threshold", ak_threshold, "LLM decision threshold");

    auto* report_cmd = app.add_subcommand("report", "re-render a saved result");
    std::string rp_kind, rp_in, rp_format = "md", rp_out;
    report_cmd->add_option("--kind", rp_kind, "scan|attack|eval")->required();
    report_cmd->add_option("--in", rp_in, "result JSON")->required();
    report_cmd->add_option("--format", rp_format, "md|csv|json");
    report_cmd->add_option("--out", rp_out, "output file (default stdout)");

    auto* pipe_cmd = app.add_subcommand("pipeline", "run the full paired experiment");
    std::string pl_config, pl_outdir = "pipeline-out";
    int pl_jobs = 1;
    pipe_cmd->add_option("--config", pl_config, "pipeline config JSON")->required();
    pipe_cmd->add_option("--outdir", pl_outdir, "output directory");
    pipe_cmd->add_option("--jobs", pl_jobs, "worker count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    }

    try {
        if (synth_cmd->parsed()) {
            return run_synth(synth_config, synth_out, synth_truth, synth_seed,
                             synth_pairs);
        }
        if (scan_cmd->parsed()) {
            if (scan_in.empty() && scan_dump.empty()) {
                throw std::runtime_error("scan: need --in (or --dump-catalog)");
            }
            return run_scan(scan_in, scan_copts, scan_format, scan_out, scan_dump,
                            scan_jobs);
        }
        if (cleanse_cmd->parsed()) {
            return run_cleanse(cl_in, cl_out, cl_outcomes, cl_policy, cl_queue, cl_apply,
                               cl_copts, cl_jobs);
        }
        if (qc_cmd->parsed()) {
            return run_qc(qc_in, qc_scores, qc_config, qc_flags, qc_reclean,
                          qc_instruction, qc_import, qc_import_flags, qc_out);
        }
        if (train_cmd->parsed()) return run_train(tr_in, tr_model, tr_cfg);
        if (score_cmd->parsed()) return run_score(sc_model, sc_in, sc_out);
        if (attr_cmd->parsed()) {
            return run_attribute(at_model, at_text, at_file, at_topk);
        }
        if (attack_cmd->parsed()) {
            return run_attack(ak_model, ak_phrase, ak_in, ak_report, ak_threshold);
        }
        if (report_cmd->parsed()) return run_report(rp_kind, rp_in, rp_format, rp_out);
        if (pipe_cmd->parsed()) return run_pipeline(pl_config, pl_outdir, pl_jobs);
    } catch (const std::exception& e) {
        std::cerr << "decon: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
