#include "decon/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace decon {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr Category kCategoryOrder[] = {Category::rejection, Category::prompt,
                                       Category::beginning, Category::domain,
                                       Category::assistant};

std::string fixed(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

ordered_json eval_to_json(const EvalResult& r) {
    ordered_json obj;
    obj["roc_auc"] = r.roc_auc;
    obj["f1"] = r.f1;
    obj["accuracy"] = r.accuracy;
    obj["tpr_at_fpr"] = r.tpr_at_fpr;
    obj["fpr_target"] = r.fpr_target;
    obj["n"] = r.n;
    obj["tpr_small_sample"] = r.tpr_small_sample;
    return obj;
}

ordered_json attack_to_json(const AttackReport& r) {
    ordered_json obj;
    obj["n_evaluated"] = r.n_evaluated;
    obj["predicted_human"] = r.predicted_human;
    obj["predicted_llm"] = r.predicted_llm;
    obj["accuracy_on_attacked"] = r.accuracy_on_attacked;
    obj["threshold"] = r.threshold;
    obj["phrase"] = r.phrase;
    return obj;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "md" || s == "markdown") return ReportFormat::markdown;
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw std::invalid_argument("unknown report format: " + s);
}

std::string format_count(std::uint64_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    int pos = 0;
    for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
        out.push_back(digits[i]);
        if (++pos % 3 == 0 && i > 0) out.push_back(',');
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string render_report(const ContaminationTable& table, ReportFormat format) {
    const std::vector<std::string> llms = table_llm_order(table);

    if (format == ReportFormat::json) {
        ordered_json doc;
        ordered_json rows = ordered_json::array();
        for (const std::string& llm : llms) {
            for (Category cat : kCategoryOrder) {
                ordered_json row;
                row["llm_type"] = llm;
                row["category"] = category_name(cat);
                row["count"] = table.count(llm, cat);
                rows.push_back(std::move(row));
            }
        }
        doc["rows"] = std::move(rows);
        ordered_json per_llm;
        for (const std::string& llm : llms) {
            auto it = table.records_per_llm.find(llm);
            per_llm[llm] = it == table.records_per_llm.end() ? 0 : it->second;
        }
        doc["records_per_llm"] = std::move(per_llm);
        doc["total"] = table.total;
        doc["corpus_size"] = table.corpus_size;
        return doc.dump(2) + "\n";
    }

    std::ostringstream out;
    if (format == ReportFormat::csv) {
        out << "llm_type,category,count\n";
        for (const std::string& llm : llms) {
            for (Category cat : kCategoryOrder) {
                out << llm << ',' << category_name(cat) << ','
                    << table.count(llm, cat) << '\n';
            }
        }
        out << "total,," << table.total << '\n';
        out << "corpus_size,," << table.corpus_size << '\n';
        return out.str();
    }

    out << "| llm_type | category | count |\n";
    out << "|---|---|---:|\n";
    for (const std::string& llm : llms) {
        for (Category cat : kCategoryOrder) {
            out << "| " << llm << " | " << category_name(cat) << " | "
                << format_count(table.count(llm, cat)) << " |\n";
        }
    }
    out << "\nTotal contaminated: " << format_count(table.total)
        << " (total entries: " << format_count(table.corpus_size) << ")\n";
    return out.str();
}

std::string render_report(const AttackReport& report, ReportFormat format) {
    if (format == ReportFormat::json) {
        return attack_to_json(report).dump(2) + "\n";
    }
    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "n_evaluated,predicted_human,predicted_llm,accuracy_on_attacked\n";
        out << report.n_evaluated << ',' << report.predicted_human << ','
            << report.predicted_llm << ',' << fixed(report.accuracy_on_attacked)
            << '\n';
        return out.str();
    }
    std::ostringstream out;
    out << "| prediction | count |\n|---|---:|\n";
    out << "| Human | " << format_count(report.predicted_human) << " |\n";
    out << "| LLM | " << format_count(report.predicted_llm) << " |\n";
    out << "\nAttacked human texts: " << format_count(report.n_evaluated)
        << ", accuracy " << fixed(report.accuracy_on_attacked)
        << " at threshold " << fixed(report.threshold, 2) << "\n";
    return out.str();
}

std::string render_report(const std::vector<std::pair<std::string, EvalResult>>& rows,
                          ReportFormat format) {
    if (format == ReportFormat::json) {
        ordered_json doc = ordered_json::array();
        for (const auto& [name, r] : rows) {
            ordered_json obj = eval_to_json(r);
            ordered_json entry;
            entry["name"] = name;
            entry.update(obj);
            doc.push_back(std::move(entry));
        }
        return doc.dump(2) + "\n";
    }
    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "name,roc_auc,f1,accuracy,tpr_at_fpr,fpr_target,n\n";
        for (const auto& [name, r] : rows) {
            out << name << ',' << fixed(r.roc_auc) << ',' << fixed(r.f1) << ','
                << fixed(r.accuracy) << ',' << fixed(r.tpr_at_fpr) << ','
                << r.fpr_target << ',' << r.n << '\n';
        }
        return out.str();
    }
    std::ostringstream out;
    out << "| name | roc_auc | f1 | accuracy | tpr@fpr | n |\n";
    out << "|---|---:|---:|---:|---:|---:|\n";
    for (const auto& [name, r] : rows) {
        out << "| " << name << " | " << fixed(r.roc_auc) << " | " << fixed(r.f1)
            << " | " << fixed(r.accuracy) << " | " << fixed(r.tpr_at_fpr);
        if (r.tpr_small_sample) out << "*";
        out << " | " << r.n << " |\n";
    }
    bool any_small = false;
    for (const auto& [name, r] : rows) any_small |= r.tpr_small_sample;
    if (any_small) {
        out << "\n\\* fewer negatives than 1/fpr_target; "
               "tpr@fpr is a zero-FPR reading\n";
    }
    return out.str();
}

}  // namespace decon
