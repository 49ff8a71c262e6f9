#include "cobalt/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cobalt::report {

namespace {

std::string fmt_tenths(std::int64_t tenths) {
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

}  // namespace

CorpusReport build_leaderboard(const std::vector<pipeline::ArtifactResult>& results,
                               const std::vector<Artifact>& corpus) {
    if (corpus.empty()) throw DomainError("cannot build a leaderboard from an empty corpus");

    std::map<std::string, const Artifact*> by_id;
    for (const Artifact& a : corpus) {
        if (!by_id.emplace(a.artifact_id, &a).second)
            throw DomainError("duplicate artifact_id in corpus: " + a.artifact_id);
    }

    struct Acc {
        int total = 0, vulnerable = 0, crit = 0, high = 0, sat = 0;
        std::map<Category, std::pair<int, int>> per_category;  // total, vulnerable
    };
    std::map<std::string, Acc> models;

    for (const auto& r : results) {
        auto it = by_id.find(r.artifact_id);
        if (it == by_id.end())
            throw DomainError("result references artifact not in corpus: " + r.artifact_id);
        Acc& acc = models[it->second->model_id];
        acc.total++;
        if (r.vulnerable) acc.vulnerable++;
        for (const auto& f : r.findings) {
            if (f.severity.level == SeverityLevel::CRITICAL) acc.crit++;
            else if (f.severity.level == SeverityLevel::HIGH) acc.high++;
            if (f.status == FindingStatus::SOLVER_SAT) acc.sat++;
        }
        auto& [cat_total, cat_vuln] = acc.per_category[it->second->category];
        cat_total++;
        if (r.vulnerable) cat_vuln++;
    }

    CorpusReport out;
    std::int64_t rate_tenths_sum = 0;
    for (const auto& [model_id, acc] : models) {
        ModelReport row;
        row.model_id = model_id;
        row.total = acc.total;
        row.vulnerable = acc.vulnerable;
        const std::int64_t tenths = percent_tenths(acc.vulnerable, acc.total);
        rate_tenths_sum += tenths;
        row.rate = tenths_to_percent(tenths);
        row.crit_count = acc.crit;
        row.high_count = acc.high;
        row.solver_sat_count = acc.sat;
        row.grade = grade_from_rate(row.rate);
        out.rows.push_back(std::move(row));
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const ModelReport& a, const ModelReport& b) {
        if (a.rate != b.rate) return a.rate > b.rate;
        return a.model_id < b.model_id;
    });
    out.mean_rate = tenths_to_percent(
        round_half_up_div(rate_tenths_sum, static_cast<std::int64_t>(models.size())));

    // Category rate: mean over the models that have artifacts in the
    // category, of each model's one-decimal vulnerable rate there.
    std::map<Category, std::pair<std::int64_t, int>> cat_sum;  // tenths sum, model count
    for (const auto& [model_id, acc] : models) {
        (void)model_id;
        for (const auto& [cat, counts] : acc.per_category) {
            if (counts.first == 0) continue;
            auto& [sum, n] = cat_sum[cat];
            sum += percent_tenths(counts.second, counts.first);
            n++;
        }
    }
    for (const auto& [cat, acc] : cat_sum)
        out.category_rates[cat] = tenths_to_percent(round_half_up_div(acc.first, acc.second));
    return out;
}

OverlapReport compare_tools(const std::vector<pipeline::ArtifactResult>& results,
                            const std::vector<ToolFinding>& tool_findings) {
    if (results.empty()) throw DomainError("cannot compare tools over an empty result set");

    std::set<std::string> known, flagged, sat_bearing;
    for (const auto& r : results) {
        known.insert(r.artifact_id);
        if (r.vulnerable) flagged.insert(r.artifact_id);
        for (const auto& f : r.findings)
            if (f.status == FindingStatus::SOLVER_SAT) {
                sat_bearing.insert(r.artifact_id);
                break;
            }
    }

    std::vector<std::string> tool_order;
    std::map<std::string, std::set<std::string>> caught;
    std::set<std::string> union_caught;
    for (const auto& tf : tool_findings) {
        if (!known.count(tf.artifact_id))
            throw DomainError("tool finding references unknown artifact: " + tf.artifact_id);
        if (!caught.count(tf.tool_id)) tool_order.push_back(tf.tool_id);
        caught[tf.tool_id].insert(tf.artifact_id);
        union_caught.insert(tf.artifact_id);
    }

    OverlapReport out;
    out.total_artifacts = static_cast<int>(results.size());
    for (const auto& tool : tool_order) {
        ToolOverlapRow row;
        row.tool_id = tool;
        row.caught = static_cast<int>(caught[tool].size());
        row.rate = tenths_to_percent(percent_tenths(row.caught, out.total_artifacts));
        out.tools.push_back(std::move(row));
    }
    out.combined_caught = static_cast<int>(union_caught.size());
    out.combined_rate = tenths_to_percent(percent_tenths(out.combined_caught, out.total_artifacts));

    out.flagged_count = static_cast<int>(flagged.size());
    for (const auto& id : flagged)
        if (!union_caught.count(id)) out.pipeline_only++;
    out.pipeline_only_rate =
        out.flagged_count == 0
            ? 0.0
            : tenths_to_percent(percent_tenths(out.pipeline_only, out.flagged_count));

    out.sat_missed.total = static_cast<int>(sat_bearing.size());
    for (const auto& id : sat_bearing)
        if (!union_caught.count(id)) out.sat_missed.missed++;
    out.sat_missed.percentage =
        out.sat_missed.total == 0
            ? 0.0
            : tenths_to_percent(percent_tenths(out.sat_missed.missed, out.sat_missed.total));
    return out;
}

std::string render_leaderboard_md(const CorpusReport& r) {
    std::ostringstream md;
    md << "| Model | Vuln | CRIT | HIGH | SAT | Grade |\n";
    md << "|:--|--:|--:|--:|--:|:-:|\n";
    std::int64_t crit_sum = 0, high_sum = 0, sat_sum = 0, rate_sum = 0;
    for (const auto& row : r.rows) {
        const std::int64_t tenths = percent_tenths(row.vulnerable, row.total);
        rate_sum += tenths;
        crit_sum += row.crit_count;
        high_sum += row.high_count;
        sat_sum += row.solver_sat_count;
        md << "| " << row.model_id << " | " << fmt_tenths(tenths) << "% | " << row.crit_count
           << " | " << row.high_count << " | " << row.solver_sat_count << " | "
           << to_string(row.grade) << " |\n";
    }
    const auto n = static_cast<std::int64_t>(r.rows.size());
    if (n > 0) {
        md << "| Mean | " << fmt_tenths(round_half_up_div(rate_sum, n)) << "% | "
           << fmt_tenths(round_half_up_div(10 * crit_sum, n)) << " | "
           << fmt_tenths(round_half_up_div(10 * high_sum, n)) << " | "
           << fmt_tenths(round_half_up_div(10 * sat_sum, n)) << " | - |\n";
    }
    if (!r.category_rates.empty()) {
        md << "\n| Category | Rate |\n|:--|--:|\n";
        for (const auto& [cat, rate] : r.category_rates) {
            md << "| " << to_string(cat) << " | "
               << fmt_tenths(static_cast<std::int64_t>(round1(rate * 10.0))) << "% |\n";
        }
    }
    return md.str();
}

std::string render_overlap_md(const OverlapReport& r) {
    std::ostringstream md;
    md << "| Tool | Detection |\n|:--|--:|\n";
    for (const auto& row : r.tools) {
        md << "| " << row.tool_id << " | " << row.caught << "/" << r.total_artifacts << " ("
           << fmt_tenths(percent_tenths(row.caught, r.total_artifacts)) << "%) |\n";
    }
    md << "| Combined | " << r.combined_caught << "/" << r.total_artifacts << " ("
       << fmt_tenths(percent_tenths(r.combined_caught, r.total_artifacts)) << "%) |\n";
    md << "| Pipeline-only | " << r.pipeline_only << "/" << r.flagged_count << " ("
       << (r.flagged_count == 0 ? std::string("0.0")
                                : fmt_tenths(percent_tenths(r.pipeline_only, r.flagged_count)))
       << "%) |\n";
    md << "| Proven-missed | " << r.sat_missed.missed << "/" << r.sat_missed.total << " ("
       << (r.sat_missed.total == 0
               ? std::string("0.0")
               : fmt_tenths(percent_tenths(r.sat_missed.missed, r.sat_missed.total)))
       << "%) |\n";
    return md.str();
}

void to_json(json& j, const ModelReport& r) {
    j = json{{"model_id", r.model_id},
             {"total", r.total},
             {"vulnerable", r.vulnerable},
             {"rate", r.rate},
             {"crit_count", r.crit_count},
             {"high_count", r.high_count},
             {"solver_sat_count", r.solver_sat_count},
             {"grade", to_string(r.grade)}};
}

void to_json(json& j, const CorpusReport& r) {
    json cats = json::object();
    for (const auto& [cat, rate] : r.category_rates) cats[to_string(cat)] = rate;
    j = json{{"rows", r.rows}, {"mean_rate", r.mean_rate}, {"category_rates", std::move(cats)}};
}

void to_json(json& j, const ToolOverlapRow& r) {
    j = json{{"tool_id", r.tool_id}, {"caught", r.caught}, {"rate", r.rate}};
}

void to_json(json& j, const SatMissed& s) {
    j = json{{"missed", s.missed}, {"total", s.total}, {"percentage", s.percentage}};
}

void to_json(json& j, const OverlapReport& r) {
    j = json{{"total_artifacts", r.total_artifacts},
             {"tools", r.tools},
             {"combined_caught", r.combined_caught},
             {"combined_rate", r.combined_rate},
             {"flagged_count", r.flagged_count},
             {"pipeline_only", r.pipeline_only},
             {"pipeline_only_rate", r.pipeline_only_rate},
             {"sat_missed", r.sat_missed}};
}

void to_json(json& j, const ToolFinding& f) {
    j = json{{"tool_id", f.tool_id},
             {"artifact_id", f.artifact_id},
             {"rule_id", f.rule_id},
             {"line", nullptr}};
    if (f.line) j["line"] = *f.line;
}

void from_json(const json& j, ToolFinding& f) {
    f.tool_id = j.at("tool_id").get<std::string>();
    f.artifact_id = j.at("artifact_id").get<std::string>();
    f.rule_id = j.value("rule_id", std::string{});
    f.line.reset();
    if (j.contains("line") && !j["line"].is_null()) f.line = j["line"].get<int>();
}

std::vector<ToolFinding> tool_findings_from_json(const json& j) {
    if (!j.is_array()) throw DomainError("tool findings file must be a JSON array");
    std::vector<ToolFinding> out;
    for (const json& item : j) {
        ToolFinding f;
        from_json(item, f);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace cobalt::report
