#include "cobalt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "cobalt/cfront.hpp"
#include "cobalt/pyfront.hpp"
#include "cobalt/sha256.hpp"

namespace cobalt::pipeline {

std::string to_string(Backend b) {
    switch (b) {
        case Backend::BUILTIN: return "BUILTIN";
        case Backend::EXTERNAL: return "EXTERNAL";
    }
    throw DomainError("invalid Backend value");
}

Backend backend_from_string(const std::string& s) {
    if (s == "BUILTIN" || s == "builtin") return Backend::BUILTIN;
    if (s == "EXTERNAL" || s == "external") return Backend::EXTERNAL;
    throw DomainError("unknown backend: " + s);
}

void AnalysisConfig::validate() const {
    if (jobs < 1) throw DomainError("jobs must be >= 1, got " + std::to_string(jobs));
    if (timeout_ms <= 0)
        throw DomainError("timeout_ms must be positive, got " + std::to_string(timeout_ms));
    if (backend == Backend::EXTERNAL && solver_command.empty())
        throw DomainError("external backend requires a solver command");
}

std::string make_finding_id(const std::string& artifact_id, const std::string& detector_id,
                            int line) {
    return sha256_hex(artifact_id + "|" + detector_id + "|" + std::to_string(line))
        .substr(0, 16);
}

namespace {

Finding make_finding(const Artifact& a, const std::string& detector_id, CweId cwe, int line,
                     FindingStatus status, std::string evidence, json site) {
    Finding f;
    f.finding_id = make_finding_id(a.artifact_id, detector_id, line);
    f.artifact_id = a.artifact_id;
    f.detector_id = detector_id;
    f.cwe = cwe;
    f.line = line;
    f.status = status;
    f.severity = severity_from_cvss(cvss_score_for(cwe));
    f.evidence = std::move(evidence);
    f.site = std::move(site);
    return f;
}

void analyze_c(const Artifact& a, const AnalysisConfig& cfg, ArtifactResult& r) {
    const auto tokens = cfront::tokenize_c(a.source);
    auto sites = cfront::extract_c_sites(tokens, a.source, cfg.width.bits());
    for (auto& s : sites) {
        s.artifact_id = a.artifact_id;
        const json site_json = s;

        const bool solver_eligible =
            s.kind == cfront::SiteKind::ALLOC_ARITH || s.kind == cfront::SiteKind::CAST_SIGN;
        if (!solver_eligible) {
            r.findings.push_back(make_finding(a, s.detector_id, s.cwe, s.line,
                                              FindingStatus::PATTERN_MATCH, s.evidence,
                                              site_json));
            continue;
        }
        if (s.guard_found) continue;  // guarded sites count as clean
        if (s.low_confidence) {
            // The size expression rests on an assumed type size; report it,
            // but don't pretend a proof.
            r.findings.push_back(make_finding(a, s.detector_id, s.cwe, s.line,
                                              FindingStatus::PATTERN_MATCH, s.evidence,
                                              site_json));
            continue;
        }

        smt::Formula formula;
        if (s.kind == cfront::SiteKind::ALLOC_ARITH) {
            formula = encode::encode_overflow(*s.expr, cfg.width);
        } else {
            // Site expr is Cast(target_width, unsigned, Var(name)).
            const cfront::SizeExpr& inner = s.expr->kids[0];
            formula = encode::encode_sign_conversion(encode::Width(s.signed_width),
                                                     encode::Width(s.expr->cast_width),
                                                     inner.name);
        }
        const std::string smtlib = smt::emit_smtlib(formula);
        const smt::SolverVerdict verdict =
            cfg.backend == Backend::BUILTIN
                ? smt::solve_builtin(formula)
                : smt::solve_external(formula, cfg.solver_command, cfg.timeout_ms);

        if (verdict.outcome == smt::Outcome::UNSAT) continue;  // proven safe
        Finding f = make_finding(a, s.detector_id, s.cwe, s.line,
                                 verdict.outcome == smt::Outcome::SAT
                                     ? FindingStatus::SOLVER_SAT
                                     : FindingStatus::PATTERN_MATCH,
                                 s.evidence, site_json);
        f.smtlib = smtlib;
        if (verdict.outcome == smt::Outcome::SAT) f.witness = verdict.witness;
        r.findings.push_back(std::move(f));
    }
}

void analyze_py(const Artifact& a, ArtifactResult& r) {
    for (auto& s : pyfront::extract_py_sites(a.source)) {
        s.artifact_id = a.artifact_id;
        r.findings.push_back(make_finding(a, s.detector_id, s.cwe, s.line,
                                          FindingStatus::PATTERN_MATCH, s.evidence, json(s)));
    }
}

}  // namespace

ArtifactResult analyze_artifact(const Artifact& artifact, const AnalysisConfig& config) {
    config.validate();
    ArtifactResult r;
    r.artifact_id = artifact.artifact_id;
    r.model_id = artifact.model_id;
    r.prompt_id = artifact.prompt_id;
    r.category = artifact.category;
    r.language = artifact.language;
    r.prompt_variant = artifact.prompt_variant;

    switch (artifact.language) {
        case Language::C: analyze_c(artifact, config, r); break;
        case Language::PYTHON: analyze_py(artifact, r); break;
        default: throw DomainError("no frontend for artifact language");
    }
    r.vulnerable = !r.findings.empty();
    return r;
}

std::vector<CorpusEntry> load_manifest(const std::filesystem::path& corpus_root) {
    const auto manifest_path = corpus_root / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw DomainError("cannot open manifest: " + manifest_path.string());

    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DomainError("malformed manifest JSON: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw DomainError("manifest must be a JSON array of entries");

    std::vector<CorpusEntry> entries;
    std::vector<std::string> problems;
    std::set<std::string> seen_ids;
    for (size_t i = 0; i < doc.size(); i++) {
        const json& row = doc[i];
        const std::string label = "entry " + std::to_string(i);
        try {
            CorpusEntry e;
            e.artifact_id = row.at("artifact_id").get<std::string>();
            e.model_id = row.at("model_id").get<std::string>();
            e.prompt_id = row.at("prompt_id").get<std::string>();
            e.category = category_from_string(row.at("category").get<std::string>());
            e.language = language_from_string(row.at("language").get<std::string>());
            e.prompt_variant =
                prompt_variant_from_string(row.at("prompt_variant").get<std::string>());
            e.path = row.at("path").get<std::string>();
            if (e.artifact_id.empty()) throw DomainError("artifact_id is empty");
            if (e.path.empty()) throw DomainError("path is empty");
            if (!seen_ids.insert(e.artifact_id).second)
                throw DomainError("duplicate artifact_id '" + e.artifact_id + "'");
            entries.push_back(std::move(e));
        } catch (const std::exception& e) {
            problems.push_back(label + " (" + (row.contains("artifact_id") &&
                                                       row["artifact_id"].is_string()
                                                   ? row["artifact_id"].get<std::string>()
                                                   : "?") +
                               "): " + e.what());
        }
    }
    if (!problems.empty()) {
        std::string msg = "manifest has " + std::to_string(problems.size()) + " bad entries:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw DomainError(msg);
    }
    return entries;
}

Artifact load_corpus_artifact(const std::filesystem::path& corpus_root,
                              const CorpusEntry& entry) {
    const auto path = corpus_root / entry.path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InfraError("cannot read artifact file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();

    Artifact a;
    a.artifact_id = entry.artifact_id;
    a.model_id = entry.model_id;
    a.prompt_id = entry.prompt_id;
    a.category = entry.category;
    a.language = entry.language;
    a.source = buf.str();
    a.prompt_variant = entry.prompt_variant;
    return a;
}

std::vector<ArtifactResult> run_corpus(const std::filesystem::path& corpus_root,
                                       const AnalysisConfig& config) {
    config.validate();
    const std::vector<CorpusEntry> entries = load_manifest(corpus_root);
    std::vector<ArtifactResult> results(entries.size());

    // Workers pull indices from a shared counter and write into their own
    // slot, so the merged output never depends on scheduling.
    auto work = [&](size_t idx) {
        const CorpusEntry& e = entries[idx];
        try {
            results[idx] = analyze_artifact(load_corpus_artifact(corpus_root, e), config);
        } catch (const std::exception& ex) {
            ArtifactResult r;
            r.artifact_id = e.artifact_id;
            r.model_id = e.model_id;
            r.prompt_id = e.prompt_id;
            r.category = e.category;
            r.language = e.language;
            r.prompt_variant = e.prompt_variant;
            r.error = ex.what();
            results[idx] = std::move(r);
        }
    };

    const int jobs =
        std::min(config.jobs, static_cast<int>(std::max<std::size_t>(entries.size(), 1)));
    if (jobs <= 1) {
        for (size_t i = 0; i < entries.size(); i++) work(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; t++)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < entries.size(); i = next.fetch_add(1))
                    work(i);
            });
        for (auto& th : pool) th.join();
    }

    std::stable_sort(results.begin(), results.end(),
                     [](const ArtifactResult& a, const ArtifactResult& b) {
                         if (a.model_id != b.model_id) return a.model_id < b.model_id;
                         if (a.prompt_id != b.prompt_id) return a.prompt_id < b.prompt_id;
                         return a.artifact_id < b.artifact_id;
                     });
    return results;
}

void to_json(json& j, const Finding& f) {
    j = json{{"finding_id", f.finding_id},
             {"artifact_id", f.artifact_id},
             {"detector_id", f.detector_id},
             {"cwe", f.cwe.value()},
             {"line", f.line},
             {"status", to_string(f.status)},
             {"severity", f.severity},
             {"witness", nullptr},
             {"smtlib", nullptr},
             {"evidence", f.evidence},
             {"site", f.site}};
    if (f.witness) {
        json w = json::object();
        for (const auto& [name, value] : *f.witness) w[name] = value;
        j["witness"] = std::move(w);
    }
    if (f.smtlib) j["smtlib"] = *f.smtlib;
}

void from_json(const json& j, Finding& f) {
    f.finding_id = j.at("finding_id").get<std::string>();
    f.artifact_id = j.at("artifact_id").get<std::string>();
    f.detector_id = j.at("detector_id").get<std::string>();
    f.cwe = CweId(j.at("cwe").get<int>());
    f.line = j.at("line").get<int>();
    f.status = finding_status_from_string(j.at("status").get<std::string>());
    from_json(j.at("severity"), f.severity);
    f.witness.reset();
    if (j.contains("witness") && !j["witness"].is_null()) {
        smt::Witness w;
        for (const auto& [name, value] : j["witness"].items())
            w[name] = value.get<std::uint64_t>();
        f.witness = std::move(w);
    }
    f.smtlib.reset();
    if (j.contains("smtlib") && !j["smtlib"].is_null())
        f.smtlib = j["smtlib"].get<std::string>();
    f.evidence = j.at("evidence").get<std::string>();
    f.site = j.value("site", json::object());
}

void to_json(json& j, const ArtifactResult& r) {
    j = json{{"artifact_id", r.artifact_id},
             {"model_id", r.model_id},
             {"prompt_id", r.prompt_id},
             {"category", to_string(r.category)},
             {"language", to_string(r.language)},
             {"prompt_variant", to_string(r.prompt_variant)},
             {"findings", r.findings},
             {"vulnerable", r.vulnerable}};
    if (r.error) j["error"] = *r.error;
}

void from_json(const json& j, ArtifactResult& r) {
    r.artifact_id = j.at("artifact_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.prompt_id = j.at("prompt_id").get<std::string>();
    r.category = category_from_string(j.at("category").get<std::string>());
    r.language = language_from_string(j.at("language").get<std::string>());
    r.prompt_variant = prompt_variant_from_string(j.at("prompt_variant").get<std::string>());
    r.findings.clear();
    for (const json& fj : j.at("findings")) {
        Finding f;
        from_json(fj, f);
        r.findings.push_back(std::move(f));
    }
    r.vulnerable = j.at("vulnerable").get<bool>();
    r.error.reset();
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
}

json results_to_json(const std::vector<ArtifactResult>& results) {
    json arr = json::array();
    for (const auto& r : results) {
        json item;
        to_json(item, r);
        arr.push_back(std::move(item));
    }
    return arr;
}

std::vector<ArtifactResult> results_from_json(const json& j) {
    if (!j.is_array()) throw DomainError("results file must be a JSON array");
    std::vector<ArtifactResult> out;
    for (const json& item : j) {
        ArtifactResult r;
        from_json(item, r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace cobalt::pipeline
