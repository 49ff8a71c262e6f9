#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "cobalt/core.hpp"
#include "cobalt/harness.hpp"
#include "cobalt/pipeline.hpp"
#include "cobalt/poc.hpp"
#include "cobalt/report.hpp"

namespace {

using namespace cobalt;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DomainError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InfraError("cannot write " + path.string());
    return os;
}

// Options shared by every solver-running subcommand; names double as the
// config-file keys.
struct SolverOpts {
    int width = 32;
    std::string backend = "builtin";
    std::string solver_cmd;
    int timeout_ms = 5000;
    int jobs = 1;
    std::string config_path;
};

void add_solver_opts(CLI::App* cmd, SolverOpts& o, bool with_jobs) {
    cmd->add_option("--width", o.width, "Analysis bit width (32 or 64)");
    cmd->add_option("--backend", o.backend, "Solver backend: builtin or external");
    cmd->add_option("--solver-cmd", o.solver_cmd,
                    "External solver command, split on whitespace");
    cmd->add_option("--timeout", o.timeout_ms, "Per-query solver timeout in milliseconds");
    if (with_jobs) cmd->add_option("--jobs", o.jobs, "Parallel analysis workers");
    cmd->add_option("--config", o.config_path,
                    "File of key=value lines using the option names above (width, "
                    "backend, solver-cmd, timeout, jobs); command-line flags win");
}

std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int config_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw DomainError("config value for '" + key + "' is not an integer: " + value);
    }
}

// Flat key=value config, applied only where the command line stayed silent.
void apply_config_file(const CLI::App* cmd, SolverOpts& o, bool with_jobs) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw DomainError("cannot open config file: " + o.config_path);

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        const std::string text = strip(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(lineno) +
                              ": expected key=value, got: " + text);
        const std::string key = strip(text.substr(0, eq));
        std::string value = strip(text.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);

        if (key == "width") {
            if (cmd->count("--width") == 0) o.width = config_int(key, value);
        } else if (key == "backend") {
            if (cmd->count("--backend") == 0) o.backend = value;
        } else if (key == "solver-cmd") {
            if (cmd->count("--solver-cmd") == 0) o.solver_cmd = value;
        } else if (key == "timeout") {
            if (cmd->count("--timeout") == 0) o.timeout_ms = config_int(key, value);
        } else if (key == "jobs" && with_jobs) {
            if (cmd->count("--jobs") == 0) o.jobs = config_int(key, value);
        } else {
            throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" +
                              key + "'");
        }
    }
}

pipeline::AnalysisConfig make_config(const SolverOpts& o) {
    pipeline::AnalysisConfig cfg;
    cfg.width = encode::Width(o.width);
    cfg.backend = pipeline::backend_from_string(o.backend);
    cfg.solver_command = o.solver_cmd;
    cfg.timeout_ms = o.timeout_ms;
    cfg.jobs = o.jobs;
    cfg.validate();
    return cfg;
}

Language language_from_flag(const std::string& lang) {
    if (lang == "c") return Language::C;
    if (lang == "py" || lang == "python") return Language::PYTHON;
    throw DomainError("--lang must be 'c' or 'py', got '" + lang + "'");
}

pipeline::Finding find_finding(const std::vector<pipeline::ArtifactResult>& results,
                               const std::string& finding_id, std::string* artifact_id) {
    for (const auto& r : results)
        for (const auto& f : r.findings)
            if (f.finding_id == finding_id) {
                *artifact_id = r.artifact_id;
                return f;
            }
    throw DomainError("no finding with id '" + finding_id + "' in the report");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proves exploitable vulnerabilities in generated code via "
                 "bit-vector solving, and benchmarks models on the results"};
    app.require_subcommand(1);
    int exit_code = 0;

    // ---- analyze -----------------------------------------------------------
    {
        auto opts = std::make_shared<SolverOpts>();
        auto file = std::make_shared<std::string>();
        auto lang = std::make_shared<std::string>();
        auto gate = std::make_shared<bool>(false);
        auto* cmd = app.add_subcommand("analyze", "Analyze one source file");
        cmd->add_option("file", *file, "Source file to analyze")->required();
        cmd->add_option("--lang", *lang, "Source language: c or py")->required();
        cmd->add_flag("--gate", *gate, "Exit 1 when any finding is reported");
        add_solver_opts(cmd, *opts, false);
        cmd->callback([cmd, opts, file, lang, gate, &exit_code] {
            apply_config_file(cmd, *opts, false);
            Artifact a;
            a.artifact_id = std::filesystem::path(*file).stem().string();
            a.language = language_from_flag(*lang);
            a.source = read_text_file(*file);
            const auto result = pipeline::analyze_artifact(a, make_config(*opts));
            json j;
            pipeline::to_json(j, result);
            print_json(j);
            if (*gate && !result.findings.empty()) exit_code = 1;
        });
    }

    // ---- run ---------------------------------------------------------------
    {
        auto opts = std::make_shared<SolverOpts>();
        auto corpus = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto* cmd = app.add_subcommand("run", "Analyze a whole corpus");
        cmd->add_option("corpus", *corpus, "Corpus root containing manifest.json")->required();
        cmd->add_option("--out", *out, "Results file to write")->required();
        add_solver_opts(cmd, *opts, true);
        cmd->callback([cmd, opts, corpus, out] {
            apply_config_file(cmd, *opts, true);
            const auto results = pipeline::run_corpus(*corpus, make_config(*opts));
            {
                auto os = open_output(*out);
                os << pipeline::results_to_json(results).dump(2) << "\n";
            }
            int vulnerable = 0, errors = 0;
            for (const auto& r : results) {
                if (r.vulnerable) vulnerable++;
                if (r.error) errors++;
            }
            print_json(json{{"artifacts", results.size()},
                            {"vulnerable", vulnerable},
                            {"errors", errors},
                            {"out", *out}});
        });
    }

    // ---- leaderboard -------------------------------------------------------
    {
        auto report_path = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("json");
        auto* cmd = app.add_subcommand("leaderboard", "Aggregate results into model grades");
        cmd->add_option("report", *report_path, "Results file from 'run'")->required();
        cmd->add_option("--format", *format, "Output format: json or md");
        cmd->callback([report_path, format] {
            const auto results = pipeline::results_from_json(read_json_file(*report_path));
            std::vector<Artifact> corpus;
            for (const auto& r : results) {
                Artifact a;
                a.artifact_id = r.artifact_id;
                a.model_id = r.model_id;
                a.prompt_id = r.prompt_id;
                a.category = r.category;
                a.language = r.language;
                a.prompt_variant = r.prompt_variant;
                corpus.push_back(std::move(a));
            }
            const auto board = report::build_leaderboard(results, corpus);
            if (*format == "md") {
                std::cout << report::render_leaderboard_md(board);
            } else if (*format == "json") {
                json j;
                report::to_json(j, board);
                print_json(j);
            } else {
                throw DomainError("--format must be json or md, got '" + *format + "'");
            }
        });
    }

    // ---- compare -----------------------------------------------------------
    {
        auto report_path = std::make_shared<std::string>();
        auto tools_path = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("json");
        auto* cmd =
            app.add_subcommand("compare", "Overlap between pipeline findings and other tools");
        cmd->add_option("report", *report_path, "Results file from 'run'")->required();
        cmd->add_option("tools", *tools_path, "Normalized tool findings (JSON array)")
            ->required();
        cmd->add_option("--format", *format, "Output format: json or md");
        cmd->callback([report_path, tools_path, format] {
            const auto results = pipeline::results_from_json(read_json_file(*report_path));
            const auto tool_findings =
                report::tool_findings_from_json(read_json_file(*tools_path));
            const auto overlap = report::compare_tools(results, tool_findings);
            if (*format == "md") {
                std::cout << report::render_overlap_md(overlap);
            } else if (*format == "json") {
                json j;
                report::to_json(j, overlap);
                print_json(j);
            } else {
                throw DomainError("--format must be json or md, got '" + *format + "'");
            }
        });
    }

    // ---- poc ---------------------------------------------------------------
    {
        auto report_path = std::make_shared<std::string>();
        auto finding_id = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto corpus = std::make_shared<std::string>();
        auto run = std::make_shared<bool>(false);
        auto* cmd = app.add_subcommand("poc", "Emit (and optionally run) a proof harness");
        cmd->add_option("--report", *report_path, "Results file from 'run'")->required();
        cmd->add_option("--finding", *finding_id, "Finding id to operationalize")->required();
        cmd->add_option("--out", *out, "Harness source file to write")->required();
        cmd->add_option("--corpus", *corpus,
                        "Corpus root, to embed the artifact source in the harness");
        cmd->add_flag("--run", *run, "Compile with sanitizers, execute, and triage");
        cmd->callback([report_path, finding_id, out, corpus, run] {
            const auto results = pipeline::results_from_json(read_json_file(*report_path));
            std::string artifact_id;
            const auto finding = find_finding(results, *finding_id, &artifact_id);

            Artifact artifact;
            artifact.artifact_id = artifact_id;
            artifact.language = Language::C;
            if (!corpus->empty()) {
                for (const auto& entry : pipeline::load_manifest(*corpus)) {
                    if (entry.artifact_id == artifact_id) {
                        artifact = pipeline::load_corpus_artifact(*corpus, entry);
                        break;
                    }
                }
            }

            const std::string source = poc::emit_poc_c(finding, artifact);
            open_output(*out) << source;
            if (*run) {
                auto workdir = std::filesystem::path(*out).parent_path();
                if (workdir.empty()) workdir = ".";
                const auto outcome = poc::compile_and_run(finding, artifact, workdir);
                json j;
                poc::to_json(j, outcome);
                print_json(j);
            } else {
                print_json(json{{"finding_id", *finding_id}, {"out", *out}});
            }
        });
    }

    // ---- generate ----------------------------------------------------------
    {
        auto prompts = std::make_shared<std::string>();
        auto provider = std::make_shared<std::string>();
        auto mode = std::make_shared<std::string>();
        auto store = std::make_shared<std::string>();
        auto* cmd = app.add_subcommand("generate", "Generate artifacts from prompts");
        cmd->add_option("--prompts", *prompts, "Prompt specs (JSON array)")->required();
        cmd->add_option("--provider", *provider, "Provider config (JSON)")->required();
        cmd->add_option("--mode", *mode, "live or replay")->required();
        cmd->add_option("--store", *store, "Replay store directory")->required();
        cmd->callback([prompts, provider, mode, store] {
            const auto result = harness::generate_artifacts(
                harness::load_prompts(*prompts), harness::load_provider_config(*provider),
                harness::mode_from_string(*mode), *store);
            json j;
            harness::to_json(j, result);
            print_json(j);
        });
    }

    // ---- review ------------------------------------------------------------
    {
        auto report_path = std::make_shared<std::string>();
        auto provider = std::make_shared<std::string>();
        auto mode = std::make_shared<std::string>();
        auto store = std::make_shared<std::string>();
        auto corpus = std::make_shared<std::string>();
        auto* cmd = app.add_subcommand(
            "review", "Ask each generating model to review its proven-vulnerable code");
        cmd->add_option("--report", *report_path, "Results file from 'run'")->required();
        cmd->add_option("--provider", *provider, "Provider config (JSON)")->required();
        cmd->add_option("--mode", *mode, "live or replay")->required();
        cmd->add_option("--store", *store, "Replay store directory")->required();
        cmd->add_option("--corpus", *corpus, "Corpus root, to include sources in prompts");
        cmd->callback([report_path, provider, mode, store, corpus] {
            const auto results = pipeline::results_from_json(read_json_file(*report_path));
            harness::SourceLookup lookup;
            if (!corpus->empty()) {
                const std::string root = *corpus;
                lookup = [root](const std::string& artifact_id) -> std::optional<std::string> {
                    for (const auto& entry : pipeline::load_manifest(root))
                        if (entry.artifact_id == artifact_id)
                            return pipeline::load_corpus_artifact(root, entry).source;
                    return std::nullopt;
                };
            }
            const auto review = harness::self_review(
                results, harness::load_provider_config(*provider),
                harness::mode_from_string(*mode), *store, lookup);
            json j;
            harness::to_json(j, review);
            print_json(j);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InfraError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
