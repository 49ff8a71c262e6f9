#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>

#include "cobalt/proc.hpp"
#include "cobalt/smt.hpp"
#include "smt_sexp.hpp"

namespace cobalt::smt {

namespace {

int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// RAII temp file holding the query text.
struct TempSmtFile {
    std::string path;

    explicit TempSmtFile(const std::string& contents) {
        char tmpl[] = "/tmp/cobalt_query_XXXXXX.smt2";
        int fd = mkstemps(tmpl, 5);
        if (fd < 0) throw InfraError("could not create temp .smt2 file");
        path = tmpl;
        ssize_t written = write(fd, contents.data(), contents.size());
        close(fd);
        if (written != static_cast<ssize_t>(contents.size())) {
            unlink(path.c_str());
            throw InfraError("short write to temp .smt2 file");
        }
    }
    ~TempSmtFile() { unlink(path.c_str()); }
};

std::string first_token_line(const std::string& text) {
    size_t start = 0;
    while (start < text.size()) {
        size_t eol = text.find('\n', start);
        std::string line = text.substr(start, eol == std::string::npos ? eol : eol - start);
        size_t a = line.find_first_not_of(" \t\r");
        if (a != std::string::npos) {
            size_t b = line.find_last_not_of(" \t\r");
            return line.substr(a, b - a + 1);
        }
        if (eol == std::string::npos) break;
        start = eol + 1;
    }
    return "";
}

void collect_model_values(const detail::Sexp& s, Witness& model) {
    if (s.is_atom) return;
    // (define-fun NAME () SORT VALUE)
    if (s.kids.size() == 5 && s.kids[0].is_atom && s.kids[0].atom == "define-fun" &&
        s.kids[1].is_atom && !s.kids[2].is_atom && s.kids[2].kids.empty()) {
        if (auto lit = detail::parse_bv_literal(s.kids[4])) {
            if (lit->second > 64)
                throw DomainError("model value wider than 64 bits for " + s.kids[1].atom);
            model[s.kids[1].atom] = static_cast<std::uint64_t>(lit->first);
            return;
        }
        throw DomainError("model value for " + s.kids[1].atom + " is not a bit-vector literal");
    }
    for (const auto& k : s.kids) collect_model_values(k, model);
}

}  // namespace

SolverVerdict solve_external(const Formula& f, const std::string& solver_command,
                             int timeout_ms) {
    const int64_t started = now_ms();
    const std::string text = emit_smtlib(f);
    TempSmtFile file(text);

    std::vector<std::string> argv = split_command(solver_command);
    if (argv.empty()) throw DomainError("empty solver command");
    argv.push_back(file.path);

    ProcessResult proc = run_process(argv, timeout_ms);

    SolverVerdict verdict;
    verdict.solver_id = argv[0].substr(argv[0].find_last_of('/') + 1);
    verdict.elapsed_ms = now_ms() - started;

    if (proc.timed_out) {
        verdict.outcome = Outcome::UNKNOWN;
        if (verdict.elapsed_ms < timeout_ms) verdict.elapsed_ms = timeout_ms;
        return verdict;
    }

    const std::string answer = first_token_line(proc.out);
    if (answer == "unsat") {
        verdict.outcome = Outcome::UNSAT;
        return verdict;
    }
    if (answer == "unknown") {
        verdict.outcome = Outcome::UNKNOWN;
        return verdict;
    }
    if (answer != "sat")
        throw InfraError("solver produced no sat/unsat/unknown answer (stdout: '" +
                         proc.out.substr(0, 200) + "', stderr: '" + proc.err.substr(0, 200) +
                         "')");

    // Parse every define-fun in whatever model wrapper the solver printed.
    Witness model;
    try {
        size_t after = proc.out.find('\n', proc.out.find("sat"));
        detail::SexpReader reader{std::string_view(proc.out).substr(
            after == std::string::npos ? proc.out.size() : after)};
        while (!reader.at_end()) collect_model_values(reader.next(), model);
    } catch (const DomainError& e) {
        throw InfraError(std::string("unparseable solver model: ") + e.what());
    }

    Witness witness;
    for (const auto& d : f.decls) {
        auto it = model.find(d.name);
        // Solvers may omit don't-care variables; default them to zero and let
        // verification arbitrate.
        witness[d.name] = it == model.end() ? 0 : it->second;
    }
    bool ok = false;
    try {
        ok = eval_concrete(f, witness);
    } catch (const DomainError& e) {
        throw InfraError(std::string("solver model failed evaluation: ") + e.what());
    }
    if (!ok)
        throw InfraError("solver answered sat but its model does not satisfy the formula");

    verdict.outcome = Outcome::SAT;
    verdict.witness = std::move(witness);
    return verdict;
}

SolverVerdict solve_external(const std::string& smtlib, const std::string& solver_command,
                             int timeout_ms) {
    // Re-parse the emitted subset so the mandatory witness check can run
    // against the actual query semantics.
    Formula f = parse_smtlib(smtlib);
    return solve_external(f, solver_command, timeout_ms);
}

}  // namespace cobalt::smt
