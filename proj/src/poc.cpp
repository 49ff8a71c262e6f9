#include "cobalt/poc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "cobalt/cfront.hpp"
#include "cobalt/proc.hpp"
#include "cobalt/sha256.hpp"
#include "cobalt/smt.hpp"

namespace cobalt::poc {

std::string to_string(Fault f) {
    switch (f) {
        case Fault::HEAP_BUFFER_OVERFLOW: return "HEAP_BUFFER_OVERFLOW";
        case Fault::ALLOC_SIZE_TOO_BIG: return "ALLOC_SIZE_TOO_BIG";
        case Fault::OOB_READ: return "OOB_READ";
        case Fault::NONE: return "NONE";
        case Fault::BLOCKED: return "BLOCKED";
    }
    throw DomainError("invalid Fault value");
}

namespace {

std::string utype(int w) { return "uint" + std::to_string(w) + "_t"; }
std::string itype(int w) { return "int" + std::to_string(w) + "_t"; }
std::string uconst(int w) { return "UINT" + std::to_string(w) + "_C"; }

// The size arithmetic is rendered at 128 bits so the harness sees the exact
// mathematical value before deciding what the artifact would request.
std::string render_expr128(const cfront::SizeExpr& e) {
    using K = cfront::SizeExpr::Kind;
    switch (e.kind) {
        case K::Var: return "(unsigned __int128)" + e.name;
        case K::Const:
        case K::SizeOf:
            return "(unsigned __int128)UINT64_C(" + std::to_string(e.value) + ")";
        case K::Mul:
            return "(" + render_expr128(e.kids[0]) + " * " + render_expr128(e.kids[1]) + ")";
        case K::Add:
            return "(" + render_expr128(e.kids[0]) + " + " + render_expr128(e.kids[1]) + ")";
        case K::Cast:
            if (e.cast_width >= 64) return render_expr128(e.kids[0]);
            return "(unsigned __int128)(" + utype(e.cast_width) + ")" +
                   render_expr128(e.kids[0]);
    }
    throw DomainError("invalid SizeExpr kind");
}

// Artifact source rides along for review; "*/" must not end our comment.
std::string comment_block(const std::string& source) {
    std::string safe;
    safe.reserve(source.size());
    for (size_t i = 0; i < source.size(); i++) {
        if (source[i] == '*' && i + 1 < source.size() && source[i + 1] == '/') {
            safe += "* /";
            i++;
        } else {
            safe += source[i];
        }
    }
    std::ostringstream out;
    std::istringstream in(safe);
    std::string line;
    while (std::getline(in, line)) out << " *   " << line << "\n";
    return out.str();
}

std::string harness_header(const pipeline::Finding& f, const Artifact& a,
                           const std::string& summary) {
    std::ostringstream c;
    c << "/* Proof harness for finding " << f.finding_id << " (" << f.detector_id << ", line "
      << f.line << " of artifact " << a.artifact_id << ").\n";
    c << " *\n";
    c << " * " << summary << "\n";
    c << " *\n";
    c << " * Build: gcc -fsanitize=address,undefined -g -O1 -o poc poc.c && ./poc\n";
    if (!a.source.empty()) {
        c << " *\n";
        c << " * --- artifact under test "
          << "--------------------------------------------\n";
        c << comment_block(a.source);
        c << " * ------------------------------------------------------------"
          << "---------\n";
    }
    c << " */\n\n";
    c << "#include <stdint.h>\n#include <stdio.h>\n#include <stdlib.h>\n\n";
    return c.str();
}

std::string emit_alloc_arith(const pipeline::Finding& f, const Artifact& a, int w,
                             const cfront::SizeExpr& expr) {
    std::ostringstream c;
    c << harness_header(
        f, a,
        "The allocation size below wraps at " + std::to_string(w) +
            " bits under the recorded solver witness; the harness replays the\n"
            " * computation, allocates what the artifact would, and stores through\n"
            " * the result the way the artifact does.");
    c << "int main(void) {\n";
    for (const auto& [name, value] : *f.witness)
        c << "    " << utype(w) << " " << name << " = " << uconst(w) << "(" << value
          << "); /* solver witness */\n";
    c << "\n    unsigned __int128 exact = " << render_expr128(expr) << ";\n";
    if (w < 64) {
        c << "    " << utype(w) << " alloc_size = (" << utype(w)
          << ")exact; /* the " << w << "-bit wraparound */\n";
    } else {
        c << "    size_t alloc_size = exact > (unsigned __int128)SIZE_MAX\n"
          << "                            ? SIZE_MAX\n"
          << "                            : (size_t)exact; /* beyond any sane "
             "allocation */\n";
    }
    c << "    printf(\"requesting %llu bytes\\n\", (unsigned long long)alloc_size);\n\n";
    c << "    unsigned char *buf = (unsigned char *)malloc((size_t)alloc_size);\n";
    c << "    if (!buf) {\n";
    c << "        puts(\"allocation refused\");\n";
    c << "        return 1;\n";
    c << "    }\n";
    c << "    uint32_t *slots = (uint32_t *)buf;\n";
    c << "    for (int i = 0; i < 8; i++) {\n";
    c << "        slots[i] = (uint32_t)i; /* WRITE of size 4 past the short buffer */\n";
    c << "    }\n";
    c << "    printf(\"wrote 8 slots into %llu bytes\\n\", (unsigned long long)alloc_size);\n";
    c << "    free(buf);\n";
    c << "    return 0;\n";
    c << "}\n";
    return c.str();
}

std::string emit_cast_sign(const pipeline::Finding& f, const Artifact& a, int vw) {
    const auto& [name, value] = *f.witness->begin();
    const std::uint64_t masked =
        vw >= 64 ? value : (value & ((std::uint64_t{1} << vw) - 1));
    std::ostringstream c;
    c << harness_header(
        f, a,
        "A negative " + std::to_string(vw) +
            "-bit count reaches an unsigned size parameter; converted to\n"
            " * size_t it becomes an enormous request the allocator rejects.");
    c << "int main(void) {\n";
    c << "    " << itype(vw) << " " << name << " = (" << itype(vw) << ")" << uconst(vw) << "("
      << masked << "); /* solver witness: negative as signed */\n";
    c << "    size_t request = (size_t)" << name
      << "; /* the artifact's signed-to-unsigned conversion */\n";
    c << "    printf(\"count %lld becomes a request for %llu bytes\\n\",\n";
    c << "           (long long)" << name << ", (unsigned long long)request);\n\n";
    c << "    void *buf = malloc(request); /* allocation-size-too-big under ASan */\n";
    c << "    if (!buf) {\n";
    c << "        puts(\"allocation refused\");\n";
    c << "        return 1;\n";
    c << "    }\n";
    c << "    free(buf);\n";
    c << "    return 0;\n";
    c << "}\n";
    return c.str();
}

}  // namespace

std::string emit_poc_c(const pipeline::Finding& finding, const Artifact& artifact) {
    if (finding.status != FindingStatus::SOLVER_SAT)
        throw DomainError("PoC emission requires a solver-proven finding, got " +
                          to_string(finding.status));
    if (artifact.language != Language::C)
        throw DomainError("C harness emission requires a C artifact");
    if (!finding.witness || finding.witness->empty())
        throw DomainError("finding " + finding.finding_id + " carries no witness");
    if (!finding.smtlib)
        throw DomainError("finding " + finding.finding_id + " carries no solver query");

    const smt::Formula formula = smt::parse_smtlib(*finding.smtlib);
    if (formula.decls.empty())
        throw DomainError("solver query declares no variables");

    const std::string kind = finding.site.value("kind", std::string{});
    if (kind == "ALLOC_ARITH") {
        if (!finding.site.contains("expr") || finding.site["expr"].is_null())
            throw DomainError("allocation finding has no size expression");
        cfront::SizeExpr expr;
        cfront::from_json(finding.site["expr"], expr);
        return emit_alloc_arith(finding, artifact, formula.decls.front().width, expr);
    }
    if (kind == "CAST_SIGN") {
        const int vw = finding.site.value("signed_width", 0);
        if (vw != 8 && vw != 16 && vw != 32 && vw != 64)
            throw DomainError("sign-conversion finding has no usable source width");
        return emit_cast_sign(finding, artifact, vw);
    }
    throw DomainError("no C harness template for site kind '" + kind + "'");
}

Fault triage_sanitizer_output(const std::string& output) {
    const bool hbo = output.find("heap-buffer-overflow") != std::string::npos;
    if (hbo && output.find("WRITE") != std::string::npos) return Fault::HEAP_BUFFER_OVERFLOW;
    if (output.find("allocation-size-too-big") != std::string::npos)
        return Fault::ALLOC_SIZE_TOO_BIG;
    if (hbo && output.find("READ") != std::string::npos) return Fault::OOB_READ;
    if (output.find("Traceback") != std::string::npos &&
        output.find("ValueError") != std::string::npos)
        return Fault::BLOCKED;
    return Fault::NONE;
}

PocOutcome compile_and_run(const pipeline::Finding& finding, const Artifact& artifact,
                           const std::filesystem::path& workdir,
                           const std::vector<std::string>& toolchain) {
    const std::string source = emit_poc_c(finding, artifact);
    std::filesystem::create_directories(workdir);
    const auto src_path = workdir / ("poc_" + finding.finding_id + ".c");
    const auto bin_path = workdir / ("poc_" + finding.finding_id);
    {
        std::ofstream out(src_path, std::ios::binary);
        if (!out) throw InfraError("cannot write " + src_path.string());
        out << source;
    }

    std::vector<std::string> argv =
        toolchain.empty()
            ? std::vector<std::string>{"gcc", "-fsanitize=address,undefined", "-g", "-O1"}
            : toolchain;
    argv.push_back("-o");
    argv.push_back(bin_path.string());
    argv.push_back(src_path.string());
    const ProcessResult cc = run_process(argv, 120000);
    if (cc.timed_out || cc.exit_code != 0)
        throw InfraError("PoC compilation failed (exit " + std::to_string(cc.exit_code) +
                         "): " + cc.err);

    const ProcessResult run = run_process({bin_path.string()}, 30000);
    PocOutcome outcome;
    outcome.finding_id = finding.finding_id;
    outcome.ran = true;
    outcome.raw_output = run.err + run.out;
    outcome.fault = triage_sanitizer_output(outcome.raw_output);
    return outcome;
}

std::optional<std::string> crack_fast_hash(const std::string& hex_digest,
                                           const std::vector<std::string>& wordlist) {
    if (hex_digest.size() != 64)
        throw DomainError("digest must be 64 hex characters, got " +
                          std::to_string(hex_digest.size()));
    std::string needle;
    needle.reserve(64);
    for (char c : hex_digest) {
        if (!std::isxdigit(static_cast<unsigned char>(c)))
            throw DomainError("digest contains a non-hex character");
        needle.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (const auto& word : wordlist)
        if (sha256_hex(word) == needle) return word;
    return std::nullopt;
}

namespace {

struct Slot {
    size_t begin = 0;   // byte range of the placeholder within the template
    size_t end = 0;
    bool quoted = false;  // wrapped in single quotes in the query text
};

// Last interpolation placeholder inside a string literal: {name}, {}, %s, %d.
std::optional<Slot> find_slot(const std::string& text) {
    std::optional<Slot> best;
    for (size_t i = 0; i < text.size(); i++) {
        size_t end = 0;
        if (text[i] == '{') {
            size_t close = text.find('}', i);
            if (close == std::string::npos) continue;
            end = close + 1;
        } else if (text[i] == '%' && i + 1 < text.size() &&
                   (text[i + 1] == 's' || text[i + 1] == 'd')) {
            end = i + 2;
        } else {
            continue;
        }
        Slot s;
        s.begin = i;
        s.end = end;
        s.quoted = i > 0 && text[i - 1] == '\'' && end < text.size() && text[end] == '\'';
        best = s;
        i = end - 1;
    }
    return best;
}

// All single- or double-quoted literal bodies in source order, with a marker
// for whether a bare identifier/call follows before the next literal (the
// concatenated variable).
struct LitRun {
    std::vector<std::string> bodies;
    std::vector<bool> var_after;  // same length; true if "+ expr" follows body i
};

LitRun scan_literals(const std::string& text) {
    LitRun run;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '"' || c == '\'') {
            std::string body;
            char quote = c;
            i++;
            while (i < text.size() && text[i] != quote) {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    body += text[i];
                    body += text[i + 1];
                    i += 2;
                } else {
                    body += text[i++];
                }
            }
            i++;  // closing quote
            // A '+' followed by a non-literal term means a variable is
            // concatenated in at this point.
            size_t j = text.find_first_not_of(" \t", i);
            bool var_next = j != std::string::npos && text[j] == '+';
            if (var_next) {
                size_t k = text.find_first_not_of(" \t", j + 1);
                var_next = k != std::string::npos && text[k] != '"' && text[k] != '\'';
            }
            run.bodies.push_back(std::move(body));
            run.var_after.push_back(var_next);
        } else {
            i++;
        }
    }
    return run;
}

}  // namespace

InjectionDemo derive_injection_payload(const pyfront::PySite& site) {
    if (site.kind != pyfront::PySiteKind::SQL_CONCAT)
        throw DomainError("payload derivation needs a SQL concatenation site, got " +
                          to_string(site.kind));

    const LitRun lits = scan_literals(site.evidence);

    // Placeholder inside a literal (f-string brace, %s/%d, .format brace).
    for (const auto& body : lits.bodies) {
        if (auto slot = find_slot(body)) {
            InjectionDemo demo;
            demo.payload = slot->quoted ? "' OR '1'='1" : "1 OR 1=1";
            demo.resulting_query =
                body.substr(0, slot->begin) + demo.payload + body.substr(slot->end);
            return demo;
        }
    }

    // Plain concatenation: the variable is spliced where the first literal
    // with a following "+ var" ends.
    for (size_t i = 0; i < lits.bodies.size(); i++) {
        if (!lits.var_after[i]) continue;
        const bool quoted = !lits.bodies[i].empty() && lits.bodies[i].back() == '\'';
        InjectionDemo demo;
        demo.payload = quoted ? "' OR '1'='1" : "1 OR 1=1";
        demo.resulting_query = lits.bodies[i] + demo.payload;
        for (size_t k = i + 1; k < lits.bodies.size(); k++) demo.resulting_query += lits.bodies[k];
        return demo;
    }

    throw DomainError("could not locate the interpolation slot in: " + site.evidence);
}

void to_json(json& j, const PocOutcome& o) {
    j = json{{"finding_id", o.finding_id},
             {"ran", o.ran},
             {"fault", to_string(o.fault)},
             {"raw_output", o.raw_output}};
}

}  // namespace cobalt::poc
