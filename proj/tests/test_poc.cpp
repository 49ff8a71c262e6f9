#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cobalt/poc.hpp"
#include "cobalt/proc.hpp"
#include "cobalt/sha256.hpp"

using namespace cobalt;
using namespace cobalt::poc;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = COBALT_FIXTURE_DIR;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string transcript(const std::string& name) {
    return read_file(kFixtures + "/transcripts/" + name);
}

// Analyzed corpus artifact plus its single finding, ready for emission.
struct Proven {
    Artifact artifact;
    pipeline::Finding finding;
};

Proven proven(const std::string& artifact_id) {
    const fs::path root = fs::path(kFixtures) / "corpus";
    for (const auto& e : pipeline::load_manifest(root)) {
        if (e.artifact_id != artifact_id) continue;
        Proven p;
        p.artifact = pipeline::load_corpus_artifact(root, e);
        auto r = pipeline::analyze_artifact(p.artifact, pipeline::AnalysisConfig{});
        REQUIRE(r.findings.size() == 1);
        p.finding = r.findings[0];
        return p;
    }
    REQUIRE_MESSAGE(false, "artifact " << artifact_id << " not in bundled corpus");
    return {};
}

bool have_asan_gcc() {
    static const bool ok = [] {
        fs::path dir = fs::temp_directory_path() / "cobalt_poc_probe";
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) return false;
        std::ofstream(dir / "probe.c") << "int main(void) { return 0; }\n";
        try {
            auto r = run_process({"gcc", "-fsanitize=address,undefined", "-O1", "-o",
                                  (dir / "probe").string(), (dir / "probe.c").string()},
                                 60000);
            return !r.timed_out && r.exit_code == 0;
        } catch (const std::exception&) {
            return false;
        }
    }();
    return ok;
}

}  // namespace

TEST_CASE("sanitizer transcripts classify by their dominant report") {
    CHECK(triage_sanitizer_output(transcript("mem01a.txt")) == Fault::HEAP_BUFFER_OVERFLOW);
    CHECK(triage_sanitizer_output(transcript("mem01b.txt")) == Fault::HEAP_BUFFER_OVERFLOW);
    CHECK(triage_sanitizer_output(transcript("mem03.txt")) == Fault::ALLOC_SIZE_TOO_BIG);
    CHECK(triage_sanitizer_output(transcript("mem06.txt")) == Fault::OOB_READ);
    CHECK(triage_sanitizer_output(transcript("inp06.txt")) == Fault::BLOCKED);
    CHECK(triage_sanitizer_output(transcript("clean.txt")) == Fault::NONE);
}

TEST_CASE("triage precedence and fallbacks") {
    // An overflowing write outranks the allocator complaint in the same run.
    CHECK(triage_sanitizer_output("heap-buffer-overflow WRITE allocation-size-too-big") ==
          Fault::HEAP_BUFFER_OVERFLOW);
    // WRITE outranks READ when a report mentions both accesses.
    CHECK(triage_sanitizer_output("heap-buffer-overflow READ then WRITE") ==
          Fault::HEAP_BUFFER_OVERFLOW);
    // A Python traceback only counts as blocked when input validation threw.
    CHECK(triage_sanitizer_output("Traceback (most recent call last):\nKeyError: 'x'") ==
          Fault::NONE);
    CHECK(triage_sanitizer_output("ValueError: bad input, no traceback header") == Fault::NONE);
    CHECK(triage_sanitizer_output("") == Fault::NONE);
    CHECK(to_string(Fault::OOB_READ) == "OOB_READ");
}

TEST_CASE("harness for a wrapping allocation") {
    Proven p = proven("MEM-01");
    const std::string src = emit_poc_c(p.finding, p.artifact);

    // Witness replay, truncation, and the out-of-bounds store.
    CHECK(src.find("uint32_t n = UINT32_C(1073741824); /* solver witness */") !=
          std::string::npos);
    CHECK(src.find("alloc_size = (uint32_t)exact") != std::string::npos);
    CHECK(src.find("for (int i = 0; i < 8; i++)") != std::string::npos);
    CHECK(src.find("slots[i] = (uint32_t)i") != std::string::npos);

    // Self-contained: build line, finding id, and the artifact in a comment.
    CHECK(src.find("Build: gcc -fsanitize=address,undefined -g -O1 -o poc poc.c && ./poc") !=
          std::string::npos);
    CHECK(src.find(p.finding.finding_id) != std::string::npos);
    CHECK(src.find(" *       int* buf = malloc(n * sizeof(int));") != std::string::npos);
    CHECK(src.find("#include <stdint.h>") != std::string::npos);
    CHECK(src.find("#include <stdlib.h>") != std::string::npos);
}

TEST_CASE("harness for a sign conversion") {
    Proven p = proven("INT-01");
    const std::string src = emit_poc_c(p.finding, p.artifact);
    CHECK(src.find("int32_t count = (int32_t)UINT32_C(4294967295); "
                   "/* solver witness: negative as signed */") != std::string::npos);
    CHECK(src.find("size_t request = (size_t)count") != std::string::npos);
    CHECK(src.find("malloc(request)") != std::string::npos);
}

TEST_CASE("harness emission refuses anything short of a proof") {
    Proven p = proven("MEM-01");

    pipeline::Finding pattern = p.finding;
    pattern.status = FindingStatus::PATTERN_MATCH;
    CHECK_THROWS_AS(emit_poc_c(pattern, p.artifact), DomainError);

    pipeline::Finding no_witness = p.finding;
    no_witness.witness.reset();
    CHECK_THROWS_AS(emit_poc_c(no_witness, p.artifact), DomainError);

    pipeline::Finding no_query = p.finding;
    no_query.smtlib.reset();
    CHECK_THROWS_AS(emit_poc_c(no_query, p.artifact), DomainError);

    Artifact py = p.artifact;
    py.language = Language::PYTHON;
    CHECK_THROWS_AS(emit_poc_c(p.finding, py), DomainError);

    pipeline::Finding odd_kind = p.finding;
    odd_kind.site["kind"] = "UNSAFE_STRCOPY";
    CHECK_THROWS_AS(emit_poc_c(odd_kind, p.artifact), DomainError);
}

TEST_CASE("compiled harnesses trip the sanitizer as predicted") {
    if (!have_asan_gcc()) {
        MESSAGE("skipping: no ASan-capable gcc on this host");
        return;
    }
    fs::path workdir = fs::temp_directory_path() / "cobalt_poc_run";
    fs::remove_all(workdir);

    Proven mem = proven("MEM-01");
    PocOutcome hbo = compile_and_run(mem.finding, mem.artifact, workdir);
    CHECK(hbo.ran);
    CHECK(hbo.fault == Fault::HEAP_BUFFER_OVERFLOW);
    CHECK(hbo.raw_output.find("heap-buffer-overflow") != std::string::npos);
    CHECK(hbo.finding_id == mem.finding.finding_id);

    Proven cast = proven("INT-01");
    PocOutcome astb = compile_and_run(cast.finding, cast.artifact, workdir);
    CHECK(astb.ran);
    CHECK(astb.fault == Fault::ALLOC_SIZE_TOO_BIG);

    json j;
    to_json(j, hbo);
    CHECK(j["finding_id"] == mem.finding.finding_id);
    CHECK(j["ran"] == true);
    CHECK(j["fault"] == "HEAP_BUFFER_OVERFLOW");
    CHECK(j["raw_output"].get<std::string>().find("heap-buffer-overflow") !=
          std::string::npos);
    fs::remove_all(workdir);
}

TEST_CASE("a broken toolchain is an infrastructure error") {
    if (!have_asan_gcc()) {
        MESSAGE("skipping: no ASan-capable gcc on this host");
        return;
    }
    Proven mem = proven("MEM-01");
    fs::path workdir = fs::temp_directory_path() / "cobalt_poc_badcc";
    fs::remove_all(workdir);
    CHECK_THROWS_AS(
        compile_and_run(mem.finding, mem.artifact, workdir, {"gcc", "--definitely-not-a-flag"}),
        InfraError);
    fs::remove_all(workdir);
}

TEST_CASE("digest reversal over a wordlist") {
    const std::vector<std::string> words = {"alpha", "secret", "beta"};
    auto hit = crack_fast_hash(sha256_hex("secret"), words);
    REQUIRE(hit.has_value());
    CHECK(*hit == "secret");

    // Case-insensitive digest comparison.
    std::string upper = sha256_hex("alpha");
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    CHECK(crack_fast_hash(upper, words) == std::string("alpha"));

    CHECK_FALSE(crack_fast_hash(sha256_hex("not-in-list"), words).has_value());

    CHECK_THROWS_AS(crack_fast_hash("abc123", words), DomainError);  // too short
    std::string bad(64, 'g');
    CHECK_THROWS_AS(crack_fast_hash(bad, words), DomainError);  // not hex
}

TEST_CASE("bundled wordlist is intact") {
    std::ifstream in(kFixtures + "/wordlist_1000.txt");
    REQUIRE(in.good());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) words.push_back(line);
    CHECK(words.size() == 1000);
    CHECK(words.front() == "password");

    // Spot-check reversal against the bundled list.
    CHECK(crack_fast_hash(sha256_hex("password"), words) == std::string("password"));
    CHECK(crack_fast_hash(sha256_hex(words.back()), words) == words.back());
}

TEST_CASE("injection payloads for SQL concatenation sites") {
    // Quoted f-string slot, from the bundled vulnerable artifact.
    auto sites = pyfront::extract_py_sites(read_file(kFixtures + "/corpus/src/INP-01.py"));
    REQUIRE(sites.size() == 1);
    InjectionDemo demo = derive_injection_payload(sites[0]);
    CHECK(demo.payload == "' OR '1'='1");
    CHECK(demo.resulting_query == "SELECT * FROM users WHERE name = '' OR '1'='1'");

    // Unquoted %s placeholder.
    auto pct = pyfront::extract_py_sites(
        "db.execute(\"SELECT * FROM t WHERE id = %s\" % uid)\n");
    REQUIRE(pct.size() == 1);
    InjectionDemo pct_demo = derive_injection_payload(pct[0]);
    CHECK(pct_demo.payload == "1 OR 1=1");
    CHECK(pct_demo.resulting_query == "SELECT * FROM t WHERE id = 1 OR 1=1");

    // Plain string concatenation with a quoted splice point.
    auto concat = pyfront::extract_py_sites(
        "query = \"DELETE FROM logs WHERE user = '\" + name + \"'\"\n"
        "cur.execute(query)\n");
    REQUIRE(concat.size() == 1);
    InjectionDemo cat_demo = derive_injection_payload(concat[0]);
    CHECK(cat_demo.payload == "' OR '1'='1");
    CHECK(cat_demo.resulting_query == "DELETE FROM logs WHERE user = '' OR '1'='1'");

    // The last placeholder is the splice point.
    auto fmt = pyfront::extract_py_sites(
        "query = \"UPDATE users SET role = '{}' WHERE id = {}\".format(role, uid)\n"
        "db.execute(query)\n");
    REQUIRE(fmt.size() == 1);
    InjectionDemo fmt_demo = derive_injection_payload(fmt[0]);
    CHECK(fmt_demo.payload == "1 OR 1=1");
    CHECK(fmt_demo.resulting_query == "UPDATE users SET role = '{}' WHERE id = 1 OR 1=1");

    // Wrong site kind, or no visible slot: refused.
    pyfront::PySite wrong;
    wrong.kind = pyfront::PySiteKind::WEAK_RANDOM;
    CHECK_THROWS_AS(derive_injection_payload(wrong), DomainError);
    pyfront::PySite slotless;
    slotless.kind = pyfront::PySiteKind::SQL_CONCAT;
    slotless.evidence = "query = build_query()";
    CHECK_THROWS_AS(derive_injection_payload(slotless), DomainError);
}
