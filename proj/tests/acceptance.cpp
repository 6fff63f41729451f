// Acceptance suite. Each criterion prints one pass/fail line; the process
// exits nonzero if any criterion fails.
//
// When the system Tcl library is available (TCLFORGE_HAVE_TCL_REFERENCE) the
// completeness check is compared against the live reference interpreter on
// every corpus script, in addition to the frozen labels recorded when the
// corpus was authored.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tclforge/bench.hpp"
#include "tclforge/command_db.hpp"
#include "tclforge/core.hpp"
#include "tclforge/eval.hpp"
#include "tclforge/lint.hpp"
#include "tclforge/llm.hpp"
#include "tclforge/synth.hpp"
#include "tclforge/tcl.hpp"

#include "suite_builders.hpp"

#if defined(TCLFORGE_HAVE_TCL_REFERENCE)
extern "C" int Tcl_CommandComplete(const char* cmd);
#endif

namespace {

using namespace tclforge;

const std::string kDataDir = TCLFORGE_DATA_DIR;
const std::string kBin = TCLFORGE_BIN;

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
    void note(const std::string& text) {
        if (detail.tellp() > 0) detail << "; ";
        detail << text;
    }
};

const CommandDatabase& fixture_db() {
    static CommandDatabase db = load_schema_or_throw(kDataDir + "/schema/innovus_core.json");
    return db;
}

struct CorpusEntry {
    std::string file;
    std::string lint;
    bool complete = true;
};

const std::vector<CorpusEntry>& corpus() {
    static std::vector<CorpusEntry> entries = [] {
        auto doc = nlohmann::json::parse(read_file(kDataDir + "/corpus/labels.json"));
        std::vector<CorpusEntry> out;
        for (const auto& e : doc["entries"])
            out.push_back({e["file"].get<std::string>(), e.value("lint", ""),
                           e["complete"].get<bool>()});
        return out;
    }();
    return entries;
}

int run_cli(const std::string& args, std::string* output) {
    std::string cmd = kBin + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return -1;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof(buf), pipe))
        if (output) output->append(buf, n);
    int status = pclose(pipe);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "tclforge_acceptance";
    std::filesystem::create_directories(dir);
    return dir.string();
}

// -------------------------------------------------------------------------
// 1. Parser oracle
// -------------------------------------------------------------------------

struct SegmentationCase {
    const char* script;
    std::vector<std::vector<const char*>> commands;  // word texts per command
};

const std::vector<SegmentationCase>& segmentation_cases() {
    static const std::vector<SegmentationCase> cases = {
        {"set x 5", {{"set", "x", "5"}}},
        {"setPlaceMode -placeGlobalPlaceIOPins true",
         {{"setPlaceMode", "-placeGlobalPlaceIOPins", "true"}}},
        {"puts {a b}", {{"puts", "{a b}"}}},
        {"puts \"hello world\"", {{"puts", "\"hello world\""}}},
        {"set n [llength $lst]", {{"set", "n", "[llength $lst]"}}},
        {"placeDesign; reportDesign", {{"placeDesign"}, {"reportDesign"}}},
        {"foreach n $nets { dbSet $n.skip 1 }",
         {{"foreach", "n", "$nets", "{ dbSet $n.skip 1 }"}}},
        {"# c\nset a 1", {{"set", "a", "1"}}},
        {"set a \\\n 5", {{"set", "a", "5"}}},
        {"if {$x > 2} { puts ok }", {{"if", "{$x > 2}", "{ puts ok }"}}},
        {"puts {}", {{"puts", "{}"}}},
        {"puts \"\"", {{"puts", "\"\""}}},
        {"set s {a {b c} d}", {{"set", "s", "{a {b c} d}"}}},
        {"set p a\\ b", {{"set", "p", "a\\ b"}}},
        {"dbSet [dbGet -p top.insts.name u1].pStatus fixed",
         {{"dbSet", "[dbGet -p top.insts.name u1].pStatus", "fixed"}}},
        {"puts \"a\\\"b\"", {{"puts", "\"a\\\"b\""}}},
        {"puts {a;b}", {{"puts", "{a;b}"}}},
        {"puts $x", {{"puts", "$x"}}},
        {"puts ${a b}", {{"puts", "${a b}"}}},
        {"puts $cfg(mode)", {{"puts", "$cfg(mode)"}}},
        {"set   a\t5", {{"set", "a", "5"}}},
        {"placeDesign\n", {{"placeDesign"}}},
        {"proc f {x} { return $x }", {{"proc", "f", "{x}", "{ return $x }"}}},
        {"set a x{y", {{"set", "a", "x{y"}}},
        {"set a 1\r\nset b 2", {{"set", "a", "1"}, {"set", "b", "2"}}},
        {"switch $m { a { puts 1 } default { puts 2 } }",
         {{"switch", "$m", "{ a { puts 1 } default { puts 2 } }"}}},
        {"set q [a [b c] d]", {{"set", "q", "[a [b c] d]"}}},
        {"puts \"x $v y\"", {{"puts", "\"x $v y\""}}},
        {"while {$i < 3} {incr i}", {{"while", "{$i < 3}", "{incr i}"}}},
        {"create_clock clk -period 1.2 -waveform {0 0.6}",
         {{"create_clock", "clk", "-period", "1.2", "-waveform", "{0 0.6}"}}},
        {"globalNetConnect VDD -type pgpin -inst *",
         {{"globalNetConnect", "VDD", "-type", "pgpin", "-inst", "*"}}},
        {"editPin -pin {clk rst} -side Left",
         {{"editPin", "-pin", "{clk rst}", "-side", "Left"}}},
    };
    return cases;
}

Check criterion_parser_oracle() {
    Check c;
    std::size_t scripts = 0;
    for (const CorpusEntry& e : corpus()) {
        std::string src = read_file(kDataDir + "/corpus/" + e.file);
        ++scripts;
        bool mine = tcl::check_complete(src).complete;
        if (mine != e.complete)
            c.expect(false, e.file + ": check_complete=" + (mine ? "1" : "0") +
                                " frozen-label=" + (e.complete ? "1" : "0"));
#if defined(TCLFORGE_HAVE_TCL_REFERENCE)
        bool reference = Tcl_CommandComplete(src.c_str()) != 0;
        if (mine != reference)
            c.expect(false, e.file + ": disagrees with the live reference interpreter");
#endif
    }
    c.expect(scripts >= 100, "corpus has only " + std::to_string(scripts) + " scripts");

    std::size_t curated = 0;
    for (const SegmentationCase& sc : segmentation_cases()) {
        ++curated;
        tcl::ScriptAst ast = tcl::parse_script(sc.script);
        if (!ast.parse_errors.empty()) {
            c.expect(false, std::string("parse error in curated script: ") + sc.script);
            continue;
        }
        if (ast.commands.size() != sc.commands.size()) {
            c.expect(false, std::string("command count mismatch: ") + sc.script);
            continue;
        }
        for (std::size_t i = 0; i < ast.commands.size(); ++i) {
            const auto& expected = sc.commands[i];
            const auto& words = ast.commands[i].words;
            if (words.size() != expected.size()) {
                c.expect(false, std::string("word count mismatch: ") + sc.script);
                break;
            }
            for (std::size_t w = 0; w < words.size(); ++w)
                if (words[w].text != expected[w]) {
                    c.expect(false, std::string("word mismatch in: ") + sc.script + " (got \"" +
                                        words[w].text + "\", want \"" + expected[w] + "\")");
                    break;
                }
        }
    }
    c.expect(curated >= 30, "only " + std::to_string(curated) + " curated scripts");
#if defined(TCLFORGE_HAVE_TCL_REFERENCE)
    c.note(std::to_string(scripts) + " corpus scripts vs live reference + frozen labels, " +
           std::to_string(curated) + " curated ASTs");
#else
    c.note(std::to_string(scripts) + " corpus scripts vs frozen labels (no live reference), " +
           std::to_string(curated) + " curated ASTs");
#endif
    return c;
}

// -------------------------------------------------------------------------
// 2. Linter fixture accuracy + idempotence
// -------------------------------------------------------------------------

Check criterion_linter_accuracy() {
    Check c;
    std::size_t valid_total = 0, invalid_total = 0, correct = 0;
    for (const CorpusEntry& e : corpus()) {
        if (e.lint.empty()) continue;
        std::string src = read_file(kDataDir + "/corpus/" + e.file);
        LintReport report = lint_script(src, fixture_db(), {}, e.file);
        bool want_pass = e.lint == "pass";
        (want_pass ? valid_total : invalid_total) += 1;
        if (report.pass == want_pass) ++correct;
        else c.expect(false, e.file + " misclassified");
    }
    c.expect(valid_total >= 50, "need >= 50 labeled-valid scripts");
    c.expect(invalid_total >= 50, "need >= 50 labeled-invalid scripts");
    c.note(std::to_string(correct) + "/" + std::to_string(valid_total + invalid_total) +
           " classified correctly");

    synth::SynthConfig cfg;
    cfg.target_fragment_count = 1000;
    cfg.rng_seed = 20250810;
    synth::Rng rng(cfg.rng_seed);
    auto fragments = synth::generate_fragments(fixture_db(), cfg, rng);
    std::vector<std::string> scripts;
    for (const auto& f : fragments) scripts.push_back(f.script);
    FilterResult once = filter_corpus(scripts, fixture_db());
    FilterResult twice = filter_corpus(once.survivors, fixture_db());
    c.expect(twice.rejects.empty(), "filtering is not idempotent");
    c.expect(twice.survivors == once.survivors, "survivor order changed on refiltering");
    c.note("idempotence over 1000 fragments (" + std::to_string(once.survivors.size()) +
           " survivors)");
    return c;
}

// -------------------------------------------------------------------------
// 3. pass@k oracle
// -------------------------------------------------------------------------

double brute_force_pass_at_k(int n, int cc, int k) {
    long hit = 0, total = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        ++total;
        if (mask & ((1u << cc) - 1u)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

Check criterion_pass_at_k() {
    Check c;
    for (int n = 1; n <= 6; ++n)
        for (int cc = 0; cc <= n; ++cc)
            for (int k = 1; k <= n; ++k) {
                double got = bench::pass_at_k(n, cc, k);
                double want = brute_force_pass_at_k(n, cc, k);
                if (std::abs(got - want) >= 1e-12)
                    c.expect(false, "mismatch at n=" + std::to_string(n) +
                                        " c=" + std::to_string(cc) + " k=" + std::to_string(k));
            }
    for (int n = 1; n <= 12; ++n)
        for (int cc = 0; cc <= n; ++cc)
            if (bench::pass_at_k(n, cc, 1) != static_cast<double>(cc) / n)
                c.expect(false, "pass@1 != c/n at n=" + std::to_string(n) +
                                    " c=" + std::to_string(cc));
    c.note("subset enumeration n<=6 within 1e-12; pass@1 == c/n bit-exact");
    return c;
}

// -------------------------------------------------------------------------
// 4. Table arithmetic reproduction
// -------------------------------------------------------------------------

Check criterion_table_arithmetic() {
    Check c;
    bench::TaskSuite suite = make_full_size_suite(schema_digest(fixture_db()));

    auto t1 = make_category_tallies(suite, {25, 3, 17, 14, 10}, {9, 1, 5, 2, 5}, 5);
    bench::PassKReport pass1 = bench::aggregate(t1, suite, {1, 5});
    c.expect(format_percent(pass1.total.syntax.at(1)) == "59.48",
             "total syntax pass@1 rendered " + format_percent(pass1.total.syntax.at(1)));
    c.expect(format_percent(pass1.total.function.at(1)) == "18.97",
             "total function pass@1 rendered " + format_percent(pass1.total.function.at(1)));
    std::string table1 = bench::render_report(pass1, bench::RenderFormat::Table,
                                              bench::GroupBy::Category);
    c.expect(table1.find("59.48") != std::string::npos, "59.48 missing from the table");
    c.expect(table1.find("18.97") != std::string::npos, "18.97 missing from the table");

    auto t5 = make_category_tallies(suite, {35, 8, 21, 21, 21}, {25, 2, 9, 7, 11}, 1);
    bench::PassKReport pass5 = bench::aggregate(t5, suite, {1, 5});
    c.expect(format_percent(pass5.total.syntax.at(5)) == "91.38",
             "total syntax pass@5 rendered " + format_percent(pass5.total.syntax.at(5)));
    c.expect(format_percent(pass5.total.function.at(5)) == "46.55",
             "total function pass@5 rendered " + format_percent(pass5.total.function.at(5)));
    c.note("59.48 / 18.97 / 91.38 / 46.55 reproduced at 2-decimal rendering");
    return c;
}

// -------------------------------------------------------------------------
// 5. Suite structure validation
// -------------------------------------------------------------------------

Check criterion_suite_structure() {
    Check c;
    std::string digest = schema_digest(fixture_db());
    bench::TaskSuite suite = make_full_size_suite(digest);
    c.expect(suite.tasks.size() == 116, "constructed suite is not 116 tasks");
    try {
        bench::load_suite_text(bench::write_suite(suite), fixture_db());
    } catch (const bench::SuiteError&) {
        c.expect(false, "well-formed 116-task suite rejected");
    }

    auto expect_rejected = [&](bench::TaskSuite perturbed, const std::string& what) {
        try {
            bench::load_suite_text(bench::write_suite(perturbed), fixture_db());
            c.expect(false, what + " was accepted");
        } catch (const bench::SuiteError&) {
        }
    };
    {
        bench::TaskSuite p = suite;
        p.tasks.pop_back();
        expect_rejected(p, "dropping one task");
    }
    {
        bench::TaskSuite p = suite;
        p.tasks[40].category = p.tasks[40].category == "DIQA" ? "NIAA" : "DIQA";
        expect_rejected(p, "flipping one task category");
    }
    {
        bench::TaskSuite p = suite;
        p.tasks[60].difficulty = p.tasks[60].difficulty == "L1" ? "L2" : "L1";
        expect_rejected(p, "flipping one task level");
    }
    {
        bench::TaskSuite p = suite;
        p.tasks[5].id = p.tasks[4].id;
        expect_rejected(p, "duplicating one id");
    }
    {
        bench::TaskSuite p = suite;
        p.tasks[10].golden_script = "if {1} {placeDesign";
        expect_rejected(p, "breaking one golden script");
    }
    {
        bench::TaskSuite p = suite;
        p.declared_levels["L1"] = 53;
        expect_rejected(p, "declaring L1=53 against 54 actual");
    }
    c.note("116-shaped suite accepted; six single-task/header perturbations rejected");
    return c;
}

// -------------------------------------------------------------------------
// 6. End-to-end offline pipeline through the CLI
// -------------------------------------------------------------------------

Check criterion_offline_pipeline() {
    Check c;
    std::string config_path = temp_dir() + "/accept_synth_config.json";
    nlohmann::ordered_json cfg;
    cfg["schema"] = kDataDir + "/schema/innovus_core.json";
    cfg["synth"] = {{"target_fragment_count", 400},
                    {"commands_per_fragment", {1, 5}},
                    {"rng_seed", 1702},
                    {"mutation_probability", 0.2},
                    {"stage3_concurrency", 3}};
    write_file(config_path, cfg.dump(2) + "\n");

    std::string out1 = temp_dir() + "/accept_dataset_a.jsonl";
    std::string out2 = temp_dir() + "/accept_dataset_b.jsonl";
    std::filesystem::remove(out1);
    std::filesystem::remove(out2);

    std::string output;
    int code = run_cli("synth run --config " + config_path + " --out " + out1 +
                           " --mock-teacher " + kDataDir + "/mock/teacher.json",
                       &output);
    c.expect(code == 0, "synth run exited " + std::to_string(code));

    std::size_t emitted = 0, relint_failures = 0;
    for (const std::string& line : split_lines(read_file(out1))) {
        if (trim(line).empty()) continue;
        ++emitted;
        auto rec = nlohmann::json::parse(line);
        if (!lint_script(rec.at("script").get<std::string>(), fixture_db()).pass)
            ++relint_failures;
    }
    c.expect(emitted >= 200, "only " + std::to_string(emitted) + " tuples emitted");
    c.expect(relint_failures == 0,
             std::to_string(relint_failures) + " emitted scripts fail re-lint");

    code = run_cli("synth run --config " + config_path + " --out " + out2 + " --mock-teacher " +
                       kDataDir + "/mock/teacher.json",
                   nullptr);
    c.expect(code == 0, "second synth run failed");
    c.expect(read_file(out1) == read_file(out2), "rerun with the same seed is not byte-identical");
    c.note(std::to_string(emitted) + " tuples, 100% re-lint pass, byte-identical rerun");
    return c;
}

// -------------------------------------------------------------------------
// 7. Two-step gating
// -------------------------------------------------------------------------

Check criterion_two_step_gating() {
    Check c;
    CommandDatabase db = fixture_db();
    bench::TaskSuite suite = bench::load_suite(kDataDir + "/suite/sample_suite.jsonl", db);

    // Per task: samples 0,2,4 carry the golden script, sample 1 a typo'd
    // script, sample 3 pure prose -> 40% syntactically invalid.
    llm::MockFixture gen;
    gen.mode = llm::MockFixture::Mode::Sequence;
    std::set<std::string> invalid_scripts;
    for (const bench::BenchTask& t : suite.tasks) {
        std::string valid = "```tcl\n" + t.golden_script + "```";
        std::string typo = "```tcl\nplaceDsign\n```";
        invalid_scripts.insert("placeDsign\n");
        gen.sequence.push_back({200, valid});
        gen.sequence.push_back({200, typo});
        gen.sequence.push_back({200, valid});
        gen.sequence.push_back({200, "Sorry, I can only describe the approach in prose."});
        gen.sequence.push_back({200, valid});
    }
    llm::EndpointConfig gen_ep;
    gen_ep.name = "generator";
    gen_ep.model = "mock-generator";
    auto gen_transport = std::make_shared<llm::MockTransport>(gen);
    llm::ChatClient generator(gen_ep, gen_transport);

    llm::MockFixture judge_fixture;
    judge_fixture.mode = llm::MockFixture::Mode::Rules;
    judge_fixture.fallback = {200, "Matches the golden flow.\nVERDICT: PASS"};
    judge_fixture.has_fallback = true;
    llm::EndpointConfig judge_ep;
    judge_ep.name = "judge";
    judge_ep.model = "mock-judge";
    auto judge_transport = std::make_shared<llm::MockTransport>(judge_fixture);
    llm::ChatClient judge(judge_ep, judge_transport);

    eval::EvalParams params;
    params.n = 5;
    params.ks = {1, 5};
    params.task_concurrency = 1;  // keep the generator sequence aligned
    eval::EvalOutcome outcome = eval::evaluate(suite, generator, judge, db, params);

    std::size_t expected_valid = suite.tasks.size() * 3;
    c.expect(outcome.judge_calls == expected_valid,
             "judge calls " + std::to_string(outcome.judge_calls) + " != " +
                 std::to_string(expected_valid));
    c.expect(judge_transport->request_count() == expected_valid,
             "judge transport saw " + std::to_string(judge_transport->request_count()) +
                 " requests");
    // No judge request ever carries an invalid sample's script.
    for (const auto& req : judge_transport->recorded()) {
        for (const std::string& bad : invalid_scripts)
            if (req.messages[0].content.find("placeDsign") != std::string::npos) {
                c.expect(false, "a judge prompt contains an invalid candidate: " + bad);
                break;
            }
    }
    for (const eval::EvalRecord& r : outcome.records) {
        if (!r.syntax_pass)
            c.expect(r.function_verdict == eval::FunctionVerdict::SkippedSyntaxFail,
                     r.task_id + "#" + std::to_string(r.sample_index) +
                         " invalid sample not marked skipped-syntax-fail");
    }

    // Hand computation: every task has n=5, c_syntax=c_function=3.
    //   pass@1 = 3/5 = 60.00%; pass@5 = 1 (at least one of five correct).
    c.expect(format_percent(outcome.report.total.syntax.at(1)) == "60.00",
             "syntax pass@1 " + format_percent(outcome.report.total.syntax.at(1)));
    c.expect(format_percent(outcome.report.total.function.at(1)) == "60.00",
             "function pass@1 " + format_percent(outcome.report.total.function.at(1)));
    c.expect(format_percent(outcome.report.total.syntax.at(5)) == "100.00",
             "syntax pass@5 " + format_percent(outcome.report.total.syntax.at(5)));
    c.expect(format_percent(outcome.report.total.function.at(5)) == "100.00",
             "function pass@5 " + format_percent(outcome.report.total.function.at(5)));
    c.note("zero judge requests for the 40% invalid samples; tallies match hand computation");
    return c;
}

// -------------------------------------------------------------------------
// 8. Agreement audit
// -------------------------------------------------------------------------

Check criterion_agreement_audit() {
    Check c;
    std::vector<eval::EvalRecord> records;
    eval::HumanLabelSet labels;
    for (int i = 0; i < 100; ++i) {
        eval::EvalRecord r;
        r.task_id = "audit_t" + std::to_string(i);
        r.sample_index = 0;
        r.syntax_pass = true;
        r.extracted_script = "placeDesign\n";
        r.function_verdict = i < 39 ? eval::FunctionVerdict::Pass : eval::FunctionVerdict::Fail;
        records.push_back(r);
        labels.labels.push_back({r.task_id, 0, i < 42, "expert", ""});
    }
    eval::AgreementReport report = eval::agreement_report(records, labels);
    c.expect(report.judge_pass_count == 39, "judge-pass count is not 39");
    c.expect(report.human_pass_count == 42, "human-pass count is not 42");
    c.expect(report.precision == 1.0, "precision is not exactly 1.0");
    c.expect(std::abs(report.recall - 0.9286) <= 1e-4,
             "recall " + std::to_string(report.recall) + " outside 0.9286 +- 0.0001");
    c.expect(report.judge_subset_of_human, "subset flag is false");
    c.note("precision 1.0, recall " + std::to_string(report.recall) + ", subset flag true");
    return c;
}

// -------------------------------------------------------------------------
// 9. Log scanner
// -------------------------------------------------------------------------

Check criterion_log_scanner() {
    Check c;
    c.expect(!scan_log("** ERROR: (IMPFP-42): overlap\n").pass, "exact pattern not flagged");
    c.expect(scan_log("**ERROR: (IMPSE-110): bad option\n").pass,
             "missing-space variant was flagged");
    c.expect(scan_log("ERROR something\nWARNING else\n").pass, "bare ERROR was flagged");
    c.expect(scan_log("** ERROR without the colon\n").pass, "colonless variant was flagged");
    c.expect(!scan_log("prefix text ** ERROR: mid-line\n").pass, "mid-line pattern not flagged");
    c.expect(scan_log("").pass, "empty log failed");

    LogScanResult errors = scan_log(read_file(kDataDir + "/logs/route_errors.log"));
    c.expect(!errors.pass, "fixture error log passed");
    c.expect(errors.lines == std::vector<std::size_t>{3, 5},
             "fixture error log lines mismatch");
    LogScanResult clean = scan_log(read_file(kDataDir + "/logs/route_clean.log"));
    c.expect(clean.pass, "fixture clean log failed");
    c.note("exact '** ERROR:' byte sequence only; fixture logs verified");
    return c;
}

struct Criterion {
    const char* name;
    std::function<Check()> run;
    double time_limit_s = 0.0;  // 0 = no limit
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"parser oracle (completeness + word segmentation)", criterion_parser_oracle, 5.0},
        {"linter fixture accuracy and idempotence", criterion_linter_accuracy, 10.0},
        {"pass@k estimator equals subset enumeration", criterion_pass_at_k, 0.0},
        {"category-table arithmetic reproduction", criterion_table_arithmetic, 0.0},
        {"suite structure validation", criterion_suite_structure, 0.0},
        {"offline synthesis pipeline via the CLI", criterion_offline_pipeline, 60.0},
        {"two-step gating saves judge calls", criterion_two_step_gating, 0.0},
        {"judge-vs-human agreement audit", criterion_agreement_audit, 0.0},
        {"log scanner exact pattern", criterion_log_scanner, 0.0},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = criteria[i].run();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail << "exception: " << e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criteria[i].time_limit_s > 0 && elapsed > criteria[i].time_limit_s) {
            check.ok = false;
            check.detail << "; exceeded " << criteria[i].time_limit_s << "s budget";
        }
        std::printf("[%s] criterion %zu: %s (%.2fs)%s%s\n", check.ok ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, elapsed, check.detail.tellp() > 0 ? " — " : "",
                    check.detail.str().c_str());
        if (!check.ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    else std::printf("all %zu criteria passed\n", criteria.size());
    return failures == 0 ? 0 : 1;
}
