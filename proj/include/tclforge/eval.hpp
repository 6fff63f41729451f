#pragma once

// Benchmark evaluation: sample candidate scripts from a generator endpoint,
// gate them through the static syntax check, judge the survivors with a
// knowledge-enhanced LLM prompt, tally pass@k, and audit the judge against
// human labels.

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tclforge/bench.hpp"
#include "tclforge/command_db.hpp"
#include "tclforge/core.hpp"
#include "tclforge/lint.hpp"
#include "tclforge/llm.hpp"
#include "tclforge/tcl.hpp"

namespace tclforge::eval {

// ---------------------------------------------------------------------------
// Generation prompt
// ---------------------------------------------------------------------------

inline constexpr std::string_view kGenRolePreamble =
    "You are an expert physical design engineer. You write Innovus-style Tcl scripts that are "
    "syntactically correct and directly runnable in a place-and-route session.";

inline constexpr std::string_view kGenFormatInstruction =
    "Reply with exactly one Tcl script inside a fenced code block:\n"
    "```tcl\n<your script>\n```\n"
    "Do not put any Tcl outside the fenced block.";

struct GenPrompt {
    std::string role_preamble;
    std::string requirement;
    std::string format_instruction;

    std::string text() const {
        return role_preamble + "\n\nTask:\n" + requirement + "\n\n" + format_instruction + "\n";
    }
};

/// Deterministic; the requirement is inserted verbatim.
inline GenPrompt build_gen_prompt(const bench::BenchTask& task) {
    GenPrompt p;
    p.role_preamble = std::string(kGenRolePreamble);
    p.requirement = task.requirement;
    p.format_instruction = std::string(kGenFormatInstruction);
    return p;
}

// ---------------------------------------------------------------------------
// Script extraction
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_fence(const std::string& line) {
    std::string t = trim(line);
    return t.rfind("```", 0) == 0;
}

/// Heuristic for unfenced replies: a line can belong to a script run when it
/// is blank, a comment, a continuation of a brace structure, or starts with
/// an identifier-like command word and does not read like a sentence
/// (no trailing punctuation).
inline bool looks_like_script_line(const std::string& raw) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') return true;
    char first = line[0];
    if (first == '}' || first == '{' || first == ']' || first == '$' || first == '[')
        return true;
    if (!(std::isalpha(static_cast<unsigned char>(first)) || first == '_')) return false;
    char last = line.back();
    if (last == '.' || last == ':' || last == '!' || last == '?' || last == ',') return false;
    std::size_t i = 0;
    while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) ||
                               line[i] == '_' || line[i] == ':'))
        ++i;
    return i == line.size() || line[i] == ' ' || line[i] == '\t';
}

}  // namespace detail

/// Contents of the first fenced code block; with no fence, the longest
/// maximal run of lines that parses as complete Tcl. Empty optional =
/// extraction failure.
inline std::optional<std::string> extract_script(const std::string& response) {
    std::vector<std::string> lines = split_lines(response);

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!detail::is_fence(lines[i])) continue;
        std::string block;
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            if (detail::is_fence(lines[j])) {
                if (trim(block).empty()) return std::nullopt;
                return block;
            }
            block += lines[j];
            block += '\n';
        }
        // Unclosed fence: take the rest if it holds anything.
        if (!trim(block).empty()) return block;
        return std::nullopt;
    }

    // Fallback: best maximal run of script-looking lines.
    std::optional<std::string> best;
    std::size_t best_lines = 0;
    std::size_t i = 0;
    while (i < lines.size()) {
        if (!detail::looks_like_script_line(lines[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < lines.size() && detail::looks_like_script_line(lines[j])) ++j;
        std::string run;
        std::size_t non_blank = 0;
        for (std::size_t k = i; k < j; ++k) {
            run += lines[k];
            run += '\n';
            if (!trim(lines[k]).empty()) ++non_blank;
        }
        if (non_blank > 0 && non_blank > best_lines && tcl::check_complete(run).complete) {
            tcl::ScriptAst ast = tcl::parse_script(run);
            if (ast.parse_errors.empty() && !ast.commands.empty()) {
                best = run;
                best_lines = non_blank;
            }
        }
        i = j;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

enum class FunctionVerdict { Pending, Pass, Fail, SkippedSyntaxFail, JudgeMalformed };

inline const char* to_string(FunctionVerdict v) {
    switch (v) {
        case FunctionVerdict::Pending: return "pending";
        case FunctionVerdict::Pass: return "pass";
        case FunctionVerdict::Fail: return "fail";
        case FunctionVerdict::SkippedSyntaxFail: return "skipped-syntax-fail";
        case FunctionVerdict::JudgeMalformed: return "judge-malformed";
    }
    return "?";
}

inline FunctionVerdict function_verdict_from_string(const std::string& s) {
    if (s == "pass") return FunctionVerdict::Pass;
    if (s == "fail") return FunctionVerdict::Fail;
    if (s == "skipped-syntax-fail") return FunctionVerdict::SkippedSyntaxFail;
    if (s == "judge-malformed") return FunctionVerdict::JudgeMalformed;
    return FunctionVerdict::Pending;
}

struct EvalRecord {
    std::string task_id;
    int sample_index = 0;
    std::string generation_status = "ok";  // ok | failed-transport
    std::string raw_response;
    std::optional<std::string> extracted_script;
    bool syntax_pass = false;
    std::vector<Violation> violations;
    FunctionVerdict function_verdict = FunctionVerdict::Pending;
    std::string judge_rationale;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["task_id"] = task_id;
        j["sample_index"] = sample_index;
        j["generation_status"] = generation_status;
        j["raw_response"] = raw_response;
        if (extracted_script) j["extracted_script"] = *extracted_script;
        else j["extracted_script"] = nullptr;
        j["syntax_verdict"] = syntax_pass ? "pass" : "fail";
        auto vs = nlohmann::ordered_json::array();
        for (const Violation& v : violations)
            vs.push_back({{"rule", tclforge::to_string(v.rule_id)},
                          {"severity", tclforge::to_string(v.severity)},
                          {"message", v.message},
                          {"span", {v.span.begin, v.span.end}}});
        j["violations"] = std::move(vs);
        j["function_verdict"] = to_string(function_verdict);
        j["judge_rationale"] = judge_rationale;
        return j;
    }

    static EvalRecord from_json(const nlohmann::json& j) {
        EvalRecord r;
        r.task_id = j.at("task_id").get<std::string>();
        r.sample_index = j.at("sample_index").get<int>();
        r.generation_status = j.value("generation_status", "ok");
        r.raw_response = j.value("raw_response", "");
        if (j.contains("extracted_script") && !j["extracted_script"].is_null())
            r.extracted_script = j["extracted_script"].get<std::string>();
        r.syntax_pass = j.value("syntax_verdict", "fail") == "pass";
        for (const auto& v : j.value("violations", nlohmann::json::array())) {
            Violation violation;
            violation.rule_id = rule_id_from_string(v.at("rule").get<std::string>());
            violation.severity = severity_from_string(v.at("severity").get<std::string>());
            violation.message = v.value("message", "");
            violation.span = {v.at("span").at(0).get<std::size_t>(),
                              v.at("span").at(1).get<std::size_t>()};
            r.violations.push_back(std::move(violation));
        }
        r.function_verdict = function_verdict_from_string(j.value("function_verdict", ""));
        r.judge_rationale = j.value("judge_rationale", "");
        return r;
    }
};

// ---------------------------------------------------------------------------
// Generation step
// ---------------------------------------------------------------------------

/// n independent completions for one task, each extracted and statically
/// verified immediately. Transport errors mark the sample failed-transport;
/// they never abort the task.
inline std::vector<EvalRecord> generate_samples(const bench::BenchTask& task,
                                                llm::ChatClient& generator,
                                                const CommandDatabase& db, int n,
                                                const LintConfig& lint_config = {}) {
    if (n < 1) throw ConfigError("generate_samples needs n >= 1");
    std::string prompt = build_gen_prompt(task).text();
    std::vector<EvalRecord> records;
    records.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        EvalRecord rec;
        rec.task_id = task.id;
        rec.sample_index = i;
        try {
            llm::ChatExchange ex = generator.complete({{"user", prompt}});
            rec.raw_response = ex.response_text;
        } catch (const llm::TransportError&) {
            rec.generation_status = "failed-transport";
            rec.syntax_pass = false;
            rec.function_verdict = FunctionVerdict::SkippedSyntaxFail;
            records.push_back(std::move(rec));
            continue;
        }
        rec.extracted_script = extract_script(rec.raw_response);
        if (!rec.extracted_script) {
            rec.syntax_pass = false;  // extraction failure implies syntax fail
            rec.function_verdict = FunctionVerdict::SkippedSyntaxFail;
        } else {
            LintReport lint = lint_script(*rec.extracted_script, db, lint_config, task.id);
            rec.syntax_pass = lint.pass;
            rec.violations = lint.violations;
            if (!lint.pass) rec.function_verdict = FunctionVerdict::SkippedSyntaxFail;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Judge step
// ---------------------------------------------------------------------------

inline constexpr std::string_view kJudgePromptTemplate =
    "You are a meticulous physical design reviewer judging whether a candidate Innovus Tcl\n"
    "script fulfills a design requirement. The golden script is one known-correct solution;\n"
    "a candidate may differ from it and still be functionally correct, as long as it\n"
    "achieves the requirement. Use the command reference below to reason precisely about\n"
    "what each command and option does.\n"
    "\n"
    "Requirement:\n{{requirement}}\n"
    "\n"
    "Golden script:\n{{golden}}\n"
    "\n"
    "Candidate script:\n{{candidate}}\n"
    "\n"
    "Command reference:\n{{docs}}\n"
    "Explain your reasoning, then end your reply with one final line that is exactly\n"
    "VERDICT: PASS\n"
    "or\n"
    "VERDICT: FAIL\n";

/// Fixed order: requirement, golden, candidate, documentation for the union
/// of commands in both scripts, verdict-format instruction.
inline std::string build_judge_prompt(const bench::BenchTask& task,
                                      const std::string& candidate_script,
                                      const CommandDatabase& db) {
    std::vector<std::string> names;
    for (const auto& [name, span] : tcl::extract_commands(tcl::parse_script(task.golden_script)))
        names.push_back(name);
    for (const auto& [name, span] : tcl::extract_commands(tcl::parse_script(candidate_script)))
        names.push_back(name);

    std::string out(kJudgePromptTemplate);
    auto replace = [&](const std::string& key, const std::string& value) {
        std::string marker = "{{" + key + "}}";
        std::size_t pos;
        while ((pos = out.find(marker)) != std::string::npos)
            out.replace(pos, marker.size(), value);
    };
    replace("requirement", task.requirement);
    replace("golden", task.golden_script);
    replace("candidate", candidate_script);
    replace("docs", doc_bundle(db, names));
    return out;
}

struct JudgeOutcome {
    FunctionVerdict verdict = FunctionVerdict::JudgeMalformed;
    std::string rationale;
};

namespace detail {

/// The verdict is the final non-blank line: `VERDICT: PASS` or
/// `VERDICT: FAIL`, tolerant of surrounding whitespace.
inline std::optional<std::pair<bool, std::string>> parse_judge_reply(const std::string& text) {
    std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = lines.size(); i-- > 0;) {
        std::string t = trim(lines[i]);
        if (t.empty()) continue;
        bool pass = t == "VERDICT: PASS";
        bool fail = t == "VERDICT: FAIL";
        if (!pass && !fail) return std::nullopt;
        std::string rationale;
        for (std::size_t k = 0; k < i; ++k) {
            rationale += lines[k];
            if (k + 1 < i) rationale += '\n';
        }
        return std::make_pair(pass, trim(rationale));
    }
    return std::nullopt;
}

}  // namespace detail

/// One retry on malformed output, then judge-malformed (counts as
/// not-correct). Transport errors surface as judge-malformed too.
inline JudgeOutcome judge_functional(const std::string& prompt, llm::ChatClient& judge) {
    JudgeOutcome outcome;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply;
        try {
            reply = judge.complete({{"user", prompt}}).response_text;
        } catch (const llm::TransportError& e) {
            outcome.rationale = std::string("judge transport error: ") + e.what();
            continue;
        }
        if (auto parsed = detail::parse_judge_reply(reply)) {
            outcome.verdict = parsed->first ? FunctionVerdict::Pass : FunctionVerdict::Fail;
            outcome.rationale = parsed->second;
            return outcome;
        }
        outcome.rationale = "judge reply had no VERDICT line";
    }
    outcome.verdict = FunctionVerdict::JudgeMalformed;
    return outcome;
}

// ---------------------------------------------------------------------------
// Full evaluation
// ---------------------------------------------------------------------------

struct EvalParams {
    int n = 5;
    std::vector<int> ks = {1, 5};
    int task_concurrency = 2;
    LintConfig lint_config;
};

struct EvalOutcome {
    std::vector<EvalRecord> records;  // (task, sample) order
    bench::PassKReport report;
    std::size_t judge_calls = 0;
    std::size_t resumed_tasks = 0;
};

/// Per task: generate n samples, gate by syntax, judge only the survivors;
/// tallies feed the aggregate report. When a records path is given the run
/// persists records with a self-describing header and resumes by task id.
inline EvalOutcome evaluate(const bench::TaskSuite& suite, llm::ChatClient& generator,
                            llm::ChatClient& judge, const CommandDatabase& db,
                            const EvalParams& params = {},
                            const std::string& records_path = {}) {
    if (params.n < 1) throw ConfigError("evaluate needs n >= 1");
    for (int k : params.ks)
        if (k < 1 || k > params.n)
            throw ConfigError("every k must satisfy 1 <= k <= n");

    nlohmann::ordered_json header;
    header["format"] = "tclforge-eval-records";
    header["version"] = 1;
    header["schema_digest"] = schema_digest(db);
    header["n"] = params.n;
    header["ks"] = params.ks;
    header["gen_model"] = generator.config().model;
    header["gen_temperature"] = generator.config().temperature;
    header["judge_model"] = judge.config().model;
    header["judge_temperature"] = judge.config().temperature;
    header["gen_prompt_digest"] =
        digest_hex(std::string(kGenRolePreamble) + "\n" + std::string(kGenFormatInstruction));
    header["judge_prompt_digest"] = digest_hex(kJudgePromptTemplate);
    const std::string header_line = header.dump();

    // Resume: records for tasks that completed all n samples are reused.
    std::map<std::string, std::vector<EvalRecord>> completed;
    if (!records_path.empty()) {
        try {
            std::vector<std::string> lines = split_lines(read_file(records_path));
            if (!lines.empty() && trim(lines[0]) != "" ) {
                auto old_header = nlohmann::json::parse(lines[0]);
                if (old_header.value("format", "") != "tclforge-eval-records" ||
                    old_header.dump() != nlohmann::json::parse(header_line).dump())
                    throw ConfigError("existing records at " + records_path +
                                      " were produced with a different configuration");
            }
            std::map<std::string, std::vector<EvalRecord>> by_task;
            for (std::size_t i = 1; i < lines.size(); ++i) {
                if (trim(lines[i]).empty()) continue;
                EvalRecord r = EvalRecord::from_json(nlohmann::json::parse(lines[i]));
                by_task[r.task_id].push_back(std::move(r));
            }
            for (auto& [id, recs] : by_task)
                if (recs.size() == static_cast<std::size_t>(params.n))
                    completed[id] = std::move(recs);
        } catch (const IoError&) {
            // fresh run
        }
    }

    struct TaskSlot {
        bool done = false;
        std::vector<EvalRecord> records;
        std::size_t judge_calls = 0;
    };
    std::vector<TaskSlot> slots(suite.tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::condition_variable cv;

    auto run_task = [&](std::size_t idx) {
        const bench::BenchTask& task = suite.tasks[idx];
        TaskSlot slot;
        auto it = completed.find(task.id);
        if (it != completed.end()) {
            slot.records = it->second;
        } else {
            slot.records = generate_samples(task, generator, db, params.n, params.lint_config);
            for (EvalRecord& rec : slot.records) {
                if (!rec.syntax_pass) continue;  // two-step gating: no judge call
                std::string prompt = build_judge_prompt(task, *rec.extracted_script, db);
                JudgeOutcome judged = judge_functional(prompt, judge);
                rec.function_verdict = judged.verdict;
                rec.judge_rationale = judged.rationale;
                ++slot.judge_calls;
            }
        }
        {
            std::lock_guard<std::mutex> lock(mu);
            slot.done = true;
            slots[idx] = std::move(slot);
        }
        cv.notify_all();
    };
    auto worker = [&] {
        while (true) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= slots.size()) return;
            run_task(idx);
        }
    };
    std::vector<std::thread> workers;
    std::size_t thread_count =
        std::min(static_cast<std::size_t>(params.task_concurrency), slots.size());
    for (std::size_t t = 0; t < thread_count; ++t) workers.emplace_back(worker);

    EvalOutcome outcome;
    std::vector<bench::TaskTally> tallies;
    std::optional<std::ofstream> out;
    if (!records_path.empty()) {
        out.emplace(records_path, std::ios::binary | std::ios::trunc);
        if (!*out) {
            for (auto& t : workers) t.join();
            throw IoError("cannot write records: " + records_path);
        }
        *out << header_line << "\n";
    }
    for (std::size_t idx = 0; idx < slots.size(); ++idx) {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return slots[idx].done; });
        TaskSlot slot = std::move(slots[idx]);
        lock.unlock();

        outcome.judge_calls += slot.judge_calls;
        if (completed.count(suite.tasks[idx].id)) ++outcome.resumed_tasks;
        bench::TaskTally tally;
        tally.task_id = suite.tasks[idx].id;
        tally.n = params.n;
        for (EvalRecord& rec : slot.records) {
            if (rec.syntax_pass) ++tally.c_syntax;
            if (rec.function_verdict == FunctionVerdict::Pass) ++tally.c_function;
            if (out) {
                *out << rec.to_json().dump() << "\n";
                out->flush();
            }
            outcome.records.push_back(std::move(rec));
        }
        tallies.push_back(std::move(tally));
    }
    for (auto& t : workers) t.join();

    outcome.report = bench::aggregate(tallies, suite, params.ks);
    return outcome;
}

// ---------------------------------------------------------------------------
// Judge-vs-human agreement audit
// ---------------------------------------------------------------------------

struct HumanLabel {
    std::string task_id;
    int sample_index = 0;
    bool pass = false;
    std::string reviewer;
    std::string notes;
};

struct HumanLabelSet {
    std::vector<HumanLabel> labels;

    static HumanLabelSet from_jsonl(const std::string& text) {
        HumanLabelSet set;
        for (const std::string& line : split_lines(text)) {
            if (trim(line).empty()) continue;
            auto j = nlohmann::json::parse(line);
            if (j.value("format", "") == "tclforge-human-labels") continue;  // header
            HumanLabel l;
            l.task_id = j.at("task_id").get<std::string>();
            l.sample_index = j.at("sample_index").get<int>();
            l.pass = j.at("verdict").get<std::string>() == "pass";
            l.reviewer = j.value("reviewer", "");
            l.notes = j.value("notes", "");
            set.labels.push_back(std::move(l));
        }
        return set;
    }
};

struct Disagreement {
    std::string task_id;
    int sample_index = 0;
    bool judge_pass = false;
    bool human_pass = false;
};

struct AgreementReport {
    std::size_t labeled = 0;
    std::size_t judge_pass_count = 0;
    std::size_t human_pass_count = 0;
    std::size_t both_pass_count = 0;
    double precision = 1.0;  // |judge ∩ human| / |judge|
    double recall = 1.0;     // |judge ∩ human| / |human|
    bool judge_subset_of_human = true;
    std::vector<Disagreement> disagreements;
};

/// Precision/recall of the judge against human review over the labeled
/// pairs. Every label must reference an existing record whose sample passed
/// the syntax gate (only those ever reach a judge or a reviewer).
inline AgreementReport agreement_report(const std::vector<EvalRecord>& records,
                                        const HumanLabelSet& labels) {
    std::map<std::pair<std::string, int>, const EvalRecord*> index;
    for (const EvalRecord& r : records) index[{r.task_id, r.sample_index}] = &r;

    AgreementReport report;
    for (const HumanLabel& label : labels.labels) {
        auto it = index.find({label.task_id, label.sample_index});
        if (it == index.end())
            throw std::invalid_argument("label references unknown record " + label.task_id +
                                        "#" + std::to_string(label.sample_index));
        const EvalRecord& rec = *it->second;
        if (!rec.syntax_pass)
            throw std::invalid_argument("label references record " + label.task_id + "#" +
                                        std::to_string(label.sample_index) +
                                        " that failed the syntax gate");
        bool judge_pass = rec.function_verdict == FunctionVerdict::Pass;
        ++report.labeled;
        if (judge_pass) ++report.judge_pass_count;
        if (label.pass) ++report.human_pass_count;
        if (judge_pass && label.pass) ++report.both_pass_count;
        if (judge_pass != label.pass)
            report.disagreements.push_back(
                {label.task_id, label.sample_index, judge_pass, label.pass});
    }
    report.precision = report.judge_pass_count == 0
                           ? 1.0
                           : static_cast<double>(report.both_pass_count) /
                                 static_cast<double>(report.judge_pass_count);
    report.recall = report.human_pass_count == 0
                        ? 1.0
                        : static_cast<double>(report.both_pass_count) /
                              static_cast<double>(report.human_pass_count);
    report.judge_subset_of_human = report.both_pass_count == report.judge_pass_count;
    return report;
}

}  // namespace tclforge::eval
