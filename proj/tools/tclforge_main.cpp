// tclforge: lint Innovus-style Tcl, scan tool logs, validate command
// schemas, synthesize training tuples, validate benchmark suites, run
// two-step evaluations and report pass@k tables.
//
// Exit codes: 0 success, 1 operation-level failure (lint violations found,
// invalid schema/suite, pattern present in log), 2 usage or configuration
// error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tclforge/bench.hpp"
#include "tclforge/command_db.hpp"
#include "tclforge/core.hpp"
#include "tclforge/eval.hpp"
#include "tclforge/lint.hpp"
#include "tclforge/llm.hpp"
#include "tclforge/synth.hpp"
#include "tclforge/tcl.hpp"

namespace {

using namespace tclforge;

constexpr int kExitOk = 0;
constexpr int kExitOperationFailed = 1;
constexpr int kExitUsage = 2;

std::string read_stdin() {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
}

std::string read_input(const std::string& path) {
    return path == "-" ? read_stdin() : read_file(path);
}

// -----------------------------------------------------------------------
// Run configuration file
// -----------------------------------------------------------------------

struct RunConfig {
    std::string schema_path;
    LintConfig lint;
    std::map<std::string, llm::EndpointConfig> endpoints;  // teacher/generator/judge
    synth::SynthConfig synth_config;
    eval::EvalParams eval_params;
    std::map<std::string, std::string> outputs;
    std::string digest;  // of the raw config text

    static void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                    const std::string& where,
                                    std::vector<std::string>& problems) {
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key))
                problems.push_back(where + ": unknown key \"" + key + "\"");
    }

    static RunConfig load(const std::string& path) {
        std::string text = read_file(path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ": not valid JSON: " + e.what());
        }
        std::vector<std::string> problems;
        reject_unknown_keys(j, {"schema", "lint", "endpoints", "synth", "eval", "outputs"},
                            path, problems);

        RunConfig cfg;
        cfg.digest = digest_hex(text);
        cfg.schema_path = j.value("schema", "");
        if (cfg.schema_path.empty()) problems.push_back(path + ": \"schema\" is required");
        else if (!std::filesystem::exists(cfg.schema_path))
            problems.push_back(path + ": schema file does not exist: " + cfg.schema_path);

        if (j.contains("lint")) {
            reject_unknown_keys(j["lint"],
                                {"prefix_matching", "unknown_command_severity", "predefined",
                                 "control_commands", "demote_catch_bodies"},
                                path + ".lint", problems);
            cfg.lint = LintConfig::from_json(j["lint"]);
        }
        if (j.contains("endpoints")) {
            reject_unknown_keys(j["endpoints"], {"teacher", "generator", "judge"},
                                path + ".endpoints", problems);
            for (const auto& [name, ep] : j["endpoints"].items()) {
                reject_unknown_keys(ep,
                                    {"name", "base_url", "path", "model", "api_key_env",
                                     "temperature", "max_tokens", "timeout_seconds",
                                     "max_retries", "max_concurrent", "min_interval_ms",
                                     "backoff_base_ms"},
                                    path + ".endpoints." + name, problems);
                llm::EndpointConfig e = llm::EndpointConfig::from_json(ep);
                if (e.name.empty()) e.name = name;
                cfg.endpoints[name] = std::move(e);
            }
        }
        if (j.contains("synth")) {
            reject_unknown_keys(j["synth"],
                                {"target_fragment_count", "commands_per_fragment",
                                 "category_mix", "rng_seed", "mutation_probability", "mutators",
                                 "max_teacher_retries", "stage3_concurrency"},
                                path + ".synth", problems);
            cfg.synth_config = synth::SynthConfig::from_json(j["synth"]);
        }
        if (j.contains("eval")) {
            reject_unknown_keys(j["eval"], {"n", "ks", "task_concurrency"}, path + ".eval",
                                problems);
            cfg.eval_params.n = j["eval"].value("n", 5);
            if (j["eval"].contains("ks"))
                cfg.eval_params.ks = j["eval"]["ks"].get<std::vector<int>>();
            cfg.eval_params.task_concurrency = j["eval"].value("task_concurrency", 2);
        }
        if (j.contains("outputs")) {
            reject_unknown_keys(j["outputs"], {"dataset", "records"}, path + ".outputs",
                                problems);
            for (const auto& [key, value] : j["outputs"].items())
                cfg.outputs[key] = value.get<std::string>();
        }
        if (!problems.empty()) {
            std::string msg = "configuration problems:";
            for (const auto& p : problems) msg += "\n  " + p;
            throw ConfigError(msg);
        }
        cfg.eval_params.lint_config = cfg.lint;
        return cfg;
    }

    llm::EndpointConfig endpoint_or_throw(const std::string& role) const {
        auto it = endpoints.find(role);
        if (it == endpoints.end())
            throw ConfigError("config has no \"" + role + "\" endpoint");
        return it->second;
    }
};

std::unique_ptr<llm::ChatClient> make_client(const llm::EndpointConfig& endpoint,
                                             const std::string& mock_fixture_path) {
    if (mock_fixture_path.empty()) return std::make_unique<llm::ChatClient>(endpoint);
    auto transport =
        std::make_shared<llm::MockTransport>(llm::MockFixture::from_file(mock_fixture_path));
    return std::make_unique<llm::ChatClient>(endpoint, transport);
}

llm::EndpointConfig mock_endpoint_config(const std::string& role) {
    llm::EndpointConfig e;
    e.name = role;
    e.model = "mock-" + role;
    e.backoff_base_ms = 1;
    return e;
}

void print_run_banner(const std::string& sub, const std::string& schema_dig,
                      const std::string& config_dig, std::optional<std::uint64_t> seed) {
    std::cerr << "tclforge " << sub << ": schema=" << schema_dig;
    if (!config_dig.empty()) std::cerr << " config=" << config_dig;
    if (seed) std::cerr << " seed=" << *seed;
    std::cerr << "\n";
}

// -----------------------------------------------------------------------
// lint
// -----------------------------------------------------------------------

void print_report_table(const LintReport& report, const std::string& name, std::ostream& out) {
    out << name << ": " << (report.pass ? "pass" : "fail");
    if (!report.violations.empty()) out << " (" << report.violations.size() << " finding(s))";
    out << "\n";
    for (const Violation& v : report.violations) {
        out << "  " << name << ":" << v.span.begin << ": [" << to_string(v.severity) << "] "
            << to_string(v.rule_id) << ": " << v.message << "\n";
    }
}

nlohmann::ordered_json report_to_json(const LintReport& report) {
    nlohmann::ordered_json j;
    j["script_id"] = report.script_id;
    j["verdict"] = report.pass ? "pass" : "fail";
    auto vs = nlohmann::ordered_json::array();
    for (const Violation& v : report.violations)
        vs.push_back({{"rule", to_string(v.rule_id)},
                      {"severity", to_string(v.severity)},
                      {"message", v.message},
                      {"span", {v.span.begin, v.span.end}}});
    j["violations"] = std::move(vs);
    j["stats"] = report.stats;
    return j;
}

int cmd_lint(const std::vector<std::string>& paths, const std::string& schema_path,
             const LintConfig& config, const std::string& format) {
    CommandDatabase db = load_schema_or_throw(schema_path);
    print_run_banner("lint", schema_digest(db), "", std::nullopt);
    bool all_pass = true;
    std::vector<std::string> inputs = paths;
    if (inputs.empty()) inputs.push_back("-");
    for (const std::string& path : inputs) {
        std::string source = read_input(path);
        std::string name = path == "-" ? "<stdin>" : path;
        LintReport report = lint_script(source, db, config, name);
        all_pass = all_pass && report.pass;
        if (format == "jsonl") std::cout << report_to_json(report).dump() << "\n";
        else print_report_table(report, name, std::cout);
    }
    return all_pass ? kExitOk : kExitOperationFailed;
}

// -----------------------------------------------------------------------
// scan-log
// -----------------------------------------------------------------------

int cmd_scan_log(const std::string& path) {
    LogScanResult result = scan_log(read_input(path));
    for (std::size_t line : result.lines) std::cout << "match at line " << line << "\n";
    std::cout << (result.pass ? "pass" : "fail") << "\n";
    return result.pass ? kExitOk : kExitOperationFailed;
}

// -----------------------------------------------------------------------
// schema check
// -----------------------------------------------------------------------

int cmd_schema_check(const std::string& path) {
    SchemaLoadResult result = load_schema(path);
    for (const SchemaDiagnostic& d : result.diagnostics)
        std::cout << "[" << to_string(d.severity) << "] " << d.location << ": " << d.message
                  << "\n";
    if (!result.ok()) {
        std::cout << "schema invalid\n";
        return kExitOperationFailed;
    }
    std::cout << "schema ok: " << result.db.specs.size() << " commands, "
              << result.db.builtins.size() << " builtins, digest " << schema_digest(result.db)
              << "\n";
    return kExitOk;
}

// -----------------------------------------------------------------------
// synth run
// -----------------------------------------------------------------------

int cmd_synth_run(const std::string& config_path, const std::string& out_path,
                  const std::string& mock_teacher) {
    RunConfig cfg = RunConfig::load(config_path);
    CommandDatabase db = load_schema_or_throw(cfg.schema_path);
    print_run_banner("synth run", schema_digest(db), cfg.digest, cfg.synth_config.rng_seed);

    llm::EndpointConfig teacher_ep;
    if (!mock_teacher.empty()) {
        teacher_ep = cfg.endpoints.count("teacher") ? cfg.endpoints.at("teacher")
                                                    : mock_endpoint_config("teacher");
    } else {
        teacher_ep = cfg.endpoint_or_throw("teacher");
    }
    auto teacher = make_client(teacher_ep, mock_teacher);

    synth::PipelineResult result =
        synth::run_pipeline(cfg.synth_config, db, *teacher, out_path, cfg.lint);
    std::cout << "generated " << result.counts.generated << ", lint pass "
              << result.counts.lint_pass << ", deduped " << result.counts.deduped
              << ", emitted " << result.counts.emitted << "\n";
    std::cout << "dataset: " << result.dataset_path << "\n";
    std::cout << "manifest: " << result.manifest_path << "\n";
    return kExitOk;
}

// -----------------------------------------------------------------------
// bench validate / bench report
// -----------------------------------------------------------------------

int cmd_bench_validate(const std::string& suite_path, const std::string& schema_path) {
    CommandDatabase db = load_schema_or_throw(schema_path);
    print_run_banner("bench validate", schema_digest(db), "", std::nullopt);
    try {
        bench::TaskSuite suite = bench::load_suite(suite_path, db);
        std::cout << "suite ok: " << suite.tasks.size() << " tasks\n";
        for (const auto& [cat, n] : suite.declared_categories)
            std::cout << "  " << cat << ": " << n << "\n";
        for (const auto& [lvl, n] : suite.declared_levels)
            std::cout << "  " << lvl << ": " << n << "\n";
        return kExitOk;
    } catch (const bench::SuiteError& e) {
        for (const std::string& p : e.problems) std::cout << p << "\n";
        std::cout << "suite invalid\n";
        return kExitOperationFailed;
    }
}

std::vector<bench::TaskTally> load_tallies(const std::string& path) {
    std::vector<bench::TaskTally> tallies;
    for (const std::string& line : split_lines(read_file(path))) {
        if (trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (j.value("format", "") == "tclforge-tallies") continue;  // header
        bench::TaskTally t;
        t.task_id = j.at("task_id").get<std::string>();
        t.n = j.at("n").get<int>();
        t.c_syntax = j.at("c_syntax").get<int>();
        t.c_function = j.at("c_function").get<int>();
        tallies.push_back(std::move(t));
    }
    return tallies;
}

bench::GroupBy parse_group_by(const std::string& by) {
    if (by == "level") return bench::GroupBy::Level;
    return bench::GroupBy::Category;
}

bench::RenderFormat parse_render_format(const std::string& fmt) {
    if (fmt == "delimited") return bench::RenderFormat::Delimited;
    return bench::RenderFormat::Table;
}

int cmd_bench_report(const std::string& tallies_path, const std::string& suite_path,
                     const std::string& schema_path, const std::string& by,
                     const std::string& format, const std::vector<int>& ks) {
    CommandDatabase db = load_schema_or_throw(schema_path);
    bench::TaskSuite suite = bench::load_suite(suite_path, db);
    std::vector<bench::TaskTally> tallies = load_tallies(tallies_path);
    bench::PassKReport report = bench::aggregate(tallies, suite, ks);
    std::cout << bench::render_report(report, parse_render_format(format), parse_group_by(by));
    return kExitOk;
}

// -----------------------------------------------------------------------
// eval run / report / agree
// -----------------------------------------------------------------------

int cmd_eval_run(const std::string& suite_path, const std::string& config_path,
                 const std::string& out_path, const std::string& mock_generator,
                 const std::string& mock_judge) {
    RunConfig cfg = RunConfig::load(config_path);
    CommandDatabase db = load_schema_or_throw(cfg.schema_path);
    print_run_banner("eval run", schema_digest(db), cfg.digest, std::nullopt);
    bench::TaskSuite suite = bench::load_suite(suite_path, db, cfg.lint);

    llm::EndpointConfig gen_ep;
    if (!mock_generator.empty()) {
        gen_ep = cfg.endpoints.count("generator") ? cfg.endpoints.at("generator")
                                                  : mock_endpoint_config("generator");
    } else {
        gen_ep = cfg.endpoint_or_throw("generator");
    }
    llm::EndpointConfig judge_ep;
    if (!mock_judge.empty()) {
        judge_ep = cfg.endpoints.count("judge") ? cfg.endpoints.at("judge")
                                                : mock_endpoint_config("judge");
    } else {
        judge_ep = cfg.endpoint_or_throw("judge");
        // Judging defaults to deterministic decoding unless configured.
        if (judge_ep.temperature == 1.0) judge_ep.temperature = 0.0;
    }

    auto generator = make_client(gen_ep, mock_generator);
    auto judge = make_client(judge_ep, mock_judge);

    eval::EvalOutcome outcome =
        eval::evaluate(suite, *generator, *judge, db, cfg.eval_params, out_path);
    std::cout << "records: " << out_path << " (" << outcome.records.size() << " samples, "
              << outcome.judge_calls << " judge calls";
    if (outcome.resumed_tasks) std::cout << ", " << outcome.resumed_tasks << " tasks resumed";
    std::cout << ")\n";
    std::cout << bench::render_report(outcome.report, bench::RenderFormat::Table,
                                      bench::GroupBy::Category);
    return kExitOk;
}

struct LoadedRecords {
    int n = 0;
    std::vector<eval::EvalRecord> records;
};

LoadedRecords load_records(const std::string& path) {
    LoadedRecords out;
    std::vector<std::string> lines = split_lines(read_file(path));
    if (lines.empty()) throw ConfigError(path + ": empty records file");
    auto header = nlohmann::json::parse(lines[0]);
    if (header.value("format", "") != "tclforge-eval-records")
        throw ConfigError(path + ": not a records file (missing header)");
    out.n = header.value("n", 5);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        out.records.push_back(eval::EvalRecord::from_json(nlohmann::json::parse(lines[i])));
    }
    return out;
}

int cmd_eval_report(const std::string& records_path, const std::string& suite_path,
                    const std::string& schema_path, const std::string& by,
                    const std::string& format, std::vector<int> ks) {
    CommandDatabase db = load_schema_or_throw(schema_path);
    bench::TaskSuite suite = bench::load_suite(suite_path, db);
    LoadedRecords loaded = load_records(records_path);

    std::map<std::string, bench::TaskTally> tallies;
    for (const eval::EvalRecord& r : loaded.records) {
        bench::TaskTally& t = tallies[r.task_id];
        t.task_id = r.task_id;
        t.n = loaded.n;
        if (r.syntax_pass) ++t.c_syntax;
        if (r.function_verdict == eval::FunctionVerdict::Pass) ++t.c_function;
    }
    std::vector<bench::TaskTally> flat;
    for (auto& [id, t] : tallies) flat.push_back(std::move(t));
    if (ks.empty()) ks = {1, loaded.n};
    bench::PassKReport report = bench::aggregate(flat, suite, ks);
    std::cout << bench::render_report(report, parse_render_format(format), parse_group_by(by));
    return kExitOk;
}

int cmd_eval_agree(const std::string& records_path, const std::string& labels_path) {
    LoadedRecords loaded = load_records(records_path);
    eval::HumanLabelSet labels = eval::HumanLabelSet::from_jsonl(read_file(labels_path));
    eval::AgreementReport report = eval::agreement_report(loaded.records, labels);
    std::cout << "labeled samples:   " << report.labeled << "\n";
    std::cout << "judge pass:        " << report.judge_pass_count << "\n";
    std::cout << "human pass:        " << report.human_pass_count << "\n";
    std::cout << "both pass:         " << report.both_pass_count << "\n";
    std::cout << "precision:         " << format_percent(report.precision) << "%\n";
    std::cout << "recall:            " << format_percent(report.recall) << "%\n";
    std::cout << "judge subset of human: " << (report.judge_subset_of_human ? "yes" : "no")
              << "\n";
    if (!report.disagreements.empty()) {
        std::cout << "disagreements:\n";
        for (const auto& d : report.disagreements)
            std::cout << "  " << d.task_id << "#" << d.sample_index << ": judge "
                      << (d.judge_pass ? "pass" : "fail") << ", human "
                      << (d.human_pass ? "pass" : "fail") << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static Tcl verification, training-data synthesis and benchmark "
                 "evaluation for Innovus-style place-and-route scripting"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // ---- lint
    auto* lint_cmd = app.add_subcommand("lint", "Statically check Tcl script(s)");
    std::vector<std::string> lint_paths;
    std::string lint_schema;
    std::string lint_format = "table";
    LintConfig lint_config;
    std::string lint_unknown_sev = "error";
    lint_cmd->add_option("paths", lint_paths, "Script files ('-' for stdin)");
    lint_cmd->add_option("--schema", lint_schema, "Command schema JSON")->required();
    lint_cmd->add_option("--format", lint_format, "Output: table or jsonl")
        ->check(CLI::IsMember({"table", "jsonl"}));
    lint_cmd->add_flag("--prefix-matching", lint_config.prefix_matching,
                       "Accept unambiguous command/option prefixes");
    lint_cmd->add_option("--unknown-command-severity", lint_unknown_sev,
                         "Severity for unknown commands")
        ->check(CLI::IsMember({"error", "warning"}));
    lint_cmd->add_option("--predefined", lint_config.predefined,
                         "Variable names established outside the script");
    lint_cmd->add_flag("--demote-catch-bodies", lint_config.demote_catch_bodies,
                       "Report catch-body findings as warnings");

    // ---- scan-log
    auto* scan_cmd = app.add_subcommand("scan-log", "Scan a tool log for '** ERROR:'");
    std::string scan_path = "-";
    scan_cmd->add_option("path", scan_path, "Log file ('-' for stdin)");

    // ---- schema check
    auto* schema_cmd = app.add_subcommand("schema", "Command schema operations");
    schema_cmd->require_subcommand(1);
    auto* schema_check = schema_cmd->add_subcommand("check", "Validate a schema file");
    std::string schema_path;
    schema_check->add_option("schema", schema_path, "Schema JSON file")->required();

    // ---- synth run
    auto* synth_cmd = app.add_subcommand("synth", "Training-data synthesis");
    synth_cmd->require_subcommand(1);
    auto* synth_run = synth_cmd->add_subcommand("run", "Run the three-stage pipeline");
    std::string synth_config_path, synth_out, synth_mock_teacher;
    synth_run->add_option("--config", synth_config_path, "Run configuration JSON")->required();
    synth_run->add_option("--out", synth_out, "Output dataset (JSONL)")->required();
    synth_run->add_option("--mock-teacher", synth_mock_teacher,
                          "Mock fixture file standing in for the teacher endpoint");

    // ---- bench
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark suite operations");
    bench_cmd->require_subcommand(1);
    auto* bench_validate = bench_cmd->add_subcommand("validate", "Validate a task suite");
    std::string bv_suite, bv_schema;
    bench_validate->add_option("suite", bv_suite, "Suite file (JSONL with header)")->required();
    bench_validate->add_option("--schema", bv_schema, "Command schema JSON")->required();
    auto* bench_report = bench_cmd->add_subcommand("report", "Aggregate per-task tallies");
    std::string br_tallies, br_suite, br_schema, br_by = "category", br_format = "table";
    std::vector<int> br_ks = {1, 5};
    bench_report->add_option("tallies", br_tallies, "Tally records (JSONL)")->required();
    bench_report->add_option("--suite", br_suite, "Suite file")->required();
    bench_report->add_option("--schema", br_schema, "Command schema JSON")->required();
    bench_report->add_option("--by", br_by)->check(CLI::IsMember({"category", "level"}));
    bench_report->add_option("--format", br_format)
        ->check(CLI::IsMember({"table", "delimited"}));
    bench_report->add_option("--ks", br_ks, "pass@k values to report");

    // ---- eval
    auto* eval_cmd = app.add_subcommand("eval", "Two-step benchmark evaluation");
    eval_cmd->require_subcommand(1);
    auto* eval_run = eval_cmd->add_subcommand("run", "Sample, verify, judge and score");
    std::string er_suite, er_config, er_out, er_mock_gen, er_mock_judge;
    eval_run->add_option("--suite", er_suite, "Suite file")->required();
    eval_run->add_option("--config", er_config, "Run configuration JSON")->required();
    eval_run->add_option("--out", er_out, "Records output (JSONL)")->required();
    eval_run->add_option("--mock-generator", er_mock_gen, "Mock fixture for the generator");
    eval_run->add_option("--mock-judge", er_mock_judge, "Mock fixture for the judge");
    auto* eval_report = eval_cmd->add_subcommand("report", "Re-aggregate a records file");
    std::string erp_records, erp_suite, erp_schema, erp_by = "category", erp_format = "table";
    std::vector<int> erp_ks;
    eval_report->add_option("--records", erp_records, "Records file")->required();
    eval_report->add_option("--suite", erp_suite, "Suite file")->required();
    eval_report->add_option("--schema", erp_schema, "Command schema JSON")->required();
    eval_report->add_option("--by", erp_by)->check(CLI::IsMember({"category", "level"}));
    eval_report->add_option("--format", erp_format)
        ->check(CLI::IsMember({"table", "delimited"}));
    eval_report->add_option("--ks", erp_ks, "pass@k values to report");
    auto* eval_agree = eval_cmd->add_subcommand("agree", "Judge-vs-human agreement audit");
    std::string ea_records, ea_labels;
    eval_agree->add_option("--records", ea_records, "Records file")->required();
    eval_agree->add_option("--labels", ea_labels, "Human labels (JSONL)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Successful --help parses land here too, with exit code 0.
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*lint_cmd) {
            lint_config.unknown_command_severity =
                lint_unknown_sev == "warning" ? Severity::Warning : Severity::Error;
            return cmd_lint(lint_paths, lint_schema, lint_config, lint_format);
        }
        if (*scan_cmd) return cmd_scan_log(scan_path);
        if (*schema_check) return cmd_schema_check(schema_path);
        if (*synth_run) return cmd_synth_run(synth_config_path, synth_out, synth_mock_teacher);
        if (*bench_validate) return cmd_bench_validate(bv_suite, bv_schema);
        if (*bench_report)
            return cmd_bench_report(br_tallies, br_suite, br_schema, br_by, br_format, br_ks);
        if (*eval_run)
            return cmd_eval_run(er_suite, er_config, er_out, er_mock_gen, er_mock_judge);
        if (*eval_report)
            return cmd_eval_report(erp_records, erp_suite, erp_schema, erp_by, erp_format,
                                   erp_ks);
        if (*eval_agree) return cmd_eval_agree(ea_records, ea_labels);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const bench::SuiteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOperationFailed;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOperationFailed;
    }
    return kExitUsage;
}
