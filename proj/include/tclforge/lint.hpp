#pragma once

// Static syntax validator over parsed scripts plus the tool-log error
// scanner. This is the training-data filter and the first verification step
// of the benchmark: structure from the parser, command/option checks from
// the command database, and a flow-insensitive undefined-variable warning.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tclforge/command_db.hpp"
#include "tclforge/core.hpp"
#include "tclforge/tcl.hpp"
#include "tclforge/violation.hpp"

namespace tclforge {

struct LintConfig {
    bool prefix_matching = false;
    Severity unknown_command_severity = Severity::Error;
    std::vector<std::string> predefined;  // variable names established outside
    std::vector<std::string> control_commands = tcl::default_control_commands();
    // Commands inside catch bodies are linted at error severity; set this to
    // demote them to warnings.
    bool demote_catch_bodies = false;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["prefix_matching"] = prefix_matching;
        j["unknown_command_severity"] = to_string(unknown_command_severity);
        j["predefined"] = predefined;
        j["control_commands"] = control_commands;
        j["demote_catch_bodies"] = demote_catch_bodies;
        return j;
    }

    static LintConfig from_json(const nlohmann::json& j) {
        LintConfig c;
        c.prefix_matching = j.value("prefix_matching", false);
        c.unknown_command_severity =
            j.value("unknown_command_severity", "error") == std::string("warning")
                ? Severity::Warning
                : Severity::Error;
        if (j.contains("predefined"))
            c.predefined = j["predefined"].get<std::vector<std::string>>();
        if (j.contains("control_commands"))
            c.control_commands = j["control_commands"].get<std::vector<std::string>>();
        c.demote_catch_bodies = j.value("demote_catch_bodies", false);
        return c;
    }
};

struct LintReport {
    std::string script_id;
    bool pass = true;
    std::vector<Violation> violations;
    std::map<std::string, int> stats;  // rule id -> count

    bool verdict_pass() const { return pass; }
};

namespace detail {

struct VarEvent {
    std::string name;
    std::size_t offset;
};

inline std::string var_base_name(std::string_view ref) {
    if (ref.size() < 2 || ref[0] != '$') return std::string(ref);
    std::string_view body = ref.substr(1);
    if (body.front() == '{') {
        std::size_t close = body.find('}');
        body = body.substr(1, close == std::string_view::npos ? body.size() - 1 : close - 1);
        return std::string(body);
    }
    std::size_t paren = body.find('(');
    if (paren != std::string_view::npos) body = body.substr(0, paren);
    return std::string(body);
}

inline void collect_var_reads_from_token(const tcl::Token& tok, std::vector<VarEvent>& reads) {
    if (tok.kind == tcl::TokenKind::VariableReference)
        reads.push_back({var_base_name(tok.text), tok.span.begin});
    for (const tcl::Token& child : tok.children) collect_var_reads_from_token(child, reads);
}

inline void collect_var_reads_from_word(const tcl::Word& w, std::vector<VarEvent>& reads) {
    // A word that is itself a reference also appears in its own substitution
    // list, so the children are the single source of truth.
    for (const tcl::Token& child : w.substitutions) collect_var_reads_from_token(child, reads);
}

/// Names bound by a varlist word: `n`, or `{a b}`.
inline void collect_list_names(const tcl::Word& w, std::vector<VarEvent>& defs) {
    if (w.kind == tcl::TokenKind::BareWord) {
        defs.push_back({w.text, w.span.begin});
        return;
    }
    if (w.kind != tcl::TokenKind::BracedWord) return;
    for (const tcl::Token& t : tcl::tokenize(w.content())) {
        if (t.kind == tcl::TokenKind::BareWord)
            defs.push_back({t.text, w.span.begin});
    }
}

inline void collect_var_events(const tcl::CommandInvocation& inv, std::vector<VarEvent>& defs,
                               std::vector<VarEvent>& reads) {
    const auto& words = inv.words;
    auto literal_word = [&](std::size_t i) {
        return i < words.size() && !words[i].is_substitution();
    };
    const std::string& name = inv.name;
    if ((name == "set" || name == "lappend" || name == "append" || name == "incr") &&
        literal_word(1)) {
        defs.push_back({var_base_name("$" + words[1].content()), words[1].span.begin});
    } else if (name == "foreach" && words.size() >= 4) {
        // foreach varlist1 list1 ?varlist2 list2? ... body
        for (std::size_t i = 1; i + 2 < words.size(); i += 2) collect_list_names(words[i], defs);
    } else if (name == "proc" && words.size() >= 3) {
        // Parameters of the procedure; defaults look like {name value}.
        const tcl::Word& args = words[2];
        if (args.kind == tcl::TokenKind::BracedWord) {
            for (const tcl::Token& t : tcl::tokenize(args.content())) {
                if (t.kind == tcl::TokenKind::BareWord)
                    defs.push_back({t.text, args.span.begin});
                else if (t.kind == tcl::TokenKind::BracedWord && t.text.size() >= 2) {
                    auto inner = tcl::tokenize(t.text.substr(1, t.text.size() - 2));
                    if (!inner.empty() && inner[0].kind == tcl::TokenKind::BareWord)
                        defs.push_back({inner[0].text, args.span.begin});
                }
            }
        } else if (args.kind == tcl::TokenKind::BareWord) {
            defs.push_back({args.text, args.span.begin});
        }
    } else if ((name == "global" || name == "variable") && words.size() >= 2) {
        for (std::size_t i = 1; i < words.size(); ++i)
            if (literal_word(i)) defs.push_back({words[i].content(), words[i].span.begin});
    } else if (name == "catch") {
        for (std::size_t i = 2; i < words.size(); ++i)
            if (literal_word(i)) defs.push_back({words[i].content(), words[i].span.begin});
    } else if (name == "array" && words.size() >= 3 && literal_word(1) &&
               words[1].content() == "set" && literal_word(2)) {
        defs.push_back({words[2].content(), words[2].span.begin});
    }

    for (const tcl::Word& w : words) collect_var_reads_from_word(w, reads);
    for (const tcl::CommandInvocation& nested : inv.nested)
        collect_var_events(nested, defs, reads);
}

/// Names defined by `proc` anywhere in the script; calls to them are known
/// commands without signatures.
inline void collect_proc_names(const tcl::CommandInvocation& inv, std::set<std::string>& out) {
    if (inv.name == "proc" && inv.words.size() >= 2 && !inv.words[1].is_substitution())
        out.insert(inv.words[1].content());
    for (const tcl::CommandInvocation& nested : inv.nested) collect_proc_names(nested, out);
}

inline void lint_invocation(const tcl::CommandInvocation& inv, const CommandDatabase& db,
                            const LintConfig& config, const std::set<std::string>& user_procs,
                            bool inside_catch, std::vector<Violation>& out) {
    bool name_is_static = !inv.words.front().is_substitution();
    std::size_t base = out.size();
    if (name_is_static && !user_procs.count(inv.name)) {
        LookupResult hit = db.lookup(inv.name, config.prefix_matching);
        switch (hit.kind) {
            case LookupKind::Builtin:
                break;  // core Tcl commands are exempt from option checking
            case LookupKind::Spec: {
                auto violations = validate_invocation(*hit.spec, inv, config.prefix_matching);
                out.insert(out.end(), violations.begin(), violations.end());
                break;
            }
            case LookupKind::Unknown:
                out.push_back({RuleId::UnknownCommand, config.unknown_command_severity,
                               "unknown command \"" + inv.name + "\"",
                               inv.words.front().span});
                break;
        }
    }
    if (inside_catch && config.demote_catch_bodies) {
        for (std::size_t i = base; i < out.size(); ++i) out[i].severity = Severity::Warning;
    }
    bool next_inside_catch = inside_catch || inv.name == "catch";
    for (const tcl::CommandInvocation& nested : inv.nested)
        lint_invocation(nested, db, config, user_procs, next_inside_catch, out);
}

}  // namespace detail

/// Full static check of one script: parser structure, command and option
/// validation for every invocation (top-level and nested), and the
/// undefined-variable warning. All problems are report content; never throws.
inline LintReport lint_script(std::string_view source, const CommandDatabase& db,
                              const LintConfig& config = {}, std::string script_id = {}) {
    LintReport report;
    report.script_id = std::move(script_id);

    tcl::ParserOptions popts;
    popts.control_commands = config.control_commands;
    tcl::ScriptAst ast = tcl::parse_script(source, popts);

    for (const tcl::ParseError& e : ast.parse_errors)
        report.violations.push_back({RuleId::ParseError, Severity::Error, e.message, e.span});
    for (const tcl::ParseError& e : ast.soft_errors)
        report.violations.push_back({RuleId::ParseError, Severity::Error, e.message, e.span});

    std::set<std::string> user_procs;
    for (const tcl::CommandInvocation& inv : ast.commands)
        detail::collect_proc_names(inv, user_procs);
    for (const tcl::CommandInvocation& inv : ast.commands)
        detail::lint_invocation(inv, db, config, user_procs, /*inside_catch=*/false,
                                report.violations);

    // Flow-insensitive undefined-variable warnings: a read with no textually
    // earlier binding and no predefined entry.
    std::vector<detail::VarEvent> defs, reads;
    for (const tcl::CommandInvocation& inv : ast.commands)
        detail::collect_var_events(inv, defs, reads);
    std::set<std::string> predefined(config.predefined.begin(), config.predefined.end());
    for (const detail::VarEvent& r : reads) {
        if (r.name.empty() || predefined.count(r.name)) continue;
        bool bound_before = false;
        for (const detail::VarEvent& d : defs) {
            if (d.name == r.name && d.offset < r.offset) { bound_before = true; break; }
        }
        if (!bound_before)
            report.violations.push_back({RuleId::UndefinedVariable, Severity::Warning,
                                         "variable \"" + r.name +
                                             "\" is read but never set in this script",
                                         {r.offset, r.offset + r.name.size() + 1}});
    }

    std::stable_sort(report.violations.begin(), report.violations.end(),
                     [](const Violation& a, const Violation& b) {
                         return a.span.begin < b.span.begin;
                     });
    for (const Violation& v : report.violations) {
        report.stats[to_string(v.rule_id)]++;
        if (v.severity == Severity::Error) report.pass = false;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Tool-log scanning
// ---------------------------------------------------------------------------

struct LogScanResult {
    bool pass = true;                 // fail when the pattern appears
    std::vector<std::size_t> lines;   // 1-based numbers of matching lines
};

/// Matches the exact byte sequence "** ERROR:" anywhere in a line. No regex
/// interpretation; "**ERROR:" and bare "ERROR" never match.
inline LogScanResult scan_log(std::string_view log) {
    static constexpr std::string_view kPattern = "** ERROR:";
    LogScanResult result;
    std::size_t line_no = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i <= log.size(); ++i) {
        if (i == log.size() || log[i] == '\n') {
            std::string_view line = log.substr(line_start, i - line_start);
            if (line.find(kPattern) != std::string_view::npos) {
                result.pass = false;
                result.lines.push_back(line_no);
            }
            line_start = i + 1;
            ++line_no;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Corpus filtering
// ---------------------------------------------------------------------------

struct FilterStats {
    std::size_t total = 0;
    std::size_t passed = 0;
    std::size_t rejected = 0;
    std::map<std::string, int> per_rule;

    double rejection_rate() const {
        return total == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(total);
    }
};

struct FilterResult {
    std::vector<std::string> survivors;                          // input order
    std::vector<std::pair<std::string, LintReport>> rejects;
    FilterStats stats;
};

/// Stage-2 filter: keep scripts whose lint verdict is pass, order preserved.
inline FilterResult filter_corpus(const std::vector<std::string>& scripts,
                                  const CommandDatabase& db, const LintConfig& config = {}) {
    FilterResult result;
    result.stats.total = scripts.size();
    std::size_t index = 0;
    for (const std::string& script : scripts) {
        LintReport report = lint_script(script, db, config, std::to_string(index++));
        if (report.pass) {
            result.survivors.push_back(script);
            ++result.stats.passed;
        } else {
            for (const auto& [rule, count] : report.stats) result.stats.per_rule[rule] += count;
            result.rejects.emplace_back(script, std::move(report));
            ++result.stats.rejected;
        }
    }
    return result;
}

}  // namespace tclforge
