#pragma once

// Benchmark data model and scoring: task suites with category, subcategory
// and difficulty, the unbiased pass@k estimator, and the category/level
// report tables.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tclforge/command_db.hpp"
#include "tclforge/core.hpp"
#include "tclforge/lint.hpp"

namespace tclforge::bench {

inline const std::vector<std::string>& category_order() { return known_categories(); }

inline const std::vector<std::string>& level_order() {
    static const std::vector<std::string> levels = {"L1", "L2", "L3"};
    return levels;
}

struct BenchTask {
    std::string id;
    std::string category;      // one of DIQA NIAA FA PAO TAO
    std::string subcategory;   // free label; the suite's finer taxonomy
    std::string difficulty;    // L1 | L2 | L3
    std::string requirement;
    std::string golden_script;
    std::string notes;
};

struct TaskSuite {
    std::vector<BenchTask> tasks;
    std::string schema_digest;
    std::map<std::string, int> declared_categories;
    std::map<std::string, int> declared_levels;
};

struct SuiteError : std::runtime_error {
    explicit SuiteError(std::string msg, std::vector<std::string> problems = {})
        : std::runtime_error(std::move(msg)), problems(std::move(problems)) {}
    std::vector<std::string> problems;
};

// ---------------------------------------------------------------------------
// Suite file format: one header line, then one task record per line.
// ---------------------------------------------------------------------------

inline std::string write_suite(const TaskSuite& suite) {
    using ojson = nlohmann::ordered_json;
    ojson header;
    header["format"] = "tclforge-suite";
    header["version"] = 1;
    header["schema_digest"] = suite.schema_digest;
    header["counts"]["categories"] = suite.declared_categories;
    header["counts"]["levels"] = suite.declared_levels;
    std::string out = header.dump() + "\n";
    for (const BenchTask& t : suite.tasks) {
        ojson rec;
        rec["id"] = t.id;
        rec["category"] = t.category;
        rec["subcategory"] = t.subcategory;
        rec["difficulty"] = t.difficulty;
        rec["requirement"] = t.requirement;
        rec["golden_script"] = t.golden_script;
        if (!t.notes.empty()) rec["notes"] = t.notes;
        out += rec.dump() + "\n";
    }
    return out;
}

/// Parse and validate a suite against the schema it declares. Every problem
/// is collected; any problem rejects the suite.
inline TaskSuite load_suite_text(const std::string& text, const CommandDatabase& db,
                                 const LintConfig& lint_config = {},
                                 const std::string& origin = "<suite>") {
    using nlohmann::json;
    std::vector<std::string> problems;
    TaskSuite suite;

    std::vector<std::string> lines = split_lines(text);
    if (lines.empty() || trim(lines[0]).empty())
        throw SuiteError(origin + ": missing header line", {"missing header line"});

    json header;
    try {
        header = json::parse(lines[0]);
    } catch (const json::exception& e) {
        throw SuiteError(origin + ": header is not valid JSON: " + e.what(),
                         {std::string("header: ") + e.what()});
    }
    if (header.value("format", "") != "tclforge-suite")
        problems.push_back("header: missing or unexpected \"format\" marker");
    suite.schema_digest = header.value("schema_digest", "");
    if (suite.schema_digest.empty())
        problems.push_back("header: schema_digest is required");
    else if (suite.schema_digest != schema_digest(db))
        problems.push_back("header: schema_digest " + suite.schema_digest +
                           " does not match the provided schema (" + schema_digest(db) + ")");
    if (header.contains("counts")) {
        const json cat_counts = header["counts"].value("categories", json::object());
        const json lvl_counts = header["counts"].value("levels", json::object());
        for (const auto& [cat, n] : cat_counts.items())
            suite.declared_categories[cat] = n.get<int>();
        for (const auto& [lvl, n] : lvl_counts.items())
            suite.declared_levels[lvl] = n.get<int>();
    } else {
        problems.push_back("header: counts are required");
    }

    std::map<std::string, int> actual_categories;
    std::map<std::string, int> actual_levels;
    std::map<std::string, int> seen_ids;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::string where = "line " + std::to_string(i + 1);
        json rec;
        try {
            rec = json::parse(lines[i]);
        } catch (const json::exception& e) {
            problems.push_back(where + ": not valid JSON: " + e.what());
            continue;
        }
        BenchTask t;
        t.id = rec.value("id", "");
        t.category = rec.value("category", "");
        t.subcategory = rec.value("subcategory", "");
        t.difficulty = rec.value("difficulty", "");
        t.requirement = rec.value("requirement", "");
        t.golden_script = rec.value("golden_script", "");
        t.notes = rec.value("notes", "");
        if (!t.id.empty()) where += " (task " + t.id + ")";

        if (t.id.empty()) problems.push_back(where + ": id is required");
        else if (++seen_ids[t.id] > 1) problems.push_back(where + ": duplicate id " + t.id);

        const auto& cats = category_order();
        if (std::find(cats.begin(), cats.end(), t.category) == cats.end())
            problems.push_back(where + ": category \"" + t.category +
                               "\" is not one of the five known categories");
        const auto& lvls = level_order();
        if (std::find(lvls.begin(), lvls.end(), t.difficulty) == lvls.end())
            problems.push_back(where + ": difficulty \"" + t.difficulty +
                               "\" is not one of L1, L2, L3");
        if (trim(t.requirement).empty()) problems.push_back(where + ": requirement is empty");
        if (trim(t.golden_script).empty())
            problems.push_back(where + ": golden_script is empty");
        else {
            LintReport lint = lint_script(t.golden_script, db, lint_config, t.id);
            if (!lint.pass) {
                std::string first =
                    lint.violations.empty() ? "" : (": " + lint.violations[0].message);
                problems.push_back(where + ": golden script fails lint" + first);
            }
        }
        actual_categories[t.category]++;
        actual_levels[t.difficulty]++;
        suite.tasks.push_back(std::move(t));
    }

    auto check_counts = [&](const char* what, const std::map<std::string, int>& declared,
                            const std::map<std::string, int>& actual) {
        for (const auto& [key, n] : declared) {
            auto it = actual.find(key);
            int have = it == actual.end() ? 0 : it->second;
            if (have != n)
                problems.push_back(std::string("header declares ") + std::to_string(n) + " " +
                                   what + " " + key + " task(s), found " +
                                   std::to_string(have));
        }
        for (const auto& [key, n] : actual) {
            if (!declared.count(key) && n > 0)
                problems.push_back(std::string("suite contains ") + std::to_string(n) + " " +
                                   what + " " + key + " task(s) the header does not declare");
        }
    };
    check_counts("category", suite.declared_categories, actual_categories);
    check_counts("level", suite.declared_levels, actual_levels);

    if (!problems.empty()) {
        std::ostringstream msg;
        msg << origin << ": suite validation failed:";
        for (const std::string& p : problems) msg << "\n  " << p;
        throw SuiteError(msg.str(), problems);
    }
    return suite;
}

inline TaskSuite load_suite(const std::string& path, const CommandDatabase& db,
                            const LintConfig& lint_config = {}) {
    return load_suite_text(read_file(path), db, lint_config, path);
}

// ---------------------------------------------------------------------------
// pass@k
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * static_cast<std::uint64_t>(n - k + i) /
                 static_cast<std::uint64_t>(i);
    }
    return result;
}

}  // namespace detail

/// Unbiased estimator 1 - C(n-c,k)/C(n,k). Computed as the exact integer
/// ratio (C(n,k)-C(n-c,k))/C(n,k) for any realistic sample budget, so
/// pass_at_k(n, c, 1) == c/n to the last bit; falls back to the stable
/// product form when the binomials would overflow. No factorials anywhere.
inline double pass_at_k(int n, int c, int k) {
    if (n < 1 || c < 0 || c > n || k < 1 || k > n)
        throw std::invalid_argument("pass_at_k requires 0 <= c <= n and 1 <= k <= n");
    if (n <= 62) {
        std::uint64_t total = detail::binomial(n, k);
        std::uint64_t miss = detail::binomial(n - c, k);
        return static_cast<double>(total - miss) / static_cast<double>(total);
    }
    double miss = 1.0;
    for (int i = 0; i < k; ++i) {
        int denom = n - i;
        int numer = n - c - i;
        if (numer <= 0) return 1.0;
        miss *= static_cast<double>(numer) / static_cast<double>(denom);
    }
    return 1.0 - miss;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

/// Per-task sampling outcome: n samples, c_syntax passed the static check,
/// c_function passed the functional judgment.
struct TaskTally {
    std::string task_id;
    int n = 0;
    int c_syntax = 0;
    int c_function = 0;
};

struct GroupRates {
    std::string group;
    std::size_t task_count = 0;
    std::map<int, double> syntax;    // k -> mean pass@k
    std::map<int, double> function;  // k -> mean pass@k
};

struct PassKReport {
    std::vector<int> ks;
    std::vector<GroupRates> by_category;
    std::vector<GroupRates> by_level;
    GroupRates total;
    std::vector<TaskTally> tallies;  // retained for audit, suite task order
};

/// Mean per-task pass@k within each category, each level, and overall.
/// Requires exactly one tally per suite task.
inline PassKReport aggregate(const std::vector<TaskTally>& records, const TaskSuite& suite,
                             const std::vector<int>& ks = {1, 5}) {
    std::map<std::string, const TaskTally*> by_id;
    for (const TaskTally& r : records) {
        if (!by_id.emplace(r.task_id, &r).second)
            throw std::invalid_argument("duplicate record for task " + r.task_id);
    }
    std::vector<std::string> missing, extra;
    std::map<std::string, bool> suite_ids;
    for (const BenchTask& t : suite.tasks) {
        suite_ids[t.id] = true;
        if (!by_id.count(t.id)) missing.push_back(t.id);
    }
    for (const TaskTally& r : records)
        if (!suite_ids.count(r.task_id)) extra.push_back(r.task_id);
    if (!missing.empty() || !extra.empty()) {
        std::ostringstream msg;
        msg << "records do not cover the suite exactly:";
        for (const auto& m : missing) msg << " missing=" << m;
        for (const auto& e : extra) msg << " extra=" << e;
        throw std::invalid_argument(msg.str());
    }

    PassKReport report;
    report.ks = ks;
    auto make_group = [&](const std::string& name) {
        GroupRates g;
        g.group = name;
        for (int k : ks) {
            g.syntax[k] = 0.0;
            g.function[k] = 0.0;
        }
        return g;
    };
    std::map<std::string, GroupRates> cat_groups, lvl_groups;
    for (const std::string& c : category_order()) cat_groups[c] = make_group(c);
    for (const std::string& l : level_order()) lvl_groups[l] = make_group(l);
    report.total = make_group("Total");

    for (const BenchTask& t : suite.tasks) {
        const TaskTally& r = *by_id.at(t.id);
        report.tallies.push_back(r);
        for (int k : ks) {
            double ps = pass_at_k(r.n, r.c_syntax, k);
            double pf = pass_at_k(r.n, r.c_function, k);
            cat_groups[t.category].syntax[k] += ps;
            cat_groups[t.category].function[k] += pf;
            lvl_groups[t.difficulty].syntax[k] += ps;
            lvl_groups[t.difficulty].function[k] += pf;
            report.total.syntax[k] += ps;
            report.total.function[k] += pf;
        }
        cat_groups[t.category].task_count++;
        lvl_groups[t.difficulty].task_count++;
        report.total.task_count++;
    }

    auto finalize = [&](GroupRates& g) {
        if (g.task_count == 0) return;
        for (int k : report.ks) {
            g.syntax[k] /= static_cast<double>(g.task_count);
            g.function[k] /= static_cast<double>(g.task_count);
        }
    };
    for (const std::string& c : category_order()) {
        finalize(cat_groups[c]);
        report.by_category.push_back(cat_groups[c]);
    }
    for (const std::string& l : level_order()) {
        finalize(lvl_groups[l]);
        report.by_level.push_back(lvl_groups[l]);
    }
    finalize(report.total);
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class RenderFormat { Table, Delimited };
enum class GroupBy { Category, Level };

namespace detail {

inline const std::vector<GroupRates>& groups_for(const PassKReport& report, GroupBy by) {
    return by == GroupBy::Category ? report.by_category : report.by_level;
}

}  // namespace detail

/// Percentages with two decimals, round-half-up, groups as columns and a
/// trailing Total column. Delimited output is tab-separated
/// group/metric/k/percent rows that parse back to identical numbers.
inline std::string render_report(const PassKReport& report, RenderFormat format,
                                 GroupBy by = GroupBy::Category) {
    const std::vector<GroupRates>& groups = detail::groups_for(report, by);

    if (format == RenderFormat::Delimited) {
        std::ostringstream out;
        out << "group\tmetric\tk\tpercent\ttasks\n";
        auto emit = [&](const GroupRates& g) {
            for (int k : report.ks) {
                out << g.group << "\tsyntax\t" << k << "\t" << format_percent(g.syntax.at(k))
                    << "\t" << g.task_count << "\n";
                out << g.group << "\tfunction\t" << k << "\t"
                    << format_percent(g.function.at(k)) << "\t" << g.task_count << "\n";
            }
        };
        for (const GroupRates& g : groups) emit(g);
        emit(report.total);
        return out.str();
    }

    std::vector<std::string> headers = {"metric"};
    for (const GroupRates& g : groups)
        headers.push_back(g.group + " (" + std::to_string(g.task_count) + ")");
    headers.push_back("Total (" + std::to_string(report.total.task_count) + ")");

    std::vector<std::vector<std::string>> rows;
    for (int k : report.ks) {
        std::vector<std::string> srow = {"syntax pass@" + std::to_string(k)};
        std::vector<std::string> frow = {"function pass@" + std::to_string(k)};
        for (const GroupRates& g : groups) {
            srow.push_back(format_percent(g.syntax.at(k)));
            frow.push_back(format_percent(g.function.at(k)));
        }
        srow.push_back(format_percent(report.total.syntax.at(k)));
        frow.push_back(format_percent(report.total.function.at(k)));
        rows.push_back(std::move(srow));
        rows.push_back(std::move(frow));
    }

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t i = 0; i < headers.size(); ++i) widths[i] = headers[i].size();
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());

    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << "  ";
            out << row[i];
            for (std::size_t pad = row[i].size(); pad < widths[i]; ++pad) out << ' ';
        }
        out << "\n";
    };
    emit_row(headers);
    {
        std::vector<std::string> rule;
        for (std::size_t w : widths) rule.push_back(std::string(w, '-'));
        emit_row(rule);
    }
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

struct DelimitedCell {
    std::string group;
    std::string metric;
    int k = 0;
    double percent = 0.0;
    std::size_t tasks = 0;
};

inline std::vector<DelimitedCell> parse_delimited_report(const std::string& text) {
    std::vector<DelimitedCell> cells;
    std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = 1; i < lines.size(); ++i) {  // skip header
        if (trim(lines[i]).empty()) continue;
        std::istringstream ss(lines[i]);
        DelimitedCell cell;
        std::string field;
        std::getline(ss, cell.group, '\t');
        std::getline(ss, cell.metric, '\t');
        std::getline(ss, field, '\t');
        cell.k = std::stoi(field);
        std::getline(ss, field, '\t');
        cell.percent = std::stod(field);
        std::getline(ss, field, '\t');
        cell.tasks = static_cast<std::size_t>(std::stoul(field));
        cells.push_back(std::move(cell));
    }
    return cells;
}

}  // namespace tclforge::bench
