#pragma once

// Three-stage training-data factory: combinatorial fragment generation from
// the command database (planner / composer / mutator), lint filtering, and
// teacher-LLM requirement back-inference plus chain-of-thought generation,
// emitting (requirement, cot, script) tuples with provenance.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tclforge/command_db.hpp"
#include "tclforge/core.hpp"
#include "tclforge/lint.hpp"
#include "tclforge/llm.hpp"
#include "tclforge/tcl.hpp"

namespace tclforge::synth {

// ---------------------------------------------------------------------------
// Deterministic sampling (identical streams on every platform)
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    std::size_t below(std::size_t n) { return n == 0 ? 0 : next() % n; }
    int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[below(items.size())];
    }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& known_mutators() {
    static const std::vector<std::string> m = {"drop-required", "misspell-command",
                                               "scramble-enum"};
    return m;
}

struct SynthConfig {
    std::size_t target_fragment_count = 1000;
    int commands_per_fragment_min = 1;
    int commands_per_fragment_max = 6;
    std::map<std::string, double> category_mix = {
        {"DIQA", 1.0}, {"NIAA", 1.0}, {"FA", 1.0}, {"PAO", 1.0}, {"TAO", 1.0}};
    std::uint64_t rng_seed = 1;
    double mutation_probability = 0.2;
    std::vector<std::string> mutators = known_mutators();
    int max_teacher_retries = 2;
    int stage3_concurrency = 2;

    void validate() const {
        if (commands_per_fragment_min < 1)
            throw ConfigError("commands_per_fragment_min must be >= 1");
        if (commands_per_fragment_max < commands_per_fragment_min)
            throw ConfigError("commands_per_fragment range is inverted");
        double total = 0.0;
        for (const auto& [cat, w] : category_mix) {
            if (w < 0) throw ConfigError("category weight for " + cat + " is negative");
            total += w;
        }
        if (total <= 0) throw ConfigError("category_mix needs at least one positive weight");
        if (mutation_probability < 0 || mutation_probability > 1)
            throw ConfigError("mutation_probability must be in [0,1]");
        for (const std::string& m : mutators) {
            const auto& known = known_mutators();
            if (std::find(known.begin(), known.end(), m) == known.end())
                throw ConfigError("unknown mutator \"" + m + "\"");
        }
        if (max_teacher_retries < 0) throw ConfigError("max_teacher_retries must be >= 0");
        if (stage3_concurrency < 1) throw ConfigError("stage3_concurrency must be >= 1");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["target_fragment_count"] = target_fragment_count;
        j["commands_per_fragment"] = {commands_per_fragment_min, commands_per_fragment_max};
        j["category_mix"] = category_mix;
        j["rng_seed"] = rng_seed;
        j["mutation_probability"] = mutation_probability;
        j["mutators"] = mutators;
        j["max_teacher_retries"] = max_teacher_retries;
        j["stage3_concurrency"] = stage3_concurrency;
        return j;
    }

    static SynthConfig from_json(const nlohmann::json& j) {
        SynthConfig c;
        c.target_fragment_count = j.value("target_fragment_count", std::size_t{1000});
        if (j.contains("commands_per_fragment")) {
            c.commands_per_fragment_min = j["commands_per_fragment"].at(0).get<int>();
            c.commands_per_fragment_max = j["commands_per_fragment"].at(1).get<int>();
        }
        if (j.contains("category_mix"))
            c.category_mix = j["category_mix"].get<std::map<std::string, double>>();
        c.rng_seed = j.value("rng_seed", std::uint64_t{1});
        c.mutation_probability = j.value("mutation_probability", 0.2);
        if (j.contains("mutators")) c.mutators = j["mutators"].get<std::vector<std::string>>();
        c.max_teacher_retries = j.value("max_teacher_retries", 2);
        c.stage3_concurrency = j.value("stage3_concurrency", 2);
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------
// Stage 1: fragment generation
// ---------------------------------------------------------------------------

struct Fragment {
    std::size_t id = 0;
    std::string category;
    std::string script;
    std::string mutation;  // empty when unmutated, else the mutator name
};

namespace detail {

struct ComposedOption {
    const ParamSpec* param;
    std::string value;  // empty for flags
};

struct ComposedCommand {
    const CommandSpec* spec;
    std::vector<std::string> positionals;
    std::vector<ComposedOption> options;
    std::string rendered_name;  // normally spec->name; mutators may alter it
};

inline std::string format_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline bool name_hints(const std::string& pname, std::initializer_list<const char*> hints) {
    std::string low = tclforge::detail::lower(pname);
    for (const char* h : hints)
        if (low.find(h) != std::string::npos) return true;
    return false;
}

class Composer {
public:
    Composer(const CommandDatabase& db, Rng& rng) : db_(db), rng_(rng) {
        for (const auto& [name, spec] : db.specs)
            for (const std::string& cat : spec.categories) by_category_[cat].push_back(&spec);
        for (const auto& [name, spec] : db.specs) {
            if (spec.name.rfind("get_", 0) == 0 && spec.max_positional >= 1)
                query_commands_.push_back(&spec);
        }
    }

    const std::vector<const CommandSpec*>* commands_for(const std::string& category) const {
        auto it = by_category_.find(category);
        return it == by_category_.end() || it->second.empty() ? nullptr : &it->second;
    }

    std::string sample_value(const ParamSpec& p) {
        switch (p.value_type) {
            case ValueType::Enum:
                return rng_.pick(p.enum_values);
            case ValueType::Bool:
                return rng_.chance(0.5) ? "true" : "false";
            case ValueType::Int: {
                int lo = p.sample_min ? static_cast<int>(*p.sample_min) : 1;
                int hi = p.sample_max ? static_cast<int>(*p.sample_max) : 10;
                return std::to_string(rng_.range(lo, hi));
            }
            case ValueType::Float: {
                double lo = p.sample_min.value_or(0.0);
                double hi = p.sample_max.value_or(1.0);
                return format_float(lo + rng_.unit() * (hi - lo));
            }
            case ValueType::ObjectList:
                return sample_object_list(p);
            case ValueType::String:
                return sample_string(p);
        }
        return "value";
    }

    std::string sample_string(const ParamSpec& p) {
        if (name_hints(p.name, {"layer"})) {
            static const std::vector<std::string> layers = {"M1", "M2", "M3", "M4",
                                                            "M5", "M6", "M7", "M8"};
            return rng_.pick(layers);
        }
        if (name_hints(p.name, {"file", "report", "outdir", "dir", "outfile"}))
            return "reports/run_" + std::to_string(rng_.range(1, 99)) + ".rpt";
        if (name_hints(p.name, {"site"})) {
            static const std::vector<std::string> sites = {"core7t", "core9t", "core12t"};
            return rng_.pick(sites);
        }
        if (name_hints(p.name, {"box", "loc", "size", "waveform", "range", "-r", "-s"}))
            return "{" + std::to_string(rng_.range(0, 50)) + " " + std::to_string(rng_.range(0, 50)) +
                   " " + std::to_string(rng_.range(60, 200)) + " " +
                   std::to_string(rng_.range(60, 200)) + "}";
        if (name_hints(p.name, {"prefix", "name"}))
            return "gen_" + std::to_string(rng_.range(1, 999));
        if (name_hints(p.name, {"cell"})) {
            static const std::vector<std::string> cells = {"BUFX2", "BUFX4", "BUFX8", "INVX2",
                                                           "TAPCELL_X1", "FILL1"};
            return rng_.pick(cells);
        }
        if (name_hints(p.name, {"inst"}))
            return "u_core/u_inst_" + std::to_string(rng_.range(0, 999));
        if (name_hints(p.name, {"net"})) {
            static const std::vector<std::string> nets = {"clk_main", "rst_n", "VDD", "VSS"};
            return rng_.pick(nets);
        }
        return "ph_" + std::to_string(rng_.range(0, 999));
    }

    std::string sample_object_list(const ParamSpec& p) {
        if (name_hints(p.name, {"net"})) {
            if (rng_.chance(0.3) && !query_commands_.empty())
                return "[get_nets clk*]";
            return rng_.chance(0.5) ? "{VDD VSS}" : "{clk_main rst_n}";
        }
        if (rng_.chance(0.3) && !query_commands_.empty()) {
            const CommandSpec* q = query_commands_[rng_.below(query_commands_.size())];
            return "[" + q->name + " u_*]";
        }
        return "{u_core/u_a u_core/u_b}";
    }

    std::string sample_positional(const CommandSpec& spec, int index) {
        const ParamSpec* pp = spec.positional_param(index);
        if (pp) return sample_value(*pp);
        return "arg_" + std::to_string(rng_.range(0, 99));
    }

    ComposedCommand compose(const CommandSpec& spec) {
        ComposedCommand cmd;
        cmd.spec = &spec;
        cmd.rendered_name = spec.name;
        int positional_count = spec.min_positional;
        if (spec.max_positional != kUnboundedPositional &&
            spec.max_positional > spec.min_positional && rng_.chance(0.5)) {
            positional_count = rng_.range(spec.min_positional, spec.max_positional);
        }
        for (int i = 0; i < positional_count; ++i)
            cmd.positionals.push_back(sample_positional(spec, i));

        std::set<std::string> taken;
        auto conflicts_taken = [&](const ParamSpec& p) {
            for (const std::string& other : p.conflicts_with)
                if (taken.count(other)) return true;
            // Symmetric check: an already-taken option may declare the
            // conflict from its side.
            for (const ParamSpec& q : cmd.spec->params)
                if (taken.count(q.name))
                    for (const std::string& other : q.conflicts_with)
                        if (other == p.name) return true;
            return false;
        };
        for (const ParamSpec& p : spec.params) {
            if (p.kind == ParamKind::Positional) continue;
            if (conflicts_taken(p)) continue;
            if (!p.required && !rng_.chance(0.5)) continue;
            taken.insert(p.name);
            ComposedOption opt;
            opt.param = &p;
            if (p.kind == ParamKind::Valued) opt.value = sample_value(p);
            cmd.options.push_back(std::move(opt));
        }
        return cmd;
    }

private:
    const CommandDatabase& db_;
    Rng& rng_;
    std::map<std::string, std::vector<const CommandSpec*>> by_category_;
    std::vector<const CommandSpec*> query_commands_;
};

inline std::string render_command(const ComposedCommand& cmd) {
    std::string out = cmd.rendered_name;
    for (const std::string& pos : cmd.positionals) out += " " + pos;
    for (const ComposedOption& opt : cmd.options) {
        out += " " + opt.param->name;
        if (!opt.value.empty()) out += " " + opt.value;
    }
    return out;
}

/// One perturbation so the lint filter has genuine work. Returns the mutator
/// name, or empty when no enabled mutator applies.
inline std::string mutate(std::vector<ComposedCommand>& commands,
                          const std::vector<std::string>& enabled, Rng& rng) {
    std::vector<std::string> order = enabled;
    // Deterministic shuffle so the choice does not always favor list order.
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.below(i)]);

    for (const std::string& mutator : order) {
        if (mutator == "drop-required") {
            std::vector<std::pair<std::size_t, std::size_t>> candidates;
            for (std::size_t c = 0; c < commands.size(); ++c)
                for (std::size_t o = 0; o < commands[c].options.size(); ++o)
                    if (commands[c].options[o].param->required) candidates.push_back({c, o});
            if (candidates.empty()) continue;
            auto [c, o] = candidates[rng.below(candidates.size())];
            commands[c].options.erase(commands[c].options.begin() +
                                      static_cast<std::ptrdiff_t>(o));
            return "drop-required";
        }
        if (mutator == "misspell-command") {
            std::size_t c = rng.below(commands.size());
            std::string& name = commands[c].rendered_name;
            if (name.size() < 2) continue;
            std::size_t pos = 1 + rng.below(name.size() - 1);
            name.erase(pos, 1);  // drop one letter: classic typo
            return "misspell-command";
        }
        if (mutator == "scramble-enum") {
            std::vector<std::pair<std::size_t, std::size_t>> candidates;
            for (std::size_t c = 0; c < commands.size(); ++c)
                for (std::size_t o = 0; o < commands[c].options.size(); ++o)
                    if (commands[c].options[o].param->value_type == ValueType::Enum)
                        candidates.push_back({c, o});
            if (candidates.empty()) continue;
            auto [c, o] = candidates[rng.below(candidates.size())];
            commands[c].options[o].value = "bogus_" + std::to_string(rng.range(0, 99));
            return "scramble-enum";
        }
    }
    return "";
}

}  // namespace detail

/// Stage 1. Each fragment: the planner samples a category and command count,
/// the composer samples commands tagged with that category (required options
/// always, optional ones with probability 0.5, values per type), and with
/// the configured probability the mutator injects one defect. Deterministic
/// given the seed.
inline std::vector<Fragment> generate_fragments(const CommandDatabase& db,
                                                const SynthConfig& config, Rng& rng) {
    config.validate();
    if (db.specs.empty()) throw ConfigError("fragment generation needs a non-empty database");
    detail::Composer composer(db, rng);

    std::vector<std::string> categories;
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& [cat, w] : config.category_mix) {
        if (w <= 0) continue;
        if (!composer.commands_for(cat)) continue;
        categories.push_back(cat);
        total += w;
        cumulative.push_back(total);
    }
    if (categories.empty())
        throw ConfigError("no category in the mix has commands in the database");

    std::vector<Fragment> fragments;
    fragments.reserve(config.target_fragment_count);
    for (std::size_t id = 0; id < config.target_fragment_count; ++id) {
        double roll = rng.unit() * total;
        std::size_t cat_idx = 0;
        while (cat_idx + 1 < cumulative.size() && roll >= cumulative[cat_idx]) ++cat_idx;
        const std::string& category = categories[cat_idx];
        const auto& pool = *composer.commands_for(category);

        int count = rng.range(config.commands_per_fragment_min, config.commands_per_fragment_max);
        std::vector<detail::ComposedCommand> commands;
        for (int i = 0; i < count; ++i)
            commands.push_back(composer.compose(*pool[rng.below(pool.size())]));

        Fragment frag;
        frag.id = id;
        frag.category = category;
        if (rng.chance(config.mutation_probability))
            frag.mutation = detail::mutate(commands, config.mutators, rng);
        for (const auto& cmd : commands) frag.script += detail::render_command(cmd) + "\n";
        fragments.push_back(std::move(frag));
    }
    return fragments;
}

// ---------------------------------------------------------------------------
// Dedup normalization
// ---------------------------------------------------------------------------

/// Collapse whitespace runs, canonicalize separators, strip comments.
inline std::string normalize_script(std::string_view script) {
    std::string out;
    bool line_open = false;
    for (const tcl::Token& t : tcl::tokenize(script)) {
        switch (t.kind) {
            case tcl::TokenKind::Comment:
            case tcl::TokenKind::LineContinuation:
                break;
            case tcl::TokenKind::CommandSeparator:
                if (line_open) out += '\n';
                line_open = false;
                break;
            default:
                if (line_open) out += ' ';
                out += t.text;
                line_open = true;
                break;
        }
    }
    if (line_open) out += '\n';
    return out;
}

inline std::string normalized_hash(std::string_view script) {
    return digest_hex(normalize_script(script));
}

// ---------------------------------------------------------------------------
// Stage 3: teacher calls
// ---------------------------------------------------------------------------

inline constexpr std::string_view kRequirementPromptTemplate =
    "You are a senior physical design engineer who writes Innovus-style Tcl.\n"
    "Below is a Tcl script together with reference documentation for the commands it uses.\n"
    "Infer the most likely natural-language requirement an engineer was given that would\n"
    "lead them to write exactly this script. State the requirement as a single concise\n"
    "instruction, concrete enough that the script is a faithful implementation of it.\n"
    "\n"
    "Command reference:\n{{docs}}\n"
    "Script:\n{{script}}\n"
    "\n"
    "Reply with the requirement wrapped exactly in these sentinel lines and nothing else\n"
    "between them:\n"
    "BEGIN_REQUIREMENT\n<requirement>\nEND_REQUIREMENT\n";

inline constexpr std::string_view kCotPromptTemplate =
    "You are a senior physical design engineer who writes Innovus-style Tcl.\n"
    "Below are a requirement and the Tcl script that fulfills it, plus reference\n"
    "documentation for the commands involved. Produce a step-by-step explanation of the\n"
    "reasoning that leads from the requirement to this exact script: which commands are\n"
    "chosen, why, and how their options implement the requirement.\n"
    "\n"
    "Command reference:\n{{docs}}\n"
    "Requirement:\n{{requirement}}\n"
    "Script:\n{{script}}\n"
    "\n"
    "Reply with the reasoning wrapped exactly in these sentinel lines:\n"
    "BEGIN_COT\n<step-by-step reasoning>\nEND_COT\n";

inline std::string render_template(std::string_view tpl,
                                   const std::map<std::string, std::string>& values) {
    std::string out(tpl);
    for (const auto& [key, value] : values) {
        std::string marker = "{{" + key + "}}";
        std::size_t pos;
        while ((pos = out.find(marker)) != std::string::npos)
            out.replace(pos, marker.size(), value);
    }
    return out;
}

/// Payload between sentinel lines BEGIN_<TAG> / END_<TAG>; anything outside
/// is ignored. Missing either sentinel is a contract violation.
inline std::optional<std::string> extract_sentinel_block(const std::string& text,
                                                         const std::string& tag) {
    std::vector<std::string> lines = split_lines(text);
    std::string begin = "BEGIN_" + tag;
    std::string end = "END_" + tag;
    std::optional<std::size_t> start;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string t = trim(lines[i]);
        if (!start && t == begin) {
            start = i + 1;
            continue;
        }
        if (start && t == end) {
            std::string body;
            for (std::size_t k = *start; k < i; ++k) {
                if (!body.empty()) body += '\n';
                body += lines[k];
            }
            body = trim(body);
            if (body.empty()) return std::nullopt;
            return body;
        }
    }
    return std::nullopt;
}

struct TeacherContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TeacherResult {
    std::string text;
    int retries = 0;  // contract-violation retries consumed
};

namespace detail {

inline TeacherResult ask_teacher(llm::ChatClient& teacher, const std::string& prompt,
                                 const std::string& tag, int max_retries) {
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        llm::ChatExchange ex = teacher.complete({{"user", prompt}});
        if (auto block = extract_sentinel_block(ex.response_text, tag))
            return {*block, attempt};
    }
    throw TeacherContractError("teacher reply missing BEGIN_" + tag + "/END_" + tag +
                               " block after " + std::to_string(max_retries + 1) + " attempts");
}

}  // namespace detail

/// Stage 3a: reverse-engineer the intent behind a lint-clean script. The
/// prompt carries the script plus the doc bundle for its commands.
inline TeacherResult back_infer_requirement(const std::string& script, llm::ChatClient& teacher,
                                            const CommandDatabase& db, int max_retries = 2) {
    std::vector<std::string> names;
    for (const auto& [name, span] : tcl::extract_commands(tcl::parse_script(script)))
        names.push_back(name);
    std::string prompt = render_template(
        kRequirementPromptTemplate, {{"docs", doc_bundle(db, names)}, {"script", script}});
    return detail::ask_teacher(teacher, prompt, "REQUIREMENT", max_retries);
}

/// Stage 3b: step-by-step reasoning for a (requirement, script) pair.
inline TeacherResult generate_cot(const std::string& requirement, const std::string& script,
                                  llm::ChatClient& teacher, const CommandDatabase& db,
                                  int max_retries = 2) {
    std::vector<std::string> names;
    for (const auto& [name, span] : tcl::extract_commands(tcl::parse_script(script)))
        names.push_back(name);
    std::string prompt = render_template(kCotPromptTemplate, {{"docs", doc_bundle(db, names)},
                                                              {"requirement", requirement},
                                                              {"script", script}});
    return detail::ask_teacher(teacher, prompt, "COT", max_retries);
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct SynthTuple {
    std::string requirement;
    std::string cot;
    std::string script;
    std::size_t fragment_id = 0;
    std::string category;
    int requirement_retries = 0;
    int cot_retries = 0;

    nlohmann::ordered_json to_json(std::uint64_t rng_seed, const std::string& teacher_model,
                                   const std::string& schema_dig) const {
        nlohmann::ordered_json j;
        j["requirement"] = requirement;
        j["cot"] = cot;
        j["script"] = script;
        nlohmann::ordered_json prov;
        prov["rng_seed"] = rng_seed;
        prov["fragment_id"] = fragment_id;
        prov["category"] = category;
        prov["teacher_model"] = teacher_model;
        prov["schema_digest"] = schema_dig;
        prov["lint_verdict"] = "pass";
        prov["requirement_retries"] = requirement_retries;
        prov["cot_retries"] = cot_retries;
        j["provenance"] = std::move(prov);
        return j;
    }
};

struct StageCounts {
    std::size_t generated = 0;
    std::size_t lint_pass = 0;
    std::size_t deduped = 0;
    std::size_t emitted = 0;
};

struct DropRecord {
    std::size_t fragment_id = 0;
    std::string stage;
    std::string reason;
};

struct PipelineResult {
    StageCounts counts;
    std::vector<DropRecord> drops;
    bool interrupted = false;
    std::string dataset_path;
    std::string manifest_path;
};

struct PipelineHooks {
    // Testing hook simulating a kill: stop after this many Stage-3 fragments
    // have been processed in this run.
    std::size_t max_stage3_fragments = static_cast<std::size_t>(-1);
};

/// Stage 1 -> lint filter -> dedup -> Stage 3a -> Stage 3b -> dataset +
/// manifest. Deterministic given the seed and a deterministic teacher.
/// Resumable: fragments already present in the dataset file are skipped, so
/// a restarted run appends exactly what the uninterrupted run would have.
inline PipelineResult run_pipeline(const SynthConfig& config, const CommandDatabase& db,
                                   llm::ChatClient& teacher, const std::string& dataset_path,
                                   const LintConfig& lint_config = {},
                                   const PipelineHooks& hooks = {}) {
    config.validate();
    PipelineResult result;
    result.dataset_path = dataset_path;
    result.manifest_path = dataset_path + ".manifest.json";

    // Stage 1.
    Rng rng(config.rng_seed);
    std::vector<Fragment> fragments = generate_fragments(db, config, rng);
    result.counts.generated = fragments.size();

    // Stage 2: static filter.
    std::vector<Fragment> survivors;
    for (Fragment& frag : fragments) {
        LintReport report = lint_script(frag.script, db, lint_config,
                                        std::to_string(frag.id));
        if (report.pass) {
            survivors.push_back(std::move(frag));
        } else {
            std::string rules;
            for (const auto& [rule, n] : report.stats)
                rules += (rules.empty() ? "" : ",") + rule;
            result.drops.push_back({frag.id, "lint", rules});
        }
    }
    result.counts.lint_pass = survivors.size();

    // Dedup on normalized script text, first occurrence wins.
    std::vector<Fragment> unique;
    std::set<std::string> seen_hashes;
    for (Fragment& frag : survivors) {
        std::string hash = normalized_hash(frag.script);
        if (seen_hashes.insert(hash).second) unique.push_back(std::move(frag));
        else result.drops.push_back({frag.id, "dedup", "duplicate of an earlier fragment"});
    }
    result.counts.deduped = unique.size();

    // Resume support: fragments already in the dataset are not re-asked.
    std::set<std::size_t> already_emitted;
    std::string existing;
    try {
        existing = read_file(dataset_path);
        for (const std::string& line : split_lines(existing)) {
            if (trim(line).empty()) continue;
            auto rec = nlohmann::json::parse(line);
            already_emitted.insert(rec.at("provenance").at("fragment_id").get<std::size_t>());
        }
    } catch (const IoError&) {
        // no previous run
    }

    // Stage 3, bounded concurrency, results written in fragment-id order.
    struct Stage3Slot {
        bool done = false;
        bool dropped = false;
        std::string drop_stage, drop_reason;
        SynthTuple tuple;
    };
    std::vector<const Fragment*> pending;
    for (const Fragment& frag : unique)
        if (!already_emitted.count(frag.id)) pending.push_back(&frag);
    if (pending.size() > hooks.max_stage3_fragments) {
        pending.resize(hooks.max_stage3_fragments);
        result.interrupted = true;
    }

    std::vector<Stage3Slot> slots(pending.size());
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next_index{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next_index.fetch_add(1);
            if (i >= pending.size()) return;
            const Fragment& frag = *pending[i];
            Stage3Slot slot;
            try {
                TeacherResult req = back_infer_requirement(frag.script, teacher, db,
                                                           config.max_teacher_retries);
                TeacherResult cot = generate_cot(req.text, frag.script, teacher, db,
                                                 config.max_teacher_retries);
                slot.tuple = {req.text, cot.text, frag.script, frag.id,
                              frag.category, req.retries, cot.retries};
            } catch (const TeacherContractError& e) {
                slot.dropped = true;
                slot.drop_stage = "teacher-contract";
                slot.drop_reason = e.what();
            } catch (const llm::TransportError& e) {
                slot.dropped = true;
                slot.drop_stage = "teacher-transport";
                slot.drop_reason = e.what();
            }
            {
                std::lock_guard<std::mutex> lock(mu);
                slot.done = true;
                slots[i] = std::move(slot);
            }
            cv.notify_all();
        }
    };
    std::vector<std::thread> workers;
    std::size_t thread_count =
        std::min(static_cast<std::size_t>(config.stage3_concurrency), pending.size());
    for (std::size_t t = 0; t < thread_count; ++t) workers.emplace_back(worker);

    std::ofstream out(dataset_path, std::ios::binary | std::ios::app);
    if (!out) {
        for (auto& t : workers) t.join();
        throw IoError("cannot open dataset for writing: " + dataset_path);
    }
    result.counts.emitted = already_emitted.size();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        std::unique_lock<std::mutex> lock(mu);
        cv.wait(lock, [&] { return slots[i].done; });
        Stage3Slot slot = std::move(slots[i]);
        lock.unlock();
        if (slot.dropped) {
            result.drops.push_back({pending[i]->id, slot.drop_stage, slot.drop_reason});
            continue;
        }
        out << slot.tuple.to_json(config.rng_seed, teacher.config().model, schema_digest(db))
                   .dump()
            << "\n";
        out.flush();
        ++result.counts.emitted;
    }
    for (auto& t : workers) t.join();

    // Manifest: configuration, digests, stage counts and drop reasons.
    nlohmann::ordered_json manifest;
    manifest["format"] = "tclforge-synth-manifest";
    manifest["config"] = config.to_json();
    manifest["lint_config"] = lint_config.to_json();
    manifest["schema_digest"] = schema_digest(db);
    manifest["teacher_model"] = teacher.config().model;
    manifest["template_digests"] = {
        {"requirement", digest_hex(kRequirementPromptTemplate)},
        {"cot", digest_hex(kCotPromptTemplate)},
    };
    manifest["counts"] = {{"generated", result.counts.generated},
                          {"lint_pass", result.counts.lint_pass},
                          {"deduped", result.counts.deduped},
                          {"emitted", result.counts.emitted}};
    manifest["interrupted"] = result.interrupted;
    auto drops = nlohmann::ordered_json::array();
    for (const DropRecord& d : result.drops)
        drops.push_back({{"fragment_id", d.fragment_id}, {"stage", d.stage}, {"reason", d.reason}});
    manifest["drops"] = std::move(drops);
    write_file(result.manifest_path, manifest.dump(2) + "\n");
    return result;
}

}  // namespace tclforge::synth
