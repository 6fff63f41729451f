#pragma once

// Declarative database of Innovus-style command signatures and object
// property documentation: the normalized product of manual extraction from
// tool references. Loaded from a hand-editable JSON schema file, validated
// exhaustively, immutable afterwards.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tclforge/core.hpp"
#include "tclforge/tcl.hpp"
#include "tclforge/violation.hpp"

namespace tclforge {

inline const std::vector<std::string>& known_categories() {
    static const std::vector<std::string> cats = {"DIQA", "NIAA", "FA", "PAO", "TAO"};
    return cats;
}

enum class ParamKind { Flag, Valued, Positional };
enum class ValueType { String, Int, Float, Bool, Enum, ObjectList };

inline const char* to_string(ParamKind k) {
    switch (k) {
        case ParamKind::Flag: return "flag";
        case ParamKind::Valued: return "valued";
        case ParamKind::Positional: return "positional";
    }
    return "?";
}

inline const char* to_string(ValueType t) {
    switch (t) {
        case ValueType::String: return "string";
        case ValueType::Int: return "int";
        case ValueType::Float: return "float";
        case ValueType::Bool: return "bool";
        case ValueType::Enum: return "enum";
        case ValueType::ObjectList: return "object-list";
    }
    return "?";
}

struct ParamSpec {
    std::string name;           // "-option" or a positional index like "0"
    ParamKind kind = ParamKind::Valued;
    ValueType value_type = ValueType::String;
    std::vector<std::string> enum_values;
    bool required = false;
    bool repeatable = false;
    std::vector<std::string> conflicts_with;
    // Sampling range for int/float values, used by fragment generation.
    std::optional<double> sample_min;
    std::optional<double> sample_max;

    friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

inline constexpr int kUnboundedPositional = -1;

struct CommandSpec {
    std::string name;
    std::vector<std::string> aliases;
    std::vector<ParamSpec> params;
    int min_positional = 0;
    int max_positional = 0;  // kUnboundedPositional = no upper bound
    std::string doc;         // never empty; the judge prompt depends on it
    std::vector<std::string> categories;

    const ParamSpec* find_param(std::string_view pname) const {
        for (const ParamSpec& p : params)
            if (p.name == pname) return &p;
        return nullptr;
    }
    const ParamSpec* positional_param(int index) const {
        return find_param(std::to_string(index));
    }

    friend bool operator==(const CommandSpec&, const CommandSpec&) = default;
};

struct SchemaDiagnostic {
    Severity severity = Severity::Error;
    std::string location;  // e.g. "commands[4] (placeDesign)"
    std::string message;
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(std::string msg, std::vector<SchemaDiagnostic> diags = {})
        : std::runtime_error(std::move(msg)), diagnostics(std::move(diags)) {}
    std::vector<SchemaDiagnostic> diagnostics;
};

enum class LookupKind { Spec, Builtin, Unknown };

struct LookupResult {
    LookupKind kind = LookupKind::Unknown;
    const CommandSpec* spec = nullptr;  // set when kind == Spec
};

class CommandDatabase {
public:
    std::map<std::string, CommandSpec> specs;            // canonical name -> spec
    std::map<std::string, std::string> alias_to_canon;   // alias -> canonical
    std::set<std::string> builtins;                      // core Tcl, option-check exempt
    std::map<std::string, std::map<std::string, std::string>> property_docs;

    bool empty() const { return specs.empty() && builtins.empty(); }

    /// Total lookup: spec, builtin marker, or unknown. Exact match by
    /// default; with prefix matching an unambiguous strict prefix of one
    /// canonical name or alias resolves (builtins stay exact).
    LookupResult lookup(std::string_view name, bool prefix_matching = false) const {
        std::string key(name);
        if (builtins.count(key)) return {LookupKind::Builtin, nullptr};
        if (auto it = specs.find(key); it != specs.end()) return {LookupKind::Spec, &it->second};
        if (auto it = alias_to_canon.find(key); it != alias_to_canon.end())
            return {LookupKind::Spec, &specs.at(it->second)};
        if (prefix_matching && !key.empty()) {
            const CommandSpec* match = nullptr;
            bool ambiguous = false;
            auto consider = [&](const std::string& full, const CommandSpec* spec) {
                if (full.size() <= key.size() || full.compare(0, key.size(), key) != 0)
                    return;
                if (match && match != spec) ambiguous = true;
                match = spec;
            };
            for (const auto& [cname, spec] : specs) consider(cname, &spec);
            for (const auto& [alias, canon] : alias_to_canon)
                consider(alias, &specs.at(canon));
            if (match && !ambiguous) return {LookupKind::Spec, match};
        }
        return {LookupKind::Unknown, nullptr};
    }

    friend bool operator==(const CommandDatabase& a, const CommandDatabase& b) {
        return a.specs == b.specs && a.alias_to_canon == b.alias_to_canon &&
               a.builtins == b.builtins && a.property_docs == b.property_docs;
    }
};

struct SchemaLoadResult {
    CommandDatabase db;
    std::vector<SchemaDiagnostic> diagnostics;

    bool ok() const {
        return std::none_of(diagnostics.begin(), diagnostics.end(),
                            [](const SchemaDiagnostic& d) { return d.severity == Severity::Error; });
    }
};

// ---------------------------------------------------------------------------
// Schema load / write-back
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<ParamKind> parse_param_kind(const std::string& s) {
    if (s == "flag") return ParamKind::Flag;
    if (s == "valued") return ParamKind::Valued;
    if (s == "positional") return ParamKind::Positional;
    return std::nullopt;
}

inline std::optional<ValueType> parse_value_type(const std::string& s) {
    if (s == "string") return ValueType::String;
    if (s == "int") return ValueType::Int;
    if (s == "float") return ValueType::Float;
    if (s == "bool") return ValueType::Bool;
    if (s == "enum") return ValueType::Enum;
    if (s == "object-list") return ValueType::ObjectList;
    return std::nullopt;
}

inline bool is_positional_name(const std::string& name) {
    return !name.empty() &&
           std::all_of(name.begin(), name.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace detail

/// Parse and validate schema text. Every violation is reported, not just the
/// first; an empty document yields an empty database plus a warning.
inline SchemaLoadResult load_schema_text(const std::string& text,
                                         const std::string& origin = "<schema>") {
    using nlohmann::json;
    SchemaLoadResult result;
    auto error = [&](std::string loc, std::string msg) {
        result.diagnostics.push_back({Severity::Error, std::move(loc), std::move(msg)});
    };
    auto warn = [&](std::string loc, std::string msg) {
        result.diagnostics.push_back({Severity::Warning, std::move(loc), std::move(msg)});
    };

    if (trim(text).empty()) {
        warn(origin, "empty schema file: loaded an empty database");
        return result;
    }

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        error(origin, std::string("not valid JSON: ") + e.what());
        return result;
    }
    if (!doc.is_object()) {
        error(origin, "top level must be an object");
        return result;
    }
    if (doc.value("format", "") != "tclforge-command-schema")
        warn(origin, "missing or unexpected \"format\" marker");

    for (const auto& b : doc.value("builtins", json::array())) {
        if (!b.is_string()) { error("builtins", "builtin entries must be strings"); continue; }
        result.db.builtins.insert(b.get<std::string>());
    }

    if (doc.contains("property_docs")) {
        for (auto& [obj_type, props] : doc["property_docs"].items()) {
            if (!props.is_object()) {
                error("property_docs." + obj_type, "expected a property->description object");
                continue;
            }
            for (auto& [prop, desc] : props.items()) {
                if (!desc.is_string()) {
                    error("property_docs." + obj_type + "." + prop, "description must be a string");
                    continue;
                }
                result.db.property_docs[obj_type][prop] = desc.get<std::string>();
            }
        }
    }

    const json commands = doc.value("commands", json::array());
    std::size_t idx = 0;
    for (const auto& c : commands) {
        std::string loc = "commands[" + std::to_string(idx) + "]";
        ++idx;
        if (!c.is_object()) { error(loc, "command record must be an object"); continue; }
        CommandSpec spec;
        spec.name = c.value("name", "");
        if (!spec.name.empty()) loc += " (" + spec.name + ")";
        if (spec.name.empty()) { error(loc, "command name is required"); continue; }

        spec.doc = c.value("doc", "");
        if (trim(spec.doc).empty())
            error(loc, "doc text must be non-empty");

        for (const auto& a : c.value("aliases", json::array())) {
            if (a.is_string()) spec.aliases.push_back(a.get<std::string>());
            else error(loc, "aliases must be strings");
        }
        for (const auto& cat : c.value("categories", json::array())) {
            if (!cat.is_string()) { error(loc, "categories must be strings"); continue; }
            std::string tag = cat.get<std::string>();
            const auto& known = known_categories();
            if (std::find(known.begin(), known.end(), tag) == known.end())
                error(loc, "unknown category tag \"" + tag + "\"");
            spec.categories.push_back(tag);
        }

        spec.min_positional = c.value("min_positional", 0);
        if (c.contains("max_positional") && c["max_positional"].is_string()) {
            if (c["max_positional"] == "unbounded") spec.max_positional = kUnboundedPositional;
            else error(loc, "max_positional must be an integer or \"unbounded\"");
        } else {
            spec.max_positional = c.value("max_positional", 0);
        }
        if (spec.min_positional < 0) error(loc, "min_positional must be >= 0");
        if (spec.max_positional != kUnboundedPositional &&
            spec.max_positional < spec.min_positional)
            error(loc, "min_positional exceeds max_positional");

        std::set<std::string> param_names;
        std::size_t pidx = 0;
        for (const auto& p : c.value("params", json::array())) {
            std::string ploc = loc + ".params[" + std::to_string(pidx) + "]";
            ++pidx;
            if (!p.is_object()) { error(ploc, "param record must be an object"); continue; }
            ParamSpec ps;
            ps.name = p.value("name", "");
            if (!ps.name.empty()) ploc += " (" + ps.name + ")";
            if (ps.name.empty()) { error(ploc, "param name is required"); continue; }

            auto kind = detail::parse_param_kind(p.value("kind", "valued"));
            if (!kind) { error(ploc, "unknown kind \"" + p.value("kind", "") + "\""); continue; }
            ps.kind = *kind;

            auto vtype = detail::parse_value_type(p.value("value_type", "string"));
            if (!vtype) {
                error(ploc, "unknown value_type \"" + p.value("value_type", "") + "\"");
                continue;
            }
            ps.value_type = *vtype;

            for (const auto& ev : p.value("enum_values", json::array())) {
                if (ev.is_string()) ps.enum_values.push_back(ev.get<std::string>());
                else error(ploc, "enum_values must be strings");
            }
            ps.required = p.value("required", false);
            ps.repeatable = p.value("repeatable", false);
            for (const auto& cw : p.value("conflicts_with", json::array())) {
                if (cw.is_string()) ps.conflicts_with.push_back(cw.get<std::string>());
                else error(ploc, "conflicts_with must be strings");
            }
            if (p.contains("min")) ps.sample_min = p["min"].get<double>();
            if (p.contains("max")) ps.sample_max = p["max"].get<double>();

            // Consistency rules.
            if ((ps.value_type == ValueType::Enum) != !ps.enum_values.empty())
                error(ploc, "enum_values must be non-empty exactly when value_type is enum");
            if (ps.kind == ParamKind::Flag && ps.value_type != ValueType::String)
                error(ploc, "a flag takes no value; drop value_type");
            if (ps.kind == ParamKind::Positional && !detail::is_positional_name(ps.name))
                error(ploc, "positional params are named by index (\"0\", \"1\", ...)");
            if (ps.kind != ParamKind::Positional && ps.name[0] != '-')
                error(ploc, "option names carry a leading '-'");
            if (!param_names.insert(ps.name).second)
                error(ploc, "param \"" + ps.name + "\" appears more than once");

            spec.params.push_back(std::move(ps));
        }
        for (const ParamSpec& ps : spec.params) {
            for (const std::string& other : ps.conflicts_with) {
                if (!param_names.count(other))
                    error(loc, "param \"" + ps.name + "\" conflicts_with unknown param \"" +
                                   other + "\"");
            }
        }

        if (result.db.specs.count(spec.name)) {
            error(loc, "duplicate command name \"" + spec.name + "\"");
            continue;
        }
        result.db.specs.emplace(spec.name, std::move(spec));
    }

    // Alias table, checked for collisions after all canonical names exist.
    for (const auto& [cname, spec] : result.db.specs) {
        for (const std::string& alias : spec.aliases) {
            if (result.db.specs.count(alias)) {
                error("commands (" + cname + ")",
                      "alias \"" + alias + "\" collides with a canonical command name");
                continue;
            }
            auto [it, inserted] = result.db.alias_to_canon.emplace(alias, cname);
            if (!inserted && it->second != cname)
                error("commands (" + cname + ")",
                      "alias \"" + alias + "\" already resolves to \"" + it->second + "\"");
        }
    }
    for (const std::string& b : result.db.builtins) {
        if (result.db.specs.count(b) || result.db.alias_to_canon.count(b))
            error("builtins", "builtin \"" + b + "\" collides with a command name or alias");
    }

    if (!result.ok()) result.db = CommandDatabase{};
    return result;
}

inline SchemaLoadResult load_schema(const std::string& path) {
    return load_schema_text(read_file(path), path);
}

/// Loads and throws a SchemaError carrying every diagnostic on failure.
inline CommandDatabase load_schema_or_throw(const std::string& path) {
    SchemaLoadResult result = load_schema(path);
    if (!result.ok()) {
        std::ostringstream msg;
        msg << "schema validation failed for " << path << ":";
        for (const auto& d : result.diagnostics)
            msg << "\n  [" << to_string(d.severity) << "] " << d.location << ": " << d.message;
        throw SchemaError(msg.str(), result.diagnostics);
    }
    return std::move(result.db);
}

/// Emit the same schema format load_schema reads. Deterministic key order.
inline std::string write_back(const CommandDatabase& db) {
    using ojson = nlohmann::ordered_json;
    ojson doc;
    doc["format"] = "tclforge-command-schema";
    doc["version"] = 1;
    doc["builtins"] = db.builtins;
    ojson props = ojson::object();
    for (const auto& [obj_type, m] : db.property_docs) {
        ojson entry = ojson::object();
        for (const auto& [prop, desc] : m) entry[prop] = desc;
        props[obj_type] = std::move(entry);
    }
    doc["property_docs"] = std::move(props);
    ojson commands = ojson::array();
    for (const auto& [name, spec] : db.specs) {
        ojson c;
        c["name"] = spec.name;
        if (!spec.aliases.empty()) c["aliases"] = spec.aliases;
        c["doc"] = spec.doc;
        if (!spec.categories.empty()) c["categories"] = spec.categories;
        c["min_positional"] = spec.min_positional;
        if (spec.max_positional == kUnboundedPositional) c["max_positional"] = "unbounded";
        else c["max_positional"] = spec.max_positional;
        ojson params = ojson::array();
        for (const ParamSpec& p : spec.params) {
            ojson pj;
            pj["name"] = p.name;
            pj["kind"] = to_string(p.kind);
            if (p.kind != ParamKind::Flag) pj["value_type"] = to_string(p.value_type);
            if (!p.enum_values.empty()) pj["enum_values"] = p.enum_values;
            if (p.required) pj["required"] = true;
            if (p.repeatable) pj["repeatable"] = true;
            if (!p.conflicts_with.empty()) pj["conflicts_with"] = p.conflicts_with;
            if (p.sample_min) pj["min"] = *p.sample_min;
            if (p.sample_max) pj["max"] = *p.sample_max;
            params.push_back(std::move(pj));
        }
        c["params"] = std::move(params);
        commands.push_back(std::move(c));
    }
    doc["commands"] = std::move(commands);
    return doc.dump(2) + "\n";
}

/// Digest of the canonical write-back form; pins suites and manifests to the
/// exact schema they were built against.
inline std::string schema_digest(const CommandDatabase& db) {
    return digest_hex(write_back(db));
}

// ---------------------------------------------------------------------------
// Invocation validation
// ---------------------------------------------------------------------------

namespace detail {

inline bool literal_parses_as_int(const std::string& s) {
    if (s.empty()) return false;
    std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start == s.size()) return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

inline bool literal_parses_as_float(const std::string& s) {
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    double out;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

inline bool literal_parses_as_bool(const std::string& s) {
    return s == "true" || s == "false" || s == "0" || s == "1";
}

/// Numbers are always values, never option names.
inline bool looks_like_option(const tcl::Word& w) {
    if (w.is_substitution() || w.kind != tcl::TokenKind::BareWord) return false;
    if (w.text.size() < 2 || w.text[0] != '-') return false;
    return !literal_parses_as_float(w.text);
}

inline const ParamSpec* resolve_param(const CommandSpec& spec, const std::string& name,
                                      bool prefix_matching, bool* ambiguous) {
    if (const ParamSpec* exact = spec.find_param(name)) return exact;
    if (!prefix_matching) return nullptr;
    const ParamSpec* match = nullptr;
    for (const ParamSpec& p : spec.params) {
        if (p.kind == ParamKind::Positional) continue;
        if (p.name.size() > name.size() && p.name.compare(0, name.size(), name) == 0) {
            if (match) { *ambiguous = true; return nullptr; }
            match = &p;
        }
    }
    return match;
}

inline void check_value(const ParamSpec& param, const tcl::Word& value, const Span& span,
                        std::vector<Violation>& out) {
    if (value.is_substitution()) return;  // wildcard: always passes value checks
    std::string text = value.content();
    switch (param.value_type) {
        case ValueType::Enum: {
            bool ok = std::find(param.enum_values.begin(), param.enum_values.end(), text) !=
                      param.enum_values.end();
            if (!ok) {
                std::string allowed;
                for (const auto& e : param.enum_values)
                    allowed += (allowed.empty() ? "" : ", ") + e;
                out.push_back({RuleId::EnumValue, Severity::Error,
                               "\"" + text + "\" is not a legal value for " + param.name +
                                   " (one of: " + allowed + ")",
                               span});
            }
            break;
        }
        case ValueType::Bool:
            if (!literal_parses_as_bool(text))
                out.push_back({RuleId::EnumValue, Severity::Error,
                               param.name + " expects a boolean (true, false, 0, 1), got \"" +
                                   text + "\"",
                               span});
            break;
        case ValueType::Int:
            if (!literal_parses_as_int(text))
                out.push_back({RuleId::EnumValue, Severity::Error,
                               param.name + " expects an integer, got \"" + text + "\"", span});
            break;
        case ValueType::Float:
            if (!literal_parses_as_float(text))
                out.push_back({RuleId::EnumValue, Severity::Error,
                               param.name + " expects a number, got \"" + text + "\"", span});
            break;
        case ValueType::String:
        case ValueType::ObjectList:
            break;
    }
}

}  // namespace detail

/// Option, arity, enum, repetition and conflict checks for one invocation
/// against its spec. Substitution words are wildcards for value checks but
/// still count toward positional arity.
inline std::vector<Violation> validate_invocation(const CommandSpec& spec,
                                                  const tcl::CommandInvocation& inv,
                                                  bool prefix_matching = false) {
    std::vector<Violation> out;
    std::vector<const ParamSpec*> seen;
    int positional_count = 0;

    for (std::size_t i = 1; i < inv.words.size(); ++i) {
        const tcl::Word& w = inv.words[i];
        if (!detail::looks_like_option(w)) {
            const ParamSpec* pp = spec.positional_param(positional_count);
            if (pp) detail::check_value(*pp, w, w.span, out);
            ++positional_count;
            continue;
        }
        bool ambiguous = false;
        const ParamSpec* param =
            detail::resolve_param(spec, w.text, prefix_matching, &ambiguous);
        if (!param) {
            out.push_back({RuleId::UnknownOption, Severity::Error,
                           ambiguous ? "option " + w.text + " is an ambiguous prefix"
                                     : spec.name + " has no option " + w.text,
                           w.span});
            continue;
        }
        if (!param->repeatable &&
            std::find(seen.begin(), seen.end(), param) != seen.end()) {
            out.push_back({RuleId::DuplicateOption, Severity::Error,
                           "option " + param->name + " given more than once", w.span});
        }
        seen.push_back(param);
        if (param->kind == ParamKind::Valued) {
            bool has_value = i + 1 < inv.words.size() &&
                             !detail::looks_like_option(inv.words[i + 1]);
            if (!has_value) {
                out.push_back({RuleId::Arity, Severity::Error,
                               "option " + param->name + " requires a value", w.span});
                continue;
            }
            ++i;
            detail::check_value(*param, inv.words[i], inv.words[i].span, out);
        }
    }

    // Arity over positionals.
    if (positional_count < spec.min_positional ||
        (spec.max_positional != kUnboundedPositional &&
         positional_count > spec.max_positional)) {
        std::string range = std::to_string(spec.min_positional);
        if (spec.max_positional == kUnboundedPositional) range += "+";
        else if (spec.max_positional != spec.min_positional)
            range += ".." + std::to_string(spec.max_positional);
        out.push_back({RuleId::Arity, Severity::Error,
                       spec.name + " takes " + range + " positional argument(s), got " +
                           std::to_string(positional_count),
                       inv.span});
    }

    // Missing required options.
    for (const ParamSpec& p : spec.params) {
        if (p.kind == ParamKind::Positional || !p.required) continue;
        if (std::find(seen.begin(), seen.end(), &p) == seen.end())
            out.push_back({RuleId::MissingRequired, Severity::Error,
                           spec.name + " requires option " + p.name, inv.span});
    }

    // Conflicting options co-present (reported once per ordered pair seen).
    for (std::size_t a = 0; a < seen.size(); ++a) {
        for (const std::string& other : seen[a]->conflicts_with) {
            for (std::size_t b = 0; b < seen.size(); ++b) {
                if (b == a || seen[b]->name != other) continue;
                if (seen[b]->name < seen[a]->name) continue;  // dedup the pair
                out.push_back({RuleId::Conflict, Severity::Error,
                               "options " + seen[a]->name + " and " + other +
                                   " cannot be combined",
                               inv.span});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Documentation bundle
// ---------------------------------------------------------------------------

namespace detail {

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// Word-ish containment: "net" matches "Returns nets", not "planner".
inline bool mentions(const std::string& haystack_lower, const std::string& needle_lower) {
    std::size_t pos = 0;
    auto is_word_char = [](unsigned char c) { return std::isalnum(c) != 0; };
    while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word_char(haystack_lower[pos - 1]);
        std::size_t end = pos + needle_lower.size();
        // Allow a plural 's' after the mention.
        if (end < haystack_lower.size() && haystack_lower[end] == 's') ++end;
        bool right_ok = end >= haystack_lower.size() || !is_word_char(haystack_lower[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

}  // namespace detail

/// Definitions for the given command names, one section per known name in
/// input order (deduplicated), followed by property docs for object types the
/// included commands mention, then a trailing section naming anything
/// undocumented. Deterministic.
inline std::string doc_bundle(const CommandDatabase& db, const std::vector<std::string>& names) {
    std::ostringstream out;
    std::set<std::string> emitted;
    std::vector<std::string> unknown;
    std::set<std::string> unknown_seen;
    std::string mention_text;

    for (const std::string& name : names) {
        LookupResult hit = db.lookup(name);
        if (hit.kind == LookupKind::Unknown) {
            if (unknown_seen.insert(name).second) unknown.push_back(name);
            continue;
        }
        std::string canonical =
            hit.kind == LookupKind::Spec ? hit.spec->name : name;
        if (!emitted.insert(canonical).second) continue;

        if (hit.kind == LookupKind::Builtin) {
            out << "command " << canonical << "\n  core Tcl builtin command\n\n";
            mention_text += detail::lower(canonical) + "\n";
            continue;
        }
        const CommandSpec& spec = *hit.spec;
        out << "command " << spec.name;
        if (!spec.aliases.empty()) {
            out << " (alias:";
            for (const auto& a : spec.aliases) out << " " << a;
            out << ")";
        }
        out << "\n  " << spec.doc << "\n";
        for (const ParamSpec& p : spec.params) {
            out << "    " << p.name;
            if (p.kind == ParamKind::Flag) out << "  flag";
            else if (p.kind == ParamKind::Positional) out << "  positional " << to_string(p.value_type);
            else out << "  " << to_string(p.value_type);
            if (!p.enum_values.empty()) {
                out << " {";
                for (std::size_t i = 0; i < p.enum_values.size(); ++i)
                    out << (i ? " " : "") << p.enum_values[i];
                out << "}";
            }
            if (p.required) out << "  (required)";
            out << "\n";
        }
        out << "\n";
        mention_text += detail::lower(spec.name) + "\n" + detail::lower(spec.doc) + "\n";
    }

    // Property docs for object types the included commands talk about.
    if (!mention_text.empty()) {
        for (const auto& [obj_type, props] : db.property_docs) {
            if (!detail::mentions(mention_text, detail::lower(obj_type))) continue;
            out << "object " << obj_type << " properties\n";
            for (const auto& [prop, desc] : props)
                out << "    ." << prop << "  " << desc << "\n";
            out << "\n";
        }
    }

    if (!unknown.empty()) {
        out << "undocumented commands\n";
        for (const std::string& u : unknown) out << "    " << u << "\n";
    }
    return out.str();
}

}  // namespace tclforge
