#pragma once

#include <map>
#include <string>

#include "tclforge/core.hpp"

namespace tclforge {

/// Closed rule set shared by the invocation validator and the lint engine.
enum class RuleId {
    ParseError,
    UnknownCommand,
    UnknownOption,
    Arity,
    EnumValue,
    MissingRequired,
    DuplicateOption,
    Conflict,
    UndefinedVariable,
};

inline const char* to_string(RuleId id) {
    switch (id) {
        case RuleId::ParseError: return "parse-error";
        case RuleId::UnknownCommand: return "unknown-command";
        case RuleId::UnknownOption: return "unknown-option";
        case RuleId::Arity: return "arity";
        case RuleId::EnumValue: return "enum-value";
        case RuleId::MissingRequired: return "missing-required";
        case RuleId::DuplicateOption: return "duplicate-option";
        case RuleId::Conflict: return "conflict";
        case RuleId::UndefinedVariable: return "undefined-variable";
    }
    return "?";
}

inline RuleId rule_id_from_string(const std::string& s) {
    if (s == "parse-error") return RuleId::ParseError;
    if (s == "unknown-command") return RuleId::UnknownCommand;
    if (s == "unknown-option") return RuleId::UnknownOption;
    if (s == "arity") return RuleId::Arity;
    if (s == "enum-value") return RuleId::EnumValue;
    if (s == "missing-required") return RuleId::MissingRequired;
    if (s == "duplicate-option") return RuleId::DuplicateOption;
    if (s == "conflict") return RuleId::Conflict;
    if (s == "undefined-variable") return RuleId::UndefinedVariable;
    throw std::invalid_argument("unknown rule id \"" + s + "\"");
}

enum class Severity { Error, Warning };

inline const char* to_string(Severity s) {
    return s == Severity::Error ? "error" : "warning";
}

inline Severity severity_from_string(const std::string& s) {
    return s == "warning" ? Severity::Warning : Severity::Error;
}

struct Violation {
    RuleId rule_id = RuleId::ParseError;
    Severity severity = Severity::Error;
    std::string message;
    Span span;
};

}  // namespace tclforge
