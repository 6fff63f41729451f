#pragma once

// Tokenizer and command-structure parser for the practical Tcl subset used by
// Innovus-style place-and-route scripts. No evaluation, no variable expansion:
// substitutions are recorded as opaque markers. Completeness semantics follow
// Tcl's own script-completeness rules (braces hide everything, quotes keep
// bracket substitutions live, a trailing backslash-newline asks for more
// input), so check_complete() agrees with a real interpreter.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tclforge/core.hpp"

namespace tclforge::tcl {

enum class TokenKind {
    BareWord,
    BracedWord,
    QuotedWord,
    BracketSubstitution,
    VariableReference,
    CommandSeparator,
    Comment,
    LineContinuation,
};

inline const char* to_string(TokenKind k) {
    switch (k) {
        case TokenKind::BareWord: return "bare-word";
        case TokenKind::BracedWord: return "braced-word";
        case TokenKind::QuotedWord: return "quoted-word";
        case TokenKind::BracketSubstitution: return "bracket-substitution";
        case TokenKind::VariableReference: return "variable-reference";
        case TokenKind::CommandSeparator: return "command-separator";
        case TokenKind::Comment: return "comment";
        case TokenKind::LineContinuation: return "line-continuation";
    }
    return "?";
}

struct Token {
    TokenKind kind = TokenKind::BareWord;
    std::string text;        // raw source slice; word/separator spans tile the input
    Span span;
    bool unterminated = false;
    // Substitution markers found inside quoted and bare words ($var, [cmd]).
    std::vector<Token> children;
};

struct Word {
    TokenKind kind = TokenKind::BareWord;
    std::string text;   // raw slice including braces/quotes
    Span span;
    std::vector<Token> substitutions;  // markers inside this word

    /// True when the word's value is not statically known ($var, [cmd], or a
    /// quoted/bare word containing such markers). Wildcards pass value checks.
    bool is_substitution() const {
        return kind == TokenKind::VariableReference ||
               kind == TokenKind::BracketSubstitution || !substitutions.empty();
    }

    /// Literal content for option/enum matching: interior of braces/quotes,
    /// raw text for bare words. Meaningless for substitution words.
    std::string content() const {
        if (kind == TokenKind::BracedWord || kind == TokenKind::QuotedWord) {
            char open = text.empty() ? '\0' : text.front();
            char close = (open == '{') ? '}' : '"';
            if (text.size() >= 2 && text.back() == close)
                return text.substr(1, text.size() - 2);
            return text.size() >= 1 ? text.substr(1) : text;
        }
        return text;
    }
};

struct CommandInvocation {
    std::string name;                       // text of the first word
    std::vector<Word> words;                // words[0] is the name
    Span span;
    std::vector<CommandInvocation> nested;  // from brackets and control bodies
};

struct ParseError {
    std::string message;
    Span span;
};

struct ScriptAst {
    std::string source;                      // sanitized UTF-8
    std::vector<CommandInvocation> commands;
    std::vector<ParseError> parse_errors;    // structural: empty <=> complete
    // Problems that do not affect structural completeness but would stop a
    // real interpreter: glued text after a closed brace/quote group (the
    // interpreter aborts there, so the script cannot be fixed by more input)
    // and broken interiors of brace-quoted control bodies (braces hide their
    // content from the completeness check). The linter reports these.
    std::vector<ParseError> soft_errors;
};

inline std::vector<std::string> default_control_commands() {
    return {"if", "else", "elseif", "foreach", "while", "for", "proc", "catch", "switch"};
}

struct ParserOptions {
    std::vector<std::string> control_commands = default_control_commands();
};

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_word_separator(char c) { return c == ' ' || c == '\t' || c == '\r'; }
inline bool is_command_separator(char c) { return c == ';' || c == '\n'; }
inline bool is_var_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == ':';
}

/// Scans a fixed [begin, end) window of the source; spans are absolute.
class Scanner {
public:
    Scanner(std::string_view src, std::size_t begin, std::size_t end)
        : src_(src), begin_(begin), end_(end) {}

    explicit Scanner(std::string_view src) : Scanner(src, 0, src.size()) {}

    /// First "extra characters after close-brace/close-quote" event, if any.
    /// A real interpreter aborts its scan there, which makes the script
    /// complete regardless of what follows.
    bool saw_extra() const { return saw_extra_; }
    std::size_t extra_pos() const { return extra_pos_; }
    const char* extra_what() const { return extra_what_; }

    /// True when src[pos] begins a backslash-newline continuation (optional CR).
    bool at_continuation(std::size_t pos) const {
        if (pos >= end_ || src_[pos] != '\\') return false;
        std::size_t j = pos + 1;
        if (j < end_ && src_[j] == '\r') ++j;
        return j < end_ && src_[j] == '\n';
    }

    std::size_t continuation_end(std::size_t pos) const {
        std::size_t j = pos + 1;
        if (j < end_ && src_[j] == '\r') ++j;
        return j + 1;  // past the newline
    }

    std::vector<Token> tokenize() {
        std::vector<Token> tokens;
        bool at_command_start = true;
        std::size_t i = begin_;
        while (i < end_) {
            char c = src_[i];
            if (is_word_separator(c)) { ++i; continue; }
            if (at_continuation(i)) {
                std::size_t end = continuation_end(i);
                tokens.push_back(make(TokenKind::LineContinuation, i, end));
                i = end;
                continue;
            }
            if (is_command_separator(c)) {
                tokens.push_back(make(TokenKind::CommandSeparator, i, i + 1));
                ++i;
                at_command_start = true;
                continue;
            }
            if (c == '#' && at_command_start) {
                std::size_t end = scan_comment(i);
                tokens.push_back(make(TokenKind::Comment, i, end));
                i = end;
                continue;
            }
            tokens.push_back(scan_word(i, /*in_bracket=*/false));
            i = tokens.back().span.end;
            at_command_start = false;
        }
        return tokens;
    }

    /// Comment runs to the first unescaped newline (exclusive); a backslash
    /// escapes the next byte, so backslash-newline continues the comment.
    std::size_t scan_comment(std::size_t i) const {
        while (i < end_) {
            if (src_[i] == '\\' && i + 1 < end_) { i += 2; continue; }
            if (src_[i] == '\n') return i;
            ++i;
        }
        return i;
    }

    /// One word. Braces and quotes are only special as the first character;
    /// a closed group followed by anything but a word terminator is an
    /// "extra characters after close-brace/quote" event (see saw_extra),
    /// after which the glue characters still extend the same token so the
    /// stream keeps tiling the input. Bracket and variable markers inside
    /// bare segments are recorded as children.
    Token scan_word(std::size_t start, bool in_bracket) {
        Token tok;
        tok.span.begin = start;
        std::size_t i = start;
        bool leading = true;      // at the first character of the word
        bool broken = false;

        auto check_group_end = [&](std::size_t pos, bool group_ok, const char* what) {
            if (!group_ok || pos >= end_) return;
            char c = src_[pos];
            if (is_word_separator(c) || is_command_separator(c)) return;
            if (in_bracket && c == ']') return;
            if (at_continuation(pos)) return;  // continuation acts as whitespace
            if (!saw_extra_) {
                saw_extra_ = true;
                extra_pos_ = pos;
                extra_what_ = what;
            }
        };

        while (i < end_) {
            char c = src_[i];
            if (is_word_separator(c) || is_command_separator(c)) break;
            if (at_continuation(i)) break;
            if (in_bracket && c == ']') break;

            if (c == '{' && leading) {
                bool was_broken = broken;
                i = scan_braced(i, &broken);
                check_group_end(i, broken == was_broken, "extra characters after close-brace");
                tok.kind = TokenKind::BracedWord;
                leading = false;
                continue;
            }
            if (c == '"' && leading) {
                bool was_broken = broken;
                i = scan_quoted(i, tok.children, &broken);
                check_group_end(i, broken == was_broken, "extra characters after close-quote");
                tok.kind = TokenKind::QuotedWord;
                leading = false;
                continue;
            }
            if (c == '[') {
                Token sub;
                sub.kind = TokenKind::BracketSubstitution;
                sub.span.begin = i;
                bool sub_broken = false;
                std::size_t end = scan_bracket(i, &sub_broken);
                sub.span.end = end;
                sub.text = slice(i, end);
                sub.unterminated = sub_broken;
                broken = broken || sub_broken;
                if (leading) tok.kind = TokenKind::BracketSubstitution;
                tok.children.push_back(std::move(sub));
                i = end;
                leading = false;
                continue;
            }
            if (c == '$') {
                bool var_broken = false;
                std::size_t end = scan_variable(i, tok.children, &var_broken);
                if (end == i + 1 && !var_broken) {
                    // Lone '$' is a literal character.
                    if (leading) tok.kind = TokenKind::BareWord;
                    ++i;
                    leading = false;
                    continue;
                }
                Token var;
                var.kind = TokenKind::VariableReference;
                var.span = {i, end};
                var.text = slice(i, end);
                var.unterminated = var_broken;
                broken = broken || var_broken;
                if (leading) tok.kind = TokenKind::VariableReference;
                tok.children.push_back(std::move(var));
                i = end;
                leading = false;
                continue;
            }
            if (c == '\\') {
                i = (i + 1 < end_) ? i + 2 : i + 1;
                if (leading) tok.kind = TokenKind::BareWord;
                leading = false;
                continue;
            }
            if (leading) tok.kind = TokenKind::BareWord;
            ++i;
            leading = false;
        }

        tok.span.end = i;
        tok.text = slice(start, i);
        tok.unterminated = broken;

        // A word built from several glued segments is effectively bare unless
        // the whole word is a single substitution.
        if ((tok.kind == TokenKind::BracketSubstitution ||
             tok.kind == TokenKind::VariableReference) &&
            !(tok.children.size() == 1 && tok.children[0].span.begin == start &&
              tok.children[0].span.end == i)) {
            tok.kind = TokenKind::BareWord;
        }
        return tok;
    }

    /// Brace group: only braces count, backslash escapes the next byte.
    /// Returns one past the closing brace; sets *broken when unterminated.
    std::size_t scan_braced(std::size_t i, bool* broken) const {
        std::size_t depth = 0;
        while (i < end_) {
            char c = src_[i];
            if (c == '\\' && i + 1 < end_) { i += 2; continue; }
            if (c == '{') ++depth;
            if (c == '}') {
                --depth;
                if (depth == 0) return i + 1;
            }
            ++i;
        }
        *broken = true;
        return i;
    }

    /// Quoted group: backslash escapes, bracket substitutions and variable
    /// references stay live inside quotes, braces do not.
    std::size_t scan_quoted(std::size_t i, std::vector<Token>& children, bool* broken) {
        ++i;  // past the opening quote
        while (i < end_) {
            char c = src_[i];
            if (c == '\\' && i + 1 < end_) { i += 2; continue; }
            if (c == '"') return i + 1;
            if (c == '[') {
                Token sub;
                sub.kind = TokenKind::BracketSubstitution;
                sub.span.begin = i;
                bool sub_broken = false;
                std::size_t end = scan_bracket(i, &sub_broken);
                sub.span.end = end;
                sub.text = slice(i, end);
                sub.unterminated = sub_broken;
                children.push_back(std::move(sub));
                if (sub_broken) { *broken = true; return end; }
                i = end;
                continue;
            }
            if (c == '$') {
                bool var_broken = false;
                std::size_t end = scan_variable(i, children, &var_broken);
                if (end > i + 1 || var_broken) {
                    Token var;
                    var.kind = TokenKind::VariableReference;
                    var.span = {i, end};
                    var.text = slice(i, end);
                    var.unterminated = var_broken;
                    children.push_back(std::move(var));
                    if (var_broken) { *broken = true; return end; }
                    i = end;
                    continue;
                }
                ++i;
                continue;
            }
            ++i;
        }
        *broken = true;
        return i;
    }

    /// Bracket substitution: the interior follows full script rules (words,
    /// quotes, braces, comments, nested brackets) until the matching ']'.
    std::size_t scan_bracket(std::size_t i, bool* broken) {
        ++i;  // past '['
        bool at_command_start = true;
        while (i < end_) {
            char c = src_[i];
            if (c == ']') return i + 1;
            if (is_word_separator(c)) { ++i; continue; }
            if (at_continuation(i)) { i = continuation_end(i); continue; }
            if (is_command_separator(c)) { ++i; at_command_start = true; continue; }
            if (c == '#' && at_command_start) { i = scan_comment(i); continue; }
            Token word = scan_word(i, /*in_bracket=*/true);
            if (word.unterminated) { *broken = true; return word.span.end; }
            i = word.span.end;
            at_command_start = false;
        }
        *broken = true;
        return i;
    }

    /// Variable reference at '$': $name, ${braced name}, or $name(index).
    /// Returns i+1 when the '$' is a literal (no name follows).
    std::size_t scan_variable(std::size_t i, std::vector<Token>& children, bool* broken) {
        std::size_t start = i;
        ++i;  // past '$'
        if (i >= end_) return start + 1;
        if (src_[i] == '{') {
            // Braced name: everything to the first '}', no escapes.
            ++i;
            while (i < end_ && src_[i] != '}') ++i;
            if (i >= end_) { *broken = true; return i; }
            return i + 1;
        }
        std::size_t name_begin = i;
        while (i < end_ && is_var_name_char(src_[i])) ++i;
        bool has_name = i > name_begin;
        if (i < end_ && src_[i] == '(') return scan_var_index(start, i, children, broken);
        if (!has_name) return start + 1;  // bare '$'
        return i;
    }

    /// Array index after '$name(' (the name may be empty): backslash escapes,
    /// nested variable and bracket substitutions stay live, braces and quotes
    /// are plain characters, ')' closes.
    std::size_t scan_var_index(std::size_t start, std::size_t i,
                               std::vector<Token>& children, bool* broken) {
        ++i;  // past '('
        while (i < end_) {
            char c = src_[i];
            if (c == '\\' && i + 1 < end_) { i += 2; continue; }
            if (c == ')') return i + 1;
            if (c == '[') {
                bool sub_broken = false;
                Token sub;
                sub.kind = TokenKind::BracketSubstitution;
                sub.span.begin = i;
                std::size_t end = scan_bracket(i, &sub_broken);
                sub.span.end = end;
                sub.text = slice(i, end);
                sub.unterminated = sub_broken;
                children.push_back(std::move(sub));
                if (sub_broken) { *broken = true; return end; }
                i = end;
                continue;
            }
            if (c == '$') {
                bool var_broken = false;
                std::size_t end = scan_variable(i, children, &var_broken);
                if (var_broken) { *broken = true; return end; }
                i = (end > i) ? end : i + 1;
                continue;
            }
            ++i;
        }
        *broken = true;
        (void)start;
        return i;
    }

private:
    Token make(TokenKind kind, std::size_t begin, std::size_t end) const {
        Token t;
        t.kind = kind;
        t.span = {begin, end};
        t.text = slice(begin, end);
        return t;
    }
    std::string slice(std::size_t b, std::size_t e) const {
        return std::string(src_.substr(b, e - b));
    }

    std::string_view src_;
    std::size_t begin_ = 0;
    std::size_t end_ = 0;
    bool saw_extra_ = false;
    std::size_t extra_pos_ = 0;
    const char* extra_what_ = "";
};

}  // namespace detail

/// Full token stream; never fails. Unbalanced constructs yield a final word
/// token of the open construct's kind flagged unterminated.
inline std::vector<Token> tokenize(std::string_view source) {
    std::string clean = sanitize_utf8(source);
    return detail::Scanner(clean).tokenize();
}

// ---------------------------------------------------------------------------
// Completeness
// ---------------------------------------------------------------------------

struct Completeness {
    bool complete = true;
    std::string reason;  // set when incomplete
};

/// Structural completeness: braces, brackets and quotes balance outside of
/// comments and escapes, and the script does not end in a pending
/// backslash-newline continuation. Matches the reference interpreter's
/// script-completeness check, including its abort on glued text after a
/// closed group: more input cannot fix such a script, so it is complete.
inline Completeness check_complete(std::string_view source) {
    std::string clean = sanitize_utf8(source);
    detail::Scanner scanner(clean);
    std::vector<Token> tokens = scanner.tokenize();
    if (scanner.saw_extra()) return {true, {}};
    for (const Token& t : tokens) {
        if (t.unterminated) {
            TokenKind kind = t.kind;
            for (const Token& child : t.children)
                if (child.unterminated) kind = child.kind;
            return {false, std::string("unterminated ") + to_string(kind)};
        }
    }
    if (!tokens.empty() && tokens.back().kind == TokenKind::LineContinuation) {
        return {false, "trailing line continuation expects another line"};
    }
    return {true, {}};
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

inline Word to_word(const Token& tok) {
    Word w;
    w.kind = tok.kind;
    w.text = tok.text;
    w.span = tok.span;
    w.substitutions = tok.children;
    return w;
}

class Parser {
public:
    Parser(std::string_view source, const ParserOptions& options)
        : src_(source), options_(options) {}

    ScriptAst parse() {
        ScriptAst ast;
        ast.source = std::string(src_);
        parse_range(0, src_.size(), ast.commands, ast.parse_errors, ast.soft_errors,
                    /*top_level=*/true);
        return ast;
    }

private:
    void parse_range(std::size_t begin, std::size_t end,
                     std::vector<CommandInvocation>& out,
                     std::vector<ParseError>& errors,
                     std::vector<ParseError>& soft_errors,
                     bool top_level) {
        Scanner scanner(src_, begin, end);
        std::vector<Token> tokens = scanner.tokenize();

        // An extra-characters event aborts a real interpreter before it can
        // see anything later, so later unbalanced constructs are not
        // structural errors; the event itself is a soft (lint-level) error.
        bool aborted = scanner.saw_extra();
        if (aborted) record_soft_extra(scanner, soft_errors);

        std::vector<Token> current;
        auto flush = [&] {
            if (current.empty()) return;
            emit_command(current, out, errors, soft_errors);
            current.clear();
        };
        for (Token& t : tokens) {
            switch (t.kind) {
                case TokenKind::CommandSeparator: flush(); break;
                case TokenKind::Comment:
                case TokenKind::LineContinuation: break;
                default:
                    if (t.unterminated && !aborted) report_unterminated(t, errors);
                    current.push_back(std::move(t));
                    break;
            }
        }
        flush();

        if (top_level && !aborted && !tokens.empty() &&
            tokens.back().kind == TokenKind::LineContinuation) {
            errors.push_back({"script ends with a line continuation", tokens.back().span});
        }
    }

    void record_soft_extra(const Scanner& scanner, std::vector<ParseError>& soft_errors) {
        Span at{scanner.extra_pos(), scanner.extra_pos() + 1};
        for (const ParseError& e : soft_errors)
            if (e.span.begin == at.begin) return;  // already recorded by an outer range
        soft_errors.push_back({scanner.extra_what(), at});
    }

    void report_unterminated(const Token& t, std::vector<ParseError>& errors) {
        // Point at the opening character of the unbalanced construct.
        for (const Token& child : t.children) {
            if (child.unterminated) {
                errors.push_back({std::string("unterminated ") + to_string(child.kind),
                                  {child.span.begin, child.span.begin + 1}});
                return;
            }
        }
        errors.push_back({std::string("unterminated ") + to_string(t.kind),
                          {t.span.begin, std::min(t.span.begin + 1, t.span.end)}});
    }

    void emit_command(const std::vector<Token>& tokens,
                      std::vector<CommandInvocation>& out,
                      std::vector<ParseError>& errors,
                      std::vector<ParseError>& soft_errors) {
        CommandInvocation inv;
        inv.span = {tokens.front().span.begin, tokens.back().span.end};
        bool any_unterminated = false;
        for (const Token& t : tokens) {
            inv.words.push_back(to_word(t));
            any_unterminated = any_unterminated || t.unterminated;
        }
        inv.name = inv.words.front().text;

        if (!any_unterminated) {
            // Bracket substitutions anywhere in any word parse recursively.
            for (const Word& w : inv.words) {
                for (const Token& sub : w.substitutions) {
                    if (sub.kind == TokenKind::BracketSubstitution && !sub.unterminated)
                        parse_bracket_interior(sub.span, inv.nested, errors, soft_errors);
                }
            }
            if (is_control_command(inv.name))
                descend_control_bodies(inv, soft_errors);
        }
        out.push_back(std::move(inv));
    }

    void parse_bracket_interior(Span span, std::vector<CommandInvocation>& nested,
                                std::vector<ParseError>& errors,
                                std::vector<ParseError>& soft_errors) {
        if (span.length() < 2) return;
        std::size_t end = (src_[span.end - 1] == ']') ? span.end - 1 : span.end;
        parse_range(span.begin + 1, end, nested, errors, soft_errors, /*top_level=*/false);
    }

    /// Parse a brace-quoted body word as a script. Interior problems are
    /// soft errors: structurally the braces already balanced.
    void descend_body(const Word& w, std::vector<CommandInvocation>& nested,
                      std::vector<ParseError>& soft_errors) {
        if (w.kind != TokenKind::BracedWord) return;
        if (w.span.length() < 2 || src_[w.span.begin] != '{' || src_[w.span.end - 1] != '}')
            return;
        std::vector<CommandInvocation> cmds;
        std::vector<ParseError> errs;
        std::vector<ParseError> inner_soft;
        parse_range(w.span.begin + 1, w.span.end - 1, cmds, errs, inner_soft,
                    /*top_level=*/false);
        if (!errs.empty()) {
            // Keep the body opaque; report where it went wrong.
            for (ParseError& e : errs) soft_errors.push_back(std::move(e));
            return;
        }
        for (ParseError& e : inner_soft) soft_errors.push_back(std::move(e));
        for (CommandInvocation& c : cmds) nested.push_back(std::move(c));
    }

    bool is_control_command(const std::string& name) const {
        for (const std::string& c : options_.control_commands)
            if (c == name) return true;
        return false;
    }

    static bool word_is(const Word& w, std::string_view text) {
        return w.kind == TokenKind::BareWord && w.text == text;
    }

    /// Script-body positions per control command. Conditions and expressions
    /// (if/while tests, for tests) are not scripts and are left opaque.
    void descend_control_bodies(CommandInvocation& inv,
                                std::vector<ParseError>& soft_errors) {
        const std::string& name = inv.name;
        std::vector<Word> words = inv.words;  // copy: descend_body grows inv.nested
        auto body = [&](std::size_t idx) {
            if (idx < words.size()) descend_body(words[idx], inv.nested, soft_errors);
        };

        if (name == "if") {
            // if expr ?then? body ?elseif expr ?then? body?... ?else? ?body?
            std::size_t i = 1;
            bool expect_expr = true;
            while (i < words.size()) {
                if (expect_expr) {
                    ++i;  // the condition, not a script
                    if (i < words.size() && word_is(words[i], "then")) ++i;
                    body(i);
                    ++i;
                    expect_expr = false;
                    continue;
                }
                if (word_is(words[i], "elseif")) { ++i; expect_expr = true; continue; }
                if (word_is(words[i], "else")) { ++i; body(i); ++i; continue; }
                ++i;
            }
            return;
        }
        if (name == "while") { if (words.size() >= 3) body(words.size() - 1); return; }
        if (name == "foreach") { if (words.size() >= 4) body(words.size() - 1); return; }
        if (name == "for") { body(1); body(3); body(4); return; }
        if (name == "proc") { body(3); return; }
        if (name == "catch") { body(1); return; }
        if (name == "switch") { descend_switch(inv, words, soft_errors); return; }
        if (name == "else" || name == "elseif") return;  // keywords of if
        // Configured control command without a known shape: descend every
        // braced argument.
        for (std::size_t i = 1; i < words.size(); ++i) body(i);
    }

    /// Only the brace-delimited pattern/body pair form is descended; other
    /// switch forms are ambiguous without evaluation.
    void descend_switch(CommandInvocation& inv, const std::vector<Word>& words,
                        std::vector<ParseError>& soft_errors) {
        if (words.size() < 3) return;
        const Word& last = words.back();
        if (last.kind != TokenKind::BracedWord || last.span.length() < 2) return;
        if (src_[last.span.end - 1] != '}') return;
        std::vector<Token> pair_tokens =
            Scanner(src_, last.span.begin + 1, last.span.end - 1).tokenize();
        std::vector<Token> pair_words;
        for (Token& t : pair_tokens) {
            if (t.kind == TokenKind::CommandSeparator || t.kind == TokenKind::Comment ||
                t.kind == TokenKind::LineContinuation)
                continue;
            pair_words.push_back(std::move(t));
        }
        for (std::size_t i = 1; i < pair_words.size(); i += 2) {
            if (pair_words[i].kind != TokenKind::BracedWord) continue;  // '-' fallthrough
            descend_body(to_word(pair_words[i]), inv.nested, soft_errors);
        }
    }

    std::string_view src_;
    const ParserOptions& options_;
};

}  // namespace detail

/// Commands segmented at separators; recognized control-command bodies and
/// bracket substitutions are recursively parsed into nested invocations.
/// Never throws: structural problems land in parse_errors with spans.
inline ScriptAst parse_script(std::string_view source, const ParserOptions& options = {}) {
    std::string clean = sanitize_utf8(source);
    detail::Parser parser(clean, options);
    return parser.parse();
}

struct NamedSpan {
    std::string name;
    Span span;
};

namespace detail {

inline void collect_commands(const std::vector<CommandInvocation>& cmds,
                             std::vector<NamedSpan>& out) {
    for (const CommandInvocation& c : cmds) {
        out.push_back({c.name, c.span});
        collect_commands(c.nested, out);
    }
}

}  // namespace detail

/// Every top-level and nested invocation name, once per occurrence, in source
/// order (depth-first). Rejects ASTs that carry structural parse errors.
inline std::vector<NamedSpan> extract_commands(const ScriptAst& ast) {
    if (!ast.parse_errors.empty())
        throw std::invalid_argument("extract_commands: AST has parse errors");
    std::vector<NamedSpan> out;
    detail::collect_commands(ast.commands, out);
    return out;
}

}  // namespace tclforge::tcl
