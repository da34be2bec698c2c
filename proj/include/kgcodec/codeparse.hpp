#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "kgcodec/core.hpp"

namespace kgcodec {

enum class TokenKind {
    Ident,
    String,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Equals,
    Comment,
    Newline,
    Unknown,
    Eof,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::Eof;
    std::string text;     // for String: the unescaped value
    std::size_t offset = 0;  // byte offset of the first raw byte
    std::string raw;      // exact source bytes of the token
    std::string leading;  // whitespace (not newlines) preceding the token
};

struct TokenizerDiagnostic {
    std::size_t offset = 0;
    std::string message;
};

struct TokenizeResult {
    std::vector<Token> tokens;  // always ends with an Eof token
    std::vector<TokenizerDiagnostic> diagnostics;
};

TokenizeResult tokenize(std::string_view input);

// Reassembles the input from tokens; equals the original by construction.
std::string detokenize(const TokenizeResult& result);

enum class DiagnosticSeverity { Warning, Error };

struct ParseDiagnostic {
    DiagnosticSeverity severity = DiagnosticSeverity::Error;
    std::size_t offset = 0;
    std::string message;
};

struct ParseResult {
    std::vector<RelationTriple> triples;
    std::vector<ParseDiagnostic> diagnostics;
    std::size_t consumed_bytes = 0;
    std::size_t skipped_segments = 0;  // resync count; not serialized

    std::size_t error_count() const;
    std::size_t warning_count() const;
};

// Parses a model completion that continues "extract = Extract([".
// Recovers from malformed constructor calls by resyncing at the next
// top-level Triple; stops at the closing "]", EOF, or a line-initial
// "class" keyword.
ParseResult parse_completion(std::string_view completion, const Schema& schema);

// Removes exact duplicates, keeping first occurrences. Comparison uses
// normalized surfaces and ignores entity types.
std::vector<RelationTriple> dedupe_triples(const std::vector<RelationTriple>& triples);

// Truncates text at the earliest occurrence of any stop sequence.
std::string apply_stop_sequences(std::string_view text,
                                 const std::vector<std::string>& stops);

std::string parse_result_to_json(const ParseResult& result, bool pretty = false);

}  // namespace kgcodec
