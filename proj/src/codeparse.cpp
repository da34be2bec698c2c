#include "kgcodec/codeparse.hpp"

#include <set>
#include <tuple>

#include "json.hpp"

namespace kgcodec {

namespace {

bool is_ident_head(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_ident_rest(char c) {
    return is_ident_head(c) || (c >= '0' && c <= '9');
}

bool is_horizontal_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_known_token(char c) {
    return is_ident_head(c) || is_horizontal_space(c) || c == '\n' || c == '"' ||
           c == '\'' || c == '#' || c == '(' || c == ')' || c == '[' || c == ']' ||
           c == ',' || c == '=';
}

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::Ident: return "IDENT";
        case TokenKind::String: return "STRING";
        case TokenKind::LParen: return "LPAREN";
        case TokenKind::RParen: return "RPAREN";
        case TokenKind::LBracket: return "LBRACKET";
        case TokenKind::RBracket: return "RBRACKET";
        case TokenKind::Comma: return "COMMA";
        case TokenKind::Equals: return "EQUALS";
        case TokenKind::Comment: return "COMMENT";
        case TokenKind::Newline: return "NEWLINE";
        case TokenKind::Unknown: return "UNKNOWN";
        case TokenKind::Eof: return "EOF";
    }
    return "EOF";
}

TokenizeResult tokenize(std::string_view input) {
    TokenizeResult result;
    std::size_t i = 0;
    const std::size_t n = input.size();
    std::string leading;

    auto push = [&](TokenKind kind, std::size_t start, std::size_t end, std::string text) {
        Token tok;
        tok.kind = kind;
        tok.offset = start;
        tok.raw.assign(input.substr(start, end - start));
        tok.text = std::move(text);
        tok.leading = std::move(leading);
        leading.clear();
        result.tokens.push_back(std::move(tok));
    };

    while (i < n) {
        const char c = input[i];
        if (is_horizontal_space(c)) {
            leading += c;
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (c == '\n') {
            ++i;
            push(TokenKind::Newline, start, i, "\n");
        } else if (c == '#') {
            while (i < n && input[i] != '\n') ++i;
            push(TokenKind::Comment, start, i,
                 std::string(input.substr(start, i - start)));
        } else if (c == '"' || c == '\'') {
            const char delim = c;
            ++i;
            std::string value;
            bool closed = false;
            while (i < n && input[i] != '\n') {
                if (input[i] == '\\' && i + 1 < n &&
                    (input[i + 1] == delim || input[i + 1] == '\\')) {
                    value += input[i + 1];
                    i += 2;
                } else if (input[i] == delim) {
                    ++i;
                    closed = true;
                    break;
                } else {
                    value += input[i];
                    ++i;
                }
            }
            if (!closed)
                result.diagnostics.push_back({start, "unterminated string literal"});
            push(TokenKind::String, start, i, std::move(value));
        } else if (is_ident_head(c)) {
            while (i < n && is_ident_rest(input[i])) ++i;
            std::string text(input.substr(start, i - start));
            push(TokenKind::Ident, start, i, std::move(text));
        } else if (c == '(') {
            ++i;
            push(TokenKind::LParen, start, i, "(");
        } else if (c == ')') {
            ++i;
            push(TokenKind::RParen, start, i, ")");
        } else if (c == '[') {
            ++i;
            push(TokenKind::LBracket, start, i, "[");
        } else if (c == ']') {
            ++i;
            push(TokenKind::RBracket, start, i, "]");
        } else if (c == ',') {
            ++i;
            push(TokenKind::Comma, start, i, ",");
        } else if (c == '=') {
            ++i;
            push(TokenKind::Equals, start, i, "=");
        } else {
            while (i < n && !starts_known_token(input[i])) ++i;
            push(TokenKind::Unknown, start, i,
                 std::string(input.substr(start, i - start)));
        }
    }
    // EOF token carries any trailing whitespace as leading trivia.
    push(TokenKind::Eof, n, n, "");
    return result;
}

std::string detokenize(const TokenizeResult& result) {
    std::string out;
    for (const auto& tok : result.tokens) {
        out += tok.leading;
        out += tok.raw;
    }
    return out;
}

std::size_t ParseResult::error_count() const {
    std::size_t n = 0;
    for (const auto& d : diagnostics)
        if (d.severity == DiagnosticSeverity::Error) ++n;
    return n;
}

std::size_t ParseResult::warning_count() const {
    std::size_t n = 0;
    for (const auto& d : diagnostics)
        if (d.severity == DiagnosticSeverity::Warning) ++n;
    return n;
}

namespace {

class CompletionParser {
public:
    CompletionParser(std::string_view input, const Schema& schema)
        : input_size_(input.size()), schema_(schema) {
        auto tr = tokenize(input);
        tokens_ = std::move(tr.tokens);
        for (const auto& d : tr.diagnostics)
            result_.diagnostics.push_back(
                {DiagnosticSeverity::Warning, d.offset, d.message});
    }

    ParseResult run() {
        skip_prefix();
        while (true) {
            skip_trivia();
            const Token& tok = peek();
            if (tok.kind == TokenKind::Eof) {
                result_.consumed_bytes = input_size_;
                break;
            }
            if (tok.kind == TokenKind::RBracket) {
                result_.consumed_bytes = tok.offset + tok.raw.size();
                break;
            }
            if (at_line_start_class()) {
                result_.consumed_bytes = tok.offset;
                break;
            }
            if (tok.kind == TokenKind::Ident && tok.text == "Triple") {
                if (parse_triple()) {
                    expect_separator();
                } else if (!recover()) {
                    break;
                }
            } else {
                error(tok.offset, "expected Triple, found " +
                                      std::string(token_kind_name(tok.kind)));
                if (!recover()) break;
            }
        }
        return std::move(result_);
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t idx = pos_ + ahead;
        return idx < tokens_.size() ? tokens_[idx] : tokens_.back();
    }

    const Token& advance() {
        const Token& tok = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return tok;
    }

    bool is_trivia(const Token& tok) const {
        return tok.kind == TokenKind::Newline || tok.kind == TokenKind::Comment;
    }

    void skip_trivia() {
        while (is_trivia(peek())) advance();
    }

    bool at_line_start(const Token& tok) const {
        return tok.leading.empty() &&
               (tok.offset == 0 ||
                (pos_of(tok) > 0 && tokens_[pos_of(tok) - 1].kind == TokenKind::Newline));
    }

    std::size_t pos_of(const Token& tok) const {
        return static_cast<std::size_t>(&tok - tokens_.data());
    }

    bool at_line_start_class() const {
        const Token& tok = peek();
        return tok.kind == TokenKind::Ident && tok.text == "class" && at_line_start(tok);
    }

    void error(std::size_t offset, std::string message) {
        result_.diagnostics.push_back(
            {DiagnosticSeverity::Error, offset, std::move(message)});
    }

    void warn(std::size_t offset, std::string message) {
        result_.diagnostics.push_back(
            {DiagnosticSeverity::Warning, offset, std::move(message)});
    }

    // Everything before the first "Triple" identifier is preamble the model
    // repeated back; drop it without complaint. The scan never crosses a
    // stop point (list-closing bracket or line-initial class).
    void skip_prefix() {
        std::size_t i = pos_;
        while (i < tokens_.size()) {
            const Token& tok = tokens_[i];
            if (tok.kind == TokenKind::Eof) return;
            if (tok.kind == TokenKind::RBracket ||
                (tok.kind == TokenKind::Ident &&
                 (tok.text == "Triple" ||
                  (tok.text == "class" && tok.leading.empty() &&
                   (tok.offset == 0 || tokens_[i - 1].kind == TokenKind::Newline))))) {
                pos_ = i;
                return;
            }
            ++i;
        }
    }

    // Scans forward from the current position for a recovery point. Returns
    // false when parsing should stop entirely.
    bool recover() {
        ++result_.skipped_segments;
        std::size_t depth = 0;
        // If the error token itself is a Triple we must step past it or the
        // scan would immediately resync in place.
        if (peek().kind == TokenKind::Ident && peek().text == "Triple") advance();
        while (true) {
            const Token& tok = peek();
            switch (tok.kind) {
                case TokenKind::Eof:
                    result_.consumed_bytes = input_size_;
                    return false;
                case TokenKind::LParen:
                case TokenKind::LBracket:
                    ++depth;
                    advance();
                    break;
                case TokenKind::RParen:
                    if (depth > 0) --depth;
                    advance();
                    break;
                case TokenKind::RBracket:
                    if (depth == 0) {
                        result_.consumed_bytes = tok.offset + tok.raw.size();
                        return false;
                    }
                    --depth;
                    advance();
                    break;
                case TokenKind::Ident:
                    if (depth == 0 && tok.text == "Triple") return true;
                    if (tok.text == "class" && at_line_start(tok)) {
                        result_.consumed_bytes = tok.offset;
                        return false;
                    }
                    advance();
                    break;
                default:
                    advance();
                    break;
            }
        }
    }

    struct Ctor {
        std::string callee;
        std::string arg;
        std::size_t offset = 0;
    };

    bool parse_ctor(Ctor& out, const char* position_name) {
        skip_trivia();
        const Token& name = peek();
        if (name.kind != TokenKind::Ident) {
            error(name.offset, std::string("expected constructor for ") + position_name +
                                   ", found " + std::string(token_kind_name(name.kind)));
            return false;
        }
        out.callee = name.text;
        out.offset = name.offset;
        advance();
        skip_trivia();
        if (peek().kind != TokenKind::LParen) {
            error(peek().offset, "expected '(' after " + out.callee);
            return false;
        }
        advance();
        skip_trivia();
        const Token& arg = peek();
        if (arg.kind != TokenKind::String) {
            error(arg.offset, "expected string literal inside " + out.callee + "(...)");
            return false;
        }
        out.arg = arg.text;
        advance();
        skip_trivia();
        if (peek().kind != TokenKind::RParen) {
            error(peek().offset, "expected ')' to close " + out.callee + "(...)");
            return false;
        }
        advance();
        return true;
    }

    bool expect_comma(const char* after) {
        skip_trivia();
        if (peek().kind != TokenKind::Comma) {
            error(peek().offset, std::string("expected ',' after ") + after);
            return false;
        }
        advance();
        return true;
    }

    bool parse_triple() {
        const Token& kw = advance();  // Triple
        skip_trivia();
        if (peek().kind != TokenKind::LParen) {
            error(peek().offset, "expected '(' after Triple");
            return false;
        }
        advance();

        Ctor head, rel, tail;
        if (!parse_ctor(head, "the head entity")) return false;
        if (!expect_comma("the head entity")) return false;
        if (!parse_ctor(rel, "the relation")) return false;
        if (!expect_comma("the relation")) return false;
        if (!parse_ctor(tail, "the tail entity")) return false;
        skip_trivia();
        if (peek().kind != TokenKind::RParen) {
            error(peek().offset, "expected ')' to close Triple(...)");
            return false;
        }
        advance();

        RelationTriple triple;
        triple.head = resolve_entity(head);
        triple.tail = resolve_entity(tail);
        triple.relation = resolve_relation(rel);

        const std::string head_text = normalize_surface(triple.head.text);
        const std::string tail_text = normalize_surface(triple.tail.text);
        if (head_text.empty() || triple.relation.empty() || tail_text.empty()) {
            error(kw.offset, "triple with empty head, relation, or tail dropped");
            return true;  // structurally fine; no resync needed
        }
        result_.triples.push_back(std::move(triple));
        return true;
    }

    EntityMention resolve_entity(const Ctor& ctor) {
        EntityMention m;
        m.text = ctor.arg;
        if (const EntityType* et = schema_.find_entity_by_code(ctor.callee)) {
            m.etype = et->id;
        } else {
            m.etype = kUnknownEntityType;
            warn(ctor.offset, "unknown entity class '" + ctor.callee + "'");
        }
        return m;
    }

    std::string resolve_relation(const Ctor& ctor) {
        const std::string arg = normalize_surface(ctor.arg);
        if (ctor.callee == "Rel") return arg;
        if (const RelationType* rt = schema_.find_relation_by_code(ctor.callee)) {
            if (arg.empty()) return rt->surface;
            return arg;
        }
        warn(ctor.offset, "unknown relation class '" + ctor.callee + "'");
        return arg;
    }

    // After a triple (or failed triple already recovered elsewhere) the list
    // continues with a comma and/or newline before the next element.
    void expect_separator() {
        bool seen = false;
        while (true) {
            const Token& tok = peek();
            if (tok.kind == TokenKind::Comma || is_trivia(tok)) {
                seen = true;
                advance();
                continue;
            }
            break;
        }
        const Token& tok = peek();
        if (!seen && tok.kind != TokenKind::RBracket && tok.kind != TokenKind::Eof)
            error(tok.offset, "expected ',' or newline between list elements");
    }

    std::size_t input_size_;
    const Schema& schema_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    ParseResult result_;
};

}  // namespace

ParseResult parse_completion(std::string_view completion, const Schema& schema) {
    return CompletionParser(completion, schema).run();
}

std::vector<RelationTriple> dedupe_triples(const std::vector<RelationTriple>& triples) {
    std::vector<RelationTriple> out;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (const auto& t : triples) {
        const RelationTriple n = normalized_triple(t);
        if (seen.insert({n.head.text, n.relation, n.tail.text}).second)
            out.push_back(t);
    }
    return out;
}

std::string apply_stop_sequences(std::string_view text,
                                 const std::vector<std::string>& stops) {
    std::size_t cut = text.size();
    for (const auto& stop : stops) {
        if (stop.empty()) continue;
        const std::size_t at = text.find(stop);
        if (at != std::string_view::npos && at < cut) cut = at;
    }
    return std::string(text.substr(0, cut));
}

std::string parse_result_to_json(const ParseResult& result, bool pretty) {
    nlohmann::json j;
    j["triples"] = nlohmann::json::array();
    for (const auto& t : result.triples) {
        j["triples"].push_back({
            {"head", {{"text", t.head.text}, {"type", t.head.etype}}},
            {"relation", t.relation},
            {"tail", {{"text", t.tail.text}, {"type", t.tail.etype}}},
        });
    }
    j["diagnostics"] = nlohmann::json::array();
    for (const auto& d : result.diagnostics) {
        j["diagnostics"].push_back({
            {"severity", d.severity == DiagnosticSeverity::Error ? "error" : "warning"},
            {"offset", d.offset},
            {"message", d.message},
        });
    }
    j["consumed_bytes"] = result.consumed_bytes;
    return pretty ? j.dump(2) : j.dump();
}

}  // namespace kgcodec
