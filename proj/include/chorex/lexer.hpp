#pragma once

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chorex/ast.hpp"

namespace chorex {

struct ParseError : std::runtime_error {
    SourceSpan span;
    std::string hint;
    ParseError(std::string msg, SourceSpan sp, std::string h = {})
        : std::runtime_error(std::move(msg)), span(sp), hint(std::move(h)) {}
};

struct Token {
    enum class Kind {
        Ident,   // identifiers and keywords (text distinguishes)
        Int,
        String,
        AtomLit, // :name
        Punct,   // one of ( ) [ ] { } , . : @ ^ _
        Op,      // ~> <- <> <= >= == != < > + - * /
        Newline,
        End,
    };
    Kind kind = Kind::End;
    std::string text;
    std::int64_t int_value = 0;
    SourceSpan span;

    bool is(Kind k) const { return kind == k; }
    bool is_ident(const char* s) const { return kind == Kind::Ident && text == s; }
    bool is_punct(const char* s) const { return kind == Kind::Punct && text == s; }
    bool is_op(const char* s) const { return kind == Kind::Op && text == s; }
};

namespace detail {

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Newlines are statement separators except after tokens that clearly
// continue onto the next line, and inside unclosed brackets.
inline bool suppresses_newline(const Token& t) {
    if (t.kind == Token::Kind::Op) return true;
    if (t.kind == Token::Kind::Punct)
        return t.text == "," || t.text == "(" || t.text == "[" || t.text == "{" || t.text == "." ||
               t.text == ":" || t.text == "@" || t.text == "^";
    if (t.kind == Token::Kind::Ident) return t.text == "rem";
    return false;
}

} // namespace detail

class Lexer {
public:
    explicit Lexer(std::string source, std::string file = "<input>")
        : src_(std::move(source)), file_(std::move(file)) {}

    std::vector<Token> tokens() {
        std::vector<Token> out;
        int depth = 0;
        while (true) {
            Token t = next();
            if (t.kind == Token::Kind::Punct) {
                if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                if (t.text == ")" || t.text == "]" || t.text == "}") depth = depth > 0 ? depth - 1 : 0;
            }
            if (t.kind == Token::Kind::Newline) {
                if (depth > 0) continue;
                if (out.empty() || out.back().kind == Token::Kind::Newline) continue;
                if (detail::suppresses_newline(out.back())) continue;
            }
            bool done = t.kind == Token::Kind::End;
            out.push_back(std::move(t));
            if (done) break;
        }
        return out;
    }

    std::vector<std::string> source_lines() const {
        std::vector<std::string> lines;
        std::string cur;
        for (char c : src_) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        lines.push_back(cur);
        return lines;
    }

private:
    std::string src_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    char peek(size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    SourceSpan here(int len = 1) const { return SourceSpan{line_, col_, len}; }

    Token make(Token::Kind k, std::string text, SourceSpan sp) {
        Token t;
        t.kind = k;
        t.text = std::move(text);
        t.span = sp;
        t.span.length = static_cast<int>(t.text.size());
        return t;
    }

    Token next() {
        // skip spaces and comments
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '#') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else {
                break;
            }
        }
        if (pos_ >= src_.size()) return make(Token::Kind::End, "", here(0));

        SourceSpan sp = here();
        char c = peek();

        if (c == '\n') {
            advance();
            return make(Token::Kind::Newline, "\\n", sp);
        }

        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
            Token t = make(Token::Kind::Int, num, sp);
            t.int_value = std::stoll(num);
            return t;
        }

        if (detail::ident_start(c)) {
            std::string id;
            while (detail::ident_char(peek())) id += advance();
            if (peek() == '?' || peek() == '!') id += advance();
            return make(Token::Kind::Ident, id, sp);
        }

        if (c == '"') {
            advance();
            std::string s;
            while (true) {
                if (pos_ >= src_.size() || peek() == '\n')
                    throw ParseError("unterminated string literal", sp);
                char d = advance();
                if (d == '"') break;
                if (d == '\\') {
                    char e = advance();
                    switch (e) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    default: throw ParseError(std::string("unknown escape \\") + e, sp);
                    }
                } else {
                    s += d;
                }
            }
            Token t = make(Token::Kind::String, s, sp);
            t.span.length = static_cast<int>(s.size()) + 2;
            return t;
        }

        if (c == ':' && detail::ident_start(peek(1))) {
            advance();
            std::string id;
            while (detail::ident_char(peek())) id += advance();
            if (peek() == '?' || peek() == '!') id += advance();
            Token t = make(Token::Kind::AtomLit, id, sp);
            t.span.length = static_cast<int>(id.size()) + 1;
            return t;
        }

        auto two = [&](const char* s) { return peek() == s[0] && peek(1) == s[1]; };
        static const char* two_ops[] = {"~>", "<-", "<>", "<=", ">=", "==", "!="};
        for (const char* op : two_ops) {
            if (two(op)) {
                advance();
                advance();
                return make(Token::Kind::Op, op, sp);
            }
        }

        switch (c) {
        case '<': case '>': case '+': case '-': case '*': case '/':
            advance();
            return make(Token::Kind::Op, std::string(1, c), sp);
        case '(': case ')': case '[': case ']': case '{': case '}':
        case ',': case '.': case ':': case '@': case '^':
            advance();
            return make(Token::Kind::Punct, std::string(1, c), sp);
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", sp);
        }
    }
};

} // namespace chorex
