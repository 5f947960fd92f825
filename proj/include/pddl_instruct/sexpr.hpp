#pragma once

// Whitespace-insensitive s-expression reader that keeps source spans.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pddl_instruct/core.hpp"

namespace pddl_instruct {

struct SourceSpan {
  std::size_t start = 0;  // byte offsets, start <= end
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline std::string describe(const SourceSpan& span) {
  return "line " + std::to_string(span.line) + ", column " + std::to_string(span.column);
}

class ParseError : public Error {
 public:
  ParseError(std::string message, SourceSpan span = {}, std::string expected = {})
      : Error(describe(span) + ": " + message), message_(std::move(message)), span_(span),
        expected_(std::move(expected)) {}

  const std::string& message() const { return message_; }
  const SourceSpan& span() const { return span_; }
  /// Hint naming the token that would have been accepted; may be empty.
  const std::string& expected() const { return expected_; }

 private:
  std::string message_;
  SourceSpan span_;
  std::string expected_;
};

/// Valid syntax naming a PDDL feature outside STRIPS+typing.
class UnsupportedFeature : public ParseError {
 public:
  UnsupportedFeature(const std::string& feature, SourceSpan span = {})
      : ParseError("unsupported feature: " + feature, span), feature_(feature) {}

  const std::string& feature() const { return feature_; }

 private:
  std::string feature_;
};

struct SExpr {
  bool is_list = false;
  std::string token;  // lowercased; empty for lists
  std::vector<SExpr> items;
  SourceSpan span;

  bool is_token() const { return !is_list; }
  bool is_token(std::string_view t) const { return !is_list && token == t; }
  /// True for a list whose first element is the token `head`.
  bool has_head(std::string_view head) const {
    return is_list && !items.empty() && items.front().is_token(head);
  }
};

namespace detail {

class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_blank();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip_blank();
    }
    return out;
  }

 private:
  SourceSpan here() const { return SourceSpan{pos_, pos_, line_, column_}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    SExpr node;
    node.span = here();
    char c = text_[pos_];
    if (c == ')') throw ParseError("unexpected ')'", node.span, "expression");
    if (c == '(') {
      node.is_list = true;
      advance();
      skip_blank();
      while (pos_ < text_.size() && text_[pos_] != ')') {
        node.items.push_back(read());
        skip_blank();
      }
      if (pos_ >= text_.size()) throw ParseError("unterminated list", node.span, ")");
      advance();
    } else {
      std::size_t begin = pos_;
      while (pos_ < text_.size()) {
        char ch = text_[pos_];
        if (ch == '(' || ch == ')' || ch == ';' || ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' ||
            ch == '\f' || ch == '\v') {
          break;
        }
        advance();
      }
      node.token = to_lower(text_.substr(begin, pos_ - begin));
    }
    node.span.end = pos_;
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace detail

/// Reads every top-level expression; tokens are canonicalized to lowercase.
inline std::vector<SExpr> read_sexprs(std::string_view text) { return detail::SExprReader(text).read_all(); }

}  // namespace pddl_instruct
