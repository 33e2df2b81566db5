#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "focq/expr.hpp"
#include "focq/predicates.hpp"
#include "focq/structure.hpp"

namespace focq {

class ParseError : public InputError {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : InputError(msg + " at offset " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

enum class TokenType { Ident, Int, Symbol, End };

struct Token {
  TokenType type = TokenType::End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view text);

// Resolution context. When `infer` is set, unknown relation names are added
// to it with the arity of their first use instead of being rejected.
struct ParseContext {
  const Signature* sig = nullptr;
  const PredicateRegistry* preds = nullptr;
  Signature* infer = nullptr;
};

Expr parse_expr(std::string_view text, const ParseContext& ctx);
Query parse_query(std::string_view text, const ParseContext& ctx);
std::variant<Expr, Query> parse(std::string_view text, const ParseContext& ctx);

// Convenience overloads with a fixed signature.
Expr parse_expr(std::string_view text, const Signature& sig, const PredicateRegistry& preds);
std::variant<Expr, Query> parse(std::string_view text, const Signature& sig,
                                const PredicateRegistry& preds);

}  // namespace focq
