#include "focq/parser.hpp"

#include <cctype>

namespace focq {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '\'';
}

bool is_keyword(const std::string& s) {
  return s == "exists" || s == "forall" || s == "dist" || s == "true" || s == "false";
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.type = TokenType::Ident;
      t.text = std::string(text.substr(i, j - i));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      t.type = TokenType::Int;
      t.text = std::string(text.substr(i, j - i));
      i = j;
    } else {
      t.type = TokenType::Symbol;
      auto two = text.substr(i, 2);
      if (two == "<=" || two == ">=" || two == "->") {
        t.text = std::string(two);
        i += 2;
      } else if (std::string_view("()!|&.,#=+*-").find(c) != std::string_view::npos) {
        t.text = std::string(1, c);
        ++i;
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", i);
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = text.size();
  out.push_back(end);
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const ParseContext& ctx) : toks_(tokenize(text)), ctx_(ctx) {}

  Expr formula() {
    const Token& t = peek();
    if (t.type == TokenType::Ident) {
      if (t.text == "true") {
        ++pos_;
        return mk_true();
      }
      if (t.text == "false") {
        ++pos_;
        return mk_false();
      }
      if (t.text == "exists" || t.text == "forall") {
        bool all = t.text == "forall";
        ++pos_;
        Var v = var();
        expect(".");
        Expr body = formula();
        return all ? mk_forall(v, body) : mk_exists(v, body);
      }
      if (t.text == "dist") {
        ++pos_;
        expect("(");
        Var a = var();
        expect(",");
        Var b = var();
        expect(")");
        expect("<=");
        std::uint32_t d = small_int();
        return mk_dist(a, b, d);
      }
      if (peek(1).type == TokenType::Symbol && peek(1).text == "(") return application();
      if (peek(1).type == TokenType::Symbol && peek(1).text == "=") {
        Var a = var();
        expect("=");
        Var b = var();
        return mk_eq(a, b);
      }
      fail("expected '(' or '=' after identifier '" + t.text + "'");
    }
    if (is_symbol("!")) {
      ++pos_;
      return mk_not(formula());
    }
    if (is_symbol("(")) {
      std::size_t save = pos_;
      try {
        ++pos_;
        Expr a = formula();
        std::string op = peek().text;
        if (peek().type != TokenType::Symbol || (op != "|" && op != "&" && op != "->"))
          fail("expected '|', '&' or '->'");
        ++pos_;
        Expr b = formula();
        if (op == "->") {
          expect(")");
          return mk_implies(a, b);
        }
        // Same-operator chains associate to the left.
        Expr acc = op == "|" ? mk_or(a, b) : mk_and(a, b);
        while (is_symbol(op.c_str())) {
          ++pos_;
          Expr c = formula();
          acc = op == "|" ? mk_or(acc, c) : mk_and(acc, c);
        }
        expect(")");
        return acc;
      } catch (const ParseError& first) {
        pos_ = save;
        try {
          return threshold();
        } catch (const ParseError& second) {
          throw second.position() >= first.position() ? second : first;
        }
      }
    }
    if (is_symbol("#") || is_symbol("-") || peek().type == TokenType::Int) return threshold();
    fail("expected a formula");
  }

  Expr term() {
    const Token& t = peek();
    if (t.type == TokenType::Int) return mk_const(integer());
    if (is_symbol("-")) {
      ++pos_;
      if (peek().type != TokenType::Int) fail("expected an integer after '-'");
      return mk_const(-integer());
    }
    if (is_symbol("#")) {
      ++pos_;
      expect("(");
      std::vector<Var> vs;
      if (!is_symbol(")")) {
        vs.push_back(var());
        while (is_symbol(",")) {
          ++pos_;
          vs.push_back(var());
        }
      }
      expect(")");
      expect(".");
      Expr body = formula();
      return mk_count(std::move(vs), body);
    }
    if (is_symbol("(")) {
      ++pos_;
      Expr a = term();
      std::string op = peek().text;
      if (peek().type != TokenType::Symbol || (op != "+" && op != "*" && op != "-"))
        fail("expected '+', '*' or '-'");
      ++pos_;
      Expr b = term();
      expect(")");
      if (op == "+") return mk_add(a, b);
      if (op == "*") return mk_mul(a, b);
      return mk_add(a, mk_mul(mk_const(-1), b));
    }
    fail("expected a term");
  }

  Query query() {
    Query q;
    expect("(");
    if (!is_symbol(")")) {
      for (;;) {
        if (peek().type == TokenType::Ident) {
          if (!q.out_terms.empty()) fail("output variables must precede output terms");
          q.out_vars.push_back(var());
        } else {
          q.out_terms.push_back(term());
        }
        if (!is_symbol(",")) break;
        ++pos_;
      }
    }
    expect(")");
    expect(".");
    q.body = formula();
    return q;
  }

  void expect_end() {
    if (peek().type != TokenType::End) fail("unexpected trailing input '" + peek().text + "'");
  }

  std::size_t pos() const { return pos_; }
  void reset() { pos_ = 0; }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }

  bool is_symbol(const char* s) const {
    return peek().type == TokenType::Symbol && peek().text == s;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }

  void expect(const char* s) {
    if (!is_symbol(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }

  Var var() {
    const Token& t = peek();
    if (t.type != TokenType::Ident || is_keyword(t.text)) fail("expected a variable");
    ++pos_;
    return Var(t.text);
  }

  Int integer() {
    const Token& t = peek();
    if (t.type != TokenType::Int) fail("expected an integer");
    ++pos_;
    return Int(t.text);
  }

  std::uint32_t small_int() {
    Int v = integer();
    if (v > Int(1u << 30)) fail("distance bound too large");
    return static_cast<std::uint32_t>(v);
  }

  Expr threshold() {
    Expr t = term();
    expect(">=");
    Int one = integer();
    if (one != 1) fail("only 't >= 1' is supported as a threshold");
    return mk_geq1(t);
  }

  Expr application() {
    std::string name = peek().text;
    std::size_t at = peek().pos;
    if (is_keyword(name)) fail("keyword used as a name");
    ++pos_;
    expect("(");
    std::optional<int> rel_arity = ctx_.sig ? ctx_.sig->arity_of(name) : std::nullopt;
    if (!rel_arity && ctx_.infer) rel_arity = ctx_.infer->arity_of(name);
    const NumericPredicate* pred = ctx_.preds ? ctx_.preds->find(name) : nullptr;
    if (!rel_arity && pred) {
      std::vector<Expr> ts;
      ts.push_back(term());
      while (is_symbol(",")) {
        ++pos_;
        ts.push_back(term());
      }
      expect(")");
      if (static_cast<int>(ts.size()) != pred->arity)
        throw ParseError("predicate " + name + " expects " + std::to_string(pred->arity) +
                             " arguments",
                         at);
      return mk_pred(name, std::move(ts));
    }
    std::vector<Var> vs;
    if (!is_symbol(")")) {
      vs.push_back(var());
      while (is_symbol(",")) {
        ++pos_;
        vs.push_back(var());
      }
    }
    expect(")");
    int arity = static_cast<int>(vs.size());
    if (rel_arity) {
      arity = *rel_arity;
    } else {
      if (!ctx_.infer) throw ParseError("unknown relation or predicate '" + name + "'", at);
      ctx_.infer->add(name, arity);
    }
    if (arity != static_cast<int>(vs.size()))
      throw ParseError("relation " + name + " has arity " + std::to_string(arity), at);
    return mk_atom(name, std::move(vs));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseContext ctx_;
};

}  // namespace

Expr parse_expr(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  try {
    Expr f = p.formula();
    p.expect_end();
    return f;
  } catch (const ParseError& first) {
    Parser q(text, ctx);
    try {
      Expr t = q.term();
      q.expect_end();
      return t;
    } catch (const ParseError& second) {
      throw second.position() > first.position() ? second : first;
    }
  }
}

Query parse_query(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  Query q = p.query();
  p.expect_end();
  validate_query(q);
  return q;
}

std::variant<Expr, Query> parse(std::string_view text, const ParseContext& ctx) {
  auto toks = tokenize(text);
  if (toks[0].type == TokenType::Symbol && toks[0].text == "(") {
    // A query head is a parenthesized list followed by '.'.
    Parser p(text, ctx);
    try {
      Query q = p.query();
      p.expect_end();
      validate_query(q);
      return q;
    } catch (const ParseError&) {
    }
  }
  return parse_expr(text, ctx);
}

Expr parse_expr(std::string_view text, const Signature& sig, const PredicateRegistry& preds) {
  return parse_expr(text, ParseContext{&sig, &preds, nullptr});
}

std::variant<Expr, Query> parse(std::string_view text, const Signature& sig,
                                const PredicateRegistry& preds) {
  return parse(text, ParseContext{&sig, &preds, nullptr});
}

}  // namespace focq
