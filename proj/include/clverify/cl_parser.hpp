#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "clverify/cl.hpp"

namespace clv {

struct ParseIssue {
  int line = 0, col = 0;
  std::string message;
};

struct ParseError : std::runtime_error {
  std::vector<ParseIssue> issues;
  explicit ParseError(std::vector<ParseIssue> is)
      : std::runtime_error(render(is)), issues(std::move(is)) {}
  static std::string render(const std::vector<ParseIssue>& is) {
    std::string s;
    for (auto& i : is)
      s += std::to_string(i.line) + ":" + std::to_string(i.col) + ": " + i.message + "\n";
    if (!s.empty()) s.pop_back();
    return s;
  }
};

namespace detail {

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> d(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) d[j] = (int)j;
  for (size_t i = 1; i <= a.size(); ++i) {
    int prev = d[0];
    d[0] = (int)i;
    for (size_t j = 1; j <= b.size(); ++j) {
      int cur = d[j];
      d[j] = std::min({d[j] + 1, d[j - 1] + 1, prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
      prev = cur;
    }
  }
  return d[b.size()];
}

struct Token {
  enum Kind { Ident, Sym, End } kind = End;
  std::string text;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  explicit Lexer(const std::string& s) : src(s) {}

  void advance(size_t n) {
    for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') { ++line; col = 1; } else ++col;
    }
  }
  void skip_ws() {
    for (;;) {
      while (pos < src.size() && isspace((unsigned char)src[pos])) advance(1);
      if (pos < src.size() && src[pos] == '#') {
        while (pos < src.size() && src[pos] != '\n') advance(1);
        continue;
      }
      break;
    }
  }
  Token next() {
    skip_ws();
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) return t;
    char c = src[pos];
    if (isalpha((unsigned char)c) || c == '_') {
      size_t start = pos;
      while (pos < src.size() && (isalnum((unsigned char)src[pos]) || src[pos] == '_')) advance(1);
      t.kind = Token::Ident;
      t.text = src.substr(start, pos - start);
      return t;
    }
    t.kind = Token::Sym;
    if (src.compare(pos, 2, "<=") == 0 || src.compare(pos, 2, "->") == 0) {
      t.text = src.substr(pos, 2);
      advance(2);
      return t;
    }
    t.text = std::string(1, c);
    advance(1);
    return t;
  }
};

struct Parser {
  Lexer lex;
  Token tok;
  std::vector<ParseIssue> issues;
  explicit Parser(const std::string& s) : lex(s) { tok = lex.next(); }

  [[noreturn]] void fail(const std::string& msg) {
    issues.push_back({tok.line, tok.col, msg});
    throw ParseError(issues);
  }
  void bump() { tok = lex.next(); }
  bool at_sym(const std::string& s) const { return tok.kind == Token::Sym && tok.text == s; }
  bool at_kw(const std::string& s) const { return tok.kind == Token::Ident && tok.text == s; }
  void expect_sym(const std::string& s) {
    if (!at_sym(s)) fail("expected '" + s + "', found '" + tok.text + "'");
    bump();
  }
  std::string expect_ident(const std::string& what) {
    if (tok.kind != Token::Ident) fail("expected " + what + ", found '" + tok.text + "'");
    std::string s = tok.text;
    bump();
    return s;
  }

  std::vector<std::string> ident_list() {
    std::vector<std::string> out;
    out.push_back(expect_ident("identifier"));
    while (at_sym(",")) {
      bump();
      out.push_back(expect_ident("identifier"));
    }
    return out;
  }

  ComponentType parse_component() {
    bump();  // 'component'
    ComponentType c;
    c.name = expect_ident("component type name");
    expect_sym("{");
    if (!at_kw("ports")) fail("expected 'ports'");
    bump();
    expect_sym(":");
    c.ports = ident_list();
    expect_sym(";");
    if (!at_kw("states")) fail("expected 'states'");
    bump();
    expect_sym(":");
    c.states = ident_list();
    expect_sym(";");
    while (!at_sym("}")) {
      ComponentType::Transition t;
      t.from = expect_ident("state");
      expect_sym("-");
      t.port = expect_ident("port");
      expect_sym("->");
      t.to = expect_ident("state");
      expect_sym(";");
      c.transitions.push_back(t);
    }
    bump();  // '}'
    return c;
  }

  InteractionType parse_interaction() {
    bump();  // 'interaction'
    InteractionType it;
    it.name = expect_ident("interaction type name");
    expect_sym("=");
    expect_sym("(");
    for (;;) {
      std::string ct = expect_ident("component type");
      expect_sym(".");
      std::string p = expect_ident("port");
      it.ports.push_back({ct, p});
      if (at_sym(",")) { bump(); continue; }
      break;
    }
    expect_sym(")");
    expect_sym(";");
    return it;
  }

  ClFormula parse_factor() {
    if (at_kw("emp")) {
      bump();
      return ClFormula::emp();
    }
    if (at_sym("(")) {
      bump();
      ClFormula f = parse_formula();
      expect_sym(")");
      return f;
    }
    std::string name = expect_ident("atom");
    std::optional<std::string> state;
    if (at_sym("@")) {
      bump();
      state = expect_ident("state");
    }
    expect_sym("(");
    std::vector<std::string> args;
    if (!at_sym(")")) args = ident_list();
    expect_sym(")");
    // resolved later: parked as a predicate atom, state recorded via a marker
    ClFormula f = ClFormula::predicate(name, args);
    if (state) f.state = state;
    return f;
  }

  ClFormula parse_star() {
    ClFormula f = parse_factor();
    while (at_sym("*")) {
      bump();
      f = ClFormula::star(std::move(f), parse_factor());
    }
    return f;
  }

  ClFormula parse_formula() {
    if (at_kw("exists")) {
      bump();
      std::vector<std::string> binders;
      while (tok.kind == Token::Ident && tok.text != "emp" && tok.text != "exists")
        binders.push_back(expect_ident("bound variable"));
      if (binders.empty()) fail("'exists' with no bound variables");
      expect_sym(".");
      ClFormula body = parse_star();
      for (auto it = binders.rbegin(); it != binders.rend(); ++it)
        body = ClFormula::exists(*it, std::move(body));
      return body;
    }
    return parse_star();
  }

  Rule parse_rule() {
    Rule r;
    r.pos = {tok.line, tok.col};
    r.head = expect_ident("predicate name");
    expect_sym("(");
    if (!at_sym(")")) r.params = ident_list();
    expect_sym(")");
    expect_sym("<=");
    r.body = parse_formula();
    expect_sym(";");
    return r;
  }
};

// makes bound variable names unique within a rule body (alpha-renaming)
inline void alpha_rename(ClFormula& f, std::set<std::string>& taken, int& counter) {
  switch (f.kind) {
    case ClKind::Exists: {
      if (taken.count(f.name)) {
        std::string fresh;
        do {
          fresh = f.name + "_" + std::to_string(++counter);
        } while (taken.count(fresh));
        substitute(f.kids[0], {{f.name, fresh}});
        f.name = fresh;
      }
      taken.insert(f.name);
      alpha_rename(f.kids[0], taken, counter);
      break;
    }
    case ClKind::Star:
      alpha_rename(f.kids[0], taken, counter);
      alpha_rename(f.kids[1], taken, counter);
      break;
    default: break;
  }
}

}  // namespace detail

inline Spec parse_spec(const std::string& text) {
  detail::Parser p(text);
  Spec sp;
  while (p.tok.kind != detail::Token::End) {
    if (p.at_kw("component"))
      sp.signature.components.push_back(p.parse_component());
    else if (p.at_kw("interaction"))
      sp.signature.interactions.push_back(p.parse_interaction());
    else if (p.tok.kind == detail::Token::Ident)
      sp.sid.rules.push_back(p.parse_rule());
    else
      p.fail("expected declaration or rule, found '" + p.tok.text + "'");
  }

  std::vector<ParseIssue> issues;
  auto sigrep = validate_signature(sp.signature);
  for (auto& i : sigrep.issues) issues.push_back({0, 0, i.where + ": " + i.message});

  // predicate arities from rule heads
  for (auto& r : sp.sid.rules) {
    auto it = sp.predicate_arity.find(r.head);
    if (it == sp.predicate_arity.end())
      sp.predicate_arity[r.head] = (int)r.params.size();
    else if (it->second != (int)r.params.size())
      issues.push_back({r.pos.line, r.pos.col,
                        "predicate '" + r.head + "' declared with conflicting arities"});
    if (sp.signature.component(r.head) || sp.signature.interaction(r.head))
      issues.push_back({r.pos.line, r.pos.col,
                        "rule head '" + r.head + "' clashes with a signature declaration"});
  }

  std::vector<std::string> known;
  for (auto& c : sp.signature.components) known.push_back(c.name);
  for (auto& i : sp.signature.interactions) known.push_back(i.name);
  for (auto& [n, a] : sp.predicate_arity) known.push_back(n);
  auto nearest = [&](const std::string& n) -> std::string {
    std::string best;
    int bd = 1 << 30;
    for (auto& k : known) {
      int d = detail::edit_distance(n, k);
      if (d < bd) { bd = d; best = k; }
    }
    return best.empty() ? "" : " (nearest declaration: '" + best + "')";
  };

  // resolve atoms: component vs interaction vs predicate, by name lookup
  auto resolve = [&](ClFormula& f, const Rule& r, auto&& self) -> void {
    switch (f.kind) {
      case ClKind::Predicate: {
        if (const ComponentType* c = sp.signature.component(f.name)) {
          if (f.vars.size() != 1)
            issues.push_back({r.pos.line, r.pos.col,
                              "component atom '" + f.name + "' takes exactly one variable"});
          if (f.state && !c->has_state(*f.state))
            issues.push_back({r.pos.line, r.pos.col,
                              "component type '" + f.name + "' has no state '" + *f.state + "'"});
          f.kind = ClKind::Component;
        } else if (const InteractionType* it = sp.signature.interaction(f.name)) {
          if (f.state)
            issues.push_back({r.pos.line, r.pos.col,
                              "interaction atom '" + f.name + "' cannot carry a state"});
          if (f.vars.size() != it->arity())
            issues.push_back({r.pos.line, r.pos.col,
                              "interaction '" + f.name + "' expects " +
                                  std::to_string(it->arity()) + " arguments"});
          f.kind = ClKind::Interaction;
        } else if (auto pa = sp.predicate_arity.find(f.name); pa != sp.predicate_arity.end()) {
          if (f.state)
            issues.push_back({r.pos.line, r.pos.col,
                              "predicate atom '" + f.name + "' cannot carry a state"});
          if ((int)f.vars.size() != pa->second)
            issues.push_back({r.pos.line, r.pos.col,
                              "predicate '" + f.name + "' expects " +
                                  std::to_string(pa->second) + " arguments"});
        } else {
          issues.push_back({r.pos.line, r.pos.col,
                            "unknown identifier '" + f.name + "'" + nearest(f.name)});
        }
        break;
      }
      case ClKind::Star:
        self(f.kids[0], r, self);
        self(f.kids[1], r, self);
        break;
      case ClKind::Exists:
        self(f.kids[0], r, self);
        break;
      default: break;
    }
  };

  for (auto& r : sp.sid.rules) {
    resolve(r.body, r, resolve);
    std::set<std::string> taken(r.params.begin(), r.params.end());
    int counter = 0;
    detail::alpha_rename(r.body, taken, counter);
    std::set<std::string> ps(r.params.begin(), r.params.end());
    if (free_vars(r.body) != ps)
      issues.push_back({r.pos.line, r.pos.col,
                        "free variables of rule body must be exactly the head parameters"});
  }

  if (!issues.empty()) throw ParseError(issues);

  for (auto& [n, a] : sp.predicate_arity)
    if (a == 0) sp.named_sentences[n] = ClFormula::predicate(n, {});
  return sp;
}

}  // namespace clv
