#pragma once

#include <sstream>

#include "clverify/cl_parser.hpp"

namespace clv {

// ---------------------------------------------------------------------------
// Post-Turing programs: 1: stmt; 2: stmt; ... with statements
// write 0 | write 1 | go right | go left | goto step j if read 0|1 | stop

struct PtProgram {
  enum Kind { Write0, Write1, GoRight, GoLeft, GotoIfRead0, GotoIfRead1, Stop };
  struct Stmt {
    Kind kind;
    int target = 0;  // goto target, 1-based
  };
  std::vector<Stmt> statements;
};

struct PtParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WordTooShort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline PtProgram parse_pt_program(const std::string& text) {
  PtProgram p;
  std::string norm = text;
  for (auto& c : norm)
    if (c == ';') c = '\n';
  std::istringstream in(norm);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok.back() == ':') tok.pop_back();
    int idx;
    try {
      idx = std::stoi(tok);
    } catch (...) {
      throw PtParseError("line " + std::to_string(lineno) + ": expected a statement index");
    }
    std::string rest;
    std::getline(ls, rest);
    size_t colon = rest.find(':');
    if (colon != std::string::npos && rest.substr(0, colon).find_first_not_of(" \t") == std::string::npos)
      rest = rest.substr(colon + 1);
    std::istringstream ws(rest);
    std::vector<std::string> words;
    while (ws >> tok) words.push_back(tok);
    if ((int)p.statements.size() + 1 != idx)
      throw PtParseError("line " + std::to_string(lineno) + ": statement indices must be 1,2,...");
    PtProgram::Stmt s{};
    auto is = [&](std::initializer_list<const char*> want) {
      if (words.size() != want.size()) return false;
      size_t i = 0;
      for (auto* w : want)
        if (words[i++] != w) return false;
      return true;
    };
    if (is({"write", "0"})) s.kind = PtProgram::Write0;
    else if (is({"write", "1"})) s.kind = PtProgram::Write1;
    else if (is({"go", "right"})) s.kind = PtProgram::GoRight;
    else if (is({"go", "left"})) s.kind = PtProgram::GoLeft;
    else if (is({"stop"})) s.kind = PtProgram::Stop;
    else if (words.size() == 6 && words[0] == "goto" && words[1] == "step" && words[3] == "if" &&
             words[4] == "read" && (words[5] == "0" || words[5] == "1")) {
      s.kind = words[5] == "0" ? PtProgram::GotoIfRead0 : PtProgram::GotoIfRead1;
      try {
        s.target = std::stoi(words[2]);
      } catch (...) {
        throw PtParseError("line " + std::to_string(lineno) + ": bad goto target");
      }
    } else {
      throw PtParseError("line " + std::to_string(lineno) + ": unknown statement");
    }
    p.statements.push_back(s);
  }
  if (p.statements.empty()) throw PtParseError("empty program");
  for (auto& s : p.statements)
    if ((s.kind == PtProgram::GotoIfRead0 || s.kind == PtProgram::GotoIfRead1) &&
        (s.target < 1 || s.target > (int)p.statements.size()))
      throw PtParseError("goto target " + std::to_string(s.target) + " out of range");
  return p;
}

// ---------------------------------------------------------------------------
// The signature: one component type CPT and ten interaction types. The port
// inventory is reconstructed from the behavior table's in/out naming; it is
// kept in this single table for easy correction.
//
//   interaction  arity  tuple (position 1 first)      flow
//   write0..1    2      (<c>_o, <c>_i)                command, left to right
//   right, left  2      (<c>_o, <c>_i)                command, left to right
//   read         2      (read_o, read_i)              command, left to right
//   read0..1     2      (<c>_i, <c>_o)                answer, right to left
//   rightb,leftb 2      (<c>_o, <c>_i)                head handoff, see table
//   err          1      (err_o)                       local self-loop

namespace ptdetail {

inline const std::vector<std::string>& binary_interactions() {
  static const std::vector<std::string> v{"write0", "write1", "right", "left", "read",
                                          "read0",  "read1",  "rightb", "leftb"};
  return v;
}
// commands a tape cell forwards while the head is elsewhere
inline const std::vector<std::string>& forwardable() {
  static const std::vector<std::string> v{"write0", "write1", "right", "left",
                                          "read",   "read0",  "read1"};
  return v;
}
inline bool answer_interaction(const std::string& name) {
  return name == "read0" || name == "read1";
}

}  // namespace ptdetail

inline Signature encode_behavior(const PtProgram& p) {
  using ptdetail::binary_interactions;
  Signature sig;
  ComponentType c;
  c.name = "CPT";
  for (auto& b : binary_interactions()) {
    c.ports.push_back(b + "_o");
    c.ports.push_back(b + "_i");
  }
  c.ports.push_back("err_o");

  int m = (int)p.statements.size();
  auto ctrl = [&](int i) { return "c" + std::to_string(i); };
  auto ctrlw = [&](int i) { return "c" + std::to_string(i) + "w"; };
  for (int i = 1; i <= m + 1; ++i) {
    c.states.push_back(ctrl(i));
    c.states.push_back(ctrlw(i));
  }
  auto tb = [&](int g) { return "t" + std::to_string(g) + "b"; };
  auto th = [&](int g) { return "t" + std::to_string(g) + "h"; };
  for (int g = 0; g <= 1; ++g) {
    c.states.push_back(tb(g));
    c.states.push_back(th(g));
    for (auto& a : ptdetail::forwardable()) c.states.push_back(tb(g) + "_" + a);
    c.states.push_back(th(g) + "_read");
    c.states.push_back(th(g) + "_right");
  }
  c.states.push_back("idle");
  c.states.push_back("busy");

  auto add = [&](const std::string& from, const std::string& port, const std::string& to) {
    c.transitions.push_back({from, port, to});
  };

  // control machine, one row per statement
  for (int i = 1; i <= m; ++i) {
    const auto& s = p.statements[i - 1];
    switch (s.kind) {
      case PtProgram::Write0: add(ctrl(i), "write0_o", ctrl(i + 1)); break;
      case PtProgram::Write1: add(ctrl(i), "write1_o", ctrl(i + 1)); break;
      case PtProgram::GoRight: add(ctrl(i), "right_o", ctrl(i + 1)); break;
      case PtProgram::GoLeft:
        add(ctrl(i), "left_o", ctrl(i + 1));
        add(ctrl(i), "leftb_o", ctrlw(i));
        add(ctrlw(i), "err_o", ctrlw(i));
        break;
      case PtProgram::GotoIfRead0:
        add(ctrl(i), "read_o", ctrlw(i));
        add(ctrlw(i), "read0_i", ctrl(s.target));
        add(ctrlw(i), "read1_i", ctrl(i + 1));
        break;
      case PtProgram::GotoIfRead1:
        add(ctrl(i), "read_o", ctrlw(i));
        add(ctrlw(i), "read1_i", ctrl(s.target));
        add(ctrlw(i), "read0_i", ctrl(i + 1));
        break;
      case PtProgram::Stop: break;  // no outgoing transition
    }
  }

  // tape machine
  for (int g = 0; g <= 1; ++g) {
    for (auto& a : ptdetail::forwardable()) {
      add(tb(g), a + "_i", tb(g) + "_" + a);
      add(tb(g) + "_" + a, a + "_o", tb(g));
    }
    add(tb(g), "rightb_i", th(g));
    add(tb(g) + "_left", "leftb_o", th(g));
    add(th(g), "write0_i", th(0));
    add(th(g), "write1_i", th(1));
    add(th(g), "read_i", th(g) + "_read");
    add(th(g) + "_read", (g ? "read1_o" : "read0_o"), th(g));
    add(th(g), "right_i", th(g) + "_right");
    add(th(g) + "_right", "rightb_o", tb(g));
    add(th(g), "leftb_i", tb(g));
  }

  // sink machine
  add("idle", "rightb_i", "busy");
  add("busy", "err_o", "busy");

  sig.components.push_back(std::move(c));
  for (auto& b : binary_interactions()) {
    InteractionType it;
    it.name = b;
    if (ptdetail::answer_interaction(b))
      it.ports = {{"CPT", b + "_i"}, {"CPT", b + "_o"}};
    else
      it.ports = {{"CPT", b + "_o"}, {"CPT", b + "_i"}};
    sig.interactions.push_back(it);
  }
  sig.interactions.push_back({"err", {{"CPT", "err_o"}}});
  return sig;
}

// ---------------------------------------------------------------------------
// The initial-configuration SID: control + left zero padding + word (head on
// its first letter) + right zero padding + sink, in a chain. The paper's
// Word/Init rules carry several component atoms; they are split here into
// one-cell rules so the result is in the rule normal form.

struct PtEncoding {
  std::string spec_text;
  std::string sentence;             // name of the sentence predicate
  int suggested_max_nodes = 0;      // covers the requested zero padding
  std::vector<std::string> warnings;
};

inline PtEncoding encode_init(const PtProgram& p, const std::string& word, int padding = 1) {
  if (word.size() < 2) throw WordTooShort("tape word must have at least 2 letters");
  for (char ch : word)
    if (ch != '0' && ch != '1') throw PtParseError("tape word must be over {0,1}");
  if (padding < 1) padding = 1;

  PtEncoding out;
  out.sentence = "PhiW";
  int n = (int)word.size();
  out.suggested_max_nodes = 4 + n + 2 * padding;

  // reach-variant convenience: a unique stop statement, last in the program
  int stops = 0;
  for (auto& s : p.statements)
    if (s.kind == PtProgram::Stop) ++stops;
  if (stops != 1 || p.statements.back().kind != PtProgram::Stop)
    out.warnings.push_back(
        "the reach encoding assumes a unique 'stop' statement occurring last; "
        "this program does not satisfy that");

  Signature sig = encode_behavior(p);
  Spec sp;
  sp.signature = sig;

  std::ostringstream os;
  os << "# component system simulating a Post-Turing machine on tape word " << word << "\n";
  os << print_spec(Spec{sig, {}, {}, {}});

  auto unary = [&](const std::string& x) { return "err(" + x + ")"; };
  auto binary = [&](const std::string& x, const std::string& z) {
    std::string s;
    for (auto& b : ptdetail::binary_interactions())
      s += " * " + b + "(" + x + ", " + z + ")";
    return s;
  };

  os << "PhiW()       <= exists x y . InitW(x, y);\n";
  os << "InitW(x, y)  <= exists z1 z2 . CPT@c1(x) * " << unary("x") << binary("x", "z1")
     << " * Tape(z1, z2)" << binary("z2", "y") << " * Sink(y);\n";
  os << "Tape(x, y)   <= exists z1 w1 z2 w2 . Zeroes(x, z1)" << binary("z1", "w1")
     << " * Word1(w1, w2)" << binary("w2", "z2") << " * Zeroes(z2, y);\n";
  os << "Zeroes(x, x) <= CPT@t0b(x) * " << unary("x") << ";\n";
  os << "Zeroes(x, y) <= exists z . CPT@t0b(x) * " << unary("x") << binary("x", "z")
     << " * Zeroes(z, y);\n";
  for (int i = 1; i <= n; ++i) {
    std::string state = std::string("t") + word[i - 1] + (i == 1 ? "h" : "b");
    if (i < n)
      os << "Word" << i << "(x, y) <= exists z . CPT@" << state << "(x) * " << unary("x")
         << binary("x", "z") << " * Word" << i + 1 << "(z, y);\n";
    else
      os << "Word" << i << "(x, x) <= CPT@" << state << "(x) * " << unary("x") << ";\n";
  }
  os << "Sink(x)      <= CPT@idle(x) * " << unary("x") << ";\n";
  out.spec_text = os.str();
  return out;
}

}  // namespace clv
