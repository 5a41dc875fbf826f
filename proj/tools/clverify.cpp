// clverify: a checker for component-based systems specified in configuration
// logic with inductive definitions. Bounded queries run on enumerated
// instances; 'emit' writes verification conditions for an external solver.

#include <cstdlib>
#include <random>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "clverify/checker.hpp"
#include "clverify/cl_models.hpp"
#include "clverify/cl_parser.hpp"
#include "clverify/model_json.hpp"
#include "clverify/ptencode.hpp"
#include "clverify/wsks_build.hpp"
#include "clverify/wsks_export.hpp"
#include "json.hpp"

using namespace clv;
using nlohmann::json;

namespace {

// exit codes: 0 = no / ok, 1 = yes, 2 = inconclusive, 3 = input error
constexpr int kNo = 0, kYes = 1, kInconclusive = 2, kError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_out(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

struct Options {
  std::string spec, config, sentence, psi, query, mode = "exact";
  std::string out, format = "text", program, word, fire;
  std::vector<std::string> states;
  int max_nodes = 8, padding = 1, jobs = 1, steps = 0;
  unsigned seed = 0;
  size_t bfs_cap = 1000000;
  int mutex_place_cap = 24;
  bool solve = false;
};

AnalyzedSpec load_analyzed(const std::string& path) {
  Spec sp = parse_spec(read_file(path));
  auto sigrep = validate_signature(sp.signature);
  if (!sigrep.ok()) throw std::runtime_error("invalid signature:\n" + sigrep.to_string());
  AnalyzedSpec as = analyze(sp);
  if (!as.normal_form.ok())
    throw std::runtime_error("SID violates the rule normal form:\n" + as.normal_form.to_string());
  return as;
}

int cmd_validate(const Options& o) {
  Spec sp = parse_spec(read_file(o.spec));
  json rep;
  rep["schema"] = "clverify/1";
  rep["command"] = "validate";
  bool ok = true;
  auto add = [&](const char* phase, const ValidationReport& r) {
    json items = json::array();
    for (auto& i : r.issues) items.push_back({{"where", i.where}, {"message", i.message}});
    json warns = json::array();
    for (auto& w : r.warnings) warns.push_back({{"where", w.where}, {"message", w.message}});
    rep[phase] = {{"errors", items}, {"warnings", warns}};
    ok = ok && r.ok();
  };
  add("signature", validate_signature(sp.signature));
  Sid des = desugar_stateless_atoms(sp.sid, sp.signature);
  add("normalForm", validate_normal_form(des));
  if (ok) {
    try {
      Profile prof = infer_profiles(des, sp.signature);
      json jp;
      for (auto& [p, tup] : prof) jp[p] = tup;
      rep["profiles"] = jp;
      ValidationReport tight;
      Spec dsp = sp;
      dsp.sid = des;
      for (auto& [name, sentence] : sp.named_sentences) {
        auto r = check_tight(sentence, dsp, prof);
        for (auto& i : r.issues) tight.issues.push_back(i);
      }
      add("tightness", tight);
    } catch (const ProfileError& e) {
      rep["profiles"] = {{"error", e.what()}};
      ok = false;
    }
  }
  rep["ok"] = ok;
  if (o.format == "json") {
    write_out(o.out, rep.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << (ok ? "ok" : "invalid") << "\n";
    for (auto& phase : {"signature", "normalForm", "tightness"}) {
      if (!rep.contains(phase)) continue;
      for (auto& e : rep[phase]["errors"])
        os << "error: " << e["where"].get<std::string>() << ": "
           << e["message"].get<std::string>() << "\n";
      for (auto& w : rep[phase]["warnings"])
        os << "warning: " << w["where"].get<std::string>() << ": "
           << w["message"].get<std::string>() << "\n";
    }
    if (rep.contains("profiles") && rep["profiles"].contains("error"))
      os << "error: " << rep["profiles"]["error"].get<std::string>() << "\n";
    write_out(o.out, os.str());
  }
  return ok ? kNo : kError;
}

int cmd_enumerate(const Options& o) {
  auto as = load_analyzed(o.spec);
  auto q = make_query(as, o.sentence);
  std::ostringstream os;
  for_each_tree(q, o.max_nodes, [&](const RewritingTree& t) {
    os << Verdict::tree_to_json(t).dump() << "\n";
    return true;
  });
  write_out(o.out, os.str());
  return kNo;
}

json net_to_json(const PetriNet& net) {
  json j;
  j["schema"] = "clverify/1";
  j["places"] = json::array();
  for (auto& p : net.places) j["places"].push_back({p.state, index_to_string(p.index)});
  j["transitions"] = json::array();
  for (auto& t : net.transitions) {
    json jt;
    jt["type"] = t.interaction;
    json tup = json::array();
    for (auto& u : t.tuple) tup.push_back(index_to_string(u));
    jt["tuple"] = tup;
    auto places = [&](const Bits& b) {
      json arr = json::array();
      for (int i = 0; i < (int)net.places.size(); ++i)
        if (b.get(i)) arr.push_back({net.places[i].state, index_to_string(net.places[i].index)});
      return arr;
    };
    jt["pre"] = places(t.pre);
    jt["post"] = places(t.post);
    j["transitions"].push_back(jt);
  }
  return j;
}

int cmd_net(const Options& o) {
  auto as = load_analyzed(o.spec);
  Configuration c = configuration_from_json(json::parse(read_file(o.config)));
  auto net = build_net(as.spec.signature, c.architecture);
  write_out(o.out, net_to_json(net).dump(2) + "\n");
  return kNo;
}

int cmd_simulate(const Options& o) {
  auto as = load_analyzed(o.spec);
  Configuration c = configuration_from_json(json::parse(read_file(o.config)));
  auto net = build_net(as.spec.signature, c.architecture);
  Bits m = net.to_bits(c.marking);
  std::ostringstream os;
  auto show = [&](const Bits& b) {
    os << "{";
    bool first = true;
    for (auto& p : net.to_marking(b)) {
      os << (first ? "" : ", ") << p.state << "[" << index_to_string(p.index) << "]";
      first = false;
    }
    os << "}\n";
  };
  show(m);
  auto fire_named = [&](const std::string& name) {
    for (int t = 0; t < (int)net.transitions.size(); ++t)
      if (net.transitions[t].to_string() == name && transition_enabled(net, m, t)) {
        m = fire(net, m, t);
        os << name << " -> ";
        show(m);
        return true;
      }
    return false;
  };
  if (!o.fire.empty()) {
    // transition names carry commas inside brackets; split only outside them
    std::string script;
    bool inside = false;
    for (char ch : o.fire) {
      if (ch == '[') inside = true;
      if (ch == ']') inside = false;
      script += ((ch == ';' || ch == ' ' || ch == ',') && !inside) ? ' ' : ch;
    }
    std::istringstream ss(script);
    std::string name;
    while (ss >> name)
      if (!fire_named(name))
        throw std::runtime_error("transition " + name + " is not enabled at this marking");
  } else {
    std::mt19937 rng(o.seed);
    for (int step = 0; step < o.steps; ++step) {
      auto en = enabled(net, m);
      if (en.empty()) {
        os << "deadlock\n";
        break;
      }
      int t = en[rng() % en.size()];
      m = fire(net, m, t);
      os << net.transitions[t].to_string() << " -> ";
      show(m);
    }
  }
  write_out(o.out, os.str());
  return kNo;
}

int verdict_exit(const Verdict& v) {
  switch (v.summary) {
    case Answer::Yes: return kYes;
    case Answer::No: return kNo;
    default: return kInconclusive;
  }
}

void print_verdict(const Options& o, const Verdict& v) {
  if (o.format == "json") {
    write_out(o.out, v.to_json().dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << v.query << " " << v.sentence << ": " << answer_name(v.summary);
  if (v.summary == Answer::No)
    os << " (no counterexample within trees of up to " << v.max_nodes << " nodes)";
  os << "\n";
  for (auto& i : v.instances) {
    os << "  tree#" << i.tree_id << " (" << i.tree.size() << " nodes): " << answer_name(i.answer);
    if (!i.note.empty()) os << " [" << i.note << "]";
    if (!i.witness.is_null() && i.witness.contains("marking")) {
      os << " witness:";
      for (auto& p : i.witness["marking"])
        os << " " << p[0].get<std::string>() << "[" << p[1].get<std::string>() << "]";
    }
    os << "\n";
  }
  write_out(o.out, os.str());
}

int cmd_check(const Options& o) {
  auto as = load_analyzed(o.spec);
  CheckCaps caps;
  caps.bfs_cap = o.bfs_cap;
  caps.mutex_place_cap = o.mutex_place_cap;
  caps.jobs = o.jobs;
  Verdict v;
  if (o.query == "deadlock") {
    v = check_deadlock_bounded(make_query(as, o.sentence), o.max_nodes, o.mode, caps);
  } else if (o.query == "reach") {
    v = check_reach_bounded(make_query(as, o.sentence), o.states, o.max_nodes, o.mode, caps);
  } else if (o.query == "safe") {
    if (o.psi.empty()) throw std::runtime_error("safe needs --psi");
    v = check_safe_bounded(make_query(as, o.sentence), make_query(as, o.psi), o.max_nodes, caps);
  } else if (o.query == "inductive") {
    v = check_inductive_bounded(make_query(as, o.sentence), o.max_nodes, caps);
  } else {
    throw std::runtime_error("unknown query '" + o.query + "'");
  }
  print_verdict(o, v);
  return verdict_exit(v);
}

int cmd_emit(const Options& o) {
  auto as = load_analyzed(o.spec);
  VerificationCondition vc;
  std::string comment;
  if (o.query == "deadlock") {
    vc = deadlock_vc(as, o.sentence);
    comment = "deadlock VC for sentence " + o.sentence;
  } else if (o.query == "reach") {
    vc = reach_vc(as, o.sentence, o.states);
    comment = "reach VC for sentence " + o.sentence;
  } else {
    throw std::runtime_error("emit supports the deadlock and reach queries");
  }
  std::string text = export_solver(vc.formula, vc.arranged.spec.sid.kappa(), comment);
  write_out(o.out, text);
  const char* solver = std::getenv("SOLVER_BIN");
  if (o.solve && solver && *solver) {
    if (o.out.empty() || o.out == "-")
      throw std::runtime_error("--solve needs --out so the solver can read the file");
    std::string cmd = std::string(solver) + " " + o.out;
    std::cerr << "running: " << cmd << "\n";
    int rc = std::system(cmd.c_str());
    return rc == 0 ? kNo : kInconclusive;
  }
  return kNo;
}

int cmd_pt_encode(const Options& o) {
  auto p = parse_pt_program(read_file(o.program));
  auto enc = encode_init(p, o.word, o.padding);
  write_out(o.out, enc.spec_text);
  for (auto& w : enc.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "sentence: " << enc.sentence
            << ", suggested --max-nodes: " << enc.suggested_max_nodes << "\n";
  return kNo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clverify: verification of parametric component-based systems"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c, bool needs_spec = true) {
    if (needs_spec) c->add_option("--spec", o.spec, "specification file")->required();
    c->add_option("--out", o.out, "output file (default stdout)");
    c->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  };

  auto* validate = app.add_subcommand("validate", "check a specification file");
  add_common(validate);

  auto* enumerate = app.add_subcommand("enumerate", "dump rewriting trees, one JSON per line");
  add_common(enumerate);
  enumerate->add_option("--sentence", o.sentence)->required();
  enumerate->add_option("--max-nodes", o.max_nodes);

  auto* net = app.add_subcommand("net", "dump the Petri net of a configuration");
  add_common(net);
  net->add_option("--config", o.config, "configuration JSON")->required();

  auto* simulate = app.add_subcommand("simulate", "replay a firing script on a configuration");
  add_common(simulate);
  simulate->add_option("--config", o.config, "configuration JSON")->required();
  simulate->add_option("--fire", o.fire, "script, e.g. 'T[1,2] T[2,3]'");
  simulate->add_option("--steps", o.steps, "random steps when no script is given");
  simulate->add_option("--seed", o.seed, "seed for random stepping");

  auto* check = app.add_subcommand("check", "bounded parametric queries");
  add_common(check);
  check->add_option("--query", o.query, "deadlock, reach, safe or inductive")->required();
  check->add_option("--sentence", o.sentence)->required();
  check->add_option("--psi", o.psi, "second sentence for safe");
  check->add_option("--states", o.states, "state tuple for reach")->delimiter(',');
  check->add_option("--max-nodes", o.max_nodes, "tree-size bound (default 8)");
  check->add_option("--mode", o.mode, "exact or invariant")
      ->check(CLI::IsMember({"exact", "invariant"}));
  check->add_option("--jobs", o.jobs, "parallel per-instance checks");
  check->add_option("--seed", o.seed, "seed for randomized auxiliaries");
  check->add_option("--bfs-cap", o.bfs_cap, "reachable-marking cap (default 10^6)");
  check->add_option("--mutex-place-cap", o.mutex_place_cap,
                    "mutex enumeration place cap (default 24)");

  auto* emit = app.add_subcommand("emit", "write the WSkS verification condition");
  add_common(emit);
  emit->add_option("--query", o.query, "deadlock or reach")->required();
  emit->add_option("--sentence", o.sentence)->required();
  emit->add_option("--states", o.states, "state tuple for reach")->delimiter(',');
  emit->add_flag("--solve", o.solve, "run $SOLVER_BIN on the emitted file");

  auto* pt = app.add_subcommand("pt-encode", "encode a Post-Turing machine run");
  add_common(pt, false);
  pt->add_option("--program", o.program, "program file")->required();
  pt->add_option("--word", o.word, "initial tape word over {0,1}")->required();
  pt->add_option("--padding", o.padding, "zero cells on each side (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kError;
  }

  try {
    if (validate->parsed()) return cmd_validate(o);
    if (enumerate->parsed()) return cmd_enumerate(o);
    if (net->parsed()) return cmd_net(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (check->parsed()) return cmd_check(o);
    if (emit->parsed()) return cmd_emit(o);
    if (pt->parsed()) return cmd_pt_encode(o);
  } catch (const ParseError& e) {
    std::cerr << "parse error:\n" << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
