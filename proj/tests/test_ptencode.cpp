#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "clverify/checker.hpp"
#include "clverify/ptencode.hpp"
#include "helpers.hpp"

using namespace clv;

namespace {

AnalyzedSpec analyze_encoding(const PtEncoding& enc) {
  Spec sp = parse_spec(enc.spec_text);
  auto as = analyze(sp);
  REQUIRE(as.normal_form.ok());
  return as;
}

}  // namespace

TEST_CASE("program parsing") {
  auto p = parse_pt_program("1: write 1\n2: stop\n");
  REQUIRE(p.statements.size() == 2);
  CHECK(p.statements[0].kind == PtProgram::Write1);
  CHECK(p.statements[1].kind == PtProgram::Stop);

  auto all = parse_pt_program(
      "1: write 0\n2: write 1\n3: go right\n4: go left\n"
      "5: goto step 1 if read 0\n6: goto step 2 if read 1\n7: stop\n");
  CHECK(all.statements.size() == 7);
  CHECK(all.statements[4].target == 1);

  CHECK_THROWS_AS(parse_pt_program("1: goto step 9 if read 0\n"), PtParseError);
  CHECK_THROWS_AS(parse_pt_program("1: fly away\n"), PtParseError);
  // semicolon separators work too
  CHECK(parse_pt_program("1: write 1; 2: stop").statements.size() == 2);
}

TEST_CASE("behavior of '1: stop': a silent control state") {
  auto p = parse_pt_program("1: stop\n");
  Signature sig = encode_behavior(p);
  REQUIRE(sig.components.size() == 1);
  const ComponentType& c = sig.components[0];
  for (auto& st : {"c1", "c2", "c1w", "c2w"}) CHECK(c.has_state(st));
  for (auto& t : c.transitions) CHECK(t.from != "c1");
  CHECK(sig.interactions.size() == 10);
  auto rep = validate_signature(sig);
  INFO(rep.to_string());
  CHECK(rep.ok());
  CHECK(rep.warnings.empty());  // every port labels a transition
}

TEST_CASE("tape rows: head placement and sink overflow") {
  auto p = parse_pt_program("1: stop\n");
  Signature sig = encode_behavior(p);
  const ComponentType& c = sig.components[0];
  auto has = [&](const char* f, const char* port, const char* t) {
    return std::find(c.transitions.begin(), c.transitions.end(),
                     ComponentType::Transition{f, port, t}) != c.transitions.end();
  };
  CHECK(has("t0b", "rightb_i", "t0h"));
  CHECK(has("t1b", "rightb_i", "t1h"));
  CHECK(has("idle", "rightb_i", "busy"));
  CHECK(has("busy", "err_o", "busy"));
  CHECK(has("t0b_left", "leftb_o", "t0h"));
  CHECK(has("t1h_read", "read1_o", "t1h"));
}

TEST_CASE("encode_init: word cells, zero padding, anchors") {
  auto p = parse_pt_program("1: write 1\n2: stop\n");
  auto enc = encode_init(p, "00", 1);
  CHECK(enc.sentence == "PhiW");
  CHECK(enc.suggested_max_nodes == 8);
  CHECK(enc.warnings.empty());
  CHECK(enc.spec_text.find("CPT@t0h(x)") != std::string::npos);   // head on the first 0
  CHECK(enc.spec_text.find("Word2(x, x) <= CPT@t0b(x)") != std::string::npos);
  CHECK(enc.spec_text.find("Zeroes(x, x) <= CPT@t0b(x) * err(x);") != std::string::npos);
  CHECK(enc.spec_text.find("CPT@c1(x)") != std::string::npos);
  CHECK(enc.spec_text.find("CPT@idle(x)") != std::string::npos);
  CHECK_THROWS_AS(encode_init(p, "0", 1), WordTooShort);

  // a program without a unique trailing stop draws the reach warning
  auto loop = parse_pt_program("1: goto step 1 if read 0\n");
  CHECK(!encode_init(loop, "00", 1).warnings.empty());
}

TEST_CASE("the encoded spec passes the full front-end pipeline") {
  auto p = parse_pt_program("1: write 1\n2: stop\n");
  auto enc = encode_init(p, "01", 2);
  auto as = analyze_encoding(enc);
  CHECK(as.profile.at("Zeroes") == std::vector<std::string>{"CPT", "CPT"});
  CHECK(as.profile.at("InitW") == std::vector<std::string>{"CPT", "CPT"});
  auto rep = check_tight(as.spec.named_sentences.at("PhiW"), as.spec, as.profile);
  INFO(rep.to_string());
  CHECK(rep.ok());
  CHECK(as.spec.sid.kappa() == 3);
}

TEST_CASE("the minimal instance is the expected chain") {
  auto p = parse_pt_program("1: write 1\n2: stop\n");
  auto enc = encode_init(p, "00", 1);
  auto as = analyze_encoding(enc);
  auto q = make_query(as, "PhiW");
  auto trees = enumerate_trees(q, enc.suggested_max_nodes);
  REQUIRE(!trees.empty());
  // smallest tree: control + 1 zero + 2 word cells + 1 zero + sink
  auto c = canonical_model(trees[0], as);
  CHECK(c.architecture.of_component("CPT").size() == 6);
  int heads = 0;
  for (auto& pl : c.marking)
    if (pl.state == "t0h") ++heads;
  CHECK(heads == 1);
  CHECK(c.marking.count({"c1", Index{1}}) == 1);
  // the chain is connected left to right by all nine binary interactions
  CHECK(c.architecture.of_interaction("write0").size() == 5);
  CHECK(c.architecture.of_interaction("err").size() == 6);
}

TEST_CASE("every encoded model is a linear chain") {
  auto p = parse_pt_program("1: write 1\n2: stop\n");
  auto enc = encode_init(p, "00", 1);
  auto as = analyze_encoding(enc);

  // the linear-architecture rules over the same signature
  std::ostringstream lin;
  lin << print_spec(Spec{as.spec.signature, {}, {}, {}});
  lin << "Lin()   <= exists x y . L(x, y);\n";
  lin << "L(x, x) <= CPT(x) * err(x);\n";
  lin << "L(x, y) <= exists z . CPT(x) * err(x)";
  for (auto& b : {"write0", "write1", "right", "left", "read", "read0", "read1", "rightb", "leftb"})
    lin << " * " << b << "(x, z)";
  lin << " * L(z, y);\n";
  auto lin_as = analyze(parse_spec(lin.str()));
  REQUIRE(lin_as.normal_form.ok());
  auto lin_q = make_query(lin_as, "Lin");

  auto q = make_query(as, "PhiW");
  for (auto& t : enumerate_trees(q, enc.suggested_max_nodes)) {
    auto c = canonical_model(t, as);
    auto r = models(c, lin_q, 2 * (int)c.architecture.of_component("CPT").size() + 2);
    CHECK(r.verdict == ModelsResult::Verdict::Yes);
  }
}

TEST_CASE("terminating program reaches a deadlock; spinning one does not") {
  {
    auto p = parse_pt_program("1: write 1\n2: stop\n");
    auto enc = encode_init(p, "00", 1);
    auto as = analyze_encoding(enc);
    auto v = check_deadlock_bounded(make_query(as, "PhiW"), enc.suggested_max_nodes, "exact");
    CHECK(v.summary == Answer::Yes);
  }
  {
    auto p = parse_pt_program("1: goto step 1 if read 0\n2: stop\n");
    auto enc = encode_init(p, "00", 1);
    auto as = analyze_encoding(enc);
    auto v = check_deadlock_bounded(make_query(as, "PhiW"), 12, "exact");
    CHECK(v.summary == Answer::No);
    for (auto& inst : v.instances) CHECK(inst.answer == Answer::No);
  }
}

TEST_CASE("reach: the terminating program reaches its stop state") {
  auto p = parse_pt_program("1: write 1\n2: stop\n");
  auto enc = encode_init(p, "00", 1);
  auto as = analyze_encoding(enc);
  auto v = check_reach_bounded(make_query(as, "PhiW"), {"c2"}, enc.suggested_max_nodes, "exact");
  CHECK(v.summary == Answer::Yes);
}
