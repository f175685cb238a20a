#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "generator.hpp"
#include "tracereason/lexer.hpp"
#include "tracereason/spec/parser.hpp"

using namespace tracereason;
using spec::parse_spec;

namespace {

std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

// Line lengths in code points, indexed from 1.
std::vector<std::size_t> line_lengths(const std::string& text) {
  std::vector<std::size_t> out{0};
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    out.push_back(code_points(std::string_view(text).substr(start, nl == std::string::npos ? nl : nl - start)));
    if (nl == std::string::npos) return out;
    start = nl + 1;
  }
}

bool span_in_bounds(const SourceSpan& s, const std::string& text) {
  const auto lines = line_lengths(text);
  if (s.line < 1 || s.line >= lines.size() || s.column < 1) return false;
  // A span may end one past the last character of its line (end of input).
  return s.column + s.length <= lines[s.line] + 2;
}

const char* kSpecFixtures[] = {"ecas.tarski", "ecas-axioms.tarski"};

}  // namespace

TEST_CASE("lexer tokens and comments") {
  auto r = lex("sig A { f: set B } // tail\n/* block */ fact x -> y @", "t");
  CHECK(r.errors.empty());
  std::vector<TokenKind> kinds;
  for (const auto& t : r.tokens) kinds.push_back(t.kind);
  CHECK(kinds == std::vector<TokenKind>{TokenKind::Identifier, TokenKind::Identifier, TokenKind::LBrace,
                                        TokenKind::Identifier, TokenKind::Colon, TokenKind::Identifier,
                                        TokenKind::Identifier, TokenKind::RBrace, TokenKind::Identifier,
                                        TokenKind::Identifier, TokenKind::Arrow, TokenKind::Identifier, TokenKind::At,
                                        TokenKind::End});
  CHECK(r.tokens[8].span.line == 2);
  CHECK(r.tokens[8].span.column == 13);
}

TEST_CASE("lexer reports bad characters and unterminated comments") {
  auto r = lex("sig A # {}", "t");
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].span.column == 7);
  auto c = lex("/* never closed", "t");
  REQUIRE(c.errors.size() == 1);
  CHECK(c.errors[0].message.find("comment") != std::string::npos);
}

TEST_CASE("parse_spec: two sigs with a field and a location annotation") {
  auto r = parse_spec("abstract sig Artifact { refines: set Artifact } sig Requirement extends Artifact {} @location(text)",
                      "t.tarski");
  REQUIRE(r.ok());
  REQUIRE(r->sigs.size() == 2);
  CHECK(r->sigs[0].isAbstract);
  REQUIRE(r->sigs[0].fields.size() == 1);
  CHECK(r->sigs[0].fields[0].name == "refines");
  CHECK(r->sigs[0].fields[0].target == "Artifact");
  CHECK(r->sigs[1].parent == std::optional<std::string>("Artifact"));
  CHECK(r->sigs[1].locationKind == spec::LocationKind::Text);
  CHECK_FALSE(r->sigs[0].locationKind.has_value());
}

TEST_CASE("parse_spec: empty input") {
  auto r = parse_spec("", "empty.tarski");
  REQUIRE(r.ok());
  CHECK(r->sigs.empty());
  CHECK(r->facts.empty());
}

TEST_CASE("parse_spec: unterminated signature block") {
  auto r = parse_spec("sig R {", "t.tarski");
  REQUIRE_FALSE(r.ok());
  REQUIRE(r.error().size() == 1);
  CHECK(r.error()[0].message == "unterminated signature block");
  CHECK(r.error()[0].span.line == 1);
  CHECK(r.error()[0].span.file == "t.tarski");
}

TEST_CASE("parse_spec: syntax errors") {
  CHECK_FALSE(parse_spec("sig A { f: one A }", "t").ok());          // multiplicity other than set
  CHECK_FALSE(parse_spec("sig A { f: set A, f: set A }", "t").ok());  // duplicate field
  CHECK_FALSE(parse_spec("fact {}", "t").ok());                      // empty fact body
  CHECK_FALSE(parse_spec("fact { some a: A | a in A implies none }", "t").ok());
  CHECK_FALSE(parse_spec("fact { all a: A | a in A implies none", "t").ok());
  CHECK_FALSE(parse_spec("sig A {} @location(disk)", "t").ok());
  auto r = parse_spec("sig A { f: set B", "t");
  REQUIRE_FALSE(r.ok());
  CHECK(r.error()[0].message == "unterminated signature block");
}

TEST_CASE("parse_spec: error recovery reports several errors") {
  auto r = parse_spec("sig A { f: one A }\nsig B {}\nfact { all a: A | a -> }\nsig C { g: set C }", "t");
  REQUIRE_FALSE(r.ok());
  CHECK(r.error().size() == 2);
  CHECK(r.error()[0].span.line == 1);
  CHECK(r.error()[1].span.line == 3);
}

TEST_CASE("desugar: disjunctive body yields one rule per disjunct") {
  auto s = fixtures::spec_from_text(R"(abstract sig Artifact { refines: set Artifact, requires: set Artifact,
    contains: set Artifact, conflicts: set Artifact }
fact {
  all a,b,c: Artifact | (a->b in refines or a->b in requires or a->b in contains) and b->c in conflicts
    implies a->c in conflicts
})");
  REQUIRE(s.core.rules.size() == 3);
  CHECK(s.core.constraints.empty());
  const std::vector<std::string> expect{"refines", "requires", "contains"};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& r = s.core.rules[i];
    CHECK(r.id == "fact@3#1." + std::to_string(i + 1));
    REQUIRE(r.body.size() == 2);
    CHECK(std::get<spec::CoreMembership>(r.body[0]).relation == expect[i]);
    CHECK(std::get<spec::CoreMembership>(r.body[1]).relation == "conflicts");
    CHECK(r.head.relation == "conflicts");
    CHECK(r.head.source == "a");
    CHECK(r.head.target == "c");
  }
}

TEST_CASE("desugar: property macros") {
  auto s = fixtures::spec_from_text(R"(sig A { r: set A, s: set A }
fact P {
  antisymmetric[r]
  irreflexive[r]
  symmetric[s]
  transitive[s]
  reflexive[r]
  injective[r]
  functional[s]
  excludes[r, s]
})");
  const auto& c = s.core.constraints;
  const auto& rules = s.core.rules;
  REQUIRE(c.size() == 6);
  REQUIRE(rules.size() == 3);

  CHECK(std::holds_alternative<spec::MustEqual>(c[0].head));
  CHECK(c[0].body.size() == 2);
  CHECK(c[0].origin == "antisymmetric[r]");
  CHECK(std::get<spec::MustEqual>(c[0].head).left == "a");
  CHECK(std::get<spec::MustEqual>(c[0].head).right == "b");

  CHECK(std::holds_alternative<spec::Deny>(c[1].head));
  REQUIRE(c[1].body.size() == 1);
  CHECK(std::get<spec::CoreMembership>(c[1].body[0]).source == "a");
  CHECK(std::get<spec::CoreMembership>(c[1].body[0]).target == "a");

  CHECK(rules[0].origin == "symmetric[s]");
  CHECK(rules[0].head.source == "b");
  CHECK(rules[0].head.target == "a");
  CHECK(rules[1].origin == "transitive[s]");
  CHECK(rules[1].body.size() == 2);
  CHECK(rules[2].origin == "reflexive[r]");
  REQUIRE(rules[2].body.size() == 1);
  CHECK(std::get<spec::CoreTypeTest>(rules[2].body[0]).sig == "A");

  const auto& inj = std::get<spec::MustEqual>(c[2].head);
  CHECK(c[2].origin == "injective[r]");
  CHECK(inj.left == "a");
  CHECK(inj.right == "c");
  const auto& fun = std::get<spec::MustEqual>(c[3].head);
  CHECK(c[3].origin == "functional[s]");
  CHECK(fun.left == "b");
  CHECK(fun.right == "c");

  CHECK(c[4].origin == "excludes[r,s]");
  CHECK(c[5].origin == "excludes[r,s]");
  CHECK(std::holds_alternative<spec::Deny>(c[4].head));
  CHECK(std::get<spec::CoreMembership>(c[4].body[1]).source == "a");
  CHECK(std::get<spec::CoreMembership>(c[5].body[1]).source == "b");
  CHECK(c[4].id == "P#8.1");
  CHECK(c[5].id == "P#8.2");
}

TEST_CASE("desugar: requires/conflicts exclusion as one Forbid constraint") {
  auto s = fixtures::spec_from_text(R"(abstract sig A { requires: set A, conflicts: set A }
sig Requirement extends A {}
fact { all a,b: Requirement | a->b in requires implies a->b not in conflicts })");
  REQUIRE(s.core.constraints.size() == 1);
  CHECK(s.core.rules.empty());
  const auto* f = std::get_if<spec::Forbid>(&s.core.constraints[0].head);
  REQUIRE(f != nullptr);
  CHECK(f->relation == "conflicts");
}

TEST_CASE("desugar: errors") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    auto ast = parse_spec(text, "t");
    REQUIRE(ast.ok());
    auto core = spec::desugar(*ast);
    REQUIRE_FALSE(core.ok());
    bool found = false;
    for (const auto& e : core.error()) {
      found = found || e.message.find(needle) != std::string::npos;
      CHECK(span_in_bounds(e.span, text));
    }
    CHECK_MESSAGE(found, needle);
  };
  fails_with("sig A { r: set A }\nfact { irreflexive[q] }", "unknown relation 'q'");
  fails_with("sig A { r: set A }\nfact { all a,b: A | a->b in r implies a->b in r or b->a in r }", "non-Horn head");
  fails_with("sig A { r: set A }\nfact { all a: A | a->a in r implies some b: A | a->b in r }", "non-Horn head");
  fails_with("sig A { r: set A }\nfact { all a,b: A | a->b not in r implies b->a in r }", "negated atom");
  fails_with("sig A { r: set A }\nfact { all a: A | a->b in r implies a->a in r }", "unbound variable 'b'");
  fails_with("sig A { r: set A }\nfact { all a: A | a->a in r implies a->c in r }", "unbound variable 'c'");
}

TEST_CASE("desugar: conjunctive heads are split") {
  auto s = fixtures::spec_from_text("sig A { r: set A, s: set A }\nfact { all a,b: A | a->b in r implies a->b in s and b->a in s }");
  CHECK(s.core.rules.size() == 2);
}

TEST_CASE("round-trip: print then parse gives a structurally equal AST") {
  for (const char* f : kSpecFixtures) {
    CAPTURE(f);
    auto ast = parse_spec(fixtures::read(fixtures::path(f)), f);
    REQUIRE(ast.ok());
    const std::string printed = spec::print_spec(*ast);
    auto again = parse_spec(printed, "printed");
    REQUIRE(again.ok());
    CHECK(spec::structurally_equal(*ast, *again));
    CHECK(spec::print_spec(*again) == printed);
  }
  for (std::uint32_t seed = 1; seed <= 200; ++seed) {
    const auto c = gen::random_case(seed);
    auto ast = parse_spec(c.spec, "random");
    REQUIRE(ast.ok());
    auto again = parse_spec(spec::print_spec(*ast), "printed");
    REQUIRE(again.ok());
    CHECK(spec::structurally_equal(*ast, *again));
  }
}

TEST_CASE("desugar: k disjuncts give exactly k conjunctive core items") {
  for (int k = 1; k <= 6; ++k) {
    std::string body;
    for (int i = 0; i < k; ++i) body += (i ? " or " : "") + std::string("a->b in r") + std::to_string(i % 3);
    auto s = fixtures::spec_from_text("sig A { r0: set A, r1: set A, r2: set A }\nfact { all a,b: A | (" + body +
                                      ") and b->a in r0 implies a->b in r1 }");
    CHECK(s.core.rules.size() == static_cast<std::size_t>(k));
    for (const auto& r : s.core.rules) CHECK(r.body.size() == 2);
    auto d = fixtures::spec_from_text("sig A { r0: set A, r1: set A, r2: set A }\nfact { all a,b: A | " + body +
                                      " implies none }");
    CHECK(d.core.constraints.size() == static_cast<std::size_t>(k));
  }
}

TEST_CASE("fuzz: parsing never aborts and every error span is in bounds") {
  std::vector<std::string> seeds;
  for (const char* f : kSpecFixtures) seeds.push_back(fixtures::read(fixtures::path(f)));
  seeds.push_back(gen::random_case(7).spec);
  int parsed = 0, rejected = 0;
  for (std::uint32_t i = 0; i < 1500; ++i) {
    const std::string text = gen::mutate(seeds[i % seeds.size()], i, 1 + static_cast<int>(i % 8));
    auto ast = parse_spec(text, "fuzz");
    if (!ast) {
      ++rejected;
      CHECK_FALSE(ast.error().empty());
      for (const auto& e : ast.error()) {
        CHECK_MESSAGE(span_in_bounds(e.span, text), e);
        CHECK_FALSE(e.message.empty());
      }
      continue;
    }
    ++parsed;
    auto core = spec::desugar(*ast);
    if (!core) {
      for (const auto& e : core.error()) CHECK_MESSAGE(span_in_bounds(e.span, text), e);
      continue;
    }
    // Core items are universally quantified conjunctions over declared variables.
    auto check_item = [](const std::vector<spec::TypedVar>& vars, const std::vector<spec::CoreAtom>& body) {
      std::set<std::string> bound;
      for (const auto& v : vars) bound.insert(v.name);
      for (const auto& a : body) {
        if (const auto* m = std::get_if<spec::CoreMembership>(&a)) {
          CHECK(bound.count(m->source));
          CHECK(bound.count(m->target));
        } else {
          CHECK(bound.count(std::get<spec::CoreTypeTest>(a).var));
        }
      }
    };
    for (const auto& r : core->rules) check_item(r.vars, r.body);
    for (const auto& c : core->constraints) check_item(c.vars, c.body);
  }
  CHECK(parsed > 0);
  CHECK(rejected > 0);
}

TEST_CASE("fixture corpus: no negated atoms survive desugaring") {
  for (const char* f : kSpecFixtures) {
    auto s = fixtures::spec(f);
    for (const auto& fact : s.ast.facts) {
      for (const auto& formula : fact.body) {
        const auto* imp = std::get_if<spec::Implication>(&formula);
        if (!imp) continue;
        std::vector<const spec::BodyExpr*> stack{&imp->body};
        while (!stack.empty()) {
          const auto* e = stack.back();
          stack.pop_back();
          if (e->kind == spec::BodyExpr::Kind::Atom) {
            if (const auto* m = std::get_if<spec::MembershipAtom>(&e->atom)) CHECK_FALSE(m->negated);
          }
          for (const auto& c : e->children) stack.push_back(&c);
        }
      }
    }
    CHECK_FALSE(s.core.rules.empty());
  }
}
