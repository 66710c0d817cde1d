#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "support/generators.hpp"
#include "vidtl/tl.hpp"

using namespace vidtl;
using vidtl::testing::make_props;
using vidtl::testing::random_formula;
using vidtl::testing::random_trace;

TEST_CASE("proposition set normalizes, deduplicates and indexes") {
    PropositionSet props({"  Person is Meditating ", "lake shore"});
    CHECK(props.size() == 2);
    CHECK(props.at(0).text == "Person is Meditating");
    CHECK(props.find("person is meditating") == 0);
    CHECK(props.find("LAKE SHORE  ") == 1);
    CHECK(!props.find("unknown").has_value());
    CHECK(props.at(1).index == 1);

    CHECK_THROWS_AS(PropositionSet({"a", " A "}), Error);
    CHECK_THROWS_AS(PropositionSet({""}), Error);
}

TEST_CASE("parses the running-example formula into nested sequencing") {
    PropositionSet props({"person is meditating", "lake shore", "person is standing",
                          "person is walking away"});
    const Formula f = parse_formula(
        "(\"person is meditating\" & \"lake shore\") X (\"person is standing\" X "
        "\"person is walking away\")",
        props);
    REQUIRE(f.kind() == FormulaKind::seq);
    CHECK(f.left().kind() == FormulaKind::conjunction);
    CHECK(f.left().left().prop_index() == 0);
    CHECK(f.left().right().prop_index() == 1);
    REQUIRE(f.right().kind() == FormulaKind::seq);
    CHECK(f.right().left().prop_index() == 2);
    CHECK(f.right().right().prop_index() == 3);

    // Without the inner parentheses the binary X chains to the right anyway.
    const Formula g = parse_formula(
        "(\"person is meditating\" & \"lake shore\") X \"person is standing\" X "
        "\"person is walking away\"",
        props);
    CHECK(g == f);
}

TEST_CASE("parses single operators and until") {
    PropositionSet props({"a", "b"});
    const Formula g = parse_formula("G \"a\"", props);
    REQUIRE(g.kind() == FormulaKind::always);
    CHECK(g.child().prop_index() == 0);

    const Formula u = parse_formula("\"a\" U \"b\"", props);
    REQUIRE(u.kind() == FormulaKind::until);
    CHECK(u.left().prop_index() == 0);
    CHECK(u.right().prop_index() == 1);
}

TEST_CASE("precedence: negation over conjunction over disjunction over implication") {
    PropositionSet props({"a", "b", "c"});
    const Formula f = parse_formula("! \"a\" & \"b\" | \"c\"", props);
    // (((!a) & b) | c)
    REQUIRE(f.kind() == FormulaKind::disjunction);
    REQUIRE(f.left().kind() == FormulaKind::conjunction);
    CHECK(f.left().left().kind() == FormulaKind::negation);

    // Implication desugars to !lhs | rhs at parse time.
    const Formula imp = parse_formula("\"a\" -> \"b\"", props);
    REQUIRE(imp.kind() == FormulaKind::disjunction);
    CHECK(imp.left().kind() == FormulaKind::negation);
    CHECK(imp.right().prop_index() == 1);

    // Unary operators bind tighter than binary U.
    const Formula gu = parse_formula("G \"a\" U \"b\"", props);
    REQUIRE(gu.kind() == FormulaKind::until);
    CHECK(gu.left().kind() == FormulaKind::always);
}

TEST_CASE("parse errors carry position and expectation") {
    PropositionSet props({"a"});
    CHECK_THROWS_AS(parse_formula("G", props), SyntaxError);
    CHECK_THROWS_AS(parse_formula("\"a\" &", props), SyntaxError);
    CHECK_THROWS_AS(parse_formula("(\"a\"", props), SyntaxError);
    CHECK_THROWS_AS(parse_formula("\"a\" \"a\"", props), SyntaxError);
    CHECK_THROWS_AS(parse_formula("hello", props), SyntaxError);
    try {
        parse_formula("\"a\" & & \"a\"", props);
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.position() == 6);
        CHECK(!e.expected().empty());
    }

    try {
        parse_formula("\"nope\"", props);
        FAIL("expected UnknownProposition");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_proposition);
    }
}

TEST_CASE("desugar rewrites sequencing and is idempotent") {
    PropositionSet props({"a", "b", "c"});
    const Formula a = Formula::atom(0);
    const Formula b = Formula::atom(1);
    const Formula c = Formula::atom(2);

    const Formula simple = desugar_seq(Formula::seq(a, b));
    CHECK(simple == Formula::conjunction(a, Formula::next(Formula::eventually(b))));

    CHECK(desugar_seq(Formula::always(a)) == Formula::always(a));

    const Formula nested = desugar_seq(Formula::seq(a, Formula::seq(b, c)));
    const Formula expected = Formula::conjunction(
        a, Formula::next(Formula::eventually(
               Formula::conjunction(b, Formula::next(Formula::eventually(c))))));
    CHECK(nested == expected);
    CHECK(desugar_seq(nested) == nested);
}

TEST_CASE("finite-trace semantics on the documented cases") {
    PropositionSet props({"a", "b"});
    const Formula a = Formula::atom(0);
    const Formula b = Formula::atom(1);

    // Labels: bit0 = a, bit1 = b.
    CHECK(evaluate_trace(Formula::eventually(b), {0b01, 0b11}, 0));
    CHECK(!evaluate_trace(Formula::always(a), {0b01, 0b00}, 0));
    CHECK(evaluate_trace(Formula::until(a, b), {0b01, 0b01, 0b10}, 0));

    // Strong next: false at the last position.
    CHECK(!evaluate_trace(Formula::next(a), {0b01}, 0));
    CHECK(evaluate_trace(Formula::next(a), {0b00, 0b01}, 0));

    CHECK_THROWS_AS(evaluate_trace(a, {0b01}, 5), Error);
    CHECK_THROWS_AS(evaluate_trace(Formula::seq(a, b), {0b01}, 0), std::logic_error);
}

TEST_CASE("free propositions are exactly the referenced atoms") {
    const Formula a = Formula::atom(0);
    const Formula b = Formula::atom(2);
    CHECK(free_propositions(Formula::conjunction(a, Formula::eventually(b))) ==
          std::vector<std::size_t>{0, 2});
    CHECK(free_propositions(a) == std::vector<std::size_t>{0});
    CHECK(free_propositions(Formula::negation(Formula::negation(a))) ==
          std::vector<std::size_t>{0});
}

TEST_CASE("property: parse of pretty-print is the identity on parsed ASTs") {
    std::mt19937_64 rng(20240811);
    const PropositionSet props = make_props(3);
    for (int i = 0; i < 500; ++i) {
        const Formula f = random_formula(rng, props.size(), 4, {.allow_seq = true});
        // Random ASTs may contain implication nodes, which the parser always
        // desugars; one round of parse gives a parser-canonical AST first.
        const Formula parsed = parse_formula(to_string(f, props), props);
        const Formula reparsed = parse_formula(to_string(parsed, props), props);
        REQUIRE(reparsed == parsed);
    }
}

TEST_CASE("property: always/eventually duality on random traces") {
    std::mt19937_64 rng(7);
    const PropositionSet props = make_props(2);
    for (int i = 0; i < 300; ++i) {
        const Formula f = random_formula(rng, props.size(), 3);
        const Trace t = random_trace(rng, props.size(), 1 + (i % 5));
        const Formula lhs = Formula::always(f);
        const Formula rhs = Formula::eventually(Formula::negation(f));
        for (std::size_t at = 0; at < t.size(); ++at) {
            REQUIRE(evaluate_trace(lhs, t, at) == !evaluate_trace(rhs, t, at));
        }
    }
}

TEST_CASE("property: eventually equals until(true, phi)") {
    std::mt19937_64 rng(11);
    const PropositionSet props = make_props(2);
    const Formula truthy =
        Formula::disjunction(Formula::atom(0), Formula::negation(Formula::atom(0)));
    for (int i = 0; i < 300; ++i) {
        const Formula f = random_formula(rng, props.size(), 3);
        const Trace t = random_trace(rng, props.size(), 1 + (i % 4));
        REQUIRE(evaluate_trace(Formula::eventually(f), t, 0) ==
                evaluate_trace(Formula::until(truthy, f), t, 0));
    }
}

TEST_CASE("property: desugared formulas have no seq nodes") {
    std::mt19937_64 rng(23);
    const PropositionSet props = make_props(3);
    auto has_seq = [](const Formula& f) {
        auto rec = [](auto&& self, const Formula& g) -> bool {
            if (g.kind() == FormulaKind::seq) return true;
            if (g.is_unary()) return self(self, g.child());
            if (g.is_binary()) return self(self, g.left()) || self(self, g.right());
            return false;
        };
        return rec(rec, f);
    };
    for (int i = 0; i < 300; ++i) {
        const Formula f = random_formula(rng, props.size(), 4, {.allow_seq = true});
        const Formula d = desugar_seq(f);
        REQUIRE(!has_seq(d));
        REQUIRE(desugar_seq(d) == d);
    }
}

TEST_CASE("spec file round trip") {
    PropositionSet props({"person is meditating", "lake shore"});
    const Formula f = parse_formula("G \"lake shore\" & F \"person is meditating\"", props);
    const auto path = std::filesystem::temp_directory_path() / "vidtl_spec_test.json";
    save_spec_file(path, props, f);
    const SpecFile loaded = load_spec_file(path);
    CHECK(loaded.props == props);
    CHECK(loaded.formula == f);
    std::filesystem::remove(path);
}
