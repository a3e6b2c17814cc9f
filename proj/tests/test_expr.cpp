#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "manifoldwalk/errors.hpp"
#include "manifoldwalk/expr.hpp"

using namespace mwalk;

TEST_CASE("juxtaposition multiplies") {
    Ast a = parse_expression("2 x1 cos(x2)", 2);
    CHECK(eval_value(a, {3.0, 0.0}) == doctest::Approx(6.0));
    CHECK(eval_value(a, {1.0, M_PI}) == doctest::Approx(-2.0));
}

TEST_CASE("named variables alias x1..x3") {
    Ast named = parse_expression("x y z", 3);
    Ast indexed = parse_expression("x1 x2 x3", 3);
    Vec p = {1.5, -2.0, 0.5};
    CHECK(eval_value(named, p) == eval_value(indexed, p));
    CHECK(structurally_equal(named, indexed));
}

TEST_CASE("power is right-associative with constant exponents") {
    Ast a = parse_expression("2^3^2", 1);
    CHECK(eval_value(a, {0.0}) == doctest::Approx(512.0));

    Ast b = parse_expression("x1^-2", 1);
    Jet2 jet = eval_jet(b, {2.0});
    CHECK(jet.value == doctest::Approx(0.25));
    CHECK(jet.grad[0] == doctest::Approx(-0.25));
    CHECK(jet.hess(0, 0) == doctest::Approx(0.375));
}

TEST_CASE("pi literal") {
    Ast a = parse_expression("cos(pi)", 1);
    CHECK(eval_value(a, {0.0}) == doctest::Approx(-1.0));
}

TEST_CASE("exact first and second derivatives of elementary functions") {
    struct Case {
        const char* text;
        double x;
        double value, d1, d2;
    };
    const Case cases[] = {
        {"sin(x1)", 0.7, std::sin(0.7), std::cos(0.7), -std::sin(0.7)},
        {"cos(x1)", 0.7, std::cos(0.7), -std::sin(0.7), -std::cos(0.7)},
        {"exp(x1)", 0.3, std::exp(0.3), std::exp(0.3), std::exp(0.3)},
        {"log(x1)", 2.0, std::log(2.0), 0.5, -0.25},
        {"sqrt(x1)", 4.0, 2.0, 0.25, -1.0 / 32.0},
        {"x1^2", 1.5, 2.25, 3.0, 2.0},
    };
    for (const Case& c : cases) {
        CAPTURE(c.text);
        Jet2 jet = eval_jet(parse_expression(c.text, 1), {c.x});
        CHECK(jet.value == doctest::Approx(c.value).epsilon(1e-14));
        CHECK(jet.grad[0] == doctest::Approx(c.d1).epsilon(1e-14));
        CHECK(jet.hess(0, 0) == doctest::Approx(c.d2).epsilon(1e-14));
    }
}

TEST_CASE("mixed partials are exact and symmetric") {
    // f = x1 x2^2 sin(x3); d2f/dx1 dx2 = 2 x2 sin(x3).
    Ast a = parse_expression("x1 x2^2 sin(x3)", 3);
    Vec p = {1.0, 2.0, 0.5};
    Jet2 jet = eval_jet(a, p);
    CHECK(jet.value == doctest::Approx(4.0 * std::sin(0.5)).epsilon(1e-14));
    CHECK(jet.hess(0, 1) == doctest::Approx(4.0 * std::sin(0.5)).epsilon(1e-14));
    CHECK(jet.hess(1, 0) == jet.hess(0, 1));
    CHECK(jet.hess(0, 2) == doctest::Approx(4.0 * std::cos(0.5)).epsilon(1e-14));
    CHECK(jet.hess(2, 2) == doctest::Approx(-4.0 * std::sin(0.5)).epsilon(1e-14));

    Jet1 j1 = eval_jet1(a, p);
    CHECK(j1.value == jet.value);
    for (int i = 0; i < 3; ++i) CHECK(j1.grad[i] == jet.grad[i]);
}

TEST_CASE("plain evaluation is bit-identical to the jet value") {
    Ast a = parse_expression("(x^2 (1 - x^2) - y^2)^2 + z^2 - 0.01", 3);
    Vec p = {0.37, -0.21, 0.11};
    CHECK(eval_value(a, p) == eval_jet(a, p).value);
}

TEST_CASE("syntax error carries the byte offset of the offending token") {
    try {
        parse_expression("x1 + * x2", 2);
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset == 5);
    }
}

TEST_CASE("identifier and arity errors") {
    CHECK_THROWS_AS(parse_expression("foo(x1)", 1), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expression("x1 + w", 2), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expression("x3", 2), ArityMismatch);
    CHECK_THROWS_AS(parse_expression("y", 1), ArityMismatch);
}

TEST_CASE("non-constant exponents are rejected") {
    CHECK_THROWS_AS(parse_expression("x1^x1", 1), SyntaxError);
    CHECK(eval_value(parse_expression("x1^(1+1)", 1), {3.0}) == doctest::Approx(9.0));
}

TEST_CASE("evaluation domain faults") {
    Ast lg = parse_expression("log(x1)", 1);
    CHECK_THROWS_AS(eval_value(lg, {0.0}), DomainError);
    CHECK_THROWS_AS(eval_value(lg, {-1.0}), DomainError);
    CHECK_THROWS_AS(eval_value(parse_expression("sqrt(x1)", 1), {-1.0}), DomainError);
    CHECK_THROWS_AS(eval_value(parse_expression("1/x1", 1), {0.0}), DomainError);
    CHECK_THROWS_AS(eval_value(parse_expression("x1^0.5", 1), {-2.0}), DomainError);
}

TEST_CASE("to_string round-trips structurally") {
    const char* texts[] = {
        "2 x1 cos(x2)",
        "-x1^2 + 3/(x2 - 1.5)",
        "sqrt(x1^2 + x2^2) - log(exp(x1))",
    };
    for (const char* t : texts) {
        CAPTURE(t);
        Ast a = parse_expression(t, 2);
        Ast b = parse_expression(to_string(a), 2);
        CHECK(structurally_equal(a, b));
    }
}

TEST_CASE("vector expressions expose jacobian and hessians") {
    VectorExpr f({parse_expression("x1^2 + x2", 2), parse_expression("x1 x2", 2)});
    CHECK(f.size() == 2);
    CHECK(f.arity() == 2);
    Vec p = {1.5, -2.0};
    Vec v = f.value(p);
    CHECK(v[0] == doctest::Approx(0.25));
    CHECK(v[1] == doctest::Approx(-3.0));
    Mat j = f.jacobian(p);
    CHECK(j(0, 0) == doctest::Approx(3.0));
    CHECK(j(0, 1) == doctest::Approx(1.0));
    CHECK(j(1, 0) == doctest::Approx(-2.0));
    CHECK(j(1, 1) == doctest::Approx(1.5));
    std::vector<Mat> h = f.hessians(p);
    CHECK(h[0](0, 0) == doctest::Approx(2.0));
    CHECK(h[0](1, 1) == doctest::Approx(0.0));
    CHECK(h[1](0, 1) == doctest::Approx(1.0));
}
