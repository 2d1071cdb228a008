#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "genplan/pddl.hpp"

using namespace genplan;
using namespace genplan::strips;

TEST_CASE("domain parsing: gripper") {
    auto dom = testsup::load_domain("gripper/domain.pddl");
    CHECK(dom.name == "gripper");
    CHECK(dom.types.size() == 3);
    CHECK(dom.constants.size() == 2);
    CHECK(dom.constants[0].type == "room");
    CHECK(dom.predicates.size() == 4);
    CHECK(dom.actions.size() == 3);
    const auto& pick = dom.actions[1];
    CHECK(pick.name == "pick");
    CHECK(pick.params.size() == 3);
    CHECK(pick.precondition.size() == 3);
    CHECK(pick.effects.size() == 3);
    int negs = 0;
    for (const auto& e : pick.effects) negs += e.negated;
    CHECK(negs == 2);
}

TEST_CASE("problem parsing: objects, init, goal") {
    auto dom = testsup::load_domain("gripper/domain.pddl");
    auto spec = pddl::parse_problem(testsup::read_file(testsup::data_path("gripper/p-2ball.pddl")),
                                    dom, "p-2ball");
    CHECK(spec.name == "gripper-2");
    CHECK(spec.domain_name == "gripper");
    CHECK(spec.objects.size() == 4);  // constants not repeated
    CHECK(spec.init.size() == 5);
    CHECK(spec.goal.size() == 2);
    CHECK(spec.goal[0].predicate == "at");
}

TEST_CASE("parsing is case-insensitive and lowercases names") {
    auto dom = pddl::parse_domain(
        "(DEFINE (Domain CaseTest)\n"
        "  (:Requirements :STRIPS)\n"
        "  (:Predicates (P ?X) (q))\n"
        "  (:Action Go :parameters (?X) :precondition (P ?X) :effect (Q)))",
        "case");
    CHECK(dom.name == "casetest");
    CHECK(dom.predicates[0].name == "p");
    CHECK(dom.actions[0].name == "go");
    CHECK(dom.actions[0].params[0].name == "?x");
}

TEST_CASE("round trip: print then reparse") {
    for (const char* d : {"gripper", "blocks", "spanner", "delivery"}) {
        auto dom = testsup::load_domain(std::string(d) + "/domain.pddl");
        auto again = pddl::parse_domain(pddl::print_domain(dom), "reprint");
        CHECK(again == dom);
    }
    auto dom = testsup::load_domain("gripper/domain.pddl");
    auto spec = pddl::parse_problem(testsup::read_file(testsup::data_path("gripper/p-4ball.pddl")),
                                    dom, "p");
    auto again = pddl::parse_problem(pddl::print_problem(spec), dom, "reprint");
    CHECK(again == spec);
}

TEST_CASE("plan files: comments, blanks, round trip") {
    auto steps = pddl::parse_plan("; a comment\n(pick b1 rooma left)\n\n(move rooma roomb)\n");
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].predicate == "pick");
    CHECK(steps[0].args == std::vector<std::string>{"b1", "rooma", "left"});
    CHECK(pddl::parse_plan(pddl::print_plan(steps)) == steps);
}

TEST_CASE("diagnostics carry file and line") {
    try {
        pddl::parse_domain("(define (domain x)\n  (:predicates (p ?x)\n", "broken.pddl");
        FAIL("expected a parse error");
    } catch (const pddl::ParseError& e) {
        CHECK(e.diagnostic.file == "broken.pddl");
        CHECK(e.diagnostic.line >= 1);
    }
}

TEST_CASE("unsupported requirements are rejected by name") {
    try {
        pddl::parse_domain("(define (domain x) (:requirements :adl) (:predicates (p)))", "x");
        FAIL("expected rejection");
    } catch (const pddl::UnsupportedRequirement& e) {
        CHECK(e.requirement == ":adl");
    }
}

TEST_CASE("type errors: undeclared names, arity, duplicates") {
    auto dom = testsup::load_domain("gripper/domain.pddl");
    CHECK_THROWS_AS(
        pddl::parse_problem("(define (problem p) (:domain gripper) (:objects b - ball)"
                            "(:init (nosuch b)) (:goal (at b roomb)))",
                            dom, "p"),
        pddl::TypeError);
    CHECK_THROWS_AS(
        pddl::parse_problem("(define (problem p) (:domain gripper) (:objects b - ball)"
                            "(:init (at b)) (:goal (at b roomb)))",
                            dom, "p"),
        pddl::TypeError);
    CHECK_THROWS_AS(
        pddl::parse_problem("(define (problem p) (:domain gripper) (:objects b b - ball)"
                            "(:init) (:goal (at b roomb)))",
                            dom, "p"),
        pddl::TypeError);
    CHECK_THROWS_AS(pddl::parse_domain("(define (domain d) (:predicates (p) (p)))", "d"),
                    pddl::TypeError);
}

TEST_CASE("parser never crashes on mangled input") {
    auto text = testsup::read_file(testsup::data_path("gripper/domain.pddl"));
    // truncations
    for (std::size_t cut = 0; cut < text.size(); cut += 7) {
        try {
            pddl::parse_domain(text.substr(0, cut), "cut");
        } catch (const pddl::Error&) {
        }
    }
    // deterministic byte mangling
    std::mt19937 rng(7);
    for (int round = 0; round < 200; ++round) {
        std::string bad = text;
        int flips = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < flips; ++i) bad[rng() % bad.size()] = static_cast<char>(rng() % 128);
        try {
            pddl::parse_domain(bad, "mangled");
        } catch (const pddl::Error&) {
        }
    }
    CHECK(true);  // reaching here without a crash or foreign exception is the point
}
