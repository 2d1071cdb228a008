#include <doctest.h>

#include <variant>

#include "../support.hpp"
#include "genplan/planner.hpp"

using namespace genplan;
using namespace genplan::strips;
using namespace genplan::planner;

namespace {

std::size_t plan_length(const std::string& problem) {
    auto inst = testsup::load_instance("gripper/domain.pddl", "gripper/" + problem);
    auto actions = ground(inst);
    auto res = solve(inst, actions, inst.initial_state());
    REQUIRE(std::holds_alternative<Plan>(res));
    return std::get<Plan>(res).length();
}

}  // namespace

TEST_CASE("bfs: chain plan in action order") {
    auto inst = testsup::load_instance("toys/chain-domain.pddl", "toys/chain-p.pddl");
    auto actions = ground(inst);
    auto res = solve(inst, actions, inst.initial_state());
    REQUIRE(std::holds_alternative<Plan>(res));
    const auto& plan = std::get<Plan>(res);
    REQUIRE(plan.length() == 4);
    CHECK(actions[plan.actions[0]].name == "(a1)");
    CHECK(actions[plan.actions[3]].name == "(a4)");
    CHECK(plan.transitions.size() == 4);
    CHECK(plan.transitions[0].first == inst.initial_state());
    CHECK(is_goal(inst, plan.transitions[3].second));
    CHECK(plan.expanded >= 4);
}

TEST_CASE("bfs: gripper optima") {
    // two grippers: 3 per lone ball, 5 per pair, 1 to walk back between trips
    CHECK(plan_length("p-1ball.pddl") == 3);
    CHECK(plan_length("p-2ball.pddl") == 5);
    CHECK(plan_length("p-3ball.pddl") == 9);
    CHECK(plan_length("p-4ball.pddl") == 11);
}

TEST_CASE("bfs: unsolvable is reported, not searched forever") {
    auto inst = testsup::load_instance("toys/unreach-domain.pddl", "toys/unreach-p.pddl");
    auto actions = ground(inst);
    auto res = solve(inst, actions, inst.initial_state());
    CHECK(std::holds_alternative<Unsolvable>(res));
}

TEST_CASE("bfs: node budget cuts the search off") {
    auto inst = testsup::load_instance("gripper/domain.pddl", "gripper/p-4ball.pddl");
    auto actions = ground(inst);
    auto res = solve(inst, actions, inst.initial_state(), Budget::nodes(3));
    REQUIRE(std::holds_alternative<OutOfBudget>(res));
    CHECK_FALSE(std::get<OutOfBudget>(res).timed_out);
}

TEST_CASE("classify: goal, alive, dead end") {
    auto chain = testsup::load_instance("toys/chain-domain.pddl", "toys/chain-p.pddl");
    auto cact = ground(chain);
    CHECK(classify(chain, cact, chain.initial_state()) == StateClass::Alive);

    auto dead = testsup::load_instance("toys/unreach-domain.pddl", "toys/unreach-p.pddl");
    auto dact = ground(dead);
    CHECK(classify(dead, dact, dead.initial_state()) == StateClass::DeadEnd);

    auto res = solve(chain, cact, chain.initial_state());
    auto goal_state = std::get<Plan>(res).transitions.back().second;
    CHECK(classify(chain, cact, goal_state) == StateClass::Goal);
}

TEST_CASE("dead-end cache: memoizes and returns recovery plans") {
    auto inst = testsup::load_instance("gripper/domain.pddl", "gripper/p-2ball.pddl");
    auto actions = ground(inst);
    DeadEndCache cache(inst, actions);
    CHECK(cache.size() == 0);
    CHECK(cache.classify(inst.initial_state()) == StateClass::Alive);
    auto filled = cache.size();
    CHECK(filled >= 1);
    Plan plan;
    CHECK(cache.classify(inst.initial_state(), Budget::unlimited(), &plan) == StateClass::Alive);
    CHECK(plan.length() == 5);
    CHECK(cache.size() == filled);  // second query hits the cache
}

TEST_CASE("iw: a chain of fresh atoms has width 1") {
    auto inst = testsup::load_instance("toys/chain-domain.pddl", "toys/chain-p.pddl");
    auto actions = ground(inst);
    auto goal_accept = [&](const State&, const State& cand) { return is_goal(inst, cand); };
    auto r = iw_search(inst, actions, inst.initial_state(), 2, goal_accept);
    REQUIRE(r.has_value());
    CHECK(r->width == 1);
    CHECK(r->actions.size() == 4);
}

TEST_CASE("iw: two-step preparation needs width 1") {
    auto inst = testsup::load_instance("toys/twostep-domain.pddl", "toys/twostep-p.pddl");
    auto actions = ground(inst);
    auto goal_accept = [&](const State&, const State& cand) { return is_goal(inst, cand); };
    auto r = iw_search(inst, actions, inst.initial_state(), 2, goal_accept);
    REQUIRE(r.has_value());
    CHECK(r->width == 1);
    CHECK(r->actions.size() == 2);
}

TEST_CASE("iw: direct successors count as width 0") {
    auto inst = testsup::load_instance("toys/chain-domain.pddl", "toys/chain-p.pddl");
    auto actions = ground(inst);
    auto p1 = inst.find_atom(inst.predicate("p1"), {});
    auto accept = [&](const State&, const State& cand) { return cand.contains(p1); };
    auto r = iw_search(inst, actions, inst.initial_state(), 2, accept);
    REQUIRE(r.has_value());
    CHECK(r->width == 0);
    CHECK(r->actions.size() == 1);
}

TEST_CASE("iw: with an uncapped width bound it finds shortest paths") {
    auto inst = testsup::load_instance("gripper/domain.pddl", "gripper/p-2ball.pddl");
    auto actions = ground(inst);
    auto goal_accept = [&](const State&, const State& cand) { return is_goal(inst, cand); };
    auto r = iw_search(inst, actions, inst.initial_state(),
                       static_cast<int>(inst.num_atoms()), goal_accept);
    REQUIRE(r.has_value());
    CHECK(r->actions.size() == 5);  // matches the BFS optimum
}

TEST_CASE("iw: nothing acceptable yields nullopt") {
    auto inst = testsup::load_instance("toys/unreach-domain.pddl", "toys/unreach-p.pddl");
    auto actions = ground(inst);
    auto goal_accept = [&](const State&, const State& cand) { return is_goal(inst, cand); };
    CHECK_FALSE(iw_search(inst, actions, inst.initial_state(), 2, goal_accept).has_value());
}
