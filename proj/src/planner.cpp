#include "genplan/planner.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <unordered_set>

namespace genplan::planner {

namespace {

struct SearchNode {
    strips::State state;
    int64_t parent;   // index into the node arena, -1 for the root
    uint32_t action;  // action leading here from parent
};

Plan reconstruct(const strips::Instance& instance, const std::vector<SearchNode>& nodes,
                 std::size_t goal_index) {
    Plan plan;
    plan.instance = instance.name();
    std::vector<std::size_t> chain;
    for (int64_t i = static_cast<int64_t>(goal_index); i >= 0; i = nodes[i].parent)
        chain.push_back(static_cast<std::size_t>(i));
    std::reverse(chain.begin(), chain.end());
    for (std::size_t i = 1; i < chain.size(); ++i) {
        plan.actions.push_back(nodes[chain[i]].action);
        plan.transitions.emplace_back(nodes[chain[i - 1]].state, nodes[chain[i]].state);
    }
    return plan;
}

}  // namespace

SolveResult solve(const strips::Instance& instance, const std::vector<strips::GroundAction>& actions,
                  const strips::State& from, const Budget& budget) {
    if (strips::is_goal(instance, from))
        return Plan{instance.name(), {}, {}};

    std::vector<SearchNode> nodes;
    std::unordered_set<strips::State, strips::StateHash> seen;
    nodes.push_back(SearchNode{from, -1, 0});
    seen.insert(from);

    std::deque<std::size_t> queue{0};
    uint64_t expanded = 0;
    while (!queue.empty()) {
        if (budget.nodes_exhausted(expanded)) return OutOfBudget{expanded, false};
        if ((expanded & 1023) == 0 && budget.time_exhausted()) return OutOfBudget{expanded, true};
        std::size_t cur = queue.front();
        queue.pop_front();
        ++expanded;
        // The arena reallocates on push_back: copy the state out first.
        const strips::State state = nodes[cur].state;
        for (auto& [ai, succ] : strips::successors(state, actions)) {
            if (!seen.insert(succ).second) continue;
            nodes.push_back(SearchNode{std::move(succ), static_cast<int64_t>(cur), ai});
            if (strips::is_goal(instance, nodes.back().state)) {
                Plan p = reconstruct(instance, nodes, nodes.size() - 1);
                p.expanded = expanded;
                return p;
            }
            queue.push_back(nodes.size() - 1);
        }
    }
    return Unsolvable{expanded};
}

StateClass classify(const strips::Instance& instance,
                    const std::vector<strips::GroundAction>& actions, const strips::State& state,
                    const Budget& budget) {
    if (strips::is_goal(instance, state)) return StateClass::Goal;
    SolveResult r = solve(instance, actions, state, budget);
    if (std::holds_alternative<Plan>(r)) return StateClass::Alive;
    if (std::holds_alternative<Unsolvable>(r)) return StateClass::DeadEnd;
    const auto& b = std::get<OutOfBudget>(r);
    throw BudgetExceeded(b.expanded, b.timed_out);
}

std::optional<StateClass> DeadEndCache::lookup(const strips::State& state) const {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(state);
    if (it == cache_.end()) return std::nullopt;
    return it->second;
}

void DeadEndCache::store(const strips::State& state, StateClass c) {
    std::unique_lock lock(mutex_);
    cache_.emplace(state, c);
}

std::size_t DeadEndCache::size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

StateClass DeadEndCache::classify(const strips::State& state, const Budget& budget,
                                  Plan* plan_out) {
    if (strips::is_goal(instance_, state)) return StateClass::Goal;
    if (auto cached = lookup(state)) {
        if (*cached != StateClass::Alive || !plan_out) return *cached;
    }
    SolveResult r = solve(instance_, actions_, state, budget);
    if (auto* plan = std::get_if<Plan>(&r)) {
        // Every state along the plan reaches the goal.
        store(state, StateClass::Alive);
        for (const auto& [s, t] : plan->transitions) {
            store(s, StateClass::Alive);
            if (strips::is_goal(instance_, t)) break;
            store(t, StateClass::Alive);
        }
        if (plan_out) *plan_out = std::move(*plan);
        return StateClass::Alive;
    }
    if (std::holds_alternative<Unsolvable>(r)) {
        // The search exhausted everything reachable from `state`; all of it is dead,
        // but re-walking the closed set is not worth it. Record the query state.
        store(state, StateClass::DeadEnd);
        return StateClass::DeadEnd;
    }
    const auto& b = std::get<OutOfBudget>(r);
    throw BudgetExceeded(b.expanded, b.timed_out);
}

namespace {

//! First-seen novelty table for tuples of size 1 and 2 over atom ids.
//! Any k above 2 disables pruning entirely, which makes IW(k) plain
//! breadth-first search.
class NoveltyTable {
public:
    explicit NoveltyTable(int k) : k_(k) {}

    //! True iff the state contains an unseen tuple; marks all its tuples seen.
    bool novel_and_mark(const strips::State& s) {
        if (k_ > 2) return true;
        bool novel = false;
        if (k_ >= 1) {
            for (auto a : s.atoms) novel |= singles_.insert(a).second;
        }
        if (k_ >= 2) {
            for (std::size_t i = 0; i < s.atoms.size(); ++i)
                for (std::size_t j = i + 1; j < s.atoms.size(); ++j) {
                    uint64_t key = (uint64_t{s.atoms[i]} << 32) | s.atoms[j];
                    novel |= pairs_.insert(key).second;
                }
        }
        return novel;
    }

private:
    int k_;
    std::unordered_set<uint32_t> singles_;
    std::unordered_set<uint64_t> pairs_;
};

}  // namespace

std::optional<IWResult> iw_search(const strips::Instance& instance,
                                  const std::vector<strips::GroundAction>& actions,
                                  const strips::State& from, int max_k, const AcceptFn& accept,
                                  const Budget& budget) {
    (void)instance;
    // Width 0: accepted state among the direct successors.
    for (auto& [ai, succ] : strips::successors(from, actions)) {
        if (accept(from, succ)) return IWResult{std::move(succ), {ai}, 0};
    }

    // Beyond k = 2 there is no pruning left, so one unpruned pass settles it.
    for (int k = 1; k <= std::min(max_k, 3); ++k) {
        NoveltyTable table(k);
        std::vector<SearchNode> nodes;
        std::unordered_set<strips::State, strips::StateHash> seen;
        table.novel_and_mark(from);
        nodes.push_back(SearchNode{from, -1, 0});
        seen.insert(from);
        std::deque<std::size_t> queue{0};
        uint64_t expanded = 0;
        while (!queue.empty()) {
            if (budget.nodes_exhausted(expanded))
                throw BudgetExceeded(expanded, false);
            if ((expanded & 1023) == 0 && budget.time_exhausted())
                throw BudgetExceeded(expanded, true);
            std::size_t cur = queue.front();
            queue.pop_front();
            ++expanded;
            const strips::State state = nodes[cur].state;
            for (auto& [ai, succ] : strips::successors(state, actions)) {
                if (seen.count(succ)) continue;
                nodes.push_back(SearchNode{succ, static_cast<int64_t>(cur), ai});
                if (accept(from, succ)) {
                    Plan p = reconstruct(instance, nodes, nodes.size() - 1);
                    return IWResult{std::move(succ), std::move(p.actions), k};
                }
                seen.insert(succ);
                if (table.novel_and_mark(succ)) queue.push_back(nodes.size() - 1);
            }
        }
    }
    return std::nullopt;
}

}  // namespace genplan::planner
