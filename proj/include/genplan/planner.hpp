#pragma once

#include <functional>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <variant>

#include "genplan/strips.hpp"

namespace genplan::planner {

//! Shortest plan found by breadth-first search from some start state.
//! Replaying the actions from that state reproduces `transitions` and the
//! final target satisfies the goal.
struct Plan {
    std::string instance;
    std::vector<uint32_t> actions;  // indices into the ground-action vector
    std::vector<std::pair<strips::State, strips::State>> transitions;
    uint64_t expanded = 0;  // states expanded by the search that found it

    std::size_t length() const { return actions.size(); }
};

struct Unsolvable {
    uint64_t expanded;
};

struct OutOfBudget {
    uint64_t expanded;
    bool timed_out;
};

using SolveResult = std::variant<Plan, Unsolvable, OutOfBudget>;

//! Uniform-cost breadth-first search; deterministic tie-breaking by
//! ground-action order. Returns a shortest plan.
SolveResult solve(const strips::Instance& instance, const std::vector<strips::GroundAction>& actions,
                  const strips::State& from, const Budget& budget = Budget::unlimited());

enum class StateClass { Goal, Alive, DeadEnd, Unreachable };

//! One-shot classification: Goal, Alive (some plan exists), or DeadEnd.
//! Throws BudgetExceeded when the search budget runs out undecided.
StateClass classify(const strips::Instance& instance,
                    const std::vector<strips::GroundAction>& actions, const strips::State& state,
                    const Budget& budget = Budget::unlimited());

//! Memoized dead-end oracle for one instance. Concurrent readers are safe;
//! classification results are cached, and an exhausted search marks every
//! state it visited as dead (nothing reachable from a dead state reaches the goal).
class DeadEndCache {
public:
    DeadEndCache(const strips::Instance& instance, const std::vector<strips::GroundAction>& actions)
        : instance_(instance), actions_(actions) {}

    //! When `plan_out` is non-null and the state is Alive, a shortest plan from
    //! the state is produced (recomputed if the classification was cached).
    StateClass classify(const strips::State& state, const Budget& budget = Budget::unlimited(),
                        Plan* plan_out = nullptr);

    std::size_t size() const;

private:
    std::optional<StateClass> lookup(const strips::State& state) const;
    void store(const strips::State& state, StateClass c);

    const strips::Instance& instance_;
    const std::vector<strips::GroundAction>& actions_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<strips::State, StateClass, strips::StateHash> cache_;
};

struct IWResult {
    strips::State state;
    std::vector<uint32_t> actions;  // path from the start state
    int width;                      // 0 when the accepted state is a direct successor
};

using AcceptFn = std::function<bool(const strips::State& from, const strips::State& candidate)>;

//! Serialized-width search: runs IW(0), IW(1), ... IW(max_k) from `from` until
//! some generated state satisfies `accept`; `width` is the first k that finds one.
//! IW(k) prunes states that contain no unseen atom tuple of size <= k
//! (first-seen semantics, root tuples included). Ties break by generation order.
std::optional<IWResult> iw_search(const strips::Instance& instance,
                                  const std::vector<strips::GroundAction>& actions,
                                  const strips::State& from, int max_k, const AcceptFn& accept,
                                  const Budget& budget = Budget::unlimited());

}  // namespace genplan::planner
