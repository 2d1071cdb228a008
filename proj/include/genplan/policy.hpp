#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genplan/features.hpp"
#include "genplan/planner.hpp"
#include "genplan/strips.hpp"

namespace genplan::policy {

//! Condition on one feature, evaluated at the source state of a transition.
enum class CondTest : uint8_t { BoolTrue, BoolFalse, Eq0, Gt0 };

//! Required change of one feature across a transition. The Unk variants put
//! no constraint on the feature; everything a rule does not mention at all
//! must stay unchanged.
enum class EffectOp : uint8_t { SetTrue, SetFalse, UnkBool, Inc, Dec, UnkNum };

struct Cond {
    uint32_t f = 0;  // index into the policy's feature scope
    CondTest test = CondTest::BoolTrue;
    bool operator==(const Cond&) const = default;
};

struct Eff {
    uint32_t f = 0;
    EffectOp op = EffectOp::UnkBool;
    bool operator==(const Eff&) const = default;
};

//! Conditions and effects are kept sorted by feature index.
struct Rule {
    std::vector<Cond> conds;
    std::vector<Eff> effs;
    bool operator==(const Rule&) const = default;

    void normalize();
};

struct RankEntry {
    uint32_t rank = 0;
    std::vector<uint32_t> support;  // scope-local feature indices, sorted
    bool operator==(const RankEntry&) const = default;
};

//! rank per scope-local feature index; see termination.hpp for how it is built.
using Ranking = std::map<uint32_t, RankEntry>;

//! Feature-scoped transition policy. Rules index features by their position
//! in `pool_ids`; `kinds_boolean` mirrors the pool so that the rule semantics
//! work without the pool at hand.
struct Policy {
    std::vector<uint32_t> pool_ids;
    std::vector<bool> kinds_boolean;
    std::vector<Rule> rules;

    std::size_t scope_size() const { return pool_ids.size(); }
    //! Appends the rule unless an identical one is present; returns true when added.
    bool add_rule(Rule r);
    bool contains(const Rule& r) const;
};

//! Index of the first rule compatible with the value pair, or -1.
//! Values are indexed by scope-local feature and may be raw counts; Boolean
//! features are clamped to {0,1} before any comparison.
int compatible_rule(const Policy& policy, const std::vector<uint32_t>& vs,
                    const std::vector<uint32_t>& vt);

bool compatible(const Policy& policy, const std::vector<uint32_t>& vs,
                const std::vector<uint32_t>& vt);

//! The most specific rule the transition satisfies: one condition per feature
//! taken from the source values, one exact effect per changed feature.
Rule project(const std::vector<bool>& kinds_boolean, const std::vector<uint32_t>& vs,
             const std::vector<uint32_t>& vt);

enum class VerdictKind : uint8_t {
    Solves,     // every maximal policy trajectory reaches the goal
    NotClosed,  // some reachable solvable non-goal state has no compatible transition
    Unsafe,     // some compatible transition enters a dead end
    Cyclic,     // some policy trajectory revisits a state
};

struct Verdict {
    VerdictKind kind = VerdictKind::Solves;
    //! Unsafe: witness_s -> witness_t is the offending transition.
    //! NotClosed: witness_t is the stuck solvable state.
    //! Cyclic: witness_s -> witness_t closes the lasso.
    strips::State witness_s, witness_t;
    uint64_t visited = 0;  // distinct non-goal states explored, up to isomorphism
};

//! Exhaustive check of the policy on one instance: depth-first search over all
//! compatible transitions, goal states absorbing. States are explored modulo
//! object renamings that fix constants (canonical_state), which preserves the
//! verdict. Solvability of stuck states is decided lazily via `dead_cache`.
//! Deterministic: successors in ground-action order, first failure reported.
//! Throws BudgetExceeded when the budget runs out.
Verdict analyze(const strips::Instance& instance,
                const std::vector<strips::GroundAction>& actions,
                const features::FeaturePool& pool, const Policy& policy,
                planner::DeadEndCache& dead_cache, const Budget& budget = Budget::unlimited());

//! Scope-local feature values of a state, Boolean features clamped.
std::vector<uint32_t> policy_values(const Policy& policy, const features::FeaturePool& pool,
                                    features::Evaluator& ev, const strips::State& s);

//! Serialization. The document embeds the feature definitions, so a policy
//! file stands on its own given the domain.
std::string policy_to_json(const Policy& policy, const features::FeaturePool& pool,
                           const Ranking* ranking = nullptr);

struct LoadedPolicy {
    features::FeaturePool pool;
    Policy policy;
    Ranking ranking;
    bool has_ranking = false;
};

LoadedPolicy policy_from_json(const strips::DomainSpec& domain, const std::string& text);

//! Human-readable rendering: feature legend plus one line per rule.
std::string policy_to_text(const Policy& policy, const features::FeaturePool& pool,
                           const Ranking* ranking = nullptr);

//! ASCII token forms used in both JSON and text output, e.g. "f0>0", "!f1",
//! "f2-", "f2?".
std::string cond_token(const Cond& c);
std::string eff_token(const Eff& e);

}  // namespace genplan::policy
