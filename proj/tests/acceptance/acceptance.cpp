#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../support.hpp"
#include "genplan/cli.hpp"
#include "genplan/features.hpp"
#include "genplan/genex.hpp"
#include "genplan/planner.hpp"
#include "genplan/policy.hpp"
#include "genplan/strips.hpp"
#include "genplan/termination.hpp"
#include "genplan/wrapper.hpp"

using namespace genplan;

namespace {

//! Collects sub-checks for one acceptance criterion and prints a single
//! verdict line. The first failed expectation is kept as the note shown by
//! the surrounding doctest assertion.
struct Criterion {
    std::string label;
    bool ok = true;
    std::string note;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit Criterion(std::string l) : label(std::move(l)) {}

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            note = what;
        }
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    void within(double secs) {
        expect(elapsed() < secs,
               "took " + std::to_string(elapsed()) + "s, limit " + std::to_string(secs) + "s");
    }

    bool finish() const {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", label.c_str());
        std::fflush(stdout);
        return ok;
    }
};

// Reference policy over gripper-like bookkeeping: f0 counts balls still to be
// moved, f1 counts carried balls, f2 flags the robot at the pickup room.
policy::Policy gripper_rules() {
    policy::Policy p;
    p.pool_ids = {0, 1, 2};
    p.kinds_boolean = {false, false, true};
    policy::Rule r1;
    r1.conds = {{0, policy::CondTest::Gt0}};
    r1.effs = {{0, policy::EffectOp::Dec}, {1, policy::EffectOp::UnkNum}};
    policy::Rule r2;
    r2.conds = {{1, policy::CondTest::Gt0}};
    r2.effs = {{1, policy::EffectOp::Dec}};
    policy::Rule r3;
    r3.conds = {{1, policy::CondTest::Gt0}, {2, policy::CondTest::BoolTrue}};
    r3.effs = {{2, policy::EffectOp::SetFalse}};
    policy::Rule r4;
    r4.conds = {{1, policy::CondTest::Eq0}, {2, policy::CondTest::BoolFalse}};
    r4.effs = {{2, policy::EffectOp::SetTrue}};
    p.add_rule(r1);
    p.add_rule(r2);
    p.add_rule(r3);
    p.add_rule(r4);
    return p;
}

// f0 counts blocks above the target, f1 flags a held block.
policy::Policy two_rule_blocks(bool loosen) {
    policy::Policy p;
    p.pool_ids = {0, 1};
    p.kinds_boolean = {false, true};
    policy::Rule up;
    up.conds = {{0, policy::CondTest::Gt0}, {1, policy::CondTest::BoolFalse}};
    up.effs = {{0, policy::EffectOp::Dec}, {1, policy::EffectOp::SetTrue}};
    policy::Rule down;
    down.conds = {{1, policy::CondTest::BoolTrue}};
    down.effs = {{1, policy::EffectOp::SetFalse}};
    if (loosen) down.effs.push_back({0, policy::EffectOp::UnkNum});
    p.add_rule(up);
    p.add_rule(down);
    return p;
}

std::vector<uint32_t> restrict_row(const std::vector<uint32_t>& row,
                                   const std::vector<uint32_t>& scope) {
    std::vector<uint32_t> out;
    out.reserve(scope.size());
    for (auto f : scope) out.push_back(row[f]);
    return out;
}

//! Policy whose rules are the projections of the positive edges onto `scope`.
policy::Policy project_policy(const genex::SampleSigs& sigs,
                              const std::vector<uint32_t>& scope) {
    policy::Policy pi;
    pi.pool_ids = scope;
    for (auto f : scope) pi.kinds_boolean.push_back(sigs.kinds_boolean[f]);
    for (const auto& [s, t] : sigs.pos_edges) {
        auto vs = restrict_row(sigs.state_values[s], scope);
        auto vt = restrict_row(sigs.state_values[t], scope);
        pi.add_rule(policy::project(pi.kinds_boolean, vs, vt));
    }
    return pi;
}

bool hits_all(const genex::HittingSets& hsp, const std::vector<uint32_t>& scope) {
    for (const auto& sub : hsp.subsets) {
        bool hit = false;
        for (auto f : scope) hit = hit || sub.test(f);
        if (!hit) return false;
    }
    return true;
}

//! Random value tables. The hard flavor leans on constant and oscillating
//! columns so that selection failures are usually genuine.
genex::SampleSigs random_sigs(std::mt19937& rng, bool hard) {
    std::uniform_int_distribution<uint32_t> dnf(hard ? 1 : 2, hard ? 6 : 5);
    std::uniform_int_distribution<uint32_t> dns(3, 7);
    const uint32_t nf = dnf(rng), ns = dns(rng);
    genex::SampleSigs s;
    std::bernoulli_distribution dbool(0.35);
    std::uniform_int_distribution<uint32_t> dcost(1, 5);
    for (uint32_t f = 0; f < nf; ++f) {
        s.kinds_boolean.push_back(dbool(rng));
        s.costs.push_back(dcost(rng));
    }
    s.state_values.assign(ns, std::vector<uint32_t>(nf, 0));
    std::uniform_int_distribution<int> dpat(0, 9);
    std::uniform_int_distribution<uint32_t> dval(0, 3);
    for (uint32_t f = 0; f < nf; ++f) {
        int pat = dpat(rng);
        std::vector<uint32_t> col(ns);
        if (hard ? pat < 4 : pat < 2) {
            uint32_t v = dval(rng);
            for (auto& x : col) x = v;
        } else if (hard ? pat < 7 : pat < 3) {
            for (uint32_t i = 0; i < ns; ++i) col[i] = i % 2;
        } else if (!hard && pat < 8) {
            for (uint32_t i = 0; i < ns; ++i) col[i] = ns - i;
        } else {
            for (auto& x : col) x = dval(rng);
        }
        for (uint32_t i = 0; i < ns; ++i)
            s.state_values[i][f] = s.kinds_boolean[f] ? col[i] % 2 : col[i];
    }
    std::bernoulli_distribution dgoal(0.15), dlast(0.7);
    for (uint32_t i = 0; i < ns; ++i)
        s.goal_flag.push_back(i + 1 == ns ? dlast(rng) : dgoal(rng));
    std::uniform_int_distribution<uint32_t> dpos(1, 4), dneg(0, 3);
    std::uniform_int_distribution<uint32_t> dstate(0, ns - 1);
    uint32_t npos = dpos(rng);
    for (uint32_t e = 0; e < npos; ++e) {
        if (hard) {
            uint32_t a = dstate(rng), b = dstate(rng);
            if (a == b) b = (b + 1) % ns;
            s.pos_edges.emplace_back(a, b);
        } else {
            std::uniform_int_distribution<uint32_t> dsrc(0, ns - 2);
            uint32_t a = dsrc(rng);
            std::uniform_int_distribution<uint32_t> ddst(a + 1, ns - 1);
            s.pos_edges.emplace_back(a, ddst(rng));
        }
    }
    uint32_t nneg = dneg(rng);
    for (uint32_t e = 0; e < nneg; ++e) {
        for (int attempt = 0; attempt < 20; ++attempt) {
            uint32_t a = dstate(rng), b = dstate(rng);
            if (a == b) continue;
            std::pair<uint32_t, uint32_t> cand{a, b};
            if (std::find(s.pos_edges.begin(), s.pos_edges.end(), cand) != s.pos_edges.end())
                continue;
            s.neg_edges.push_back(cand);
            break;
        }
    }
    return s;
}

//! True iff some feature ordering admits, for every feature, a support of at
//! most k earlier features under which it is monotone. The usable supports
//! are precomputed per feature so the factorial scan stays cheap.
bool permutation_oracle(const termination::ChangeMatrix& m, uint32_t k) {
    const uint32_t nf = m.num_features;
    std::vector<std::vector<uint32_t>> good(nf);  // support masks per feature
    for (uint32_t f = 0; f < nf; ++f) {
        for (uint32_t mask = 0; mask < (1u << nf); ++mask) {
            if (mask & (1u << f)) continue;
            if (static_cast<uint32_t>(__builtin_popcount(mask)) > k) continue;
            std::vector<uint32_t> support;
            for (uint32_t g = 0; g < nf; ++g)
                if ((mask >> g) & 1) support.push_back(g);
            if (termination::monotone_given(m, f, support)) good[f].push_back(mask);
        }
    }
    std::vector<uint32_t> perm(nf);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        uint32_t placed = 0;
        bool all_ok = true;
        for (uint32_t i = 0; i < nf && all_ok; ++i) {
            bool found = false;
            for (uint32_t s : good[perm[i]])
                if ((s & placed) == s) {
                    found = true;
                    break;
                }
            all_ok = found;
            placed |= 1u << perm[i];
        }
        if (all_ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

policy::Policy random_policy(std::mt19937& rng) {
    std::uniform_int_distribution<uint32_t> dnf(1, 6), dnr(1, 10);
    const uint32_t nf = dnf(rng), nr = dnr(rng);
    policy::Policy p;
    std::bernoulli_distribution dbool(0.4), dcond(0.4), deff(0.5);
    for (uint32_t f = 0; f < nf; ++f) {
        p.pool_ids.push_back(f);
        p.kinds_boolean.push_back(dbool(rng));
    }
    std::uniform_int_distribution<int> dtwo(0, 1), dthree(0, 2);
    for (uint32_t r = 0; r < nr; ++r) {
        policy::Rule rule;
        for (uint32_t f = 0; f < nf; ++f) {
            if (dcond(rng)) {
                if (p.kinds_boolean[f])
                    rule.conds.push_back({f, dtwo(rng) ? policy::CondTest::BoolTrue
                                                       : policy::CondTest::BoolFalse});
                else
                    rule.conds.push_back(
                        {f, dtwo(rng) ? policy::CondTest::Gt0 : policy::CondTest::Eq0});
            }
            if (deff(rng)) {
                if (p.kinds_boolean[f]) {
                    policy::EffectOp ops[] = {policy::EffectOp::SetTrue, policy::EffectOp::SetFalse,
                                              policy::EffectOp::UnkBool};
                    rule.effs.push_back({f, ops[dthree(rng)]});
                } else {
                    policy::EffectOp ops[] = {policy::EffectOp::Inc, policy::EffectOp::Dec,
                                              policy::EffectOp::UnkNum};
                    rule.effs.push_back({f, ops[dthree(rng)]});
                }
            }
        }
        p.add_rule(rule);
    }
    return p;
}

struct LearnedDomain {
    std::vector<strips::Instance> instances;  // training first, then evaluation
    std::optional<wrapper::LearnSuccess> learned;
};

LearnedDomain learn_domain(const std::string& dom_rel, const std::vector<std::string>& train,
                           const std::vector<std::string>& eval_probs, Criterion& c) {
    LearnedDomain out;
    for (const auto& p : train) out.instances.push_back(testsup::load_instance(dom_rel, p));
    for (const auto& p : eval_probs) out.instances.push_back(testsup::load_instance(dom_rel, p));
    std::vector<wrapper::TrainingInstance> training;
    for (std::size_t i = 0; i < train.size(); ++i)
        training.push_back({train[i], &out.instances[i]});
    wrapper::Options opts;
    opts.complexity_bound = 6;
    opts.jobs = 4;
    auto r = wrapper::learn(training, opts);
    if (auto* s = std::get_if<wrapper::LearnSuccess>(&r))
        out.learned = std::move(*s);
    else
        c.expect(false, "learning failed on " + dom_rel + ": " +
                            std::get<wrapper::LearnFailure>(r).detail);
    return out;
}

//! Follows one serialized-width trajectory under the policy; returns
//! (covered, max segment width) with a hard cap on segment count.
std::pair<bool, int> width_walk(const strips::Instance& inst,
                                const features::FeaturePool& pool,
                                const policy::Policy& pi, int max_width) {
    auto actions = strips::ground(inst);
    features::Evaluator ev(inst, pool.registry());
    strips::State cur = inst.initial_state();
    int maxw = 0;
    for (int seg = 0; seg < 500; ++seg) {
        if (strips::is_goal(inst, cur)) return {true, maxw};
        auto vs = policy::policy_values(pi, pool, ev, cur);
        auto accept = [&](const strips::State&, const strips::State& cand) {
            return policy::compatible(pi, vs, policy::policy_values(pi, pool, ev, cand));
        };
        auto res = planner::iw_search(inst, actions, cur, max_width, accept);
        if (!res) return {false, maxw};
        maxw = std::max(maxw, res->width);
        cur = std::move(res->state);
    }
    return {false, maxw};
}

// ---- random instance generation over the fixture domains ----

std::string obj(const std::string& stem, uint32_t i) { return stem + std::to_string(i); }

strips::InstanceSpec random_gripper(std::mt19937& rng, int idx) {
    strips::InstanceSpec spec;
    spec.name = "rand-gripper-" + std::to_string(idx);
    spec.domain_name = "gripper";
    std::uniform_int_distribution<uint32_t> dn(1, 4);
    std::uniform_int_distribution<int> droom(0, 1);
    const uint32_t n = dn(rng);
    const char* rooms[] = {"rooma", "roomb"};
    spec.objects.push_back({"left", "gripper"});
    spec.objects.push_back({"right", "gripper"});
    spec.init.push_back({"at-robby", {rooms[droom(rng)]}});
    spec.init.push_back({"free", {"left"}});
    spec.init.push_back({"free", {"right"}});
    bool any_goal = false;
    for (uint32_t i = 1; i <= n; ++i) {
        spec.objects.push_back({obj("b", i), "ball"});
        spec.init.push_back({"at", {obj("b", i), rooms[droom(rng)]}});
        if (droom(rng) || (i == n && !any_goal)) {
            spec.goal.push_back({"at", {obj("b", i), rooms[droom(rng)]}});
            any_goal = true;
        }
    }
    return spec;
}

strips::InstanceSpec random_blocks(std::mt19937& rng, int idx) {
    strips::InstanceSpec spec;
    spec.name = "rand-blocks-" + std::to_string(idx);
    spec.domain_name = "blocks";
    std::uniform_int_distribution<uint32_t> dn(2, 5);
    const uint32_t n = dn(rng);
    std::vector<std::string> names;
    for (uint32_t i = 1; i <= n; ++i) {
        names.push_back(obj("x", i));
        spec.objects.push_back({names.back(), "block"});
    }
    std::shuffle(names.begin(), names.end(), rng);
    spec.init.push_back({"handempty", {}});
    std::bernoulli_distribution dnew(0.4);
    std::string below;
    for (const auto& b : names) {
        if (below.empty() || dnew(rng)) {
            spec.init.push_back({"ontable", {b}});
            if (!below.empty()) spec.init.push_back({"clear", {below}});
        } else {
            spec.init.push_back({"on", {b, below}});
        }
        below = b;
    }
    spec.init.push_back({"clear", {below}});
    std::uniform_int_distribution<uint32_t> dpick(0, n - 1);
    std::uniform_int_distribution<int> dgoal(0, 9);
    int g = dgoal(rng);
    if (g < 2) {
        spec.goal.push_back({"on", {names[0], names[0]}});  // never achievable
    } else if (g < 6) {
        spec.goal.push_back({"clear", {names[dpick(rng)]}});
    } else {
        uint32_t a = dpick(rng), b = dpick(rng);
        if (a == b) b = (b + 1) % n;
        spec.goal.push_back({"on", {names[a], names[b]}});
    }
    return spec;
}

strips::InstanceSpec random_delivery(std::mt19937& rng, int idx) {
    strips::InstanceSpec spec;
    spec.name = "rand-delivery-" + std::to_string(idx);
    spec.domain_name = "delivery";
    std::uniform_int_distribution<uint32_t> dcells(3, 5), dpkgs(1, 2);
    const uint32_t nc = dcells(rng), np = dpkgs(rng);
    for (uint32_t i = 1; i <= nc; ++i) spec.objects.push_back({obj("c", i), "cell"});
    for (uint32_t i = 1; i <= np; ++i) spec.objects.push_back({obj("p", i), "pkg"});
    std::uniform_int_distribution<uint32_t> dcell(1, nc);
    std::bernoulli_distribution dbreak(0.4);
    uint32_t broken = 0;  // optionally sever one link to create unreachable goals
    if (dbreak(rng)) broken = 1 + dcell(rng) % (nc - 1);
    for (uint32_t i = 1; i < nc; ++i)
        if (i != broken) spec.init.push_back({"succ", {obj("c", i), obj("c", i + 1)}});
    spec.init.push_back({"truckat", {obj("c", dcell(rng))}});
    spec.init.push_back({"handfree", {}});
    for (uint32_t i = 1; i <= np; ++i)
        spec.init.push_back({"pkgat", {obj("p", i), obj("c", dcell(rng))}});
    spec.goal.push_back({"pkgat", {obj("p", 1), obj("c", dcell(rng))}});
    return spec;
}

//! Exhaustive reachability data for one instance: every reachable state, its
//! successor list, and the shortest goal distance (UINT32_MAX if none).
struct GraphOracle {
    std::vector<strips::State> states;
    std::vector<std::vector<uint32_t>> adj;
    std::vector<uint32_t> dist_to_goal;
    bool overflow = false;

    explicit GraphOracle(const strips::Instance& inst,
                         const std::vector<strips::GroundAction>& actions) {
        std::unordered_map<strips::State, uint32_t, strips::StateHash> ids;
        auto intern = [&](const strips::State& s) -> uint32_t {
            auto it = ids.find(s);
            if (it != ids.end()) return it->second;
            uint32_t id = static_cast<uint32_t>(states.size());
            ids.emplace(s, id);
            states.push_back(s);
            adj.emplace_back();
            return id;
        };
        intern(inst.initial_state());
        for (uint32_t u = 0; u < states.size(); ++u) {
            if (states.size() > 20000) {
                overflow = true;
                return;
            }
            for (auto& [ai, t] : strips::successors(states[u], actions)) {
                (void)ai;
                uint32_t v = intern(t);  // may grow `adj`, so index afterwards
                adj[u].push_back(v);
            }
        }
        std::vector<std::vector<uint32_t>> radj(states.size());
        for (uint32_t u = 0; u < states.size(); ++u)
            for (auto v : adj[u]) radj[v].push_back(u);
        dist_to_goal.assign(states.size(), UINT32_MAX);
        std::queue<uint32_t> q;
        for (uint32_t u = 0; u < states.size(); ++u)
            if (strips::is_goal(inst, states[u])) {
                dist_to_goal[u] = 0;
                q.push(u);
            }
        while (!q.empty()) {
            uint32_t u = q.front();
            q.pop();
            for (auto v : radj[u])
                if (dist_to_goal[v] == UINT32_MAX) {
                    dist_to_goal[v] = dist_to_goal[u] + 1;
                    q.push(v);
                }
        }
    }
};

}  // namespace

TEST_CASE("criterion 1: gripper ranking and context sets match the goldens") {
    Criterion c("criterion 1: gripper ranking and context sets match the goldens");
    auto m = termination::matrix_from_rules(gripper_rules());
    using termination::ValTag;
    c.expect(termination::rho(m, 0, ValTag::Zero) == std::vector<uint32_t>{1, 2, 3},
             "context of f0 at zero");
    c.expect(termination::rho(m, 0, ValTag::Pos) == std::vector<uint32_t>{1, 2, 3},
             "context of f0 when positive");
    c.expect(termination::rho(m, 1, ValTag::Zero) == std::vector<uint32_t>{0, 3},
             "context of f1 at zero");
    c.expect(termination::rho(m, 1, ValTag::Pos) == std::vector<uint32_t>{0, 2},
             "context of f1 when positive");
    auto res = termination::stratify(m, {4, 1, 3}, 1);
    c.expect(res.ok, "reference rules must stratify");
    if (res.ok) {
        c.expect(res.ranking.at(0).rank == 0 && res.ranking.at(0).support.empty(),
                 "f0 is the root");
        c.expect(res.ranking.at(1).rank == 1 &&
                     res.ranking.at(1).support == std::vector<uint32_t>{0},
                 "f1 rides f0");
        c.expect(res.ranking.at(2).rank == 2 &&
                     res.ranking.at(2).support == std::vector<uint32_t>{1},
                 "f2 rides f1");
    }
    c.within(1.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 2: blocks dichotomy and a detected cycle") {
    Criterion c("criterion 2: blocks dichotomy and a detected cycle");
    auto crisp = termination::stratify_rules(two_rule_blocks(false), {2, 1}, 1);
    c.expect(crisp.ok, "crisp rules must stratify");
    if (crisp.ok) {
        c.expect(crisp.ranking.at(0).rank == 0, "count feature first");
        c.expect(crisp.ranking.at(1).rank == 1 &&
                     crisp.ranking.at(1).support == std::vector<uint32_t>{0},
                 "holding flag supported by the count");
    }
    auto loose = termination::stratify_rules(two_rule_blocks(true), {2, 1}, 1);
    c.expect(!loose.ok, "loosened rules must not stratify");
    c.expect(loose.unranked == std::vector<uint32_t>{0, 1}, "both features unrankable");
    c.expect(loose.ranking.empty(), "no partial ranking reported");

    // the same loosened shape really cycles when executed
    auto inst = testsup::load_instance("blocks/domain.pddl", "blocks/p-clear-3.pddl");
    auto actions = strips::ground(inst);
    features::Registry reg(inst.domain());
    auto h = reg.parse_concept("(prim holding 0)");
    auto n = reg.parse_concept("(some (tc (role on)) (goal clear 0))");
    std::vector<features::Feature> fs = {{0, false, n, reg.concept_at(n).complexity},
                                         {1, true, h, 1}};
    features::FeaturePool pool(std::move(reg), std::move(fs), 6, 0, 0, 0);
    policy::Policy p;
    p.pool_ids = {0, 1};
    p.kinds_boolean = {false, true};
    policy::Rule up;
    up.conds = {{0, policy::CondTest::Gt0}, {1, policy::CondTest::BoolFalse}};
    up.effs = {{0, policy::EffectOp::Dec}, {1, policy::EffectOp::SetTrue}};
    policy::Rule down;
    down.conds = {{1, policy::CondTest::BoolTrue}};
    down.effs = {{0, policy::EffectOp::UnkNum}, {1, policy::EffectOp::SetFalse}};
    p.add_rule(up);
    p.add_rule(down);
    planner::DeadEndCache cache(inst, actions);
    auto v = policy::analyze(inst, actions, pool, p, cache);
    c.expect(v.kind == policy::VerdictKind::Cyclic, "flip-flop must be reported cyclic");
    c.within(1.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 3: stratification agrees with the permutation oracle") {
    Criterion c("criterion 3: stratification agrees with the permutation oracle");
    std::mt19937 rng(1003);
    std::uniform_int_distribution<uint32_t> dk(1, 2), dcost(1, 4);
    int trials = 0, stratified = 0;
    for (int t = 0; t < 1000; ++t) {
        auto p = random_policy(rng);
        auto m = termination::matrix_from_rules(p);
        std::vector<uint32_t> costs;
        for (uint32_t f = 0; f < m.num_features; ++f) costs.push_back(dcost(rng));
        uint32_t k = dk(rng);
        auto res = termination::stratify(m, costs, k);
        bool oracle = permutation_oracle(m, k);
        ++trials;
        if (res.ok) ++stratified;
        if (res.ok != oracle) {
            c.expect(false, "disagreement at trial " + std::to_string(t) + ": stratify says " +
                                (res.ok ? "yes" : "no"));
            break;
        }
        if (res.ok) {
            for (const auto& [f, entry] : res.ranking) {
                c.expect(entry.support.size() <= k, "support too large");
                for (auto g : entry.support)
                    c.expect(res.ranking.at(g).rank < entry.rank,
                             "support not ranked below its feature");
                c.expect(termination::monotone_given(m, f, entry.support),
                         "certificate does not hold");
            }
            if (!c.ok) break;
        }
    }
    c.expect(trials == 1000, "all trials must run");
    c.expect(stratified > 20 && stratified < 980, "trial mix is degenerate");
    c.within(60.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 4: selected features always certify their sample") {
    Criterion c("criterion 4: selected features always certify their sample");
    std::mt19937 rng(1004);
    int successes = 0, trials = 0;
    const int want = 500, cap = 20000;
    while (successes < want && trials < cap && c.ok) {
        ++trials;
        auto sigs = random_sigs(rng, false);
        auto r = genex::run_genex(sigs);
        if (!std::holds_alternative<genex::Success>(r)) continue;
        ++successes;
        const auto& sel = std::get<genex::Success>(r);
        auto hsp = genex::build_hsp(sigs);
        c.expect(hits_all(hsp, sel.features),
                 "selection leaves a subset unhit at trial " + std::to_string(trials));
        auto pi = project_policy(sigs, sel.features);
        for (const auto& [s, t] : sigs.pos_edges)
            c.expect(policy::compatible(pi, restrict_row(sigs.state_values[s], sel.features),
                                        restrict_row(sigs.state_values[t], sel.features)),
                     "a good edge is not covered at trial " + std::to_string(trials));
        for (const auto& [s, t] : sigs.neg_edges)
            c.expect(!policy::compatible(pi, restrict_row(sigs.state_values[s], sel.features),
                                         restrict_row(sigs.state_values[t], sel.features)),
                     "a bad edge slipped through at trial " + std::to_string(trials));
        std::vector<uint32_t> costs;
        for (auto f : sel.features) costs.push_back(sigs.costs[f]);
        c.expect(termination::stratify_rules(pi, costs, 1).ok,
                 "projected rules do not stratify at trial " + std::to_string(trials));
    }
    c.expect(successes >= want, "only " + std::to_string(successes) + " successful selections");
    c.within(120.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 5: reported failures are almost always real") {
    Criterion c("criterion 5: reported failures are almost always real");
    std::mt19937 rng(1005);
    int failures = 0, unfixable = 0, trials = 0;
    const int want = 200, cap = 30000;
    while (failures < want && trials < cap) {
        ++trials;
        auto sigs = random_sigs(rng, true);
        auto r = genex::run_genex(sigs);
        if (!std::holds_alternative<genex::Failure>(r)) continue;
        ++failures;
        const uint32_t nf = static_cast<uint32_t>(sigs.num_features());
        auto hsp = genex::build_hsp(sigs);
        bool any_valid = false;
        for (uint32_t mask = 1; mask < (1u << nf) && !any_valid; ++mask) {
            std::vector<uint32_t> scope;
            for (uint32_t f = 0; f < nf; ++f)
                if ((mask >> f) & 1) scope.push_back(f);
            if (!hits_all(hsp, scope)) continue;
            auto pi = project_policy(sigs, scope);
            std::vector<uint32_t> unit(scope.size(), 1);
            any_valid = termination::stratify_rules(pi, unit, 1).ok;
        }
        if (!any_valid) ++unfixable;
    }
    c.expect(failures >= want, "only " + std::to_string(failures) + " failures collected");
    c.expect(unfixable * 100 >= failures * 95,
             std::to_string(failures - unfixable) + " of " + std::to_string(failures) +
                 " failures had a valid selection");
    c.within(120.0);
    if (unfixable < failures)
        std::printf("  note: %d of %d reported failures admitted a valid selection\n",
                    failures - unfixable, failures);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 6: gripper policy generalizes and walks at width zero") {
    Criterion c("criterion 6: gripper policy generalizes and walks at width zero");
    namespace fs = std::filesystem;
    auto tmp = [](const char* n) {
        return (fs::temp_directory_path() / (std::string("genplan_acc_") + n)).string();
    };
    auto d = [](const std::string& rel) { return testsup::data_path(rel); };
    auto read_json = [](const std::string& path) {
        std::ifstream in(path);
        return nlohmann::json::parse(in);
    };
    const std::string pol = tmp("g6_policy.json"), rep = tmp("g6_report.json"),
                      vrep = tmp("g6_verify.json"), wrep = tmp("g6_width.json");

    int rc = cli::run({"learn", d("gripper/domain.pddl"), d("gripper/p-2ball.pddl"),
                       d("gripper/p-3ball.pddl"), d("gripper/p-4ball.pddl"), "--complexity", "6",
                       "--jobs", "4", "--out", pol, "--report", rep});
    c.expect(rc == 0, "learn exit code " + std::to_string(rc));
    if (rc == 0) {
        auto polj = read_json(pol);
        c.expect(polj["features"].size() <= 5,
                 "too many features: " + std::to_string(polj["features"].size()));
        c.expect(polj["rules"].size() <= 8,
                 "too many rules: " + std::to_string(polj["rules"].size()));
        c.expect(read_json(rep)["stratified"].get<bool>(), "policy must come with a ranking");

        rc = cli::run({"verify", d("gripper/domain.pddl"), d("gripper/p-10ball.pddl"),
                       d("gripper/p-20ball.pddl"), "--policy", pol, "--jobs", "2", "--report",
                       vrep});
        c.expect(rc == 0, "verify exit code " + std::to_string(rc));
        if (rc == 0)
            for (const auto& row : read_json(vrep))
                c.expect(row["verdict"] == "solves",
                         row["instance"].get<std::string>() + ": " +
                             row["verdict"].get<std::string>());

        rc = cli::run({"width", d("gripper/domain.pddl"), d("gripper/p-10ball.pddl"),
                       d("gripper/p-20ball.pddl"), "--policy", pol, "--report", wrep});
        c.expect(rc == 0, "width exit code " + std::to_string(rc));
        if (rc == 0) {
            auto wj = read_json(wrep);
            c.expect(wj["covered"] == 2 && wj["total"] == 2, "coverage below 100%");
            c.expect(wj["max_width"] == 0,
                     "max width " + std::to_string(wj["max_width"].get<int>()));
        }
    }
    for (const auto& p : {pol, rep, vrep, wrep}) fs::remove(p);
    c.within(300.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 7: blocks policy converges quickly and scales") {
    Criterion c("criterion 7: blocks policy converges quickly and scales");
    auto got = learn_domain("blocks/domain.pddl",
                            {"blocks/p-clear-3.pddl", "blocks/p-clear-4.pddl",
                             "blocks/p-clear-5.pddl"},
                            {"blocks/p-clear-10a.pddl", "blocks/p-clear-10b.pddl"}, c);
    if (got.learned) {
        const auto& s = *got.learned;
        c.expect(s.report.outer <= 2, "outer iterations: " + std::to_string(s.report.outer));
        c.expect(s.report.inner_total <= 2,
                 "selection rounds: " + std::to_string(s.report.inner_total));
        for (std::size_t i = 3; i < got.instances.size(); ++i) {
            const auto& inst = got.instances[i];
            auto actions = strips::ground(inst);
            planner::DeadEndCache cache(inst, actions);
            auto v = policy::analyze(inst, actions, s.pool, s.policy, cache);
            c.expect(v.kind == policy::VerdictKind::Solves,
                     inst.name() + " not solved by the learned policy");
        }
    }
    c.within(300.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 8: spanner needs and uses negative examples") {
    Criterion c("criterion 8: spanner needs and uses negative examples");
    // The spanner sits two walks from the start: the seed plan's second
    // uncarried walk projects to a rule that also matches walking past the
    // spanner, so verification must discover the dead end and label it bad.
    auto got = learn_domain("spanner/domain.pddl", {"spanner/p-1nut-far.pddl"}, {}, c);
    if (got.learned) {
        const auto& s = *got.learned;
        c.expect(s.report.xminus >= 1, "no negative examples were ever needed");
        c.expect(s.report.stratified, "policy must come with a ranking");
        auto [covered, maxw] = width_walk(got.instances[0], s.pool, s.policy, 2);
        (void)maxw;
        c.expect(covered, "trajectory did not reach the goal");
    }
    c.within(300.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 9: learned policies never cycle") {
    Criterion c("criterion 9: learned policies never cycle");
    struct Run {
        std::string dom;
        std::vector<std::string> train, eval;
    };
    std::vector<Run> runs = {
        {"gripper/domain.pddl",
         {"gripper/p-2ball.pddl", "gripper/p-3ball.pddl"},
         {"gripper/p-1ball.pddl", "gripper/p-4ball.pddl", "gripper/p-10ball.pddl",
          "gripper/p-20ball.pddl"}},
        {"blocks/domain.pddl",
         {"blocks/p-clear-3.pddl", "blocks/p-clear-4.pddl"},
         {"blocks/p-clear-5.pddl", "blocks/p-clear-10a.pddl", "blocks/p-clear-10b.pddl"}},
        {"spanner/domain.pddl",
         {"spanner/p-1nut.pddl"},
         {"spanner/p-1nut-4loc.pddl", "spanner/p-1nut-far.pddl"}},
    };
    int cyclic = 0, analyzed = 0;
    for (const auto& run : runs) {
        auto got = learn_domain(run.dom, run.train, run.eval, c);
        if (!got.learned) continue;
        for (const auto& inst : got.instances) {
            auto actions = strips::ground(inst);
            planner::DeadEndCache cache(inst, actions);
            try {
                auto v = policy::analyze(inst, actions, got.learned->pool, got.learned->policy,
                                         cache, Budget::nodes(2000000));
                ++analyzed;
                if (v.kind == policy::VerdictKind::Cyclic) ++cyclic;
            } catch (const BudgetExceeded&) {
                // undecided is acceptable; a cycle would have been found within budget
            }
        }
    }
    c.expect(analyzed >= 8, "too few verdicts: " + std::to_string(analyzed));
    c.expect(cyclic == 0, std::to_string(cyclic) + " cyclic verdicts");
    c.within(300.0);
    CHECK_MESSAGE(c.finish(), c.note);
}

TEST_CASE("criterion 10: search agrees with a brute-force oracle") {
    Criterion c("criterion 10: search agrees with a brute-force oracle");
    auto gripper = testsup::load_domain("gripper/domain.pddl");
    auto blocks = testsup::load_domain("blocks/domain.pddl");
    auto delivery = testsup::load_domain("delivery/domain.pddl");
    std::mt19937 rng(1010);
    int solved = 0, unsolvable = 0, checked_states = 0;
    for (int i = 0; i < 50 && c.ok; ++i) {
        strips::InstanceSpec spec;
        const strips::DomainSpec* dom;
        switch (i % 3) {
            case 0: spec = random_gripper(rng, i); dom = &gripper; break;
            case 1: spec = random_blocks(rng, i); dom = &blocks; break;
            default: spec = random_delivery(rng, i); dom = &delivery; break;
        }
        strips::Instance inst(*dom, spec);
        auto actions = strips::ground(inst);
        GraphOracle oracle(inst, actions);
        c.expect(!oracle.overflow, spec.name + " exceeds the state cap");
        if (oracle.overflow) break;

        auto res = planner::solve(inst, actions, inst.initial_state());
        if (oracle.dist_to_goal[0] == UINT32_MAX) {
            ++unsolvable;
            c.expect(std::holds_alternative<planner::Unsolvable>(res),
                     spec.name + " found a plan the oracle says cannot exist");
        } else {
            ++solved;
            bool has_plan = std::holds_alternative<planner::Plan>(res);
            c.expect(has_plan, spec.name + " not solved");
            if (has_plan)
                c.expect(std::get<planner::Plan>(res).length() == oracle.dist_to_goal[0],
                         spec.name + " plan is not shortest");
        }

        std::uniform_int_distribution<uint32_t> dstate(
            0, static_cast<uint32_t>(oracle.states.size() - 1));
        for (int probe = 0; probe < 15; ++probe) {
            uint32_t u = dstate(rng);
            auto cls = planner::classify(inst, actions, oracle.states[u]);
            ++checked_states;
            if (strips::is_goal(inst, oracle.states[u]))
                c.expect(cls == planner::StateClass::Goal, spec.name + " goal state misjudged");
            else if (oracle.dist_to_goal[u] != UINT32_MAX)
                c.expect(cls == planner::StateClass::Alive, spec.name + " live state misjudged");
            else
                c.expect(cls == planner::StateClass::DeadEnd,
                         spec.name + " dead state misjudged");
        }
    }
    c.expect(solved >= 20, "too few solvable instances: " + std::to_string(solved));
    c.expect(unsolvable >= 3, "too few unsolvable instances: " + std::to_string(unsolvable));
    c.expect(checked_states >= 500, "too few state probes");
    c.within(60.0);
    CHECK_MESSAGE(c.finish(), c.note);
}
