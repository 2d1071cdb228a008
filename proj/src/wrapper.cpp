#include "genplan/wrapper.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "genplan/termination.hpp"

namespace genplan::wrapper {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string reason_name(FailReason r) {
    switch (r) {
        case FailReason::Edge: return "edge";
        case FailReason::Exhausted: return "exhausted";
        case FailReason::Timeout: return "timeout";
    }
    return "?";
}

std::string RunReport::to_table() const {
    const char* heads[] = {"|Q|", "|S|",  "|F|",    "Strat.", "Outer", "Inner", "|Q'|",
                           "|X+|", "|X-|", "|H|",    "|G|",    "|pi|"};
    std::string cells[] = {std::to_string(num_instances),
                           std::to_string(seed_expanded),
                           std::to_string(pool_size),
                           stratified ? "yes" : "no",
                           std::to_string(outer),
                           std::to_string(inner_total) + "/" + std::to_string(inner_last),
                           std::to_string(active_size),
                           std::to_string(xplus),
                           std::to_string(xminus),
                           std::to_string(hsp_size),
                           std::to_string(scope),
                           std::to_string(rules)};
    const std::size_t n = sizeof(heads) / sizeof(heads[0]);
    std::ostringstream head, body;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = std::max(std::string(heads[i]).size(), cells[i].size());
        head << heads[i] << std::string(w - std::string(heads[i]).size() + 2, ' ');
        body << cells[i] << std::string(w - cells[i].size() + 2, ' ');
    }
    char times[128];
    std::snprintf(times, sizeof(times), "Prep %.2fs  Select %.2fs  Verify %.2fs  Total %.2fs",
                  prep_seconds, genex_seconds, verify_seconds, total_seconds);
    return head.str() + "\n" + body.str() + "\n" + times + "\n";
}

std::string RunReport::to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["instances"] = num_instances;
    j["seed_expanded"] = seed_expanded;
    j["pool_size"] = pool_size;
    j["stratified"] = stratified;
    j["outer"] = outer;
    j["inner_total"] = inner_total;
    j["inner_last"] = inner_last;
    j["active_size"] = active_size;
    j["xplus"] = xplus;
    j["xminus"] = xminus;
    j["hsp_size"] = hsp_size;
    j["scope"] = scope;
    j["rules"] = rules;
    j["prep_seconds"] = prep_seconds;
    j["genex_seconds"] = genex_seconds;
    j["verify_seconds"] = verify_seconds;
    j["total_seconds"] = total_seconds;
    return j.dump(2) + "\n";
}

std::optional<uint32_t> next_singleton(uint32_t current, uint32_t failing, uint32_t count,
                                       const std::vector<bool>& visited) {
    uint32_t cand = failing > current ? failing : current + 1;
    if (cand >= count || visited[cand]) return std::nullopt;
    return cand;
}

std::vector<uint32_t> next_active_set(const std::vector<uint32_t>& active, uint32_t failing) {
    if (active.empty() || failing >= active.back()) return {failing};
    std::vector<uint32_t> out = active;
    auto it = std::lower_bound(out.begin(), out.end(), failing);
    if (it == out.end() || *it != failing) out.insert(it, failing);
    return out;
}

policy::Policy simplify_policy(
    const policy::Policy& pi, const policy::Ranking& certificate,
    const std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>>& neg_pairs) {
    auto acceptable = [&](const policy::Policy& cand) {
        auto m = termination::matrix_from_rules(cand);
        if (!termination::all_entail_change(m)) return false;
        for (const auto& [f, entry] : certificate)
            if (!termination::monotone_given(m, f, entry.support)) return false;
        for (const auto& [vs, vt] : neg_pairs)
            if (policy::compatible(cand, vs, vt)) return false;
        return true;
    };

    policy::Policy cur = pi;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t ri = 0; ri < cur.rules.size(); ++ri) {
            std::vector<uint32_t> fs;
            for (const auto& c : cur.rules[ri].conds) fs.push_back(c.f);
            for (uint32_t f : fs) {
                policy::Policy cand = cur;
                auto& conds = cand.rules[ri].conds;
                auto it = std::find_if(conds.begin(), conds.end(),
                                       [&](const policy::Cond& c) { return c.f == f; });
                if (it == conds.end()) continue;
                conds.erase(it);
                if (acceptable(cand)) {
                    cur = std::move(cand);
                    changed = true;
                }
            }
            fs.clear();
            for (const auto& e : cur.rules[ri].effs) fs.push_back(e.f);
            for (uint32_t f : fs) {
                policy::Policy cand = cur;
                auto& effs = cand.rules[ri].effs;
                auto it = std::find_if(effs.begin(), effs.end(),
                                       [&](const policy::Eff& e) { return e.f == f; });
                if (it == effs.end()) continue;
                if (it->op == policy::EffectOp::UnkBool || it->op == policy::EffectOp::UnkNum)
                    continue;
                it->op = cand.kinds_boolean[f] ? policy::EffectOp::UnkBool : policy::EffectOp::UnkNum;
                if (acceptable(cand)) {
                    cur = std::move(cand);
                    changed = true;
                }
            }
        }
    }

    policy::Policy out;
    out.pool_ids = cur.pool_ids;
    out.kinds_boolean = cur.kinds_boolean;
    for (auto& r : cur.rules) out.add_rule(std::move(r));
    return out;
}

LearnResult learn(const std::vector<TrainingInstance>& instances, const Options& opts) {
    const auto t_start = Clock::now();
    RunReport rep;

    auto fail = [&](FailReason r, std::string detail) {
        rep.total_seconds = seconds_since(t_start);
        return LearnResult{LearnFailure{r, std::move(detail), rep}};
    };

    if (instances.empty()) return fail(FailReason::Exhausted, "no training instances");
    const strips::DomainSpec& domain = instances[0].instance->domain();
    for (const auto& ti : instances)
        if (ti.instance->domain().name != domain.name)
            throw std::runtime_error("training instances span different domains");

    std::optional<Clock::time_point> deadline;
    if (opts.time_budget > 0)
        deadline = t_start + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(opts.time_budget));
    const Budget budget{opts.node_budget, deadline};

    // Seed: ground and solve everything; unsolvable instances are dropped.
    const auto t_prep = Clock::now();
    struct Seeded {
        std::string name;
        const strips::Instance* instance;
        std::vector<strips::GroundAction> actions;
        planner::Plan plan;
    };
    std::vector<Seeded> seeded;
    for (const auto& ti : instances) {
        auto actions = strips::ground(*ti.instance);
        auto res = planner::solve(*ti.instance, actions, ti.instance->initial_state(), budget);
        if (std::holds_alternative<planner::OutOfBudget>(res))
            return fail(FailReason::Timeout, "seed search ran out of budget on " + ti.name);
        if (std::holds_alternative<planner::Unsolvable>(res)) continue;
        auto& plan = std::get<planner::Plan>(res);
        rep.seed_expanded += plan.expanded;
        seeded.push_back({ti.name, ti.instance, std::move(actions), std::move(plan)});
    }
    // Hardest first: refining on long plans generalizes fastest.
    std::sort(seeded.begin(), seeded.end(), [](const Seeded& a, const Seeded& b) {
        if (a.plan.length() != b.plan.length()) return a.plan.length() > b.plan.length();
        return a.name < b.name;
    });
    const uint32_t nq = static_cast<uint32_t>(seeded.size());
    rep.num_instances = nq;
    if (nq == 0) return fail(FailReason::Exhausted, "no solvable training instances");

    std::vector<std::vector<genex::LabeledTransition>> seeds(nq);
    features::Sample sample;
    for (uint32_t i = 0; i < nq; ++i) {
        for (const auto& [s, t] : seeded[i].plan.transitions) {
            seeds[i].push_back({seeded[i].instance, s, t});
            sample.push_back({seeded[i].instance, s, t});
        }
    }
    std::vector<std::unique_ptr<planner::DeadEndCache>> caches;
    for (uint32_t i = 0; i < nq; ++i)
        caches.push_back(
            std::make_unique<planner::DeadEndCache>(*seeded[i].instance, seeded[i].actions));

    if (sample.empty()) {
        // Every kept instance starts at its goal; the empty policy solves them all.
        rep.stratified = true;
        rep.active_size = nq;
        rep.outer = 1;
        rep.prep_seconds = seconds_since(t_prep);
        rep.total_seconds = seconds_since(t_start);
        features::FeaturePool pool =
            opts.pool ? *opts.pool
                      : features::FeaturePool(features::Registry(domain), {}, opts.complexity_bound,
                                              opts.depth_bound, 0, 0);
        rep.pool_size = pool.size();
        return LearnSuccess{policy::Policy{}, std::move(pool), {}, rep};
    }

    features::FeaturePool pool =
        opts.pool ? *opts.pool
                  : features::generate_pool(domain, sample, opts.complexity_bound, opts.depth_bound);
    rep.pool_size = pool.size();
    rep.prep_seconds = seconds_since(t_prep);

    // Per-instance labeled transitions; counterexamples accumulate here.
    std::vector<std::vector<genex::LabeledTransition>> xp = seeds;
    std::vector<std::vector<genex::LabeledTransition>> xn(nq);
    std::vector<uint32_t> active{0};
    std::vector<bool> s1_visited(nq, false);
    s1_visited[0] = true;
    Strategy cur = opts.strategy == Strategy::Auto ? Strategy::S1 : opts.strategy;
    uint64_t s2_rounds = 0;
    const uint64_t s2_bound = static_cast<uint64_t>(nq) * nq;

    policy::Policy pi;
    policy::Ranking cert;

    // Full-training check; returns the first failing instance. Analysis
    // errors are reported for the smallest failing index.
    auto first_failing = [&](const policy::Policy& p) -> std::optional<uint32_t> {
        std::vector<char> bad(nq, 0);
        std::vector<std::exception_ptr> errs(nq);
        std::atomic<uint32_t> next{0};
        auto work = [&]() {
            for (;;) {
                uint32_t i = next.fetch_add(1);
                if (i >= nq) return;
                try {
                    auto v = policy::analyze(*seeded[i].instance, seeded[i].actions, pool, p,
                                             *caches[i], budget);
                    bad[i] = v.kind != policy::VerdictKind::Solves;
                } catch (...) {
                    errs[i] = std::current_exception();
                }
            }
        };
        uint32_t jobs = std::min(std::max(opts.jobs, 1u), nq);
        if (jobs <= 1) {
            work();
        } else {
            std::vector<std::thread> pool_;
            for (uint32_t t = 0; t < jobs; ++t) pool_.emplace_back(work);
            for (auto& th : pool_) th.join();
        }
        for (uint32_t i = 0; i < nq; ++i)
            if (errs[i]) std::rethrow_exception(errs[i]);
        for (uint32_t i = 0; i < nq; ++i)
            if (bad[i]) return i;
        return std::nullopt;
    };

    try {
        for (;;) {
            ++rep.outer;
            rep.inner_last = 0;
            rep.active_size = static_cast<uint32_t>(active.size());

            for (;;) {
                ++rep.inner_total;
                ++rep.inner_last;

                std::vector<genex::LabeledTransition> pos, neg;
                for (uint32_t i : active) {
                    pos.insert(pos.end(), xp[i].begin(), xp[i].end());
                    neg.insert(neg.end(), xn[i].begin(), xn[i].end());
                }
                rep.xplus = static_cast<uint32_t>(pos.size());
                rep.xminus = static_cast<uint32_t>(neg.size());

                const auto t_sel = Clock::now();
                auto sigs = genex::make_sigs(pool, pos, neg);
                {
                    std::set<uint32_t> ps;
                    for (auto [a, b] : sigs.pos_edges) {
                        ps.insert(a);
                        ps.insert(b);
                    }
                    uint64_t goals = 0, others = 0;
                    for (uint32_t s : ps) (sigs.goal_flag[s] ? goals : others) += 1;
                    rep.hsp_size = static_cast<uint32_t>(
                        sigs.pos_edges.size() +
                        sigs.pos_edges.size() * sigs.neg_edges.size() + goals * others);
                }
                auto res = genex::run_genex(sigs);
                if (auto* f = std::get_if<genex::Failure>(&res)) {
                    rep.genex_seconds += seconds_since(t_sel);
                    const char* why = f->kind == genex::FailureKind::EdgeUnhit
                                          ? "no feature in the pool hits "
                                          : "no orderable chain covers ";
                    return fail(FailReason::Edge, why + f->detail);
                }
                auto& sel = std::get<genex::Success>(res);

                pi = policy::Policy{};
                pi.pool_ids = sel.features;
                for (uint32_t fid : sel.features)
                    pi.kinds_boolean.push_back(pool.feature(fid).boolean);
                auto local_values = [&](uint32_t sidx) {
                    std::vector<uint32_t> v(sel.features.size());
                    for (std::size_t j = 0; j < sel.features.size(); ++j)
                        v[j] = sigs.state_values[sidx][sel.features[j]];
                    return v;
                };
                for (auto [a, b] : sigs.pos_edges)
                    pi.add_rule(policy::project(pi.kinds_boolean, local_values(a), local_values(b)));

                std::vector<uint32_t> costs;
                for (uint32_t fid : pi.pool_ids) costs.push_back(pool.feature(fid).complexity);
                auto strat = termination::stratify_rules(pi, costs, opts.k);
                if (!strat.ok) throw std::logic_error("selected features admit no ranking");
                cert = strat.ranking;

                if (opts.simplify) {
                    std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>> neg_vals;
                    for (auto [a, b] : sigs.neg_edges)
                        neg_vals.emplace_back(local_values(a), local_values(b));
                    pi = simplify_policy(pi, cert, neg_vals);
                }
                rep.genex_seconds += seconds_since(t_sel);
                rep.scope = static_cast<uint32_t>(pi.pool_ids.size());
                rep.rules = static_cast<uint32_t>(pi.rules.size());

                // Verify on the active instances; the first counterexample
                // refines the labeled sets and restarts selection.
                const auto t_ver = Clock::now();
                bool refined = false;
                for (uint32_t i : active) {
                    auto v = policy::analyze(*seeded[i].instance, seeded[i].actions, pool, pi,
                                             *caches[i], budget);
                    if (v.kind == policy::VerdictKind::Solves) continue;
                    if (v.kind == policy::VerdictKind::Unsafe) {
                        xn[i].push_back({seeded[i].instance, v.witness_s, v.witness_t});
                    } else if (v.kind == policy::VerdictKind::NotClosed) {
                        planner::Plan p;
                        auto c = caches[i]->classify(v.witness_t, budget, &p);
                        if (c != planner::StateClass::Alive || p.transitions.empty())
                            throw std::logic_error("stuck state has no recovery plan");
                        xp[i].push_back(
                            {seeded[i].instance, p.transitions[0].first, p.transitions[0].second});
                    } else {
                        throw std::logic_error("policy cycles despite a ranking");
                    }
                    refined = true;
                    break;
                }
                rep.verify_seconds += seconds_since(t_ver);
                if (!refined) break;
            }

            const auto t_all = Clock::now();
            auto failing = first_failing(pi);
            rep.verify_seconds += seconds_since(t_all);
            if (!failing) {
                auto m = termination::matrix_from_rules(pi);
                std::vector<uint32_t> costs;
                for (uint32_t fid : pi.pool_ids) costs.push_back(pool.feature(fid).complexity);
                auto strat = termination::stratify_rules(pi, costs, opts.k);
                rep.stratified = strat.ok && termination::all_entail_change(m);
                rep.active_size = static_cast<uint32_t>(active.size());
                rep.total_seconds = seconds_since(t_start);
                return LearnSuccess{std::move(pi), std::move(pool),
                                    strat.ok ? std::move(strat.ranking) : std::move(cert), rep};
            }

            if (cur == Strategy::S1) {
                auto cand = next_singleton(active[0], *failing, nq, s1_visited);
                if (!cand) {
                    if (opts.strategy == Strategy::Auto) {
                        // Walking singletons failed; accumulate instead,
                        // starting over from the seed transitions.
                        cur = Strategy::S2;
                        xp = seeds;
                        for (auto& v : xn) v.clear();
                        active = {0};
                        s2_rounds = 0;
                        continue;
                    }
                    return fail(FailReason::Exhausted, "no untried training instance left");
                }
                active = {*cand};
                s1_visited[*cand] = true;
            } else {
                if (++s2_rounds > s2_bound)
                    return fail(FailReason::Exhausted, "active set changed more than |Q|^2 times");
                active = next_active_set(active, *failing);
            }
        }
    } catch (const BudgetExceeded& e) {
        return fail(FailReason::Timeout, e.what());
    }
}

}  // namespace genplan::wrapper
