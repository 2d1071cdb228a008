#include "genplan/genex.hpp"

#include <algorithm>
#include <cassert>
#include <map>

#include <json.hpp>

namespace genplan::genex {

SampleSigs make_sigs(const features::FeaturePool& pool,
                     const std::vector<LabeledTransition>& pos,
                     const std::vector<LabeledTransition>& neg) {
    SampleSigs out;
    for (const auto& f : pool.features()) {
        out.kinds_boolean.push_back(f.boolean);
        out.costs.push_back(f.complexity);
    }

    std::map<const strips::Instance*, features::Evaluator> evals;
    std::map<std::pair<const strips::Instance*, uint64_t>, std::vector<uint32_t>> index;
    std::vector<std::pair<const strips::Instance*, strips::State>> states;
    auto intern_state = [&](const strips::Instance* inst, const strips::State& s) -> uint32_t {
        auto& bucket = index[{inst, s.hash()}];
        for (auto i : bucket)
            if (states[i].second.atoms == s.atoms) return i;
        uint32_t id = static_cast<uint32_t>(states.size());
        states.emplace_back(inst, s);
        bucket.push_back(id);
        auto ev = evals.find(inst);
        if (ev == evals.end())
            ev = evals.emplace(inst, features::Evaluator(*inst, pool.registry())).first;
        std::vector<uint32_t> vals(pool.size());
        for (uint32_t f = 0; f < pool.size(); ++f)
            vals[f] = features::feature_value(pool, f, ev->second, s);
        out.state_values.push_back(std::move(vals));
        out.goal_flag.push_back(strips::is_goal(*inst, s));
        return id;
    };

    for (const auto& e : pos)
        out.pos_edges.emplace_back(intern_state(e.instance, e.s), intern_state(e.instance, e.t));
    for (const auto& e : neg)
        out.neg_edges.emplace_back(intern_state(e.instance, e.s), intern_state(e.instance, e.t));
    return out;
}

EdgeSig edge_sig(const SampleSigs& sigs, uint32_t f, std::pair<uint32_t, uint32_t> edge) {
    uint32_t vs = sigs.state_values[edge.first][f];
    uint32_t vt = sigs.state_values[edge.second][f];
    EdgeSig sig;
    sig.src_true = vs > 0;
    sig.dir = vt > vs ? 1 : vt < vs ? -1 : 0;
    return sig;
}

HittingSets build_hsp(const SampleSigs& sigs) {
    for (const auto& pe : sigs.pos_edges)
        for (const auto& ne : sigs.neg_edges)
            if (pe == ne)
                throw OverlapError("transition " + std::to_string(pe.first) + "->" +
                                   std::to_string(pe.second) + " is labeled both good and bad");

    const uint32_t n = static_cast<uint32_t>(sigs.num_features());
    HittingSets out;

    for (std::size_t ei = 0; ei < sigs.pos_edges.size(); ++ei) {
        Bits sub(n);
        for (uint32_t f = 0; f < n; ++f)
            if (edge_sig(sigs, f, sigs.pos_edges[ei]).dir != 0) sub.set(f);
        out.subsets.push_back(std::move(sub));
        out.provenance.push_back("change e" + std::to_string(ei));
    }
    for (std::size_t i = 0; i < sigs.pos_edges.size(); ++i)
        for (std::size_t j = 0; j < sigs.neg_edges.size(); ++j) {
            Bits sub(n);
            for (uint32_t f = 0; f < n; ++f)
                if (!(edge_sig(sigs, f, sigs.pos_edges[i]) ==
                      edge_sig(sigs, f, sigs.neg_edges[j])))
                    sub.set(f);
            out.subsets.push_back(std::move(sub));
            out.provenance.push_back("apart e" + std::to_string(i) + "/b" + std::to_string(j));
        }

    std::vector<uint32_t> pos_states;
    for (const auto& [s, t] : sigs.pos_edges) {
        pos_states.push_back(s);
        pos_states.push_back(t);
    }
    std::sort(pos_states.begin(), pos_states.end());
    pos_states.erase(std::unique(pos_states.begin(), pos_states.end()), pos_states.end());
    for (auto g : pos_states) {
        if (!sigs.goal_flag[g]) continue;
        for (auto s : pos_states) {
            if (sigs.goal_flag[s]) continue;
            Bits sub(n);
            for (uint32_t f = 0; f < n; ++f)
                if ((sigs.state_values[g][f] > 0) != (sigs.state_values[s][f] > 0)) sub.set(f);
            out.subsets.push_back(std::move(sub));
            out.provenance.push_back("goal s" + std::to_string(g) + "/s" + std::to_string(s));
        }
    }
    return out;
}

namespace {

struct Chain {
    uint64_t cost = 0;
    std::vector<uint32_t> path;
};

bool chain_better(const Chain& a, const Chain& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.path < b.path;
}

//! True when the union of `order` and the consecutive edges of `path` has a
//! directed cycle.
bool creates_cycle(const std::vector<std::vector<uint32_t>>& order,
                   const std::vector<uint32_t>& path, uint32_t n) {
    std::vector<std::vector<uint32_t>> adj = order;
    adj.resize(n);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) adj[path[i]].push_back(path[i + 1]);
    std::vector<uint8_t> color(n, 0);
    std::vector<std::pair<uint32_t, std::size_t>> stack;
    for (uint32_t root = 0; root < n; ++root) {
        if (color[root]) continue;
        color[root] = 1;
        stack.emplace_back(root, 0);
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            if (next == adj[u].size()) {
                color[u] = 2;
                stack.pop_back();
                continue;
            }
            uint32_t v = adj[u][next++];
            if (color[v] == 1) {
                stack.clear();
                return true;
            }
            if (color[v] == 0) {
                color[v] = 1;
                stack.emplace_back(v, 0);
            }
        }
    }
    return false;
}

}  // namespace

Result run_genex(const SampleSigs& sigs, std::string* trace) {
    const uint32_t n = static_cast<uint32_t>(sigs.num_features());

    std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>> pos_pairs;
    for (const auto& [s, t] : sigs.pos_edges)
        pos_pairs.emplace_back(sigs.state_values[s], sigs.state_values[t]);
    termination::ChangeMatrix matrix =
        termination::matrix_from_transitions(sigs.kinds_boolean, pos_pairs);

    // The chain graph is fixed: only node costs change as features get picked.
    std::vector<bool> source(n);
    for (uint32_t f = 0; f < n; ++f) source[f] = termination::monotone(matrix, f);
    std::vector<std::vector<uint32_t>> succ(n);  // g -> features monotone given g
    for (uint32_t g = 0; g < n; ++g)
        for (uint32_t f = 0; f < n; ++f) {
            if (f == g) continue;
            if (!source[f] && termination::monotone_given(matrix, f, {g})) succ[g].push_back(f);
        }

    HittingSets hsp = build_hsp(sigs);
    std::vector<bool> unhit(hsp.subsets.size(), true);
    std::size_t unhit_count = hsp.subsets.size();

    std::vector<bool> selected(n);
    std::vector<uint32_t> order;     // introduction order
    std::vector<uint32_t> position(n, UINT32_MAX);
    policy::Ranking ranking;
    std::vector<std::vector<uint32_t>> ord_edges(n);  // accumulated ordering constraints

    nlohmann::json jtrace = nlohmann::json::array();

    auto fail = [&]() -> Result {
        for (uint32_t i = 0; i < hsp.subsets.size(); ++i) {
            if (!unhit[i]) continue;
            Failure f;
            f.subset = i;
            f.kind = hsp.subsets[i].any() ? FailureKind::NoEligible : FailureKind::EdgeUnhit;
            f.detail = hsp.provenance[i];
            if (trace) *trace = jtrace.dump(2);
            return f;
        }
        // unreachable: fail() is only called while subsets remain unhit
        throw std::logic_error("selection failed with nothing left to hit");
    };

    while (unhit_count > 0) {
        // Best chain per target feature under current costs.
        std::vector<std::optional<Chain>> best(n);
        for (uint32_t f = 0; f < n; ++f)
            if (source[f]) best[f] = Chain{selected[f] ? 0 : sigs.costs[f], {f}};
        for (uint32_t round = 0; round < n; ++round) {
            bool changed = false;
            for (uint32_t g = 0; g < n; ++g) {
                if (!best[g]) continue;
                for (uint32_t f : succ[g]) {
                    Chain cand;
                    cand.cost = best[g]->cost + (selected[f] ? 0 : sigs.costs[f]);
                    cand.path = best[g]->path;
                    cand.path.push_back(f);
                    if (!best[f] || chain_better(cand, *best[f])) {
                        best[f] = std::move(cand);
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }

        // Score candidates: newly hit subsets per unit cost.
        int pick = -1;
        uint64_t pick_hits = 0, pick_cost = 0;
        for (uint32_t f = 0; f < n; ++f) {
            if (!best[f] || best[f]->cost == 0) continue;
            uint64_t hits = 0;
            for (uint32_t i = 0; i < hsp.subsets.size(); ++i) {
                if (!unhit[i]) continue;
                for (auto node : best[f]->path)
                    if (hsp.subsets[i].test(node)) {
                        ++hits;
                        break;
                    }
            }
            if (hits == 0) continue;
            if (creates_cycle(ord_edges, best[f]->path, n)) continue;
            bool take;
            if (pick < 0) {
                take = true;
            } else {
                // hits/cost compared exactly; ties to the cheaper chain, then
                // to the earlier feature (f ascending means that is automatic).
                uint64_t lhs = hits * pick_cost, rhs = pick_hits * best[f]->cost;
                take = lhs > rhs || (lhs == rhs && best[f]->cost < pick_cost);
            }
            if (take) {
                pick = static_cast<int>(f);
                pick_hits = hits;
                pick_cost = best[f]->cost;
            }
        }
        if (pick < 0) return fail();

        const Chain& chain = *best[pick];
        for (std::size_t i = 0; i + 1 < chain.path.size(); ++i)
            ord_edges[chain.path[i]].push_back(chain.path[i + 1]);
        for (std::size_t i = 0; i < chain.path.size(); ++i) {
            uint32_t node = chain.path[i];
            if (selected[node]) continue;
            selected[node] = true;
            position[node] = static_cast<uint32_t>(order.size());
            order.push_back(node);
            policy::RankEntry entry;
            if (i == 0) {
                entry.rank = 0;
            } else {
                uint32_t prev = chain.path[i - 1];
                entry.rank = ranking.at(position[prev]).rank + 1;
                entry.support = {position[prev]};
            }
            ranking.emplace(position[node], std::move(entry));
        }
        for (uint32_t i = 0; i < hsp.subsets.size(); ++i) {
            if (!unhit[i]) continue;
            for (auto node : chain.path)
                if (hsp.subsets[i].test(node)) {
                    unhit[i] = false;
                    --unhit_count;
                    break;
                }
        }
        if (trace) {
            nlohmann::json step;
            step["target"] = chain.path.back();
            step["chain"] = chain.path;
            step["cost"] = chain.cost;
            step["hits"] = pick_hits;
            step["remaining"] = unhit_count;
            jtrace.push_back(std::move(step));
        }
    }

    if (trace) *trace = jtrace.dump(2);
    Success s;
    s.features = order;
    s.ranking = std::move(ranking);
    return s;
}

}  // namespace genplan::genex
