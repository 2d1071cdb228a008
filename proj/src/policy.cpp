#include "genplan/policy.hpp"

#include <algorithm>
#include <cassert>

#include <json.hpp>

namespace genplan::policy {

namespace {

uint32_t clamp_value(bool boolean, uint32_t v) { return boolean ? (v > 0 ? 1 : 0) : v; }

bool cond_holds(const Cond& c, uint32_t v) {
    switch (c.test) {
        case CondTest::BoolTrue: return v > 0;
        case CondTest::BoolFalse: return v == 0;
        case CondTest::Gt0: return v > 0;
        case CondTest::Eq0: return v == 0;
    }
    return false;
}

bool eff_holds(const Eff& e, uint32_t vs, uint32_t vt) {
    switch (e.op) {
        case EffectOp::SetTrue: return vt > 0;
        case EffectOp::SetFalse: return vt == 0;
        case EffectOp::UnkBool: return true;
        case EffectOp::Inc: return vt > vs;
        case EffectOp::Dec: return vt < vs;
        case EffectOp::UnkNum: return true;
    }
    return false;
}

}  // namespace

void Rule::normalize() {
    std::sort(conds.begin(), conds.end(),
              [](const Cond& a, const Cond& b) { return a.f < b.f; });
    std::sort(effs.begin(), effs.end(), [](const Eff& a, const Eff& b) { return a.f < b.f; });
}

bool Policy::add_rule(Rule r) {
    r.normalize();
    if (contains(r)) return false;
    rules.push_back(std::move(r));
    return true;
}

bool Policy::contains(const Rule& r) const {
    return std::find(rules.begin(), rules.end(), r) != rules.end();
}

int compatible_rule(const Policy& policy, const std::vector<uint32_t>& vs,
                    const std::vector<uint32_t>& vt) {
    const std::size_t k = policy.scope_size();
    assert(vs.size() == k && vt.size() == k);
    std::vector<uint32_t> cs(k), ct(k);
    for (std::size_t f = 0; f < k; ++f) {
        cs[f] = clamp_value(policy.kinds_boolean[f], vs[f]);
        ct[f] = clamp_value(policy.kinds_boolean[f], vt[f]);
    }
    std::vector<bool> mentioned(k);
    for (std::size_t ri = 0; ri < policy.rules.size(); ++ri) {
        const Rule& r = policy.rules[ri];
        bool ok = true;
        for (const auto& c : r.conds)
            if (!cond_holds(c, cs[c.f])) {
                ok = false;
                break;
            }
        if (!ok) continue;
        std::fill(mentioned.begin(), mentioned.end(), false);
        for (const auto& e : r.effs) {
            mentioned[e.f] = true;
            if (!eff_holds(e, cs[e.f], ct[e.f])) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        // Implicit frame: untouched features must keep their value exactly.
        for (std::size_t f = 0; f < k && ok; ++f)
            if (!mentioned[f] && cs[f] != ct[f]) ok = false;
        if (ok) return static_cast<int>(ri);
    }
    return -1;
}

bool compatible(const Policy& policy, const std::vector<uint32_t>& vs,
                const std::vector<uint32_t>& vt) {
    return compatible_rule(policy, vs, vt) >= 0;
}

Rule project(const std::vector<bool>& kinds_boolean, const std::vector<uint32_t>& vs,
             const std::vector<uint32_t>& vt) {
    Rule r;
    for (uint32_t f = 0; f < kinds_boolean.size(); ++f) {
        uint32_t s = clamp_value(kinds_boolean[f], vs[f]);
        uint32_t t = clamp_value(kinds_boolean[f], vt[f]);
        if (kinds_boolean[f]) {
            r.conds.push_back({f, s > 0 ? CondTest::BoolTrue : CondTest::BoolFalse});
            if (s != t) r.effs.push_back({f, t > 0 ? EffectOp::SetTrue : EffectOp::SetFalse});
        } else {
            r.conds.push_back({f, s > 0 ? CondTest::Gt0 : CondTest::Eq0});
            if (t > s) r.effs.push_back({f, EffectOp::Inc});
            if (t < s) r.effs.push_back({f, EffectOp::Dec});
        }
    }
    return r;
}

std::vector<uint32_t> policy_values(const Policy& policy, const features::FeaturePool& pool,
                                    features::Evaluator& ev, const strips::State& s) {
    std::vector<uint32_t> out(policy.scope_size());
    for (std::size_t f = 0; f < policy.scope_size(); ++f)
        out[f] = features::feature_value(pool, policy.pool_ids[f], ev, s);
    return out;
}

Verdict analyze(const strips::Instance& instance,
                const std::vector<strips::GroundAction>& actions,
                const features::FeaturePool& pool, const Policy& policy,
                planner::DeadEndCache& dead_cache, const Budget& budget) {
    features::Evaluator ev(instance, pool.registry());

    enum : uint8_t { Gray = 0, Black = 1 };
    std::unordered_map<strips::State, uint8_t, strips::StateHash> color;
    std::unordered_map<strips::State, std::vector<uint32_t>, strips::StateHash> value_cache;
    uint64_t visited = 0;

    auto values_of = [&](const strips::State& s) -> const std::vector<uint32_t>& {
        auto it = value_cache.find(s);
        if (it == value_cache.end())
            it = value_cache.emplace(s, policy_values(policy, pool, ev, s)).first;
        return it->second;
    };

    struct Frame {
        strips::State u;
        // Compatible successors of u: the concrete result of the action and
        // its canonical representative, in ground-action order.
        std::vector<std::pair<strips::State, strips::State>> edges;
        std::size_t next = 0;
    };

    Verdict out;
    strips::State root = canonical_state(instance, instance.initial_state());
    if (strips::is_goal(instance, root)) {
        out.kind = VerdictKind::Solves;
        return out;
    }

    std::vector<Frame> stack;

    // Expands u (non-goal, uncolored). Returns nullopt when u got pushed,
    // otherwise the final verdict (u is stuck).
    auto enter = [&](strips::State u, const strips::State* parent,
                     const strips::State* via) -> std::optional<Verdict> {
        ++visited;
        if (budget.nodes_exhausted(visited) || budget.time_exhausted())
            throw BudgetExceeded(visited, budget.time_exhausted());
        const std::vector<uint32_t>& vu = values_of(u);
        Frame fr;
        for (uint32_t ai = 0; ai < actions.size(); ++ai) {
            if (!strips::applicable(u, actions[ai])) continue;
            strips::State t = strips::apply(u, actions[ai]);
            strips::State tc = strips::canonical_state(instance, t);
            if (compatible(policy, vu, values_of(tc)))
                fr.edges.emplace_back(std::move(t), std::move(tc));
        }
        if (fr.edges.empty()) {
            planner::StateClass cls = dead_cache.classify(u, budget);
            Verdict v;
            v.visited = visited;
            if (cls == planner::StateClass::DeadEnd) {
                v.kind = VerdictKind::Unsafe;
                // Blame the transition that entered the dead end.
                v.witness_s = parent ? *parent : u;
                v.witness_t = via ? *via : u;
            } else {
                v.kind = VerdictKind::NotClosed;
                v.witness_t = u;
            }
            return v;
        }
        color[u] = Gray;
        fr.u = std::move(u);
        stack.push_back(std::move(fr));
        return std::nullopt;
    };

    if (auto v = enter(root, nullptr, nullptr)) return *v;

    while (!stack.empty()) {
        Frame& fr = stack.back();
        if (fr.next == fr.edges.size()) {
            color[fr.u] = Black;
            stack.pop_back();
            continue;
        }
        auto& [t, tc] = fr.edges[fr.next++];
        if (strips::is_goal(instance, tc)) continue;  // goal trajectories end here
        auto it = color.find(tc);
        if (it != color.end()) {
            if (it->second == Gray) {
                out.kind = VerdictKind::Cyclic;
                out.witness_s = fr.u;
                out.witness_t = tc;
                out.visited = visited;
                return out;
            }
            continue;  // black: a completed goal-reaching subtree
        }
        // fr may be invalidated by the push below; copy what the witness needs.
        strips::State parent = fr.u;
        strips::State via = t;
        if (auto v = enter(std::move(tc), &parent, &via)) return *v;
    }

    out.kind = VerdictKind::Solves;
    out.visited = visited;
    return out;
}

std::string cond_token(const Cond& c) {
    std::string f = "f" + std::to_string(c.f);
    switch (c.test) {
        case CondTest::BoolTrue: return f;
        case CondTest::BoolFalse: return "!" + f;
        case CondTest::Gt0: return f + ">0";
        case CondTest::Eq0: return f + "=0";
    }
    return f;
}

std::string eff_token(const Eff& e) {
    std::string f = "f" + std::to_string(e.f);
    switch (e.op) {
        case EffectOp::SetTrue: return f;
        case EffectOp::SetFalse: return "!" + f;
        case EffectOp::UnkBool: return f + "?";
        case EffectOp::Inc: return f + "+";
        case EffectOp::Dec: return f + "-";
        case EffectOp::UnkNum: return f + "?";
    }
    return f;
}

namespace {

uint32_t parse_feature_index(const std::string& tok, std::size_t begin, std::size_t end,
                             std::size_t scope) {
    if (end <= begin + 1 || tok[begin] != 'f')
        throw std::runtime_error("bad feature token: " + tok);
    uint32_t idx = 0;
    for (std::size_t i = begin + 1; i < end; ++i) {
        if (tok[i] < '0' || tok[i] > '9') throw std::runtime_error("bad feature token: " + tok);
        idx = idx * 10 + static_cast<uint32_t>(tok[i] - '0');
    }
    if (idx >= scope) throw std::runtime_error("feature index out of range: " + tok);
    return idx;
}

Cond parse_cond_token(const std::string& tok, const std::vector<bool>& kinds) {
    Cond c;
    if (!tok.empty() && tok[0] == '!') {
        c.f = parse_feature_index(tok, 1, tok.size(), kinds.size());
        if (!kinds[c.f]) throw std::runtime_error("boolean test on numerical feature: " + tok);
        c.test = CondTest::BoolFalse;
        return c;
    }
    if (tok.size() > 2 && tok.compare(tok.size() - 2, 2, ">0") == 0) {
        c.f = parse_feature_index(tok, 0, tok.size() - 2, kinds.size());
        if (kinds[c.f]) throw std::runtime_error("numerical test on boolean feature: " + tok);
        c.test = CondTest::Gt0;
        return c;
    }
    if (tok.size() > 2 && tok.compare(tok.size() - 2, 2, "=0") == 0) {
        c.f = parse_feature_index(tok, 0, tok.size() - 2, kinds.size());
        if (kinds[c.f]) throw std::runtime_error("numerical test on boolean feature: " + tok);
        c.test = CondTest::Eq0;
        return c;
    }
    c.f = parse_feature_index(tok, 0, tok.size(), kinds.size());
    if (!kinds[c.f]) throw std::runtime_error("boolean test on numerical feature: " + tok);
    c.test = CondTest::BoolTrue;
    return c;
}

Eff parse_eff_token(const std::string& tok, const std::vector<bool>& kinds) {
    Eff e;
    if (!tok.empty() && tok[0] == '!') {
        e.f = parse_feature_index(tok, 1, tok.size(), kinds.size());
        if (!kinds[e.f]) throw std::runtime_error("boolean effect on numerical feature: " + tok);
        e.op = EffectOp::SetFalse;
        return e;
    }
    char last = tok.empty() ? '\0' : tok.back();
    if (last == '?' || last == '+' || last == '-') {
        e.f = parse_feature_index(tok, 0, tok.size() - 1, kinds.size());
        if (last == '?') {
            e.op = kinds[e.f] ? EffectOp::UnkBool : EffectOp::UnkNum;
        } else {
            if (kinds[e.f])
                throw std::runtime_error("numerical effect on boolean feature: " + tok);
            e.op = last == '+' ? EffectOp::Inc : EffectOp::Dec;
        }
        return e;
    }
    e.f = parse_feature_index(tok, 0, tok.size(), kinds.size());
    if (!kinds[e.f]) throw std::runtime_error("boolean effect on numerical feature: " + tok);
    e.op = EffectOp::SetTrue;
    return e;
}

}  // namespace

std::string policy_to_json(const Policy& policy, const features::FeaturePool& pool,
                           const Ranking* ranking) {
    nlohmann::json j;
    j["schema"] = 1;
    j["domain"] = pool.registry().domain().name;
    nlohmann::json feats = nlohmann::json::array();
    nlohmann::json kinds = nlohmann::json::array();
    for (std::size_t f = 0; f < policy.scope_size(); ++f) {
        feats.push_back(pool.registry().concept_str(pool.feature(policy.pool_ids[f]).concept_id));
        kinds.push_back(policy.kinds_boolean[f] ? "bool" : "num");
    }
    j["features"] = std::move(feats);
    j["kinds"] = std::move(kinds);
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : policy.rules) {
        nlohmann::json jr;
        nlohmann::json conds = nlohmann::json::array();
        for (const auto& c : r.conds) conds.push_back(cond_token(c));
        nlohmann::json effs = nlohmann::json::array();
        for (const auto& e : r.effs) effs.push_back(eff_token(e));
        jr["cond"] = std::move(conds);
        jr["eff"] = std::move(effs);
        rules.push_back(std::move(jr));
    }
    j["rules"] = std::move(rules);
    if (ranking) {
        nlohmann::json jr = nlohmann::json::object();
        for (const auto& [f, entry] : *ranking) {
            nlohmann::json je;
            je["rank"] = entry.rank;
            nlohmann::json sup = nlohmann::json::array();
            for (auto s : entry.support) sup.push_back("f" + std::to_string(s));
            je["support"] = std::move(sup);
            jr["f" + std::to_string(f)] = std::move(je);
        }
        j["ranking"] = std::move(jr);
    }
    return j.dump(2) + "\n";
}

LoadedPolicy policy_from_json(const strips::DomainSpec& domain, const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("schema") || j["schema"].get<int>() != 1)
        throw std::runtime_error("unsupported policy schema");
    if (j.contains("domain") && j["domain"].get<std::string>() != domain.name)
        throw std::runtime_error("policy was built for domain '" +
                                 j["domain"].get<std::string>() + "'");

    features::Registry reg(domain);
    std::vector<features::Feature> feats;
    std::vector<bool> kinds;
    const auto& jf = j.at("features");
    const auto& jk = j.at("kinds");
    if (jf.size() != jk.size()) throw std::runtime_error("features/kinds length mismatch");
    for (std::size_t i = 0; i < jf.size(); ++i) {
        features::Feature f;
        f.id = static_cast<uint32_t>(i);
        f.concept_id = reg.parse_concept(jf[i].get<std::string>());
        f.complexity = reg.concept_at(f.concept_id).complexity;
        std::string kind = jk[i].get<std::string>();
        if (kind != "bool" && kind != "num")
            throw std::runtime_error("unknown feature kind: " + kind);
        f.boolean = kind == "bool";
        kinds.push_back(f.boolean);
        feats.push_back(f);
    }

    LoadedPolicy out{features::FeaturePool(std::move(reg), std::move(feats), 0, 0, 0, 0),
                     Policy{}, Ranking{}, false};
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        out.policy.pool_ids.push_back(static_cast<uint32_t>(i));
        out.policy.kinds_boolean.push_back(kinds[i]);
    }
    for (const auto& jr : j.at("rules")) {
        Rule r;
        for (const auto& t : jr.at("cond")) r.conds.push_back(parse_cond_token(t, kinds));
        for (const auto& t : jr.at("eff")) r.effs.push_back(parse_eff_token(t, kinds));
        r.normalize();
        out.policy.rules.push_back(std::move(r));
    }
    if (j.contains("ranking")) {
        out.has_ranking = true;
        for (const auto& [key, je] : j["ranking"].items()) {
            uint32_t f = parse_feature_index(key, 0, key.size(), kinds.size());
            RankEntry entry;
            entry.rank = je.at("rank").get<uint32_t>();
            for (const auto& s : je.at("support"))
                entry.support.push_back(
                    parse_feature_index(s.get<std::string>(), 0, s.get<std::string>().size(),
                                        kinds.size()));
            std::sort(entry.support.begin(), entry.support.end());
            out.ranking.emplace(f, std::move(entry));
        }
    }
    return out;
}

std::string policy_to_text(const Policy& policy, const features::FeaturePool& pool,
                           const Ranking* ranking) {
    std::string out;
    for (std::size_t f = 0; f < policy.scope_size(); ++f) {
        out += "f" + std::to_string(f);
        out += policy.kinds_boolean[f] ? " (bool) = " : " (num)  = ";
        out += pool.registry().concept_str(pool.feature(policy.pool_ids[f]).concept_id);
        if (ranking) {
            auto it = ranking->find(static_cast<uint32_t>(f));
            if (it != ranking->end()) {
                out += "   [rank " + std::to_string(it->second.rank);
                if (!it->second.support.empty()) {
                    out += ", after";
                    for (auto s : it->second.support) out += " f" + std::to_string(s);
                }
                out += "]";
            }
        }
        out += "\n";
    }
    for (std::size_t ri = 0; ri < policy.rules.size(); ++ri) {
        const Rule& r = policy.rules[ri];
        out += "rule " + std::to_string(ri + 1) + ": {";
        for (std::size_t i = 0; i < r.conds.size(); ++i) {
            if (i) out += ", ";
            out += cond_token(r.conds[i]);
        }
        out += "} -> {";
        for (std::size_t i = 0; i < r.effs.size(); ++i) {
            if (i) out += ", ";
            out += eff_token(r.effs[i]);
        }
        out += "}\n";
    }
    return out;
}

}  // namespace genplan::policy
