#include "genplan/termination.hpp"

#include <algorithm>
#include <cassert>

namespace genplan::termination {

using policy::CondTest;
using policy::EffectOp;

ChangeMatrix matrix_from_rules(const policy::Policy& policy) {
    ChangeMatrix m;
    m.num_features = static_cast<uint32_t>(policy.scope_size());
    for (const auto& rule : policy.rules) {
        std::vector<ChangeCell> row(m.num_features);
        auto cond_fixes = [&](uint32_t f, bool value) {
            for (const auto& c : rule.conds) {
                if (c.f != f) continue;
                if (value && (c.test == CondTest::BoolTrue || c.test == CondTest::Gt0))
                    return true;
                if (!value && (c.test == CondTest::BoolFalse || c.test == CondTest::Eq0))
                    return true;
            }
            return false;
        };
        for (uint32_t f = 0; f < m.num_features; ++f) {
            row[f].excl0 = cond_fixes(f, true);
            row[f].excl1 = cond_fixes(f, false);
        }
        for (const auto& e : rule.effs) {
            ChangeCell& cell = row[e.f];
            switch (e.op) {
                case EffectOp::Inc:
                    cell.may_inc = cell.entailed = true;
                    break;
                case EffectOp::Dec:
                    cell.may_dec = cell.entailed = true;
                    break;
                case EffectOp::UnkNum:
                case EffectOp::UnkBool:
                    cell.may_inc = cell.may_dec = true;
                    break;
                case EffectOp::SetTrue:
                    cell.may_inc = !cond_fixes(e.f, true);
                    cell.entailed = cond_fixes(e.f, false);
                    break;
                case EffectOp::SetFalse:
                    cell.may_dec = !cond_fixes(e.f, false);
                    cell.entailed = cond_fixes(e.f, true);
                    break;
            }
        }
        m.items.push_back(std::move(row));
    }
    return m;
}

ChangeMatrix matrix_from_transitions(
    const std::vector<bool>& kinds_boolean,
    const std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>>& pairs) {
    ChangeMatrix m;
    m.num_features = static_cast<uint32_t>(kinds_boolean.size());
    for (const auto& [vs, vt] : pairs) {
        assert(vs.size() == kinds_boolean.size() && vt.size() == kinds_boolean.size());
        std::vector<ChangeCell> row(m.num_features);
        for (uint32_t f = 0; f < m.num_features; ++f) {
            uint32_t s = kinds_boolean[f] ? (vs[f] > 0 ? 1 : 0) : vs[f];
            uint32_t t = kinds_boolean[f] ? (vt[f] > 0 ? 1 : 0) : vt[f];
            ChangeCell& cell = row[f];
            if (t > s) cell.may_inc = cell.entailed = true;
            if (t < s) cell.may_dec = cell.entailed = true;
            cell.excl0 = s > 0;
            cell.excl1 = s == 0;
        }
        m.items.push_back(std::move(row));
    }
    return m;
}

std::vector<uint32_t> rho(const ChangeMatrix& m, uint32_t g, ValTag b) {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < m.items.size(); ++i) {
        const ChangeCell& cell = m.items[i][g];
        if (cell.entailed) continue;
        if (b == ValTag::Zero ? cell.excl0 : cell.excl1) continue;
        out.push_back(i);
    }
    return out;
}

bool monotone_over(const ChangeMatrix& m, uint32_t f, const std::vector<uint32_t>& items) {
    bool inc = false, dec = false;
    for (auto i : items) {
        inc = inc || m.items[i][f].may_inc;
        dec = dec || m.items[i][f].may_dec;
    }
    return !inc || !dec;
}

bool monotone(const ChangeMatrix& m, uint32_t f) {
    bool inc = false, dec = false;
    for (const auto& row : m.items) {
        inc = inc || row[f].may_inc;
        dec = dec || row[f].may_dec;
    }
    return !inc || !dec;
}

bool monotone_given(const ChangeMatrix& m, uint32_t f, const std::vector<uint32_t>& support) {
    if (support.empty()) return monotone(m, f);
    assert(support.size() < 31);
    for (uint32_t mask = 0; mask < (1u << support.size()); ++mask) {
        bool inc = false, dec = false;
        for (uint32_t i = 0; i < m.items.size(); ++i) {
            bool kept = true;
            for (std::size_t gi = 0; gi < support.size() && kept; ++gi) {
                const ChangeCell& cell = m.items[i][support[gi]];
                if (cell.entailed) kept = false;
                else if ((mask >> gi) & 1 ? cell.excl1 : cell.excl0) kept = false;
            }
            if (!kept) continue;
            inc = inc || m.items[i][f].may_inc;
            dec = dec || m.items[i][f].may_dec;
        }
        if (inc && dec) return false;
    }
    return true;
}

bool entails_change(const ChangeMatrix& m, std::size_t item) {
    for (const auto& cell : m.items[item])
        if (cell.entailed) return true;
    return false;
}

bool all_entail_change(const ChangeMatrix& m) {
    for (std::size_t i = 0; i < m.items.size(); ++i)
        if (!entails_change(m, i)) return false;
    return true;
}

namespace {

//! All subsets of `ranked` with size <= k, by (total cost, lexicographic ids).
//! Small k (1 or 2 in practice), so plain enumeration.
std::vector<std::vector<uint32_t>> candidate_supports(const std::vector<uint32_t>& ranked,
                                                      const std::vector<uint32_t>& costs,
                                                      uint32_t k) {
    std::vector<std::vector<uint32_t>> subsets{{}};
    std::vector<std::vector<uint32_t>> frontier{{}};
    for (uint32_t size = 1; size <= k; ++size) {
        std::vector<std::vector<uint32_t>> next;
        for (const auto& base : frontier)
            for (auto g : ranked) {
                if (!base.empty() && g <= base.back()) continue;
                auto sub = base;
                sub.push_back(g);
                next.push_back(sub);
            }
        subsets.insert(subsets.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    auto cost_of = [&](const std::vector<uint32_t>& sub) {
        uint64_t c = 0;
        for (auto g : sub) c += costs[g];
        return c;
    };
    std::sort(subsets.begin(), subsets.end(),
              [&](const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
                  uint64_t ca = cost_of(a), cb = cost_of(b);
                  if (ca != cb) return ca < cb;
                  return a < b;
              });
    return subsets;
}

}  // namespace

StratifyResult stratify(const ChangeMatrix& m, const std::vector<uint32_t>& costs, uint32_t k) {
    assert(costs.size() == m.num_features);
    StratifyResult out;
    std::vector<bool> is_ranked(m.num_features, false);
    std::vector<uint32_t> ranked;
    uint32_t stage = 0;
    while (ranked.size() < m.num_features) {
        auto supports = candidate_supports(ranked, costs, k);
        std::vector<uint32_t> newly;
        for (uint32_t f = 0; f < m.num_features; ++f) {
            if (is_ranked[f]) continue;
            for (const auto& g : supports) {
                if (!monotone_given(m, f, g)) continue;
                policy::RankEntry entry;
                entry.rank = stage;
                entry.support = g;
                out.ranking.emplace(f, std::move(entry));
                newly.push_back(f);
                break;
            }
        }
        if (newly.empty()) break;
        for (auto f : newly) {
            is_ranked[f] = true;
            ranked.push_back(f);
        }
        std::sort(ranked.begin(), ranked.end());
        ++stage;
    }
    if (ranked.size() == m.num_features) {
        out.ok = true;
    } else {
        for (uint32_t f = 0; f < m.num_features; ++f)
            if (!is_ranked[f]) out.unranked.push_back(f);
    }
    return out;
}

StratifyResult stratify_rules(const policy::Policy& policy, const std::vector<uint32_t>& costs,
                              uint32_t k) {
    return stratify(matrix_from_rules(policy), costs, k);
}

}  // namespace genplan::termination
