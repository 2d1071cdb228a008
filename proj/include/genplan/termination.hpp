#pragma once

#include <cstdint>
#include <vector>

#include "genplan/policy.hpp"

namespace genplan::termination {

//! How one item (a rule or a sampled transition) can move one feature.
//! `entailed` means the item always changes the feature when taken;
//! `excl0`/`excl1` mark the item as inapplicable when the feature is
//! zero/false resp. positive/true at the source.
struct ChangeCell {
    bool may_inc = false;
    bool may_dec = false;
    bool entailed = false;
    bool excl0 = false;
    bool excl1 = false;
};

struct ChangeMatrix {
    uint32_t num_features = 0;
    std::vector<std::vector<ChangeCell>> items;  // item -> feature -> cell

    std::size_t num_items() const { return items.size(); }
};

//! Abstracts rules by their effect tokens: Inc/Dec always count as the move
//! they name, Unk tokens as both directions, SetTrue/SetFalse as a move
//! unless a condition already pins the feature to the target value.
ChangeMatrix matrix_from_rules(const policy::Policy& policy);

//! Exact per-transition changes; `pairs` holds (source, target) value vectors
//! and Boolean features are clamped before differencing.
ChangeMatrix matrix_from_transitions(const std::vector<bool>& kinds_boolean,
                                     const std::vector<std::pair<std::vector<uint32_t>,
                                                                 std::vector<uint32_t>>>& pairs);

//! Source-value tag used by the applicability filters.
enum class ValTag : uint8_t { Zero, Pos };

//! Items that can leave `g` unchanged and can fire when `g` has the tagged
//! value. Unknown-change items stay in: only entailed changes are removed.
std::vector<uint32_t> rho(const ChangeMatrix& m, uint32_t g, ValTag b);

//! No item both may increase and may decrease f (over the given item subset).
bool monotone(const ChangeMatrix& m, uint32_t f);
bool monotone_over(const ChangeMatrix& m, uint32_t f, const std::vector<uint32_t>& items);

//! f is monotone on every item subset obtained by fixing each support feature
//! to one of its source tags and filtering with rho.
bool monotone_given(const ChangeMatrix& m, uint32_t f, const std::vector<uint32_t>& support);

//! Item changes at least one feature whenever it fires.
bool entails_change(const ChangeMatrix& m, std::size_t item);
bool all_entail_change(const ChangeMatrix& m);

struct StratifyResult {
    bool ok = false;
    policy::Ranking ranking;
    std::vector<uint32_t> unranked;  // ascending; empty when ok
};

//! Staged fixpoint: at each stage, rank every still-unranked feature that is
//! monotone given some support of at most `k` features ranked at earlier
//! stages. The support recorded per feature is the lexicographically smallest
//! eligible one of smallest total cost. Fails with the set of features no
//! stage could rank.
StratifyResult stratify(const ChangeMatrix& m, const std::vector<uint32_t>& costs, uint32_t k);

//! Convenience: stratify the rule abstraction of a policy.
StratifyResult stratify_rules(const policy::Policy& policy, const std::vector<uint32_t>& costs,
                              uint32_t k);

}  // namespace genplan::termination
