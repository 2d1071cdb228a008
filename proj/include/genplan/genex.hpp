#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "genplan/features.hpp"
#include "genplan/policy.hpp"
#include "genplan/termination.hpp"

namespace genplan::genex {

//! A positive or negative training transition marked with both endpoints both
//! for labeling and for later projection into rules.
struct LabeledTransition {
    const strips::Instance* instance = nullptr;
    strips::State s, t;
};

//! Value-level view of the training data: everything the selection needs,
//! detached from instances so synthetic inputs can drive it directly.
//! `state_values` rows are feature value vectors (Boolean features clamped),
//! `pos_edges`/`neg_edges` index into the rows.
struct SampleSigs {
    std::vector<bool> kinds_boolean;
    std::vector<uint32_t> costs;
    std::vector<std::vector<uint32_t>> state_values;
    std::vector<bool> goal_flag;
    std::vector<std::pair<uint32_t, uint32_t>> pos_edges;
    std::vector<std::pair<uint32_t, uint32_t>> neg_edges;

    std::size_t num_features() const { return kinds_boolean.size(); }
};

//! Same transition listed as both good and bad: the sample is contradictory.
struct OverlapError : std::runtime_error {
    explicit OverlapError(const std::string& what) : std::runtime_error(what) {}
};

//! Evaluates the pool on all transition endpoints and packs the value tables.
SampleSigs make_sigs(const features::FeaturePool& pool,
                     const std::vector<LabeledTransition>& pos,
                     const std::vector<LabeledTransition>& neg);

//! The subsets a feature selection must hit, in a fixed reportable order:
//! one per positive edge (features changing on it), one per positive/negative
//! edge pair (features telling them apart), one per goal/non-goal state pair
//! among positive-edge endpoints (features separating them).
struct HittingSets {
    std::vector<Bits> subsets;  // bit i set = feature i hits the subset
    std::vector<std::string> provenance;
};

HittingSets build_hsp(const SampleSigs& sigs);

//! (source truth value, change direction) of a feature across an edge; two
//! edges a rule could tell apart differ in some feature's signature.
struct EdgeSig {
    bool src_true = false;
    int dir = 0;  // -1, 0, +1
    bool operator==(const EdgeSig&) const = default;
};

EdgeSig edge_sig(const SampleSigs& sigs, uint32_t f, std::pair<uint32_t, uint32_t> edge);

struct Success {
    std::vector<uint32_t> features;  // selected, in introduction order
    policy::Ranking ranking;         // keyed by position in `features`
};

enum class FailureKind : uint8_t {
    EdgeUnhit,   // some required subset is empty: no feature in the pool helps
    NoEligible,  // subsets remain but no ordering-consistent chain hits them
};

struct Failure {
    FailureKind kind;
    uint32_t subset = 0;  // minimal-index unhit subset
    std::string detail;
};

using Result = std::variant<Success, Failure>;

//! Greedy minimum-cost hitting-set selection. Candidates are support chains:
//! paths from an outright-monotone feature along edges g -> f where f is
//! monotone given g over the positive edges, so every selected feature comes
//! with a termination certificate. Each pick maximizes newly hit subsets per
//! unit of chain cost (selected features cost nothing); ties prefer cheaper
//! chains, then the earlier target feature. When `trace` is non-null a JSON
//! log of the picks is stored into it.
Result run_genex(const SampleSigs& sigs, std::string* trace = nullptr);

}  // namespace genplan::genex
