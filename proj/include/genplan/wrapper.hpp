#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "genplan/features.hpp"
#include "genplan/genex.hpp"
#include "genplan/planner.hpp"
#include "genplan/policy.hpp"
#include "genplan/strips.hpp"

namespace genplan::wrapper {

//! How the active training subset grows when the learned policy fails on an
//! instance outside it. S1 keeps a single active instance and walks the
//! training order; S2 accumulates failing instances. Auto runs S1 to
//! exhaustion, then restarts with S2 from the seed data.
enum class Strategy : uint8_t { S1, S2, Auto };

struct Options {
    uint32_t complexity_bound = 6;
    uint32_t depth_bound = 0;  // 0 = unbounded
    uint32_t k = 1;            // support-size bound for the reported ranking
    Strategy strategy = Strategy::Auto;
    bool simplify = false;
    uint64_t node_budget = 0;  // per search/verification call; 0 = unlimited
    double time_budget = 0;    // seconds for the whole run; 0 = unlimited
    uint32_t jobs = 1;
    const features::FeaturePool* pool = nullptr;  // reuse instead of generating
};

struct RunReport {
    uint32_t num_instances = 0;  // training instances kept (|Q|)
    uint64_t seed_expanded = 0;  // states expanded while seeding (|S|)
    uint32_t pool_size = 0;      // features in the pool (|F|)
    bool stratified = false;
    uint32_t outer = 0;        // outer iterations (active-set changes)
    uint32_t inner_total = 0;  // selection/verification rounds, summed
    uint32_t active_size = 0;  // |Q'| at the end
    uint32_t inner_last = 0;   // rounds in the last outer iteration
    uint32_t xplus = 0, xminus = 0;  // labeled transitions at the last round
    uint32_t hsp_size = 0;           // subsets to hit at the last round (|H|)
    uint32_t scope = 0;              // selected features (|G|)
    uint32_t rules = 0;              // policy rules (|pi|)
    double prep_seconds = 0, genex_seconds = 0, verify_seconds = 0, total_seconds = 0;

    std::string to_table() const;
    std::string to_json() const;
};

enum class FailReason : uint8_t {
    Edge,       // the pool cannot hit a required subset or order the features
    Exhausted,  // the strategy ran out of active sets to try
    Timeout,    // node or time budget ran out
};

std::string reason_name(FailReason r);

struct TrainingInstance {
    std::string name;
    const strips::Instance* instance = nullptr;
};

struct LearnSuccess {
    policy::Policy policy;
    features::FeaturePool pool;
    policy::Ranking ranking;
    RunReport report;
};

struct LearnFailure {
    FailReason reason;
    std::string detail;
    RunReport report;
};

using LearnResult = std::variant<LearnSuccess, LearnFailure>;

//! Learns a policy that solves every training instance, growing the labeled
//! transition sets from verification counterexamples. Training instances are
//! ordered by decreasing seed plan length (ties by name); unsolvable ones are
//! dropped.
LearnResult learn(const std::vector<TrainingInstance>& instances, const Options& opts);

//! Next active singleton under S1: the failing instance if it lies further
//! down the order than the current one, otherwise the current one's successor.
//! nullopt when that candidate was already tried or runs off the end.
std::optional<uint32_t> next_singleton(uint32_t current, uint32_t failing, uint32_t count,
                                       const std::vector<bool>& visited);

//! Next active set under S2: add the failing instance unless it lies beyond
//! every current member, in which case it replaces the set.
std::vector<uint32_t> next_active_set(const std::vector<uint32_t>& active, uint32_t failing);

//! Greedy generalization of a learned policy: drop conditions and loosen
//! exact effects one at a time, keeping an edit only if every rule still
//! entails a change, the given ranking certificate still verifies, and no
//! negative value pair becomes compatible. Deterministic sweep order; runs to
//! a fixpoint, then removes duplicate rules.
policy::Policy simplify_policy(
    const policy::Policy& pi, const policy::Ranking& certificate,
    const std::vector<std::pair<std::vector<uint32_t>, std::vector<uint32_t>>>& neg_pairs);

}  // namespace genplan::wrapper
