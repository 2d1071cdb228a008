#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "genplan/base.hpp"
#include "genplan/strips.hpp"

namespace genplan::features {

using strips::DomainSpec;
using strips::Instance;
using strips::State;

struct UnknownSymbol : std::runtime_error {
  explicit UnknownSymbol(const std::string& what) : std::runtime_error(what) {}
};

struct EmptySample : std::runtime_error {
  EmptySample() : std::runtime_error("feature pool sample is empty") {}
};

enum class ConceptKind : uint8_t {
  Top,
  Bot,
  Primitive,
  GoalPrimitive,
  Nominal,
  Not,
  And,
  Exists,
  Forall,
};

enum class RoleKind : uint8_t {
  Primitive,
  GoalPrimitive,
  Inverse,
  TransitiveClosure,
};

struct ConceptNode {
  ConceptKind kind;
  uint32_t pred = 0;      // Primitive / GoalPrimitive
  uint32_t pos = 0;       // argument position within the predicate
  uint32_t constant = 0;  // Nominal: index into DomainSpec::constants
  int32_t left = -1;      // Not / And / Exists / Forall child
  int32_t right = -1;     // And: second child
  int32_t role = -1;      // Exists / Forall
  uint32_t complexity = 1;
  uint32_t depth = 1;
};

struct RoleNode {
  RoleKind kind;
  uint32_t pred = 0;
  int32_t base = -1;  // Inverse / TransitiveClosure
  uint32_t complexity = 1;
  uint32_t depth = 1;
};

// Hash-consed concept/role store. Ids are stable within one registry and
// reference domain predicate indices and domain constant indices, so a
// registry transfers across instances of the same domain.
class Registry {
 public:
  explicit Registry(const DomainSpec& domain);

  uint32_t top();
  uint32_t bot();
  uint32_t primitive(uint32_t pred, uint32_t pos);
  uint32_t goal_primitive(uint32_t pred, uint32_t pos);
  uint32_t nominal(uint32_t constant_index);
  uint32_t negation(uint32_t c);
  uint32_t conjunction(uint32_t a, uint32_t b);
  uint32_t exists(uint32_t role, uint32_t c);
  uint32_t forall(uint32_t role, uint32_t c);

  uint32_t role_primitive(uint32_t pred);
  uint32_t role_goal(uint32_t pred);
  uint32_t role_inverse(uint32_t r);
  uint32_t role_closure(uint32_t r);

  const ConceptNode& concept_at(uint32_t id) const { return concepts_[id]; }
  const RoleNode& role_at(uint32_t id) const { return roles_[id]; }
  const std::string& concept_str(uint32_t id) const { return concept_strs_[id]; }
  const std::string& role_str(uint32_t id) const { return role_strs_[id]; }
  uint32_t concept_count() const { return static_cast<uint32_t>(concepts_.size()); }
  uint32_t role_count() const { return static_cast<uint32_t>(roles_.size()); }
  const DomainSpec& domain() const { return domain_; }

  // Parses the canonical s-expression form produced by concept_str.
  uint32_t parse_concept(const std::string& text);

 private:
  uint32_t intern_concept(ConceptNode node, std::string str);
  uint32_t intern_role(RoleNode node, std::string str);
  uint32_t predicate_index(const std::string& name) const;
  uint32_t constant_index(const std::string& name) const;

  DomainSpec domain_;
  std::vector<ConceptNode> concepts_;
  std::vector<RoleNode> roles_;
  std::vector<std::string> concept_strs_;
  std::vector<std::string> role_strs_;
  std::unordered_map<std::string, uint32_t> concept_by_str_;
  std::unordered_map<std::string, uint32_t> role_by_str_;
};

struct Feature {
  uint32_t id = 0;
  bool boolean = false;
  uint32_t concept_id = 0;
  uint32_t complexity = 1;
};

// Pruning/scoring sample: transitions grouped with their owning instances.
struct SampleItem {
  const Instance* instance = nullptr;
  State s;
  State t;
};
using Sample = std::vector<SampleItem>;

class FeaturePool {
 public:
  FeaturePool(Registry registry, std::vector<Feature> features, uint32_t complexity_bound,
              uint32_t depth_bound, uint32_t sample_states, uint32_t sample_transitions)
      : registry_(std::move(registry)),
        features_(std::move(features)),
        complexity_bound_(complexity_bound),
        depth_bound_(depth_bound),
        sample_states_(sample_states),
        sample_transitions_(sample_transitions) {}

  const Registry& registry() const { return registry_; }
  Registry& registry() { return registry_; }
  const std::vector<Feature>& features() const { return features_; }
  const Feature& feature(uint32_t id) const { return features_[id]; }
  uint32_t size() const { return static_cast<uint32_t>(features_.size()); }
  uint32_t complexity_bound() const { return complexity_bound_; }
  uint32_t depth_bound() const { return depth_bound_; }
  uint32_t sample_states() const { return sample_states_; }
  uint32_t sample_transitions() const { return sample_transitions_; }

  std::string to_json() const;
  static FeaturePool from_json(const DomainSpec& domain, const std::string& text);

 private:
  Registry registry_;
  std::vector<Feature> features_;
  uint32_t complexity_bound_;
  uint32_t depth_bound_;
  uint32_t sample_states_ = 0;
  uint32_t sample_transitions_ = 0;
};

// Per-instance denotation evaluator with a per-state memo. set_state clears
// the memo unless the state is unchanged.
class Evaluator {
 public:
  Evaluator(const Instance& instance, const Registry& registry);

  const Bits& concept_den(uint32_t concept_id, const State& s);
  const Bits& role_den(uint32_t role_id, const State& s);
  uint32_t raw_count(uint32_t concept_id, const State& s);

  const Instance& instance() const { return inst_; }

 private:
  void set_state(const State& s);

  const Instance& inst_;
  const Registry& reg_;
  uint32_t n_;  // object count
  std::vector<uint32_t> nominal_object_;  // constant index -> object id
  State cur_;
  bool have_state_ = false;
  uint64_t cur_hash_ = 0;
  std::vector<std::optional<Bits>> cden_;
  std::vector<std::optional<Bits>> rden_;

  const Bits& eval_concept(uint32_t id);
  const Bits& eval_role(uint32_t id);
};

uint32_t eval_feature(const FeaturePool& pool, uint32_t fid, Evaluator& ev, const State& s);
uint32_t bool_value(const FeaturePool& pool, uint32_t fid, Evaluator& ev, const State& s);
// Raw value clamped to {0,1} for Boolean-kind features; exact count otherwise.
uint32_t feature_value(const FeaturePool& pool, uint32_t fid, Evaluator& ev, const State& s);

FeaturePool generate_pool(const DomainSpec& domain, const Sample& sample,
                          uint32_t complexity_bound, uint32_t depth_bound);

}  // namespace genplan::features
