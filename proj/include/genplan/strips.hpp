#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "genplan/base.hpp"

namespace genplan::strips {

using object_id = uint32_t;
using predicate_id = uint32_t;
using type_id = uint32_t;
using atom_id = uint32_t;

//! Name with an optional type; type defaults to the root type "object".
struct TypedName {
    std::string name;
    std::string type = "object";
    bool operator==(const TypedName&) const = default;
};

//! Atom as written in a DomainSpec: predicate name applied to variables or object names.
struct SpecAtom {
    std::string predicate;
    std::vector<std::string> args;
    bool operator==(const SpecAtom&) const = default;
};

struct Literal {
    SpecAtom atom;
    bool negated = false;
    bool operator==(const Literal&) const = default;
};

struct PredicateSpec {
    std::string name;
    std::vector<TypedName> params;
    bool operator==(const PredicateSpec&) const = default;
};

//! Action schema; effects with negated=true are deletes.
struct ActionSpec {
    std::string name;
    std::vector<TypedName> params;
    std::vector<Literal> precondition;
    std::vector<Literal> effects;
    bool operator==(const ActionSpec&) const = default;
};

struct DomainSpec {
    std::string name;
    std::vector<std::string> requirements;
    std::vector<TypedName> types;      // name + parent type
    std::vector<TypedName> constants;
    std::vector<PredicateSpec> predicates;
    std::vector<ActionSpec> actions;
    bool operator==(const DomainSpec&) const = default;
};

struct InstanceSpec {
    std::string name;
    std::string domain_name;
    std::vector<TypedName> objects;    // problem objects, excluding domain constants
    std::vector<SpecAtom> init;
    std::vector<SpecAtom> goal;
    bool operator==(const InstanceSpec&) const = default;
};

//! Inconsistency detected while building the ground model from validated specs.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! Set of ground atoms, sorted ascending by atom id.
struct State {
    std::vector<atom_id> atoms;

    bool contains(atom_id a) const;
    bool operator==(const State&) const = default;
    uint64_t hash() const;
};

struct StateHash {
    uint64_t operator()(const State& s) const { return s.hash(); }
};

struct GroundAtom {
    predicate_id predicate;
    std::vector<object_id> args;
};

struct GroundAction {
    uint32_t schema;                 // index into Instance::schemas()
    std::vector<object_id> args;
    std::vector<atom_id> pre_pos, pre_neg, add, del;  // sorted; del excludes atoms re-added
    std::string name;                // "(pick ball1 left)"
};

//! Ground model of one problem instance. Immutable once constructed; the atom
//! universe is instantiated eagerly over type-consistent argument tuples, and
//! every predicate p gets a static shadow predicate holding the goal atoms of p.
class Instance {
public:
    Instance(DomainSpec domain, InstanceSpec spec);

    const DomainSpec& domain() const { return domain_; }
    const InstanceSpec& spec() const { return spec_; }
    const std::string& name() const { return spec_.name; }

    std::size_t num_objects() const { return object_names_.size(); }
    const std::string& object_name(object_id o) const { return object_names_[o]; }
    //! Returns the id of a known object name; throws ModelError otherwise.
    object_id object(const std::string& name) const;
    bool has_object(const std::string& name) const;

    std::size_t num_predicates() const { return predicate_names_.size(); }  // declared only
    const std::string& predicate_name(predicate_id p) const { return predicate_names_[p]; }
    predicate_id predicate(const std::string& name) const;
    bool has_predicate(const std::string& name) const;
    uint32_t predicate_arity(predicate_id p) const { return predicate_arity_[p]; }
    //! Shadow predicate whose denotation is the goal atoms of p.
    predicate_id goal_shadow(predicate_id p) const { return p + static_cast<predicate_id>(predicate_names_.size()); }

    std::size_t num_atoms() const { return atoms_.size(); }
    const GroundAtom& atom(atom_id a) const { return atoms_[a]; }
    //! Atom ids of one predicate (shadow predicates included), ascending.
    const std::vector<atom_id>& atoms_of(predicate_id p) const { return atoms_by_predicate_[p]; }
    std::string atom_name(atom_id a) const;

    const State& initial_state() const { return initial_; }
    const std::vector<atom_id>& goal_atoms() const { return goal_atom_ids_; }

    const std::vector<ActionSpec>& schemas() const { return domain_.actions; }

    //! True iff o's type is t or a subtype of t.
    bool object_has_type(object_id o, type_id t) const;
    type_id type(const std::string& name) const;
    type_id object_type(object_id o) const { return object_types_[o]; }
    bool object_is_constant(object_id o) const { return object_constant_[o]; }
    //! True iff no action effect can touch p; shadow predicates always are.
    bool predicate_is_static(predicate_id p) const {
        return p >= predicate_names_.size() || static_pred_[p];
    }

    atom_id find_atom(predicate_id p, const std::vector<object_id>& args) const;

private:
    friend std::vector<GroundAction> ground(const Instance&);

    atom_id intern_atom(predicate_id p, std::vector<object_id> args);

    DomainSpec domain_;
    InstanceSpec spec_;

    std::vector<std::string> object_names_;             // sorted ascending
    std::unordered_map<std::string, object_id> object_ids_;
    std::vector<type_id> object_types_;
    std::vector<bool> object_constant_;                 // declared in the domain
    std::vector<bool> static_pred_;

    std::vector<std::string> type_names_;               // [0] == "object"
    std::unordered_map<std::string, type_id> type_ids_;
    std::vector<type_id> type_parent_;

    std::vector<std::string> predicate_names_;          // declared predicates
    std::unordered_map<std::string, predicate_id> predicate_ids_;
    std::vector<uint32_t> predicate_arity_;

    std::vector<GroundAtom> atoms_;
    std::vector<std::vector<atom_id>> atoms_by_predicate_;  // indexed up to 2 * num_predicates
    std::unordered_map<uint64_t, std::vector<atom_id>> atom_index_;

    State initial_;
    std::vector<atom_id> goal_atom_ids_;
};

//! All type-consistent ground actions, ordered lexicographically by schema
//! name and then by bound object names.
std::vector<GroundAction> ground(const Instance& instance);

bool applicable(const State& state, const GroundAction& action);

//! Deletes are applied before adds.
State apply(const State& state, const GroundAction& action);

//! Applicable (action index, successor) pairs in ground-action order.
std::vector<std::pair<uint32_t, State>> successors(const State& state,
                                                   const std::vector<GroundAction>& actions);

bool is_goal(const Instance& instance, const State& state);

//! Canonical representative of state under type-respecting, constant-fixing
//! object renamings. Two states with equal canonical forms are isomorphic;
//! the renaming is dropped (identity returned) whenever it fails to map the
//! static or goal-shadow atom sets onto themselves, so merging canonical
//! forms is always sound. Used to quotient policy-graph exploration.
State canonical_state(const Instance& instance, const State& state);

}  // namespace genplan::strips
