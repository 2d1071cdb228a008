#include "genplan/strips.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <unordered_set>

namespace genplan::strips {

namespace {

uint64_t atom_key(predicate_id p, const std::vector<object_id>& args) {
    uint64_t h = hash_combine(0x811c9dc5u, p);
    for (auto a : args) h = hash_combine(h, a);
    return h;
}

std::vector<atom_id> sorted_unique(std::vector<atom_id> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

bool State::contains(atom_id a) const {
    return std::binary_search(atoms.begin(), atoms.end(), a);
}

uint64_t State::hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (auto a : atoms) {
        h ^= a;
        h *= 0x100000001b3ull;
    }
    return h;
}

Instance::Instance(DomainSpec domain, InstanceSpec spec)
    : domain_(std::move(domain)), spec_(std::move(spec)) {
    // Types. Parents that are never declared themselves are registered implicitly.
    auto add_type = [&](const std::string& n) -> type_id {
        auto it = type_ids_.find(n);
        if (it != type_ids_.end()) return it->second;
        type_id id = static_cast<type_id>(type_names_.size());
        type_names_.push_back(n);
        type_parent_.push_back(0);
        type_ids_.emplace(n, id);
        return id;
    };
    add_type("object");
    for (const auto& t : domain_.types) add_type(t.name);
    for (const auto& t : domain_.types) {
        type_id id = type_ids_.at(t.name);
        type_parent_[id] = add_type(t.type);
    }

    // Objects: domain constants precede instance objects, but ids are assigned
    // in ascending name order so that grounding is order-independent of the input.
    std::vector<TypedName> all_objects = domain_.constants;
    all_objects.insert(all_objects.end(), spec_.objects.begin(), spec_.objects.end());
    std::sort(all_objects.begin(), all_objects.end(),
              [](const TypedName& a, const TypedName& b) { return a.name < b.name; });
    std::unordered_set<std::string> constant_names;
    for (const auto& c : domain_.constants) constant_names.insert(c.name);
    for (const auto& o : all_objects) {
        if (object_ids_.count(o.name))
            throw ModelError("duplicate object: " + o.name);
        auto t = type_ids_.find(o.type);
        if (t == type_ids_.end()) throw ModelError("unknown type: " + o.type);
        object_id id = static_cast<object_id>(object_names_.size());
        object_names_.push_back(o.name);
        object_types_.push_back(t->second);
        object_constant_.push_back(constant_names.count(o.name) != 0);
        object_ids_.emplace(o.name, id);
    }

    for (const auto& p : domain_.predicates) {
        if (predicate_ids_.count(p.name))
            throw ModelError("duplicate predicate: " + p.name);
        predicate_id id = static_cast<predicate_id>(predicate_names_.size());
        predicate_names_.push_back(p.name);
        predicate_arity_.push_back(static_cast<uint32_t>(p.params.size()));
        predicate_ids_.emplace(p.name, id);
    }

    static_pred_.assign(predicate_names_.size(), true);
    for (const auto& action : domain_.actions)
        for (const auto& lit : action.effects) {
            auto it = predicate_ids_.find(lit.atom.predicate);
            if (it != predicate_ids_.end()) static_pred_[it->second] = false;
        }

    // Eager atom universe: every type-consistent tuple of every declared predicate.
    atoms_by_predicate_.resize(2 * predicate_names_.size());
    for (predicate_id p = 0; p < predicate_names_.size(); ++p) {
        std::vector<std::vector<object_id>> candidates;
        for (const auto& param : domain_.predicates[p].params) {
            auto t = type_ids_.find(param.type);
            if (t == type_ids_.end()) throw ModelError("unknown type: " + param.type);
            std::vector<object_id> objs;
            for (object_id o = 0; o < object_names_.size(); ++o)
                if (object_has_type(o, t->second)) objs.push_back(o);
            candidates.push_back(std::move(objs));
        }
        std::vector<object_id> tuple(candidates.size());
        // Odometer over candidate lists; empty tuple for nullary predicates.
        std::vector<std::size_t> pos(candidates.size(), 0);
        while (true) {
            bool ok = true;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (candidates[i].empty()) { ok = false; break; }
                tuple[i] = candidates[i][pos[i]];
            }
            if (!ok) break;
            intern_atom(p, tuple);
            std::size_t i = candidates.size();
            while (i > 0) {
                --i;
                if (++pos[i] < candidates[i].size()) break;
                pos[i] = 0;
                if (i == 0) { i = SIZE_MAX; break; }
            }
            if (candidates.empty() || i == SIZE_MAX) break;
        }
    }

    auto resolve_ground = [&](const SpecAtom& a) -> atom_id {
        auto p = predicate_ids_.find(a.predicate);
        if (p == predicate_ids_.end()) throw ModelError("unknown predicate: " + a.predicate);
        if (a.args.size() != predicate_arity_[p->second])
            throw ModelError("arity mismatch for " + a.predicate);
        std::vector<object_id> args;
        for (const auto& n : a.args) args.push_back(object(n));
        atom_id id = find_atom(p->second, args);
        if (id == UINT32_MAX)
            throw ModelError("atom violates predicate typing: " + a.predicate);
        return id;
    };

    std::vector<atom_id> init_atoms;
    for (const auto& a : spec_.init) init_atoms.push_back(resolve_ground(a));
    for (const auto& a : spec_.goal) goal_atom_ids_.push_back(resolve_ground(a));
    goal_atom_ids_ = sorted_unique(std::move(goal_atom_ids_));

    // Static shadow atoms mirroring the goal; they are part of every state and
    // no action mentions them.
    for (auto g : goal_atom_ids_) {
        const GroundAtom& a = atoms_[g];
        init_atoms.push_back(intern_atom(goal_shadow(a.predicate), a.args));
    }
    initial_.atoms = sorted_unique(std::move(init_atoms));
}

atom_id Instance::intern_atom(predicate_id p, std::vector<object_id> args) {
    atom_id found = find_atom(p, args);
    if (found != UINT32_MAX) return found;
    atom_id id = static_cast<atom_id>(atoms_.size());
    atom_index_[atom_key(p, args)].push_back(id);
    atoms_by_predicate_[p].push_back(id);
    atoms_.push_back(GroundAtom{p, std::move(args)});
    return id;
}

atom_id Instance::find_atom(predicate_id p, const std::vector<object_id>& args) const {
    auto it = atom_index_.find(atom_key(p, args));
    if (it == atom_index_.end()) return UINT32_MAX;
    for (atom_id id : it->second) {
        const GroundAtom& a = atoms_[id];
        if (a.predicate == p && a.args == args) return id;
    }
    return UINT32_MAX;
}

object_id Instance::object(const std::string& name) const {
    auto it = object_ids_.find(name);
    if (it == object_ids_.end()) throw ModelError("unknown object: " + name);
    return it->second;
}

bool Instance::has_object(const std::string& name) const { return object_ids_.count(name) != 0; }

predicate_id Instance::predicate(const std::string& name) const {
    auto it = predicate_ids_.find(name);
    if (it == predicate_ids_.end()) throw ModelError("unknown predicate: " + name);
    return it->second;
}

bool Instance::has_predicate(const std::string& name) const {
    return predicate_ids_.count(name) != 0;
}

std::string Instance::atom_name(atom_id a) const {
    const GroundAtom& atom = atoms_[a];
    std::string pred = atom.predicate < predicate_names_.size()
                           ? predicate_names_[atom.predicate]
                           : predicate_names_[atom.predicate - predicate_names_.size()] + "*";
    std::string out = "(" + pred;
    for (auto o : atom.args) out += " " + object_names_[o];
    return out + ")";
}

bool Instance::object_has_type(object_id o, type_id t) const {
    type_id cur = object_types_[o];
    while (true) {
        if (cur == t) return true;
        if (cur == 0) return false;
        cur = type_parent_[cur];
    }
}

type_id Instance::type(const std::string& name) const {
    auto it = type_ids_.find(name);
    if (it == type_ids_.end()) throw ModelError("unknown type: " + name);
    return it->second;
}

std::vector<GroundAction> ground(const Instance& instance) {
    const DomainSpec& domain = instance.domain();

    std::vector<uint32_t> schema_order(domain.actions.size());
    for (uint32_t i = 0; i < schema_order.size(); ++i) schema_order[i] = i;
    std::sort(schema_order.begin(), schema_order.end(), [&](uint32_t a, uint32_t b) {
        return domain.actions[a].name < domain.actions[b].name;
    });

    struct ArgRef {
        bool is_param;
        uint32_t index;  // parameter position or object id
    };
    struct CompiledLiteral {
        predicate_id pred;
        std::vector<ArgRef> args;
        bool negated;
    };

    std::vector<GroundAction> out;
    for (uint32_t schema_idx : schema_order) {
        const ActionSpec& schema = domain.actions[schema_idx];

        auto compile = [&](const Literal& lit) -> CompiledLiteral {
            CompiledLiteral c;
            c.pred = instance.predicate(lit.atom.predicate);
            c.negated = lit.negated;
            for (const auto& arg : lit.atom.args) {
                bool found = false;
                for (uint32_t i = 0; i < schema.params.size(); ++i) {
                    if (schema.params[i].name == arg) {
                        c.args.push_back(ArgRef{true, i});
                        found = true;
                        break;
                    }
                }
                if (!found) c.args.push_back(ArgRef{false, instance.object(arg)});
            }
            return c;
        };

        std::vector<CompiledLiteral> pre, eff;
        for (const auto& l : schema.precondition) pre.push_back(compile(l));
        for (const auto& l : schema.effects) eff.push_back(compile(l));

        std::vector<std::vector<object_id>> candidates;
        for (const auto& param : schema.params) {
            type_id t = instance.type(param.type);
            std::vector<object_id> objs;
            for (object_id o = 0; o < instance.num_objects(); ++o)
                if (instance.object_has_type(o, t)) objs.push_back(o);
            candidates.push_back(std::move(objs));
        }

        std::vector<object_id> binding(candidates.size());
        std::vector<std::size_t> pos(candidates.size(), 0);
        while (true) {
            bool ok = true;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (candidates[i].empty()) { ok = false; break; }
                binding[i] = candidates[i][pos[i]];
            }
            if (!ok) break;

            // Parameters bind pairwise-distinct objects; this plays the role of the
            // (not (= ?x ?y)) guards of the canonical schema sets, which the accepted
            // input fragment cannot express.
            bool distinct = true;
            for (std::size_t i = 0; i < binding.size() && distinct; ++i)
                for (std::size_t j = i + 1; j < binding.size(); ++j)
                    if (binding[i] == binding[j]) { distinct = false; break; }

            bool impossible = !distinct;
            GroundAction ga;
            ga.schema = schema_idx;
            ga.args = binding;
            auto resolve = [&](const CompiledLiteral& c) -> atom_id {
                std::vector<object_id> args;
                for (const auto& r : c.args)
                    args.push_back(r.is_param ? binding[r.index] : r.index);
                return instance.find_atom(c.pred, args);
            };
            for (std::size_t ci = 0; ci < pre.size() && !impossible; ++ci) {
                const auto& c = pre[ci];
                atom_id a = resolve(c);
                if (a == UINT32_MAX) {
                    // Atom outside the typed universe: a positive precondition on it
                    // can never hold, a negative one holds trivially.
                    if (!c.negated) impossible = true;
                    continue;
                }
                (c.negated ? ga.pre_neg : ga.pre_pos).push_back(a);
            }
            if (!impossible) {
                for (const auto& c : eff) {
                    atom_id a = resolve(c);
                    if (a == UINT32_MAX)
                        throw ModelError("effect atom violates predicate typing in " + schema.name);
                    (c.negated ? ga.del : ga.add).push_back(a);
                }
                ga.pre_pos = sorted_unique(std::move(ga.pre_pos));
                ga.pre_neg = sorted_unique(std::move(ga.pre_neg));
                ga.add = sorted_unique(std::move(ga.add));
                ga.del = sorted_unique(std::move(ga.del));
                // An atom both deleted and added stays true: drop it from del.
                std::vector<atom_id> del;
                for (auto a : ga.del)
                    if (!std::binary_search(ga.add.begin(), ga.add.end(), a)) del.push_back(a);
                ga.del = std::move(del);

                ga.name = "(" + schema.name;
                for (auto o : binding) ga.name += " " + instance.object_name(o);
                ga.name += ")";
                out.push_back(std::move(ga));
            }

            if (candidates.empty()) break;
            std::size_t i = candidates.size();
            bool done = false;
            while (i > 0) {
                --i;
                if (++pos[i] < candidates[i].size()) break;
                pos[i] = 0;
                if (i == 0) done = true;
            }
            if (done) break;
        }
    }
    return out;
}

bool applicable(const State& state, const GroundAction& action) {
    for (auto a : action.pre_pos)
        if (!state.contains(a)) return false;
    for (auto a : action.pre_neg)
        if (state.contains(a)) return false;
    return true;
}

State apply(const State& state, const GroundAction& action) {
    State out;
    out.atoms.reserve(state.atoms.size() + action.add.size());
    for (auto a : state.atoms)
        if (!std::binary_search(action.del.begin(), action.del.end(), a)) out.atoms.push_back(a);
    for (auto a : action.add) {
        auto it = std::lower_bound(out.atoms.begin(), out.atoms.end(), a);
        if (it == out.atoms.end() || *it != a) out.atoms.insert(it, a);
    }
    return out;
}

std::vector<std::pair<uint32_t, State>> successors(const State& state,
                                                   const std::vector<GroundAction>& actions) {
    std::vector<std::pair<uint32_t, State>> out;
    for (uint32_t i = 0; i < actions.size(); ++i)
        if (applicable(state, actions[i])) out.emplace_back(i, apply(state, actions[i]));
    return out;
}

bool is_goal(const Instance& instance, const State& state) {
    for (auto a : instance.goal_atoms())
        if (!state.contains(a)) return false;
    return true;
}

State canonical_state(const Instance& instance, const State& state) {
    const std::size_t n = instance.num_objects();
    if (n == 0) return state;

    // Colour refinement over the atoms of this state. Constants are pinned by
    // seeding each with a colour no other object can share.
    std::vector<uint64_t> color(n);
    for (object_id o = 0; o < n; ++o) {
        uint64_t h = hash_combine(0x9e3779b97f4a7c15ull, instance.object_type(o));
        color[o] = hash_combine(h, instance.object_is_constant(o) ? o + 1 : 0);
    }
    auto distinct = [](std::vector<uint64_t> v) {
        std::sort(v.begin(), v.end());
        return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
    };
    auto refine = [&](bool statics_only) {
        std::size_t classes = distinct(color);
        const std::size_t rounds = std::min<std::size_t>(n, 16);
        std::vector<uint64_t> contrib(n);
        for (std::size_t round = 0; round < rounds && classes < n; ++round) {
            std::fill(contrib.begin(), contrib.end(), 0);
            for (atom_id a : state.atoms) {
                const GroundAtom& atom = instance.atom(a);
                if (statics_only && !instance.predicate_is_static(atom.predicate)) continue;
                uint64_t h = hash_combine(0x100000001b3ull, atom.predicate);
                for (auto arg : atom.args) h = hash_combine(h, color[arg]);
                // Summation keeps the aggregate independent of atom enumeration order.
                for (std::size_t i = 0; i < atom.args.size(); ++i)
                    contrib[atom.args[i]] += hash_combine(h, i);
            }
            for (object_id o = 0; o < n; ++o) color[o] = hash_combine(color[o], contrib[o]);
            std::size_t next = distinct(color);
            if (next == classes) break;  // partition stable
            classes = next;
        }
    };

    // Statics first: the grouping below must depend only on the part of the
    // state every sibling state shares (goal shadows included).
    refine(true);
    std::vector<uint64_t> static_color = color;
    refine(false);

    // Hand out each group's original ids in colour order. Objects may only
    // trade places within a (type, static colour) group, so a permutation can
    // never move an object onto one with a different static role.
    std::vector<object_id> perm(n);
    for (object_id o = 0; o < n; ++o) perm[o] = o;
    std::map<std::pair<type_id, uint64_t>, std::vector<object_id>> groups;
    for (object_id o = 0; o < n; ++o) {
        if (instance.object_is_constant(o)) continue;
        groups[{instance.object_type(o), static_color[o]}].push_back(o);  // ascending id
    }
    bool identity = true;
    for (auto& [key, group] : groups) {
        (void)key;
        std::vector<object_id> order = group;
        std::sort(order.begin(), order.end(), [&](object_id a, object_id b) {
            return color[a] != color[b] ? color[a] < color[b] : a < b;
        });
        for (std::size_t i = 0; i < group.size(); ++i) {
            perm[order[i]] = group[i];
            if (order[i] != group[i]) identity = false;
        }
    }
    if (identity) return state;

    // Relabel. The permutation respects declared types, so every image atom
    // should exist; bail out to the identity representative if anything is off.
    State out;
    out.atoms.reserve(state.atoms.size());
    std::vector<object_id> args;
    for (atom_id a : state.atoms) {
        const GroundAtom& atom = instance.atom(a);
        args.assign(atom.args.begin(), atom.args.end());
        for (auto& arg : args) arg = perm[arg];
        atom_id mapped = instance.find_atom(atom.predicate, args);
        if (mapped == UINT32_MAX) return state;
        out.atoms.push_back(mapped);
    }
    std::sort(out.atoms.begin(), out.atoms.end());

    // A usable representative must leave the static part of the state (and with
    // it the goal shadow) untouched, otherwise it describes a different instance.
    auto statics_of = [&](const State& s) {
        std::vector<atom_id> v;
        for (atom_id a : s.atoms)
            if (instance.predicate_is_static(instance.atom(a).predicate)) v.push_back(a);
        return v;
    };
    if (statics_of(out) != statics_of(state)) return state;
    return out;
}

}  // namespace genplan::strips
