#include "genplan/features.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>

#include <json.hpp>

namespace genplan::features {

namespace {

std::string pos_str(uint32_t pos) { return std::to_string(pos); }

}  // namespace

Registry::Registry(const DomainSpec& domain) : domain_(domain) {}

uint32_t Registry::intern_concept(ConceptNode node, std::string str) {
    auto it = concept_by_str_.find(str);
    if (it != concept_by_str_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(concepts_.size());
    concepts_.push_back(node);
    concept_strs_.push_back(str);
    concept_by_str_.emplace(std::move(str), id);
    return id;
}

uint32_t Registry::intern_role(RoleNode node, std::string str) {
    auto it = role_by_str_.find(str);
    if (it != role_by_str_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(roles_.size());
    roles_.push_back(node);
    role_strs_.push_back(str);
    role_by_str_.emplace(std::move(str), id);
    return id;
}

uint32_t Registry::predicate_index(const std::string& name) const {
    for (uint32_t i = 0; i < domain_.predicates.size(); ++i)
        if (domain_.predicates[i].name == name) return i;
    throw UnknownSymbol("unknown predicate: " + name);
}

uint32_t Registry::constant_index(const std::string& name) const {
    for (uint32_t i = 0; i < domain_.constants.size(); ++i)
        if (domain_.constants[i].name == name) return i;
    throw UnknownSymbol("unknown constant: " + name);
}

uint32_t Registry::top() {
    ConceptNode n{};
    n.kind = ConceptKind::Top;
    return intern_concept(n, "top");
}

uint32_t Registry::bot() {
    ConceptNode n{};
    n.kind = ConceptKind::Bot;
    return intern_concept(n, "bot");
}

uint32_t Registry::primitive(uint32_t pred, uint32_t pos) {
    if (pred >= domain_.predicates.size()) throw UnknownSymbol("predicate index out of range");
    if (pos >= domain_.predicates[pred].params.size())
        throw UnknownSymbol("argument position out of range for " + domain_.predicates[pred].name);
    ConceptNode n{};
    n.kind = ConceptKind::Primitive;
    n.pred = pred;
    n.pos = pos;
    return intern_concept(n, "(prim " + domain_.predicates[pred].name + " " + pos_str(pos) + ")");
}

uint32_t Registry::goal_primitive(uint32_t pred, uint32_t pos) {
    if (pred >= domain_.predicates.size()) throw UnknownSymbol("predicate index out of range");
    if (pos >= domain_.predicates[pred].params.size())
        throw UnknownSymbol("argument position out of range for " + domain_.predicates[pred].name);
    ConceptNode n{};
    n.kind = ConceptKind::GoalPrimitive;
    n.pred = pred;
    n.pos = pos;
    return intern_concept(n, "(goal " + domain_.predicates[pred].name + " " + pos_str(pos) + ")");
}

uint32_t Registry::nominal(uint32_t constant_index) {
    if (constant_index >= domain_.constants.size())
        throw UnknownSymbol("constant index out of range");
    ConceptNode n{};
    n.kind = ConceptKind::Nominal;
    n.constant = constant_index;
    return intern_concept(n, "(nom " + domain_.constants[constant_index].name + ")");
}

uint32_t Registry::negation(uint32_t c) {
    const ConceptNode& child = concepts_[c];
    if (child.kind == ConceptKind::Not) return child.left;
    if (child.kind == ConceptKind::Top) return bot();
    if (child.kind == ConceptKind::Bot) return top();
    ConceptNode n{};
    n.kind = ConceptKind::Not;
    n.left = static_cast<int32_t>(c);
    n.complexity = 1 + child.complexity;
    n.depth = 1 + child.depth;
    return intern_concept(n, "(not " + concept_strs_[c] + ")");
}

uint32_t Registry::conjunction(uint32_t a, uint32_t b) {
    if (a == b) return a;
    if (concepts_[a].kind == ConceptKind::Top) return b;
    if (concepts_[b].kind == ConceptKind::Top) return a;
    if (concepts_[a].kind == ConceptKind::Bot || concepts_[b].kind == ConceptKind::Bot)
        return bot();
    if (concept_strs_[b] < concept_strs_[a]) std::swap(a, b);
    ConceptNode n{};
    n.kind = ConceptKind::And;
    n.left = static_cast<int32_t>(a);
    n.right = static_cast<int32_t>(b);
    n.complexity = 1 + concepts_[a].complexity + concepts_[b].complexity;
    n.depth = 1 + std::max(concepts_[a].depth, concepts_[b].depth);
    return intern_concept(n, "(and " + concept_strs_[a] + " " + concept_strs_[b] + ")");
}

uint32_t Registry::exists(uint32_t role, uint32_t c) {
    ConceptNode n{};
    n.kind = ConceptKind::Exists;
    n.role = static_cast<int32_t>(role);
    n.left = static_cast<int32_t>(c);
    n.complexity = 1 + roles_[role].complexity + concepts_[c].complexity;
    n.depth = 1 + std::max(roles_[role].depth, concepts_[c].depth);
    return intern_concept(n, "(some " + role_strs_[role] + " " + concept_strs_[c] + ")");
}

uint32_t Registry::forall(uint32_t role, uint32_t c) {
    ConceptNode n{};
    n.kind = ConceptKind::Forall;
    n.role = static_cast<int32_t>(role);
    n.left = static_cast<int32_t>(c);
    n.complexity = 1 + roles_[role].complexity + concepts_[c].complexity;
    n.depth = 1 + std::max(roles_[role].depth, concepts_[c].depth);
    return intern_concept(n, "(all " + role_strs_[role] + " " + concept_strs_[c] + ")");
}

uint32_t Registry::role_primitive(uint32_t pred) {
    if (pred >= domain_.predicates.size()) throw UnknownSymbol("predicate index out of range");
    if (domain_.predicates[pred].params.size() != 2)
        throw UnknownSymbol("role requires a binary predicate: " + domain_.predicates[pred].name);
    RoleNode n{};
    n.kind = RoleKind::Primitive;
    n.pred = pred;
    return intern_role(n, "(role " + domain_.predicates[pred].name + ")");
}

uint32_t Registry::role_goal(uint32_t pred) {
    if (pred >= domain_.predicates.size()) throw UnknownSymbol("predicate index out of range");
    if (domain_.predicates[pred].params.size() != 2)
        throw UnknownSymbol("role requires a binary predicate: " + domain_.predicates[pred].name);
    RoleNode n{};
    n.kind = RoleKind::GoalPrimitive;
    n.pred = pred;
    return intern_role(n, "(grole " + domain_.predicates[pred].name + ")");
}

uint32_t Registry::role_inverse(uint32_t r) {
    const RoleNode& base = roles_[r];
    if (base.kind == RoleKind::Inverse) return static_cast<uint32_t>(base.base);
    RoleNode n{};
    n.kind = RoleKind::Inverse;
    n.base = static_cast<int32_t>(r);
    n.complexity = 1 + base.complexity;
    n.depth = 1 + base.depth;
    return intern_role(n, "(inv " + role_strs_[r] + ")");
}

uint32_t Registry::role_closure(uint32_t r) {
    if (roles_[r].kind == RoleKind::TransitiveClosure) return r;
    RoleNode n{};
    n.kind = RoleKind::TransitiveClosure;
    n.base = static_cast<int32_t>(r);
    n.complexity = 1 + roles_[r].complexity;
    n.depth = 1 + roles_[r].depth;
    return intern_role(n, "(tc " + role_strs_[r] + ")");
}

namespace {

struct Tokens {
    std::vector<std::string> items;
    std::size_t pos = 0;

    const std::string& peek() const {
        if (pos >= items.size()) throw UnknownSymbol("unexpected end of expression");
        return items[pos];
    }
    std::string next() {
        if (pos >= items.size()) throw UnknownSymbol("unexpected end of expression");
        return items[pos++];
    }
    void expect(const std::string& t) {
        if (next() != t) throw UnknownSymbol("expected '" + t + "' in expression");
    }
};

Tokens tokenize(const std::string& text) {
    Tokens out;
    std::string cur;
    for (char ch : text) {
        if (ch == '(' || ch == ')' || ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            if (!cur.empty()) {
                out.items.push_back(cur);
                cur.clear();
            }
            if (ch == '(' || ch == ')') out.items.push_back(std::string(1, ch));
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.items.push_back(cur);
    return out;
}

uint32_t parse_position(const std::string& tok) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw UnknownSymbol("expected argument position, got '" + tok + "'");
    return static_cast<uint32_t>(std::stoul(tok));
}

}  // namespace

uint32_t Registry::parse_concept(const std::string& text) {
    Tokens toks = tokenize(text);

    constexpr int kMaxDepth = 256;

    // Mutually recursive via explicit lambdas; depth-capped since the input
    // may come from an untrusted file.
    std::function<uint32_t(int)> parse_c;
    std::function<uint32_t(int)> parse_r;

    parse_r = [&](int depth) -> uint32_t {
        if (depth > kMaxDepth) throw UnknownSymbol("expression too deeply nested");
        toks.expect("(");
        std::string head = toks.next();
        uint32_t out;
        if (head == "role") {
            out = role_primitive(predicate_index(toks.next()));
        } else if (head == "grole") {
            out = role_goal(predicate_index(toks.next()));
        } else if (head == "inv") {
            out = role_inverse(parse_r(depth + 1));
        } else if (head == "tc") {
            out = role_closure(parse_r(depth + 1));
        } else {
            throw UnknownSymbol("unknown role constructor: " + head);
        }
        toks.expect(")");
        return out;
    };

    parse_c = [&](int depth) -> uint32_t {
        if (depth > kMaxDepth) throw UnknownSymbol("expression too deeply nested");
        const std::string& tok = toks.peek();
        if (tok == "top") {
            toks.next();
            return top();
        }
        if (tok == "bot") {
            toks.next();
            return bot();
        }
        toks.expect("(");
        std::string head = toks.next();
        uint32_t out;
        if (head == "prim") {
            uint32_t pred = predicate_index(toks.next());
            out = primitive(pred, parse_position(toks.next()));
        } else if (head == "goal") {
            uint32_t pred = predicate_index(toks.next());
            out = goal_primitive(pred, parse_position(toks.next()));
        } else if (head == "nom") {
            out = nominal(constant_index(toks.next()));
        } else if (head == "not") {
            out = negation(parse_c(depth + 1));
        } else if (head == "and") {
            uint32_t a = parse_c(depth + 1);
            uint32_t b = parse_c(depth + 1);
            out = conjunction(a, b);
        } else if (head == "some") {
            uint32_t r = parse_r(depth + 1);
            out = exists(r, parse_c(depth + 1));
        } else if (head == "all") {
            uint32_t r = parse_r(depth + 1);
            out = forall(r, parse_c(depth + 1));
        } else {
            throw UnknownSymbol("unknown concept constructor: " + head);
        }
        toks.expect(")");
        return out;
    };

    uint32_t id = parse_c(0);
    if (toks.pos != toks.items.size())
        throw UnknownSymbol("trailing tokens after expression");
    return id;
}

Evaluator::Evaluator(const Instance& instance, const Registry& registry)
    : inst_(instance), reg_(registry), n_(static_cast<uint32_t>(instance.num_objects())) {
    for (const auto& c : registry.domain().constants)
        nominal_object_.push_back(instance.object(c.name));
}

void Evaluator::set_state(const State& s) {
    uint64_t h = s.hash();
    if (have_state_ && cur_hash_ == h && cur_.atoms == s.atoms) return;
    cur_ = s;
    cur_hash_ = h;
    have_state_ = true;
    cden_.assign(reg_.concept_count(), std::nullopt);
    rden_.assign(reg_.role_count(), std::nullopt);
}

const Bits& Evaluator::concept_den(uint32_t concept_id, const State& s) {
    set_state(s);
    if (cden_.size() < reg_.concept_count()) cden_.resize(reg_.concept_count());
    if (rden_.size() < reg_.role_count()) rden_.resize(reg_.role_count());
    return eval_concept(concept_id);
}

const Bits& Evaluator::role_den(uint32_t role_id, const State& s) {
    set_state(s);
    if (cden_.size() < reg_.concept_count()) cden_.resize(reg_.concept_count());
    if (rden_.size() < reg_.role_count()) rden_.resize(reg_.role_count());
    return eval_role(role_id);
}

uint32_t Evaluator::raw_count(uint32_t concept_id, const State& s) {
    return static_cast<uint32_t>(concept_den(concept_id, s).count());
}

const Bits& Evaluator::eval_concept(uint32_t id) {
    if (cden_[id]) return *cden_[id];
    const ConceptNode node = reg_.concept_at(id);
    Bits out(n_);
    switch (node.kind) {
        case ConceptKind::Top:
            for (uint32_t i = 0; i < n_; ++i) out.set(i);
            break;
        case ConceptKind::Bot:
            break;
        case ConceptKind::Primitive:
        case ConceptKind::GoalPrimitive: {
            strips::predicate_id target = node.kind == ConceptKind::Primitive
                                              ? node.pred
                                              : inst_.goal_shadow(node.pred);
            for (auto a : cur_.atoms) {
                const strips::GroundAtom& atom = inst_.atom(a);
                if (atom.predicate == target) out.set(atom.args[node.pos]);
            }
            break;
        }
        case ConceptKind::Nominal:
            out.set(nominal_object_[node.constant]);
            break;
        case ConceptKind::Not: {
            const Bits& child = eval_concept(static_cast<uint32_t>(node.left));
            for (uint32_t i = 0; i < n_; ++i)
                if (!child.test(i)) out.set(i);
            break;
        }
        case ConceptKind::And: {
            out = eval_concept(static_cast<uint32_t>(node.left));
            out &= eval_concept(static_cast<uint32_t>(node.right));
            break;
        }
        case ConceptKind::Exists: {
            const Bits& child = eval_concept(static_cast<uint32_t>(node.left));
            const Bits& rel = eval_role(static_cast<uint32_t>(node.role));
            for (auto idx : rel.to_indices())
                if (child.test(idx % n_)) out.set(idx / n_);
            break;
        }
        case ConceptKind::Forall: {
            const Bits& child = eval_concept(static_cast<uint32_t>(node.left));
            const Bits& rel = eval_role(static_cast<uint32_t>(node.role));
            // Vacuous truth: objects without successors satisfy the guard.
            for (uint32_t i = 0; i < n_; ++i) out.set(i);
            for (auto idx : rel.to_indices())
                if (!child.test(idx % n_)) out.reset(idx / n_);
            break;
        }
    }
    cden_[id] = std::move(out);
    return *cden_[id];
}

const Bits& Evaluator::eval_role(uint32_t id) {
    if (rden_[id]) return *rden_[id];
    const RoleNode node = reg_.role_at(id);
    Bits out(static_cast<std::size_t>(n_) * n_);
    switch (node.kind) {
        case RoleKind::Primitive:
        case RoleKind::GoalPrimitive: {
            strips::predicate_id target = node.kind == RoleKind::Primitive
                                              ? node.pred
                                              : inst_.goal_shadow(node.pred);
            for (auto a : cur_.atoms) {
                const strips::GroundAtom& atom = inst_.atom(a);
                if (atom.predicate == target)
                    out.set(static_cast<std::size_t>(atom.args[0]) * n_ + atom.args[1]);
            }
            break;
        }
        case RoleKind::Inverse: {
            const Bits& base = eval_role(static_cast<uint32_t>(node.base));
            for (auto idx : base.to_indices())
                out.set(static_cast<std::size_t>(idx % n_) * n_ + idx / n_);
            break;
        }
        case RoleKind::TransitiveClosure: {
            const Bits& base = eval_role(static_cast<uint32_t>(node.base));
            std::vector<std::vector<uint32_t>> adj(n_);
            for (auto idx : base.to_indices()) adj[idx / n_].push_back(idx % n_);
            std::vector<uint32_t> stack;
            std::vector<bool> seen(n_);
            for (uint32_t x = 0; x < n_; ++x) {
                if (adj[x].empty()) continue;
                std::fill(seen.begin(), seen.end(), false);
                stack.assign(adj[x].begin(), adj[x].end());
                while (!stack.empty()) {
                    uint32_t y = stack.back();
                    stack.pop_back();
                    if (seen[y]) continue;
                    seen[y] = true;
                    out.set(static_cast<std::size_t>(x) * n_ + y);
                    for (auto z : adj[y]) stack.push_back(z);
                }
            }
            break;
        }
    }
    rden_[id] = std::move(out);
    return *rden_[id];
}

uint32_t eval_feature(const FeaturePool& pool, uint32_t fid, Evaluator& ev, const State& s) {
    return ev.raw_count(pool.feature(fid).concept_id, s);
}

uint32_t bool_value(const FeaturePool& pool, uint32_t fid, Evaluator& ev, const State& s) {
    return eval_feature(pool, fid, ev, s) > 0 ? 1 : 0;
}

uint32_t feature_value(const FeaturePool& pool, uint32_t fid, Evaluator& ev, const State& s) {
    const Feature& f = pool.feature(fid);
    uint32_t v = ev.raw_count(f.concept_id, s);
    return f.boolean ? (v > 0 ? 1 : 0) : v;
}

std::string FeaturePool::to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["domain"] = registry_.domain().name;
    j["complexity_bound"] = complexity_bound_;
    j["depth_bound"] = depth_bound_;
    j["sample_states"] = sample_states_;
    j["sample_transitions"] = sample_transitions_;
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : features_) {
        nlohmann::json jf;
        jf["concept"] = registry_.concept_str(f.concept_id);
        jf["boolean"] = f.boolean;
        jf["complexity"] = f.complexity;
        feats.push_back(std::move(jf));
    }
    j["features"] = std::move(feats);
    return j.dump(2) + "\n";
}

FeaturePool FeaturePool::from_json(const DomainSpec& domain, const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("schema") || j["schema"].get<int>() != 1)
        throw std::runtime_error("unsupported feature pool schema");
    if (j.contains("domain") && j["domain"].get<std::string>() != domain.name)
        throw std::runtime_error("feature pool was built for domain '" +
                                 j["domain"].get<std::string>() + "'");
    Registry reg(domain);
    std::vector<Feature> feats;
    for (const auto& jf : j.at("features")) {
        Feature f;
        f.id = static_cast<uint32_t>(feats.size());
        f.concept_id = reg.parse_concept(jf.at("concept").get<std::string>());
        f.boolean = jf.at("boolean").get<bool>();
        f.complexity = reg.concept_at(f.concept_id).complexity;
        feats.push_back(f);
    }
    return FeaturePool(std::move(reg), std::move(feats),
                       j.value("complexity_bound", 0u), j.value("depth_bound", 0u),
                       j.value("sample_states", 0u), j.value("sample_transitions", 0u));
}

namespace {

// Distinct states of the sample with their owning instances, in first-seen order.
struct SampleStates {
    std::vector<std::pair<const Instance*, State>> states;
    // index of s / t per sample item
    std::vector<std::pair<uint32_t, uint32_t>> items;
};

SampleStates collect_states(const Sample& sample) {
    SampleStates out;
    std::map<std::pair<const Instance*, uint64_t>, std::vector<uint32_t>> index;
    auto add = [&](const Instance* inst, const State& s) -> uint32_t {
        auto& bucket = index[{inst, s.hash()}];
        for (auto i : bucket)
            if (out.states[i].second.atoms == s.atoms) return i;
        uint32_t id = static_cast<uint32_t>(out.states.size());
        out.states.emplace_back(inst, s);
        bucket.push_back(id);
        return id;
    };
    for (const auto& item : sample)
        out.items.emplace_back(add(item.instance, item.s), add(item.instance, item.t));
    return out;
}

}  // namespace

FeaturePool generate_pool(const DomainSpec& domain, const Sample& sample,
                          uint32_t complexity_bound, uint32_t depth_bound) {
    if (sample.empty()) throw EmptySample();
    for (const auto& item : sample)
        if (item.instance == nullptr) throw EmptySample();
    if (depth_bound == 0) depth_bound = UINT32_MAX;  // zero means unbounded

    Registry reg(domain);
    SampleStates ss = collect_states(sample);

    std::map<const Instance*, Evaluator> evals;
    for (const auto& [inst, state] : ss.states)
        if (!evals.count(inst)) evals.emplace(inst, Evaluator(*inst, reg));

    auto concept_sig = [&](uint32_t cid) {
        // Concatenated denotations over every sampled state; equality of the
        // signature means the concepts are interchangeable on this sample.
        std::vector<Bits> sig;
        sig.reserve(ss.states.size());
        for (auto& [inst, state] : ss.states)
            sig.push_back(evals.at(inst).concept_den(cid, state));
        return sig;
    };
    auto role_sig = [&](uint32_t rid) {
        std::vector<Bits> sig;
        sig.reserve(ss.states.size());
        for (auto& [inst, state] : ss.states)
            sig.push_back(evals.at(inst).role_den(rid, state));
        return sig;
    };
    auto sig_hash = [](const std::vector<Bits>& sig) {
        uint64_t h = 0x2545f4914f6cdd1dull;
        for (const auto& b : sig) h = hash_combine(h, b.hash());
        return h;
    };

    // Roles first; they only matter as quantifier arguments, so anything the
    // concept budget cannot pay for is skipped outright.
    uint32_t role_budget = complexity_bound >= 2 ? std::min<uint32_t>(3, complexity_bound - 2) : 0;
    std::vector<uint32_t> roles;
    {
        std::unordered_map<uint64_t, std::vector<uint32_t>> seen;  // hash -> role index in `roles`
        std::vector<std::vector<Bits>> kept_sigs;
        auto admit = [&](uint32_t rid) {
            auto sig = role_sig(rid);
            uint64_t h = sig_hash(sig);
            for (auto i : seen[h])
                if (kept_sigs[i] == sig) return;
            seen[h].push_back(static_cast<uint32_t>(roles.size()));
            kept_sigs.push_back(std::move(sig));
            roles.push_back(rid);
        };
        for (uint32_t c = 1; c <= role_budget; ++c) {
            std::vector<uint32_t> layer;
            if (c == 1) {
                for (uint32_t p = 0; p < domain.predicates.size(); ++p) {
                    if (domain.predicates[p].params.size() != 2) continue;
                    layer.push_back(reg.role_primitive(p));
                    layer.push_back(reg.role_goal(p));
                }
            } else {
                for (auto r : roles) {
                    if (reg.role_at(r).complexity != c - 1) continue;
                    uint32_t inv = reg.role_inverse(r);
                    if (reg.role_at(inv).complexity == c) layer.push_back(inv);
                    uint32_t tc = reg.role_closure(r);
                    if (reg.role_at(tc).complexity == c) layer.push_back(tc);
                }
            }
            std::sort(layer.begin(), layer.end(),
                      [&](uint32_t a, uint32_t b) { return reg.role_str(a) < reg.role_str(b); });
            layer.erase(std::unique(layer.begin(), layer.end()), layer.end());
            for (auto r : layer)
                if (reg.role_at(r).depth <= depth_bound) admit(r);
        }
    }

    // Concepts layer by layer; a candidate whose denotations duplicate an
    // already kept concept is dropped so later layers do not compose with it.
    std::vector<uint32_t> accepted;
    std::unordered_map<uint32_t, bool> accepted_set;
    std::unordered_map<uint64_t, std::vector<uint32_t>> den_seen;  // hash -> index into accepted
    std::vector<std::vector<Bits>> accepted_sigs;

    for (uint32_t c = 1; c <= complexity_bound; ++c) {
        std::vector<uint32_t> layer;
        auto propose = [&](uint32_t cid) {
            const ConceptNode& node = reg.concept_at(cid);
            if (node.complexity != c) return;  // constructor collapsed it
            if (node.depth > depth_bound) return;
            if (accepted_set.count(cid)) return;
            layer.push_back(cid);
        };
        if (c == 1) {
            propose(reg.top());
            propose(reg.bot());
            for (uint32_t p = 0; p < domain.predicates.size(); ++p)
                for (uint32_t i = 0; i < domain.predicates[p].params.size(); ++i) {
                    propose(reg.primitive(p, i));
                    propose(reg.goal_primitive(p, i));
                }
            for (uint32_t ci = 0; ci < domain.constants.size(); ++ci) propose(reg.nominal(ci));
        } else {
            uint32_t bot_id = reg.bot();
            uint32_t top_id = reg.top();
            for (auto a : accepted) {
                const ConceptNode& na = reg.concept_at(a);
                if (na.complexity == c - 1 && na.kind != ConceptKind::Not &&
                    na.kind != ConceptKind::Top && na.kind != ConceptKind::Bot)
                    propose(reg.negation(a));
            }
            for (std::size_t i = 0; i < accepted.size(); ++i)
                for (std::size_t j = i + 1; j < accepted.size(); ++j) {
                    uint32_t a = accepted[i], b = accepted[j];
                    if (reg.concept_at(a).complexity + reg.concept_at(b).complexity != c - 1)
                        continue;
                    if (a == top_id || b == top_id || a == bot_id || b == bot_id) continue;
                    propose(reg.conjunction(a, b));
                }
            for (auto r : roles) {
                uint32_t rc = reg.role_at(r).complexity;
                if (rc + 2 > c) continue;
                for (auto a : accepted) {
                    if (reg.concept_at(a).complexity != c - 1 - rc) continue;
                    if (a != bot_id) propose(reg.exists(r, a));
                    if (a != top_id) propose(reg.forall(r, a));
                }
            }
        }
        std::sort(layer.begin(), layer.end(),
                  [&](uint32_t a, uint32_t b) { return reg.concept_str(a) < reg.concept_str(b); });
        layer.erase(std::unique(layer.begin(), layer.end()), layer.end());
        for (auto cid : layer) {
            auto sig = concept_sig(cid);
            uint64_t h = sig_hash(sig);
            bool dup = false;
            for (auto idx : den_seen[h])
                if (accepted_sigs[idx] == sig) {
                    dup = true;
                    break;
                }
            if (dup) continue;
            den_seen[h].push_back(static_cast<uint32_t>(accepted.size()));
            accepted_sigs.push_back(std::move(sig));
            accepted_set[cid] = true;
            accepted.push_back(cid);
        }
    }

    // Feature pruning: drop a candidate that matches a kept feature either on
    // every state value or on every transition fingerprint (value sign at the
    // source plus direction of change).
    std::vector<Feature> features;
    std::unordered_map<uint64_t, std::vector<std::vector<uint32_t>>> s_seen;
    std::unordered_map<uint64_t, std::vector<std::vector<int64_t>>> t_seen;
    for (std::size_t idx = 0; idx < accepted.size(); ++idx) {
        uint32_t cid = accepted[idx];
        std::vector<uint32_t> values(ss.states.size());
        for (std::size_t si = 0; si < ss.states.size(); ++si)
            values[si] = static_cast<uint32_t>(accepted_sigs[idx][si].count());
        std::vector<int64_t> tsig;
        tsig.reserve(ss.items.size());
        for (auto [s_idx, t_idx] : ss.items) {
            int64_t src = values[s_idx] > 0 ? 1 : 0;
            int64_t delta = static_cast<int64_t>(values[t_idx]) - values[s_idx];
            int64_t dir = delta > 0 ? 1 : delta < 0 ? -1 : 0;
            tsig.push_back(src * 4 + (dir + 1));
        }
        uint64_t sh = 0xff51afd7ed558ccdull;
        for (auto v : values) sh = hash_combine(sh, v);
        uint64_t th = 0xc4ceb9fe1a85ec53ull;
        for (auto v : tsig) th = hash_combine(th, static_cast<uint64_t>(v));

        bool dup = false;
        for (const auto& prev : s_seen[sh])
            if (prev == values) {
                dup = true;
                break;
            }
        if (!dup)
            for (const auto& prev : t_seen[th])
                if (prev == tsig) {
                    dup = true;
                    break;
                }
        if (dup) continue;
        s_seen[sh].push_back(values);
        t_seen[th].push_back(tsig);

        Feature f;
        f.id = static_cast<uint32_t>(features.size());
        f.concept_id = cid;
        f.complexity = reg.concept_at(cid).complexity;
        f.boolean = *std::max_element(values.begin(), values.end()) <= 1;
        features.push_back(f);
    }

    return FeaturePool(std::move(reg), std::move(features), complexity_bound, depth_bound,
                       static_cast<uint32_t>(ss.states.size()),
                       static_cast<uint32_t>(sample.size()));
}

}  // namespace genplan::features
