#include "genplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace genplan::pddl {

namespace {

constexpr int kMaxDepth = 1000;

const std::unordered_set<std::string>& accepted_requirements() {
    static const std::unordered_set<std::string> reqs = {
        ":strips", ":typing", ":negative-preconditions", ":constants"};
    return reqs;
}

struct SExpr {
    bool is_list = false;
    std::string sym;           // lowercased symbol when !is_list
    std::vector<SExpr> items;  // when is_list
    uint32_t line = 0, col = 0;
};

struct Token {
    enum Kind { LParen, RParen, Symbol, End } kind;
    std::string text;
    uint32_t line, col;
};

class Lexer {
public:
    Lexer(std::string_view text, const std::string& file) : text_(text), file_(file) {}

    Token next() {
        skip_blank();
        Token t{Token::End, "", line_, col_};
        if (pos_ >= text_.size()) return t;
        char c = text_[pos_];
        if (c == '(') {
            t.kind = Token::LParen;
            advance();
            return t;
        }
        if (c == ')') {
            t.kind = Token::RParen;
            advance();
            return t;
        }
        t.kind = Token::Symbol;
        while (pos_ < text_.size()) {
            c = text_[pos_];
            if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c)))
                break;
            t.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            advance();
        }
        return t;
    }

    const std::string& file() const { return file_; }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::string file_;
    std::size_t pos_ = 0;
    uint32_t line_ = 1, col_ = 1;
};

[[noreturn]] void fail_at(const std::string& file, uint32_t line, uint32_t col,
                          const std::string& msg) {
    throw ParseError(Diagnostic{file, line, col, msg, Severity::Error});
}

[[noreturn]] void fail_at(const std::string& file, const SExpr& e, const std::string& msg) {
    fail_at(file, e.line, e.col, msg);
}

[[noreturn]] void type_fail(const std::string& file, const SExpr& e, const std::string& msg) {
    throw TypeError(Diagnostic{file, e.line, e.col, msg, Severity::Error});
}

class Parser {
public:
    Parser(std::string_view text, std::string file) : lexer_(text, file), file_(std::move(file)) {
        tok_ = lexer_.next();
    }

    SExpr parse_form() {
        SExpr e = parse_expr(0);
        if (tok_.kind != Token::End)
            fail_at(file_, tok_.line, tok_.col, "trailing input after top-level form");
        return e;
    }

    //! Sequence of top-level forms until end of input.
    std::vector<SExpr> parse_forms() {
        std::vector<SExpr> out;
        while (tok_.kind != Token::End) out.push_back(parse_expr(0));
        return out;
    }

private:
    SExpr parse_expr(int depth) {
        if (depth > kMaxDepth)
            fail_at(file_, tok_.line, tok_.col, "expression nesting too deep");
        if (tok_.kind == Token::End)
            fail_at(file_, tok_.line, tok_.col, "unexpected end of input");
        if (tok_.kind == Token::RParen)
            fail_at(file_, tok_.line, tok_.col, "unexpected ')'");
        if (tok_.kind == Token::Symbol) {
            SExpr e;
            e.is_list = false;
            e.sym = tok_.text;
            e.line = tok_.line;
            e.col = tok_.col;
            tok_ = lexer_.next();
            return e;
        }
        SExpr e;
        e.is_list = true;
        e.line = tok_.line;
        e.col = tok_.col;
        tok_ = lexer_.next();
        while (tok_.kind != Token::RParen) {
            if (tok_.kind == Token::End)
                fail_at(file_, tok_.line, tok_.col, "unclosed '('");
            e.items.push_back(parse_expr(depth + 1));
        }
        tok_ = lexer_.next();
        return e;
    }

    Lexer lexer_;
    std::string file_;
    Token tok_;
};

bool is_sym(const SExpr& e, const char* s) { return !e.is_list && e.sym == s; }

bool head_is(const SExpr& e, const char* s) {
    return e.is_list && !e.items.empty() && is_sym(e.items[0], s);
}

const SExpr& expect_list(const std::string& file, const SExpr& e, const char* what) {
    if (!e.is_list) fail_at(file, e, std::string("expected ") + what);
    return e;
}

const std::string& expect_symbol(const std::string& file, const SExpr& e, const char* what) {
    if (e.is_list) fail_at(file, e, std::string("expected ") + what);
    return e.sym;
}

//! "a b - t c" -> {a:t, b:t, c:object}. Names must start with '?' iff variables=true.
std::vector<strips::TypedName> parse_typed_list(const std::string& file, const SExpr& list,
                                                std::size_t from, bool variables, bool allow_types,
                                                const char* what) {
    std::vector<strips::TypedName> out;
    std::size_t batch_start = out.size();
    for (std::size_t i = from; i < list.items.size(); ++i) {
        const SExpr& it = list.items[i];
        if (it.is_list) fail_at(file, it, std::string("expected ") + what + " name");
        if (it.sym == "-") {
            if (!allow_types)
                fail_at(file, it, "typed list requires the :typing requirement");
            if (out.size() == batch_start)
                fail_at(file, it, "'-' without preceding names");
            if (i + 1 >= list.items.size())
                fail_at(file, it, "'-' without a type");
            const SExpr& ty = list.items[++i];
            if (ty.is_list)
                fail_at(file, ty, "compound types are not supported");
            for (std::size_t j = batch_start; j < out.size(); ++j) out[j].type = ty.sym;
            batch_start = out.size();
            continue;
        }
        bool is_var = it.sym.size() > 0 && it.sym[0] == '?';
        if (is_var != variables)
            fail_at(file, it,
                    variables ? std::string("expected variable, got '") + it.sym + "'"
                              : std::string("unexpected variable '") + it.sym + "'");
        out.push_back(strips::TypedName{it.sym, "object"});
    }
    return out;
}

//! Known type names: object, declared types, and any type used as a parent.
std::unordered_map<std::string, std::string> type_table(const strips::DomainSpec& d) {
    std::unordered_map<std::string, std::string> parent;
    parent.emplace("object", "object");
    for (const auto& t : d.types) parent.emplace(t.name, "object");
    for (const auto& t : d.types) {
        parent[t.name] = t.type;
        parent.emplace(t.type, "object");
    }
    return parent;
}

bool is_subtype(const std::unordered_map<std::string, std::string>& parent, std::string a,
                const std::string& b) {
    for (int guard = 0; guard < 1024; ++guard) {
        if (a == b) return true;
        if (a == "object") return false;
        auto it = parent.find(a);
        if (it == parent.end()) return false;
        a = it->second;
    }
    return false;
}

struct DomainTables {
    std::unordered_map<std::string, std::string> types;          // name -> parent
    std::unordered_map<std::string, const strips::PredicateSpec*> predicates;
    std::unordered_map<std::string, std::string> constants;      // name -> type
    bool typing = false;
    bool negative_preconditions = false;
};

DomainTables build_tables(const strips::DomainSpec& d) {
    DomainTables t;
    t.types = type_table(d);
    for (const auto& p : d.predicates) t.predicates.emplace(p.name, &p);
    for (const auto& c : d.constants) t.constants.emplace(c.name, c.type);
    for (const auto& r : d.requirements) {
        if (r == ":typing") t.typing = true;
        if (r == ":negative-preconditions") t.negative_preconditions = true;
    }
    return t;
}

strips::SpecAtom parse_atom(const std::string& file, const SExpr& e) {
    expect_list(file, e, "atom");
    if (e.items.empty()) fail_at(file, e, "empty atom");
    strips::SpecAtom a;
    a.predicate = expect_symbol(file, e.items[0], "predicate name");
    if (a.predicate == "=" || a.predicate == "and" || a.predicate == "or" ||
        a.predicate == "not" || a.predicate == "forall" || a.predicate == "exists" ||
        a.predicate == "when" || a.predicate == "imply" || a.predicate == "increase")
        fail_at(file, e.items[0], "unsupported construct '" + a.predicate + "'");
    for (std::size_t i = 1; i < e.items.size(); ++i)
        a.args.push_back(expect_symbol(file, e.items[i], "term"));
    return a;
}

//! Flattens (and ...) recursively; literals are atoms or (not atom).
void parse_literals(const std::string& file, const SExpr& e, bool allow_negation,
                    const char* negation_error, std::vector<strips::Literal>& out) {
    if (head_is(e, "and")) {
        for (std::size_t i = 1; i < e.items.size(); ++i)
            parse_literals(file, e.items[i], allow_negation, negation_error, out);
        return;
    }
    if (head_is(e, "not")) {
        if (!allow_negation) fail_at(file, e, negation_error);
        if (e.items.size() != 2) fail_at(file, e, "'not' takes exactly one atom");
        if (head_is(e.items[1], "not") || head_is(e.items[1], "and"))
            fail_at(file, e.items[1], "'not' must wrap an atom");
        out.push_back(strips::Literal{parse_atom(file, e.items[1]), true});
        return;
    }
    out.push_back(strips::Literal{parse_atom(file, e), false});
}

//! Checks predicate existence, arity, and argument typing for one literal.
//! scope maps variables in scope to their types; empty for ground atoms.
void validate_literal(const std::string& file, const SExpr& where, const strips::SpecAtom& atom,
                      const DomainTables& tables,
                      const std::unordered_map<std::string, std::string>* scope,
                      bool effect_position) {
    auto p = tables.predicates.find(atom.predicate);
    if (p == tables.predicates.end())
        type_fail(file, where, "undeclared predicate '" + atom.predicate + "'");
    if (atom.args.size() != p->second->params.size())
        type_fail(file, where, "predicate '" + atom.predicate + "' expects " +
                                   std::to_string(p->second->params.size()) + " arguments, got " +
                                   std::to_string(atom.args.size()));
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const std::string& arg = atom.args[i];
        std::string arg_type;
        if (!arg.empty() && arg[0] == '?') {
            if (!scope)
                fail_at(file, where, "variable '" + arg + "' in ground atom");
            auto v = scope->find(arg);
            if (v == scope->end())
                type_fail(file, where, "unbound variable '" + arg + "'");
            arg_type = v->second;
        } else {
            auto c = tables.constants.find(arg);
            if (c == tables.constants.end())
                type_fail(file, where, "undeclared object '" + arg + "'");
            arg_type = c->second;
        }
        const std::string& want = p->second->params[i].type;
        bool narrower = is_subtype(tables.types, arg_type, want);
        bool wider = is_subtype(tables.types, want, arg_type);
        if (effect_position ? !narrower : (!narrower && !wider))
            type_fail(file, where, "argument " + std::to_string(i + 1) + " of '" +
                                       atom.predicate + "' has incompatible type '" + arg_type +
                                       "' (expected '" + want + "')");
    }
}

}  // namespace

std::string Diagnostic::to_string() const {
    std::ostringstream os;
    os << file << ":" << line << ":" << column << ": "
       << (severity == Severity::Error ? "error" : "warning") << ": " << message;
    return os.str();
}

strips::DomainSpec parse_domain(std::string_view text, const std::string& filename) {
    Parser parser(text, filename);
    SExpr root = parser.parse_form();
    if (!head_is(root, "define") || root.items.size() < 2)
        fail_at(filename, root, "expected (define (domain ...) ...)");
    const SExpr& dom = root.items[1];
    if (!head_is(dom, "domain") || dom.items.size() != 2)
        fail_at(filename, dom, "expected (domain name)");

    strips::DomainSpec d;
    d.name = expect_symbol(filename, dom.items[1], "domain name");

    bool typing = false;
    bool saw_requirements = false, saw_types = false, saw_constants = false,
         saw_predicates = false;

    // First pass over (:requirements) so that typed-list checks know about :typing.
    for (std::size_t s = 2; s < root.items.size(); ++s) {
        const SExpr& sec = root.items[s];
        if (!head_is(sec, ":requirements")) continue;
        for (std::size_t i = 1; i < sec.items.size(); ++i) {
            const std::string& r = expect_symbol(filename, sec.items[i], "requirement");
            if (!accepted_requirements().count(r))
                throw UnsupportedRequirement(
                    Diagnostic{filename, sec.items[i].line, sec.items[i].col,
                               "unsupported requirement '" + r + "'", Severity::Error},
                    r);
            if (r == ":typing") typing = true;
        }
    }

    for (std::size_t s = 2; s < root.items.size(); ++s) {
        const SExpr& sec = expect_list(filename, root.items[s], "domain section");
        if (sec.items.empty()) fail_at(filename, sec, "empty domain section");
        const std::string& head = expect_symbol(filename, sec.items[0], "section keyword");

        if (head == ":requirements") {
            if (saw_requirements) fail_at(filename, sec, "duplicate :requirements section");
            saw_requirements = true;
            for (std::size_t i = 1; i < sec.items.size(); ++i)
                d.requirements.push_back(sec.items[i].sym);
        } else if (head == ":types") {
            if (saw_types) fail_at(filename, sec, "duplicate :types section");
            saw_types = true;
            if (!typing) fail_at(filename, sec, ":types requires the :typing requirement");
            d.types = parse_typed_list(filename, sec, 1, false, true, "type");
            std::unordered_set<std::string> seen;
            for (const auto& t : d.types) {
                if (t.name == "object")
                    type_fail(filename, sec, "cannot redeclare built-in type 'object'");
                if (!seen.insert(t.name).second)
                    type_fail(filename, sec, "duplicate type '" + t.name + "'");
            }
        } else if (head == ":constants") {
            if (saw_constants) fail_at(filename, sec, "duplicate :constants section");
            saw_constants = true;
            d.constants = parse_typed_list(filename, sec, 1, false, typing, "constant");
        } else if (head == ":predicates") {
            if (saw_predicates) fail_at(filename, sec, "duplicate :predicates section");
            saw_predicates = true;
            for (std::size_t i = 1; i < sec.items.size(); ++i) {
                const SExpr& pe = expect_list(filename, sec.items[i], "predicate declaration");
                if (pe.items.empty()) fail_at(filename, pe, "empty predicate declaration");
                strips::PredicateSpec p;
                p.name = expect_symbol(filename, pe.items[0], "predicate name");
                p.params = parse_typed_list(filename, pe, 1, true, typing, "parameter");
                for (const auto& prev : d.predicates)
                    if (prev.name == p.name)
                        type_fail(filename, pe, "duplicate predicate '" + p.name + "'");
                d.predicates.push_back(std::move(p));
            }
        } else if (head == ":action") {
            if (sec.items.size() < 2)
                fail_at(filename, sec, "expected (:action name ...)");
            strips::ActionSpec a;
            a.name = expect_symbol(filename, sec.items[1], "action name");
            bool saw_params = false;
            std::size_t i = 2;
            while (i < sec.items.size()) {
                const std::string& key = expect_symbol(filename, sec.items[i], "action keyword");
                if (i + 1 >= sec.items.size())
                    fail_at(filename, sec.items[i], "missing value after '" + key + "'");
                const SExpr& val = sec.items[i + 1];
                if (key == ":parameters") {
                    saw_params = true;
                    a.params = parse_typed_list(filename, expect_list(filename, val, "parameter list"),
                                                0, true, typing, "parameter");
                } else if (key == ":precondition") {
                    parse_literals(filename, val, true, "", a.precondition);
                } else if (key == ":effect") {
                    parse_literals(filename, val, true, "", a.effects);
                } else {
                    fail_at(filename, sec.items[i], "unsupported action keyword '" + key + "'");
                }
                i += 2;
            }
            if (!saw_params)
                fail_at(filename, sec, "action '" + a.name + "' lacks :parameters");
            for (const auto& prev : d.actions)
                if (prev.name == a.name)
                    type_fail(filename, sec, "duplicate action '" + a.name + "'");
            d.actions.push_back(std::move(a));
        } else {
            fail_at(filename, sec.items[0], "unsupported domain section '" + head + "'");
        }
    }

    // Semantic validation with the complete tables.
    DomainTables tables = build_tables(d);
    {
        std::unordered_set<std::string> seen;
        for (const auto& c : d.constants) {
            if (!seen.insert(c.name).second)
                type_fail(filename, root, "duplicate constant '" + c.name + "'");
            if (!tables.types.count(c.type))
                type_fail(filename, root, "constant '" + c.name + "' has unknown type '" + c.type + "'");
        }
        for (const auto& p : d.predicates)
            for (const auto& param : p.params)
                if (!tables.types.count(param.type))
                    type_fail(filename, root,
                              "parameter of predicate '" + p.name + "' has unknown type '" +
                                  param.type + "'");
    }

    for (std::size_t s = 2; s < root.items.size(); ++s) {
        const SExpr& sec = root.items[s];
        if (!head_is(sec, ":action")) continue;
        const std::string action_name = sec.items[1].sym;
        const strips::ActionSpec* a = nullptr;
        for (const auto& cand : d.actions)
            if (cand.name == action_name) a = &cand;
        std::unordered_map<std::string, std::string> scope;
        for (const auto& p : a->params) {
            if (scope.count(p.name))
                type_fail(filename, sec, "duplicate parameter '" + p.name + "'");
            if (!tables.types.count(p.type))
                type_fail(filename, sec, "parameter '" + p.name + "' has unknown type '" + p.type + "'");
            scope.emplace(p.name, p.type);
        }
        for (const auto& lit : a->precondition) {
            if (lit.negated && !tables.negative_preconditions)
                fail_at(filename, sec,
                        "negative precondition requires the :negative-preconditions requirement");
            validate_literal(filename, sec, lit.atom, tables, &scope, false);
        }
        for (const auto& lit : a->effects)
            validate_literal(filename, sec, lit.atom, tables, &scope, true);
    }
    return d;
}

strips::InstanceSpec parse_problem(std::string_view text, const strips::DomainSpec& domain,
                                   const std::string& filename) {
    Parser parser(text, filename);
    SExpr root = parser.parse_form();
    if (!head_is(root, "define") || root.items.size() < 2)
        fail_at(filename, root, "expected (define (problem ...) ...)");
    const SExpr& prob = root.items[1];
    if (!head_is(prob, "problem") || prob.items.size() != 2)
        fail_at(filename, prob, "expected (problem name)");

    strips::InstanceSpec spec;
    spec.name = expect_symbol(filename, prob.items[1], "problem name");

    DomainTables tables = build_tables(domain);
    bool saw_domain = false, saw_objects = false, saw_init = false, saw_goal = false;

    for (std::size_t s = 2; s < root.items.size(); ++s) {
        const SExpr& sec = expect_list(filename, root.items[s], "problem section");
        if (sec.items.empty()) fail_at(filename, sec, "empty problem section");
        const std::string& head = expect_symbol(filename, sec.items[0], "section keyword");

        if (head == ":domain") {
            if (saw_domain) fail_at(filename, sec, "duplicate :domain section");
            saw_domain = true;
            if (sec.items.size() != 2)
                fail_at(filename, sec, "expected (:domain name)");
            spec.domain_name = expect_symbol(filename, sec.items[1], "domain name");
            if (spec.domain_name != domain.name)
                type_fail(filename, sec.items[1],
                          "problem requires domain '" + spec.domain_name + "', expected '" +
                              domain.name + "'");
        } else if (head == ":requirements") {
            for (std::size_t i = 1; i < sec.items.size(); ++i) {
                const std::string& r = expect_symbol(filename, sec.items[i], "requirement");
                if (!accepted_requirements().count(r))
                    throw UnsupportedRequirement(
                        Diagnostic{filename, sec.items[i].line, sec.items[i].col,
                                   "unsupported requirement '" + r + "'", Severity::Error},
                        r);
            }
        } else if (head == ":objects") {
            if (saw_objects) fail_at(filename, sec, "duplicate :objects section");
            saw_objects = true;
            spec.objects = parse_typed_list(filename, sec, 1, false, tables.typing, "object");
            for (const auto& o : spec.objects) {
                if (tables.constants.count(o.name))
                    type_fail(filename, sec, "object '" + o.name + "' shadows a domain constant");
                if (!tables.constants.emplace(o.name, o.type).second)
                    type_fail(filename, sec, "duplicate object '" + o.name + "'");
                if (!tables.types.count(o.type))
                    type_fail(filename, sec, "object '" + o.name + "' has unknown type '" + o.type + "'");
            }
        } else if (head == ":init") {
            if (saw_init) fail_at(filename, sec, "duplicate :init section");
            saw_init = true;
            for (std::size_t i = 1; i < sec.items.size(); ++i) {
                strips::SpecAtom a = parse_atom(filename, sec.items[i]);
                validate_literal(filename, sec.items[i], a, tables, nullptr, false);
                spec.init.push_back(std::move(a));
            }
        } else if (head == ":goal") {
            if (saw_goal) fail_at(filename, sec, "duplicate :goal section");
            saw_goal = true;
            if (sec.items.size() != 2)
                fail_at(filename, sec, "expected (:goal expr)");
            std::vector<strips::Literal> lits;
            parse_literals(filename, sec.items[1], false,
                           "negative goals are not supported", lits);
            for (auto& lit : lits) {
                validate_literal(filename, sec.items[1], lit.atom, tables, nullptr, false);
                spec.goal.push_back(std::move(lit.atom));
            }
        } else {
            fail_at(filename, sec.items[0], "unsupported problem section '" + head + "'");
        }
    }
    if (!saw_domain) fail_at(filename, root, "problem lacks a (:domain ...) section");
    if (!saw_goal) fail_at(filename, root, "problem lacks a (:goal ...) section");
    return spec;
}

std::vector<strips::SpecAtom> parse_plan(std::string_view text, const std::string& filename) {
    Parser parser(text, filename);
    std::vector<strips::SpecAtom> out;
    for (const SExpr& form : parser.parse_forms()) {
        if (!form.is_list) fail_at(filename, form, "expected (action args...)");
        out.push_back(parse_atom(filename, form));
        for (const auto& arg : out.back().args)
            if (!arg.empty() && arg[0] == '?')
                fail_at(filename, form, "plan steps must be ground");
    }
    return out;
}

namespace {

void print_typed(std::ostringstream& os, const std::vector<strips::TypedName>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) os << " ";
        os << names[i].name;
        if (names[i].type != "object") os << " - " << names[i].type;
    }
}

void print_atom(std::ostringstream& os, const strips::SpecAtom& a) {
    os << "(" << a.predicate;
    for (const auto& arg : a.args) os << " " << arg;
    os << ")";
}

void print_literals(std::ostringstream& os, const std::vector<strips::Literal>& lits) {
    os << "(and";
    for (const auto& l : lits) {
        os << " ";
        if (l.negated) os << "(not ";
        print_atom(os, l.atom);
        if (l.negated) os << ")";
    }
    os << ")";
}

}  // namespace

std::string print_domain(const strips::DomainSpec& d) {
    std::ostringstream os;
    os << "(define (domain " << d.name << ")\n";
    if (!d.requirements.empty()) {
        os << "  (:requirements";
        for (const auto& r : d.requirements) os << " " << r;
        os << ")\n";
    }
    if (!d.types.empty()) {
        os << "  (:types ";
        print_typed(os, d.types);
        os << ")\n";
    }
    if (!d.constants.empty()) {
        os << "  (:constants ";
        print_typed(os, d.constants);
        os << ")\n";
    }
    if (!d.predicates.empty()) {
        os << "  (:predicates";
        for (const auto& p : d.predicates) {
            os << "\n    (" << p.name;
            if (!p.params.empty()) {
                os << " ";
                print_typed(os, p.params);
            }
            os << ")";
        }
        os << ")\n";
    }
    for (const auto& a : d.actions) {
        os << "  (:action " << a.name << "\n";
        os << "    :parameters (";
        print_typed(os, a.params);
        os << ")\n";
        if (!a.precondition.empty()) {
            os << "    :precondition ";
            print_literals(os, a.precondition);
            os << "\n";
        }
        if (!a.effects.empty()) {
            os << "    :effect ";
            print_literals(os, a.effects);
            os << "\n";
        }
        os << "  )\n";
    }
    os << ")\n";
    return os.str();
}

std::string print_problem(const strips::InstanceSpec& spec) {
    std::ostringstream os;
    os << "(define (problem " << spec.name << ")\n";
    os << "  (:domain " << spec.domain_name << ")\n";
    if (!spec.objects.empty()) {
        os << "  (:objects ";
        print_typed(os, spec.objects);
        os << ")\n";
    }
    os << "  (:init";
    for (const auto& a : spec.init) {
        os << " ";
        print_atom(os, a);
    }
    os << ")\n";
    os << "  (:goal (and";
    for (const auto& a : spec.goal) {
        os << " ";
        print_atom(os, a);
    }
    os << "))\n)\n";
    return os.str();
}

std::string print_plan(const std::vector<strips::SpecAtom>& steps) {
    std::ostringstream os;
    for (const auto& s : steps) {
        print_atom(os, s);
        os << "\n";
    }
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(Diagnostic{path, 0, 0, "cannot open file", Severity::Error});
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

strips::DomainSpec load_domain(const std::string& path) {
    return parse_domain(read_file(path), path);
}

strips::InstanceSpec load_problem(const std::string& path, const strips::DomainSpec& domain) {
    return parse_problem(read_file(path), domain, path);
}

}  // namespace genplan::pddl
