#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "genplan/strips.hpp"

namespace genplan::pddl {

enum class Severity { Error, Warning };

struct Diagnostic {
    std::string file;
    uint32_t line = 0;    // 1-based
    uint32_t column = 0;  // 1-based
    std::string message;
    Severity severity = Severity::Error;

    std::string to_string() const;
};

struct Error : std::runtime_error {
    explicit Error(Diagnostic d) : std::runtime_error(d.to_string()), diagnostic(std::move(d)) {}
    Diagnostic diagnostic;
};

//! Malformed input: tokenization, structure, or unsupported constructs.
struct ParseError : Error {
    using Error::Error;
};

//! A requirement outside the accepted fragment (:strips, :typing,
//! :negative-preconditions, :constants).
struct UnsupportedRequirement : Error {
    UnsupportedRequirement(Diagnostic d, std::string req)
        : Error(std::move(d)), requirement(std::move(req)) {}
    std::string requirement;
};

//! Name resolution and typing faults: undeclared symbols, arity or type mismatches,
//! duplicate declarations.
struct TypeError : Error {
    using Error::Error;
};

//! Input is case-insensitive; all names are lowercased.
strips::DomainSpec parse_domain(std::string_view text, const std::string& filename = "<domain>");

strips::InstanceSpec parse_problem(std::string_view text, const strips::DomainSpec& domain,
                                   const std::string& filename = "<problem>");

//! Plan file: one "(action-name obj...)" line per step; blank lines and ';' comments allowed.
std::vector<strips::SpecAtom> parse_plan(std::string_view text,
                                         const std::string& filename = "<plan>");

std::string print_domain(const strips::DomainSpec& domain);
std::string print_problem(const strips::InstanceSpec& spec);
std::string print_plan(const std::vector<strips::SpecAtom>& steps);

//! Reads and parses a file; IO failures surface as ParseError on the path.
strips::DomainSpec load_domain(const std::string& path);
strips::InstanceSpec load_problem(const std::string& path, const strips::DomainSpec& domain);
std::string read_file(const std::string& path);

}  // namespace genplan::pddl
