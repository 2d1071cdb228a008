#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "genplan/pddl.hpp"
#include "genplan/strips.hpp"

namespace testsup {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& rel) {
    return std::string(GENPLAN_DATA_DIR) + "/" + rel;
}

inline genplan::strips::DomainSpec load_domain(const std::string& rel) {
    return genplan::pddl::parse_domain(read_file(data_path(rel)), rel);
}

inline genplan::strips::Instance load_instance(const std::string& dom_rel,
                                               const std::string& prob_rel) {
    auto dom = load_domain(dom_rel);
    auto spec = genplan::pddl::parse_problem(read_file(data_path(prob_rel)), dom, prob_rel);
    return genplan::strips::Instance(std::move(dom), std::move(spec));
}

}  // namespace testsup
