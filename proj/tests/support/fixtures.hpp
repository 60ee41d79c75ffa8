#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cowp/pddl_parser.hpp"

namespace testutil {

inline std::string data_dir() { return COWP_DATA_DIR; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture_text(const std::string& rel) {
    return read_file(data_dir() + "/" + rel);
}

inline cowp::DomainDescription load_domain(const std::string& rel) {
    return cowp::parse_domain(fixture_text(rel));
}

inline cowp::ProblemDescription load_problem(const std::string& rel,
                                             const cowp::DomainDescription& d) {
    return cowp::parse_problem(fixture_text(rel), d);
}

/// The worked-through container domain used across the reference figures.
inline cowp::DomainDescription serve_water_domain() {
    return load_domain("domains/serve_water.pddl");
}

inline cowp::ProblemDescription serve_water_problem(const cowp::DomainDescription& d) {
    return load_problem("domains/serve_water_problem.pddl", d);
}

} // namespace testutil
