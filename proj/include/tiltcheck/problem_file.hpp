#pragma once

// Plain-text problem files:
//
//   # comment
//   vars x1 x2
//   minimize x1^2 + x2^2
//   st x1 - x2 <= 0
//   st x2 - x1 <= 0
//   point 0 0
//
// Exactly one vars, one minimize and one point; st repeats. Constraints are
// normalized to lhs - rhs <= 0 while parsing.

#include <stdexcept>
#include <string>

#include "tiltcheck/nlp.hpp"

namespace tiltcheck::io {

struct ProblemFileError : std::runtime_error {
    int line;
    ProblemFileError(const std::string& msg, int line_no)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

nlp::Problem parse_problem_text(const std::string& text);
nlp::Problem parse_problem_file(const std::string& path);

// Canonical re-emission; parsing the output reproduces the same ASTs.
std::string emit_problem_block(const nlp::Problem& p);

}  // namespace tiltcheck::io
