#include "tiltcheck/problem_file.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace tiltcheck::io {

namespace {

std::string strip_comment(const std::string& line) {
    std::size_t h = line.find('#');
    return h == std::string::npos ? line : line.substr(0, h);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

bool is_zero_constant(const expr::Expr& e) {
    return e->kind == expr::NodeKind::Constant && e->value == 0.0;
}

}  // namespace

nlp::Problem parse_problem_text(const std::string& text) {
    std::vector<std::string> vars;
    expr::Expr objective;
    std::vector<expr::Expr> constraints;
    la::Vec point;
    bool have_vars = false, have_obj = false, have_point = false;

    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = strip_comment(raw);
        std::vector<std::string> toks = split_ws(line);
        if (toks.empty()) continue;
        const std::string& head = toks[0];

        if (head == "vars") {
            if (have_vars) throw ProblemFileError("duplicate vars directive", line_no);
            if (toks.size() < 2) throw ProblemFileError("vars needs at least one name", line_no);
            for (std::size_t i = 1; i < toks.size(); ++i) {
                if (!valid_identifier(toks[i]))
                    throw ProblemFileError("bad variable name '" + toks[i] + "'", line_no);
                for (const std::string& v : vars)
                    if (v == toks[i])
                        throw ProblemFileError("duplicate variable '" + toks[i] + "'", line_no);
                vars.push_back(toks[i]);
            }
            have_vars = true;
            continue;
        }
        if (!have_vars)
            throw ProblemFileError("vars must come before '" + head + "'", line_no);

        std::string rest = line.substr(line.find(head) + head.size());
        if (head == "minimize") {
            if (have_obj) throw ProblemFileError("duplicate minimize directive", line_no);
            try {
                objective = expr::parse_expr(rest, vars);
            } catch (const expr::ParseError& e) {
                throw ProblemFileError(std::string("objective: ") + e.what(), line_no);
            }
            have_obj = true;
        } else if (head == "st") {
            std::size_t le = rest.find("<=");
            if (le == std::string::npos)
                throw ProblemFileError("constraint needs '<='", line_no);
            try {
                expr::Expr lhs = expr::parse_expr(rest.substr(0, le), vars);
                expr::Expr rhs = expr::parse_expr(rest.substr(le + 2), vars);
                if (is_zero_constant(rhs))
                    constraints.push_back(lhs);
                else if (is_zero_constant(lhs))
                    constraints.push_back(expr::neg(rhs));
                else
                    constraints.push_back(expr::sub(lhs, rhs));
            } catch (const expr::ParseError& e) {
                throw ProblemFileError(std::string("constraint: ") + e.what(), line_no);
            }
        } else if (head == "point") {
            if (have_point) throw ProblemFileError("duplicate point directive", line_no);
            for (std::size_t i = 1; i < toks.size(); ++i) {
                char* end = nullptr;
                double v = std::strtod(toks[i].c_str(), &end);
                if (end != toks[i].c_str() + toks[i].size())
                    throw ProblemFileError("bad number '" + toks[i] + "' in point", line_no);
                point.push_back(v);
            }
            have_point = true;
        } else {
            throw ProblemFileError("unknown directive '" + head + "'", line_no);
        }
    }
    if (!have_vars) throw ProblemFileError("missing vars directive", line_no);
    if (!have_obj) throw ProblemFileError("missing minimize directive", line_no);
    if (!have_point) throw ProblemFileError("missing point directive", line_no);
    if (point.size() != vars.size())
        throw ProblemFileError("point arity does not match vars arity", line_no);

    return nlp::Problem(static_cast<int>(vars.size()), vars, objective, constraints, point);
}

nlp::Problem parse_problem_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ProblemFileError("cannot open '" + path + "'", 0);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_problem_text(ss.str());
}

std::string emit_problem_block(const nlp::Problem& p) {
    std::ostringstream out;
    out << "vars";
    for (const std::string& v : p.var_names) out << " " << v;
    out << "\n";
    out << "minimize " << expr::to_string(p.objective, p.var_names) << "\n";
    for (const expr::Expr& c : p.constraints)
        out << "st " << expr::to_string(c, p.var_names) << " <= 0\n";
    out << "point";
    for (double v : p.candidate) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << " " << buf;
    }
    out << "\n";
    return out.str();
}

}  // namespace tiltcheck::io
