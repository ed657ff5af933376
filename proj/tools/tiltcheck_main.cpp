// tiltcheck: decide/estimate tilt stability of stationary points of
// inequality-constrained programs. Subcommands:
//   analyze  full pipeline (CQ probes, second-order checks, bound, oracle)
//   oracle   brute-force tilted argmin map only
//   check    selected constraint-qualification probes
//
// Exit codes: 0 ok, 1 parse/usage error, 2 point not stationary,
// 3 internal consistency failure, 4 oracle found a multivalued argmin.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tiltcheck/analyze.hpp"
#include "tiltcheck/problem_file.hpp"

namespace {

int write_json(const std::string& path, const tiltcheck::json::Value& v) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "cannot write " << path << "\n";
        return 1;
    }
    f << v.pretty();
    return 0;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tilt stability analyzer for inequality-constrained programs"};
    app.require_subcommand(1);

    std::string file, json_path, cq_list;
    tiltcheck::cli::AnalyzeOptions opt;
    double kappa_flag = 0.0;
    bool no_oracle = false;

    CLI::App* analyze = app.add_subcommand("analyze", "run the full analysis pipeline");
    analyze->add_option("file", file, "problem file")->required();
    analyze->add_option("--gamma", opt.gamma, "multiplier ball factor (default: auto)");
    analyze->add_option("--eta", opt.eta, "neighborhood size for the sampled uniform probe");
    analyze->add_option("--kappa", kappa_flag, "modulus for the kappa-dependent checks");
    analyze->add_option("--radius", opt.mscq_radius, "sampling radius for the subregularity probe");
    analyze->add_option("--dirs", opt.delta_directions, "critical-direction sample count");
    analyze->add_option("--json", json_path, "write the canonical JSON report here");
    analyze->add_flag("--no-oracle", no_oracle, "skip the brute-force oracle");

    CLI::App* orc = app.add_subcommand("oracle", "run only the brute-force oracle");
    orc->add_option("file", file, "problem file")->required();
    orc->add_option("--gamma", opt.oracle_cfg.gamma, "ball radius around the candidate point");
    orc->add_option("--tilt-radius", opt.oracle_cfg.tilt_radius, "tilt grid radius");
    orc->add_option("--grid", opt.oracle_cfg.resolution, "spatial grid resolution per axis");
    orc->add_option("--json", json_path, "write the JSON report here");

    CLI::App* check = app.add_subcommand("check", "run selected constraint qualifications");
    check->add_option("file", file, "problem file")->required();
    check->add_option("--cq", cq_list, "comma list from licq,mfcq,crcq,mscq,bepp")->required();
    check->add_option("--json", json_path, "write the JSON report here");

    CLI11_PARSE(app, argc, argv);

    tiltcheck::nlp::Problem problem;
    try {
        problem = tiltcheck::io::parse_problem_file(file);
    } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (analyze->parsed()) {
            if (kappa_flag > 0.0) opt.kappa = kappa_flag;
            opt.run_oracle = !no_oracle;
            tiltcheck::cli::AnalyzeResult res = tiltcheck::cli::analyze(problem, opt);
            std::cout << res.summary;
            if (!json_path.empty() && write_json(json_path, res.report) != 0) return 1;
            return res.exit_code;
        }
        if (orc->parsed()) {
            tiltcheck::cli::OracleRunResult res = tiltcheck::cli::run_oracle_only(problem, opt);
            std::cout << res.summary;
            if (!json_path.empty() && write_json(json_path, res.report) != 0) return 1;
            return res.exit_code;
        }
        if (check->parsed()) {
            std::string summary;
            tiltcheck::json::Value rep;
            try {
                rep = tiltcheck::cli::run_cq_checks(problem, split_csv(cq_list), opt, &summary);
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
            std::cout << summary;
            if (!json_path.empty() && write_json(json_path, rep) != 0) return 1;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
