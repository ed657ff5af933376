#pragma once

// End-to-end analysis pipeline behind the CLI: stationarity, constraint
// qualification probes, Delta construction, the second-order conditions, the
// tilt-modulus bound, the brute-force oracle and the bound-versus-oracle
// consistency record, all folded into one canonical JSON report.

#include <optional>
#include <string>

#include "tiltcheck/json_writer.hpp"
#include "tiltcheck/nlp.hpp"
#include "tiltcheck/oracle.hpp"
#include "tiltcheck/stability.hpp"

namespace tiltcheck::cli {

inline constexpr const char* kVersion = "0.1.0";

struct AnalyzeOptions {
    double gamma = 0.0;  // 0 = auto: 1.5 * estimated subregularity modulus
    double eta = 1e-2;
    std::optional<double> kappa;  // threshold for the kappa-dependent checks
    double crcq_radius = 1e-2;
    int crcq_samples = 200;
    double mscq_radius = 0.1;
    int mscq_samples = 2000;
    double bepp_radius = 0.5;
    int bepp_x_samples = 100;
    int bepp_dir_samples = 50;
    int delta_directions = 500;
    int rusosc_points = 200;
    int rusosc_directions = 100;
    bool rusosc_enforce_ball = true;
    bool run_oracle = true;
    oracle::OracleConfig oracle_cfg;
};

// Exit codes: 0 ok, 1 parse error (raised by the CLI), 2 not stationary,
// 3 internal consistency failure, 4 oracle found a multivalued argmin
// (oracle command only).
struct AnalyzeResult {
    int exit_code = 0;
    json::Value report;
    std::string summary;

    double stationarity_residual = 0.0;
    bool mscq_applicable = false;
    double tilt_bound_value = 0.0;
    bool tilt_bound_valid = false;
    std::optional<oracle::OracleReport> oracle_report;
};

AnalyzeResult analyze(const nlp::Problem& p, const AnalyzeOptions& opt);

// The `check` subcommand: run only the named probes (licq, mfcq, crcq, mscq,
// bepp). Throws std::invalid_argument for an unknown name.
json::Value run_cq_checks(const nlp::Problem& p, const std::vector<std::string>& names,
                          const AnalyzeOptions& opt, std::string* summary);

// The `oracle` subcommand report.
struct OracleRunResult {
    int exit_code = 0;
    json::Value report;
    std::string summary;
};
OracleRunResult run_oracle_only(const nlp::Problem& p, const AnalyzeOptions& opt);

}  // namespace tiltcheck::cli
