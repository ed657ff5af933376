#include "tiltcheck/analyze.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "tiltcheck/problem_file.hpp"

namespace tiltcheck::cli {

namespace {

using json::Value;
using la::Vec;

Value vec_json(const Vec& v) { return Value::number_array(v.begin(), v.end()); }

Value problem_json(const nlp::Problem& p) {
    Value v = Value::object();
    v["n"] = p.n;
    v["m"] = p.m;
    Value names = Value::array();
    for (const auto& s : p.var_names) names.push_back(s);
    v["vars"] = std::move(names);
    v["objective"] = expr::to_string(p.objective, p.var_names);
    Value cons = Value::array();
    for (const auto& c : p.constraints) cons.push_back(expr::to_string(c, p.var_names));
    v["constraints"] = std::move(cons);
    v["point"] = vec_json(p.candidate);
    return v;
}

Value licq_json(const stab::LicqResult& r) {
    Value v = Value::object();
    v["verdict"] = r.holds ? "Holds" : "Fails";
    v["active_count"] = r.active_count;
    v["gradient_rank"] = r.gradient_rank;
    return v;
}

Value mfcq_json(const stab::MfcqResult& r) {
    Value v = Value::object();
    v["verdict"] = r.holds ? "Holds" : "Fails";
    v["margin"] = r.margin;
    if (r.holds) v["direction"] = vec_json(r.direction);
    return v;
}

Value crcq_json(const stab::CrcqResult& r) {
    Value v = Value::object();
    v["verdict"] = r.holds_on_samples ? "HoldsOnSamples" : "FailsWithWitness";
    v["radius"] = r.radius;
    v["samples"] = r.samples_used;
    if (!r.holds_on_samples) {
        Value w = Value::object();
        w["subset"] = Value::number_array(r.witness_subset.begin(), r.witness_subset.end());
        w["x"] = vec_json(r.witness_point);
        v["witness"] = std::move(w);
    }
    return v;
}

Value mscq_json(const stab::MscqResult& r) {
    Value v = Value::object();
    v["kappa_hat"] = r.kappa_hat;
    v["diverging"] = r.diverging;
    v["radius"] = r.radius;
    v["samples"] = r.samples;
    v["per_radius"] = Value::number_array(r.per_radius.begin(), r.per_radius.end());
    return v;
}

Value bepp_record_json(const stab::BeppScaleRecord& rec) {
    Value v = Value::object();
    v["scale"] = rec.scale;
    v["x"] = vec_json(rec.x);
    v["xstar"] = vec_json(rec.xstar);
    v["lambda"] = vec_json(rec.lambda);
    v["norm"] = rec.norm;
    return v;
}

Value bepp_json(const stab::BeppResult& r) {
    Value v = Value::object();
    v["verdict"] = r.bounded_on_samples ? "BoundedOnSamples" : "FailsWithWitness";
    v["kappa_hat"] = r.kappa_hat;
    v["radius"] = r.radius;
    v["x_samples"] = r.x_samples;
    v["dir_samples"] = r.dir_samples;
    Value scales = Value::array();
    for (const auto& rec : r.scales) scales.push_back(bepp_record_json(rec));
    v["scales"] = std::move(scales);
    if (r.witness) v["witness"] = bepp_record_json(*r.witness);
    return v;
}

Value second_order_json(const stab::SecondOrderResult& r) {
    Value v = Value::object();
    v["verdict"] = stab::to_string(r.verdict);
    if (std::isfinite(r.min_reduced_eig)) v["min_reduced_eig"] = r.min_reduced_eig;
    v["vacuous"] = r.vacuous;
    v["sampled"] = r.sampled;
    if (!r.note.empty()) v["note"] = r.note;
    if (r.verdict == stab::Verdict::Fails) {
        v["witness_lambda"] = vec_json(r.witness_lambda);
        v["witness_w"] = vec_json(r.witness_w);
    }
    return v;
}

Value not_applicable_json(const std::string& reason) {
    Value v = Value::object();
    v["verdict"] = "NotApplicable";
    v["note"] = reason;
    return v;
}

Value delta_json(const stab::DeltaSet& d) {
    Value v = Value::object();
    Value verts = Value::array();
    for (const auto& vert : d.vertices) verts.push_back(vec_json(vert));
    v["vertices"] = std::move(verts);
    v["exact"] = d.exact;
    v["degenerate_ball"] = d.degenerate_ball;
    v["gamma"] = d.gamma;
    v["ball_radius"] = d.ball_radius;
    v["ball_norm"] = d.ball_norm;
    v["directions_used"] = d.directions_used;
    return v;
}

Value rusosc_json(const stab::RusoscResult& r) {
    Value v = Value::object();
    v["verdict"] = r.holds_on_samples ? "HoldsOnSamples" : "FailsWithWitness";
    v["ell"] = r.ell;
    v["eta"] = r.eta;
    v["points"] = r.points;
    v["directions"] = r.directions;
    v["multiplier_ball_enforced"] = r.enforce_multiplier_ball;
    if (r.witness) {
        Value w = Value::object();
        w["x"] = vec_json(r.witness->x);
        w["v"] = vec_json(r.witness->v);
        w["lambda"] = vec_json(r.witness->lambda);
        w["w"] = vec_json(r.witness->w);
        w["form_value"] = r.witness->form_value;
        v["witness"] = std::move(w);
    }
    return v;
}

Value oracle_json(const oracle::OracleReport& r, const std::optional<oracle::GrowthResult>& growth,
                  const std::optional<oracle::ConsistencyRecord>& consistency) {
    Value v = Value::object();
    v["single_valued"] = r.single_valued;
    v["lipschitz_hat"] = r.lipschitz_hat;
    v["argmin_at_zero_matches"] = r.argmin_at_zero_matches;
    v["tilt_count"] = static_cast<int>(r.tilts.size());
    if (r.multivalued_tilt) v["multivalued_tilt"] = vec_json(*r.multivalued_tilt);
    if (std::isfinite(r.min_intercluster_distance))
        v["min_intercluster_distance"] = r.min_intercluster_distance;
    if (growth) {
        Value g = Value::object();
        g["verdict"] = growth->holds ? "Holds" : "Fails";
        g["kappa"] = growth->kappa;
        if (growth->witness_tilt) {
            g["witness_tilt"] = vec_json(*growth->witness_tilt);
            g["witness_minimizer"] = vec_json(*growth->witness_minimizer);
            g["witness_point"] = vec_json(*growth->witness_point);
        }
        v["growth"] = std::move(g);
    }
    if (consistency) {
        Value c = Value::object();
        c["lipschitz_hat"] = consistency->lipschitz_hat;
        c["bound"] = consistency->bound;
        c["pass"] = consistency->pass;
        v["consistency"] = std::move(c);
    }
    return v;
}

Value config_json(const AnalyzeOptions& opt, double gamma_effective, bool gamma_auto) {
    Value v = Value::object();
    v["active_tolerance"] = nlp::kActiveTol;
    v["support_tolerance"] = nlp::kSupportTol;
    v["rank_tolerance"] = la::kDefaultTol;
    v["gamma"] = gamma_effective;
    v["gamma_source"] = gamma_auto ? "auto(1.5*mscq_kappa_hat)" : "flag";
    v["eta"] = opt.eta;
    if (opt.kappa) v["kappa"] = *opt.kappa;
    v["crcq_radius"] = opt.crcq_radius;
    v["crcq_samples"] = opt.crcq_samples;
    v["mscq_radius"] = opt.mscq_radius;
    v["mscq_samples"] = opt.mscq_samples;
    v["bepp_radius"] = opt.bepp_radius;
    v["bepp_x_samples"] = opt.bepp_x_samples;
    v["bepp_dir_samples"] = opt.bepp_dir_samples;
    v["delta_directions"] = opt.delta_directions;
    v["delta_ball_norm"] = "inf";
    v["rusosc_points"] = opt.rusosc_points;
    v["rusosc_directions"] = opt.rusosc_directions;
    v["rusosc_ball_enforced"] = opt.rusosc_enforce_ball;
    Value oc = Value::object();
    oc["gamma"] = opt.oracle_cfg.gamma;
    oc["tilt_radius"] = opt.oracle_cfg.tilt_radius;
    oc["tilt_grid"] = opt.oracle_cfg.tilt_grid;
    oc["resolution"] = opt.oracle_cfg.resolution;
    oc["refine_iters"] = opt.oracle_cfg.refine_iters;
    oc["cluster_tol"] = opt.oracle_cfg.effective_cluster_tol();
    v["oracle"] = std::move(oc);
    v["sampling"] = "halton-deterministic";
    return v;
}

std::string verdict_line(const std::string& name, const std::string& verdict) {
    std::ostringstream os;
    os << "  " << name;
    for (std::size_t i = name.size(); i < 16; ++i) os << ' ';
    os << verdict << "\n";
    return os.str();
}

}  // namespace

AnalyzeResult analyze(const nlp::Problem& p, const AnalyzeOptions& opt) {
    AnalyzeResult res;
    Value& rep = res.report;
    rep = Value::object();
    rep["version"] = kVersion;
    rep["problem"] = problem_json(p);

    std::ostringstream sum;
    sum << "tiltcheck " << kVersion << " analyze: n=" << p.n << " m=" << p.m << "\n";

    // stationarity gate
    nlp::PointEvaluation ev = nlp::evaluate(p, p.candidate);
    Value stat = Value::object();
    if (!ev.feasible) {
        double viol = 0.0;
        for (double qi : ev.q) viol = std::max(viol, qi);
        stat["feasible"] = false;
        stat["max_violation"] = viol;
        rep["stationarity"] = std::move(stat);
        rep["config"] = config_json(opt, opt.gamma, opt.gamma == 0.0);
        sum << "  point infeasible (max violation " << viol << ")\n";
        res.summary = sum.str();
        res.exit_code = 2;
        return res;
    }
    nlp::StationarityResult st = nlp::stationarity_residual(p, p.candidate);
    res.stationarity_residual = st.residual;
    stat["feasible"] = true;
    stat["residual"] = st.residual;
    stat["multiplier"] = vec_json(st.multiplier);
    rep["stationarity"] = std::move(stat);
    if (st.residual > 1e-8) {
        rep["config"] = config_json(opt, opt.gamma, opt.gamma == 0.0);
        sum << "  point is not stationary: residual " << st.residual << "\n";
        res.summary = sum.str();
        res.exit_code = 2;
        return res;
    }
    sum << "  stationary: residual " << st.residual << "\n";

    // constraint qualifications
    stab::LicqResult licq = stab::check_licq(ev);
    stab::MfcqResult mfcq = stab::check_mfcq(ev);
    stab::CrcqResult crcq = stab::check_crcq(p, p.candidate, opt.crcq_radius, opt.crcq_samples);
    stab::MscqResult mscq = stab::estimate_mscq(p, p.candidate, opt.mscq_radius, opt.mscq_samples);
    stab::BeppResult bepp =
        stab::estimate_bepp(p, p.candidate, opt.bepp_radius, opt.bepp_x_samples, opt.bepp_dir_samples);
    Value cq = Value::object();
    cq["licq"] = licq_json(licq);
    cq["mfcq"] = mfcq_json(mfcq);
    cq["crcq"] = crcq_json(crcq);
    cq["mscq"] = mscq_json(mscq);
    cq["bepp"] = bepp_json(bepp);
    rep["cq"] = std::move(cq);
    sum << verdict_line("licq", licq.holds ? "Holds" : "Fails");
    sum << verdict_line("mfcq", mfcq.holds ? "Holds" : "Fails");
    sum << verdict_line("crcq", crcq.holds_on_samples ? "HoldsOnSamples" : "FailsWithWitness");
    {
        std::ostringstream ms;
        ms << "kappa_hat " << mscq.kappa_hat << (mscq.diverging ? " (diverging)" : "");
        sum << verdict_line("mscq", ms.str());
        std::ostringstream bs;
        bs << (bepp.bounded_on_samples ? "BoundedOnSamples" : "FailsWithWitness") << " kappa_hat "
           << bepp.kappa_hat;
        sum << verdict_line("bepp", bs.str());
    }

    res.mscq_applicable = !mscq.diverging;
    bool gamma_auto = (opt.gamma == 0.0);
    double gamma = gamma_auto
                       ? (mscq.kappa_hat > 0.0 ? 1.5 * mscq.kappa_hat : 1.0)
                       : opt.gamma;
    rep["config"] = config_json(opt, gamma, gamma_auto);

    Value so = Value::object();
    if (!res.mscq_applicable) {
        const std::string reason = "MSCQ estimate diverging";
        so["ssosc"] = not_applicable_json(reason);
        so["pointbased"] = not_applicable_json(reason);
        so["kappa_free"] = not_applicable_json(reason);
        so["extreme_point"] = not_applicable_json(reason);
        so["rusosc"] = not_applicable_json(reason);
        rep["second_order"] = std::move(so);
        rep["tilt_bound"] = Value();
        sum << "  second-order checks NotApplicable: " << reason << "\n";
    } else {
        stab::DeltaSet delta = stab::build_delta(p, p.candidate, gamma, opt.delta_directions);
        so["delta"] = delta_json(delta);
        so["gamma_exceeds_mscq_estimate"] = (gamma > mscq.kappa_hat);

        stab::SecondOrderResult ssosc = stab::check_ssosc(p, p.candidate);
        so["ssosc"] = second_order_json(ssosc);
        sum << verdict_line("ssosc", stab::to_string(ssosc.verdict));

        stab::SecondOrderResult kfree = stab::check_kappa_free(p, p.candidate, delta);
        so["kappa_free"] = second_order_json(kfree);
        sum << verdict_line("kappa_free", stab::to_string(kfree.verdict));

        double bound = stab::tilt_bound(p, p.candidate, delta);
        res.tilt_bound_value = bound;
        res.tilt_bound_valid = true;
        rep["tilt_bound"] = std::isfinite(bound) ? Value(bound) : Value("inf");
        sum << "  tilt_bound      " << json::format_double(bound) << "\n";

        double kappa_check = opt.kappa ? *opt.kappa
                                       : (std::isfinite(bound) && bound > 0.0 ? 1.05 * bound
                                                                              : 1.0);
        stab::SecondOrderResult pointbased =
            stab::check_pointbased(p, p.candidate, delta, kappa_check);
        {
            Value pb = second_order_json(pointbased);
            pb["kappa"] = kappa_check;
            so["pointbased"] = std::move(pb);
        }
        sum << verdict_line("pointbased", stab::to_string(pointbased.verdict));

        stab::SecondOrderResult ep =
            stab::check_extreme_point_variant(p, p.candidate, kappa_check, opt.delta_directions);
        {
            Value epv = second_order_json(ep);
            epv["kappa"] = kappa_check;
            so["extreme_point"] = std::move(epv);
        }
        sum << verdict_line("extreme_point", stab::to_string(ep.verdict));

        // RUSOSC probe level: slightly inside the inferred uniform ell, or
        // 1/kappa when a kappa was requested
        if (kfree.verdict == stab::Verdict::Holds && !kfree.vacuous) {
            double ell = opt.kappa ? 1.0 / *opt.kappa : 0.95 * kfree.min_reduced_eig;
            stab::RusoscResult ru = stab::check_rusosc_sampled(
                p, p.candidate, opt.eta, ell, opt.rusosc_points, opt.rusosc_directions,
                opt.rusosc_enforce_ball, gamma);
            so["rusosc"] = rusosc_json(ru);
            sum << verdict_line("rusosc",
                                ru.holds_on_samples ? "HoldsOnSamples" : "FailsWithWitness");
        } else {
            so["rusosc"] = not_applicable_json("no finite uniform ell inferred");
        }
        rep["second_order"] = std::move(so);
    }

    // oracle
    std::optional<oracle::OracleReport> orep;
    std::optional<oracle::GrowthResult> growth;
    std::optional<oracle::ConsistencyRecord> consistency;
    if (!opt.run_oracle || p.n > 3) {
        rep["oracle"] = "skipped";
        sum << "  oracle          skipped\n";
    } else {
        orep = oracle::verify_tilt_stability(p, p.candidate, opt.oracle_cfg);
        if (orep->single_valued && res.tilt_bound_valid && std::isfinite(res.tilt_bound_value)) {
            double kg = opt.kappa ? *opt.kappa : 1.05 * std::max(res.tilt_bound_value, 1e-6);
            growth = oracle::verify_growth(p, p.candidate, kg, opt.oracle_cfg);
        }
        if (res.tilt_bound_valid && std::isfinite(res.tilt_bound_value) && orep->single_valued)
            consistency = oracle::empirical_modulus_consistency(orep->lipschitz_hat,
                                                                res.tilt_bound_value);
        rep["oracle"] = oracle_json(*orep, growth, consistency);
        sum << "  oracle          " << (orep->single_valued ? "single-valued" : "MULTIVALUED")
            << ", L_hat " << json::format_double(orep->lipschitz_hat) << "\n";
        res.oracle_report = orep;
    }

    // internal consistency: the bound must cover the measured modulus, and a
    // certified sufficient condition contradicts a multivalued argmin map
    res.exit_code = 0;
    if (consistency && !consistency->pass) res.exit_code = 3;
    if (orep && !orep->single_valued && res.mscq_applicable && res.tilt_bound_valid &&
        std::isfinite(res.tilt_bound_value))
        res.exit_code = 3;
    if (res.exit_code == 3) sum << "  CONSISTENCY FAILURE\n";

    res.summary = sum.str();
    return res;
}

json::Value run_cq_checks(const nlp::Problem& p, const std::vector<std::string>& names,
                          const AnalyzeOptions& opt, std::string* summary) {
    nlp::PointEvaluation ev = nlp::evaluate(p, p.candidate);
    Value out = Value::object();
    std::ostringstream sum;
    for (const std::string& name : names) {
        if (name == "licq") {
            stab::LicqResult r = stab::check_licq(ev);
            out["licq"] = licq_json(r);
            sum << verdict_line("licq", r.holds ? "Holds" : "Fails");
        } else if (name == "mfcq") {
            stab::MfcqResult r = stab::check_mfcq(ev);
            out["mfcq"] = mfcq_json(r);
            sum << verdict_line("mfcq", r.holds ? "Holds" : "Fails");
        } else if (name == "crcq") {
            stab::CrcqResult r = stab::check_crcq(p, p.candidate, opt.crcq_radius, opt.crcq_samples);
            out["crcq"] = crcq_json(r);
            sum << verdict_line("crcq", r.holds_on_samples ? "HoldsOnSamples" : "FailsWithWitness");
        } else if (name == "mscq") {
            stab::MscqResult r = stab::estimate_mscq(p, p.candidate, opt.mscq_radius, opt.mscq_samples);
            out["mscq"] = mscq_json(r);
            std::ostringstream ms;
            ms << "kappa_hat " << r.kappa_hat << (r.diverging ? " (diverging)" : "");
            sum << verdict_line("mscq", ms.str());
        } else if (name == "bepp") {
            stab::BeppResult r = stab::estimate_bepp(p, p.candidate, opt.bepp_radius,
                                                     opt.bepp_x_samples, opt.bepp_dir_samples);
            out["bepp"] = bepp_json(r);
            std::ostringstream bs;
            bs << (r.bounded_on_samples ? "BoundedOnSamples" : "FailsWithWitness") << " kappa_hat "
               << r.kappa_hat;
            sum << verdict_line("bepp", bs.str());
        } else {
            throw std::invalid_argument("unknown constraint qualification '" + name + "'");
        }
    }
    if (summary) *summary = sum.str();
    return out;
}

OracleRunResult run_oracle_only(const nlp::Problem& p, const AnalyzeOptions& opt) {
    OracleRunResult out;
    oracle::OracleReport orep = oracle::verify_tilt_stability(p, p.candidate, opt.oracle_cfg);
    Value rep = Value::object();
    rep["version"] = kVersion;
    rep["problem"] = problem_json(p);
    Value oc = Value::object();
    oc["gamma"] = opt.oracle_cfg.gamma;
    oc["tilt_radius"] = opt.oracle_cfg.tilt_radius;
    oc["tilt_grid"] = opt.oracle_cfg.tilt_grid;
    oc["resolution"] = opt.oracle_cfg.resolution;
    oc["refine_iters"] = opt.oracle_cfg.refine_iters;
    oc["cluster_tol"] = opt.oracle_cfg.effective_cluster_tol();
    rep["config"] = std::move(oc);
    rep["oracle"] = oracle_json(orep, std::nullopt, std::nullopt);
    out.report = std::move(rep);

    std::ostringstream sum;
    sum << "tiltcheck " << kVersion << " oracle: "
        << (orep.single_valued ? "single-valued" : "MULTIVALUED") << ", L_hat "
        << json::format_double(orep.lipschitz_hat) << "\n";
    if (orep.multivalued_tilt) {
        sum << "  multivalued at tilt (";
        for (std::size_t i = 0; i < orep.multivalued_tilt->size(); ++i)
            sum << (i ? ", " : "") << (*orep.multivalued_tilt)[i];
        sum << ")\n";
    }
    out.summary = sum.str();
    out.exit_code = orep.single_valued ? 0 : 4;
    return out;
}

}  // namespace tiltcheck::cli
