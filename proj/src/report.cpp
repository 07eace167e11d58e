#include "mcpc/report.hpp"

#include "mcpc/trace.hpp"

#include <cmath>

namespace mcpc {

using nlohmann::json;

namespace {

json vec(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

json mat(const Matrix& a) {
    json out = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        out.push_back(vec(a.row(i).transpose()));
    }
    return out;
}

json finite_or_null(Real v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

FeasibilityReport analyze_feasibility(const NetworkSpec& spec, const Matrix& targets,
                                      const Vector& k_gains) {
    FeasibilityReport r;
    r.targets = targets;
    r.allotment = allotment_feasible(spec, targets);
    r.all_channels_feasible = true;
    for (std::size_t k = 0; k < spec.channel_count; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        ChannelFeasibility ch;
        ch.channel = k;
        const InterferenceMatrices mats = derive_matrices(spec, targets.col(kk), k_gains, k);
        ch.feasibility = FeasibilityResult{mats.rho < 1.0, mats.rho};
        ch.diagnostics = reducibility_diagnostics(mats.C);
        if (ch.feasibility.feasible) {
            ch.equilibrium = equilibrium_powers(spec, targets.col(kk), k);
            ch.certificate = lyapunov_certificate(mats.A);
        }
        r.all_channels_feasible = r.all_channels_feasible && ch.feasibility.feasible;
        r.channels.push_back(std::move(ch));
    }
    return r;
}

json to_json(const FeasibilityReport& r) {
    json channels = json::array();
    for (const ChannelFeasibility& ch : r.channels) {
        json c = {{"channel", ch.channel + 1},
                  {"rho", ch.feasibility.rho},
                  {"feasible", ch.feasibility.feasible},
                  {"reducibility", ch.diagnostics}};
        if (ch.equilibrium) {
            c["eta"] = vec(ch.equilibrium->eta);
            c["p_star"] = vec(ch.equilibrium->p_star);
            c["p_star_residual"] = ch.equilibrium->residual;
        } else {
            c["p_star"] = nullptr;
        }
        if (ch.certificate) {
            c["certificate"] = {{"D", vec(ch.certificate->D)},
                                {"min_eigenvalue", ch.certificate->min_eig},
                                {"valid", ch.certificate->valid},
                                {"diagnostics", ch.certificate->diagnostics}};
        } else {
            c["certificate"] = nullptr;
        }
        channels.push_back(c);
    }
    return {{"schema", kReportSchema},
            {"kind", "feasibility"},
            {"tool", kToolVersion},
            {"targets", mat(r.targets)},
            {"all_channels_feasible", r.all_channels_feasible},
            {"allotment",
             {{"feasible", r.allotment.feasible},
              {"rho_per_channel", vec(r.allotment.rho_per_channel)},
              {"avg_target_gap", vec(r.allotment.avg_gap)}}},
            {"channels", channels}};
}

json simulation_report(const Scenario& scenario, const Trajectory& t) {
    const SystemState& s = t.final_state;
    const DerivedMetrics m = derived_metrics(scenario.network, s);
    json out = {{"schema", kReportSchema},
                {"kind", "simulation"},
                {"tool", kToolVersion},
                {"scenario", scenario.name},
                {"mode", to_string(scenario.params.mode)},
                {"seed", scenario.run.rng_seed ? json(*scenario.run.rng_seed) : json(nullptr)},
                {"terminated_by", to_string(t.terminated_by)},
                {"steps", t.steps},
                {"final_time", s.time},
                {"samples", t.samples.size()},
                {"record_stride", t.record_stride},
                {"final",
                 {{"powers", mat(s.powers)},
                  {"targets", mat(s.targets)},
                  {"sinr", mat(m.sinr)},
                  {"rates", mat(m.rates)},
                  {"avg_target_gap", vec(m.avg_target_gap)},
                  {"utility", t.final_monitor.utility},
                  {"rho_per_channel", vec(t.final_monitor.rho_per_channel)},
                  {"b_gains", mat(t.final_monitor.b_current)}}},
                {"monitor",
                 {{"utility_increase_violations", t.utility_increase_violations},
                  {"gain_condition_steps", t.gain_condition_steps},
                  {"stall_events", t.stall_events},
                  {"gate_violations", t.gate_violations}}}};
    if (t.divergence_step) {
        out["divergence"] = {{"step", *t.divergence_step}, {"reason", t.divergence_reason}};
    }
    return out;
}

json region_report(const RegionResult& r, const std::vector<Vector>& targets,
                   const std::vector<RegionClass>& classes) {
    json hull = json::array();
    for (const Point2& p : r.hull) {
        hull.push_back(json::array({p.x, p.y}));
    }
    json classified = json::array();
    for (std::size_t a = 0; a < targets.size() && a < classes.size(); ++a) {
        classified.push_back({{"target", vec(targets[a])}, {"class", to_string(classes[a])}});
    }
    return {{"schema", kReportSchema},
            {"kind", "region"},
            {"tool", kToolVersion},
            {"metric", to_string(r.metric)},
            {"spacing", to_string(r.spacing)},
            {"channel", r.channel + 1},
            {"grid_resolution", r.grid_resolution},
            {"p_max", r.p_max},
            {"sample_count", r.samples.size()},
            {"hull", hull},
            {"areas",
             {{"psi", r.psi_area}, {"hull", r.hull_area}, {"gap_fraction", finite_or_null(r.area_gap())}}},
            {"effectively_convex", r.hull_area > 0.0 && r.area_gap() < 0.02},
            {"error_bound", r.error_bound},
            {"targets", classified}};
}

json to_json(const Decomposition& d, Metric metric) {
    json points = json::array();
    for (std::size_t a = 0; a < d.points.size(); ++a) {
        points.push_back({{"point", vec(d.points[a].point)},
                          {"powers", vec(d.points[a].powers)},
                          {"weight", d.weights[a]}});
    }
    return {{"schema", kReportSchema},
            {"kind", "decomposition"},
            {"tool", kToolVersion},
            {"metric", to_string(metric)},
            {"class", to_string(d.cls)},
            {"target", vec(d.target)},
            {"achieved", vec(d.achieved)},
            {"error", d.error},
            {"error_bound", d.error_bound},
            {"points", points}};
}

void write_report(const json& report, const std::filesystem::path& path) {
    write_text_atomic(path, report.dump(2) + "\n");
}

}  // namespace mcpc
