#include "rstab/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "rstab/errors.hpp"

namespace rstab {

using nlohmann::json;

namespace {

// JSON has no infinities; they travel as strings.
json num(double x)
{
    if (std::isfinite(x)) {
        return x;
    }
    if (std::isnan(x)) {
        return "nan";
    }
    return x > 0.0 ? "inf" : "-inf";
}

double get_num(const json& j)
{
    if (j.is_number()) {
        return j.get<double>();
    }
    const auto s = j.get<std::string>();
    if (s == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    if (s == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    throw ParseError("expected a number, got '" + s + "'");
}

json opt_num(const std::optional<double>& x)
{
    return x ? num(*x) : json(nullptr);
}

std::optional<double> get_opt_num(const json& j)
{
    if (j.is_null()) {
        return std::nullopt;
    }
    return get_num(j);
}

MuCase parse_mu_case(const std::string& s)
{
    for (auto c : {MuCase::interior, MuCase::real_part_only, MuCase::gamma_one,
                   MuCase::gamma_limit}) {
        if (to_string(c) == s) {
            return c;
        }
    }
    throw ParseError("unknown mu case '" + s + "'");
}

std::string_view to_string(InitStrategy s)
{
    return s == InitStrategy::user_omega ? "user_omega" : "coarse_grid_argmax";
}

InitStrategy parse_init(const std::string& s)
{
    if (s == "user_omega") {
        return InitStrategy::user_omega;
    }
    if (s == "coarse_grid_argmax") {
        return InitStrategy::coarse_grid_argmax;
    }
    throw ParseError("unknown init strategy '" + s + "'");
}

json input_json(const InputDescriptor& in)
{
    if (!in.generated) {
        return {{"type", "files"}, {"A", in.path_A}, {"B", in.path_B}, {"C", in.path_C}};
    }
    const auto& p = in.params;
    return {{"type", "generator"},
            {"kind", std::string(to_string(in.kind))},
            {"size", p.size},
            {"m", p.m},
            {"p", p.p},
            {"seed", p.seed},
            {"margin", num(p.margin)},
            {"skew", num(p.skew)},
            {"convection", num(p.convection)},
            {"unit_io", p.unit_io}};
}

InputDescriptor input_from(const json& j)
{
    InputDescriptor in;
    in.generated = j.at("type").get<std::string>() == "generator";
    if (!in.generated) {
        in.path_A = j.at("A").get<std::string>();
        in.path_B = j.at("B").get<std::string>();
        in.path_C = j.at("C").get<std::string>();
        return in;
    }
    in.kind = parse_problem_kind(j.at("kind").get<std::string>());
    auto& p = in.params;
    p.size = j.at("size").get<int>();
    p.m = j.at("m").get<int>();
    p.p = j.at("p").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.margin = get_num(j.at("margin"));
    p.skew = get_num(j.at("skew"));
    p.convection = get_num(j.at("convection"));
    p.unit_io = j.at("unit_io").get<bool>();
    return in;
}

json solver_json(const SolverConfig& c)
{
    return {{"eps_rel", num(c.eps_rel)},
            {"k_max", c.k_max},
            {"gamma_floor", num(c.gamma_floor)},
            {"golden_tol", num(c.golden_tol)},
            {"omega_max", opt_num(c.omega_max)},
            {"coarse_samples", c.coarse_samples},
            {"refine_tol", num(c.refine_tol)},
            {"gap_tol", num(c.gap_tol)},
            {"rank_tol", num(c.rank_tol)},
            {"init_strategy", std::string(to_string(c.init_strategy))},
            {"user_omega", num(c.user_omega)},
            {"anchor_zero", c.anchor_zero}};
}

SolverConfig solver_from(const json& j)
{
    SolverConfig c;
    c.eps_rel = get_num(j.at("eps_rel"));
    c.k_max = j.at("k_max").get<int>();
    c.gamma_floor = get_num(j.at("gamma_floor"));
    c.golden_tol = get_num(j.at("golden_tol"));
    c.omega_max = get_opt_num(j.at("omega_max"));
    c.coarse_samples = j.at("coarse_samples").get<int>();
    c.refine_tol = get_num(j.at("refine_tol"));
    c.gap_tol = get_num(j.at("gap_tol"));
    c.rank_tol = get_num(j.at("rank_tol"));
    c.init_strategy = parse_init(j.at("init_strategy").get<std::string>());
    c.user_omega = get_num(j.at("user_omega"));
    c.anchor_zero = j.at("anchor_zero").get<bool>();
    return c;
}

json oracle_json(const OracleConfig& c)
{
    return {{"omega_grid_points", c.omega_grid_points},
            {"omega_max", opt_num(c.omega_max)},
            {"gamma_grid_points", c.gamma_grid_points},
            {"refine_iters", c.refine_iters},
            {"sweep_gamma_points", c.sweep_gamma_points},
            {"gamma_floor", num(c.gamma_floor)},
            {"force", c.force}};
}

OracleConfig oracle_from(const json& j)
{
    OracleConfig c;
    c.omega_grid_points = j.at("omega_grid_points").get<int>();
    c.omega_max = get_opt_num(j.at("omega_max"));
    c.gamma_grid_points = j.at("gamma_grid_points").get<int>();
    c.refine_iters = j.at("refine_iters").get<int>();
    c.sweep_gamma_points = j.at("sweep_gamma_points").get<int>();
    c.gamma_floor = get_num(j.at("gamma_floor"));
    c.force = j.at("force").get<bool>();
    return c;
}

json record_json(const IterationRecord& r)
{
    return {{"k", r.k},
            {"omega_next", num(r.omega_next)},
            {"gamma", num(r.gamma_at_opt)},
            {"mu", num(r.mu_k)},
            {"radius", num(r.r_k)},
            {"basis_dim", r.basis_dim},
            {"wall_time_s", num(r.wall_time)},
            {"deflated", r.deflated},
            {"mu_case", std::string(to_string(r.mu_case))},
            {"note", r.note}};
}

IterationRecord record_from(const json& j)
{
    IterationRecord r;
    r.k = j.at("k").get<int>();
    r.omega_next = get_num(j.at("omega_next"));
    r.gamma_at_opt = get_num(j.at("gamma"));
    r.mu_k = get_num(j.at("mu"));
    r.r_k = get_num(j.at("radius"));
    r.basis_dim = j.at("basis_dim").get<Eigen::Index>();
    r.wall_time = get_num(j.at("wall_time_s"));
    r.deflated = j.at("deflated").get<bool>();
    r.mu_case = parse_mu_case(j.at("mu_case").get<std::string>());
    r.note = j.at("note").get<std::string>();
    return r;
}

std::string fmt17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

std::vector<ErrorRow> error_table(const RunReport& report)
{
    const auto& h = report.result.history;
    std::vector<ErrorRow> rows;
    if (h.empty()) {
        return rows;
    }
    const double r_star = report.reference_radius ? *report.reference_radius : h.back().r_k;
    const double mu_star = r_star > 0.0 && std::isfinite(r_star) ? 1.0 / r_star : 0.0;
    for (const auto& rec : h) {
        rows.push_back({rec.k, rec.omega_next, std::abs(rec.mu_k - mu_star),
                        std::abs(rec.r_k - r_star)});
    }
    return rows;
}

std::string to_json(const RunReport& r)
{
    json hist = json::array();
    for (const auto& rec : r.result.history) {
        hist.push_back(record_json(rec));
    }
    json errors = json::array();
    for (const auto& e : error_table(r)) {
        errors.push_back({{"k", e.k},
                          {"omega_next", num(e.omega_next)},
                          {"mu_error", num(e.mu_error)},
                          {"r_error", num(e.r_error)}});
    }
    json j = {
        {"command", r.command},
        {"input", input_json(r.input)},
        {"dimensions", {{"n", r.n}, {"m", r.m}, {"p", r.p}}},
        {"solver_config", solver_json(r.solver)},
        {"oracle_config", oracle_json(r.oracle)},
        {"result",
         {{"radius", num(r.result.radius)},
          {"omega_star", num(r.result.omega_star)},
          {"gamma_star", num(r.result.gamma_star)},
          {"mu_star", num(r.result.mu_star)},
          {"converged", r.result.converged},
          {"iterations", r.result.iterations()},
          {"notes", r.result.notes},
          {"history", hist}}},
        {"reference_radius", opt_num(r.reference_radius)},
        {"errors", errors},
        {"total_seconds", num(r.total_seconds)},
    };
    if (r.probe) {
        j["probe"] = {{"trials", r.probe->trials},
                      {"violations", r.probe->violations},
                      {"delta_norm", num(r.probe->delta_norm)},
                      {"worst_abscissa", num(r.probe->worst_abscissa)}};
    } else {
        j["probe"] = nullptr;
    }
    return j.dump(2) + "\n";
}

RunReport report_from_json(std::string_view text)
{
    try {
        const json j = json::parse(text);
        RunReport r;
        r.command = j.at("command").get<std::string>();
        r.input = input_from(j.at("input"));
        r.n = j.at("dimensions").at("n").get<Eigen::Index>();
        r.m = j.at("dimensions").at("m").get<Eigen::Index>();
        r.p = j.at("dimensions").at("p").get<Eigen::Index>();
        r.solver = solver_from(j.at("solver_config"));
        r.oracle = oracle_from(j.at("oracle_config"));
        const json& res = j.at("result");
        r.result.radius = get_num(res.at("radius"));
        r.result.omega_star = get_num(res.at("omega_star"));
        r.result.gamma_star = get_num(res.at("gamma_star"));
        r.result.mu_star = get_num(res.at("mu_star"));
        r.result.converged = res.at("converged").get<bool>();
        r.result.notes = res.at("notes").get<std::vector<std::string>>();
        for (const auto& h : res.at("history")) {
            r.result.history.push_back(record_from(h));
        }
        r.reference_radius = get_opt_num(j.at("reference_radius"));
        r.total_seconds = get_num(j.at("total_seconds"));
        if (!j.at("probe").is_null()) {
            const json& p = j.at("probe");
            ProbeReport pr;
            pr.trials = p.at("trials").get<int>();
            pr.violations = p.at("violations").get<int>();
            pr.delta_norm = get_num(p.at("delta_norm"));
            pr.worst_abscissa = get_num(p.at("worst_abscissa"));
            r.probe = pr;
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report JSON: ") + e.what());
    }
}

double reference_radius_from_json(std::string_view text)
{
    try {
        const json j = json::parse(text);
        const double r = get_num(j.at("result").at("radius"));
        if (!(r > 0.0)) {
            throw ParseError("reference radius must be positive");
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed reference JSON: ") + e.what());
    }
}

void write_csv(std::ostream& out, const RunReport& report, bool timings)
{
    out << "k,omega_next,gamma,mu,radius,basis_dim,wall_time_s\n";
    for (const auto& rec : report.result.history) {
        out << rec.k << ',' << fmt17(rec.omega_next) << ',' << fmt17(rec.gamma_at_opt) << ','
            << fmt17(rec.mu_k) << ',' << fmt17(rec.r_k) << ',' << rec.basis_dim << ','
            << fmt17(timings ? rec.wall_time : 0.0) << '\n';
    }
}

void write_text(std::ostream& out, const RunReport& report)
{
    const auto& res = report.result;
    char line[256];
    out << report.command << ": n = " << report.n << ", m = " << report.m
        << ", p = " << report.p << '\n';
    std::snprintf(line, sizeof line, "radius     %.12e\nmu*        %.12e\nomega*     %.12e\ngamma*     %.12e\n",
                  res.radius, res.mu_star, res.omega_star, res.gamma_star);
    out << line;
    out << "converged  " << (res.converged ? "yes" : "no") << " after " << res.iterations()
        << " iteration(s)\n";
    if (report.reference_radius) {
        std::snprintf(line, sizeof line, "reference  %.12e\n", *report.reference_radius);
        out << line;
    }
    if (report.probe) {
        std::snprintf(line, sizeof line,
                      "probe      %d/%d destabilizing at |Delta| = %.6e (worst abscissa %.3e)\n",
                      report.probe->violations, report.probe->trials, report.probe->delta_norm,
                      report.probe->worst_abscissa);
        out << line;
    }
    for (const auto& note : res.notes) {
        out << "note: " << note << '\n';
    }
    out << "\n   k        omega_next          |mu_k - mu*|       |r_k - r*|   dim  case\n";
    const auto rows = error_table(report);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& rec = res.history[i];
        std::snprintf(line, sizeof line, "%4d  %18.12e  %16.6e  %16.6e  %4ld  %s", rows[i].k,
                      rows[i].omega_next, rows[i].mu_error, rows[i].r_error,
                      static_cast<long>(rec.basis_dim), std::string(to_string(rec.mu_case)).c_str());
        out << line;
        if (!rec.note.empty()) {
            out << "  (" << rec.note << ')';
        }
        out << '\n';
    }
    std::snprintf(line, sizeof line, "\ntotal time %.3f s\n", report.total_seconds);
    out << line;
}

} // namespace rstab
