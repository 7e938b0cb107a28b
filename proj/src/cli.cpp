#include "rstab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rstab/errors.hpp"
#include "rstab/generators.hpp"
#include "rstab/matrix_market.hpp"
#include "rstab/oracle.hpp"
#include "rstab/reduction.hpp"
#include "rstab/report.hpp"
#include "rstab/solver.hpp"

namespace rstab {

namespace {

constexpr double kHermiteTol = 1e-8;
constexpr double kSecondDerivativeTol = 1e-4;

struct Options {
    std::string path_A, path_B, path_C;
    std::string gen;
    ProblemParams params;
    SolverConfig solver;
    std::optional<double> omega_max;
    std::string json_path;
    std::string csv_path;
    std::string reference_path;
    bool verify_stability = false;
    bool no_timings = false;
    bool no_anchor = false;
    bool force = false;
    int probe = 0;
    double shrink = 0.99;
    std::vector<double> omegas;
};

void add_shared(CLI::App* app, Options& o)
{
    app->add_option("-A", o.path_A, "Matrix Market file for A");
    app->add_option("-B", o.path_B, "Matrix Market file for B");
    app->add_option("-C", o.path_C, "Matrix Market file for C");
    app->add_option("--gen", o.gen,
                    "generate a problem: random_stable, convection_diffusion_1d, "
                    "convection_diffusion_2d");
    app->add_option("--n", o.params.size, "generator size (state dimension or grid points)");
    app->add_option("--m", o.params.m, "number of inputs");
    app->add_option("--p", o.params.p, "number of outputs");
    app->add_option("--seed", o.params.seed, "generator seed");
    app->add_option("--margin", o.params.margin, "stability margin of random_stable");
    app->add_option("--skew", o.params.skew, "skew weight of random_stable in [0, 1]");
    app->add_option("--convection", o.params.convection, "convection speed");
    app->add_flag("--unit-io", o.params.unit_io, "unit columns for B and rows for C");
    app->add_option("--eps-rel", o.solver.eps_rel, "relative termination tolerance");
    app->add_option("--kmax", o.solver.k_max, "iteration cap");
    app->add_option("--gamma-floor", o.solver.gamma_floor, "lower end of the gamma interval");
    app->add_option("--omega-max", o.omega_max, "upper end of the frequency search");
    app->add_option("--coarse-samples", o.solver.coarse_samples, "outer grid size");
    app->add_option("--rank-tol", o.solver.rank_tol, "basis truncation tolerance");
    app->add_flag("--no-zero-anchor", o.no_anchor, "do not absorb w = 0 into the first subspace");
    app->add_option("--json", o.json_path, "write the JSON report here");
    app->add_option("--csv", o.csv_path, "write the per-iteration CSV here");
    app->add_option("--reference", o.reference_path, "JSON report whose radius feeds the error columns");
    app->add_flag("--verify-stability", o.verify_stability, "check that A is Hurwitz first");
    app->add_flag("--no-timings", o.no_timings, "write 0 for wall-clock columns");
    app->add_option("--probe", o.probe, "random perturbation trials at shrink * radius");
    app->add_option("--shrink", o.shrink, "probe perturbation size relative to the radius");
    app->add_flag("--force", o.force, "lift the dense size guard");
}

StateSpaceSystem load(const Options& o, InputDescriptor& in)
{
    const bool files = !o.path_A.empty() || !o.path_B.empty() || !o.path_C.empty();
    if (files == !o.gen.empty()) {
        throw ParameterError("give either -A/-B/-C or --gen");
    }
    if (files) {
        if (o.path_A.empty() || o.path_B.empty() || o.path_C.empty()) {
            throw ParameterError("-A, -B and -C are all required");
        }
        in.generated = false;
        in.path_A = o.path_A;
        in.path_B = o.path_B;
        in.path_C = o.path_C;
        return load_system(o.path_A, o.path_B, o.path_C);
    }
    in.generated = true;
    in.kind = parse_problem_kind(o.gen);
    in.params = o.params;
    return generate_problem(in.kind, o.params);
}

std::string slurp(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        throw ParseError(path + ": cannot open");
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) {
        throw ParameterError(path + ": cannot write");
    }
    f << text;
}

int emit(const Options& o, RunReport& report, std::ostream& out)
{
    if (!o.reference_path.empty()) {
        report.reference_radius = reference_radius_from_json(slurp(o.reference_path));
    }
    if (o.no_timings) {
        report.total_seconds = 0.0;
        for (auto& rec : report.result.history) {
            rec.wall_time = 0.0;
        }
    }
    write_text(out, report);
    if (!o.json_path.empty()) {
        write_file(o.json_path, to_json(report));
    }
    if (!o.csv_path.empty()) {
        std::ostringstream ss;
        write_csv(ss, report, !o.no_timings);
        write_file(o.csv_path, ss.str());
    }
    if (report.probe && report.probe->violations > 0) {
        return exit_check_failed;
    }
    return report.result.converged ? exit_ok : exit_cap;
}

int run_solver(const Options& o, bool oracle, std::ostream& out, std::ostream& err)
{
    RunReport report;
    report.command = oracle ? "oracle" : "compute";
    const StateSpaceSystem sys = load(o, report.input);
    report.n = sys.n();
    report.m = sys.m();
    report.p = sys.p();
    if (o.verify_stability) {
        try {
            verify_stable(sys);
        } catch (const ParameterError& e) {
            err << "check failed: " << e.what() << '\n';
            return exit_check_failed;
        }
    }
    report.solver = o.solver;
    report.solver.omega_max = o.omega_max;
    report.solver.anchor_zero = !o.no_anchor;
    report.oracle.omega_max = o.omega_max;
    report.oracle.gamma_floor = o.solver.gamma_floor;
    report.oracle.force = o.force;

    const auto t0 = std::chrono::steady_clock::now();
    report.result = oracle ? dense_radius(sys, report.oracle) : compute_radius(sys, report.solver);
    if (o.probe > 0) {
        report.probe = stability_probe(sys, report.result.radius, o.probe, o.shrink, 1, o.force);
    }
    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return emit(o, report, out);
}

int run_interp_check(const Options& o, std::ostream& out)
{
    if (o.omegas.empty()) {
        throw ParameterError("interp-check needs at least one --omega");
    }
    InputDescriptor in;
    const StateSpaceSystem sys = load(o, in);
    SubspaceBasis basis = empty_basis(sys.n(), o.solver.rank_tol);
    for (double w : o.omegas) {
        basis = extend_orthonormal(std::move(basis), expansion_block(sys, w), w);
    }
    const ReducedSystem red = project(sys, basis);
    const MuOptions opt = o.solver.mu_options();

    bool ok = true;
    char line[320];
    out << "basis dimension " << basis.dim() << " of n = " << sys.n() << '\n';
    out << "         omega     H_res    H'_res   H''_res    mu_err gamma_err   mu'_err   mu''_err\n";
    for (double w : o.omegas) {
        const auto d = verify_interpolation(sys, red, w, opt);
        const bool pass = d.H0_residual <= kHermiteTol && d.H1_residual <= kHermiteTol
                          && d.d2mu_error <= kSecondDerivativeTol;
        ok = ok && pass;
        char dmu[16] = "-";
        if (d.dmu_error) {
            std::snprintf(dmu, sizeof dmu, "%9.2e", *d.dmu_error);
        }
        std::snprintf(line, sizeof line, "%14.6e %9.2e %9.2e %9.2e %9.2e %9.2e %9s %10.2e  %s\n", w,
                      d.H0_residual, d.H1_residual, d.H2_residual, d.mu_error, d.gamma_error,
                      dmu,
                      d.d2mu_error, pass ? "ok" : "FAIL");
        out << line;
    }
    return ok ? exit_ok : exit_check_failed;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Structured real stability radius of large sparse systems"};
    app.require_subcommand(1);
    Options o;
    auto* compute = app.add_subcommand("compute", "subspace method");
    auto* oracle = app.add_subcommand("oracle", "dense brute-force reference");
    auto* check = app.add_subcommand("interp-check", "Hermite interpolation residuals");
    for (auto* sub : {compute, oracle, check}) {
        add_shared(sub, o);
    }
    check->add_option("--omega", o.omegas, "interpolation point (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_error;
    }

    try {
        if (*check) {
            return run_interp_check(o, out);
        }
        return run_solver(o, static_cast<bool>(*oracle), out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
}

} // namespace rstab
