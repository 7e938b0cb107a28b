#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rstab/mu.hpp"
#include "rstab/reduction.hpp"
#include "rstab/system.hpp"

namespace rstab {

enum class InitStrategy { coarse_grid_argmax, user_omega };

struct SolverConfig {
    double eps_rel = 1e-4;
    int k_max = 15;
    double gamma_floor = kGammaFloor;
    double golden_tol = 1e-9;
    /// Upper end of the frequency search; unset means 10 * ||A||_1.
    std::optional<double> omega_max;
    int coarse_samples = 200;
    double refine_tol = 1e-8;
    double gap_tol = 1e-8;
    double rank_tol = 1e-12;
    InitStrategy init_strategy = InitStrategy::coarse_grid_argmax;
    double user_omega = 0.0;
    /// Also absorb w = 0 into the initial subspace so the reduced problem
    /// reproduces the real-H value mu(0) exactly.
    bool anchor_zero = true;

    /// Throws ParameterError on non-positive tolerances, k_max < 0 or
    /// coarse_samples < 8.
    void validate() const;
    MuOptions mu_options() const { return {gamma_floor, golden_tol, gap_tol}; }
};

struct IterationRecord {
    int k = 0;
    double omega_next = 0.0;
    double gamma_at_opt = 1.0;
    double mu_k = 0.0;
    double r_k = 0.0;
    Eigen::Index basis_dim = 0;
    double wall_time = 0.0;
    bool deflated = false;
    MuCase mu_case = MuCase::interior;
    std::string note;
};

struct RadiusResult {
    double radius = 0.0;
    double omega_star = 0.0;
    double gamma_star = 1.0;
    double mu_star = 0.0;
    bool converged = false;
    std::vector<IterationRecord> history;
    /// Free-form warnings (e.g. maximizer close to omega_max).
    std::vector<std::string> notes;

    /// Subspace iterations after the initial basis.
    int iterations() const { return history.empty() ? 0 : static_cast<int>(history.size()) - 1; }
};

/// One point of an objective sampled by maximize_mu. `slope` is set when the
/// analytic derivative is available there.
struct MuPoint {
    double mu = 0.0;
    std::optional<double> slope;
};

/// Returns std::nullopt for points that must be skipped (degenerate reduction).
using MuObjective = std::function<std::optional<MuPoint>(double)>;

struct OuterMaximum {
    double omega = 0.0;
    double mu = 0.0;
};

/// Global maximization of mu on [0, omega_max]: uniform sampling followed by
/// local refinement of every sampled peak within 5% of the best one.
OuterMaximum maximize_mu(const MuObjective& evaluate, double omega_max, const SolverConfig& cfg);

/// Scalar transfer function value and its w-derivative at one frequency.
struct ScalarResponse {
    Complex h;
    Complex dh;
};

/// Returns std::nullopt for points that must be skipped (degenerate reduction).
using ScalarObjective = std::function<std::optional<ScalarResponse>(double)>;

/// Root of Im h in [lo, hi] (a sign change is required) by Newton steps
/// safeguarded with bisection, driven to machine precision.
std::optional<double> refine_real_crossing(const ScalarObjective& f, double lo, double hi);

/// Crossings Im h = 0 in (0, omega_max] located from sign changes on a uniform
/// grid of `samples` points and refined to machine precision, with |Re h| there.
std::vector<OuterMaximum> grid_real_crossings(const ScalarObjective& f, double omega_max,
                                              int samples);

/// Single-input single-output systems: mu(h) vanishes unless h is real, so the
/// supremum of mu is the largest |h| over the real crossings Im h(iw) = 0.
/// Sign changes of Im h on the coarse grid over (0, omega_max] are refined to
/// machine precision; w = 0 always counts.
OuterMaximum maximize_real_crossing(const ScalarObjective& f, double omega_max,
                                    const SolverConfig& cfg);

/// Frequencies in (0, omega_max] where a single-input single-output reduced
/// response is real: zeros of H^V(s) - conj(H^V(conj(-s))) on the imaginary axis from a
/// small pencil eigenproblem, polished by Newton steps on Im H^V.
std::vector<double> reduced_real_crossings(const ReducedSystem& red, double omega_max);

enum class Termination { proceed, converged, iteration_cap };

Termination check_termination(double r_k, double r_prev, int k, const SolverConfig& cfg);

/// 10 * ||A||_1 unless the config pins it.
double resolve_omega_max(const StateSpaceSystem& sys, const std::optional<double>& omega_max);

/// Subspace iteration for the structured real stability radius.
RadiusResult compute_radius(const StateSpaceSystem& sys, const SolverConfig& cfg = {});

/// Everything compute_radius built, for inspection by tests and the CLI.
struct SolverTrace {
    RadiusResult result;
    SubspaceBasis basis;
};

SolverTrace compute_radius_traced(const StateSpaceSystem& sys, const SolverConfig& cfg = {});

} // namespace rstab
