#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rstab/solver.hpp"
#include "rstab/system.hpp"

namespace rstab {

struct OracleConfig {
    int omega_grid_points = 10000;
    std::optional<double> omega_max;
    /// Uniform gamma grid that seeds the accurate inner search.
    int gamma_grid_points = 2000;
    /// Golden-section steps in w around the best sweep bracket.
    int refine_iters = 60;
    /// Coarser gamma grid used during the w sweep only.
    int sweep_gamma_points = 32;
    double gamma_floor = 1e-8;
    /// Lift the n <= 500 guard.
    bool force = false;

    void validate() const;
};

/// Brute-force radius: sweep mu(H(iw)) over a uniform w grid on the full
/// system, refine the best brackets, return the reciprocal of the maximum.
/// Single-input single-output systems take the maximum of |H| over w = 0 and
/// the real crossings instead, where mu is supported.
/// Shares no evaluation path with the subspace solver: the transfer function
/// comes from a Hessenberg reduction of A and the inner minimization is its
/// own grid-seeded search.
RadiusResult dense_radius(const StateSpaceSystem& sys, const OracleConfig& cfg = {});

/// Frequency response evaluator used by the oracle: A = Q H Q^T once, then an
/// O(n^2) Hessenberg solve per frequency.
class HessenbergResponse {
public:
    explicit HessenbergResponse(const StateSpaceSystem& sys);
    ComplexMatrix operator()(double omega) const;

private:
    DenseMatrix H_;
    ComplexMatrix QtB_;
    ComplexMatrix CQ_;
};

/// Grid-seeded golden-section value of inf_gamma sigma_2(T(gamma)) on [floor, 1].
struct GridMu {
    double mu;
    double gamma;
};
GridMu grid_seeded_mu(const ComplexMatrix& H, int gamma_points, double gamma_floor,
                      double golden_tol);

/// Frequencies w > 0 at which a single-input single-output response H(iw) is
/// real, from the zeros of (-A^2, b, c) polished by bisection on Im H.
std::vector<double> real_crossings(const StateSpaceSystem& sys);

/// Spectral abscissa of A + B * Delta * C.
double perturbed_abscissa(const StateSpaceSystem& sys, const DenseMatrix& Delta);

struct ProbeReport {
    int trials = 0;
    int violations = 0;
    double delta_norm = 0.0;
    /// Largest spectral abscissa seen over all trials.
    double worst_abscissa = 0.0;
};

/// Random real m x p perturbations of spectral norm shrink * radius; counts
/// those that make A + B Delta C lose Hurwitz stability.
ProbeReport stability_probe(const StateSpaceSystem& sys, double radius, int trials, double shrink,
                            std::uint64_t seed = 1, bool force = false);

} // namespace rstab
