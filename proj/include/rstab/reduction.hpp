#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rstab/mu.hpp"
#include "rstab/system.hpp"

namespace rstab {

/// Orthonormal complex basis V of the interpolation subspace together with the
/// frequencies whose resolvent blocks were absorbed into it.
struct SubspaceBasis {
    ComplexMatrix V;
    std::vector<double> interpolation_points;
    double rank_tol = 1e-12;
    /// Bumped on every extension; identifies the projection a basis produced.
    std::uint64_t generation = 0;
    /// Columns dropped by the most recent extension.
    Eigen::Index last_dropped = 0;

    Eigen::Index dim() const { return V.cols(); }
    bool empty() const { return V.cols() == 0; }
    bool contains_point(double omega, double tol = 0.0) const;
};

/// [X1 X2 X3] with X1 = (iwI - A)^{-1} B and X_{k+1} = (iwI - A)^{-1} X_k, all
/// from one factorization.
ComplexMatrix expansion_block(const StateSpaceSystem& sys, double omega);

/// Orthonormalize `block` against `basis` (Gram-Schmidt applied twice) and
/// append the surviving directions. A column is dropped when its residual
/// norm is at most rank_tol times the largest column norm of the block.
SubspaceBasis extend_orthonormal(SubspaceBasis basis, const ComplexMatrix& block, double omega);

/// Empty basis for an n-dimensional state with the given truncation threshold.
SubspaceBasis empty_basis(Eigen::Index n, double rank_tol = 1e-12);

/// One-sided projection (V*AV, V*B, CV).
struct ReducedSystem {
    ComplexMatrix A_V;
    ComplexMatrix B_V;
    ComplexMatrix C_V;
    std::vector<double> interpolation_points;
    std::uint64_t generation = 0;
    double A_norm1 = 0.0;

    Eigen::Index r() const { return A_V.rows(); }
};

ReducedSystem project(const StateSpaceSystem& sys, const SubspaceBasis& basis);

/// H^V(iw) and its w-derivatives; throws DegenerateReductionError when the
/// reduced resolvent is numerically singular.
TransferSample eval_reduced_transfer(const ReducedSystem& red, double omega, int order = 1);

/// Full-versus-reduced agreement at one interpolation point. Every field is a
/// measurement; nothing is asserted here.
struct InterpolationDiagnostics {
    double omega = 0.0;
    double H0_residual = 0.0;
    double H1_residual = 0.0;
    double H2_residual = 0.0;
    double mu_full = 0.0;
    double mu_reduced = 0.0;
    double mu_error = 0.0;
    double gamma_error = 0.0;
    MuCase mu_case = MuCase::interior;
    /// Present only when sigma_2 is simple for both problems.
    std::optional<double> dmu_full;
    std::optional<double> dmu_error;
    /// Second central differences of mu, relative mismatch.
    double d2mu_full = 0.0;
    double d2mu_error = 0.0;
};

InterpolationDiagnostics verify_interpolation(const StateSpaceSystem& sys,
                                              const ReducedSystem& red, double omega,
                                              const MuOptions& opt = {});

} // namespace rstab
