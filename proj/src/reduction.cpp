#include "rstab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rstab/errors.hpp"

namespace rstab {

namespace {

constexpr double kDegenerate = 1e-12;
constexpr double kSecondDiffStep = 1e-4;

// |a - b| / |a|, falling back to the absolute difference when a = 0.
double rel(double a, double b)
{
    const double d = std::abs(a - b);
    return a != 0.0 ? d / std::abs(a) : d;
}

double rel(const ComplexMatrix& a, const ComplexMatrix& b)
{
    const double d = (a - b).norm();
    const double s = a.norm();
    return s > 0.0 ? d / s : d;
}

// Relative mismatch of two derivative values. At a maximizer of mu the first
// derivative vanishes, so the scale is floored by mu itself.
double rel_scaled(double a, double b, double floor)
{
    const double s = std::max(std::abs(a), std::abs(floor));
    const double d = std::abs(a - b);
    return s > 0.0 ? d / s : d;
}

} // namespace

bool SubspaceBasis::contains_point(double omega, double tol) const
{
    return std::any_of(interpolation_points.begin(), interpolation_points.end(),
                       [&](double w) { return std::abs(w - omega) <= tol; });
}

ComplexMatrix expansion_block(const StateSpaceSystem& sys, double omega)
{
    const auto lu = factor_shift(sys, omega);
    const auto m = sys.m();
    ComplexMatrix out(sys.n(), 3 * m);
    out.leftCols(m) = lu.solve(sys.B().cast<Complex>());
    out.middleCols(m, m) = lu.solve(out.leftCols(m));
    out.rightCols(m) = lu.solve(out.middleCols(m, m));
    return out;
}

SubspaceBasis empty_basis(Eigen::Index n, double rank_tol)
{
    SubspaceBasis b;
    b.V.resize(n, 0);
    b.rank_tol = rank_tol;
    return b;
}

SubspaceBasis extend_orthonormal(SubspaceBasis basis, const ComplexMatrix& block, double omega)
{
    const auto n = block.rows();
    if (basis.V.rows() != n && !(basis.V.rows() == 0 && basis.V.cols() == 0)) {
        throw DimensionError("expansion block has " + std::to_string(n) + " rows, basis has "
                             + std::to_string(basis.V.rows()));
    }
    const auto r0 = basis.V.cols();
    const double col_max = block.colwise().norm().maxCoeff();
    const double drop = basis.rank_tol * col_max;

    ComplexMatrix V(n, r0 + block.cols());
    V.leftCols(r0) = basis.V;
    Eigen::Index r = r0;
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
        Eigen::VectorXcd w = block.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            if (r > 0) {
                w -= V.leftCols(r) * (V.leftCols(r).adjoint() * w);
            }
        }
        const double nrm = w.norm();
        if (!(nrm > drop)) {
            continue;
        }
        V.col(r++) = w / nrm;
    }

    basis.V = V.leftCols(r);
    basis.interpolation_points.push_back(omega);
    basis.last_dropped = block.cols() - (r - r0);
    ++basis.generation;
    return basis;
}

ReducedSystem project(const StateSpaceSystem& sys, const SubspaceBasis& basis)
{
    if (basis.empty()) {
        throw ContractError("cannot project onto an empty basis");
    }
    const ComplexMatrix& V = basis.V;
    ReducedSystem red;
    red.A_V = V.adjoint() * sys.apply_A(V);
    red.B_V = V.adjoint() * sys.B().cast<Complex>();
    red.C_V = sys.C().cast<Complex>() * V;
    red.interpolation_points = basis.interpolation_points;
    red.generation = basis.generation;
    red.A_norm1 = red.A_V.cwiseAbs().colwise().sum().maxCoeff();
    return red;
}

TransferSample eval_reduced_transfer(const ReducedSystem& red, double omega, int order)
{
    if (order < 1 || order > 3) {
        throw ParameterError("transfer order must be 1, 2 or 3");
    }
    ComplexMatrix M = -red.A_V;
    M.diagonal().array() += Complex(0.0, omega);
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    // rcond * ||M||_1 estimates the smallest singular value up to a modest factor
    const double m_norm = M.cwiseAbs().colwise().sum().maxCoeff();
    const double smin = lu.rcond() * m_norm;
    if (!(smin > kDegenerate * red.A_norm1)) {
        std::ostringstream os;
        os << "reduced resolvent is numerically singular at w = " << omega;
        throw DegenerateReductionError(os.str());
    }

    TransferSample out;
    out.omega = omega;
    ComplexMatrix X = lu.solve(red.B_V);
    out.H0 = red.C_V * X;
    if (order >= 2) {
        X = lu.solve(X);
        out.H1 = Complex(0.0, -1.0) * (red.C_V * X);
    }
    if (order >= 3) {
        X = lu.solve(X);
        out.H2 = -2.0 * (red.C_V * X);
    }
    return out;
}

InterpolationDiagnostics verify_interpolation(const StateSpaceSystem& sys,
                                              const ReducedSystem& red, double omega,
                                              const MuOptions& opt)
{
    const double tol = 1e-14 * std::max(1.0, std::abs(omega));
    const bool absorbed = std::any_of(red.interpolation_points.begin(),
                                      red.interpolation_points.end(),
                                      [&](double w) { return std::abs(w - omega) <= tol; });
    if (!absorbed) {
        std::ostringstream os;
        os << "w = " << omega << " is not an interpolation point of this reduction";
        throw ContractError(os.str());
    }

    InterpolationDiagnostics d;
    d.omega = omega;
    const auto full = eval_transfer(sys, omega, 3);
    const auto reduced = eval_reduced_transfer(red, omega, 3);
    d.H0_residual = rel(full.H0, reduced.H0);
    d.H1_residual = rel(*full.H1, *reduced.H1);
    d.H2_residual = rel(*full.H2, *reduced.H2);

    const auto ev_full = mu_of(full, opt);
    const auto ev_red = mu_of(reduced, opt);
    d.mu_full = ev_full.mu;
    d.mu_reduced = ev_red.mu;
    d.mu_error = rel(ev_full.mu, ev_red.mu);
    d.gamma_error = std::abs(ev_full.gamma_star - ev_red.gamma_star);
    d.mu_case = ev_full.mu_case;

    try {
        const double a = mu_derivative(full, ev_full, opt);
        const double b = mu_derivative(reduced, ev_red, opt);
        d.dmu_full = a;
        d.dmu_error = rel_scaled(a, b, ev_full.mu);
    } catch (const NonsmoothPointError&) {
        // mu is not differentiable here; leave the derivative fields empty
    }

    const double h = kSecondDiffStep * std::max(1.0, std::abs(omega));
    auto second_diff = [&](auto&& mu_at) {
        return (mu_at(omega + h) - 2.0 * mu_at(omega) + mu_at(omega - h)) / (h * h);
    };
    d.d2mu_full = second_diff([&](double w) { return mu_of(eval_transfer(sys, w), opt).mu; });
    const double d2_red =
        second_diff([&](double w) { return mu_of(eval_reduced_transfer(red, w), opt).mu; });
    d.d2mu_error = rel_scaled(d.d2mu_full, d2_red, ev_full.mu);
    return d;
}

} // namespace rstab
