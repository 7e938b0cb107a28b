#include "rstab/generators.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "rstab/errors.hpp"
#include "gaussian.hpp"

namespace rstab {

using detail::Gaussian;

namespace {

void io_matrices(const ProblemParams& prm, Eigen::Index n, Gaussian& g, DenseMatrix& B,
                 DenseMatrix& C)
{
    if (prm.unit_io) {
        B = DenseMatrix::Zero(n, prm.m);
        C = DenseMatrix::Zero(prm.p, n);
        for (int j = 0; j < prm.m; ++j) {
            B((j * n) / prm.m + n / (2 * prm.m), j) = 1.0;
        }
        for (int i = 0; i < prm.p; ++i) {
            C(i, (i * n) / prm.p + n / (2 * prm.p)) = 1.0;
        }
        return;
    }
    B = g.matrix(n, prm.m);
    C = g.matrix(prm.p, n);
}

// Central-difference convection-diffusion stencil on (0,1) with Dirichlet
// ends: u'' - c u'. Off-diagonals stay positive while the cell Peclet number
// c h / 2 is below one, which keeps the spectrum real and negative.
std::vector<double> stencil_1d(int N, double c)
{
    const double h = 1.0 / (N + 1);
    const double d = 1.0 / (h * h);
    const double a = c / (2.0 * h);
    return {d + a, -2.0 * d, d - a};
}

} // namespace

ProblemKind parse_problem_kind(std::string_view name)
{
    if (name == "random_stable") {
        return ProblemKind::random_stable;
    }
    if (name == "convection_diffusion_1d") {
        return ProblemKind::convection_diffusion_1d;
    }
    if (name == "convection_diffusion_2d") {
        return ProblemKind::convection_diffusion_2d;
    }
    throw ParameterError("unknown problem kind '" + std::string(name) + "'");
}

std::string_view to_string(ProblemKind kind)
{
    switch (kind) {
    case ProblemKind::random_stable:
        return "random_stable";
    case ProblemKind::convection_diffusion_1d:
        return "convection_diffusion_1d";
    case ProblemKind::convection_diffusion_2d:
        return "convection_diffusion_2d";
    }
    return "unknown";
}

DenseMatrix shift_to_stable(const DenseMatrix& R, double margin)
{
    if (!(margin > 0.0)) {
        throw ParameterError("stability margin must be positive");
    }
    DenseMatrix A = R;
    A.diagonal().array() -= spectral_abscissa(R) + margin;
    return A;
}

StateSpaceSystem generate_problem(ProblemKind kind, const ProblemParams& prm)
{
    if (prm.size < 1 || prm.m < 1 || prm.p < 1) {
        throw ParameterError("size, m and p must be positive");
    }
    if (!(prm.margin > 0.0)) {
        throw ParameterError("stability margin must be positive");
    }
    if (!(prm.skew >= 0.0 && prm.skew <= 1.0)) {
        throw ParameterError("skew must lie in [0, 1]");
    }
    Gaussian g(prm.seed);

    if (kind == ProblemKind::random_stable) {
        const Eigen::Index n = prm.size;
        DenseMatrix R = g.matrix(n, n, 1.0 / std::sqrt(static_cast<double>(n)));
        if (prm.skew != 0.0) {
            const DenseMatrix sym = 0.5 * (R + R.transpose());
            R -= prm.skew * sym;
        }
        DenseMatrix A = shift_to_stable(R, prm.margin);
        DenseMatrix B, C;
        io_matrices(prm, n, g, B, C);
        return StateSpaceSystem(std::move(A), std::move(B), std::move(C));
    }

    const int N = prm.size;
    const auto st = stencil_1d(N, prm.convection);
    if (st[2] <= 0.0) {
        throw ParameterError("convection too strong for the grid (cell Peclet number >= 1)");
    }
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::Index n = 0;
    if (kind == ProblemKind::convection_diffusion_1d) {
        n = N;
        for (int i = 0; i < N; ++i) {
            if (i > 0) {
                trip.emplace_back(i, i - 1, st[0]);
            }
            trip.emplace_back(i, i, st[1]);
            if (i + 1 < N) {
                trip.emplace_back(i, i + 1, st[2]);
            }
        }
    } else {
        // Kronecker sum T (x) I + I (x) T on an N x N grid, x fastest.
        n = static_cast<Eigen::Index>(N) * N;
        auto idx = [N](int ix, int iy) { return static_cast<Eigen::Index>(iy) * N + ix; };
        for (int iy = 0; iy < N; ++iy) {
            for (int ix = 0; ix < N; ++ix) {
                const auto r = idx(ix, iy);
                trip.emplace_back(r, r, 2.0 * st[1]);
                if (ix > 0) {
                    trip.emplace_back(r, idx(ix - 1, iy), st[0]);
                }
                if (ix + 1 < N) {
                    trip.emplace_back(r, idx(ix + 1, iy), st[2]);
                }
                if (iy > 0) {
                    trip.emplace_back(r, idx(ix, iy - 1), st[0]);
                }
                if (iy + 1 < N) {
                    trip.emplace_back(r, idx(ix, iy + 1), st[2]);
                }
            }
        }
    }
    SparseMatrix A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    DenseMatrix B, C;
    io_matrices(prm, n, g, B, C);
    return StateSpaceSystem(std::move(A), std::move(B), std::move(C));
}

} // namespace rstab
