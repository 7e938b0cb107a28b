#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "rstab/errors.hpp"
#include "rstab/system.hpp"

namespace rstab {

/// Lower end of the inner search interval [Gamma, 1].
inline constexpr double kGammaFloor = 1e-8;

/// Real 2p x 2m embedding [Re H, -g Im H; (1/g) Im H, Re H] of a complex p x m
/// matrix. Works on any complex Eigen expression; the result has the
/// underlying real scalar type.
template <typename Derived>
Eigen::Matrix<typename Derived::RealScalar, Eigen::Dynamic, Eigen::Dynamic>
realify(const Eigen::MatrixBase<Derived>& H, typename Derived::RealScalar gamma)
{
    using Real = typename Derived::RealScalar;
    const auto p = H.rows();
    const auto m = H.cols();
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> T(2 * p, 2 * m);
    const auto re = H.real();
    const auto im = H.imag();
    T.topLeftCorner(p, m) = re;
    T.bottomRightCorner(p, m) = re;
    T.topRightCorner(p, m) = -gamma * im;
    T.bottomLeftCorner(p, m) = im / gamma;
    return T;
}

struct RealifiedBlock {
    double gamma = 1.0;
    DenseMatrix matrix;
};

/// realify() with the domain check gamma in [gamma_floor, 1].
RealifiedBlock assemble_T(const ComplexMatrix& H, double gamma, double gamma_floor = kGammaFloor);

struct SigmaTop3 {
    Eigen::Vector3d sigma = Eigen::Vector3d::Zero();
    Eigen::VectorXd u2;
    Eigen::VectorXd v2;
};

/// Three largest singular values of a real matrix (missing ones are 0) and a
/// singular pair for the second.
template <typename Derived>
SigmaTop3 sigma_top3(const Eigen::MatrixBase<Derived>& T)
{
    Eigen::JacobiSVD<DenseMatrix> svd(T.derived().template cast<double>(),
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        throw Error("singular value decomposition failed");
    }
    const auto& s = svd.singularValues();
    SigmaTop3 out;
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, s.size()); ++i) {
        out.sigma(i) = s(i);
    }
    if (s.size() >= 2) {
        out.u2 = svd.matrixU().col(1);
        out.v2 = svd.matrixV().col(1);
    }
    return out;
}

inline SigmaTop3 sigma_top3(const RealifiedBlock& block)
{
    return sigma_top3(block.matrix);
}

/// Second largest singular value only.
double sigma2(const DenseMatrix& T);

enum class MuCase { interior, real_part_only, gamma_one, gamma_limit };

std::string_view to_string(MuCase c);

struct MuOptions {
    double gamma_floor = kGammaFloor;
    double golden_tol = 1e-9;
    /// Relative (to sigma_1) spectral gap below which sigma_2 counts as multiple.
    double gap_tol = 1e-8;
};

struct MuEvaluation {
    double omega = 0.0;
    double mu = 0.0;
    double gamma_star = 1.0;
    Eigen::Vector3d sigma = Eigen::Vector3d::Zero();
    Eigen::VectorXd u2;
    Eigen::VectorXd v2;
    double gap12 = 0.0;
    double gap23 = 0.0;
    MuCase mu_case = MuCase::interior;
    int inner_evaluations = 0;
};

/// mu(H(iw)) = inf over gamma of sigma_2(T(w, gamma)), with the closed forms
/// for a real H and for a rank-one imaginary part.
MuEvaluation mu_of(const TransferSample& H, const MuOptions& opt = {});

/// Closed-form limit of sigma_2(T(gamma)) as gamma -> 0 for rank(Im H) = 1.
double rank_one_limit(const ComplexMatrix& H);

/// Numerical rank of Im H with the 1e-12 relative cutoff.
Eigen::Index imaginary_rank(const ComplexMatrix& H);

/// d mu / d w = u2^T dT/dw(w, gamma*) v2. Needs H.H1 and a simple sigma_2;
/// throws NonsmoothPointError otherwise. Returns 0 for a real H at w = 0,
/// where mu is even.
double mu_derivative(const TransferSample& H, const MuEvaluation& ev, const MuOptions& opt = {});

} // namespace rstab
