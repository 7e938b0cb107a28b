#include "rstab/mu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rstab/golden.hpp"

namespace rstab {

namespace {

constexpr double kRealTol = 1e-14;
constexpr double kRankTol = 1e-12;
constexpr double kLimitNoise = 64.0;

double largest_singular_value(const DenseMatrix& M)
{
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<DenseMatrix> svd(M);
    return svd.singularValues()(0);
}

void fill_triplet(MuEvaluation& ev, const DenseMatrix& T)
{
    const auto top = sigma_top3(T);
    ev.sigma = top.sigma;
    ev.u2 = top.u2;
    ev.v2 = top.v2;
    ev.gap12 = top.sigma(0) - top.sigma(1);
    ev.gap23 = top.sigma(1) - top.sigma(2);
}

} // namespace

RealifiedBlock assemble_T(const ComplexMatrix& H, double gamma, double gamma_floor)
{
    if (!(gamma >= gamma_floor && gamma <= 1.0)) {
        std::ostringstream os;
        os << "gamma = " << gamma << " outside [" << gamma_floor << ", 1]";
        throw DomainError(os.str());
    }
    return {gamma, realify(H, gamma)};
}

double sigma2(const DenseMatrix& T)
{
    Eigen::JacobiSVD<DenseMatrix> svd(T);
    const auto& s = svd.singularValues();
    return s.size() >= 2 ? s(1) : 0.0;
}

std::string_view to_string(MuCase c)
{
    switch (c) {
    case MuCase::interior:
        return "interior";
    case MuCase::real_part_only:
        return "real_part_only";
    case MuCase::gamma_one:
        return "gamma_one";
    case MuCase::gamma_limit:
        return "gamma_limit";
    }
    return "unknown";
}

Eigen::Index imaginary_rank(const ComplexMatrix& H)
{
    const DenseMatrix im = H.imag();
    Eigen::JacobiSVD<DenseMatrix> svd(im);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    return (s.array() > kRankTol * s(0)).count();
}

double rank_one_limit(const ComplexMatrix& H)
{
    const DenseMatrix re = H.real();
    const DenseMatrix im = H.imag();
    Eigen::JacobiSVD<DenseMatrix> svd(im, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto p = im.rows();
    const auto m = im.cols();
    // complements of the leading singular direction; empty for p = 1 or m = 1
    const DenseMatrix U2 = svd.matrixU().rightCols(p - 1);
    const DenseMatrix V2 = svd.matrixV().rightCols(m - 1);
    const double left = p > 1 ? largest_singular_value(U2.transpose() * re) : 0.0;
    const double right = m > 1 ? largest_singular_value(re * V2) : 0.0;
    return std::max(left, right);
}

MuEvaluation mu_of(const TransferSample& H, const MuOptions& opt)
{
    const ComplexMatrix& M = H.H0;
    MuEvaluation ev;
    ev.omega = H.omega;

    const double scale = M.norm();
    if (M.imag().cwiseAbs().maxCoeff() <= kRealTol * scale) {
        const DenseMatrix T = realify(M, 1.0);
        fill_triplet(ev, T);
        ev.mu = largest_singular_value(M.real());
        ev.gamma_star = 1.0;
        ev.mu_case = MuCase::real_part_only;
        return ev;
    }

    auto f = [&](double g) { return sigma2(realify(M, g)); };
    auto best = golden_section_minimize(f, opt.gamma_floor, 1.0, opt.golden_tol);
    ev.inner_evaluations = best.evaluations;

    double gamma = best.x;
    double value = best.fx;
    MuCase tag = MuCase::interior;
    // the search never probes the endpoint itself
    const double at_one = f(1.0);
    ++ev.inner_evaluations;
    if (at_one <= value || 1.0 - gamma <= opt.golden_tol) {
        gamma = 1.0;
        value = std::min(value, at_one);
        tag = MuCase::gamma_one;
    }

    if (imaginary_rank(M) == 1) {
        // near the floor sigma_2 is only known to eps * sigma_1(T), which
        // grows like 1/gamma; values inside that band count as the limit
        const double limit = rank_one_limit(M);
        const double noise = kLimitNoise * std::numeric_limits<double>::epsilon()
                             * largest_singular_value(realify(M, best.x));
        if (limit < value + noise) {
            gamma = opt.gamma_floor;
            value = limit;
            tag = MuCase::gamma_limit;
        }
    }

    fill_triplet(ev, realify(M, gamma));
    ev.gamma_star = gamma;
    ev.mu = tag == MuCase::gamma_limit ? value : ev.sigma(1);
    ev.mu_case = tag;
    return ev;
}

double mu_derivative(const TransferSample& H, const MuEvaluation& ev, const MuOptions& opt)
{
    if (ev.mu_case == MuCase::real_part_only) {
        if (ev.omega == 0.0) {
            return 0.0;
        }
        throw NonsmoothPointError("real transfer value away from w = 0: mu is not smooth here");
    }
    if (ev.mu_case == MuCase::gamma_limit) {
        throw NonsmoothPointError("inner infimum is the gamma -> 0 limit: no smooth branch");
    }
    if (!H.H1) {
        throw ContractError("mu_derivative needs the first transfer derivative (order >= 2)");
    }
    const double tol = opt.gap_tol * ev.sigma(0);
    if (std::min(ev.gap12, ev.gap23) < tol) {
        std::ostringstream os;
        os << "sigma_2 is not simple at w = " << ev.omega << " (gaps " << ev.gap12 << ", "
           << ev.gap23 << ")";
        throw NonsmoothPointError(os.str());
    }
    const DenseMatrix dT = realify(*H.H1, ev.gamma_star);
    return ev.u2.dot(dT * ev.v2);
}

} // namespace rstab
