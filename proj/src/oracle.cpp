#include "rstab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gaussian.hpp"
#include "rstab/errors.hpp"
#include "rstab/golden.hpp"
#include "rstab/mu.hpp"

namespace rstab {

namespace {

constexpr Eigen::Index kOracleMaxN = 500;
constexpr double kSweepGammaTol = 1e-7;
constexpr double kRefineGammaTol = 1e-10;
constexpr double kCandidateFraction = 0.99;
constexpr std::size_t kMaxCandidates = 4;
// pencil eigenvalues with |beta| below this (relative) are infinite
constexpr double kZeroBeta = 1e-13;
// relative imaginary part below which a pencil eigenvalue counts as real
constexpr double kRealLambda = 1e-6;

void guard_size(const StateSpaceSystem& sys, bool force)
{
    if (sys.n() > kOracleMaxN && !force) {
        throw SizeGuardError("dense oracle limited to n <= 500 (n = " + std::to_string(sys.n())
                             + "); pass --force to override");
    }
}

double sigma_2(const ComplexMatrix& H, double gamma)
{
    Eigen::JacobiSVD<DenseMatrix> svd(realify(H, gamma));
    return svd.singularValues()(1);
}

} // namespace

void OracleConfig::validate() const
{
    if (omega_grid_points < 2 || gamma_grid_points < 2 || refine_iters < 2
        || sweep_gamma_points < 2 || !(gamma_floor > 0.0 && gamma_floor < 1.0)) {
        throw ParameterError("oracle grid sizes must be at least 2");
    }
}

HessenbergResponse::HessenbergResponse(const StateSpaceSystem& sys)
{
    Eigen::HessenbergDecomposition<DenseMatrix> hd(sys.A_dense());
    H_ = hd.matrixH();
    const DenseMatrix Q = hd.matrixQ();
    QtB_ = (Q.transpose() * sys.B()).cast<Complex>();
    CQ_ = (sys.C() * Q).cast<Complex>();
}

ComplexMatrix HessenbergResponse::operator()(double omega) const
{
    const auto n = H_.rows();
    ComplexMatrix M = -H_.cast<Complex>();
    M.diagonal().array() += Complex(0.0, omega);
    ComplexMatrix X = QtB_;

    // elimination with adjacent-row partial pivoting keeps the Hessenberg shape
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
            M.row(k).segment(k, n - k).swap(M.row(k + 1).segment(k, n - k));
            X.row(k).swap(X.row(k + 1));
        }
        if (M(k, k) == Complex(0.0)) {
            throw SingularShiftError("Hessenberg solve hit a zero pivot");
        }
        const Complex l = M(k + 1, k) / M(k, k);
        if (l != Complex(0.0)) {
            M.row(k + 1).segment(k, n - k) -= l * M.row(k).segment(k, n - k);
            X.row(k + 1) -= l * X.row(k);
        }
    }
    if (M(n - 1, n - 1) == Complex(0.0)) {
        throw SingularShiftError("Hessenberg solve hit a zero pivot");
    }
    M.triangularView<Eigen::Upper>().solveInPlace(X);
    return CQ_ * X;
}

GridMu grid_seeded_mu(const ComplexMatrix& H, int gamma_points, double gamma_floor,
                      double golden_tol)
{
    auto g_at = [&](int i) {
        return gamma_floor + (1.0 - gamma_floor) * static_cast<double>(i) / (gamma_points - 1);
    };
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < gamma_points; ++i) {
        const double v = sigma_2(H, g_at(i));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = g_at(std::max(best - 1, 0));
    const double hi = g_at(std::min(best + 1, gamma_points - 1));
    const auto r =
        golden_section_minimize([&](double g) { return sigma_2(H, g); }, lo, hi, golden_tol);
    if (r.fx < best_val) {
        return {r.fx, r.x};
    }
    return {best_val, g_at(best)};
}

std::vector<double> real_crossings(const StateSpaceSystem& sys)
{
    if (sys.m() != 1 || sys.p() != 1) {
        throw DimensionError("real crossings need a single-input single-output system");
    }
    const auto n = sys.n();
    const DenseMatrix A = sys.A_dense();
    // Im H(iw) = -w c (w^2 I + A^2)^{-1} b: its roots are the zeros lambda = w^2
    // of (-A^2, b, c), the finite eigenvalues of the Rosenbrock pencil.
    DenseMatrix M = DenseMatrix::Zero(n + 1, n + 1);
    M.topLeftCorner(n, n) = A * A;
    M.topRightCorner(n, 1) = sys.B();
    M.bottomLeftCorner(1, n) = sys.C();
    DenseMatrix N = DenseMatrix::Zero(n + 1, n + 1);
    N.topLeftCorner(n, n).setIdentity();
    Eigen::GeneralizedEigenSolver<DenseMatrix> qz(M, N, false);
    if (qz.info() != Eigen::Success) {
        throw Error("generalized eigenvalue problem failed");
    }
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    const HessenbergResponse response(sys);
    auto im = [&](double w) { return response(w)(0, 0).imag(); };

    std::vector<double> out;
    for (Eigen::Index i = 0; i <= n; ++i) {
        const Complex alpha = qz.alphas()(i);
        const double beta = qz.betas()(i);
        if (std::abs(beta) <= kZeroBeta * scale || std::abs(alpha) == 0.0) {
            continue;
        }
        const Complex lambda = -alpha / beta;
        if (std::abs(lambda.imag()) > kRealLambda * std::abs(lambda) || lambda.real() <= 0.0) {
            continue;
        }
        // polish: widen a bracket around sqrt(lambda) until Im H changes sign, then bisect
        const double w0 = std::sqrt(lambda.real());
        double lo = w0, hi = w0;
        bool bracketed = false;
        for (double width = 1e-10 * w0; width <= 1e-2 * w0; width *= 4.0) {
            lo = std::max(w0 - width, 0.5 * w0);
            hi = w0 + width;
            if ((im(lo) > 0.0) != (im(hi) > 0.0)) {
                bracketed = true;
                break;
            }
        }
        if (!bracketed) {
            continue; // double root or numerical artefact
        }
        double ylo = im(lo);
        for (int it = 0; it < 200 && hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * hi;
             ++it) {
            const double mid = 0.5 * (lo + hi);
            const double y = im(mid);
            if (y == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((y > 0.0) == (ylo > 0.0)) {
                lo = mid;
                ylo = y;
            } else {
                hi = mid;
            }
        }
        out.push_back(0.5 * (lo + hi));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

// Single-input single-output systems: mu vanishes off the real crossings of H,
// so the supremum is taken over w = 0 and those crossings.
RadiusResult crossing_radius(const StateSpaceSystem& sys)
{
    const HessenbergResponse response(sys);
    double best_w = 0.0;
    double best_mu = std::abs(response(0.0)(0, 0).real());
    for (double w : real_crossings(sys)) {
        const double mu = std::abs(response(w)(0, 0).real());
        if (mu > best_mu) {
            best_mu = mu;
            best_w = w;
        }
    }
    RadiusResult res;
    res.mu_star = best_mu;
    res.radius = best_mu > 0.0 ? 1.0 / best_mu : std::numeric_limits<double>::infinity();
    res.omega_star = best_w;
    res.gamma_star = 1.0;
    res.converged = true;
    IterationRecord rec;
    rec.omega_next = best_w;
    rec.mu_k = best_mu;
    rec.r_k = res.radius;
    rec.basis_dim = sys.n();
    rec.mu_case = MuCase::real_part_only;
    res.history.push_back(rec);
    return res;
}

} // namespace

RadiusResult dense_radius(const StateSpaceSystem& sys, const OracleConfig& cfg)
{
    cfg.validate();
    guard_size(sys, cfg.force);
    if (sys.m() == 1 && sys.p() == 1) {
        return crossing_radius(sys);
    }
    const double omega_max = resolve_omega_max(sys, cfg.omega_max);
    const HessenbergResponse response(sys);

    const int N = cfg.omega_grid_points;
    std::vector<double> grid(N);
    std::vector<ComplexMatrix> H(N);
    // the gamma-grid minimum bounds mu from above
    std::vector<double> mu(N);
    for (int i = 0; i < N; ++i) {
        grid[i] = omega_max * static_cast<double>(i) / (N - 1);
        H[i] = response(grid[i]);
        double u = std::numeric_limits<double>::infinity();
        for (int j = 0; j < cfg.sweep_gamma_points; ++j) {
            const double g = cfg.gamma_floor
                             + (1.0 - cfg.gamma_floor) * j / (cfg.sweep_gamma_points - 1);
            u = std::min(u, sigma_2(H[i], g));
        }
        mu[i] = u;
    }
    // Refine in decreasing order of the bound. Once a bound falls below the
    // candidate threshold of the best refined value, no later point can
    // become a candidate and its bound stands in for mu.
    std::vector<int> order(N);
    for (int i = 0; i < N; ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mu[a] > mu[b]; });
    double top = 0.0;
    for (int i : order) {
        if (mu[i] < kCandidateFraction * top) {
            break;
        }
        mu[i] = grid_seeded_mu(H[i], cfg.sweep_gamma_points, cfg.gamma_floor, kSweepGammaTol).mu;
        top = std::max(top, mu[i]);
    }
    H.clear();

    std::vector<int> cand;
    for (int i = 0; i < N; ++i) {
        const bool left = i == 0 || mu[i] >= mu[i - 1];
        const bool right = i + 1 == N || mu[i] >= mu[i + 1];
        if (left && right && mu[i] >= kCandidateFraction * top) {
            cand.push_back(i);
        }
    }
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) { return mu[a] > mu[b]; });
    if (cand.size() > kMaxCandidates) {
        cand.resize(kMaxCandidates);
    }

    auto refined = [&](double w) {
        return grid_seeded_mu(response(w), cfg.sweep_gamma_points, cfg.gamma_floor,
                              kRefineGammaTol);
    };

    double best_w = grid[cand.front()];
    double best_mu = mu[cand.front()];
    for (int i : cand) {
        const double lo = grid[std::max(i - 1, 0)];
        const double hi = grid[std::min(i + 1, N - 1)];
        // refine_iters golden steps shrink the bracket by 0.618^refine_iters
        const double tol = (hi - lo) * std::pow(0.6180339887498949, cfg.refine_iters);
        const auto r = golden_section_maximize([&](double w) { return refined(w).mu; }, lo, hi,
                                               std::max(tol, 1e-15 * std::max(1.0, hi)));
        const double at_grid = refined(grid[i]).mu;
        const double w = at_grid > r.fx ? grid[i] : r.x;
        const double v = std::max(at_grid, r.fx);
        if (v > best_mu) {
            best_mu = v;
            best_w = w;
        }
    }
    // final value with the fine gamma grid
    const GridMu best = grid_seeded_mu(response(best_w), cfg.gamma_grid_points, cfg.gamma_floor,
                                       kRefineGammaTol);

    RadiusResult res;
    res.mu_star = best.mu;
    res.radius = best.mu > 0.0 ? 1.0 / best.mu : std::numeric_limits<double>::infinity();
    res.omega_star = best_w;
    res.gamma_star = best.gamma;
    res.converged = true;
    IterationRecord rec;
    rec.k = 0;
    rec.omega_next = best_w;
    rec.gamma_at_opt = best.gamma;
    rec.mu_k = best.mu;
    rec.r_k = res.radius;
    rec.basis_dim = sys.n();
    res.history.push_back(rec);
    return res;
}

double perturbed_abscissa(const StateSpaceSystem& sys, const DenseMatrix& Delta)
{
    if (Delta.rows() != sys.m() || Delta.cols() != sys.p()) {
        throw DimensionError("perturbation must be m x p");
    }
    const DenseMatrix A = sys.A_dense() + sys.B() * Delta * sys.C();
    return spectral_abscissa(A);
}

ProbeReport stability_probe(const StateSpaceSystem& sys, double radius, int trials, double shrink,
                            std::uint64_t seed, bool force)
{
    guard_size(sys, force);
    if (!(radius > 0.0) || !(shrink > 0.0) || trials < 0) {
        throw ParameterError("probe needs radius > 0, shrink > 0 and trials >= 0");
    }
    detail::Gaussian g(seed);
    const DenseMatrix A = sys.A_dense();
    const DenseMatrix& B = sys.B();
    const DenseMatrix& C = sys.C();

    ProbeReport rep;
    rep.trials = trials;
    rep.delta_norm = shrink * radius;
    rep.worst_abscissa = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        DenseMatrix D = g.matrix(sys.m(), sys.p());
        Eigen::JacobiSVD<DenseMatrix> svd(D);
        const double s1 = svd.singularValues()(0);
        if (!(s1 > 0.0)) {
            continue;
        }
        D *= rep.delta_norm / s1;
        const double alpha = spectral_abscissa(A + B * D * C);
        rep.worst_abscissa = std::max(rep.worst_abscissa, alpha);
        if (alpha >= 0.0) {
            ++rep.violations;
        }
    }
    return rep;
}

} // namespace rstab
