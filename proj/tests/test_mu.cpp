#include <doctest.h>

#include <random>

#include "rstab/errors.hpp"
#include "rstab/generators.hpp"
#include "rstab/mu.hpp"

using namespace rstab;

namespace {

TransferSample sample(const ComplexMatrix& H)
{
    TransferSample s;
    s.H0 = H;
    return s;
}

double grid_min_sigma2(const ComplexMatrix& H, int points)
{
    double best = 1e300;
    for (int i = 0; i < points; ++i) {
        const double g = kGammaFloor + (1.0 - kGammaFloor) * i / (points - 1);
        best = std::min(best, sigma2(realify(H, g)));
    }
    return best;
}

double sigma1(const ComplexMatrix& H)
{
    return Eigen::JacobiSVD<ComplexMatrix>(H).singularValues()(0);
}

ComplexMatrix random_complex(std::mt19937_64& rng, int p, int m)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexMatrix H(p, m);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < m; ++j) {
            H(i, j) = Complex(u(rng), u(rng));
        }
    }
    return H;
}

} // namespace

TEST_CASE("assemble_T examples")
{
    ComplexMatrix H(1, 1);
    H(0, 0) = Complex(0.0, 1.0);
    const auto T = assemble_T(H, 0.5).matrix;
    CHECK(T(0, 0) == 0.0);
    CHECK(T(0, 1) == -0.5);
    CHECK(T(1, 0) == 2.0);
    CHECK(T(1, 1) == 0.0);

    H(0, 0) = Complex(0.5, -0.5);
    const auto T1 = assemble_T(H, 1.0).matrix;
    CHECK(T1(0, 1) == 0.5);
    CHECK(T1(1, 0) == -0.5);
    const auto s = sigma_top3(T1).sigma;
    CHECK(s(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(s(1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

    ComplexMatrix R = ComplexMatrix::Zero(2, 3);
    R.real() << 1, 2, 3, 4, 5, 6;
    const auto TR = assemble_T(R, 0.3).matrix;
    CHECK(TR.topRightCorner(2, 3).isZero());
    CHECK(TR.bottomLeftCorner(2, 3).isZero());
    CHECK(TR.topLeftCorner(2, 3) == TR.bottomRightCorner(2, 3));

    CHECK_THROWS_AS(assemble_T(H, 0.0), DomainError);
    CHECK_THROWS_AS(assemble_T(H, 1.5), DomainError);
    CHECK_THROWS_AS(assemble_T(H, 1e-9), DomainError);
}

TEST_CASE("sigma_top3 examples")
{
    DenseMatrix D = DenseMatrix::Zero(4, 4);
    D.diagonal() << 2, 2, 1, 1;
    const auto s = sigma_top3(D).sigma;
    CHECK(s(0) == doctest::Approx(2.0));
    CHECK(s(1) == doctest::Approx(2.0));
    CHECK(s(2) == doctest::Approx(1.0));

    DenseMatrix T(2, 2);
    T << 0, -0.5, 2, 0;
    const auto t = sigma_top3(T);
    CHECK(t.sigma(0) == doctest::Approx(2.0));
    CHECK(t.sigma(1) == doctest::Approx(0.5));
    CHECK(t.sigma(2) == 0.0);
    CHECK(t.u2.norm() == doctest::Approx(1.0));
    CHECK(t.v2.norm() == doctest::Approx(1.0));

    // imposed singular values through random orthogonal factors
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    DenseMatrix G1(4, 4), G2(4, 4);
    for (int i = 0; i < 16; ++i) {
        G1(i) = nd(rng);
        G2(i) = nd(rng);
    }
    const DenseMatrix U = Eigen::HouseholderQR<DenseMatrix>(G1).householderQ();
    const DenseMatrix V = Eigen::HouseholderQR<DenseMatrix>(G2).householderQ();
    Eigen::Vector4d imposed(3.5, 1.25, 0.75, 0.1);
    const auto r = sigma_top3(U * imposed.asDiagonal() * V.transpose());
    CHECK(std::abs(r.sigma(0) - 3.5) <= 1e-12);
    CHECK(std::abs(r.sigma(1) - 1.25) <= 1e-12);
    CHECK(std::abs(r.sigma(2) - 0.75) <= 1e-12);
}

TEST_CASE("templated helpers accept float expressions")
{
    Eigen::MatrixXcf H = Eigen::MatrixXcf::Constant(2, 2, std::complex<float>(1.0f, 2.0f));
    const Eigen::MatrixXf T = realify(H * 2.0f, 0.5f);
    CHECK(T(0, 2) == doctest::Approx(-2.0f));
    CHECK(T(2, 0) == doctest::Approx(8.0f));
    CHECK(sigma_top3(T).sigma(0) > 0.0);
}

TEST_CASE("mu_of: real H")
{
    ComplexMatrix H = ComplexMatrix::Zero(2, 2);
    H(0, 0) = 2.0;
    H(1, 1) = 1.0;
    const auto ev = mu_of(sample(H));
    CHECK(ev.mu_case == MuCase::real_part_only);
    CHECK(ev.mu == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ev.gamma_star == 1.0);
}

TEST_CASE("mu_of: pure imaginary diag(2, 0.5)")
{
    ComplexMatrix H = ComplexMatrix::Zero(2, 2);
    H(0, 0) = Complex(0.0, 2.0);
    H(1, 1) = Complex(0.0, 0.5);
    const auto ev = mu_of(sample(H));
    CHECK(ev.mu_case == MuCase::interior);
    CHECK(std::abs(ev.mu - 1.0) <= 1e-8);
    CHECK(std::abs(ev.gamma_star - 0.5) <= 1e-6);
    // oracle: 2000-point gamma grid
    CHECK(std::abs(grid_min_sigma2(H, 2000) - ev.mu) <= 1e-3);
}

TEST_CASE("mu_of: scalar with empty complements")
{
    ComplexMatrix H(1, 1);
    H(0, 0) = Complex(0.5, -0.5);
    const auto ev = mu_of(sample(H));
    CHECK(ev.mu_case == MuCase::gamma_limit);
    CHECK(ev.mu == 0.0);
    CHECK(ev.gamma_star == kGammaFloor);
    CHECK(sigma2(realify(H, kGammaFloor)) <= 1e-8);
}

TEST_CASE("mu_of: rank-one imaginary part routes through the limit")
{
    std::mt19937_64 rng(17);
    int limit_hits = 0;
    for (int t = 0; t < 50; ++t) {
        const int p = 2 + t % 3;
        const int m = 2 + (t / 3) % 3;
        ComplexMatrix H = random_complex(rng, p, m);
        const Eigen::VectorXd a = H.col(0).imag();
        const Eigen::VectorXd b = H.row(0).imag().transpose();
        H.imag() = a * b.transpose();
        REQUIRE(imaginary_rank(H) == 1);
        const auto ev = mu_of(sample(H));
        const double at_floor = sigma2(realify(H, kGammaFloor));
        const double limit = rank_one_limit(H);
        CHECK(ev.mu <= std::min(at_floor, grid_min_sigma2(H, 200)) + 1e-6 * sigma1(H));
        if (ev.mu_case == MuCase::gamma_limit) {
            ++limit_hits;
            CHECK(ev.mu == limit);
            CHECK(std::abs(ev.mu - at_floor) <= 1e-6 * std::max(1.0, ev.mu));
        }
    }
    CHECK(limit_hits > 0);
}

TEST_CASE("gamma = 1 realification doubles singular values")
{
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        const auto H = random_complex(rng, 1 + t % 4, 1 + (t / 4) % 4);
        const auto s = sigma_top3(realify(H, 1.0)).sigma;
        const double s1 = sigma1(H);
        CHECK(std::abs(s(0) - s1) <= 1e-12 * s1);
        CHECK(std::abs(s(1) - s1) <= 1e-12 * s1);
    }
}

TEST_CASE("mu is bounded by sigma_1 and agrees with a gamma grid")
{
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const auto H = random_complex(rng, 1 + t % 4, 1 + (t / 4) % 4);
        const auto ev = mu_of(sample(H));
        CHECK(ev.mu <= sigma1(H) + 1e-12);
        // one grid cell of the 2000-point grid
        const double cell = (1.0 - kGammaFloor) / 1999.0;
        const double grid = grid_min_sigma2(H, 2000);
        CHECK(ev.mu <= grid + 1e-9);
        if (ev.mu_case == MuCase::interior) {
            CHECK(std::abs(sigma2(realify(H, std::min(1.0, ev.gamma_star + cell))) - ev.mu)
                  >= -1e-9);
        }
    }
}

TEST_CASE("mu is even in w")
{
    ProblemParams prm;
    prm.size = 20;
    prm.m = 3;
    prm.p = 2;
    prm.seed = 21;
    const auto sys = generate_problem(ProblemKind::random_stable, prm);
    for (double w : {0.1, 0.8, 2.5}) {
        const double a = mu_of(eval_transfer(sys, w)).mu;
        const double b = mu_of(eval_transfer(sys, -w)).mu;
        CHECK(std::abs(a - b) <= 1e-12 * a);
    }
}

TEST_CASE("mu_derivative matches finite differences")
{
    ProblemParams prm;
    prm.size = 20;
    prm.m = 3;
    prm.p = 3;
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        prm.seed = seed;
        const auto sys = generate_problem(ProblemKind::random_stable, prm);
        MuOptions opt;
        opt.golden_tol = 1e-12;
        for (double w : {0.3, 0.9, 1.6}) {
            const auto s = eval_transfer(sys, w, 2);
            const auto ev = mu_of(s, opt);
            if (ev.mu_case != MuCase::interior) {
                continue;
            }
            double d = 0.0;
            try {
                d = mu_derivative(s, ev, opt);
            } catch (const NonsmoothPointError&) {
                continue;
            }
            const double h = 1e-5 * std::max(1.0, w);
            const double fd = (mu_of(eval_transfer(sys, w + h), opt).mu
                               - mu_of(eval_transfer(sys, w - h), opt).mu)
                              / (2.0 * h);
            CHECK(std::abs(fd - d) <= 1e-5 * std::max(std::abs(d), ev.mu));
            ++checked;
        }
    }
    CHECK(checked >= 6);
}

TEST_CASE("mu_derivative edge cases")
{
    StateSpaceSystem scalar(DenseMatrix::Constant(1, 1, -1.0), DenseMatrix::Ones(1, 1),
                            DenseMatrix::Ones(1, 1));
    const auto s0 = eval_transfer(scalar, 0.0, 2);
    CHECK(mu_derivative(s0, mu_of(s0)) == 0.0);

    ComplexMatrix I2 = ComplexMatrix::Zero(2, 2);
    I2(0, 0) = I2(1, 1) = Complex(0.0, 1.0);
    TransferSample s = sample(I2);
    s.H1 = I2;
    const auto ev = mu_of(s);
    CHECK(ev.mu_case == MuCase::gamma_one);
    CHECK_THROWS_AS(mu_derivative(s, ev), NonsmoothPointError);

    ComplexMatrix H(1, 1);
    H(0, 0) = Complex(0.5, -0.5);
    TransferSample lim = sample(H);
    lim.H1 = H;
    CHECK_THROWS_AS(mu_derivative(lim, mu_of(lim)), NonsmoothPointError);

    ComplexMatrix G = ComplexMatrix::Zero(2, 2);
    G(0, 0) = Complex(1.0, 2.0);
    G(1, 1) = Complex(0.3, 0.5);
    G(0, 1) = Complex(0.2, -0.4);
    const TransferSample no_h1 = sample(G);
    const auto evg = mu_of(no_h1);
    if (evg.mu_case == MuCase::interior) {
        CHECK_THROWS_AS(mu_derivative(no_h1, evg), ContractError);
    }
}

TEST_CASE("gamma_one equals sigma_1(H)")
{
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
        const auto H = random_complex(rng, 1 + t % 4, 1 + (t / 4) % 4);
        const auto ev = mu_of(sample(H));
        if (ev.mu_case == MuCase::gamma_one) {
            CHECK(std::abs(ev.mu - sigma1(H)) <= 1e-10 * sigma1(H));
        }
        CHECK(ev.sigma(0) >= ev.sigma(1));
        CHECK(ev.sigma(1) >= ev.sigma(2));
    }
}
