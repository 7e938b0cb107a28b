#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rstab/errors.hpp"
#include "rstab/generators.hpp"
#include "rstab/oracle.hpp"

using namespace rstab;

namespace {

StateSpaceSystem scalar_system()
{
    return {DenseMatrix::Constant(1, 1, -1.0), DenseMatrix::Ones(1, 1), DenseMatrix::Ones(1, 1)};
}

StateSpaceSystem random_system(int n, int m, int p, std::uint64_t seed)
{
    ProblemParams prm;
    prm.size = n;
    prm.m = m;
    prm.p = p;
    prm.seed = seed;
    return generate_problem(ProblemKind::random_stable, prm);
}

} // namespace

TEST_CASE("scalar radius")
{
    const auto res = dense_radius(scalar_system());
    CHECK(std::abs(res.radius - 1.0) <= 1e-6);
    CHECK(res.omega_star == 0.0);
}

TEST_CASE("diagonal system has its peak at w = 0")
{
    DenseMatrix A = DenseMatrix::Zero(2, 2);
    A.diagonal() << -1.0, -2.0;
    const StateSpaceSystem sys(A, DenseMatrix::Identity(2, 2), DenseMatrix::Identity(2, 2));
    const auto res = dense_radius(sys);
    CHECK(std::abs(res.radius - 1.0) <= 1e-6);
}

TEST_CASE("Hessenberg response matches the direct transfer function")
{
    const auto sys = random_system(25, 3, 2, 4);
    const HessenbergResponse H(sys);
    for (double w : {0.0, 0.4, 3.0, 40.0}) {
        const ComplexMatrix a = H(w);
        const ComplexMatrix b = eval_transfer(sys, w).H0;
        CHECK((a - b).norm() <= 1e-10 * b.norm());
    }
}

TEST_CASE("grid-seeded inner search")
{
    ComplexMatrix H = ComplexMatrix::Zero(2, 2);
    H(0, 0) = Complex(0.0, 2.0);
    H(1, 1) = Complex(0.0, 0.5);
    const auto g = grid_seeded_mu(H, 2000, 1e-8, 1e-12);
    CHECK(std::abs(g.mu - 1.0) <= 1e-8);
    CHECK(std::abs(g.gamma - 0.5) <= 1e-6);
}

TEST_CASE("probe controls on the scalar system")
{
    const auto sys = scalar_system();
    CHECK(perturbed_abscissa(sys, DenseMatrix::Constant(1, 1, 0.99)) == doctest::Approx(-0.01));
    CHECK(perturbed_abscissa(sys, DenseMatrix::Constant(1, 1, 1.01)) > 0.0);

    const auto safe = stability_probe(sys, 1.0, 100, 0.99);
    CHECK(safe.violations == 0);
    CHECK(safe.delta_norm == doctest::Approx(0.99));
    // above the radius a positive scalar perturbation destabilizes
    const auto over = stability_probe(sys, 1.0, 100, 1.01);
    CHECK(over.violations > 0);
    CHECK(over.violations < 100);
}

TEST_CASE("probe finds no violation below the oracle radius")
{
    const auto sys = random_system(20, 2, 2, 10);
    const auto res = dense_radius(sys);
    const auto rep = stability_probe(sys, res.radius, 500, 0.99);
    CHECK(rep.trials == 500);
    CHECK(rep.violations == 0);
    CHECK(rep.worst_abscissa < 0.0);
}

TEST_CASE("size guard")
{
    ProblemParams prm;
    prm.size = 600;
    const auto sys = generate_problem(ProblemKind::convection_diffusion_1d, prm);
    CHECK_THROWS_AS(dense_radius(sys), SizeGuardError);
    CHECK_THROWS_AS(stability_probe(sys, 1.0, 1, 0.5), SizeGuardError);
    OracleConfig bad;
    bad.omega_grid_points = 1;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("real radius is at least the complex radius")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto sys = random_system(15, 2, 3, seed);
        OracleConfig cfg;
        cfg.omega_grid_points = 2000;
        const auto res = dense_radius(sys, cfg);
        const double wmax = 10.0 * sys.A_norm1();
        const HessenbergResponse H(sys);
        double sup_sigma1 = 0.0;
        for (int i = 0; i < cfg.omega_grid_points; ++i) {
            const double w = wmax * i / (cfg.omega_grid_points - 1);
            sup_sigma1 = std::max(sup_sigma1, Eigen::JacobiSVD<ComplexMatrix>(H(w)).singularValues()(0));
        }
        CHECK(res.radius >= 1.0 / sup_sigma1 - 1e-9);
    }
}

TEST_CASE("doubling the frequency grid barely moves the radius")
{
    for (std::uint64_t seed : {100u, 102u}) {
        const auto sys = random_system(10 + 20 * static_cast<int>(seed % 2), 2, 2, seed);
        OracleConfig a;
        a.omega_grid_points = 5000;
        OracleConfig b;
        b.omega_grid_points = 10000;
        const double ra = dense_radius(sys, a).radius;
        const double rb = dense_radius(sys, b).radius;
        CHECK(std::abs(ra - rb) <= 1e-4 * rb);
    }
}

TEST_CASE("real crossings of a scalar response")
{
    CHECK(real_crossings(scalar_system()).empty());
    CHECK_THROWS_AS(real_crossings(random_system(5, 2, 1, 1)), DimensionError);

    ProblemParams prm;
    prm.size = 20;
    prm.seed = 3;
    const auto sys = generate_problem(ProblemKind::random_stable, prm);
    const auto roots = real_crossings(sys);
    const HessenbergResponse H(sys);
    for (double w : roots) {
        const Complex h = H(w)(0, 0);
        CHECK(std::abs(h.imag()) <= 1e-10 * std::abs(h));
    }
    // sign changes of Im H on a fine grid well past the spectrum
    const double wmax = 10.0 * sys.A_norm1();
    int changes = 0;
    double prev = H(1e-6)(0, 0).imag();
    for (int i = 1; i <= 200000; ++i) {
        const double y = H(wmax * i / 200000.0)(0, 0).imag();
        changes += (y > 0.0) != (prev > 0.0);
        prev = y;
    }
    const auto inside = std::count_if(roots.begin(), roots.end(), [&](double w) { return w <= wmax; });
    CHECK(inside == changes);
}
