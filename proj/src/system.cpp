#include "rstab/system.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "rstab/errors.hpp"

namespace rstab {

namespace {

std::atomic<std::uint64_t> g_factorizations{0};

constexpr Eigen::Index kMaxDensify = 500;
constexpr Eigen::Index kMaxStabilityCheck = 2000;
constexpr double kSingularRcond = 1e-14;

std::string shape(const char* name, Eigen::Index r, Eigen::Index c)
{
    std::ostringstream os;
    os << name << ": " << r << "×" << c;
    return os.str();
}

void check_shapes(Eigen::Index ar, Eigen::Index ac, const DenseMatrix& B, const DenseMatrix& C)
{
    const bool ok = ar == ac && B.rows() == ar && C.cols() == ac && ar >= 1 && B.cols() >= 1
                    && C.rows() >= 1;
    if (!ok) {
        throw DimensionError("inconsistent system dimensions (" + shape("A", ar, ac) + ", "
                             + shape("B", B.rows(), B.cols()) + ", "
                             + shape("C", C.rows(), C.cols()) + ")");
    }
}

} // namespace

StateSpaceSystem::StateSpaceSystem(DenseMatrix A, DenseMatrix B, DenseMatrix C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C))
{
    const auto& a = std::get<DenseMatrix>(A_);
    check_shapes(a.rows(), a.cols(), B_, C_);
}

StateSpaceSystem::StateSpaceSystem(SparseMatrix A, DenseMatrix B, DenseMatrix C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C))
{
    auto& a = std::get<SparseMatrix>(A_);
    a.makeCompressed();
    check_shapes(a.rows(), a.cols(), B_, C_);
}

DenseMatrix StateSpaceSystem::A_dense() const
{
    if (!is_sparse()) {
        return dense_A();
    }
    if (n() > kMaxDensify) {
        throw SizeGuardError("refusing to densify sparse A with n = " + std::to_string(n())
                             + " > " + std::to_string(kMaxDensify));
    }
    return DenseMatrix(sparse_A());
}

double StateSpaceSystem::A_norm1() const
{
    if (!is_sparse()) {
        return dense_A().cwiseAbs().colwise().sum().maxCoeff();
    }
    const auto& a = sparse_A();
    double best = 0.0;
    for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
            s += std::abs(it.value());
        }
        best = std::max(best, s);
    }
    return best;
}

ComplexMatrix StateSpaceSystem::apply_A(const ComplexMatrix& X) const
{
    if (is_sparse()) {
        return sparse_A().cast<Complex>() * X;
    }
    return dense_A().cast<Complex>() * X;
}

double spectral_abscissa(const DenseMatrix& A)
{
    Eigen::EigenSolver<DenseMatrix> es(A, false);
    if (es.info() != Eigen::Success) {
        throw Error("eigenvalue computation failed");
    }
    return es.eigenvalues().real().maxCoeff();
}

void verify_stable(const StateSpaceSystem& sys)
{
    if (sys.n() > kMaxStabilityCheck) {
        throw ParameterError("stability check limited to n <= 2000 (n = "
                             + std::to_string(sys.n()) + ")");
    }
    DenseMatrix A = sys.is_sparse() ? DenseMatrix(sys.sparse_A()) : sys.dense_A();
    const double alpha = spectral_abscissa(A);
    if (!(alpha < 0.0)) {
        std::ostringstream os;
        os << "A is not Hurwitz stable (spectral abscissa " << alpha << ")";
        throw ParameterError(os.str());
    }
}

// ---------------------------------------------------------------------------

struct ShiftedFactorization::Impl {
    std::optional<Eigen::PartialPivLU<ComplexMatrix>> dense;
    std::optional<Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>>> sparse;
};

ShiftedFactorization::ShiftedFactorization(const StateSpaceSystem& sys, double omega)
    : omega_(omega), impl_(std::make_unique<Impl>())
{
    const Complex s(0.0, omega);
    const auto n = sys.n();
    g_factorizations.fetch_add(1, std::memory_order_relaxed);

    if (!sys.is_sparse()) {
        ComplexMatrix M = -sys.dense_A().cast<Complex>();
        M.diagonal().array() += s;
        impl_->dense.emplace(M);
        const double rc = impl_->dense->rcond();
        if (!(rc > kSingularRcond)) {
            std::ostringstream os;
            os << "shifted matrix iwI - A is numerically singular at w = " << omega
               << " (rcond " << rc << ")";
            throw SingularShiftError(os.str());
        }
        return;
    }

    const auto& A = sys.sparse_A();
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(A.nonZeros() + n));
    for (Eigen::Index j = 0; j < A.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
            trip.emplace_back(it.row(), it.col(), Complex(-it.value(), 0.0));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        trip.emplace_back(i, i, s);
    }
    Eigen::SparseMatrix<Complex> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();

    auto& lu = impl_->sparse.emplace();
    lu.analyzePattern(M);
    lu.factorize(M);
    if (lu.info() != Eigen::Success) {
        std::ostringstream os;
        os << "shifted matrix iwI - A is numerically singular at w = " << omega << " ("
           << lu.lastErrorMessage() << ")";
        throw SingularShiftError(os.str());
    }
}

ShiftedFactorization::~ShiftedFactorization() = default;
ShiftedFactorization::ShiftedFactorization(ShiftedFactorization&&) noexcept = default;
ShiftedFactorization& ShiftedFactorization::operator=(ShiftedFactorization&&) noexcept = default;

ComplexMatrix ShiftedFactorization::solve(const ComplexMatrix& rhs) const
{
    ComplexMatrix X = impl_->dense ? ComplexMatrix(impl_->dense->solve(rhs))
                                   : ComplexMatrix(impl_->sparse->solve(rhs));
    if (!X.allFinite()) {
        throw SingularShiftError("non-finite solution of the shifted system at w = "
                                 + std::to_string(omega_));
    }
    return X;
}

ShiftedFactorization factor_shift(const StateSpaceSystem& sys, double omega)
{
    return ShiftedFactorization(sys, omega);
}

TransferSample eval_transfer(const StateSpaceSystem& sys, double omega, int order)
{
    if (order < 1 || order > 3) {
        throw ParameterError("transfer order must be 1, 2 or 3");
    }
    const auto lu = factor_shift(sys, omega);
    const ComplexMatrix C = sys.C().cast<Complex>();
    const Complex minus_i(0.0, -1.0);

    TransferSample out;
    out.omega = omega;
    ComplexMatrix X = lu.solve(sys.B().cast<Complex>());
    out.H0 = C * X;
    if (order >= 2) {
        X = lu.solve(X);
        out.H1 = minus_i * (C * X);
    }
    if (order >= 3) {
        X = lu.solve(X);
        out.H2 = -2.0 * (C * X);
    }
    return out;
}

namespace probe {
std::uint64_t factorizations()
{
    return g_factorizations.load(std::memory_order_relaxed);
}
} // namespace probe

} // namespace rstab
