#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rstab {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Real LTI triple (A, B, C) for x' = Ax + Bu, y = Cx.
///
/// A keeps the storage it was built with: dense systems are factored with a
/// dense LU, sparse ones with a sparse LU. Instances are immutable once
/// constructed and can be shared across threads.
class StateSpaceSystem {
public:
    StateSpaceSystem(DenseMatrix A, DenseMatrix B, DenseMatrix C);
    StateSpaceSystem(SparseMatrix A, DenseMatrix B, DenseMatrix C);

    Eigen::Index n() const { return B_.rows(); }
    Eigen::Index m() const { return B_.cols(); }
    Eigen::Index p() const { return C_.rows(); }

    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(A_); }
    const DenseMatrix& dense_A() const { return std::get<DenseMatrix>(A_); }
    const SparseMatrix& sparse_A() const { return std::get<SparseMatrix>(A_); }
    const DenseMatrix& B() const { return B_; }
    const DenseMatrix& C() const { return C_; }

    /// Dense copy of A. Refuses n > 500 for sparse storage.
    DenseMatrix A_dense() const;
    /// Maximum absolute column sum of A.
    double A_norm1() const;
    /// A * X for a complex n x k block, whatever the storage.
    ComplexMatrix apply_A(const ComplexMatrix& X) const;

private:
    std::variant<DenseMatrix, SparseMatrix> A_;
    DenseMatrix B_;
    DenseMatrix C_;
};

/// Largest real part over the spectrum of a square real matrix.
double spectral_abscissa(const DenseMatrix& A);

/// Throws ParameterError when A is not Hurwitz or when n exceeds the dense
/// eigenvalue limit (2000).
void verify_stable(const StateSpaceSystem& sys);

/// LU factorization of (iw I - A), reusable for any number of right-hand sides.
class ShiftedFactorization {
public:
    ShiftedFactorization(const StateSpaceSystem& sys, double omega);
    ~ShiftedFactorization();
    ShiftedFactorization(ShiftedFactorization&&) noexcept;
    ShiftedFactorization& operator=(ShiftedFactorization&&) noexcept;

    double omega() const { return omega_; }
    Complex shift() const { return {0.0, omega_}; }

    /// Solve (iw I - A) X = rhs.
    ComplexMatrix solve(const ComplexMatrix& rhs) const;

private:
    struct Impl;
    double omega_;
    std::unique_ptr<Impl> impl_;
};

ShiftedFactorization factor_shift(const StateSpaceSystem& sys, double omega);

/// H(iw) and its first two derivatives with respect to w.
struct TransferSample {
    double omega = 0.0;
    ComplexMatrix H0;
    std::optional<ComplexMatrix> H1;
    std::optional<ComplexMatrix> H2;
};

/// H0 = C X1, H1 = -i C X2, H2 = -2 C X3 with X_{k+1} = (iwI - A)^{-1} X_k,
/// X_0 = B. One factorization per call; order is 1, 2 or 3.
TransferSample eval_transfer(const StateSpaceSystem& sys, double omega, int order = 1);

namespace probe {
/// Number of shifted factorizations performed by this process so far.
std::uint64_t factorizations();
} // namespace probe

} // namespace rstab
