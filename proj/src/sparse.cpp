#include "asi/sparse.hpp"

#include <string>

#include "asi/errors.hpp"

namespace asi {

SpdSolver::SpdSolver(const SparseReal& A) {
    if (A.rows() != A.cols()) throw ConfigError("SpdSolver: matrix must be square");
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success)
        throw FactorizationError("SpdSolver: LDL^T factorization failed");
    if (ldlt_.vectorD().minCoeff() <= 0.0)
        throw FactorizationError("SpdSolver: matrix is not positive definite (min pivot " +
                                 std::to_string(ldlt_.vectorD().minCoeff()) + ")");
}

VecR SpdSolver::solve(const VecR& b) const { return ldlt_.solve(b); }

Eigen::MatrixXd SpdSolver::solve(const Eigen::MatrixXd& B) const { return ldlt_.solve(B); }

template <class Scalar>
void LuSolver<Scalar>::factor(const Sparse<Scalar>& A) {
    if (A.rows() != A.cols()) throw ConfigError("LuSolver: matrix must be square");
    if (!lu_ || analyzed_rows_ != A.rows()) {
        lu_ = std::make_shared<Eigen::SparseLU<Sparse<Scalar>>>();
        lu_->analyzePattern(A);
        analyzed_rows_ = A.rows();
    }
    lu_->factorize(A);
    if (lu_->info() != Eigen::Success)
        throw FactorizationError("LuSolver: " + lu_->lastErrorMessage());
}

template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> LuSolver<Scalar>::solve(
    const Eigen::Vector<Scalar, Eigen::Dynamic>& b) const {
    if (!lu_) throw ConfigError("LuSolver: solve before factor");
    return lu_->solve(b);
}

template class LuSolver<Real>;
template class LuSolver<Complex>;

template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> factor_solve(
    const Sparse<Scalar>& A, const Eigen::Vector<Scalar, Eigen::Dynamic>& b) {
    if (A.rows() != b.size()) throw ConfigError("factor_solve: dimension mismatch");
    LuSolver<Scalar> lu(A);
    auto x = lu.solve(b);
    double anorm = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (typename Sparse<Scalar>::InnerIterator it(A, k); it; ++it)
            anorm = std::max(anorm, std::abs(it.value()));
    const double resid = (A * x - b).norm();
    if (resid > 1e-10 * (anorm * x.norm() + b.norm()))
        throw NumericalError("factor_solve: residual " + std::to_string(resid) +
                             " exceeds tolerance");
    return x;
}

template VecR factor_solve<Real>(const SparseReal&, const VecR&);
template VecC factor_solve<Complex>(const SparseComplex&, const VecC&);

}  // namespace asi
