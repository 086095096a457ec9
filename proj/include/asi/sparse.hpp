#pragma once

#include <complex>
#include <memory>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace asi {

using Real = double;
using Complex = std::complex<double>;

template <class Scalar>
using Sparse = Eigen::SparseMatrix<Scalar>;
using SparseReal = Sparse<Real>;
using SparseComplex = Sparse<Complex>;

using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;

// Structural and numerical symmetry, |A - A^T|_max <= tol * |A|_max.
template <class Scalar>
bool is_symmetric(const Sparse<Scalar>& A, double tol = 1e-14) {
    Sparse<Scalar> D = Sparse<Scalar>(A.transpose()) - A;
    double amax = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (typename Sparse<Scalar>::InnerIterator it(A, k); it; ++it)
            amax = std::max(amax, std::abs(it.value()));
    for (int k = 0; k < D.outerSize(); ++k)
        for (typename Sparse<Scalar>::InnerIterator it(D, k); it; ++it)
            if (std::abs(it.value()) > tol * amax) return false;
    return true;
}

// Reusable LDL^T factorization of a symmetric positive definite matrix.
class SpdSolver {
  public:
    explicit SpdSolver(const SparseReal& A);
    VecR solve(const VecR& b) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
    int rows() const { return ldlt_.rows(); }

  private:
    Eigen::SimplicialLDLT<SparseReal> ldlt_;
};

// Reusable sparse LU factorization for general square systems. factor() keeps
// the symbolic analysis across calls with the same sparsity pattern, so
// refactoring a matrix with updated values is cheaper than a fresh solver.
// Copies share the factorization; factor() on one copy affects all.
template <class Scalar>
class LuSolver {
  public:
    LuSolver() = default;
    explicit LuSolver(const Sparse<Scalar>& A) { factor(A); }
    void factor(const Sparse<Scalar>& A);
    Eigen::Vector<Scalar, Eigen::Dynamic> solve(
        const Eigen::Vector<Scalar, Eigen::Dynamic>& b) const;

  private:
    std::shared_ptr<Eigen::SparseLU<Sparse<Scalar>>> lu_;
    Eigen::Index analyzed_rows_ = -1;
};

extern template class LuSolver<Real>;
extern template class LuSolver<Complex>;

// One-shot factor-and-solve with a residual guarantee of
// |Ax - b| <= 1e-10 (|A| |x| + |b|) enforced post-solve.
template <class Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> factor_solve(
    const Sparse<Scalar>& A, const Eigen::Vector<Scalar, Eigen::Dynamic>& b);

}  // namespace asi
