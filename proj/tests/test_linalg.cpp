#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "asi/eigensolver.hpp"
#include "asi/errors.hpp"
#include "asi/fem.hpp"
#include "asi/gram_schmidt.hpp"
#include "asi/mesh.hpp"
#include "asi/qcqp.hpp"
#include "asi/sparse.hpp"

using namespace asi;

namespace {

SparseReal sparse_identity(int n) {
    SparseReal I(n, n);
    I.setIdentity();
    return I;
}

// 1D finite-difference Laplacian with Dirichlet ends, n interior points.
SparseReal fd_laplacian(int n, double h) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, 2.0 / (h * h));
        if (i > 0) trip.emplace_back(i, i - 1, -1.0 / (h * h));
        if (i + 1 < n) trip.emplace_back(i, i + 1, -1.0 / (h * h));
    }
    SparseReal A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

}  // namespace

TEST_CASE("factor_solve solves real and complex systems") {
    SparseReal A(2, 2);
    A.insert(0, 0) = 2.0;
    A.insert(1, 1) = 4.0;
    A.makeCompressed();
    VecR b(2);
    b << 2.0, 8.0;
    const VecR x = factor_solve(A, b);
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));

    // i * x = 1  =>  x = -i
    SparseComplex C(1, 1);
    C.insert(0, 0) = Complex(0.0, 1.0);
    C.makeCompressed();
    VecC rhs(1);
    rhs << Complex(1.0, 0.0);
    const VecC z = factor_solve(C, rhs);
    CHECK(z[0].real() == doctest::Approx(0.0));
    CHECK(z[0].imag() == doctest::Approx(-1.0));
}

TEST_CASE("SpdSolver rejects indefinite matrices") {
    SparseReal A(2, 2);
    A.insert(0, 0) = 1.0;
    A.insert(1, 1) = -1.0;
    A.makeCompressed();
    CHECK_THROWS_AS(SpdSolver{A}, FactorizationError);
}

TEST_CASE("LuSolver refactors with a changed matrix on the same pattern") {
    SparseReal A(2, 2);
    A.insert(0, 0) = 2.0;
    A.insert(0, 1) = 1.0;
    A.insert(1, 0) = 1.0;
    A.insert(1, 1) = 3.0;
    A.makeCompressed();
    LuSolver<Real> lu(A);
    VecR b(2);
    b << 3.0, 4.0;
    CHECK((A * lu.solve(b) - b).norm() < 1e-12);

    SparseReal B = 2.0 * A;
    lu.factor(B);
    CHECK((B * lu.solve(b) - b).norm() < 1e-12);
}

TEST_CASE("eigensolver reproduces the 1D finite-difference spectrum") {
    const int n = 99;
    const double h = 1.0 / (n + 1);
    const SparseReal A = fd_laplacian(n, h);
    const SparseReal M = sparse_identity(n);
    const EigenPairs pairs = smallest_eigenpairs(A, M, 3);
    for (int k = 1; k <= 3; ++k) {
        // Exact discrete eigenvalue: (2/h^2) (1 - cos(k pi h)).
        const double exact = 2.0 / (h * h) * (1.0 - std::cos(k * std::numbers::pi * h));
        CHECK(pairs.values[k - 1] == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("eigensolver matches a dense oracle on a random SPD pencil") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    const int n = 60;
    MatR G(n, n), H(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            G(i, j) = gauss(rng);
            H(i, j) = gauss(rng);
        }
    const MatR Kd = G * G.transpose() + 1e-2 * MatR::Identity(n, n);
    const MatR Md = H * H.transpose() + MatR::Identity(n, n);
    const SparseReal K = Kd.sparseView();
    const SparseReal M = Md.sparseView();

    const Eigen::GeneralizedSelfAdjointEigenSolver<MatR> dense(Kd, Md);
    const EigenPairs pairs = smallest_eigenpairs(K, M, 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(pairs.values[k] ==
              doctest::Approx(dense.eigenvalues()[k]).epsilon(1e-8));
        // Eigenvector agreement up to sign, M-norms normalized.
        const VecR v = pairs.vectors.col(k);
        const VecR w = dense.eigenvectors().col(k);
        const double align = std::abs(v.dot(Md * w)) / std::sqrt(w.dot(Md * w));
        CHECK(align == doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("eigensolver on the identity pencil returns unit eigenvalues") {
    const SparseReal I = sparse_identity(40);
    const EigenPairs pairs = smallest_eigenpairs(I, I, 4);
    for (int k = 0; k < 4; ++k) CHECK(pairs.values[k] == doctest::Approx(1.0).epsilon(1e-10));
    // Vectors are M-orthonormal.
    const MatR gram = pairs.vectors.transpose() * pairs.vectors;
    CHECK((gram - MatR::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("eigensolver results are deterministic and ascending") {
    const int n = 50;
    const SparseReal A = fd_laplacian(n, 1.0 / (n + 1));
    const SparseReal M = sparse_identity(n);
    const EigenPairs a = smallest_eigenpairs(A, M, 4);
    const EigenPairs b = smallest_eigenpairs(A, M, 4);
    CHECK((a.values - b.values).norm() == 0.0);
    CHECK((a.vectors - b.vectors).norm() == 0.0);
    for (int k = 1; k < 4; ++k) CHECK(a.values[k] >= a.values[k - 1]);
}

TEST_CASE("2D FEM Laplace eigenvalue approaches 2 pi^2") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 64, 64);
    const SparseReal K = restrict_interior(
        mesh, assemble_weighted_stiffness(
                  mesh, VecR::Ones(static_cast<Eigen::Index>(mesh.triangles.size()))));
    const SparseReal M = restrict_interior(mesh, assemble_mass(mesh));
    const EigenPairs pairs = smallest_eigenpairs(K, M, 1);
    CHECK(pairs.values[0] ==
          doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(0.02));
}

TEST_CASE("gram_schmidt orthonormalizes against the mass inner product") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 8, 8);
    const SparseReal M = assemble_mass(mesh);
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());

    std::vector<VecR> raw;
    raw.push_back(VecR::Ones(n));
    raw.push_back(interpolate(mesh, [](Point p) { return p.x; }));
    raw.push_back(2.0 * raw[0] + 3.0 * raw[1]);  // dependent: must be dropped
    raw.push_back(interpolate(mesh, [](Point p) { return p.y; }));

    const MgsResult mgs = modified_gram_schmidt(raw, M, 1e-10);
    REQUIRE(mgs.basis.size() == 3);
    CHECK(mgs.dropped == 1);
    for (std::size_t i = 0; i < mgs.basis.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double ip = mgs.basis[i].dot(M * mgs.basis[j]);
            if (i == j)
                CHECK(ip == doctest::Approx(1.0).epsilon(1e-9));
            else
                CHECK(std::abs(ip) < 1e-9);
        }
}

TEST_CASE("qcqp_ball hand-checked cases") {
    // Optimum non-unique along the null direction: the min-norm optimum is
    // returned, here the origin (inside the ball around gamma).
    MatR A = MatR::Zero(2, 2);
    A(0, 0) = 1.0;
    VecR gamma(2);
    gamma << 0.0, 0.7;
    QcqpResult r = qcqp_ball(A, gamma, 1.0);
    CHECK(r.beta.norm() == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(r.beta.dot(A * r.beta) == doctest::Approx(0.0).epsilon(1e-12));

    // Identity objective, center at distance 2, radius 1: beta on the segment
    // towards the origin at distance 1 from gamma.
    A = MatR::Identity(2, 2);
    gamma << 2.0, 0.0;
    r = qcqp_ball(A, gamma, 1.0);
    CHECK(r.beta[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.beta[1] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(r.nu > 0.0);
}

TEST_CASE("qcqp_ball beats a boundary-sampling oracle on random instances") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.2, 2.0);
    for (int inst = 0; inst < 25; ++inst) {
        const int dim = 2 + static_cast<int>(rng() % 5);  // 2..6
        MatR G(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) G(i, j) = gauss(rng);
        MatR A = G * G.transpose();
        if (inst % 3 == 0) {
            // Rank-deficient case: zero out one eigendirection.
            const Eigen::SelfAdjointEigenSolver<MatR> es(A);
            VecR d = es.eigenvalues();
            d[0] = 0.0;
            A = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
        }
        VecR gamma(dim);
        for (int i = 0; i < dim; ++i) gamma[i] = gauss(rng);
        const double radius = unif(rng);

        const QcqpResult r = qcqp_ball(A, gamma, radius);
        CHECK((r.beta - gamma).norm() <= radius * (1.0 + 1e-10));
        const double obj = r.beta.dot(A * r.beta);

        // Oracle: dense sampling of the sphere |beta - gamma| = radius plus
        // the center itself.
        double best = gamma.dot(A * gamma);
        for (int s = 0; s < 20000; ++s) {
            VecR disk(dim);
            for (int i = 0; i < dim; ++i) disk[i] = gauss(rng);
            disk *= radius / disk.norm();
            const VecR cand = gamma + disk;
            best = std::min(best, cand.dot(A * cand));
        }
        CHECK(obj <= best + 1e-6);

        // KKT: (A + nu I) beta = nu gamma with nu >= 0.
        CHECK(r.nu >= 0.0);
        const VecR kkt = A * r.beta + r.nu * (r.beta - gamma);
        CHECK(kkt.norm() <= 1e-8 * std::max(1.0, A.norm() * r.beta.norm()));
    }
}
