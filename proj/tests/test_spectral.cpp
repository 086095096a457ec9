#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "asi/fem.hpp"
#include "asi/mesh.hpp"
#include "asi/spectral.hpp"

using namespace asi;

namespace {

constexpr double kPi = std::numbers::pi;

Medium disk_medium(double jump, double radius = 0.2) {
    Medium med;
    med.domain = {0.0, 0.0, 1.0, 1.0};
    med.pieces.push_back({med.domain, 1.0});
    med.inclusions.push_back({Disk{{0.5, 0.5}, radius}, jump});
    med.validate();
    return med;
}

Medium square_medium(double jump, double size = 0.3) {
    Medium med;
    med.domain = {0.0, 0.0, 1.0, 1.0};
    med.pieces.push_back({med.domain, 1.0});
    const double a = 0.5 - size / 2.0, b = 0.5 + size / 2.0;
    med.inclusions.push_back({Polygon{{{a, a}, {b, a}, {b, b}, {a, b}}}, jump});
    med.validate();
    return med;
}

}  // namespace

TEST_CASE("weight value forms and axioms") {
    WeightSpec power{WeightForm::PowerQ, 2.0, 1e-3};
    CHECK(weight_value(0.0, power) == doctest::Approx(1e3).epsilon(1e-12));
    CHECK(weight_value(3e-3, power) ==
          doctest::Approx(1.0 / std::sqrt(9e-6 + 1e-6)).epsilon(1e-12));

    WeightSpec maxf{WeightForm::Max, 2.0, 1e-3};
    CHECK(weight_value(0.0, maxf) == doctest::Approx(1e3).epsilon(1e-12));
    CHECK(weight_value(5e-4, maxf) == doctest::Approx(1e3).epsilon(1e-12));
    CHECK(weight_value(2.0, maxf) == doctest::Approx(0.5).epsilon(1e-12));

    for (const WeightSpec& spec : {power, maxf}) {
        double prev = weight_value(0.0, spec);
        for (double t : {1e-6, 1e-4, 1e-2, 1.0, 1e2}) {
            const double mu = weight_value(t, spec);
            CHECK(mu <= prev * (1.0 + 1e-14));  // non-increasing
            CHECK(t * mu <= 1.0 + 1e-14);       // t * mu(t) <= 1
            prev = mu;
        }
    }
}

TEST_CASE("background of a constant medium is that constant") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 16, 16);
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    const VecR u = 3.5 * VecR::Ones(n);
    const WeightSpec spec;
    const VecR mu = weight_field(mesh, u, spec);
    const VecR bg = compute_background(mesh, mu, u);
    CHECK((bg - u).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("background reproduces a linear field exactly") {
    // Constant weight: the weighted-harmonic extension of linear boundary data
    // is the linear interpolant itself.
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 12, 12);
    const VecR u = interpolate(mesh, [](Point p) { return 1.0 + 0.25 * p.x + 0.5 * p.y; });
    const WeightSpec spec;
    const VecR mu = weight_field(mesh, u, spec);
    // |grad u| is constant, so mu is constant across elements.
    CHECK((mu.maxCoeff() - mu.minCoeff()) < 1e-12 * mu.maxCoeff());
    const VecR bg = compute_background(mesh, mu, u);
    CHECK((bg - u).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("constant medium eigenvalues are scaled Dirichlet Laplace eigenvalues") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 64, 64);
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    const WeightSpec spec;  // epsilon 1e-8
    const VecR mu = weight_field(mesh, VecR::Ones(n), spec);
    const SpectralBasis basis = compute_eigenbasis(mesh, mu, 3);
    // mu = 1/eps uniformly, so lambda_k = (1/eps) * Laplace eigenvalues
    // (2 pi^2, 5 pi^2, 5 pi^2 on the unit square).
    CHECK(spec.epsilon * basis.lambda[0] ==
          doctest::Approx(2.0 * kPi * kPi).epsilon(0.02));
    CHECK(spec.epsilon * basis.lambda[1] ==
          doctest::Approx(5.0 * kPi * kPi).epsilon(0.02));
    CHECK(spec.epsilon * basis.lambda[2] ==
          doctest::Approx(5.0 * kPi * kPi).epsilon(0.02));
}

TEST_CASE("disk eigenvalue tracks perimeter over area times jump") {
    // lambda_1 ~ per / (area * jump) for one inclusion, stable in eps and h.
    const double radius = 0.2, jump = 2.5;
    const double predicted = (2.0 * kPi * radius) / (kPi * radius * radius * jump);
    for (double eps : {1e-4, 1e-8})
        for (int n : {48, 96}) {
            const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, n, n);
            const Medium med = disk_medium(jump, radius);
            const VecR u = medium_nodal_values(mesh, med);
            WeightSpec spec;
            spec.epsilon = eps;
            const SpectralBasis basis = compute_eigenbasis(mesh, weight_field(mesh, u, spec), 1);
            CHECK(basis.lambda[0] > predicted / 2.0);
            CHECK(basis.lambda[0] < predicted * 2.0);
        }
}

TEST_CASE("eigenvalues are equivariant under joint medium and epsilon scaling") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 32, 32);
    const Medium med = disk_medium(1.5);
    const VecR u = medium_nodal_values(mesh, med);
    WeightSpec spec;
    spec.form = WeightForm::Max;
    spec.epsilon = 1e-6;

    const double s = 7.0;
    WeightSpec sspec = spec;
    sspec.epsilon = s * spec.epsilon;

    const SpectralBasis a = compute_eigenbasis(mesh, weight_field(mesh, u, spec), 3);
    const SpectralBasis b = compute_eigenbasis(mesh, weight_field(mesh, VecR(s * u), sspec), 3);
    for (int k = 0; k < 3; ++k)
        CHECK(b.lambda[k] == doctest::Approx(a.lambda[k] / s).epsilon(1e-6));
}

TEST_CASE("total variation of exact fields") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 20, 20);
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    CHECK(total_variation(mesh, VecR::Ones(n)) == doctest::Approx(0.0).epsilon(1e-14));
    const VecR x = interpolate(mesh, [](Point p) { return p.x; });
    CHECK(total_variation(mesh, x) == doctest::Approx(1.0).epsilon(1e-13));
    const VecR xy = interpolate(mesh, [](Point p) { return 2.0 * p.x - p.y; });
    CHECK(total_variation(mesh, xy) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-13));
}

TEST_CASE("interpolated indicator TV stays near the interface perimeter") {
    // The TV of the P1 interpolant of a disk indicator approximates the disk
    // perimeter; the ratio across refinements stays within [1/1.5, 1.5].
    const double radius = 0.2;
    const Medium med = disk_medium(1.0, radius);
    const double per = 2.0 * kPi * radius;
    std::vector<double> tvs;
    for (int n : {32, 64, 128}) {
        const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, n, n);
        const VecR chi = inclusion_indicator(mesh, med, 0);
        CHECK(chi.maxCoeff() == 1.0);
        CHECK(chi.minCoeff() == 0.0);
        tvs.push_back(total_variation(mesh, chi));
        CHECK(tvs.back() > per / 1.5);
        CHECK(tvs.back() < per * 1.5);
    }
    const auto [lo, hi] = std::minmax_element(tvs.begin(), tvs.end());
    CHECK(*hi / *lo <= 1.5);
}

TEST_CASE("projection onto modes is an orthogonal projection") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 24, 24);
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    const WeightSpec spec;
    const VecR mu = weight_field(mesh, VecR::Ones(n), spec);
    const SpectralBasis basis = compute_eigenbasis(mesh, mu, 4);
    const SparseReal M = assemble_mass(mesh);

    const VecR v = interpolate(mesh, [](Point p) { return std::sin(3.0 * p.x) * p.y; });
    const Projection pv = project(M, basis.modes, v);

    // Contraction in the M-norm.
    CHECK(pv.field.dot(M * pv.field) <= v.dot(M * v) * (1.0 + 1e-12));
    // Idempotence.
    const Projection ppv = project(M, basis.modes, pv.field);
    CHECK((ppv.field - pv.field).cwiseAbs().maxCoeff() < 1e-10);
    // Deflation: the residual has no component left along the modes.
    const Projection res = project(M, basis.modes, VecR(v - pv.field));
    CHECK(res.coefficients.cwiseAbs().maxCoeff() < 1e-10);
    // Coefficients are the M-inner products against the modes.
    for (std::size_t k = 0; k < basis.modes.size(); ++k)
        CHECK(pv.coefficients[static_cast<Eigen::Index>(k)] ==
              doctest::Approx(basis.modes[k].dot(M * v)).epsilon(1e-10));
}

TEST_CASE("l2 norm restricted to a rectangle") {
    const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, 16, 16);
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    const Rect strip{0.0, 0.0, 1.0, 0.25};
    CHECK(l2_norm_sq_on_rect(mesh, VecR::Ones(n), strip) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(l2_norm_sq_on_rect(mesh, VecR::Zero(n), strip) == 0.0);
}

TEST_CASE("estimate verification passes and its constant is stable") {
    // Square inclusion: the theorem inequalities hold and the measured
    // eigenvalue constant C varies by <= 10% across eps and one refinement.
    std::vector<double> cs;
    for (double eps : {1e-6, 1e-8})
        for (int n : {48, 96}) {
            const Mesh mesh = build_rect_mesh({0.0, 0.0, 1.0, 1.0}, n, n);
            const Medium med = square_medium(1.8);
            WeightSpec spec;
            spec.epsilon = eps;
            const double delta = 2.0 * mesh.h_max();
            const EstimateReport rep = verify_estimates(med, mesh, spec, delta, 1);
            CHECK(rep.all_pass);
            cs.push_back(rep.constant_c);
        }
    const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
    CHECK(*hi / *lo <= 1.10);
}
