#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "softland/errors.hpp"
#include "softland/sensitivity.hpp"

using namespace softland;

namespace {

const Trajectory& traj() {
    static const Trajectory t(TrajectorySpec{});
    return t;
}

const NominalAnalysis& nominal() {
    static const NominalAnalysis a = analyze_nominal(traj(), nominal_params());
    return a;
}

ControlParams from_vector(const Vector9d& v) {
    ControlParams c;
    for (std::size_t i = 0; i < kNumUncertain; ++i) c[i] = v(static_cast<Eigen::Index>(i));
    return c;
}

Matrix9d random_spd(std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Matrix9d a;
    for (Eigen::Index i = 0; i < 9; ++i)
        for (Eigen::Index j = 0; j < 9; ++j) a(i, j) = n01(rng);
    return a * a.transpose();
}

}  // namespace

TEST_CASE("step refinement of the sensitivity row") {
    const auto p = nominal_params();
    for (int k = 0; k < 10; ++k) {
        const double t = 3.5e-3 * (k + 0.5) / 10.0;
        const auto coarse = sensitivity_row(t, ControlParams::ones(), traj(), p, 1e-5);
        const auto fine = sensitivity_row(t, ControlParams::ones(), traj(), p, 1e-6);
        CAPTURE(t);
        CHECK((coarse - fine).norm() <= 1e-4 * fine.norm());
    }
}

TEST_CASE("sensitivity rows are finite and informative") {
    const auto& g = nominal().grid;
    REQUIRE(g.rows.size() == 701);
    for (const auto& row : g.rows) CHECK(row.allFinite());
    const auto mid = sensitivity_row(1.75e-3, ControlParams::ones(), traj(), nominal_params());
    CHECK(mid.allFinite());
    CHECK(mid.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("an infeasible probe names the component") {
    auto theta = ControlParams::ones();
    theta[1] = 1.0 / 15.0 + 3e-8;  // spring rest position just above the stroke start
    try {
        sensitivity_row(0.0, theta, traj(), nominal_params());
        FAIL("expected SensitivityError");
    } catch (const SensitivityError& e) {
        CHECK(e.component() == 1);
        CHECK(std::string(e.what()).find("theta_2") != std::string::npos);
    }
}

TEST_CASE("S_IS is the diagonal of the Fisher matrix") {
    const auto& a = nominal();
    for (Eigen::Index i = 0; i < 9; ++i) CHECK(a.s_is(i) == a.fisher.m(i, i));
    CHECK(integral_square_sensitivity(a.grid) == a.s_is);
    CHECK(a.fisher.m.trace() == doctest::Approx(a.s_is.sum()).epsilon(1e-12));
}

TEST_CASE("influence ranking at the nominal point") {
    const auto& s = nominal().s_is;
    std::vector<Eigen::Index> order(9);
    for (Eigen::Index i = 0; i < 9; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return s(x) < s(y); });
    const std::set<Eigen::Index> smallest{order[0], order[1]};
    CHECK(smallest == std::set<Eigen::Index>{3, 5});
    const double weak = std::max({s(6), s(7), s(8)});
    const double strong = std::min({s(0), s(1), s(2), s(4)});
    CHECK(weak < strong);
}

TEST_CASE("Fisher matrix under quadrature refinement") {
    const auto& a = nominal();
    SensitivityOptions fine;
    fine.n_nodes = 1401;
    const auto f2 = fisher_matrix(ControlParams::ones(), traj(), nominal_params(), fine);
    CHECK((f2.m - a.fisher.m).norm() < 1e-4 * a.fisher.m.norm());
    CHECK((a.fisher.m - a.fisher.m.transpose()).norm() <= 1e-12 * a.fisher.m.norm());
}

TEST_CASE("constant sensitivity gives a rank-one Fisher matrix") {
    Vector9d s;
    s << 1, -2, 3, 0.5, 0, 4, -1, 2, 0.25;
    SensitivityGrid g;
    for (int k = 0; k <= 100; ++k) {
        g.times.push_back(1e-3 + 2.5e-3 * k / 100.0);
        g.rows.push_back(s);
    }
    const auto f = fisher_matrix(g);
    const Matrix9d expected = 2.5e-3 * s * s.transpose();
    CHECK((f.m - expected).norm() <= 1e-13 * expected.norm());
}

TEST_CASE("eigendecomposition of a diagonal matrix") {
    Vector9d d;
    d << 3, 9, 1, 7, 5, 2, 8, 4, 6;
    const auto e = sym_eigen(Matrix9d(d.asDiagonal()));
    for (Eigen::Index k = 0; k < 9; ++k) {
        CHECK(e.values(k) == 9.0 - static_cast<double>(k));
        // The eigenvector of value v is the unit vector where d == v.
        Eigen::Index where = 0;
        for (Eigen::Index i = 0; i < 9; ++i) if (d(i) == e.values(k)) where = i;
        CHECK(e.vectors(where, k) == 1.0);
        CHECK(e.vectors.col(k).cwiseAbs().sum() == 1.0);
    }
}

TEST_CASE("Jacobi eigensolver against Eigen's reference solver") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix9d a = random_spd(rng);
        const auto e = sym_eigen(a);
        Eigen::SelfAdjointEigenSolver<Matrix9d> ref(a);
        const Vector9d ref_values = ref.eigenvalues().reverse();
        CHECK((e.values - ref_values).norm() <= 1e-10 * ref_values.norm());
        CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm() <= 1e-10 * a.norm());
        CHECK((e.vectors.transpose() * e.vectors - Matrix9d::Identity()).norm() <= 1e-12);
        for (Eigen::Index k = 0; k < 9; ++k) {
            const Vector9d ref_vec = ref.eigenvectors().col(8 - k);
            CHECK(std::abs(std::abs(ref_vec.dot(e.vectors.col(k))) - 1.0) < 1e-8);
            Eigen::Index big = 0;
            e.vectors.col(k).cwiseAbs().maxCoeff(&big);
            CHECK(e.vectors(big, k) > 0.0);
        }
    }
}

TEST_CASE("nominal Fisher eigenbasis invariants") {
    const auto& a = nominal();
    const auto& e = a.eigen;
    const auto& f = a.fisher.m;
    CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - f).norm() <= 1e-10 * f.norm());
    CHECK(e.values.sum() == doctest::Approx(f.trace()).epsilon(1e-12));
    CHECK(e.values.minCoeff() >= -1e-10 * f.trace());
    for (Eigen::Index k = 0; k + 1 < 9; ++k) CHECK(e.values(k) >= e.values(k + 1));
    CHECK((e.vectors.transpose() * e.vectors - Matrix9d::Identity()).norm() <= 1e-12);
}

TEST_CASE("subset reductions of Table II") {
    const auto& s = nominal().s_is;
    CHECK(make_subset_reduction(s, 9).free_indices == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(make_subset_reduction(s, 7).free_indices == std::vector<std::size_t>{0, 1, 2, 4, 6, 7, 8});
    CHECK(make_subset_reduction(s, 4).free_indices == std::vector<std::size_t>{0, 1, 2, 4});
    CHECK(make_subset_reduction(s, 2).free_indices == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(make_subset_reduction(s, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_subset_reduction(s, 10), std::invalid_argument);

    Vector9d tie = Vector9d::Ones();
    CHECK(make_subset_reduction(tie, 3).free_indices == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("orthogonal reductions") {
    const auto& e = nominal().eigen;
    const auto full = make_orthogonal_reduction(e, 9);
    CHECK((full.basis.transpose() * full.basis - Eigen::MatrixXd::Identity(9, 9)).norm() <= 1e-12);
    CHECK((full.basis * full.basis.transpose() - Eigen::MatrixXd::Identity(9, 9)).norm() <= 1e-12);
    const auto g = make_orthogonal_reduction(e, 2);
    REQUIRE(g.basis.cols() == 2);
    CHECK(g.basis.col(0) == Eigen::VectorXd(e.vectors.col(0)));
    CHECK(g.basis.col(1) == Eigen::VectorXd(e.vectors.col(1)));
    CHECK((g.basis.transpose() * g.basis - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-12);
    CHECK((g.phi_star - g.basis.transpose() * Eigen::VectorXd::Ones(9)).norm() <= 1e-15);
}

TEST_CASE("mapping between reduced and full parameters") {
    const auto& a = nominal();
    const auto g = make_orthogonal_reduction(a.eigen, 2);
    CHECK(theta_from_reduced(g, g.phi_star).theta == ControlParams::ones());
    CHECK((g.anchor() - g.phi_star).norm() == 0.0);

    const auto d = make_subset_reduction(a.s_is, 2);
    Eigen::VectorXd x(2);
    x << 1.05, 0.95;
    auto expected = ControlParams::ones();
    expected[1] = 1.05;
    expected[2] = 0.95;
    CHECK(theta_from_reduced(d, x).theta == expected);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> small(-0.02, 0.02);
    for (std::size_t r : {2u, 4u, 7u, 9u}) {
        for (const auto& red : {make_subset_reduction(a.s_is, r), make_orthogonal_reduction(a.eigen, r)}) {
            for (int k = 0; k < 20; ++k) {
                Eigen::VectorXd y = red.anchor();
                for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += small(rng);
                const auto m = theta_from_reduced(red, y);
                CHECK_FALSE(m.clamped);
                CHECK((reduced_from_theta(red, m.theta) - y).norm() <= 1e-12);
            }
        }
    }
}

TEST_CASE("full-rank reductions reach every interior theta") {
    const auto& a = nominal();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> box(0.71, 1.29);
    for (const auto& red : {make_subset_reduction(a.s_is, 9), make_orthogonal_reduction(a.eigen, 9)}) {
        for (int k = 0; k < 50; ++k) {
            ControlParams theta;
            for (auto& v : theta.theta) v = box(rng);
            const auto back = theta_from_reduced(red, reduced_from_theta(red, theta));
            CHECK_FALSE(back.clamped);
            for (std::size_t i = 0; i < kNumUncertain; ++i) CHECK(back.theta[i] == doctest::Approx(theta[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("clamping to the box") {
    const auto d = make_subset_reduction(nominal().s_is, 2);
    Eigen::VectorXd x(2);
    x << 1.6, 0.2;
    const auto m = theta_from_reduced(d, x);
    CHECK(m.clamped);
    CHECK(m.theta[1] == 1.3);
    CHECK(m.theta[2] == 0.7);
}

TEST_CASE("deviation functional") {
    const auto p = nominal_params();
    CHECK(deviation_D(ControlParams::ones(), traj(), p) == 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> box(0.7, 1.3);
    for (int k = 0; k < 100; ++k) {
        ControlParams theta;
        for (auto& v : theta.theta) v = box(rng);
        double d = 0.0;
        try {
            d = deviation_D(theta, traj(), p);
        } catch (const InfeasibleFlatnessError&) {
            continue;
        }
        CHECK(d >= 0.0);
    }
}

TEST_CASE("second-order agreement of D with the Fisher quadratic form") {
    const auto& a = nominal();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> radius(1e-4, 1e-3);
    for (int k = 0; k < 50; ++k) {
        Vector9d dir;
        for (Eigen::Index i = 0; i < 9; ++i) dir(i) = n01(rng);
        const Vector9d delta = radius(rng) * dir.normalized();
        const double d = deviation_D(from_vector(Vector9d::Ones() + delta), traj(), nominal_params());
        const double quad = 0.5 * delta.dot(a.fisher.m * delta);
        CHECK(std::abs(d - quad) <= 0.05 * d);
    }
}

TEST_CASE("deviation along eigenvectors scales with the eigenvalue") {
    const auto& a = nominal();
    const double eps = 1e-3;
    for (Eigen::Index i : {0, 1, 8}) {
        const Vector9d theta = Vector9d::Ones() + eps * a.eigen.vectors.col(i);
        const double d = deviation_D(from_vector(theta), traj(), nominal_params());
        CAPTURE(i);
        CHECK(d == doctest::Approx(0.5 * a.eigen.values(i) * eps * eps).epsilon(0.10));
    }
}

TEST_CASE("Fisher matrix is deterministic") {
    const auto f1 = fisher_matrix(ControlParams::ones(), traj(), nominal_params());
    const auto f2 = fisher_matrix(ControlParams::ones(), traj(), nominal_params());
    CHECK(f1.m == f2.m);
    CHECK(f1.m == nominal().fisher.m);
}
