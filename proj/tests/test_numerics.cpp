#include "supctl/numerics.hpp"

#include <cmath>

#include "doctest.h"
#include "supctl/random.hpp"

using namespace supctl;

namespace {

Matrix random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    std::uint64_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = gaussian(seed, k++);
        }
    }
    return m;
}

}  // namespace

TEST_CASE("spectral_radius on reference inputs") {
    CHECK(spectral_radius(Matrix::Identity(2, 2)) == doctest::Approx(1.0));

    Matrix nilpotent(2, 2);
    nilpotent << 0, 1, 0, 0;
    CHECK(spectral_radius(nilpotent) == doctest::Approx(0.0));

    Matrix defective(2, 2);  // double eigenvalue 0.5
    defective << 0, 1, -0.25, 1;
    CHECK(spectral_radius(defective) == doctest::Approx(0.5).epsilon(1e-7));

    CHECK_THROWS_AS((void)spectral_radius(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("spectral radius never exceeds the largest singular value") {
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix m = random_matrix(500 + trial, 5, 5);
        const double sigma_max = m.jacobiSvd().singularValues().maxCoeff();
        CHECK(spectral_radius(m) <= sigma_max + 1e-9);
    }
}

TEST_CASE("min_singular_value on reference inputs") {
    Matrix d(2, 2);
    d << 3, 0, 0, 2;
    CHECK(min_singular_value(d) == doctest::Approx(2.0));

    Matrix col(2, 1);
    col << 1, 1;
    CHECK(min_singular_value(col) == doctest::Approx(std::sqrt(2.0)));

    // Wide matrices are never injective on their column space.
    Matrix wide(1, 2);
    wide << 1, 0;
    CHECK(min_singular_value(wide) == 0.0);
}

TEST_CASE("min_singular_value matches the Gram-eigenvalue oracle on a 4x3") {
    // Frozen from scripts/oracles/numerics_reference.py (eigvalsh of M^T M).
    Matrix m(4, 3);
    m << 0.3251, 1.8826, -0.6637,
        -0.8801, -0.033, -1.5639,
        1.6969, -0.0029, -1.8688,
        -1.3814, -0.6887, 0.7854;
    CHECK(min_singular_value(m) == doctest::Approx(1.7385989867290357).epsilon(1e-12));
}

TEST_CASE("leading_singular_triple on reference inputs") {
    Matrix d(2, 2);
    d << 2, 0, 0, 1;
    auto t = leading_singular_triple(d);
    CHECK(t.sigma == doctest::Approx(2.0));
    CHECK(t.u[0] == doctest::Approx(1.0));
    CHECK(t.u[1] == doctest::Approx(0.0));
    CHECK(t.v[0] == doctest::Approx(1.0));

    Matrix shift(2, 2);
    shift << 0, 3, 0, 0;
    t = leading_singular_triple(shift);
    CHECK(t.sigma == doctest::Approx(3.0));
    CHECK(t.u[0] == doctest::Approx(1.0));
    CHECK(t.v[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)leading_singular_triple(Matrix::Zero(3, 2)), DegenerateInputError);
}

TEST_CASE("leading_singular_triple matches the frozen 3x5 oracle") {
    Matrix m(3, 5);
    m << 1.6816, -0.5445, 0.6322, -0.3407, 0.945,
        -0.6022, -0.4282, 0.2752, 1.0531, -1.9455,
        -0.4689, 0.1496, 0.7872, 1.6981, -1.4771;
    auto t = leading_singular_triple(m);
    CHECK(t.sigma == doctest::Approx(3.5335364716538193).epsilon(1e-12));
    CHECK(t.u[0] == doctest::Approx(0.41614172231390922).epsilon(1e-9));
    CHECK(t.u[1] == doctest::Approx(-0.63981043155895989).epsilon(1e-9));
    CHECK(t.u[2] == doctest::Approx(-0.64611816149830581).epsilon(1e-9));
    CHECK(t.v[0] == doctest::Approx(0.39281965226321214).epsilon(1e-9));
    CHECK(t.v[4] == doctest::Approx(0.73365204500646353).epsilon(1e-9));
}

TEST_CASE("leading triple satisfies the bilinear identity and dominates random directions") {
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_matrix(900 + trial, 4, 6);
        const auto t = leading_singular_triple(m);
        CHECK(t.u.norm() == doctest::Approx(1.0));
        CHECK(t.v.norm() == doctest::Approx(1.0));
        CHECK(t.u.transpose() * m * t.v == doctest::Approx(t.sigma).epsilon(1e-10));
        // u^T M = sigma v^T (defining property of the leading pair)
        CHECK((m.transpose() * t.u - t.sigma * t.v).norm() == doctest::Approx(0.0).epsilon(1e-9));
        for (int probe = 0; probe < 200; ++probe) {
            Vector w = random_matrix(7000 + 200 * trial + probe, 6, 1).col(0);
            w.normalize();
            CHECK((m * w).norm() <= t.sigma + 1e-9);
        }
    }
}

TEST_CASE("pseudo_inverse on reference inputs") {
    Matrix col(2, 1);
    col << 1, 1;
    const Matrix pinv = pseudo_inverse(col);
    CHECK(pinv.rows() == 1);
    CHECK(pinv.cols() == 2);
    CHECK(pinv(0, 0) == doctest::Approx(0.5));
    CHECK(pinv(0, 1) == doctest::Approx(0.5));

    CHECK((pseudo_inverse(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() ==
          doctest::Approx(0.0));
}

TEST_CASE("pseudo_inverse truncates singular values below tol") {
    Matrix m(2, 2);
    m << 1, 0, 0, 1e-14;
    const Matrix pinv = pseudo_inverse(m);  // default tol 1e-10 * sigma_max
    CHECK(pinv(0, 0) == doctest::Approx(1.0));
    CHECK(pinv(1, 1) == 0.0);

    // explicit tol below the small value keeps it
    const Matrix pinv_keep = pseudo_inverse(m, 1e-16);
    CHECK(pinv_keep(1, 1) == doctest::Approx(1e14));
}

TEST_CASE("pseudo_inverse satisfies the Penrose conditions on random shapes") {
    const Eigen::Index shapes[][2] = {{6, 3}, {3, 6}, {12, 8}, {5, 5}, {8, 12}};
    for (int s = 0; s < 5; ++s) {
        const Matrix m = random_matrix(1300 + s, shapes[s][0], shapes[s][1]);
        const Matrix p = pseudo_inverse(m);
        CHECK((m * p * m - m).norm() == doctest::Approx(0.0).epsilon(1e-9));
        CHECK((p * m * p - p).norm() == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(((m * p).transpose() - m * p).norm() == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(((p * m).transpose() - p * m).norm() == doctest::Approx(0.0).epsilon(1e-9));
    }
    // full column rank: left inverse
    const Matrix tall = random_matrix(1401, 6, 3);
    CHECK((pseudo_inverse(tall) * tall - Matrix::Identity(3, 3)).norm() ==
          doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("matrix_power on reference inputs") {
    const Matrix a = random_matrix(1500, 3, 3);
    CHECK((matrix_power(a, 0) - Matrix::Identity(3, 3)).norm() == 0.0);

    Matrix jordan(2, 2);
    jordan << 1, 1, 0, 1;
    const Matrix j3 = matrix_power(jordan, 3);
    CHECK(j3(0, 0) == doctest::Approx(1.0));
    CHECK(j3(0, 1) == doctest::Approx(3.0));
    CHECK(j3(1, 0) == doctest::Approx(0.0));
    CHECK(j3(1, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS((void)matrix_power(Matrix::Zero(2, 3), 2), DimensionError);
}

TEST_CASE("matrix_power agrees with naive repeated multiplication at k = 7") {
    const Matrix a = 0.7 * random_matrix(1600, 4, 4);
    Matrix naive = Matrix::Identity(4, 4);
    for (int i = 0; i < 7; ++i) {
        naive = naive * a;
    }
    CHECK((matrix_power(a, 7) - naive).norm() == doctest::Approx(0.0).epsilon(1e-12));
    // additivity of exponents
    CHECK((matrix_power(a, 3) * matrix_power(a, 4) - matrix_power(a, 7)).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("hinf_norm on reference inputs") {
    // memoryless pass-through: gain 1 at every frequency
    CHECK(hinf_norm(Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Identity(2, 2)) ==
          doctest::Approx(1.0).epsilon(1e-9));

    // scalar lag 1/(z - 0.5): peak 2 at theta = 0
    Matrix one(1, 1), half(1, 1);
    one << 1;
    half << 0.5;
    CHECK(hinf_norm(one, half, one) == doctest::Approx(2.0).epsilon(1e-9));

    Matrix unstable(1, 1);
    unstable << 1.0;
    CHECK_THROWS_AS((void)hinf_norm(one, unstable, one), InstabilityError);
}

TEST_CASE("hinf_norm matches the dense-grid oracle on a frozen 3x3 system") {
    // Frozen from scripts/oracles/numerics_reference.py (1e6-point grid).
    Matrix a(3, 3), b(3, 2), c(2, 3);
    a << -0.146898, -0.817764, 0.774854,
        0.66059, -0.234774, 0.35734,
        -0.075792, 0.153146, -0.179862;
    b << -0.2102, 0.414,
        -0.5669, -0.9191,
        -0.7473, -0.82;
    c << 0.3231, -0.4875, -0.4309,
        0.3152, -0.6152, -0.2262;
    CHECK(hinf_norm(c, a, b) == doctest::Approx(1.7111310391975842).epsilon(1e-6));
}

TEST_CASE("hinf_norm dominates the dc gain") {
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = random_matrix(1700 + trial, 3, 3);
        a *= 0.6 / std::max(1e-9, spectral_radius(a));
        const Matrix b = random_matrix(1800 + trial, 3, 2);
        const Matrix c = random_matrix(1900 + trial, 2, 3);
        const Matrix dc = c * (Matrix::Identity(3, 3) - a).inverse() * b;
        CHECK(hinf_norm(c, a, b) >= dc.jacobiSvd().singularValues()(0) - 1e-9);
    }
}

TEST_CASE("dlyap on reference inputs") {
    Matrix half(1, 1), one(1, 1);
    half << 0.5;
    one << 1;
    CHECK(dlyap(half, one)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));

    const Matrix q = random_matrix(2000, 3, 3);
    CHECK((dlyap(Matrix::Zero(3, 3), q) - 0.5 * (q + q.transpose())).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));

    Matrix marginal(1, 1);
    marginal << 1.0;
    CHECK_THROWS_AS((void)dlyap(marginal, one), InstabilityError);
}

TEST_CASE("dlyap matches the vectorized-solve oracle on a frozen 3x3") {
    Matrix a(3, 3), q(3, 3), expected(3, 3);
    a << 0.155844, -0.060142, 0.134025,
        -0.639189, 0.127189, 0.682483,
        -0.150458, 0.369275, -0.364718;
    q << 1.218393, -0.083295, 0.254616,
        -0.083295, 0.656864, 0.593316,
        0.254616, 0.593316, 0.982201;
    expected << 1.8677508632565381, -0.42685758544594071, 0.035745173134505634,
        -0.42685758544594066, 0.90658627723798502, 0.64019401867714443,
        0.035745173134505544, 0.64019401867714432, 1.1969508529458674;
    const Matrix p = dlyap(a, q);
    CHECK((p - expected).norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("dlyap residual vanishes and P inherits symmetry") {
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = random_matrix(2100 + trial, 4, 4);
        a *= 0.75 / std::max(1e-9, spectral_radius(a));
        Matrix q = random_matrix(2200 + trial, 4, 4);
        q = (q * q.transpose()).eval();
        const Matrix p = dlyap(a, q);
        CHECK((a.transpose() * p * a - p + q).norm() == doctest::Approx(0.0).epsilon(1e-9));
        CHECK((p - p.transpose()).norm() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues().minCoeff() >= -1e-10);
    }
}
