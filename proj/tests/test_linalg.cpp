#include <random>

#include "doctest.h"
#include "smvbs/linalg.hpp"

using namespace smvbs;

namespace {

Matrix random_matrix(int n, int m, std::mt19937_64& eng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = normal(eng);
    return a;
}

Matrix random_rank_deficient(int n, int m, int q, std::mt19937_64& eng) {
    return random_matrix(n, q, eng) * random_matrix(q, m, eng);
}

double penrose_residual(const Matrix& a, const Matrix& x) {
    const double scale = 1.0 + a.norm() + x.norm();
    double r = (a * x * a - a).norm() / scale;
    r = std::max(r, (x * a * x - x).norm() / scale);
    r = std::max(r, ((a * x) - (a * x).transpose()).norm() / scale);
    r = std::max(r, ((x * a) - (x * a).transpose()).norm() / scale);
    return r;
}

}  // namespace

TEST_CASE("thin_svd rejects repeated singular values") {
    Matrix eye = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(thin_svd(eye), DegenerateSpectrum);
}

TEST_CASE("thin_svd axis-aligned") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 3.0;
    const ThinSvd svd = thin_svd(a);
    CHECK(svd.rank() == 1);
    CHECK(svd.values[0] == doctest::Approx(3.0));
    CHECK(std::abs(svd.left(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(svd.right(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("thin_svd rank-1 Gram example") {
    Matrix a(2, 2);
    a << 1, 2, 2, 4;
    const ThinSvd svd = thin_svd(a);
    CHECK(svd.rank() == 1);
    CHECK(svd.values[0] == doctest::Approx(5.0));
    // trace(A'A) = sum of squared singular values
    CHECK((a.transpose() * a).trace() == doctest::Approx(25.0));
    CHECK((svd.reconstruct() - a).norm() < 1e-9 * a.norm());
}

TEST_CASE("moore_penrose basics") {
    CHECK((moore_penrose(Matrix(Matrix::Identity(3, 3))) - Matrix::Identity(3, 3)).norm() < 1e-12);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    Matrix dp = moore_penrose(d);
    CHECK(dp(0, 0) == doctest::Approx(0.5));
    CHECK(dp(1, 1) == doctest::Approx(0.0));
    Matrix ones(2, 2);
    ones << 1, 1, 1, 1;
    Matrix op = moore_penrose(ones);
    CHECK(op(0, 0) == doctest::Approx(0.25));
    CHECK(penrose_residual(ones, op) < 1e-10);
}

TEST_CASE("Penrose conditions on random rank-deficient matrices") {
    std::mt19937_64 eng(1234);
    const int shapes[3][3] = {{3, 2, 1}, {4, 3, 2}, {5, 5, 3}};
    for (const auto& sh : shapes) {
        for (int t = 0; t < 67; ++t) {
            const Matrix a = random_rank_deficient(sh[0], sh[1], sh[2], eng);
            const Matrix x = moore_penrose(a);
            CHECK(penrose_residual(a, x) < 1e-8);
            CHECK((moore_penrose(x) - a).norm() < 1e-8 * (1.0 + a.norm()));
        }
    }
}

TEST_CASE("PsdRankQ power and pinv") {
    Matrix u(2, 1);
    u << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    Vector v(1);
    v << 4.0;
    PsdRankQ a(2, u, v);
    const PsdRankQ half = a.power(0.5);
    CHECK(half.eigenvalues()[0] == doctest::Approx(2.0));
    CHECK((half.reconstruct() * half.reconstruct() - a.reconstruct()).norm() < 1e-10);
    CHECK((a.pinv() - moore_penrose(a.reconstruct())).norm() < 1e-10);
    CHECK((a.power(1.0).reconstruct() - a.reconstruct()).norm() < 1e-12);
}

TEST_CASE("psd_power of random PSD matrices") {
    std::mt19937_64 eng(99);
    for (int t = 0; t < 20; ++t) {
        const Matrix g = random_matrix(4, 3, eng);
        const PsdRankQ a = PsdRankQ::from_dense(Matrix(g.transpose() * g));
        const Matrix root = a.power(0.5).reconstruct();
        CHECK((root * root - a.reconstruct()).norm() < 1e-8 * (1.0 + a.reconstruct().norm()));
        CHECK((a.power(-1.0).reconstruct() - moore_penrose(a.reconstruct())).norm() < 1e-8);
    }
}

TEST_CASE("mv_gamma_ln") {
    CHECK(mv_gamma_ln(1, 1.0) == doctest::Approx(0.0));
    CHECK(mv_gamma_ln(2, 1.5) == doctest::Approx(std::log(std::numbers::pi / 2.0)));
    CHECK_THROWS_AS(mv_gamma_ln(2, 0.5), DomainError);
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> unif(0.1, 8.0);
    for (int t = 0; t < 20; ++t) {
        const double a = unif(eng);
        CHECK(mv_gamma_ln(1, a) == doctest::Approx(std::lgamma(a)).epsilon(1e-12));
    }
}

TEST_CASE("stiefel_log_volume") {
    CHECK(stiefel_log_volume(1, 2) == doctest::Approx(std::log(std::numbers::pi)));
    CHECK(stiefel_log_volume(1, 2, true) == doctest::Approx(std::log(2.0 * std::numbers::pi)));
    CHECK(stiefel_log_volume(2, 2) == doctest::Approx(std::log(std::numbers::pi)));
    CHECK_THROWS_AS(stiefel_log_volume(3, 2), DomainError);
}
