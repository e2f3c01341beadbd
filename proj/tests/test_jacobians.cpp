#include <random>

#include "doctest.h"
#include "smvbs/jacobians.hpp"
#include "smvbs/validation.hpp"

using namespace smvbs;

namespace {

GFactorInput make_input(Vector values, int n, int m) {
    GFactorInput in;
    in.q = static_cast<int>(values.size());
    in.values = std::move(values);
    in.n = n;
    in.m = m;
    return in;
}

}  // namespace

TEST_CASE("g_factor hand-evaluated q=1 example") {
    Vector v(1);
    v << 4.0;
    const auto in = make_input(v, 2, 2);
    // Reciprocal: (3/4)^2 (5/4); Direct: 4^{-3} 3^2 5 — both 45/64.
    const double target = std::log(45.0 / 64.0);
    CHECK(g_factor_ln(in, GFactorForm::Reciprocal).log_abs == doctest::Approx(target).epsilon(1e-12));
    CHECK(g_factor_ln(in, GFactorForm::Direct).log_abs == doctest::Approx(target).epsilon(1e-12));
    CHECK_FALSE(g_factor_ln(in, GFactorForm::Direct).negative);
}

TEST_CASE("g_factor vanishes at a unit value") {
    Vector v(1);
    v << 1.0;
    const auto in = make_input(v, 2, 2);
    CHECK(g_factor_ln(in, GFactorForm::Reciprocal).is_zero());
    CHECK(g_factor_ln(in, GFactorForm::Direct).is_zero());
}

TEST_CASE("g_factor q=2 hand-evaluated") {
    Vector v(2);
    v << 9.0, 4.0;
    const auto in = make_input(v, 3, 3);
    const double target = std::log((1 - 1.0 / 9) * (1 - 1.0 / 9) * (1 + 1.0 / 9) *
                                   (1 - 0.25) * (1 - 0.25) * (1 + 0.25) * (1 - 1.0 / 36.0));
    CHECK(g_factor_ln(in, GFactorForm::Reciprocal).log_abs == doctest::Approx(target).epsilon(1e-12));
    CHECK(g_factor_ln(in, GFactorForm::Direct).log_abs == doctest::Approx(target).epsilon(1e-12));
}

TEST_CASE("two forms agree on 500 random inputs with values > 1") {
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> unif(1.05, 20.0);
    std::uniform_int_distribution<int> qdist(1, 4);
    for (int t = 0; t < 500; ++t) {
        const int q = qdist(eng);
        std::vector<double> vals(static_cast<std::size_t>(q));
        for (auto& x : vals) x = unif(eng);
        std::sort(vals.begin(), vals.end(), std::greater<double>());
        bool distinct = true;
        for (int i = 0; i + 1 < q; ++i)
            if (vals[static_cast<std::size_t>(i)] - vals[static_cast<std::size_t>(i + 1)] < 1e-3)
                distinct = false;
        if (!distinct) continue;
        Vector v(q);
        for (int i = 0; i < q; ++i) v[i] = vals[static_cast<std::size_t>(i)];
        const auto in = make_input(v, 2 + q, 2 + q);
        const double a = g_factor_ln(in, GFactorForm::Reciprocal).log_abs;
        const double b = g_factor_ln(in, GFactorForm::Direct).log_abs;
        CHECK(std::abs(a - b) < 1e-9);
    }
}

TEST_CASE("sign flag for a value below one with odd exponent") {
    Vector v(1);
    v << 0.5;
    const auto in = make_input(v, 2, 1);  // exponent n+m-2q = 1, (1 - 2) < 0
    const LogSigned g = g_factor_ln(in, GFactorForm::Reciprocal);
    CHECK(g.negative);
    const LogSigned d = g_factor_ln(in, GFactorForm::Direct);
    CHECK(d.negative);
    CHECK(g.log_abs == doctest::Approx(d.log_abs).epsilon(1e-12));
}

TEST_CASE("product identity prod_{i<j} d_i^-2 d_j^-2 = prod d_i^{-2(p-1)}") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> unif(0.2, 5.0);
    for (int t = 0; t < 50; ++t) {
        const int p = 4;
        std::vector<double> d(static_cast<std::size_t>(p));
        for (auto& x : d) x = unif(eng);
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < p; ++i) {
            rhs += -2.0 * (p - 1) * std::log(d[static_cast<std::size_t>(i)]);
            for (int j = i + 1; j < p; ++j)
                lhs += -2.0 * std::log(d[static_cast<std::size_t>(i)]) -
                       2.0 * std::log(d[static_cast<std::size_t>(j)]);
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("lemma1 scalar-style example") {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = 2.0;
    const LogSigned j = lemma1_log_jacobian(w, 2, 2, 1);
    CHECK(j.log_abs == doctest::Approx(std::log(45.0 / 64.0)).epsilon(1e-12));
}

TEST_CASE("lemma1 depends only on singular values") {
    std::mt19937_64 eng(3);
    const Matrix u = val_detail::random_orthonormal(3, 2, eng);
    const Matrix v = val_detail::random_orthonormal(2, 2, eng);
    Vector sv(2);
    sv << 2.5, 1.7;
    const Matrix w1 = u * sv.asDiagonal() * v.transpose();
    const Matrix w2 = (-u) * sv.asDiagonal() * (-v).transpose();
    CHECK(lemma1_log_jacobian(w1, 3, 2, 2).log_abs ==
          doctest::Approx(lemma1_log_jacobian(w2, 3, 2, 2).log_abs).epsilon(1e-12));
}

TEST_CASE("psd_eigen_log_factor examples") {
    Vector l1(1);
    l1 << 3.0;
    CHECK(psd_eigen_log_factor(l1, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(psd_eigen_log_factor(l1, 2) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    Vector l2(2);
    l2 << 3.0, 1.0;
    CHECK(psd_eigen_log_factor(l2, 2) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    Vector tied(2);
    tied << 2.0, 2.0;
    CHECK_THROWS_AS(psd_eigen_log_factor(tied, 2), DomainError);
}

TEST_CASE("FD oracle: identity map and scaling map") {
    std::mt19937_64 eng(17);
    const Matrix x = val_detail::random_rank_p(2, 2, 1, eng);
    const auto man = ManifoldSpec::rank_rect(2, 2, 1);
    const double id = numeric_manifold_jacobian([](const Matrix& w) { return w; }, x, man, 1e-5);
    CHECK(id == doctest::Approx(1.0).epsilon(1e-8));
    // c X on a 3-dimensional manifold scales volume by c^3.
    const double sc =
        numeric_manifold_jacobian([](const Matrix& w) { return Matrix(2.0 * w); }, x, man, 1e-5);
    CHECK(sc == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("FD oracle matches lemma1 on a random 3x2 rank-2 instance") {
    std::mt19937_64 eng(23);
    const Matrix w = val_detail::random_rank_p(3, 2, 2, eng);
    const double analytic = lemma1_log_jacobian(w, 3, 2, 2).log_abs;
    auto map = [](const Matrix& x) { return Matrix(x - moore_penrose(x).transpose()); };
    const double numeric =
        std::log(numeric_manifold_jacobian(map, w, ManifoldSpec::rank_rect(3, 2, 2), 1e-5));
    CHECK(std::abs(std::expm1(analytic - numeric)) < 1e-4);
}

TEST_CASE("theorem1 univariate factor") {
    // m = s = 1, Delta = sqrt(beta), Xi = alpha, scalar V = v: the Jacobian
    // reduces to (1 + beta/v^2)/(alpha sqrt(beta)).
    const PsdRankQ delta = PsdRankQ::isotropic(1, 1.0);  // beta = 1
    const PsdRankQ xi = PsdRankQ::isotropic(1, 0.5);
    Matrix v(1, 1);
    v << 2.0;
    const LogSigned j = theorem1_log_jacobian(v, delta, xi, 1);
    CHECK(std::exp(j.log_abs) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("theorem1 with unit shape matrix") {
    std::mt19937_64 eng(31);
    const PsdRankQ xi = PsdRankQ::isotropic(2, 1.0);
    Matrix bvec(2, 2);
    bvec << 1, 0, 0, 1;
    Vector bvals(2);
    bvals << 2.0, 0.5;
    const PsdRankQ beta(2, bvec, bvals);
    const PsdRankQ delta = beta.power(0.5);
    const Matrix v = val_detail::random_rank_p(3, 2, 2, eng);
    const LogSigned full = theorem1_log_jacobian(v, delta, xi, 3);
    const Matrix vdp = v * delta.power(-1.0).reconstruct();
    const ThinSvd svd = thin_svd(vdp);
    GFactorInput in;
    in.values = svd.values.array().square();
    in.n = 3;
    in.m = 2;
    in.q = 2;
    const double expected =
        g_factor_ln(in, GFactorForm::Reciprocal).log_abs - 1.5 * beta.log_det_nonzero();
    CHECK(full.log_abs == doctest::Approx(expected).epsilon(1e-10));
}
