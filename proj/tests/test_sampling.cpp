#include <random>

#include "doctest.h"
#include "smvbs/sampling.hpp"
#include "smvbs/stats.hpp"
#include "smvbs/validation.hpp"

using namespace smvbs;

TEST_CASE("bs_inverse_scalar fixed points and branches") {
    CHECK(bs_inverse_scalar(0.0) == doctest::Approx(1.0));
    CHECK(bs_inverse_scalar(1.5) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(bs_inverse_scalar(-1.5) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("bs_inverse_scalar solves d - 1/d = g and is monotone") {
    std::mt19937_64 eng(55);
    std::uniform_real_distribution<double> unif(-50.0, 50.0);
    double prev_g = -1e9, prev_d = 0.0;
    std::vector<double> gs(10000);
    for (auto& g : gs) g = unif(eng);
    std::sort(gs.begin(), gs.end());
    for (const double g : gs) {
        const double d = bs_inverse_scalar(g);
        CHECK(d > 0.0);
        CHECK(std::abs((d - 1.0 / d) - g) < 1e-10 * (1.0 + std::abs(g)));
        if (prev_g > -1e8 && g > prev_g) CHECK(d > prev_d);
        prev_g = g;
        prev_d = d;
    }
}

TEST_CASE("invert_bs_transform scalar case matches the explicit root") {
    const PsdRankQ delta = PsdRankQ::isotropic(1, std::sqrt(2.5));  // beta = 2.5
    Matrix y(1, 1);
    y << 0.8;
    const Matrix v = invert_bs_transform(y, delta);
    const double expected = std::sqrt(2.5) * (0.4 + std::sqrt(0.16 + 1.0));
    CHECK(v(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(invert_bs_transform(Matrix(Matrix::Zero(1, 1)), delta), DomainError);
}

TEST_CASE("round trip on random instances") {
    std::mt19937_64 eng(56);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    for (int t = 0; t < 200; ++t) {
        const Matrix y = val_detail::random_rank_p(3, 2, 2, eng) -
                         0.5 * val_detail::random_rank_p(3, 2, 2, eng);
        Vector bvals(2);
        bvals << unif(eng) + 2.1, unif(eng);  // strictly decreasing
        const PsdRankQ delta(2, Matrix(Matrix::Identity(2, 2)), bvals);
        Matrix v;
        try {
            v = invert_bs_transform(y, delta);
        } catch (const DegenerateSpectrum&) {
            continue;  // measure-zero tie in the random draw
        }
        const Matrix forward =
            v * delta.power(-1.0).reconstruct() - moore_penrose(v).transpose() * delta.reconstruct();
        CHECK((forward - y).norm() < 1e-8 * (1.0 + y.norm()));
    }
}

TEST_CASE("sampler determinism") {
    const GbsParams par(2, PsdRankQ::isotropic(3, 0.5), PsdRankQ::isotropic(3, 1.0),
                        Generator::gaussian(6));
    GbsSampler a(par, RngSpec{42, 7});
    GbsSampler b(par, RngSpec{42, 7});
    for (int k = 0; k < 5; ++k) {
        const PsdRankQ ta = a.sample_t();
        const PsdRankQ tb = b.sample_t();
        CHECK((ta.reconstruct() - tb.reconstruct()).norm() == 0.0);
    }
    GbsSampler c(par, RngSpec{42, 8});
    CHECK((a.sample_t().reconstruct() - c.sample_t().reconstruct()).norm() != 0.0);
}

TEST_CASE("elliptical draws stay in the scale column space when s < m") {
    std::mt19937_64 eng(57);
    const Matrix b = val_detail::random_orthonormal(3, 2, eng);
    Vector vals(2);
    vals << 2.0, 0.7;
    const PsdRankQ sigma(3, b, vals);  // Xi^2, rank 2 in m = 3
    std::mt19937_64 draw_eng = RngSpec{9, 0}.make_engine();
    const Matrix proj = Matrix::Identity(3, 3) - sigma.projector();
    const Generator h = Generator::gaussian(2 * 2);
    for (int k = 0; k < 50; ++k) {
        const Matrix y = sample_singular_elliptical(sigma, 2, h, draw_eng);
        CHECK((y * proj).norm() < 1e-12 * (1.0 + y.norm()));
    }
    CHECK_THROWS_AS(
        sample_singular_elliptical(sigma, 2, Generator::pearson_ii(4, {1.0}), draw_eng),
        UnsupportedKernel);
}

TEST_CASE("elliptical sample covariance is near identity for Xi = I") {
    const PsdRankQ sigma = PsdRankQ::isotropic(2, 1.0);
    std::mt19937_64 eng = RngSpec{11, 0}.make_engine();
    const Generator h = Generator::gaussian(4);
    const int draws = 20000;
    Matrix acc = Matrix::Zero(4, 4);
    for (int k = 0; k < draws; ++k) {
        const Matrix y = sample_singular_elliptical(sigma, 2, h, eng);
        Vector v(4);
        v << y(0, 0), y(0, 1), y(1, 0), y(1, 1);
        acc += v * v.transpose();
    }
    acc /= draws;
    // standard error of each covariance entry is about sqrt(2/draws) ~ 0.01
    CHECK((acc - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.045);
}

TEST_CASE("quadratic form of Gaussian draws is chi-square") {
    const PsdRankQ sigma = PsdRankQ::isotropic(2, 1.7);
    const PsdRankQ xi2inv = sigma.power(-1.0);
    std::mt19937_64 eng = RngSpec{13, 0}.make_engine();
    const Generator h = Generator::gaussian(6);
    std::vector<double> qs(10000);
    for (auto& q : qs) {
        const Matrix y = sample_singular_elliptical(sigma, 3, h, eng);
        q = (xi2inv.reconstruct() * y.transpose() * y).trace();
    }
    const KsResult ks = ks_test(qs, [](double x) { return gamma_p(3.0, 0.5 * x); });  // chi2(6)
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("GBS draws have rank p inside the scale column space") {
    std::mt19937_64 eng(58);
    const Matrix b = val_detail::random_orthonormal(3, 2, eng);
    Vector xv(2), bv(2);
    xv << 0.9, 0.4;
    bv << 1.6, 0.8;
    const GbsParams par(2, PsdRankQ(3, b, xv), PsdRankQ(3, b, bv), Generator::gaussian(4));
    REQUIRE(par.p == 2);
    GbsSampler sampler(par, RngSpec{21, 0});
    const Matrix off = Matrix::Identity(3, 3) - par.beta.projector();
    for (int k = 0; k < 25; ++k) {
        const PsdRankQ t = sampler.sample_t();
        CHECK(t.rank() == 2);
        CHECK((off * t.reconstruct()).norm() < 1e-10 * (1.0 + t.reconstruct().norm()));
    }
}

TEST_CASE("scalar draws have median near the scale parameter") {
    const double beta = 2.0;
    const GbsParams par(1, PsdRankQ::isotropic(1, 0.8), PsdRankQ::isotropic(1, beta),
                        Generator::gaussian(1));
    GbsSampler sampler(par, RngSpec{31, 0});
    std::vector<double> ts(20001);
    for (auto& t : ts) t = sampler.sample_t().eigenvalues()[0];
    std::nth_element(ts.begin(), ts.begin() + 10000, ts.end());
    // median standard error ~ 1/(2 f(beta) sqrt(n)) ~ 0.02 here
    CHECK(std::abs(ts[10000] - beta) < 0.1);
}
