#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "smvbs/io.hpp"
#include "smvbs/stats.hpp"
#include "smvbs/validation.hpp"

using namespace smvbs;

namespace {

std::string temp_file(const std::string& name, const std::string& contents) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << contents;
    return path;
}

}  // namespace

TEST_CASE("incomplete gamma and chi-square tails") {
    // P(1/2, x) = erf(sqrt(x))
    for (double x : {0.1, 0.5, 1.0, 3.0}) {
        CHECK(gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
    }
    CHECK(gamma_p(2.5, 0.0) == doctest::Approx(0.0));
    CHECK(chi_square_sf(0.0, 4) == doctest::Approx(1.0));
    // chi2(2) survival is exp(-x/2)
    CHECK(chi_square_sf(3.0, 2) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
}

TEST_CASE("Kolmogorov distribution survival") {
    CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.2699996716773).epsilon(1e-9));
    CHECK(kolmogorov_sf(0.0) == doctest::Approx(1.0));
    CHECK(kolmogorov_sf(5.0) < 1e-20);
}

TEST_CASE("KS test accepts uniform draws against the uniform CDF") {
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> draws(5000);
    for (auto& d : draws) d = unif(eng);
    const KsResult ks = ks_test(draws, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(ks.p_value > 0.001);
    // shifted draws must be rejected decisively
    for (auto& d : draws) d = 0.5 * d;
    const KsResult bad = ks_test(draws, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(bad.p_value < 1e-10);
}

TEST_CASE("chi-square goodness of fit on matching counts") {
    std::vector<double> expected(20, 50.0);
    std::vector<double> observed(20, 50.0);
    observed[3] = 55;
    observed[7] = 45;
    const ChiSquareResult r = chi_square_gof(observed, expected, 1);
    CHECK(r.dof == 19);
    CHECK(r.p_value > 0.5);
    CHECK_THROWS_AS(chi_square_gof(observed, std::vector<double>(20, 0.0), 1), DomainError);
}

TEST_CASE("percentile") {
    std::vector<double> xs = {5, 1, 4, 2, 3};
    CHECK(percentile(xs, 0.0) == doctest::Approx(1.0));
    CHECK(percentile(xs, 100.0) == doctest::Approx(5.0));
    CHECK(percentile(xs, 50.0) == doctest::Approx(3.0));
}

TEST_CASE("CSV round trip and rejection of malformed files") {
    Matrix a(2, 3);
    a << 1.5, -2.25, 3.0e-3, 4.0, 5.5, -6.125;
    const auto path = (std::filesystem::temp_directory_path() / "mat_roundtrip.csv").string();
    write_csv_matrix(path, a);
    const Matrix b = read_csv_matrix(path);
    CHECK((a - b).norm() == 0.0);
    std::remove(path.c_str());

    const auto ragged = temp_file("ragged.csv", "1,2,3\n4,5\n");
    CHECK_THROWS_AS(read_csv_matrix(ragged), ConfigError);
    std::remove(ragged.c_str());
    const auto junk = temp_file("junk.csv", "1,2\n3,abc\n");
    CHECK_THROWS_AS(read_csv_matrix(junk), ConfigError);
    std::remove(junk.c_str());
}

TEST_CASE("run config parsing") {
    const std::string good = R"({
      "model": {
        "n": 2,
        "xi2": {"isotropic": {"dim": 3, "value": 0.25}},
        "beta": {"isotropic": {"dim": 3, "value": 1.0}},
        "kernel": {"kind": "gaussian"}
      },
      "univariate": {"alpha": 0.5, "beta": 1.0}
    })";
    const auto path = temp_file("cfg_good.json", good);
    const RunConfig cfg = RunConfig::from_file(path);
    std::remove(path.c_str());
    REQUIRE(cfg.model.has_value());
    CHECK(cfg.model->n == 2);
    CHECK(cfg.model->m == 3);
    CHECK(cfg.model->s == 3);
    CHECK(cfg.model->p == 2);
    CHECK(cfg.model->xi.eigenvalues()[0] == doctest::Approx(0.5));  // sqrt of 0.25
    CHECK(cfg.model->h.dims() == 6);
    REQUIRE(cfg.univariate.has_value());
    CHECK(cfg.univariate->alpha == doctest::Approx(0.5));

    const auto bad_key = temp_file("cfg_bad1.json", R"({"model": {"n": 1,
      "xi2": {"isotropic": {"dim": 1, "value": 1.0}},
      "beta": {"isotropic": {"dim": 1, "value": 1.0}},
      "kernel": {"kind": "gaussian"}, "typo_key": 3}})");
    CHECK_THROWS_AS(RunConfig::from_file(bad_key), ConfigError);
    std::remove(bad_key.c_str());

    const auto bad_kernel = temp_file("cfg_bad2.json", R"({"univariate": {"alpha": 1.0,
      "beta": 1.0, "kernel": {"kind": "gaussian", "nu": 3}}})");
    CHECK_THROWS_AS(RunConfig::from_file(bad_kernel), ConfigError);
    std::remove(bad_kernel.c_str());

    const auto dense = temp_file("cfg_dense.json", R"({"model": {"n": 3,
      "xi2": {"dense": [[0.5, 0.1], [0.1, 0.3]]},
      "beta": {"dense": [[1.2, 0.2], [0.2, 0.9]]},
      "kernel": {"kind": "pearson7", "nu": 5.0, "theta": 2.0}}})");
    const RunConfig dcfg = RunConfig::from_file(dense);
    std::remove(dense.c_str());
    REQUIRE(dcfg.model.has_value());
    CHECK(dcfg.model->s == 2);
    CHECK((dcfg.model->xi.power(2.0).reconstruct() -
           (Matrix(2, 2) << 0.5, 0.1, 0.1, 0.3).finished()).norm() < 1e-10);
}

TEST_CASE("audit report JSON round trip") {
    AuditReport rep;
    rep.suite = "univ";
    rep.pass = true;
    rep.metrics = {{"mass", 1.0}, {"ks_p_value", 0.42}};
    const nlohmann::json j = rep.to_json();
    CHECK(j.at("schema") == 1);
    const AuditReport back = AuditReport::from_json(j);
    CHECK(back.suite == rep.suite);
    CHECK(back.pass == rep.pass);
    CHECK(back.metrics == rep.metrics);
}

TEST_CASE("batched Monte Carlo draws are identical for any thread count") {
    const GbsParams par(1, PsdRankQ::isotropic(1, 0.5), PsdRankQ::isotropic(1, 1.0),
                        Generator::gaussian(1));
    auto per_batch = [&par](const RngSpec& spec, int count) {
        GbsSampler sampler(par, spec);
        std::vector<double> out(static_cast<std::size_t>(count));
        for (auto& t : out) t = sampler.sample_t().eigenvalues()[0];
        return out;
    };
    const auto seq = val_detail::batched_draws(RngSpec{5, 0}, 2000, 1, per_batch);
    const auto par4 = val_detail::batched_draws(RngSpec{5, 0}, 2000, 4, per_batch);
    REQUIRE(seq.size() == par4.size());
    for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i] == par4[i]);
}

TEST_CASE("jacobian campaign smoke run") {
    const AuditReport rep = jacobian_campaign({{3, 2, 1, 1}}, 3, RngSpec{2, 0});
    CHECK(rep.suite == "jacobian");
    CHECK(rep.pass);
    CHECK(rep.metrics.at("p95_rel_error").get<double>() < 1e-3);
}
