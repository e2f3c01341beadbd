#ifndef SMVBS_KERNELS_HPP
#define SMVBS_KERNELS_HPP

// Elliptical generator functions h(.) with their dimension-dependent
// normalizing constants. A generator owns its constant: the standard
// spherical density on `dims` coordinates is x -> exp(log_h(|x|^2)) and
// integrates to one, so density formulas elsewhere stay constant-free.

#include <cmath>
#include <numbers>
#include <string>

#include "smvbs/errors.hpp"
#include "smvbs/quadrature.hpp"

namespace smvbs {

enum class GeneratorKind { Gaussian, Kotz, PearsonVII, PearsonII };

inline std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::Gaussian: return "gaussian";
        case GeneratorKind::Kotz: return "kotz";
        case GeneratorKind::PearsonVII: return "pearson7";
        case GeneratorKind::PearsonII: return "pearson2";
    }
    return "?";
}

struct KotzParams {
    double N = 1.0;   // eigenvalue-power parameter, needs 2N - 2 + dims > 0
    double r = 0.5;   // exponential rate, > 0
    double s = 1.0;   // exponential power, > 0
};
struct PearsonVIIParams {
    double nu = 2.0;     // tail index, needs nu > dims/2
    double theta = 1.0;  // scale, > 0
};
struct PearsonIIParams {
    double gamma = 1.0;  // shape, > -1; support of h is [0, 1)
};

template <typename Scalar = double>
class GeneratorT {
  public:
    GeneratorKind kind() const { return kind_; }
    int dims() const { return dims_; }

    // log h(u) including the normalizing constant.
    Scalar log_h(Scalar u) const {
        if (u < Scalar(0)) throw DomainError("log_h: negative argument");
        switch (kind_) {
            case GeneratorKind::Gaussian:
                return log_norm_ - Scalar(0.5) * u;
            case GeneratorKind::Kotz:
                return log_norm_ + Scalar(kotz_.N - 1.0) * std::log(u) -
                       Scalar(kotz_.r) * std::pow(u, Scalar(kotz_.s));
            case GeneratorKind::PearsonVII:
                return log_norm_ - Scalar(p7_.nu) * std::log1p(u / Scalar(p7_.theta));
            case GeneratorKind::PearsonII:
                if (u >= Scalar(1)) throw DomainError("log_h: Pearson II support is [0,1)");
                return log_norm_ + Scalar(p2_.gamma) * std::log1p(-u);
        }
        throw DomainError("log_h: unknown kind");
    }

    // Density of the squared radius U = |X|^2 of the induced spherical law,
    // used by samplers and radial checks: f_U(u) = s_{d} u^{d/2-1} h(u)
    // with s_d the unit-sphere area over 2.
    Scalar log_radial_sq_density(Scalar u) const {
        const Scalar d = Scalar(dims_);
        const Scalar log_half_sphere = Scalar(0.5) * d * std::log(Scalar(std::numbers::pi)) -
                                       Scalar(std::lgamma(0.5 * dims_));
        return log_half_sphere + (Scalar(0.5) * d - Scalar(1)) * std::log(u) + log_h(u);
    }

    static GeneratorT gaussian(int dims) {
        GeneratorT g(GeneratorKind::Gaussian, dims);
        g.log_norm_ = -0.5 * dims * std::log(2.0 * std::numbers::pi);
        return g;
    }

    static GeneratorT kotz(int dims, const KotzParams& p) {
        if (!(p.r > 0) || !(p.s > 0)) throw DomainError("kotz: need r > 0 and s > 0");
        const double a = (2.0 * p.N - 2.0 + dims) / (2.0 * p.s);
        if (!(a > 0)) throw DomainError("kotz: need 2N - 2 + dims > 0");
        GeneratorT g(GeneratorKind::Kotz, dims);
        g.kotz_ = p;
        // 1 / c = (2 pi^{d/2}/Gamma(d/2)) * Gamma(a) / (2 s r^a)
        g.log_norm_ = -(0.5 * dims * std::log(std::numbers::pi) - std::lgamma(0.5 * dims) +
                        std::lgamma(a) - std::log(p.s) - a * std::log(p.r));
        g.check_radial_mass();
        return g;
    }

    static GeneratorT pearson_vii(int dims, const PearsonVIIParams& p) {
        if (!(p.nu > 0.5 * dims)) throw DomainError("pearson_vii: need nu > dims/2");
        if (!(p.theta > 0)) throw DomainError("pearson_vii: need theta > 0");
        GeneratorT g(GeneratorKind::PearsonVII, dims);
        g.p7_ = p;
        g.log_norm_ = std::lgamma(p.nu) - std::lgamma(p.nu - 0.5 * dims) -
                      0.5 * dims * std::log(std::numbers::pi * p.theta);
        g.check_radial_mass();
        return g;
    }

    static GeneratorT pearson_ii(int dims, const PearsonIIParams& p) {
        if (!(p.gamma > -1.0)) throw DomainError("pearson_ii: need gamma > -1");
        GeneratorT g(GeneratorKind::PearsonII, dims);
        g.p2_ = p;
        g.log_norm_ = std::lgamma(0.5 * dims + p.gamma + 1.0) - std::lgamma(p.gamma + 1.0) -
                      0.5 * dims * std::log(std::numbers::pi);
        g.check_radial_mass();
        return g;
    }

    const KotzParams& kotz_params() const { return kotz_; }
    const PearsonVIIParams& pearson_vii_params() const { return p7_; }
    const PearsonIIParams& pearson_ii_params() const { return p2_; }

    // Numerical radial mass, integral of the squared-radius density over the
    // support. Exactly 1 for a correct constant.
    double radial_mass() const {
        auto f = [this](double u) { return std::exp(log_radial_sq_density(u)); };
        if (kind_ == GeneratorKind::PearsonII)
            return integrate(f, 0.0, 1.0, 1e-12, 1e-10).value;
        return integrate_to_infinity(f, 0.0, 1e-12, 1e-10).value;
    }

  private:
    GeneratorT(GeneratorKind k, int dims) : kind_(k), dims_(dims) {
        if (dims < 1) throw DomainError("generator: dims must be >= 1");
    }

    void check_radial_mass() const {
        double mass;
        try {
            mass = radial_mass();
        } catch (const QuadratureFailure&) {
            throw NotIntegrable("generator: radial integrability check did not converge");
        }
        if (std::abs(mass - 1.0) > 1e-6)
            throw NotIntegrable("generator: radial mass " + std::to_string(mass) + " != 1");
    }

    GeneratorKind kind_;
    int dims_;
    Scalar log_norm_ = 0;
    KotzParams kotz_;
    PearsonVIIParams p7_;
    PearsonIIParams p2_;
};
using Generator = GeneratorT<double>;

}  // namespace smvbs

#endif  // SMVBS_KERNELS_HPP
