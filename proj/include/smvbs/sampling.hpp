#ifndef SMVBS_SAMPLING_HPP
#define SMVBS_SAMPLING_HPP

// Exact sampling of the matrix variate GBS family: draw a singular
// elliptical Y, invert the matrix transform per singular value, and return
// V (square-root scale) or T = V'V.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "smvbs/distributions.hpp"
#include "smvbs/errors.hpp"
#include "smvbs/linalg.hpp"

namespace smvbs {

// Seed plus substream index; identical (seed, stream) reproduces identical
// draws bit-for-bit on one build.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::mt19937_64 make_engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream & 0xffffffffu),
                          static_cast<std::uint32_t>(stream >> 32)};
        return std::mt19937_64(seq);
    }

    RngSpec with_stream(std::uint64_t s) const { return {seed, s}; }
};

// Unique d > 0 with d - 1/d = g; strictly increasing in g. The negative
// branch is evaluated through the reciprocal to avoid cancellation.
inline double bs_inverse_scalar(double g) {
    if (!std::isfinite(g)) throw DomainError("bs_inverse_scalar: g must be finite");
    const double root = std::sqrt(0.25 * g * g + 1.0);
    if (g >= 0.0) return 0.5 * g + root;
    return 1.0 / (root - 0.5 * g);
}

// Recover V from Y = V Delta^+ - V'^+ Delta. The thin SVD of Y has
// nonnegative singular values g_i, each the image d - 1/d of two candidate
// scalars (d > 1 and its negated reciprocal); `signs`, when given, selects
// the branch per singular value (+1 for d > 1). The forward map of the
// result is checked against Y.
inline Matrix invert_bs_transform(const Matrix& y, const PsdRankQ& delta,
                                  const std::optional<std::vector<int>>& signs = std::nullopt) {
    if (y.cols() != delta.dim()) throw DomainError("invert_bs_transform: shape mismatch");
    const ThinSvd svd = thin_svd(y);
    const Eigen::Index q = svd.rank();
    if (signs && static_cast<Eigen::Index>(signs->size()) != q)
        throw DomainError("invert_bs_transform: need one sign per singular value");
    Matrix w = Matrix::Zero(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < q; ++i) {
        const double eps = signs ? static_cast<double>((*signs)[static_cast<std::size_t>(i)]) : 1.0;
        const double d = bs_inverse_scalar(eps * svd.values[i]);
        w += (eps * d) * svd.left.col(i) * svd.right.col(i).transpose();
    }
    const Matrix v = w * delta.reconstruct();
    const Matrix forward = v * delta.power(-1.0).reconstruct() - moore_penrose(v).transpose() * delta.reconstruct();
    if ((forward - y).norm() > 1e-6 * (1.0 + y.norm()))
        throw RoundTripError("invert_bs_transform: forward map does not reproduce Y");
    return v;
}

// Draw Y ~ singular elliptical with mean zero, row covariance I_n and column
// covariance sigma (= Xi^2, m x m of rank s): Y = X A' with A A' = sigma and
// X an n x s spherical draw. Gaussian and Pearson VII kernels only; Pearson
// VII uses the exact Gaussian / gamma scale mixture.
inline Matrix sample_singular_elliptical(const PsdRankQ& sigma, int n, const Generator& h,
                                         std::mt19937_64& eng) {
    const Eigen::Index s = sigma.rank();
    if (h.dims() != static_cast<int>(n * s))
        throw DomainError("sample_singular_elliptical: generator dims must equal n*rank");
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(n, s);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < s; ++j) x(i, j) = normal(eng);
    if (h.kind() == GeneratorKind::PearsonVII) {
        const auto& p = h.pearson_vii_params();
        std::gamma_distribution<double> gamma(p.nu - 0.5 * h.dims(), 2.0 / p.theta);
        x /= std::sqrt(gamma(eng));
    } else if (h.kind() != GeneratorKind::Gaussian) {
        throw UnsupportedKernel("sample_singular_elliptical: only Gaussian and Pearson VII");
    }
    const Matrix a = sigma.vectors() * sigma.eigenvalues().cwiseSqrt().asDiagonal();
    return x * a.transpose();
}

// Stateful sampler: one instance per thread, seeded via RngSpec substreams.
class GbsSampler {
  public:
    GbsSampler(GbsParams params, const RngSpec& rng)
        : par_(std::move(params)), eng_(rng.make_engine()) {}

    // One singular elliptical draw Y (premise of the transform).
    Matrix sample_y() { return sample_singular_elliptical(par_.xi.power(2.0), par_.n, par_.h, eng_); }

    // One square-root GBS draw V. The transform is 2^q-to-one over branch
    // sign patterns and each preimage is equally likely, so the inverse
    // picks an independent uniform sign per singular value.
    Matrix sample_v() {
        // Ties between singular values have measure zero; resample the rare
        // draws that trip the distinct-spectrum guard numerically.
        for (int attempt = 0; attempt < 64; ++attempt) {
            const Matrix y = sample_y();
            try {
                const Eigen::Index q = thin_svd(y).rank();
                std::vector<int> signs(static_cast<std::size_t>(q));
                std::uniform_int_distribution<int> coin(0, 1);
                for (auto& sgn : signs) sgn = coin(eng_) ? 1 : -1;
                return invert_bs_transform(y, par_.delta, signs);
            } catch (const DegenerateSpectrum&) {
            }
        }
        throw DegenerateSpectrum("GbsSampler: persistent singular value ties");
    }

    // One GBS draw T = V'V, rank p = min(n, s).
    PsdRankQ sample_t() {
        const Matrix v = sample_v();
        return PsdRankQ::from_dense(v.transpose() * v);
    }

    const GbsParams& params() const { return par_; }

  private:
    GbsParams par_;
    std::mt19937_64 eng_;
};

inline PsdRankQ sample_gbs(const GbsParams& params, const RngSpec& rng) {
    GbsSampler sampler(params, rng);
    return sampler.sample_t();
}

}  // namespace smvbs

#endif  // SMVBS_SAMPLING_HPP
