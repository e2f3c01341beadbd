#ifndef SMVBS_LINALG_HPP
#define SMVBS_LINALG_HPP

// Dense real linear algebra primitives for small matrices: thin SVD with a
// distinct-value guard, Moore-Penrose inverses, rank-q PSD matrices stored by
// their nonsingular eigendecomposition, fractional matrix powers, the
// multivariate gamma function and Stiefel manifold volumes.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "smvbs/errors.hpp"

namespace smvbs {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

inline constexpr double kDefaultRankTol = 1e-9;
inline constexpr double kDistinctTol = 1e-8;

namespace detail {

// Flip sign so the first entry that is not numerically zero is positive.
// Makes factorizations reproducible across runs and platforms.
template <typename Scalar>
bool canonical_sign_flip(const VectorX<Scalar>& v) {
    const Scalar tol = Scalar(1e-12) * v.norm();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > tol) return v[i] < Scalar(0);
    }
    return false;
}

template <typename Scalar>
void require_finite(const MatrixX<Scalar>& a, const char* what) {
    if (!a.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
}

}  // namespace detail

// Nonsingular part of the SVD of a rank-q matrix: A = left * diag(values) * right'.
// values are strictly decreasing and positive; left (n x q) and right (m x q)
// have orthonormal columns.
template <typename Scalar>
struct ThinSvdT {
    MatrixX<Scalar> left;
    VectorX<Scalar> values;
    MatrixX<Scalar> right;

    Eigen::Index rank() const { return values.size(); }
    MatrixX<Scalar> reconstruct() const {
        return left * values.asDiagonal() * right.transpose();
    }
};
using ThinSvd = ThinSvdT<double>;

template <typename Scalar>
ThinSvdT<Scalar> thin_svd(const MatrixX<Scalar>& a, Scalar rank_tol = Scalar(kDefaultRankTol)) {
    detail::require_finite(a, "thin_svd");
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorX<Scalar>& sv = svd.singularValues();
    const Scalar largest = sv.size() ? sv[0] : Scalar(0);
    Eigen::Index q = 0;
    while (q < sv.size() && sv[q] > rank_tol * largest) ++q;
    if (q == 0) throw DomainError("thin_svd: matrix is numerically zero");
    for (Eigen::Index i = 0; i + 1 < q; ++i) {
        if (sv[i] - sv[i + 1] < Scalar(kDistinctTol) * largest)
            throw DegenerateSpectrum("thin_svd: repeated singular value");
    }
    ThinSvdT<Scalar> out;
    out.left = svd.matrixU().leftCols(q);
    out.values = sv.head(q);
    out.right = svd.matrixV().leftCols(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        if (detail::canonical_sign_flip<Scalar>(out.left.col(i))) {
            out.left.col(i) = -out.left.col(i);
            out.right.col(i) = -out.right.col(i);
        }
    }
    return out;
}

template <typename Scalar>
MatrixX<Scalar> moore_penrose(const MatrixX<Scalar>& a, Scalar rank_tol = Scalar(kDefaultRankTol)) {
    detail::require_finite(a, "moore_penrose");
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorX<Scalar>& sv = svd.singularValues();
    const Scalar largest = sv.size() ? sv[0] : Scalar(0);
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > rank_tol * largest)
            out += svd.matrixV().col(i) * (Scalar(1) / sv[i]) * svd.matrixU().col(i).transpose();
    }
    return out;
}

// Rank-q positive semidefinite m x m matrix held as vectors * diag(eigenvalues) * vectors'
// with strictly decreasing positive eigenvalues.
template <typename Scalar>
class PsdRankQT {
  public:
    PsdRankQT(Eigen::Index dim, MatrixX<Scalar> vectors, VectorX<Scalar> eigenvalues)
        : dim_(dim), vectors_(std::move(vectors)), eigenvalues_(std::move(eigenvalues)) {
        validate();
        canonicalize();
    }

    // Eigendecompose a dense symmetric PSD matrix, dropping the null space.
    static PsdRankQT from_dense(const MatrixX<Scalar>& a, Scalar rank_tol = Scalar(kDefaultRankTol)) {
        detail::require_finite(a, "PsdRankQ");
        if (a.rows() != a.cols()) throw DomainError("PsdRankQ: matrix not square");
        if ((a - a.transpose()).norm() > Scalar(1e-8) * (Scalar(1) + a.norm()))
            throw DomainError("PsdRankQ: matrix not symmetric");
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(Scalar(0.5) * (a + a.transpose()));
        const VectorX<Scalar>& ev = es.eigenvalues();  // ascending
        const Scalar largest = ev.cwiseAbs().maxCoeff();
        if (ev[0] < -rank_tol * largest * Scalar(10))
            throw DomainError("PsdRankQ: matrix has a negative eigenvalue");
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
            if (ev[i] > rank_tol * largest) keep.push_back(i);
        if (keep.empty()) throw DomainError("PsdRankQ: matrix is numerically zero");
        MatrixX<Scalar> vecs(a.rows(), static_cast<Eigen::Index>(keep.size()));
        VectorX<Scalar> vals(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            vecs.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
            vals[static_cast<Eigen::Index>(k)] = ev[keep[k]];
        }
        return PsdRankQT(a.rows(), std::move(vecs), std::move(vals));
    }

    static PsdRankQT isotropic(Eigen::Index dim, Scalar value) {
        if (value <= Scalar(0)) throw DomainError("PsdRankQ: isotropic value must be positive");
        // Equal eigenvalues are allowed here: an isotropic matrix has a
        // rotation-free spectrum and every density below depends on it only
        // through the (well separated) eigenvalues of products with data.
        PsdRankQT out;
        out.dim_ = dim;
        out.vectors_ = MatrixX<Scalar>::Identity(dim, dim);
        out.eigenvalues_ = VectorX<Scalar>::Constant(dim, value);
        return out;
    }

    Eigen::Index dim() const { return dim_; }
    Eigen::Index rank() const { return eigenvalues_.size(); }
    const MatrixX<Scalar>& vectors() const { return vectors_; }
    const VectorX<Scalar>& eigenvalues() const { return eigenvalues_; }

    MatrixX<Scalar> reconstruct() const {
        return vectors_ * eigenvalues_.asDiagonal() * vectors_.transpose();
    }

    // Same eigenvectors, eigenvalues raised to `exponent` (re-sorted so the
    // decreasing invariant survives negative exponents).
    PsdRankQT power(Scalar exponent) const {
        VectorX<Scalar> vals(rank());
        for (Eigen::Index i = 0; i < rank(); ++i) vals[i] = std::pow(eigenvalues_[i], exponent);
        std::vector<Eigen::Index> order(static_cast<std::size_t>(rank()));
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return vals[a] > vals[b]; });
        MatrixX<Scalar> vecs(dim_, rank());
        VectorX<Scalar> sorted(rank());
        for (std::size_t k = 0; k < order.size(); ++k) {
            vecs.col(static_cast<Eigen::Index>(k)) = vectors_.col(order[k]);
            sorted[static_cast<Eigen::Index>(k)] = vals[order[k]];
        }
        PsdRankQT out;
        out.dim_ = dim_;
        out.vectors_ = std::move(vecs);
        out.eigenvalues_ = std::move(sorted);
        return out;
    }

    MatrixX<Scalar> pinv() const { return power(Scalar(-1)).reconstruct(); }

    // Orthogonal projector onto the column space.
    MatrixX<Scalar> projector() const { return vectors_ * vectors_.transpose(); }

    Scalar log_det_nonzero() const { return eigenvalues_.array().log().sum(); }

    bool isotropic_spectrum(Scalar tol = Scalar(1e-12)) const {
        return rank() == dim_ &&
               eigenvalues_[0] - eigenvalues_[rank() - 1] <= tol * eigenvalues_[0];
    }

  private:
    PsdRankQT() = default;

    void validate() const {
        if (dim_ <= 0 || eigenvalues_.size() == 0 || eigenvalues_.size() > dim_)
            throw DomainError("PsdRankQ: bad dimensions");
        if (vectors_.rows() != dim_ || vectors_.cols() != eigenvalues_.size())
            throw DomainError("PsdRankQ: vector block shape mismatch");
        if ((vectors_.transpose() * vectors_ - MatrixX<Scalar>::Identity(rank(), rank())).norm() > Scalar(1e-10) * Scalar(rank()))
            throw DomainError("PsdRankQ: columns not orthonormal");
        for (Eigen::Index i = 0; i < rank(); ++i) {
            if (!(eigenvalues_[i] > Scalar(0))) throw DomainError("PsdRankQ: nonpositive eigenvalue");
            if (i + 1 < rank() && eigenvalues_[i] < eigenvalues_[i + 1])
                throw DomainError("PsdRankQ: eigenvalues not decreasing");
        }
    }

    void canonicalize() {
        for (Eigen::Index i = 0; i < rank(); ++i)
            if (detail::canonical_sign_flip<Scalar>(vectors_.col(i))) vectors_.col(i) = -vectors_.col(i);
    }

    Eigen::Index dim_ = 0;
    MatrixX<Scalar> vectors_;
    VectorX<Scalar> eigenvalues_;
};
using PsdRankQ = PsdRankQT<double>;

template <typename Scalar>
PsdRankQT<Scalar> psd_power(const PsdRankQT<Scalar>& a, Scalar exponent) {
    return a.power(exponent);
}

// log Gamma_p[a] = (p(p-1)/4) log pi + sum_i log Gamma(a - (i-1)/2), a > (p-1)/2.
inline double mv_gamma_ln(int p, double a) {
    if (p < 1) throw DomainError("mv_gamma_ln: p must be positive");
    if (!(a > 0.5 * (p - 1))) throw DomainError("mv_gamma_ln: need a > (p-1)/2");
    double out = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
    for (int i = 1; i <= p; ++i) out += std::lgamma(a - 0.5 * (i - 1));
    return out;
}

// log volume of the Stiefel manifold V_{p,n}. The default is the value used
// by the source formulas, pi^{pn/2} / Gamma_p[n/2]; `conventional` adds
// p log 2 and gives the volume of V_{p,n} under the unnormalized invariant
// measure (e.g. 2*pi for the circle V_{1,2}).
inline double stiefel_log_volume(int p, int n, bool conventional = false) {
    if (p > n) throw DomainError("stiefel_log_volume: need p <= n");
    double out = 0.5 * p * n * std::log(std::numbers::pi) - mv_gamma_ln(p, 0.5 * n);
    if (conventional) out += p * std::numbers::ln2;
    return out;
}

}  // namespace smvbs

#endif  // SMVBS_LINALG_HPP
