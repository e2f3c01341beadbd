#ifndef SMVBS_JACOBIANS_HPP
#define SMVBS_JACOBIANS_HPP

// Jacobian machinery for the singular matrix transforms: the shared G(q,.)
// eigenvalue product in both algebraic forms, the analytic Jacobians of the
// symmetrized-inverse map W -> W - W'^+ and of the scaled variant
// Z = (V Delta^+ - V'^+ Delta) Xi^+, the eigenvalue factor of the Hausdorff
// measure on rank-p PSD matrices, and a finite-difference manifold-Jacobian
// oracle used to verify the analytic formulas.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "smvbs/errors.hpp"
#include "smvbs/linalg.hpp"

namespace smvbs {

// Log of a signed quantity: value = (negative ? -1 : +1) * exp(log_abs).
// The G product can go negative when some value < 1 raises an odd power;
// Jacobian magnitudes take the absolute value but the flag is surfaced.
struct LogSigned {
    double log_abs = -std::numeric_limits<double>::infinity();
    bool negative = false;

    bool is_zero() const { return std::isinf(log_abs) && log_abs < 0; }
};

enum class GFactorForm { Reciprocal, Direct };

struct GFactorInput {
    Vector values;  // squared singular values or eigenvalues, strictly decreasing
    int n = 0;
    int m = 0;
    int q = 0;  // = values.size()

    void validate() const {
        if (q != values.size() || q < 1) throw DomainError("GFactorInput: q mismatch");
        if (n < 1 || m < 1) throw DomainError("GFactorInput: n, m must be positive");
        if (n + m < 2 * q) throw DomainError("GFactorInput: need n + m >= 2q");
        for (int i = 0; i < q; ++i) {
            if (!(values[i] > 0)) throw DomainError("GFactorInput: values must be positive");
            if (i + 1 < q && !(values[i] > values[i + 1]))
                throw DomainError("GFactorInput: values must be strictly decreasing");
        }
    }
};

// G(q, v) = prod_i (1 - 1/v_i)^{n+m-2q} (1 + 1/v_i) * prod_{i<j} (1 - 1/(v_i v_j))
//         = prod_i v_i^{-(n+m-q)} (v_i - 1)^{n+m-2q} (1 + v_i) * prod_{i<j} (v_i v_j - 1).
// Returned as log|G| with a sign flag; exactly zero (log = -inf) when some
// v_i = 1 and the exponent n + m - 2q is positive.
inline LogSigned g_factor_ln(const GFactorInput& in, GFactorForm form) {
    in.validate();
    const int e = in.n + in.m - 2 * in.q;
    LogSigned out;
    out.log_abs = 0.0;
    out.negative = false;
    // Factors within 1e-12 of zero count as exact zeros: a unit eigenvalue
    // reaches this function as 1 +- O(eps) after an eigensolve.
    auto accumulate = [&out](double factor, int power) {
        if (std::abs(factor) < 1e-12) {
            if (power > 0) out.log_abs = -std::numeric_limits<double>::infinity();
            return;
        }
        out.log_abs += power * std::log(std::abs(factor));
        if (factor < 0.0 && power % 2 != 0) out.negative = !out.negative;
    };
    if (form == GFactorForm::Reciprocal) {
        for (int i = 0; i < in.q; ++i) {
            const double v = in.values[i];
            accumulate(1.0 - 1.0 / v, e);
            accumulate(1.0 + 1.0 / v, 1);
            for (int j = i + 1; j < in.q; ++j) accumulate(1.0 - 1.0 / (v * in.values[j]), 1);
        }
    } else {
        for (int i = 0; i < in.q; ++i) {
            const double v = in.values[i];
            accumulate(v, -(in.n + in.m - in.q));
            accumulate(v - 1.0, e);
            accumulate(1.0 + v, 1);
            for (int j = i + 1; j < in.q; ++j) accumulate(v * in.values[j] - 1.0, 1);
        }
    }
    if (out.is_zero()) out.negative = false;
    return out;
}

// Log Jacobian magnitude of U = W - W'^+ on the rank-p manifold of n x m
// matrices: G(p, d^2) with d_i the singular values of W.
inline LogSigned lemma1_log_jacobian(const Matrix& w, int n, int m, int p) {
    if (w.rows() != n || w.cols() != m) throw DomainError("lemma1_log_jacobian: shape mismatch");
    const ThinSvd svd = thin_svd(w);
    if (svd.rank() != p) throw DomainError("lemma1_log_jacobian: rank != p");
    GFactorInput in;
    in.values = svd.values.array().square();
    in.n = n;
    in.m = m;
    in.q = p;
    return g_factor_ln(in, GFactorForm::Reciprocal);
}

// Log Jacobian magnitude of Z = (V Delta^+ - V'^+ Delta) Xi^+ as a map of V:
// log|G(q, theta^2)| - n sum log ch_i(Xi) - (n/2) sum log ch_j(beta), with
// theta_i^2 the nonzero eigenvalues of V'V beta^+ and beta = Delta^2. The G
// exponents use the rank s of Delta as the effective column dimension: the
// map acts on matrices whose rows live in the s-dimensional column space of
// beta, so the ambient m plays no role in the Jacobian.
inline LogSigned theorem1_log_jacobian(const Matrix& v, const PsdRankQ& delta,
                                       const PsdRankQ& xi, int n) {
    if (v.rows() != n) throw DomainError("theorem1_log_jacobian: V has wrong row count");
    if (v.cols() != delta.dim() || delta.dim() != xi.dim())
        throw DomainError("theorem1_log_jacobian: dimension mismatch");
    if (delta.rank() != xi.rank())
        throw DomainError("theorem1_log_jacobian: Delta and Xi must share rank");
    const int s = static_cast<int>(delta.rank());
    // theta_i^2 = ch_i(V'V beta^+) computed symmetrically as the squared
    // singular values of V Delta^+.
    const Matrix vdp = v * delta.power(-1.0).reconstruct();
    const ThinSvd svd = thin_svd(vdp);
    GFactorInput in;
    in.values = svd.values.array().square();
    in.n = n;
    in.m = s;
    in.q = static_cast<int>(svd.rank());
    LogSigned out = g_factor_ln(in, GFactorForm::Reciprocal);
    if (out.is_zero()) return out;
    // ch_j(beta) = ch_j(Delta)^2, so (n/2) sum log ch_j(beta) = n sum log ch_j(Delta).
    out.log_abs -= n * xi.log_det_nonzero() + n * delta.log_det_nonzero();
    return out;
}

// Log of the eigenvalue part of the Hausdorff measure on rank-p PSD m x m
// matrices: 2^{-p} prod_i lambda_i^{m-p} prod_{i<j} (lambda_i - lambda_j).
inline double psd_eigen_log_factor(const Vector& lambda, int m) {
    const int p = static_cast<int>(lambda.size());
    if (p < 1 || p > m) throw DomainError("psd_eigen_log_factor: need 1 <= p <= m");
    for (int i = 0; i < p; ++i) {
        if (!(lambda[i] > 0)) throw DomainError("psd_eigen_log_factor: eigenvalues must be positive");
        if (i + 1 < p && !(lambda[i] > lambda[i + 1]))
            throw DomainError("psd_eigen_log_factor: eigenvalues must be strictly decreasing");
    }
    double out = -p * std::numbers::ln2 + (m - p) * lambda.array().log().sum();
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) out += std::log(lambda[i] - lambda[j]);
    return out;
}

// Manifolds supported by the finite-difference Jacobian oracle.
struct ManifoldSpec {
    enum class Kind { RankRect, PsdRank } kind;
    int n = 0;  // rows (RankRect only)
    int m = 0;  // cols (RankRect) or dimension (PsdRank)
    int p = 0;  // rank

    static ManifoldSpec rank_rect(int n, int m, int p) {
        if (p < 1 || p > std::min(n, m)) throw DomainError("ManifoldSpec: bad rank");
        return {Kind::RankRect, n, m, p};
    }
    static ManifoldSpec psd_rank(int m, int p) {
        if (p < 1 || p > m) throw DomainError("ManifoldSpec: bad rank");
        return {Kind::PsdRank, 0, m, p};
    }
    int dimension() const {
        return kind == Kind::RankRect ? p * (n + m - p) : m * p - p * (p - 1) / 2;
    }
};

namespace jac_detail {

// Orthonormal complement of the columns of a (orthonormal n x p), n x (n-p).
inline Matrix orth_complement(const Matrix& a) {
    const Eigen::Index n = a.rows(), p = a.cols();
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - p);
}

// Orthonormal basis (Frobenius inner product) of the tangent space at X.
inline std::vector<Matrix> tangent_basis(const Matrix& x, const ManifoldSpec& man) {
    std::vector<Matrix> basis;
    basis.reserve(static_cast<std::size_t>(man.dimension()));
    if (man.kind == ManifoldSpec::Kind::RankRect) {
        Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Matrix u1 = svd.matrixU().leftCols(man.p);
        const Matrix u2 = svd.matrixU().rightCols(man.n - man.p);
        const Matrix v1 = svd.matrixV().leftCols(man.p);
        const Matrix v2 = svd.matrixV().rightCols(man.m - man.p);
        for (int i = 0; i < man.p; ++i)
            for (int j = 0; j < man.p; ++j)
                basis.push_back(u1.col(i) * v1.col(j).transpose());
        for (int a = 0; a < man.n - man.p; ++a)
            for (int j = 0; j < man.p; ++j)
                basis.push_back(u2.col(a) * v1.col(j).transpose());
        for (int i = 0; i < man.p; ++i)
            for (int b = 0; b < man.m - man.p; ++b)
                basis.push_back(u1.col(i) * v2.col(b).transpose());
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.transpose()));
        // Keep the p largest-magnitude eigenpairs (eigenvalues ascending).
        Matrix q(man.m, man.p);
        for (int k = 0; k < man.p; ++k) q.col(k) = es.eigenvectors().col(man.m - 1 - k);
        const Matrix qp = orth_complement(q);
        const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
        for (int i = 0; i < man.p; ++i)
            basis.push_back(q.col(i) * q.col(i).transpose());
        for (int i = 0; i < man.p; ++i)
            for (int j = i + 1; j < man.p; ++j)
                basis.push_back(inv_sqrt2 * (q.col(i) * q.col(j).transpose() +
                                             q.col(j) * q.col(i).transpose()));
        for (int a = 0; a < man.m - man.p; ++a)
            for (int i = 0; i < man.p; ++i)
                basis.push_back(inv_sqrt2 * (qp.col(a) * q.col(i).transpose() +
                                             q.col(i) * qp.col(a).transpose()));
    }
    return basis;
}

// Retraction: project an ambient point back onto the manifold by truncation
// to rank p (SVD for rectangular, symmetric eigendecomposition for PSD).
inline Matrix retract(const Matrix& y, const ManifoldSpec& man) {
    if (man.kind == ManifoldSpec::Kind::RankRect) {
        Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
        return svd.matrixU().leftCols(man.p) *
               svd.singularValues().head(man.p).asDiagonal() *
               svd.matrixV().leftCols(man.p).transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (y + y.transpose()));
    Matrix out = Matrix::Zero(man.m, man.m);
    for (int k = 0; k < man.p; ++k) {
        const int idx = man.m - 1 - k;
        out += es.eigenvalues()[idx] * es.eigenvectors().col(idx) *
               es.eigenvectors().col(idx).transpose();
    }
    return out;
}

}  // namespace jac_detail

// Finite-difference Jacobian magnitude of `map` restricted to `manifold` at X:
// central differences of map along an orthonormal tangent basis, expressed in
// an orthonormal tangent basis at map(X) on `out_manifold`, returning
// sqrt(det(J'J)). Throws RankDrop if a difference quotient leaves the output
// tangent space by more than off_tangent_tol (relative).
inline double numeric_manifold_jacobian(const std::function<Matrix(const Matrix&)>& map,
                                        const Matrix& x, const ManifoldSpec& manifold,
                                        const ManifoldSpec& out_manifold, double step,
                                        double off_tangent_tol = 1e-3) {
    if (!(step >= 1e-8 && step <= 1e-2))
        throw DomainError("numeric_manifold_jacobian: step out of range");
    const int dim = manifold.dimension();
    if (out_manifold.dimension() != dim)
        throw DomainError("numeric_manifold_jacobian: manifold dimensions differ");
    const std::vector<Matrix> in_basis = jac_detail::tangent_basis(x, manifold);
    const Matrix y0 = map(x);
    const std::vector<Matrix> out_basis = jac_detail::tangent_basis(y0, out_manifold);
    const double h = step * (1.0 + x.norm());
    Matrix jac(dim, dim);
    for (int k = 0; k < dim; ++k) {
        const Matrix yp = map(jac_detail::retract(x + h * in_basis[static_cast<std::size_t>(k)], manifold));
        const Matrix ym = map(jac_detail::retract(x - h * in_basis[static_cast<std::size_t>(k)], manifold));
        const Matrix df = (yp - ym) / (2.0 * h);
        Matrix residual = df;
        for (int l = 0; l < dim; ++l) {
            const double coef = (out_basis[static_cast<std::size_t>(l)].array() * df.array()).sum();
            jac(l, k) = coef;
            residual -= coef * out_basis[static_cast<std::size_t>(l)];
        }
        if (residual.norm() > off_tangent_tol * (1.0 + df.norm()))
            throw RankDrop("numeric_manifold_jacobian: difference quotient left the output tangent space");
    }
    return std::sqrt(std::abs((jac.transpose() * jac).determinant()));
}

// Convenience overload: output manifold same as input.
inline double numeric_manifold_jacobian(const std::function<Matrix(const Matrix&)>& map,
                                        const Matrix& x, const ManifoldSpec& manifold,
                                        double step) {
    return numeric_manifold_jacobian(map, x, manifold, manifold, step);
}

}  // namespace smvbs

#endif  // SMVBS_JACOBIANS_HPP
