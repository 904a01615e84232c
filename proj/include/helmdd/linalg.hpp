// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace helmdd {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Triplet = Eigen::Triplet<cplx>;

class SingularMatrixError : public std::runtime_error {
public:
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Complex sparse matrix in compressed sparse row layout.
///
/// Column indices are sorted and unique within each row (enforced by
/// compression). Values are complex double precision. Assembled Helmholtz
/// operators are complex symmetric (A = A^T, not Hermitian).
class ComplexSparseMatrix {
public:
    using Storage = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

    ComplexSparseMatrix() = default;

    ComplexSparseMatrix(int rows, int cols, const std::vector<Triplet>& triplets)
        : m_(rows, cols) {
        m_.setFromTriplets(triplets.begin(), triplets.end());
        m_.makeCompressed();
    }

    int rows() const { return static_cast<int>(m_.rows()); }
    int cols() const { return static_cast<int>(m_.cols()); }
    std::size_t nonzeros() const { return static_cast<std::size_t>(m_.nonZeros()); }

    Vector apply(const Vector& x) const { return m_ * x; }
    Vector operator*(const Vector& x) const { return m_ * x; }

    const Storage& storage() const { return m_; }

    /// Largest entry modulus.
    double max_abs() const {
        double m = 0.0;
        for (int r = 0; r < m_.outerSize(); ++r)
            for (Storage::InnerIterator it(m_, r); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }

    /// max_ij |A_ij - A_ji|, used to assert complex symmetry.
    double symmetry_defect() const {
        Storage d = Storage(m_ - Storage(m_.transpose()));
        double m = 0.0;
        for (int r = 0; r < d.outerSize(); ++r)
            for (Storage::InnerIterator it(d, r); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }

    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(m_); }

private:
    Storage m_;
};

/// LU factors of a square ComplexSparseMatrix (partial pivoting, COLAMD
/// fill-reducing ordering). Immutable after construction; concurrent solves
/// against one factorization are permitted.
class SparseFactorization {
public:
    explicit SparseFactorization(const ComplexSparseMatrix& A) {
        if (A.rows() != A.cols())
            throw std::invalid_argument("factorize: matrix must be square");
        n_ = A.rows();
        impl_ = std::make_unique<Impl>();
        impl_->colmajor = Eigen::SparseMatrix<cplx>(A.storage());
        impl_->lu.analyzePattern(impl_->colmajor);
        impl_->lu.factorize(impl_->colmajor);
        if (impl_->lu.info() != Eigen::Success)
            throw SingularMatrixError("factorize: structurally or numerically singular matrix");
        // Probe solve: catches near-singular factors that the status code accepts.
        if (n_ > 0) {
            Vector ones = Vector::Ones(n_);
            Vector b = impl_->colmajor * ones;
            Vector x = impl_->lu.solve(b);
            if (!x.allFinite())
                throw SingularMatrixError("factorize: non-finite factor solve");
        }
    }

    int size() const { return n_; }

    Vector solve(const Vector& b) const {
        if (b.size() != n_) throw std::invalid_argument("solve: size mismatch");
        return impl_->lu.solve(b);
    }

private:
    struct Impl {
        Eigen::SparseMatrix<cplx> colmajor;
        Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
    };
    std::unique_ptr<Impl> impl_;
    int n_ = 0;
};

inline SparseFactorization factorize(const ComplexSparseMatrix& A) {
    return SparseFactorization(A);
}

struct GmresResult {
    Vector x;
    std::vector<double> history;  ///< relative residuals; history[0] = 1
    int iterations = 0;
    bool converged = false;
};

/// Non-restarted GMRES with an optional right preconditioner (pass nullptr
/// for none), modified Gram-Schmidt Arnoldi and Givens rotations.
///
/// Returns when ||b - A x||_2 / ||b||_2 <= tol or maxit is reached. Happy
/// breakdown (invariant Krylov space) yields the exact solution and counts as
/// convergence. The residual recurrence |g_{j+1}| = |s_j| |g_j| with
/// |s_j| <= 1 makes the history nonincreasing by construction.
inline GmresResult gmres(const std::function<Vector(const Vector&)>& apply_A,
                         const std::function<Vector(const Vector&)>& apply_M,
                         const Vector& b, double tol, int maxit) {
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("gmres: tol must be in (0,1)");
    if (maxit < 1) throw std::invalid_argument("gmres: maxit must be positive");
    const auto n = b.size();
    GmresResult out;
    out.x = Vector::Zero(n);
    out.history.push_back(1.0);

    const double beta = b.norm();
    if (beta == 0.0) {
        out.converged = true;
        return out;
    }

    std::vector<Vector> V;
    V.reserve(maxit + 1);
    V.push_back(b / beta);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(maxit + 1, maxit);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(maxit + 1);
    g(0) = beta;
    std::vector<double> rot_c(maxit);
    std::vector<cplx> rot_s(maxit);

    int m = 0;
    for (int j = 0; j < maxit; ++j) {
        Vector w = apply_A(apply_M ? apply_M(V[j]) : V[j]);
        for (int i = 0; i <= j; ++i) {
            H(i, j) = V[i].dot(w);  // dot conjugates its first argument
            w -= H(i, j) * V[i];
        }
        const double hlast = w.norm();
        if (hlast > 0.0) V.push_back(w / hlast);

        // Previously accumulated rotations, then a new one zeroing hlast.
        for (int i = 0; i < j; ++i) {
            const cplx t = rot_c[i] * H(i, j) + rot_s[i] * H(i + 1, j);
            H(i + 1, j) = -std::conj(rot_s[i]) * H(i, j) + rot_c[i] * H(i + 1, j);
            H(i, j) = t;
        }
        const cplx a = H(j, j);
        const double r = std::sqrt(std::norm(a) + hlast * hlast);
        if (r == 0.0) {
            rot_c[j] = 1.0;
            rot_s[j] = 0.0;
        } else if (a == cplx(0.0)) {
            rot_c[j] = 0.0;
            rot_s[j] = 1.0;
        } else {
            rot_c[j] = std::abs(a) / r;
            rot_s[j] = (a / std::abs(a)) * (hlast / r);
        }
        H(j, j) = rot_c[j] * a + rot_s[j] * hlast;
        g(j + 1) = -std::conj(rot_s[j]) * g(j);
        g(j) = rot_c[j] * g(j);

        m = j + 1;
        out.history.push_back(std::abs(g(j + 1)) / beta);
        if (out.history.back() <= tol || hlast == 0.0) {
            out.converged = true;
            break;
        }
    }

    // Back substitution for y, then x = M^{-1} (V_m y).
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(m);
    for (int i = m - 1; i >= 0; --i) {
        cplx s = g(i);
        for (int l = i + 1; l < m; ++l) s -= H(i, l) * y(l);
        y(i) = s / H(i, i);
    }
    Vector z = Vector::Zero(n);
    for (int i = 0; i < m; ++i) z += y(i) * V[i];
    out.x = apply_M ? apply_M(z) : z;
    out.iterations = m;
    return out;
}

}  // namespace helmdd
