#ifndef ABIP_SPARSE_LINALG_HPP
#define ABIP_SPARSE_LINALG_HPP

#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "abip/core.hpp"

namespace abip
{

/// Throws std::invalid_argument unless `A` is in compressed column form with
/// strictly increasing row indices per column and finite values.
inline void check_sparse(const SparseMatrix& A)
{
    if (!A.isCompressed()) throw std::invalid_argument("sparse matrix is not compressed");
    const int* outer = A.outerIndexPtr();
    const int* inner = A.innerIndexPtr();
    const double* vals = A.valuePtr();
    for (Index j = 0; j < A.outerSize(); ++j) {
        if (outer[j + 1] < outer[j]) throw std::invalid_argument("column pointers decrease");
        for (int p = outer[j]; p < outer[j + 1]; ++p) {
            if (p > outer[j] && inner[p] <= inner[p - 1]) {
                throw std::invalid_argument("row indices not strictly increasing in column " +
                                            std::to_string(j));
            }
            if (!std::isfinite(vals[p])) throw std::invalid_argument("non-finite value in sparse matrix");
        }
    }
}

/// Dense Cholesky factor L L' of an SPD matrix. Breakdown reports the pivot.
class DenseCholesky
{
public:
    DenseCholesky() = default;
    explicit DenseCholesky(const Mat& a) { factor(a); }

    void factor(const Mat& a)
    {
        if (a.rows() != a.cols()) throw std::invalid_argument("DenseCholesky: matrix not square");
        const Index n = a.rows();
        m_l = a.triangularView<Eigen::Lower>();
        for (Index j = 0; j < n; ++j) {
            double d = m_l(j, j) - m_l.row(j).head(j).squaredNorm();
            if (!(d > 0.0)) {
                throw NumericalError("cholesky: nonpositive pivot " + std::to_string(j), j);
            }
            d = std::sqrt(d);
            m_l(j, j) = d;
            if (j + 1 < n) {
                m_l.col(j).tail(n - j - 1).noalias() -=
                    m_l.bottomLeftCorner(n - j - 1, j) * m_l.row(j).head(j).transpose();
                m_l.col(j).tail(n - j - 1) /= d;
            }
        }
        m_l.triangularView<Eigen::StrictlyUpper>().setZero();
    }

    template<typename Derived>
    void solve_in_place(Eigen::MatrixBase<Derived>& rhs) const
    {
        m_l.triangularView<Eigen::Lower>().solveInPlace(rhs);
        m_l.transpose().triangularView<Eigen::Upper>().solveInPlace(rhs);
    }

    Vec solve(const Vec& rhs) const
    {
        Vec x = rhs;
        solve_in_place(x);
        return x;
    }

    const Mat& matrix_l() const noexcept { return m_l; }
    Index size() const noexcept { return m_l.rows(); }

private:
    Mat m_l;
};

struct CgResult
{
    Vec z;
    Index iterations = 0;
    double residual = 0.0; // ||op(z) - rhs||_2
};

/// Jacobi-preconditioned conjugate gradient for an SPD operator.
///
/// Stops when ||op(z) - rhs||_2 <= tol * ||rhs||_2. `x0` is an optional warm
/// start. Throws NumericalError (carrying the final residual) at the cap.
template<typename Op>
CgResult cg_solve(const Op& apply, const Vec& rhs, double tol, Index max_iters, const Vec& inv_diag,
                  const Vec* x0 = nullptr)
{
    CgResult out;
    const Index n = rhs.size();
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        out.z = Vec::Zero(n);
        return out;
    }
    const double target = tol * rhs_norm;
    Vec r(n);
    if (x0 != nullptr && x0->size() == n) {
        out.z = *x0;
        r = rhs - apply(out.z);
    } else {
        out.z = Vec::Zero(n);
        r = rhs;
    }
    out.residual = r.norm();
    if (out.residual <= target) return out;

    Vec zr = inv_diag.cwiseProduct(r);
    Vec p = zr;
    double rz = r.dot(zr);
    for (Index k = 0; k < max_iters; ++k) {
        const Vec ap = apply(p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) {
            throw NumericalError("cg: operator not positive definite", k, out.residual);
        }
        const double alpha = rz / pap;
        out.z.noalias() += alpha * p;
        r.noalias() -= alpha * ap;
        out.iterations = k + 1;
        out.residual = r.norm();
        if (out.residual <= target) return out;
        zr = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(zr);
        p = zr + (rz_next / rz) * p;
        rz = rz_next;
    }
    throw NumericalError("cg: iteration cap reached", max_iters, out.residual);
}

struct SpectralDecomposition
{
    Mat q; // rows are eigenvectors: a = q' diag(d) q
    Vec d;
};

/// Eigendecomposition a = q' diag(d) q of a symmetric matrix.
inline SpectralDecomposition spectral_decompose_symmetric(const Mat& a)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_decompose_symmetric: not square");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("spectral_decompose_symmetric: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    return {es.eigenvectors().transpose(), es.eigenvalues()};
}

enum class LinsysMode : std::uint8_t
{
    direct,
    indirect,
};

/// In-place solver for (I + A A') z = rhs supplied by the caller, e.g. a
/// structure-exploiting kernel for LASSO or SVM instances.
using NormalKernel = std::function<void(Eigen::Ref<Vec>)>;

namespace diagnostics
{
inline std::atomic<long>& factorization_counter()
{
    static std::atomic<long> counter{0};
    return counter;
}
/// Number of reduced-system factorizations performed by this process.
inline long factorization_count() { return factorization_counter().load(); }
} // namespace diagnostics

/// Solver for the SPD normal matrix I + A A'.
///
/// Direct mode forms I + A A' once and caches a Cholesky factor (dense when
/// the matrix is small or dense, simplicial LDL' with AMD ordering otherwise).
/// Indirect mode only keeps the Jacobi preconditioner and runs CG per solve.
class NormalEquations
{
public:
    struct Options
    {
        LinsysMode mode = LinsysMode::direct;
        Index dense_max_rows = 4096;
        Index always_dense_rows = 256;
        double dense_min_density = 0.2;
        NormalKernel kernel; // overrides mode when set
    };

    NormalEquations() = default;

    NormalEquations(const SparseMatrix& a, const Options& opts)
        : m_a(a), m_at(a.transpose()), m_mode(opts.mode), m_kernel(opts.kernel)
    {
        const Index m = a.rows();
        if (m_kernel) {
            m_kind = Kind::custom;
            return;
        }
        if (m_mode == LinsysMode::indirect) {
            m_kind = Kind::cg;
            m_inv_diag = Vec::Ones(m);
            for (Index j = 0; j < a.outerSize(); ++j) {
                for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
                    m_inv_diag[it.row()] += it.value() * it.value();
                }
            }
            m_inv_diag = m_inv_diag.cwiseInverse();
            return;
        }
        SparseMatrix normal = (a * m_at).pruned();
        const double density = m > 0 ? double(normal.nonZeros()) / (double(m) * double(m)) : 1.0;
        if (m <= opts.always_dense_rows || (m <= opts.dense_max_rows && density >= opts.dense_min_density)) {
            m_kind = Kind::dense;
            Mat dense = Mat(normal);
            dense.diagonal().array() += 1.0;
            m_dense.factor(dense);
        } else {
            m_kind = Kind::sparse;
            SparseMatrix eye(m, m);
            eye.setIdentity();
            normal = normal + eye;
            m_sparse = std::make_shared<SparseLdlt>();
            m_sparse->compute(normal);
            if (m_sparse->info() != Eigen::Success) throw NumericalError("sparse LDL' failed");
            const Vec& d = m_sparse->vectorD();
            for (Index k = 0; k < d.size(); ++k) {
                if (!(d[k] > 0.0)) {
                    const Index orig = m_sparse->permutationPinv().indices()[k];
                    throw NumericalError("sparse LDL': nonpositive pivot " + std::to_string(orig), orig);
                }
            }
        }
    }

    Index rows() const noexcept { return m_a.rows(); }
    bool is_direct() const noexcept { return m_kind == Kind::dense || m_kind == Kind::sparse; }
    bool uses_dense_factor() const noexcept { return m_kind == Kind::dense; }
    const SparseMatrix& matrix() const noexcept { return m_a; }
    const SparseMatrix& matrix_t() const noexcept { return m_at; }
    const Vec& jacobi_inverse() const noexcept { return m_inv_diag; }

    /// (I + A A') w
    Vec apply(const Vec& w) const
    {
        Vec t = m_at * w;
        Vec out = m_a * t;
        out += w;
        return out;
    }

    /// Solves (I + A A') z = rhs in place. `cg_tol` and `warm` only matter
    /// for the indirect mode; the CG iteration count is added to `cg_iters`.
    void solve_in_place(Eigen::Ref<Vec> rhs, double cg_tol = 1e-10, const Vec* warm = nullptr,
                        Index* cg_iters = nullptr) const
    {
        switch (m_kind) {
        case Kind::dense: {
            m_dense.solve_in_place(rhs);
            return;
        }
        case Kind::sparse: {
            Vec z = m_sparse->solve(Vec(rhs));
            rhs = z;
            return;
        }
        case Kind::custom: {
            m_kernel(rhs);
            return;
        }
        case Kind::cg: {
            const Vec b = rhs;
            const Index cap = std::max<Index>(10 * rows(), 50);
            auto res = cg_solve([this](const Vec& w) { return apply(w); }, b, cg_tol, cap,
                                m_inv_diag, warm);
            if (cg_iters) *cg_iters += res.iterations;
            rhs = res.z;
            return;
        }
        }
    }

private:
    using SparseLdlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
    enum class Kind : std::uint8_t
    {
        dense,
        sparse,
        cg,
        custom,
    };

    SparseMatrix m_a;
    SparseMatrix m_at;
    LinsysMode m_mode = LinsysMode::direct;
    NormalKernel m_kernel;
    Kind m_kind = Kind::dense;
    DenseCholesky m_dense;
    std::shared_ptr<SparseLdlt> m_sparse;
    Vec m_inv_diag;
};

/// Scratch buffers for solve_bordered. Also remembers the last reduced
/// solution, which warm-starts CG in the indirect mode.
struct BorderedWorkspace
{
    Vec zy;
    Vec zx;
    Vec last_y;
    Index cg_iterations = 0;
};

/// Cached solver for (I + Q) u = w where Q is the skew-symmetric embedding
/// matrix built from (A, b, c, r_p, r_d, r_g).
///
/// Writing u = (z, t) with z = (y, x) and t = (tau, theta), the system reads
///
///     M z + H t = w_z,    -H' z + R t = w_t,
///
/// with M = [I A; -A' I], H = [-b r_p; c r_d], R = [1 r_g; -r_g 1]. The
/// border is eliminated through the 2x2 Schur complement R + H' M^{-1} H and
/// each M solve reduces to one solve with I + A A'.
class ReducedSystemFactor
{
public:
    ReducedSystemFactor() = default;

    ReducedSystemFactor(const SparseMatrix& a, const Vec& b, const Vec& c, const Vec& rp,
                        const Vec& rd, double rg, const NormalEquations::Options& opts)
        : m_normal(a, opts), m_b(b), m_c(c), m_rp(rp), m_rd(rd), m_rg(rg)
    {
        const Index m = a.rows();
        const Index n = a.cols();
        if (b.size() != m || rp.size() != m || c.size() != n || rd.size() != n) {
            throw std::invalid_argument("factor_reduced_system: dimension mismatch");
        }
        diagnostics::factorization_counter().fetch_add(1);

        m_minv_h1y = -b;
        m_minv_h1x = c;
        solve_m(m_minv_h1y, m_minv_h1x, 1e-13, nullptr, nullptr);
        m_minv_h2y = rp;
        m_minv_h2x = rd;
        solve_m(m_minv_h2y, m_minv_h2x, 1e-13, nullptr, nullptr);

        // S = R + H' M^{-1} H
        Eigen::Matrix2d s;
        s(0, 0) = 1.0 + h1_dot(m_minv_h1y, m_minv_h1x);
        s(0, 1) = m_rg + h1_dot(m_minv_h2y, m_minv_h2x);
        s(1, 0) = -m_rg + h2_dot(m_minv_h1y, m_minv_h1x);
        s(1, 1) = 1.0 + h2_dot(m_minv_h2y, m_minv_h2x);
        m_schur = s;
        m_schur_det = s.determinant();
        if (!(std::abs(m_schur_det) > 1e-14)) {
            throw NumericalError("bordered system: singular Schur complement");
        }
        m_schur_inv = s.inverse();
    }

    Index rows() const noexcept { return m_b.size(); }
    Index cols() const noexcept { return m_c.size(); }
    Index size() const noexcept { return rows() + cols() + 2; }
    const NormalEquations& normal() const noexcept { return m_normal; }
    const Eigen::Matrix2d& schur() const noexcept { return m_schur; }
    double schur_determinant() const noexcept { return m_schur_det; }

    /// Solves (I + Q) u = w in place (w has length m + n + 2).
    void solve_in_place(Eigen::Ref<Vec> w, BorderedWorkspace& ws, double cg_tol = 1e-10) const
    {
        const Index m = rows();
        const Index n = cols();
        if (w.size() != m + n + 2) throw std::invalid_argument("solve_bordered: wrong length");
        ws.zy = w.head(m);
        ws.zx = w.segment(m, n);
        solve_m(ws.zy, ws.zx, cg_tol, &ws.last_y, &ws.cg_iterations);
        const Eigen::Vector2d rhs_t(w[m + n] + h1_dot(ws.zy, ws.zx), w[m + n + 1] + h2_dot(ws.zy, ws.zx));
        const Eigen::Vector2d t = m_schur_inv * rhs_t;
        w.head(m) = ws.zy - t[0] * m_minv_h1y - t[1] * m_minv_h2y;
        w.segment(m, n) = ws.zx - t[0] * m_minv_h1x - t[1] * m_minv_h2x;
        w[m + n] = t[0];
        w[m + n + 1] = t[1];
        if (!m_normal.is_direct()) ws.last_y = ws.zy;
    }

    Vec solve(const Vec& w, double cg_tol = 1e-10) const
    {
        BorderedWorkspace ws;
        Vec out = w;
        solve_in_place(out, ws, cg_tol);
        return out;
    }

    /// Solves M (y, x) = (a, d) in place:  (I + A A') y = a - A d,  x = d + A' y.
    void solve_m(Vec& y, Vec& x, double cg_tol, const Vec* warm, Index* cg_iters) const
    {
        y.noalias() -= m_normal.matrix() * x;
        m_normal.solve_in_place(y, cg_tol, warm, cg_iters);
        x.noalias() += m_normal.matrix_t() * y;
    }

private:
    // h1 = (-b; c), h2 = (r_p; r_d)
    double h1_dot(const Vec& zy, const Vec& zx) const { return -m_b.dot(zy) + m_c.dot(zx); }
    double h2_dot(const Vec& zy, const Vec& zx) const { return m_rp.dot(zy) + m_rd.dot(zx); }

    NormalEquations m_normal;
    Vec m_b, m_c, m_rp, m_rd;
    double m_rg = 0.0;
    Vec m_minv_h1y, m_minv_h1x, m_minv_h2y, m_minv_h2x;
    Eigen::Matrix2d m_schur = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d m_schur_inv = Eigen::Matrix2d::Identity();
    double m_schur_det = 1.0;
};

inline ReducedSystemFactor factor_reduced_system(const SparseMatrix& a, const Vec& b, const Vec& c,
                                                 const Vec& rp, const Vec& rd, double rg,
                                                 const NormalEquations::Options& opts)
{
    return ReducedSystemFactor(a, b, c, rp, rd, rg, opts);
}

inline Vec solve_bordered(const ReducedSystemFactor& factor, const Vec& w, double cg_tol = 1e-10)
{
    return factor.solve(w, cg_tol);
}

} // namespace abip

#endif // ABIP_SPARSE_LINALG_HPP
