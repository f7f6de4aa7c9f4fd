#ifndef ABIP_TESTS_ORACLES_REFERENCE_ADMM_HPP
#define ABIP_TESTS_ORACLES_REFERENCE_ADMM_HPP

// Unsimplified three-block ADMM on the embedding, with Q assembled densely:
//
//   (u~, v~) = projection of (u + p, v + q) onto {Q u = v}
//   u = argmin B_u(u) + beta/2 |u - (u~ - p)|^2
//   v = argmin B_v(v) + beta/2 |v - (v~ - q)|^2
//   p <- p - u~ + u,   q <- q - v~ + v
//
// with B_u = beta nu theta + mu F(x) - mu log tau and
// B_v = 1{r = 0} + 1{xi = -nu} + mu F(s) - mu log kappa. Orthant only.

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace oracle
{

struct DenseEmbedding
{
    Eigen::MatrixXd Q;
    Eigen::VectorXd x0, s0;
    double nu = 0.0;
    Eigen::Index m = 0, n = 0;
};

/// Builds Q from (A, b, c) and an interior start with y0 = 0.
inline DenseEmbedding dense_embedding(const Eigen::SparseMatrix<double>& a_sp, const Eigen::VectorXd& b,
                                      const Eigen::VectorXd& c, const Eigen::VectorXd& x0, const Eigen::VectorXd& s0)
{
    const Eigen::MatrixXd a = a_sp;
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const Eigen::VectorXd rp = b - a * x0;
    const Eigen::VectorXd rd = s0 - c;
    const double rg = 1.0 + c.dot(x0);
    DenseEmbedding e;
    e.m = m;
    e.n = n;
    e.x0 = x0;
    e.s0 = s0;
    e.nu = x0.dot(s0) + 1.0;
    const Eigen::Index N = m + n + 2;
    e.Q = Eigen::MatrixXd::Zero(N, N);
    e.Q.block(0, m, m, n) = a;
    e.Q.block(0, m + n, m, 1) = -b;
    e.Q.block(0, m + n + 1, m, 1) = rp;
    e.Q.block(m, 0, n, m) = -a.transpose();
    e.Q.block(m, m + n, n, 1) = c;
    e.Q.block(m, m + n + 1, n, 1) = rd;
    e.Q.block(m + n, 0, 1, m) = b.transpose();
    e.Q.block(m + n, m, 1, n) = -c.transpose();
    e.Q(m + n, m + n + 1) = rg;
    e.Q.block(m + n + 1, 0, 1, m) = -rp.transpose();
    e.Q.block(m + n + 1, m, 1, n) = -rd.transpose();
    e.Q(m + n + 1, m + n) = -rg;
    return e;
}

// Root of  -lambda/x + x - z = 0  by Newton on x^2 - z x - lambda. Started
// above the root the iterates decrease monotonically until rounding stalls them.
inline double scalar_log_prox(double lambda, double z)
{
    double x = std::abs(z) + std::sqrt(lambda);
    for (int it = 0; it < 500; ++it) {
        const double next = x - (x * x - z * x - lambda) / (2.0 * x - z);
        if (!(next < x)) return x;
        x = next;
    }
    return x;
}

struct ReferenceState
{
    Eigen::VectorXd u, v, p, q, ut, vt;
};

class ReferenceAdmm
{
public:
    ReferenceAdmm(DenseEmbedding e, double beta) : m_e(std::move(e)), m_beta(beta)
    {
        const Eigen::Index N = m_e.Q.rows();
        m_proj.compute(Eigen::MatrixXd::Identity(N, N) + m_e.Q.transpose() * m_e.Q);
    }

    /// Start point (0, x0, 1, 1) / (0, s0, 1, -nu) with p = v, q = u.
    ReferenceState start() const
    {
        const Eigen::Index m = m_e.m;
        const Eigen::Index n = m_e.n;
        ReferenceState s;
        s.u = Eigen::VectorXd::Zero(m + n + 2);
        s.v = Eigen::VectorXd::Zero(m + n + 2);
        s.u.segment(m, n) = m_e.x0;
        s.u[m + n] = 1.0;
        s.u[m + n + 1] = 1.0;
        s.v.segment(m, n) = m_e.s0;
        s.v[m + n] = 1.0;
        s.v[m + n + 1] = -m_e.nu;
        s.p = s.v;
        s.q = s.u;
        return s;
    }

    void step(ReferenceState& s, double mu) const
    {
        const Eigen::Index m = m_e.m;
        const Eigen::Index n = m_e.n;
        const double lambda = mu / m_beta;
        s.ut = m_proj.solve((s.u + s.p) + m_e.Q.transpose() * (s.v + s.q));
        s.vt = m_e.Q * s.ut;

        const Eigen::VectorXd zu = s.ut - s.p;
        s.u.head(m) = zu.head(m);
        for (Eigen::Index j = 0; j < n; ++j) s.u[m + j] = scalar_log_prox(lambda, zu[m + j]);
        s.u[m + n] = scalar_log_prox(lambda, zu[m + n]);
        s.u[m + n + 1] = zu[m + n + 1] - m_e.nu;

        const Eigen::VectorXd zv = s.vt - s.q;
        s.v.head(m).setZero();
        for (Eigen::Index j = 0; j < n; ++j) s.v[m + j] = scalar_log_prox(lambda, zv[m + j]);
        s.v[m + n] = scalar_log_prox(lambda, zv[m + n]);
        s.v[m + n + 1] = -m_e.nu;

        s.p = s.p - s.ut + s.u;
        s.q = s.q - s.vt + s.v;
    }

    const DenseEmbedding& embedding() const { return m_e; }

private:
    DenseEmbedding m_e;
    double m_beta;
    Eigen::LDLT<Eigen::MatrixXd> m_proj;
};

} // namespace oracle

#endif // ABIP_TESTS_ORACLES_REFERENCE_ADMM_HPP
