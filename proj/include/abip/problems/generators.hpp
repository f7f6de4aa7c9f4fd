#ifndef ABIP_PROBLEMS_GENERATORS_HPP
#define ABIP_PROBLEMS_GENERATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "abip/core.hpp"
#include "abip/sparse_linalg.hpp"

namespace abip::problems
{

using Rng = std::mt19937_64;

namespace detail
{
inline SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet>& trips)
{
    SparseMatrix a(rows, cols);
    a.setFromTriplets(trips.begin(), trips.end());
    a.prune(0.0);
    a.makeCompressed();
    return a;
}

inline double nonzero_normal(Rng& rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    double v = 0.0;
    while (v == 0.0) v = nd(rng);
    return v;
}
} // namespace detail

struct RandomLp
{
    ConicProblem problem;
    Vec x0; // strictly feasible primal point
    Vec y0;
    Vec s0; // strictly feasible dual slack
};

/// Sparse random LP in standard form whose primal and dual are both strictly
/// feasible: b = A x0 with x0 > 0 and c = A'y0 + s0 with s0 > 0.
inline RandomLp gen_random_lp(Index m, Index n, double density, std::uint64_t seed)
{
    if (m < 1 || n <= m) throw std::invalid_argument("gen_random_lp: need 1 <= m < n");
    if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("gen_random_lp: density must be in (0,1]");
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Triplet> trips;
    std::vector<std::vector<bool>> used(static_cast<size_t>(n), std::vector<bool>(static_cast<size_t>(m), false));
    auto put = [&](Index i, Index j) {
        if (used[size_t(j)][size_t(i)]) return;
        used[size_t(j)][size_t(i)] = true;
        trips.emplace_back(int(i), int(j), detail::nonzero_normal(rng));
    };
    for (Index j = 0; j < n; ++j) {
        put(j % m, j); // every row and column is nonempty
        for (Index i = 0; i < m; ++i) {
            if (unif(rng) < density) put(i, j);
        }
    }
    RandomLp out;
    out.problem.A = detail::from_triplets(m, n, trips);
    out.problem.cones = {Cone::nonneg(n)};
    out.problem.name = "random_lp_" + std::to_string(m) + "x" + std::to_string(n) + "_s" + std::to_string(seed);
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    out.x0.resize(n);
    out.s0.resize(n);
    out.y0.resize(m);
    for (Index j = 0; j < n; ++j) out.x0[j] = pos(rng);
    for (Index i = 0; i < m; ++i) out.y0[i] = nd(rng);
    for (Index j = 0; j < n; ++j) out.s0[j] = pos(rng);
    out.problem.b = out.problem.A * out.x0;
    out.problem.c = out.problem.A.transpose() * out.y0 + out.s0;
    return out;
}

struct PagerankLp
{
    ConicProblem problem;
    SparseMatrix S; // column-stochastic up to the damping factor
    Index nodes = 0;
};

/// min 0  s.t.  S x - x + w = 0,  1'x = 1,  (x, w) >= 0.
inline PagerankLp pagerank_lp_from_matrix(const SparseMatrix& s)
{
    const Index nn = s.rows();
    std::vector<Triplet> trips;
    for (Index j = 0; j < nn; ++j) {
        double diag = -1.0;
        for (SparseMatrix::InnerIterator it(s, j); it; ++it) {
            if (it.row() == j) {
                diag += it.value();
            } else {
                trips.emplace_back(int(it.row()), int(j), it.value());
            }
        }
        if (diag != 0.0) trips.emplace_back(int(j), int(j), diag);
        trips.emplace_back(int(j), int(nn + j), 1.0);
        trips.emplace_back(int(nn), int(j), 1.0);
    }
    PagerankLp out;
    out.nodes = nn;
    out.S = s;
    out.problem.A = detail::from_triplets(nn + 1, 2 * nn, trips);
    out.problem.b = Vec::Zero(nn + 1);
    out.problem.b[nn] = 1.0;
    out.problem.c = Vec::Zero(2 * nn);
    out.problem.cones = {Cone::nonneg(2 * nn)};
    return out;
}

/// PageRank LP from a directed edge list (u -> v). Nodes without outgoing
/// edges get a self-loop before column scaling.
inline PagerankLp gen_pagerank_from_edges(Index nodes, const std::vector<std::pair<Index, Index>>& edges,
                                          double damping = 0.99)
{
    if (nodes < 1) throw std::invalid_argument("gen_pagerank_from_edges: need at least one node");
    std::set<std::pair<Index, Index>> uniq;
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= nodes || v >= nodes) throw std::invalid_argument("edge endpoint out of range");
        uniq.emplace(u, v);
    }
    std::vector<Index> outdeg(static_cast<size_t>(nodes), 0);
    for (auto [u, v] : uniq) ++outdeg[size_t(u)];
    for (Index u = 0; u < nodes; ++u) {
        if (outdeg[size_t(u)] == 0) {
            uniq.emplace(u, u);
            outdeg[size_t(u)] = 1;
        }
    }
    std::vector<Triplet> trips;
    for (auto [u, v] : uniq) trips.emplace_back(int(v), int(u), damping / double(outdeg[size_t(u)]));
    auto s = detail::from_triplets(nodes, nodes, trips);
    auto out = pagerank_lp_from_matrix(s);
    out.problem.name = "pagerank_" + std::to_string(nodes);
    return out;
}

/// Staircase PageRank: a seeded random recursive tree (node i links to a
/// uniform earlier node) plus one extra edge, so #edges = #nodes. Edges are
/// undirected, nobody dangles and the diagonal of S - I is exactly -1.
inline PagerankLp gen_staircase_pagerank(Index nodes, double damping = 0.99, std::uint64_t seed = 0)
{
    if (nodes < 3) throw std::invalid_argument("gen_staircase_pagerank: need at least 3 nodes");
    Rng rng(seed);
    std::set<std::pair<Index, Index>> edges; // (min, max)
    for (Index i = 1; i < nodes; ++i) {
        std::uniform_int_distribution<Index> pick(0, i - 1);
        edges.emplace(pick(rng), i);
    }
    std::uniform_int_distribution<Index> any(0, nodes - 1);
    for (;;) {
        Index a = any(rng);
        Index b = any(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (edges.emplace(a, b).second) break;
    }
    std::vector<Index> deg(static_cast<size_t>(nodes), 0);
    for (auto [a, b] : edges) {
        ++deg[size_t(a)];
        ++deg[size_t(b)];
    }
    std::vector<Triplet> trips;
    for (auto [a, b] : edges) {
        trips.emplace_back(int(b), int(a), damping / double(deg[size_t(a)]));
        trips.emplace_back(int(a), int(b), damping / double(deg[size_t(b)]));
    }
    auto s = detail::from_triplets(nodes, nodes, trips);
    auto out = pagerank_lp_from_matrix(s);
    out.problem.name = "staircase_pagerank_" + std::to_string(nodes);
    return out;
}

// ---------------------------------------------------------------- LASSO

struct LassoInstance
{
    ConicProblem problem;
    Mat a; // m x n data
    Vec b;
    double lambda = 0.0;
    Vec x_true;
};

inline double lasso_default_lambda(const Mat& a, const Vec& b)
{
    return (a.transpose() * b).lpNorm<Eigen::Infinity>() / 5.0;
}

inline double lasso_objective(const Mat& a, const Vec& b, double lambda, const Vec& x)
{
    return (a * x - b).squaredNorm() + lambda * x.lpNorm<1>();
}

/// min 2z + lambda 1'(x+ + x-)  s.t.  w = 1,  y + A x+ - A x- = b,
/// (w, z, y) in RSOC(2+m),  x+, x- >= 0.   Columns: w, z, y, x+, x-.
inline ConicProblem lasso_socp(const Mat& a, const Vec& b, double lambda)
{
    const Index m = a.rows();
    const Index n = a.cols();
    if (b.size() != m) throw std::invalid_argument("lasso_socp: b length mismatch");
    std::vector<Triplet> trips;
    trips.emplace_back(0, 0, 1.0);
    for (Index i = 0; i < m; ++i) trips.emplace_back(int(1 + i), int(2 + i), 1.0);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) {
            if (a(i, j) == 0.0) continue;
            trips.emplace_back(int(1 + i), int(2 + m + j), a(i, j));
            trips.emplace_back(int(1 + i), int(2 + m + n + j), -a(i, j));
        }
    }
    ConicProblem p;
    p.A = detail::from_triplets(1 + m, 2 + m + 2 * n, trips);
    p.b.resize(1 + m);
    p.b[0] = 1.0;
    p.b.tail(m) = b;
    p.c = Vec::Zero(2 + m + 2 * n);
    p.c[1] = 2.0;
    p.c.tail(2 * n).setConstant(lambda);
    p.cones = {Cone::rsoc(2 + m), Cone::nonneg(2 * n)};
    p.name = "lasso_" + std::to_string(m) + "x" + std::to_string(n);
    return p;
}

/// Recovers x = x+ - x- from a solution of lasso_socp.
inline Vec lasso_extract_x(const Vec& sol, Index m, Index n)
{
    return sol.segment(2 + m, n) - sol.segment(2 + m + n, n);
}

/// Gaussian data, planted x_true with ceil(n/10) nonzeros,
/// b = A x_true + 0.1 * noise, lambda = |A'b|_inf / 5 unless given.
inline LassoInstance gen_lasso_socp(Index m, Index n, std::uint64_t seed, double lambda = -1.0)
{
    if (m < 1 || n < 1) throw std::invalid_argument("gen_lasso_socp: m, n >= 1");
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    LassoInstance out;
    out.a.resize(m, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) out.a(i, j) = nd(rng);
    }
    out.x_true = Vec::Zero(n);
    const Index k = (n + 9) / 10;
    std::vector<Index> idx(static_cast<size_t>(n));
    for (Index j = 0; j < n; ++j) idx[size_t(j)] = j;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (Index t = 0; t < k; ++t) out.x_true[idx[size_t(t)]] = nd(rng);
    out.b = out.a * out.x_true;
    for (Index i = 0; i < m; ++i) out.b[i] += 0.1 * nd(rng);
    out.lambda = lambda > 0.0 ? lambda : lasso_default_lambda(out.a, out.b);
    out.problem = lasso_socp(out.a, out.b, out.lambda);
    return out;
}

/// Cached solver for (shift I + 2 A A') z = rhs. Factors the m x m matrix
/// when n > m, otherwise the n x n matrix (shift/2 I + A'A) and applies
///   (shift I + 2 A A')^{-1} = (I - A (shift/2 I + A'A)^{-1} A') / shift.
class LassoReducedSolver
{
public:
    LassoReducedSolver() = default;
    explicit LassoReducedSolver(const Mat& a, double shift = 1.0) : m_a(a), m_shift(shift)
    {
        if (!(shift > 0.0)) throw std::invalid_argument("LassoReducedSolver: shift must be positive");
        const Index m = a.rows();
        const Index n = a.cols();
        m_woodbury = n <= m;
        if (m_woodbury) {
            Mat k = a.transpose() * a;
            k.diagonal().array() += 0.5 * shift;
            m_chol.factor(k);
        } else {
            Mat k = 2.0 * (a * a.transpose());
            k.diagonal().array() += shift;
            m_chol.factor(k);
        }
    }

    bool uses_woodbury() const noexcept { return m_woodbury; }

    Vec solve(const Vec& rhs) const
    {
        if (rhs.size() != m_a.rows()) throw std::invalid_argument("lasso_reduced_solve: rhs length mismatch");
        if (!m_woodbury) return m_chol.solve(rhs);
        Vec t = m_a.transpose() * rhs;
        m_chol.solve_in_place(t);
        return (rhs - m_a * t) / m_shift;
    }

private:
    Mat m_a;
    double m_shift = 1.0;
    bool m_woodbury = false;
    DenseCholesky m_chol;
};

inline Vec lasso_reduced_solve(const Mat& a, const Vec& rhs, double shift = 1.0)
{
    return LassoReducedSolver(a, shift).solve(rhs);
}

/// Kernel for (I + A A') of lasso_socp: block diag(2, 2I + 2 A A').
inline NormalKernel lasso_normal_kernel(const Mat& a)
{
    auto solver = std::make_shared<LassoReducedSolver>(a, 2.0);
    return [solver](Eigen::Ref<Vec> z) {
        z[0] *= 0.5;
        z.tail(z.size() - 1) = solver->solve(z.tail(z.size() - 1));
    };
}

// ---------------------------------------------------------------- SVM

struct SvmInstance
{
    ConicProblem problem;
    Mat x; // m samples x n features
    Vec y; // labels in {-1, +1}
    double c = 1.0;
};

inline void check_labels(const Vec& y)
{
    for (Index i = 0; i < y.size(); ++i) {
        if (y[i] != 1.0 && y[i] != -1.0) {
            throw std::invalid_argument("svm: label " + std::to_string(i) + " is not +1 or -1");
        }
    }
}

struct SvmLayout
{
    Index m = 0;
    Index n = 0;
    Index eta() const { return 0; }
    Index nu() const { return 1; }
    Index w() const { return 2; }
    Index wp() const { return 2 + n; }
    Index bp() const { return 2 + 2 * n; }
    Index wm() const { return 3 + 2 * n; }
    Index bm() const { return 3 + 3 * n; }
    Index xi() const { return 4 + 3 * n; }
    Index t() const { return 4 + 3 * n + m; }
    Index cols() const { return 4 + 3 * n + 2 * m; }
    Index rows() const { return 1 + m + n; }
};

/// min nu + C 1'xi  s.t.  eta = 1,
///   At w+ + y b+ - At w- - y b- + xi - t = 1,   w - w+ + w- = 0,
///   (eta, nu, w) in RSOC(2+n),  (w+, b+, w-, b-, xi, t) >= 0,  At = diag(y) X.
inline ConicProblem gen_svm_socp(const Mat& x, const Vec& y, double c)
{
    const Index m = x.rows();
    const Index n = x.cols();
    if (y.size() != m) throw std::invalid_argument("gen_svm_socp: label count mismatch");
    check_labels(y);
    if (!(c > 0.0)) throw std::invalid_argument("gen_svm_socp: C must be positive");
    const SvmLayout L{m, n};
    const Mat at = y.asDiagonal() * x;
    std::vector<Triplet> trips;
    trips.emplace_back(0, int(L.eta()), 1.0);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) {
            if (at(i, j) == 0.0) continue;
            trips.emplace_back(int(1 + i), int(L.wp() + j), at(i, j));
            trips.emplace_back(int(1 + i), int(L.wm() + j), -at(i, j));
        }
    }
    for (Index i = 0; i < m; ++i) {
        trips.emplace_back(int(1 + i), int(L.bp()), y[i]);
        trips.emplace_back(int(1 + i), int(L.bm()), -y[i]);
        trips.emplace_back(int(1 + i), int(L.xi() + i), 1.0);
        trips.emplace_back(int(1 + i), int(L.t() + i), -1.0);
    }
    for (Index j = 0; j < n; ++j) {
        trips.emplace_back(int(1 + m + j), int(L.w() + j), 1.0);
        trips.emplace_back(int(1 + m + j), int(L.wp() + j), -1.0);
        trips.emplace_back(int(1 + m + j), int(L.wm() + j), 1.0);
    }
    ConicProblem p;
    p.A = detail::from_triplets(L.rows(), L.cols(), trips);
    p.b = Vec::Zero(L.rows());
    p.b[0] = 1.0;
    p.b.segment(1, m).setOnes();
    p.c = Vec::Zero(L.cols());
    p.c[L.nu()] = 1.0;
    p.c.segment(L.xi(), m).setConstant(c);
    p.cones = {Cone::rsoc(2 + n), Cone::nonneg(2 * n + 2 * m + 2)};
    p.name = "svm_" + std::to_string(m) + "x" + std::to_string(n);
    return p;
}

struct SvmSolution
{
    Vec w;
    double bias = 0.0;
    Vec slack;
};

inline SvmSolution svm_extract(const Vec& sol, Index m, Index n)
{
    const SvmLayout L{m, n};
    SvmSolution out;
    out.w = sol.segment(L.w(), n);
    out.bias = sol[L.bp()] - sol[L.bm()];
    out.slack = sol.segment(L.xi(), m);
    return out;
}

/// 0.5 |w|^2 + C sum max(0, 1 - y_i (x_i'w + b)).
inline double svm_objective(const Mat& x, const Vec& y, double c, const Vec& w, double bias)
{
    const Vec margin = y.cwiseProduct(x * w + Vec::Constant(x.rows(), bias));
    return 0.5 * w.squaredNorm() + c * (1.0 - margin.array()).max(0.0).sum();
}

/// Two Gaussian clouds centred at +/- mu with unit noise, labels +/-1 alternating.
inline SvmInstance gen_svm(Index m, Index n, double c, std::uint64_t seed)
{
    if (m < 2 || n < 1) throw std::invalid_argument("gen_svm: need m >= 2, n >= 1");
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec centre(n);
    for (Index j = 0; j < n; ++j) centre[j] = nd(rng) / std::sqrt(double(n));
    SvmInstance out;
    out.c = c;
    out.x.resize(m, n);
    out.y.resize(m);
    for (Index i = 0; i < m; ++i) {
        out.y[i] = (i % 2 == 0) ? 1.0 : -1.0;
        for (Index j = 0; j < n; ++j) out.x(i, j) = out.y[i] * centre[j] + nd(rng);
    }
    out.problem = gen_svm_socp(out.x, out.y, c);
    return out;
}

/// Cached solver for (3I + At At' + 2 y y') z = rhs, i.e. F + M H M' with
/// F = 3I, M = [At y], H = diag(I, 2). Factors F + M H M' directly when
/// m <= n + 1, otherwise H^{-1} + M'F^{-1}M and applies Woodbury.
class SvmReducedSolver
{
public:
    SvmReducedSolver() = default;
    SvmReducedSolver(const Mat& at, const Vec& y)
    {
        const Index m = at.rows();
        const Index n = at.cols();
        if (y.size() != m) throw std::invalid_argument("svm_reduced_solve: label count mismatch");
        m_m.resize(m, n + 1);
        m_m.leftCols(n) = at;
        m_m.col(n) = y;
        m_h = Vec::Ones(n + 1);
        m_h[n] = 2.0;
        m_woodbury = m > n + 1;
        if (m_woodbury) {
            Mat k = m_m.transpose() * m_m / 3.0;
            k.diagonal() += m_h.cwiseInverse();
            m_chol.factor(k);
        } else {
            Mat k = m_m * m_h.asDiagonal() * m_m.transpose();
            k.diagonal().array() += 3.0;
            m_chol.factor(k);
        }
    }

    bool uses_woodbury() const noexcept { return m_woodbury; }
    const Mat& design() const noexcept { return m_m; }

    Vec solve(const Vec& rhs) const
    {
        if (rhs.size() != m_m.rows()) throw std::invalid_argument("svm_reduced_solve: rhs length mismatch");
        if (!m_woodbury) return m_chol.solve(rhs);
        const Vec f_rhs = rhs / 3.0;
        Vec t = m_m.transpose() * f_rhs;
        m_chol.solve_in_place(t);
        return f_rhs - (m_m * t) / 3.0;
    }

private:
    Mat m_m;
    Vec m_h;
    bool m_woodbury = false;
    DenseCholesky m_chol;
};

inline Vec svm_reduced_solve(const Mat& at, const Vec& y, const Vec& rhs)
{
    return SvmReducedSolver(at, y).solve(rhs);
}

/// Kernel for (I + A A') of gen_svm_socp. With z = (z0, a, l):
///   z0 = r0 / 2,  (F + M H M') a = r_m + At r_l / 2,  l = (r_l + 2 At' a) / 4.
inline NormalKernel svm_normal_kernel(const Mat& x, const Vec& y)
{
    const Index m = x.rows();
    const Index n = x.cols();
    auto at = std::make_shared<Mat>(y.asDiagonal() * x);
    auto solver = std::make_shared<SvmReducedSolver>(*at, y);
    return [at, solver, m, n](Eigen::Ref<Vec> z) {
        z[0] *= 0.5;
        const Vec rl = z.segment(1 + m, n);
        const Vec a = solver->solve(z.segment(1, m) + 0.5 * (*at) * rl);
        z.segment(1, m) = a;
        z.segment(1 + m, n) = 0.25 * (rl + 2.0 * at->transpose() * a);
    };
}

/// QP form of the SVM: min 0.5 w'w + C 1'xi  s.t.  At w + y b + xi >= 1,  xi >= 0.
/// Variables (w, b, xi); G z >= h.
struct SvmQp
{
    Mat P; // (n+1+m) square
    Vec q;
    Mat G;
    Vec h;
};

inline SvmQp svm_qp_form(const Mat& x, const Vec& y, double c)
{
    check_labels(y);
    const Index m = x.rows();
    const Index n = x.cols();
    const Index nv = n + 1 + m;
    SvmQp qp;
    qp.P = Mat::Zero(nv, nv);
    qp.P.topLeftCorner(n, n).setIdentity();
    qp.q = Vec::Zero(nv);
    qp.q.tail(m).setConstant(c);
    qp.G = Mat::Zero(2 * m, nv);
    qp.G.topLeftCorner(m, n) = y.asDiagonal() * x;
    qp.G.block(0, n, m, 1) = y;
    qp.G.block(0, n + 1, m, m).setIdentity();
    qp.G.block(m, n + 1, m, m).setIdentity();
    qp.h = Vec::Zero(2 * m);
    qp.h.head(m).setOnes();
    return qp;
}

// ---------------------------------------------------------------- QP

/// min 0.5 z'P z + q'z  s.t.  Abar z = bbar,  z >= 0,  with P = L'L (L is r x n).
/// Columns (eta, nu, xbar_r, z_n); rows eta = 1, xbar - L z = 0, Abar z = bbar;
/// cones RSOC(2+r) x Nonneg(n); objective nu + q'z.
inline ConicProblem qp_to_socp(const Mat& factor, const Vec& q, const Mat& abar, const Vec& bbar)
{
    const Index r = factor.rows();
    const Index n = factor.cols();
    const Index p = abar.rows();
    if (q.size() != n || abar.cols() != n || bbar.size() != p || r < 1) {
        throw std::invalid_argument("qp_to_socp: dimension mismatch");
    }
    std::vector<Triplet> trips;
    trips.emplace_back(0, 0, 1.0);
    for (Index i = 0; i < r; ++i) {
        trips.emplace_back(int(1 + i), int(2 + i), 1.0);
        for (Index j = 0; j < n; ++j) {
            if (factor(i, j) != 0.0) trips.emplace_back(int(1 + i), int(2 + r + j), -factor(i, j));
        }
    }
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (abar(i, j) != 0.0) trips.emplace_back(int(1 + r + i), int(2 + r + j), abar(i, j));
        }
    }
    ConicProblem out;
    out.A = detail::from_triplets(1 + r + p, 2 + r + n, trips);
    out.b = Vec::Zero(1 + r + p);
    out.b[0] = 1.0;
    out.b.tail(p) = bbar;
    out.c = Vec::Zero(2 + r + n);
    out.c[1] = 1.0;
    out.c.tail(n) = q;
    out.cones = {Cone::rsoc(2 + r), Cone::nonneg(n)};
    out.name = "qp_socp";
    return out;
}

/// Returns L (rank x n) with L'L = P for a symmetric PSD P, via an
/// eigendecomposition. Zero eigenvalues are dropped; at least one row is kept.
inline Mat psd_factor(const Mat& p, double tol = 1e-12)
{
    if (p.rows() != p.cols()) throw std::invalid_argument("psd_factor: not square");
    if (!p.isApprox(p.transpose(), 1e-12)) throw std::invalid_argument("psd_factor: not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> eig(p);
    if (eig.info() != Eigen::Success) throw NumericalError("psd_factor: eigensolver failed");
    const Vec d = eig.eigenvalues();
    const double cut = tol * std::max(1.0, d.cwiseAbs().maxCoeff());
    if (d.minCoeff() < -cut) throw std::invalid_argument("psd_factor: matrix is not positive semidefinite");
    // P = V diag(d) V'  =>  rows sqrt(d_i) v_i' for the nonzero eigenvalues
    std::vector<Index> keep;
    for (Index i = 0; i < d.size(); ++i) {
        if (d[i] > cut) keep.push_back(i);
    }
    if (keep.empty()) return Mat::Zero(1, p.cols());
    Mat out(Index(keep.size()), p.cols());
    for (size_t k = 0; k < keep.size(); ++k) out.row(Index(k)) = std::sqrt(d[keep[k]]) * eig.eigenvectors().col(keep[k]).transpose();
    return out;
}

} // namespace abip::problems

#endif // ABIP_PROBLEMS_GENERATORS_HPP
