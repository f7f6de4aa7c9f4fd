#ifndef ABIP_HSD_HPP
#define ABIP_HSD_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

#include "abip/cones.hpp"
#include "abip/core.hpp"
#include "abip/sparse_linalg.hpp"

namespace abip
{

struct EmbeddingOptions
{
    double beta = 1.0;
    NormalEquations::Options linsys;
    std::optional<Vec> x0; // interior warm start; unit point when empty
    std::optional<Vec> s0;
};

/// Homogeneous self-dual embedding of a conic program.
///
/// The skew-symmetric matrix
///
///     Q = [  0     A   -b    r_p ]
///         [ -A'    0    c    r_d ]
///         [  b'  -c'    0    r_g ]
///         [ -r_p' -r_d' -r_g  0  ]
///
/// acts on u = (y, x, tau, theta) and is never assembled.
struct HsdSystem
{
    ConicProblem problem;
    Vec x0;
    Vec s0;
    Vec y0;
    Vec rp;
    Vec rd;
    double rg = 0.0;
    double nu = 0.0; // x0's0 + 1
    double beta = 1.0;
    ReducedSystemFactor factor;

    Index m() const noexcept { return problem.rows(); }
    Index n() const noexcept { return problem.cols(); }
    Index size() const noexcept { return m() + n() + 2; }
};

inline HsdSystem build_embedding(const ConicProblem& problem, const EmbeddingOptions& opts = {})
{
    problem.validate();
    if (!(opts.beta > 0.0)) throw std::invalid_argument("build_embedding: beta must be positive");
    HsdSystem sys;
    sys.problem = problem;
    sys.beta = opts.beta;
    sys.x0 = opts.x0 ? *opts.x0 : unit_interior_point(problem.cones);
    sys.s0 = opts.s0 ? *opts.s0 : unit_interior_point(problem.cones);
    if (sys.x0.size() != problem.cols() || sys.s0.size() != problem.cols()) {
        throw std::invalid_argument("build_embedding: warm start has wrong length");
    }
    if (!is_interior(problem.cones, sys.x0) || !is_interior(problem.cones, sys.s0)) {
        throw std::invalid_argument("build_embedding: warm start is not strictly interior");
    }
    sys.y0 = Vec::Zero(problem.rows());
    sys.rp = problem.b - problem.A * sys.x0;
    sys.rd = sys.s0 - problem.c + problem.A.transpose() * sys.y0;
    sys.rg = 1.0 + problem.c.dot(sys.x0) - problem.b.dot(sys.y0);
    sys.nu = sys.x0.dot(sys.s0) + 1.0;
    sys.factor = factor_reduced_system(problem.A, problem.b, problem.c, sys.rp, sys.rd, sys.rg, opts.linsys);
    return sys;
}

/// Matrix-free Q u.
inline Vec apply_Q(const HsdSystem& sys, const Vec& u)
{
    const Index m = sys.m();
    const Index n = sys.n();
    if (u.size() != m + n + 2) throw std::invalid_argument("apply_Q: wrong length");
    const auto y = u.head(m);
    const auto x = u.segment(m, n);
    const double tau = u[m + n];
    const double theta = u[m + n + 1];
    const auto& p = sys.problem;
    Vec out(u.size());
    out.head(m) = p.A * x - tau * p.b + theta * sys.rp;
    out.segment(m, n) = -(p.A.transpose() * y) + tau * p.c + theta * sys.rd;
    out[m + n] = p.b.dot(y) - p.c.dot(x) + sys.rg * theta;
    out[m + n + 1] = -sys.rp.dot(y) - sys.rd.dot(x) - sys.rg * tau;
    return out;
}

/// ADMM iterate pair u = (y, x, tau, theta), v = (r, s, kappa, xi) with
/// running sums over the current restart cycle.
struct IterateState
{
    Vec u;
    Vec v;
    Vec u_sum;
    Vec v_sum;
    Index cycle_count = 0; // iterates accumulated in the sums
    Index inner_count = 0; // iterations in the current outer loop
    Index total_count = 0;

    Index m = 0;
    Index n = 0;

    auto y() { return u.head(m); }
    auto x() { return u.segment(m, n); }
    double& tau() { return u[m + n]; }
    double& theta() { return u[m + n + 1]; }
    auto r() { return v.head(m); }
    auto s() { return v.segment(m, n); }
    double& kappa() { return v[m + n]; }
    double& xi() { return v[m + n + 1]; }

    auto y() const { return u.head(m); }
    auto x() const { return u.segment(m, n); }
    double tau() const { return u[m + n]; }
    double theta() const { return u[m + n + 1]; }
    auto r() const { return v.head(m); }
    auto s() const { return v.segment(m, n); }
    double kappa() const { return v[m + n]; }
    double xi() const { return v[m + n + 1]; }

    void reset_cycle()
    {
        u_sum = Vec::Zero(u.size());
        v_sum = Vec::Zero(v.size());
        cycle_count = 0;
    }

    void accumulate()
    {
        u_sum += u;
        v_sum += v;
        ++cycle_count;
    }

    Vec u_avg() const { return cycle_count > 0 ? Vec(u_sum / double(cycle_count)) : u; }
    Vec v_avg() const { return cycle_count > 0 ? Vec(v_sum / double(cycle_count)) : v; }
};

/// Strictly feasible starting point (y0, x0, 1, 1) / (0, s0, 1, -nu).
inline IterateState initial_state(const HsdSystem& sys)
{
    IterateState st;
    st.m = sys.m();
    st.n = sys.n();
    st.u.resize(sys.size());
    st.v.resize(sys.size());
    st.y() = sys.y0;
    st.x() = sys.x0;
    st.tau() = 1.0;
    st.theta() = 1.0;
    st.r().setZero();
    st.s() = sys.s0;
    st.kappa() = 1.0;
    st.xi() = -sys.nu;
    st.reset_cycle();
    return st;
}

struct RecoverOptions
{
    double tol = 1e-6;
    NormMode norm_mode = NormMode::two_norm;
    bool skip_dual_check = false;
};

/// Turns the homogeneous iterate into a SolveResult for sys.problem.
/// Optimal results are divided by tau; infeasible ones keep the raw iterate.
inline SolveResult recover_solution(const HsdSystem& sys, const IterateState& st, const RecoverOptions& opts)
{
    SolveResult res;
    res.tol = opts.tol;
    res.tau = st.tau();
    res.kappa = st.kappa();
    res.outer_iters = 0;
    res.admm_iters = st.total_count;
    const Vec x = st.x();
    const Vec y = st.y();
    const Vec s = st.s();
    const auto& p = sys.problem;

    TerminalView view;
    view.tau = st.tau();
    view.kappa = st.kappa();
    view.c_dot_x = p.c.dot(x);
    view.b_dot_y = p.b.dot(y);
    view.skip_dual_check = opts.skip_dual_check;
    if (st.tau() > 0.0) view.residuals = compute_residuals(p, x, y, s, st.tau(), opts.norm_mode);
    res.status = classify_terminal_state(view, opts.tol);
    if (view.residuals) res.residuals = *view.residuals;

    if (st.tau() > 0.0 && !kappa_dominates(st.tau(), st.kappa())) {
        res.x = x / st.tau();
        res.y = y / st.tau();
        res.s = s / st.tau();
        res.objective_primal = p.c.dot(res.x);
        res.objective_dual = p.b.dot(res.y);
    } else {
        res.x = x;
        res.y = y;
        res.s = s;
        res.objective_primal = view.c_dot_x;
        res.objective_dual = view.b_dot_y;
    }
    return res;
}

} // namespace abip

#endif // ABIP_HSD_HPP
