#ifndef ABIP_SOLVER_HPP
#define ABIP_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abip/cones.hpp"
#include "abip/core.hpp"
#include "abip/hsd.hpp"
#include "abip/precond.hpp"
#include "abip/sparse_linalg.hpp"

namespace abip
{

enum class MuStrategy : std::uint8_t
{
    aggressive,
    loqo,
    hybrid,
    fixed, // mu <- gamma * mu
};

enum class InnerRule : std::uint8_t
{
    plain_residual,
    with_average,
    conic_scaled,
};

struct SolverConfig
{
    double tol = 1e-6;
    double beta = 1.0;

    MuStrategy mu_strategy = MuStrategy::hybrid;
    double aggressive_zeta = 0.8;
    double aggressive_eta = 1.5;
    double loqo_alpha = 0.1;
    double hybrid_switch_factor = 1e3;
    double fixed_gamma = 0.8;
    double mu_floor = 1e-14; // no new outer loop below this value

    bool restart_enabled = true;
    Index restart_threshold = 100000;
    Index restart_period = 1000;

    bool half_update = false;
    double alpha1 = 0.5;
    double alpha2 = 1.0;

    InnerRule inner_rule = InnerRule::with_average;
    double conic_alpha = 1.0;

    Index max_admm_iters = 1000000;
    double time_limit = std::numeric_limits<double>::infinity();

    bool skip_dual_check = false;
    std::optional<NormMode> norm_mode; // two_norm for LP, inf_norm otherwise

    LinsysMode linsys_mode = LinsysMode::direct;
    NormalKernel linsys_kernel; // solves (I + A A') z = rhs for the problem's own A; needs scaling off

    double global_check_gate = 1e3;
    Index global_check_every = 20;

    bool scaling = true;
    ScalingOptions scaling_options;

    void validate() const
    {
        auto req = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("SolverConfig: ") + what);
        };
        req(tol > 0.0, "tol must be positive");
        req(beta > 0.0, "beta must be positive");
        req(aggressive_zeta > 0.0 && aggressive_zeta < 1.0, "aggressive_zeta must be in (0,1)");
        req(aggressive_eta > 1.0, "aggressive_eta must exceed 1");
        req(loqo_alpha > 0.0 && loqo_alpha < 1.0, "loqo_alpha must be in (0,1)");
        req(fixed_gamma > 0.0 && fixed_gamma < 1.0, "fixed_gamma must be in (0,1)");
        req(hybrid_switch_factor > 0.0, "hybrid_switch_factor must be positive");
        req(restart_period >= 2, "restart_period must be >= 2");
        req(restart_threshold >= 0, "restart_threshold must be >= 0");
        req(alpha1 >= 0.0 && alpha1 < 2.0, "alpha1 must be in [0,2)");
        req(alpha2 > 0.0 && alpha2 < 2.0, "alpha2 must be in (0,2)");
        req(inner_rule != InnerRule::conic_scaled || (conic_alpha >= 0.25 && conic_alpha <= 2.0),
            "conic_alpha must be in [0.25, 2]");
        req(max_admm_iters >= 1, "max_admm_iters must be >= 1");
        req(time_limit > 0.0, "time_limit must be positive");
        req(global_check_every >= 1, "global_check_every must be >= 1");
    }
};

struct OuterRecord
{
    Index k = 0;
    double mu = 0.0;
    Index inner_iters = 0;
    double pres = std::numeric_limits<double>::infinity();
    double dres = std::numeric_limits<double>::infinity();
    double dgap = std::numeric_limits<double>::infinity();
    Index restarts = 0;
};

using TraceSink = std::function<void(const OuterRecord&)>;

struct SolveTrace
{
    std::vector<OuterRecord> records;
    Index restarts = 0;
    Index skipped_restarts = 0; // averaged point failed the interiority check
    Index global_checks = 0;
    Index factorizations = 0;
    Index cg_iterations = 0;
};

/// Scratch space for one ADMM step.
struct StepWorkspace
{
    Vec utilde;
    BorderedWorkspace bordered;
    double cg_tol = 1e-10;
};

namespace detail
{
// u+ = prox(zeta) blockwise: y and theta shifts, cone prox on x, log prox on tau.
inline void prox_u(const HsdSystem& sys, double lambda, const Vec& zeta, Vec& u)
{
    const Index m = sys.m();
    const Index n = sys.n();
    u.head(m) = zeta.head(m);
    auto xs = u.segment(m, n);
    prox_product_into(sys.problem.cones, lambda, zeta.segment(m, n), xs);
    u[m + n] = prox_nonneg_scalar(lambda, zeta[m + n]);
    u[m + n + 1] = zeta[m + n + 1] - sys.nu;
}
} // namespace detail

/// One step of the simplified ADMM:
///   u~ = (I+Q)^{-1}(u+v),  u+ = prox(u~ - v),  v+ = v - u~ + u+.
/// The theta entry of u~ - v already carries -xi, so theta+ = theta~ - xi - nu.
inline void admm_step_in_place(const HsdSystem& sys, IterateState& st, double mu, StepWorkspace& ws)
{
    const double lambda = mu / sys.beta;
    ws.utilde = st.u + st.v;
    sys.factor.solve_in_place(ws.utilde, ws.bordered, ws.cg_tol);
    const Vec zeta = ws.utilde - st.v;
    detail::prox_u(sys, lambda, zeta, st.u);
    st.v += st.u - ws.utilde;
}

inline IterateState admm_step(const HsdSystem& sys, const IterateState& state, double mu)
{
    IterateState st = state;
    StepWorkspace ws;
    admm_step_in_place(sys, st, mu, ws);
    return st;
}

/// Half-update step:
///   v_half = a1 u + v - a1 u~,  u+ = prox(u~ - v_half),  v+ = v_half - a2 (u~ - u+).
/// a1 = 0, a2 = 1 is the plain step; a2 = 1 keeps r = 0 and xi = -nu.
inline void half_update_step_in_place(const HsdSystem& sys, IterateState& st, double mu, double alpha1,
                                      double alpha2, StepWorkspace& ws)
{
    const double lambda = mu / sys.beta;
    ws.utilde = st.u + st.v;
    sys.factor.solve_in_place(ws.utilde, ws.bordered, ws.cg_tol);
    Vec vhalf = st.v + alpha1 * (st.u - ws.utilde);
    const Vec zeta = ws.utilde - vhalf;
    detail::prox_u(sys, lambda, zeta, st.u);
    st.v = vhalf - alpha2 * (ws.utilde - st.u);
}

inline IterateState half_update_step(const HsdSystem& sys, const IterateState& state, double mu, double alpha1,
                                     double alpha2)
{
    if (!(alpha1 >= 0.0 && alpha1 < 2.0 && alpha2 > 0.0 && alpha2 < 2.0)) {
        throw std::invalid_argument("half_update_step: stepsizes out of range");
    }
    IterateState st = state;
    StepWorkspace ws;
    half_update_step_in_place(sys, st, mu, alpha1, alpha2, ws);
    return st;
}

inline double update_mu_aggressive(double mu, double zeta, double eta)
{
    if (!(zeta > 0.0 && zeta < 1.0) || !(eta > 1.0)) throw std::invalid_argument("update_mu_aggressive: bad parameters");
    return std::min(zeta * mu, std::pow(mu, eta));
}

/// Centrality measure over (x, s), (tau, kappa) and (theta, -xi). Orthant
/// entries contribute x_i s_i; other cone blocks contribute <x_k, s_k>/degree.
inline double loqo_centrality(const std::vector<Cone>& cones, const IterateState& st)
{
    const Vec x = st.x();
    const Vec s = st.s();
    double min_prod = std::numeric_limits<double>::infinity();
    Index off = 0;
    for (const auto& k : cones) {
        const Index d = k.dim();
        if (k.kind == ConeKind::nonneg) {
            min_prod = std::min(min_prod, x.segment(off, d).cwiseProduct(s.segment(off, d)).minCoeff());
        } else {
            min_prod = std::min(min_prod, x.segment(off, d).dot(s.segment(off, d)) / double(k.barrier_degree()));
        }
        off += d;
    }
    const double tk = st.tau() * st.kappa();
    const double tx = st.theta() * (-st.xi());
    min_prod = std::min({min_prod, tk, tx});
    const double total = x.dot(s) + tk + tx;
    const double degree = double(total_barrier_degree(cones)) + 2.0;
    if (!(total > 0.0)) return 0.0;
    return degree * min_prod / total;
}

inline double update_mu_loqo(const std::vector<Cone>& cones, const IterateState& st, double mu, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("update_mu_loqo: alpha must be in (0,1)");
    const double phi = loqo_centrality(cones, st);
    if (!(phi > 0.0)) return alpha * mu;
    const double inner = std::min(0.05 * (1.0 - phi) / phi, 2.0);
    return mu * std::max(0.1 * inner * inner * inner, alpha);
}

struct InnerRuleSpec
{
    InnerRule rule = InnerRule::plain_residual;
    double alpha = 1.0; // conic_scaled exponent
};

inline bool inner_converged(const HsdSystem& sys, const IterateState& st, double mu, const InnerRuleSpec& rule)
{
    const double res = (apply_Q(sys, st.u) - st.v).norm();
    switch (rule.rule) {
    case InnerRule::plain_residual: return res * res <= mu;
    case InnerRule::with_average: {
        if (res * res <= mu) return true;
        if (st.cycle_count == 0) return false;
        const double avg = (apply_Q(sys, st.u_avg()) - st.v_avg()).norm();
        return avg * avg <= mu;
    }
    case InnerRule::conic_scaled: {
        const double scale = 1.0 + std::sqrt(st.u.squaredNorm() + st.v.squaredNorm());
        return res <= std::pow(mu, rule.alpha) * scale;
    }
    }
    return false;
}

struct ProblemFeatures
{
    Index m = 0;
    Index n = 0;
    Index nnz = 0;
    double density = 0.0;
    double aspect = 0.0; // n/m

    static ProblemFeatures of(const ConicProblem& p)
    {
        ProblemFeatures f;
        f.m = p.rows();
        f.n = p.cols();
        f.nnz = p.A.nonZeros();
        f.density = double(f.nnz) / (double(f.m) * double(f.n));
        f.aspect = double(f.n) / double(f.m);
        return f;
    }
};

enum class StrategyPreset : std::uint8_t
{
    plain_hybrid,     // no restart, hybrid mu
    restart_scaling,  // restart + scaling, aggressive mu
    half_update_loqo, // half update + scaling, loqo mu
};

inline std::string_view to_string(StrategyPreset p)
{
    switch (p) {
    case StrategyPreset::plain_hybrid: return "plain_hybrid";
    case StrategyPreset::restart_scaling: return "restart_scaling";
    case StrategyPreset::half_update_loqo: return "half_update_loqo";
    }
    return "unknown";
}

/// Hand-written rule table on density and aspect ratio.
inline StrategyPreset select_strategy(const ProblemFeatures& f)
{
    if (f.density > 0.1 && f.n < 10000) return StrategyPreset::plain_hybrid;
    if (f.aspect <= 2.0) return StrategyPreset::restart_scaling;
    return StrategyPreset::half_update_loqo;
}

inline SolverConfig apply_strategy(SolverConfig cfg, StrategyPreset preset)
{
    switch (preset) {
    case StrategyPreset::plain_hybrid:
        cfg.restart_enabled = false;
        cfg.half_update = false;
        cfg.mu_strategy = MuStrategy::hybrid;
        break;
    case StrategyPreset::restart_scaling:
        cfg.restart_enabled = true;
        cfg.half_update = false;
        cfg.scaling = true;
        cfg.mu_strategy = MuStrategy::aggressive;
        break;
    case StrategyPreset::half_update_loqo:
        cfg.restart_enabled = false;
        cfg.half_update = true;
        cfg.scaling = true;
        cfg.mu_strategy = MuStrategy::loqo;
        break;
    }
    return cfg;
}

namespace detail
{
inline double next_mu(const SolverConfig& cfg, const std::vector<Cone>& cones, const IterateState& st, double mu)
{
    switch (cfg.mu_strategy) {
    case MuStrategy::aggressive: return update_mu_aggressive(mu, cfg.aggressive_zeta, cfg.aggressive_eta);
    case MuStrategy::loqo: return update_mu_loqo(cones, st, mu, cfg.loqo_alpha);
    case MuStrategy::hybrid:
        if (mu <= cfg.hybrid_switch_factor * cfg.tol) return update_mu_loqo(cones, st, mu, cfg.loqo_alpha);
        return update_mu_aggressive(mu, cfg.aggressive_zeta, cfg.aggressive_eta);
    case MuStrategy::fixed: return cfg.fixed_gamma * mu;
    }
    return mu;
}

// Raw homogeneous (x, y, s) of the current iterate in original coordinates.
struct OriginalIterate
{
    Vec x, y, s;
    double tau = 0.0;
    double kappa = 0.0;
};

inline OriginalIterate to_original(const IterateState& st, const ScalingInfo* scaling)
{
    OriginalIterate o{st.x(), st.y(), st.s(), st.tau(), st.kappa()};
    if (scaling) unscale(*scaling, o.x, o.y, o.s);
    return o;
}

// Infeasibility certificate quality: dual ray (y, s) with b'y > 0 and
// A'y + s = 0, or primal ray x with c'x < 0 and A x = 0, both relative to tol.
inline std::optional<Status> certificate(const ConicProblem& p, const OriginalIterate& o, double tol)
{
    if (!kappa_dominates(o.tau, o.kappa)) return std::nullopt;
    const double bty = p.b.dot(o.y);
    const double ctx = p.c.dot(o.x);
    const bool primal_cert = bty > 0.0 &&
        (p.A.transpose() * o.y + o.s).lpNorm<Eigen::Infinity>() <= tol * bty * (1.0 + p.c.lpNorm<Eigen::Infinity>());
    const bool dual_cert = ctx < 0.0 &&
        (p.A * o.x).lpNorm<Eigen::Infinity>() <= -tol * ctx * (1.0 + p.b.lpNorm<Eigen::Infinity>());
    if (primal_cert && dual_cert) return bty >= -ctx ? Status::primal_infeasible : Status::dual_infeasible;
    if (primal_cert) return Status::primal_infeasible;
    if (dual_cert) return Status::dual_infeasible;
    return std::nullopt;
}
} // namespace detail

/// Runs the double-loop method. Numerical trouble is reported through the
/// status; invalid input or configuration throws std::invalid_argument.
inline SolveResult solve(const ConicProblem& problem, const SolverConfig& cfg, SolveTrace* trace = nullptr,
                         const TraceSink& sink = {})
{
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

    problem.validate();
    cfg.validate();
    if (cfg.skip_dual_check && !problem.has_null_objective()) {
        throw std::invalid_argument("skip_dual_check requires a null objective (c = 0)");
    }
    if (cfg.linsys_kernel && cfg.scaling) {
        throw std::invalid_argument("a custom linsys kernel is built for the unscaled A; disable scaling");
    }
    SolveTrace local_trace;
    SolveTrace& tr = trace ? *trace : local_trace;
    tr = SolveTrace{};

    const NormMode norm_mode = cfg.norm_mode.value_or(problem.is_lp() ? NormMode::two_norm : NormMode::inf_norm);

    std::optional<ScalingInfo> scaling;
    if (cfg.scaling) scaling = compute_scaling(problem, cfg.scaling_options);
    const ConicProblem scaled = scaling ? apply_scaling(problem, *scaling) : problem;

    SolveResult result;
    result.tol = cfg.tol;

    // The all-zero dual is feasible for a null objective, so dres may be dropped.
    if (cfg.skip_dual_check) {
        const Vec zero_y = Vec::Zero(problem.rows());
        if ((problem.A.transpose() * zero_y - problem.c).lpNorm<Eigen::Infinity>() != 0.0) {
            throw std::logic_error("null-objective dual check failed");
        }
    }

    EmbeddingOptions eopts;
    eopts.beta = cfg.beta;
    eopts.linsys.mode = cfg.linsys_mode;
    eopts.linsys.kernel = cfg.linsys_kernel;

    const long fact_before = diagnostics::factorization_count();
    HsdSystem sys;
    try {
        sys = build_embedding(scaled, eopts);
    } catch (const NumericalError&) {
        result.status = Status::numerical_failure;
        result.x = Vec::Zero(problem.cols());
        result.y = Vec::Zero(problem.rows());
        result.s = Vec::Zero(problem.cols());
        result.wall_time = elapsed();
        return result;
    }
    tr.factorizations = diagnostics::factorization_count() - fact_before;

    IterateState st = initial_state(sys);
    StepWorkspace ws;
    const InnerRuleSpec rule{cfg.inner_rule, cfg.conic_alpha};
    const ScalingInfo* sc = scaling ? &*scaling : nullptr;

    double mu = cfg.beta;
    std::optional<Status> final_status;
    std::optional<Residuals> final_res;
    Index outer = 0;

    auto global_check = [&]() -> bool {
        ++tr.global_checks;
        const auto o = detail::to_original(st, sc);
        if (o.tau > 0.0 && !kappa_dominates(o.tau, o.kappa)) {
            const Residuals r = compute_residuals(problem, o.x, o.y, o.s, o.tau, norm_mode);
            if (r.max(cfg.skip_dual_check) <= cfg.tol && o.tau > cfg.tol * o.kappa) {
                final_status = Status::optimal;
                final_res = r;
                return true;
            }
        }
        if (auto cert = detail::certificate(problem, o, cfg.tol)) {
            final_status = cert;
            return true;
        }
        return false;
    };

    try {
        bool done = false;
        while (!done) {
            st.inner_count = 0;
            st.reset_cycle();
            ws.cg_tol = std::min(1e-9, 0.1 * mu);
            const bool gate = mu < cfg.global_check_gate * cfg.tol;
            for (;;) {
                if (cfg.half_update) {
                    half_update_step_in_place(sys, st, mu, cfg.alpha1, cfg.alpha2, ws);
                } else {
                    admm_step_in_place(sys, st, mu, ws);
                }
                ++st.inner_count;
                ++st.total_count;
                st.accumulate();
                if (!st.u.allFinite() || !st.v.allFinite()) throw NumericalError("non-finite iterate");

                if (cfg.restart_enabled && st.total_count >= cfg.restart_threshold &&
                    st.cycle_count % cfg.restart_period == 0) {
                    Vec ua = st.u_avg();
                    Vec va = st.v_avg();
                    const Index m = sys.m();
                    const Index n = sys.n();
                    if (is_interior(sys.problem.cones, ua.segment(m, n)) &&
                        is_interior(sys.problem.cones, va.segment(m, n)) && ua[m + n] > 0.0 && va[m + n] > 0.0) {
                        st.u = std::move(ua);
                        st.v = std::move(va);
                        ++tr.restarts;
                    } else {
                        ++tr.skipped_restarts;
                    }
                    st.reset_cycle();
                }

                if (gate && (mu < cfg.tol || st.inner_count % cfg.global_check_every == 0)) {
                    if (global_check()) {
                        done = true;
                        break;
                    }
                }
                if (st.total_count >= cfg.max_admm_iters) {
                    final_status = Status::iteration_limit;
                    done = true;
                    break;
                }
                if (elapsed() > cfg.time_limit) {
                    final_status = Status::time_limit;
                    done = true;
                    break;
                }
                if (mu > cfg.mu_floor && inner_converged(sys, st, mu, rule)) break;
            }

            OuterRecord rec;
            rec.k = outer;
            rec.mu = mu;
            rec.inner_iters = st.inner_count;
            rec.restarts = tr.restarts;
            if (st.tau() > 0.0) {
                const auto o = detail::to_original(st, sc);
                const Residuals r = compute_residuals(problem, o.x, o.y, o.s, o.tau, norm_mode);
                rec.pres = r.pres;
                rec.dres = r.dres;
                rec.dgap = r.dgap;
            }
            tr.records.push_back(rec);
            if (sink) sink(rec);
            ++outer;
            if (done) break;

            const double mu_next = std::max(detail::next_mu(cfg, sys.problem.cones, st, mu), cfg.mu_floor);
            if (cfg.half_update) {
                const double f = std::sqrt(mu_next / mu);
                st.u *= f;                               // y, x, tau, theta
                st.v.segment(sys.m(), sys.n() + 1) *= f; // s, kappa
                st.r().setZero();
                st.xi() = -sys.nu;
            }
            mu = mu_next;
        }
        tr.cg_iterations = ws.bordered.cg_iterations;
    } catch (const NumericalError&) {
        final_status = Status::numerical_failure;
    }

    // Assemble the result in original coordinates.
    const auto o = detail::to_original(st, sc);
    result.tau = o.tau;
    result.kappa = o.kappa;
    result.outer_iters = outer;
    result.admm_iters = st.total_count;
    const bool candidate = o.tau > 0.0 && !kappa_dominates(o.tau, o.kappa);
    if (candidate) {
        result.x = o.x / o.tau;
        result.y = o.y / o.tau;
        result.s = o.s / o.tau;
        result.residuals = compute_residuals(problem, o.x, o.y, o.s, o.tau, norm_mode);
        result.objective_primal = problem.c.dot(result.x);
        result.objective_dual = problem.b.dot(result.y);
    } else {
        result.x = o.x;
        result.y = o.y;
        result.s = o.s;
        result.objective_primal = problem.c.dot(o.x);
        result.objective_dual = problem.b.dot(o.y);
    }
    if (final_res) result.residuals = *final_res;
    result.status = final_status.value_or(Status::numerical_failure);
    result.wall_time = elapsed();
    return result;
}

} // namespace abip

#endif // ABIP_SOLVER_HPP
