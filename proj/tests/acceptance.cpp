// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cstdlib>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "abip/bench.hpp"
#include "abip/cones.hpp"
#include "abip/hsd.hpp"
#include "abip/precond.hpp"
#include "abip/problems/generators.hpp"
#include "abip/solver.hpp"
#include "oracles/newton_prox.hpp"
#include "oracles/opt_oracles.hpp"
#include "oracles/reference_admm.hpp"

using namespace abip;

namespace
{
struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Vec random_vec(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

Mat random_mat(Index m, Index n, std::mt19937_64& rng)
{
    Mat a(m, n);
    a.reshaped() = random_vec(m * n, rng);
    return a;
}

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

ConicProblem scalar_lp(double a, double b, double c)
{
    ConicProblem p;
    p.A.resize(1, 1);
    if (a != 0.0) p.A.insert(0, 0) = a;
    p.A.makeCompressed();
    p.b = Vec::Constant(1, b);
    p.c = Vec::Constant(1, c);
    p.cones = {Cone::nonneg(1)};
    return p;
}

// ------------------------------------------------------------------ 1

Outcome reference_equivalence()
{
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    double worst_uv = 0.0;
    double worst_pq = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index m = std::uniform_int_distribution<Index>(5, 20)(rng);
        const Index n = std::uniform_int_distribution<Index>(std::max<Index>(10, m + 1), 40)(rng);
        const auto lp = problems::gen_random_lp(m, n, 0.4, 100 + std::uint64_t(trial));
        const auto sys = build_embedding(lp.problem);
        const oracle::ReferenceAdmm ref(
            oracle::dense_embedding(lp.problem.A, lp.problem.b, lp.problem.c, sys.x0, sys.s0), sys.beta);
        auto rs = ref.start();
        auto st = initial_state(sys);
        double mu = 1.0;
        for (int it = 0; it < 200; ++it) {
            if (it % 40 == 39) mu *= 0.3;
            ref.step(rs, mu);
            st = admm_step(sys, st, mu);
            worst_pq = std::max({worst_pq, inf_norm(rs.p - rs.v), inf_norm(rs.q - rs.u)});
            worst_uv = std::max({worst_uv, inf_norm(rs.u - st.u), inf_norm(rs.v - st.v)});
        }
    }
    const double secs = seconds_since(t0);
    o.detail << "max |u,v deviation| " << worst_uv << ", max |p-v|,|q-u| " << worst_pq << ", " << secs << " s";
    o.require(worst_uv <= 1e-10, "iterate deviation");
    o.require(worst_pq <= 1e-10, "p = v, q = u");
    o.require(secs < 5.0, "runtime");
    return o;
}

// ------------------------------------------------------------------ 2

Outcome prox_suite()
{
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> loglam(-6.0, 1.0);
    std::uniform_real_distribution<double> logscale(-1.0, 1.0);
    auto draw = [&](Index dim, double& lambda) {
        lambda = std::pow(10.0, loglam(rng));
        return Vec(std::pow(10.0, logscale(rng)) * random_vec(dim, rng));
    };

    double worst_agree = 0.0;
    double worst_stat = 0.0;
    double floor_stat = 0.0;
    bool interior = true;
    const std::pair<ConeKind, oracle::Barrier> kinds[] = {{ConeKind::nonneg, oracle::Barrier::nonneg},
                                                          {ConeKind::soc, oracle::Barrier::soc},
                                                          {ConeKind::rsoc, oracle::Barrier::rsoc}};
    for (auto [kind, barrier] : kinds) {
        for (int q = 0; q < 1000; ++q) {
            Index dim = 1;
            Cone cone = Cone::nonneg(1);
            if (kind == ConeKind::soc) {
                dim = std::uniform_int_distribution<Index>(2, 10)(rng);
                cone = Cone::soc(dim);
            } else if (kind == ConeKind::rsoc) {
                dim = std::uniform_int_distribution<Index>(3, 10)(rng);
                cone = Cone::rsoc(dim);
            } else {
                dim = std::uniform_int_distribution<Index>(1, 10)(rng);
                cone = Cone::nonneg(dim);
            }
            double lambda = 0.0;
            const Vec zeta = draw(dim, lambda);
            const Vec x = prox_cone(cone, lambda, zeta);
            interior = interior && interior_margin(cone, x) > 0.0;
            worst_stat = std::max(worst_stat, oracle::stationarity_extended(barrier, lambda, zeta, x));
            const auto ref = oracle::prox_newton(barrier, lambda, zeta);
            worst_agree = std::max(worst_agree, (x - ref.x).norm() / (1.0 + zeta.norm()));
            // the same residual for the exact prox rounded to double
            floor_stat = std::max(floor_stat, oracle::stationarity_extended(barrier, lambda, zeta, ref.x));
        }
    }

    // SDC: 1000 queries spread over orders 1..20
    double worst_sdp = 0.0;
    double worst_sdp_agree = 0.0;
    for (int q = 0; q < 1000; ++q) {
        const Index k = 1 + q % 20;
        double lambda = 0.0;
        const Vec packed = draw(k * (k + 1) / 2, lambda);
        const Mat a = smat(packed);
        const Mat x = prox_sdc(lambda, a);
        const Eigen::SelfAdjointEigenSolver<Mat> eig(x);
        interior = interior && eig.eigenvalues().minCoeff() > 0.0;
        const Mat r = -lambda * x.inverse() + x - a;
        worst_sdp = std::max(worst_sdp, r.norm() / (1.0 + a.norm() + x.norm()));
        // the Kronecker oracle is cubic in k^2; compare on a subset of the larger orders
        if (k <= 10 || q < 40) {
            const Mat ref = oracle::prox_newton_sdc(lambda, a);
            worst_sdp_agree = std::max(worst_sdp_agree, (x - ref).norm() / (1.0 + a.norm()));
        }
    }
    const double secs = seconds_since(t0);
    o.detail << "nonneg/soc/rsoc: stationarity " << worst_stat << " (rounded exact prox: " << floor_stat
             << "), oracle gap " << worst_agree << "; sdc: residual "
             << worst_sdp << ", oracle gap " << worst_sdp_agree << ", " << secs << " s";
    o.require(interior, "interiority");
    o.require(worst_stat <= 1e-9, "stationarity");
    o.require(worst_agree <= 1e-8, "newton agreement");
    o.require(worst_sdp <= 1e-8, "sdc residual");
    o.require(worst_sdp_agree <= 1e-8, "sdc newton agreement");
    o.require(secs < 30.0, "runtime");
    return o;
}

// ------------------------------------------------------------------ 3

Outcome projection_invariants()
{
    Outcome o;
    std::mt19937_64 rng(3);
    double worst_solve = 0.0;
    double worst_identity = 0.0;
    double worst_modes = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index m = std::uniform_int_distribution<Index>(5, 30)(rng);
        const Index n = std::uniform_int_distribution<Index>(m + 1, 60)(rng);
        const auto lp = problems::gen_random_lp(m, n, 0.3, 300 + std::uint64_t(trial));
        const auto sys = build_embedding(lp.problem);
        EmbeddingOptions ind;
        ind.linsys.mode = LinsysMode::indirect;
        const auto sys_i = build_embedding(lp.problem, ind);
        const auto de = oracle::dense_embedding(lp.problem.A, lp.problem.b, lp.problem.c, sys.x0, sys.s0);
        const Mat ipq = Mat::Identity(sys.size(), sys.size()) + de.Q;
        auto st = initial_state(sys);
        for (int k = 0; k < 100; ++k) {
            const Vec w = random_vec(sys.size(), rng);
            const Vec ut = solve_bordered(sys.factor, w);
            worst_solve = std::max(worst_solve, inf_norm(ipq * ut - w) / (1.0 + inf_norm(w)));
            worst_modes = std::max(worst_modes, inf_norm(ut - solve_bordered(sys_i.factor, w, 1e-12)));

            // along the iteration: u~ + Q u~ = u + v
            const Vec uv = st.u + st.v;
            const Vec ui = solve_bordered(sys.factor, uv);
            worst_identity = std::max(worst_identity, inf_norm(ui + apply_Q(sys, ui) - uv) / (1.0 + inf_norm(uv)));
            st = admm_step(sys, st, std::pow(0.9, k));
        }
    }
    o.detail << "solve residual " << worst_solve << ", identity residual " << worst_identity << ", direct vs indirect "
             << worst_modes;
    o.require(worst_solve <= 1e-9, "bordered solve");
    o.require(worst_identity <= 1e-9, "projection identity");
    o.require(worst_modes <= 1e-6, "mode agreement");
    return o;
}

// ------------------------------------------------------------------ 4

Outcome end_to_end_lp()
{
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4);
    int runs = 0;
    int optimal = 0;
    double worst_spread = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index m = std::uniform_int_distribution<Index>(5, 50)(rng);
        const Index n = std::uniform_int_distribution<Index>(m + 1, 100)(rng);
        const auto lp = problems::gen_random_lp(m, n, 0.3, 4000 + std::uint64_t(trial));
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (bool restart : {true, false}) {
            for (auto mu : {MuStrategy::aggressive, MuStrategy::loqo, MuStrategy::hybrid}) {
                for (bool half : {false, true}) {
                    for (bool scaling : {true, false}) {
                        SolverConfig cfg;
                        cfg.tol = 1e-6;
                        cfg.restart_enabled = restart;
                        cfg.mu_strategy = mu;
                        cfg.half_update = half;
                        cfg.scaling = scaling;
                        cfg.max_admm_iters = 1000000;
                        const auto r = solve(lp.problem, cfg);
                        ++runs;
                        if (r.status != Status::optimal) continue;
                        ++optimal;
                        lo = std::min(lo, r.objective_primal);
                        hi = std::max(hi, r.objective_primal);
                    }
                }
            }
        }
        if (std::isfinite(lo)) worst_spread = std::max(worst_spread, (hi - lo) / (1.0 + std::abs(lo)));
    }
    const double secs = seconds_since(t0);
    const double rate = double(optimal) / double(runs);
    o.detail << optimal << "/" << runs << " optimal, max objective spread " << worst_spread << ", " << secs << " s";
    o.require(rate >= 0.95, "optimal rate");
    o.require(worst_spread <= 2e-6, "objective agreement");
    o.require(secs < 600.0, "runtime");
    return o;
}

// ------------------------------------------------------------------ 5

Outcome infeasibility()
{
    Outcome o;
    SolverConfig cfg;
    cfg.max_admm_iters = 100000;
    const auto p = solve(scalar_lp(1.0, -1.0, 0.0), cfg);
    const auto d = solve(scalar_lp(0.0, 0.0, -1.0), cfg);
    o.detail << "x = -1: " << to_string(p.status) << " after " << p.admm_iters << " iterations; min -x unbounded: "
             << to_string(d.status) << " after " << d.admm_iters << " iterations";
    o.require(p.status == Status::primal_infeasible, "primal infeasible");
    o.require(d.status == Status::dual_infeasible, "dual infeasible");
    return o;
}

// ------------------------------------------------------------------ 6

Outcome staircase_pagerank()
{
    Outcome o;
    const auto t0 = Clock::now();
    const auto pr = problems::gen_staircase_pagerank(1000, 0.99, 6);
    SolverConfig cfg;
    cfg.tol = 1e-6;
    cfg.skip_dual_check = true;
    const auto r = solve(pr.problem, cfg);
    const double secs = seconds_since(t0);
    const Vec x = r.x.head(1000);
    const double sum_gap = std::abs(x.sum() - 1.0);
    const double stationary = (pr.S * x - x).maxCoeff();
    o.detail << to_string(r.status) << ", min x " << x.minCoeff() << ", |1'x - 1| " << sum_gap << ", max(Sx - x) "
             << stationary << ", " << secs << " s";
    o.require(r.status == Status::optimal, "status");
    o.require(x.minCoeff() >= -1e-6, "x >= -1e-6");
    o.require(sum_gap <= 1e-6, "|1'x - 1| <= 1e-6");
    o.require(stationary <= 1e-6, "max(Sx - x) <= 1e-6");
    o.require(secs < 60.0, "runtime");
    return o;
}

// ------------------------------------------------------------------ 7

Outcome lasso()
{
    Outcome o;
    const auto inst = problems::gen_lasso_socp(100, 500, 7);
    SolverConfig cfg;
    cfg.tol = 1e-3;
    const auto r = solve(inst.problem, cfg);
    const Vec x = problems::lasso_extract_x(r.x, 100, 500);
    const double f = problems::lasso_objective(inst.a, inst.b, inst.lambda, x);
    const auto ref = oracle::lasso_coordinate_descent(inst.a, inst.b, inst.lambda, 1e-10);
    const double rel = std::abs(f - ref.objective) / std::abs(ref.objective);

    std::mt19937_64 rng(7);
    double worst_kernel = 0.0;
    for (auto [m, n] : {std::pair<Index, Index>{20, 50}, std::pair<Index, Index>{50, 20}}) {
        const Mat a = random_mat(m, n, rng);
        const problems::LassoReducedSolver solver(a, 2.0);
        Mat k = 2.0 * a * a.transpose();
        k.diagonal().array() += 2.0;
        const Vec rhs = random_vec(m, rng);
        const Vec ref_z = k.llt().solve(rhs);
        worst_kernel = std::max(worst_kernel, inf_norm(solver.solve(rhs) - ref_z) / (1.0 + inf_norm(ref_z)));
    }
    o.detail << to_string(r.status) << ", objective " << f << " vs oracle " << ref.objective << " (rel " << rel
             << "), reduced solver gap " << worst_kernel;
    o.require(r.status == Status::optimal, "status");
    o.require(rel <= 1e-3, "objective");
    o.require(worst_kernel <= 1e-9, "reduced solver");
    return o;
}

// ------------------------------------------------------------------ 8

Outcome svm()
{
    Outcome o;
    const auto inst = problems::gen_svm(200, 20, 1.0, 8);
    SolverConfig cfg;
    cfg.tol = 1e-3;
    const auto r = solve(inst.problem, cfg);
    const auto s = problems::svm_extract(r.x, 200, 20);
    const double f = problems::svm_objective(inst.x, inst.y, 1.0, s.w, s.bias);
    const auto ref = oracle::svm_dual_projected_gradient(inst.x, inst.y, 1.0, 1e-8);
    const double rel = std::abs(f - ref.objective) / std::abs(ref.objective);

    std::mt19937_64 rng(8);
    double worst_kernel = 0.0;
    for (auto [m, n] : {std::pair<Index, Index>{10, 30}, std::pair<Index, Index>{40, 5}}) {
        const Mat at = random_mat(m, n, rng);
        Vec y(m);
        for (Index i = 0; i < m; ++i) y[i] = i % 2 ? -1.0 : 1.0;
        const Mat k = 3.0 * Mat::Identity(m, m) + at * at.transpose() + 2.0 * y * y.transpose();
        const Vec rhs = random_vec(m, rng);
        const Vec ref_z = k.llt().solve(rhs);
        worst_kernel = std::max(worst_kernel, inf_norm(problems::svm_reduced_solve(at, y, rhs) - ref_z) /
                                                  (1.0 + inf_norm(ref_z)));
    }
    o.detail << to_string(r.status) << ", objective " << f << " vs oracle " << ref.objective << " (rel " << rel
             << "), reduced solver gap " << worst_kernel;
    o.require(r.status == Status::optimal, "status");
    o.require(rel <= 1e-2, "objective");
    o.require(worst_kernel <= 1e-9, "reduced solver");
    return o;
}

// ------------------------------------------------------------------ 9

Outcome preconditioning()
{
    Outcome o;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    double lo = 1.0;
    double hi = 1.0;
    for (int t = 0; t < 50; ++t) {
        const Index m = 30;
        const Index n = 50;
        std::vector<Triplet> trips;
        for (Index j = 0; j < n; ++j) {
            for (Index i = 0; i < m; ++i) {
                if (u(rng) < 0.1) trips.emplace_back(int(i), int(j), nd(rng));
            }
            trips.emplace_back(int(j % m), int(j), nd(rng));
        }
        SparseMatrix a(m, n);
        a.setFromTriplets(trips.begin(), trips.end());
        const Mat s = ruiz_scale(a, 10).A;
        const Vec rows = s.cwiseAbs().rowwise().maxCoeff();
        const Vec cols = s.cwiseAbs().colwise().maxCoeff().transpose();
        lo = std::min({lo, rows.minCoeff(), cols.minCoeff()});
        hi = std::max({hi, rows.maxCoeff(), cols.maxCoeff()});
    }
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const auto lp = problems::gen_random_lp(20, 40, 0.3, 9000 + std::uint64_t(t));
        SolverConfig on;
        SolverConfig off;
        off.scaling = false;
        const auto a = solve(lp.problem, on);
        const auto b = solve(lp.problem, off);
        if (a.status != Status::optimal || b.status != Status::optimal) {
            worst = std::numeric_limits<double>::infinity();
            continue;
        }
        worst = std::max(worst, std::abs(a.objective_primal - b.objective_primal) / (1.0 + std::abs(b.objective_primal)));
    }
    o.detail << "Ruiz norms in [" << lo << ", " << hi << "], scaled vs unscaled objective gap " << worst;
    o.require(lo >= 0.95 && hi <= 1.05, "Ruiz norms");
    o.require(worst <= 1e-5, "objective agreement");
    return o;
}

// ------------------------------------------------------------------ 10

Outcome sgm()
{
    Outcome o;
    const double zero = bench::shifted_geometric_mean(std::vector<double>{0.0, 0.0});
    const double pair = bench::shifted_geometric_mean(std::vector<double>{10.0, 40.0});
    const double expect = std::sqrt(1000.0) - 10.0;
    o.detail << "sgm(0, 0) = " << zero << ", sgm(10, 40) = " << pair << " (expected " << expect << ")";
    o.require(zero == 0.0, "zero runtimes");
    o.require(std::abs(pair - expect) <= 1e-9, "sqrt(1000) - 10");
    return o;
}
} // namespace

// optional argument: run only the criterion with that number
int main(int argc, char** argv)
{
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"reference ADMM equivalence", reference_equivalence},
        {"proximal operator suite", prox_suite},
        {"projection invariants", projection_invariants},
        {"end-to-end LP over strategy combinations", end_to_end_lp},
        {"infeasibility detection", infeasibility},
        {"staircase PageRank", staircase_pagerank},
        {"LASSO", lasso},
        {"SVM", svm},
        {"preconditioning", preconditioning},
        {"SGM arithmetic", sgm},
    };
    int failed = 0;
    int k = 0;
    for (const auto& [name, run] : criteria) {
        ++k;
        if (only != 0 && k != only) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        if (!o.pass) ++failed;
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
