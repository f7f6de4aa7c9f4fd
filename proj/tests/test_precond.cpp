#include <catch_amalgamated.hpp>

#include <random>

#include "abip/precond.hpp"
#include "abip/problems/generators.hpp"
#include "abip/solver.hpp"

using namespace abip;
using Catch::Matchers::WithinAbs;

namespace
{
SparseMatrix dense_to_sparse(const Mat& d)
{
    SparseMatrix s = d.sparseView();
    s.makeCompressed();
    return s;
}

SparseMatrix random_sparse_nonempty(Index m, Index n, double density, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_int_distribution<Index> ri(0, m - 1);
    std::vector<Triplet> t;
    auto val = [&] {
        const double v = nd(rng);
        return v != 0.0 ? v : 1.0;
    };
    for (Index j = 0; j < n; ++j) {
        bool any = false;
        for (Index i = 0; i < m; ++i) {
            if (u(rng) < density) {
                t.emplace_back(int(i), int(j), val());
                any = true;
            }
        }
        if (!any) t.emplace_back(int(ri(rng)), int(j), val());
    }
    for (Index i = 0; i < m; ++i) t.emplace_back(int(i), int(i % n), val());
    SparseMatrix a(m, n);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
}

void inf_norms(const SparseMatrix& a, Vec& rows, Vec& cols)
{
    const Mat d = a;
    rows = d.cwiseAbs().rowwise().maxCoeff();
    cols = d.cwiseAbs().colwise().maxCoeff().transpose();
}
} // namespace

TEST_CASE("Ruiz on diag(4, 1)")
{
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    const auto r = ruiz_scale(dense_to_sparse(d), 1);
    CHECK(r.d1 == (Vec(2) << 2.0, 1.0).finished());
    CHECK(r.d2 == (Vec(2) << 2.0, 1.0).finished());
    CHECK((Mat(r.A) - Mat::Identity(2, 2)).isZero(0.0));
}

TEST_CASE("Ruiz fixed point for unit infinity norms")
{
    Mat d(2, 3);
    d << 1, -0.5, 0, 0.25, 1, -1;
    const auto r = ruiz_scale(dense_to_sparse(d), 5);
    CHECK(r.d1.isOnes(0.0));
    CHECK(r.d2.isOnes(0.0));
}

TEST_CASE("Pock-Chambolle examples")
{
    Mat d(2, 2);
    d << 1, 1, 0, 1;
    const auto r = pock_chambolle_scale(dense_to_sparse(d), 1.0);
    CHECK_THAT(r.d1[0], WithinAbs(std::sqrt(2.0), 1e-15));
    CHECK(r.d1[1] == 1.0);
    CHECK(r.d2[0] == 1.0);
    CHECK_THAT(r.d2[1], WithinAbs(std::sqrt(2.0), 1e-15));
    const Mat a = r.A;
    CHECK_THAT(a(0, 0), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
    CHECK_THAT(a(0, 1), WithinAbs(0.5, 1e-15));
    CHECK(a(1, 0) == 0.0);
    CHECK_THAT(a(1, 1), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));

    const auto id = pock_chambolle_scale(dense_to_sparse(Mat::Identity(3, 3)), 1.0);
    CHECK(id.d1.isOnes(0.0));
    CHECK(id.d2.isOnes(0.0));
}

TEST_CASE("scaled matrix equals D1^-1 A D2^-1 for any alpha")
{
    std::mt19937_64 rng(2);
    for (double alpha : {0.3, 1.0, 1.7}) {
        const SparseMatrix a = random_sparse_nonempty(12, 20, 0.3, rng);
        const auto r = pock_chambolle_scale(a, alpha);
        const Mat expect = r.d1.cwiseInverse().asDiagonal() * Mat(a) * r.d2.cwiseInverse().asDiagonal();
        CHECK((Mat(r.A) - expect).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + expect.cwiseAbs().maxCoeff()));
    }
    CHECK_THROWS_AS(pock_chambolle_scale(dense_to_sparse(Mat::Identity(2, 2)), 2.0), std::invalid_argument);
}

TEST_CASE("Ruiz converges on random sparse matrices")
{
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const SparseMatrix a = random_sparse_nonempty(30, 50, 0.1, rng);
        const auto r = ruiz_scale(a, 10);
        Vec rows, cols;
        inf_norms(r.A, rows, cols);
        CHECK(rows.minCoeff() >= 0.95);
        CHECK(rows.maxCoeff() <= 1.05);
        CHECK(cols.minCoeff() >= 0.95);
        CHECK(cols.maxCoeff() <= 1.05);
    }
}

TEST_CASE("empty rows and columns")
{
    SparseMatrix a(2, 2);
    a.insert(0, 0) = 3.0;
    a.makeCompressed();
    CHECK_THROWS_WITH(ruiz_scale(a, 1), Catch::Matchers::ContainsSubstring("row 1"));
    CHECK_THROWS_WITH(pock_chambolle_scale(a, 1.0), Catch::Matchers::ContainsSubstring("row 1"));
    const auto r = ruiz_scale(a, 3, true);
    CHECK(r.d1[1] == 1.0);
    CHECK(r.d2[1] == 1.0);
}

TEST_CASE("apply_scaling and unscale")
{
    const auto lp = problems::gen_random_lp(10, 25, 0.3, 9);
    SECTION("identity scaling leaves the problem unchanged")
    {
        const auto id = ScalingInfo::identity(10, 25);
        const auto p = apply_scaling(lp.problem, id);
        CHECK((Mat(p.A) - Mat(lp.problem.A)).isZero(0.0));
        CHECK(p.b == lp.problem.b);
        CHECK(p.c == lp.problem.c);
    }
    SECTION("objective and feasibility carry over exactly")
    {
        const auto info = compute_scaling(lp.problem, {});
        const auto p = apply_scaling(lp.problem, info);
        // x~ = D2 x, y~ = D1 y, s~ = D2^-1 s
        const Vec xt = lp.x0.cwiseProduct(info.d2);
        const Vec yt = lp.y0.cwiseProduct(info.d1);
        const Vec st = lp.s0.cwiseQuotient(info.d2);
        CHECK_THAT(p.c.dot(xt), WithinAbs(lp.problem.c.dot(lp.x0), 1e-12 * (1.0 + std::abs(lp.problem.c.dot(lp.x0)))));
        CHECK((p.A * xt - p.b).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + p.b.lpNorm<Eigen::Infinity>()));
        CHECK((p.A.transpose() * yt + st - p.c).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + p.c.lpNorm<Eigen::Infinity>()));
        Vec x = xt, y = yt, s = st;
        unscale(info, x, y, s);
        CHECK((x - lp.x0).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + lp.x0.lpNorm<Eigen::Infinity>()));
        CHECK((y - lp.y0).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + lp.y0.lpNorm<Eigen::Infinity>()));
        CHECK((s - lp.s0).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + lp.s0.lpNorm<Eigen::Infinity>()));
    }
    SECTION("normalized b and c unscale exactly")
    {
        ScalingOptions o;
        o.normalize_bc = true;
        const auto info = compute_scaling(lp.problem, o);
        const auto p = apply_scaling(lp.problem, info);
        CHECK_THAT(p.b.lpNorm<Eigen::Infinity>(), WithinAbs(1.0, 1e-14));
        CHECK_THAT(p.c.lpNorm<Eigen::Infinity>(), WithinAbs(1.0, 1e-14));
        Vec x = lp.x0.cwiseProduct(info.d2) / info.b_scale;
        Vec y = lp.y0.cwiseProduct(info.d1) / info.c_scale;
        Vec s = lp.s0.cwiseQuotient(info.d2) / info.c_scale;
        CHECK((p.A * x - p.b).lpNorm<Eigen::Infinity>() <= 1e-12);
        unscale(info, x, y, s);
        CHECK((x - lp.x0).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + lp.x0.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("scaling is uniform on non-orthant blocks")
{
    ConicProblem p;
    p.cones = {Cone::nonneg(2), Cone::soc(3)};
    Mat d(2, 5);
    d << 1, 100, 0.01, 5, 2, 3, 1, 7, 0.2, 40;
    p.A = dense_to_sparse(d);
    p.b = Vec::Ones(2);
    p.c = Vec::Ones(5);
    const auto info = compute_scaling(p, {});
    CHECK_NOTHROW(check_cone_uniform(p.cones, info.d2));
    CHECK(info.d2[2] == info.d2[3]);
    CHECK(info.d2[3] == info.d2[4]);

    ScalingInfo bad = ScalingInfo::identity(2, 5);
    bad.d2[3] = 2.0;
    CHECK_THROWS_WITH(apply_scaling(p, bad), Catch::Matchers::ContainsSubstring("soc block starting at column 2"));
}

TEST_CASE("scale factors are clamped")
{
    ConicProblem p;
    p.cones = {Cone::nonneg(2)};
    Mat d(1, 2);
    d << 1e-30, 1e30;
    p.A = dense_to_sparse(d);
    p.b = Vec::Ones(1);
    p.c = Vec::Ones(2);
    const auto info = compute_scaling(p, {});
    CHECK(info.clamped > 0);
    for (const Vec* v : {&info.d1, &info.d2}) {
        CHECK(v->minCoeff() >= kMinScale);
        CHECK(v->maxCoeff() <= kMaxScale);
    }
}

TEST_CASE("scaled and unscaled solves agree")
{
    for (int t = 0; t < 10; ++t) {
        const auto lp = problems::gen_random_lp(20, 40, 0.3, 7000 + t);
        SolverConfig on;
        SolverConfig off;
        off.scaling = false;
        const auto a = solve(lp.problem, on);
        const auto b = solve(lp.problem, off);
        REQUIRE(a.status == Status::optimal);
        REQUIRE(b.status == Status::optimal);
        CHECK(std::abs(a.objective_primal - b.objective_primal) <= 1e-5 * (1.0 + std::abs(b.objective_primal)));
        // residuals of the scaled run are measured on the original data
        const auto r = compute_residuals(lp.problem, a.x, a.y, a.s, 1.0, NormMode::two_norm);
        CHECK(r.max() <= 2.0 * on.tol);
    }
}
