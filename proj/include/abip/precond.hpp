#ifndef ABIP_PRECOND_HPP
#define ABIP_PRECOND_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "abip/core.hpp"

namespace abip
{

/// Diagonal scaling  A~ = D1^{-1} A D2^{-1},  b~ = D1^{-1} b / b_scale,  c~ = D2^{-1} c / c_scale.
struct ScalingInfo
{
    Vec d1;
    Vec d2;
    Index ruiz_iters = 0;
    bool applied = false;
    double b_scale = 1.0;
    double c_scale = 1.0;
    Index clamped = 0; // entries pulled back into [kMinScale, kMaxScale]

    static ScalingInfo identity(Index m, Index n)
    {
        ScalingInfo s;
        s.d1 = Vec::Ones(m);
        s.d2 = Vec::Ones(n);
        return s;
    }
};

inline constexpr double kMinScale = 1e-8;
inline constexpr double kMaxScale = 1e8;

struct ScaledMatrix
{
    SparseMatrix A;
    Vec d1;
    Vec d2;
};

namespace detail
{
inline void scale_in_place(SparseMatrix& a, const Vec& row_div, const Vec& col_div)
{
    for (Index j = 0; j < a.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) it.valueRef() /= row_div[it.row()] * col_div[j];
    }
}

// Returns sqrt of the norm, or 1 for an empty line when allowed.
inline void sqrt_norms(Vec& v, const char* what, bool allow_empty)
{
    for (Index i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) {
            if (!allow_empty) throw std::invalid_argument(std::string("empty ") + what + " " + std::to_string(i));
            v[i] = 1.0;
        } else {
            v[i] = std::sqrt(v[i]);
        }
    }
}

inline void lp_norms(const SparseMatrix& a, double p, Vec& rows, Vec& cols)
{
    rows = Vec::Zero(a.rows());
    cols = Vec::Zero(a.cols());
    const bool inf = std::isinf(p);
    for (Index j = 0; j < a.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
            const double v = std::abs(it.value());
            if (inf) {
                rows[it.row()] = std::max(rows[it.row()], v);
                cols[j] = std::max(cols[j], v);
            } else {
                rows[it.row()] += std::pow(v, p);
                cols[j] += std::pow(v, p);
            }
        }
    }
    if (!inf) {
        rows = rows.array().pow(1.0 / p);
        cols = cols.array().pow(1.0 / p);
    }
}
} // namespace detail

/// Ruiz equilibration: `iters` rounds of dividing every row and column by
/// the square root of its infinity norm.
inline ScaledMatrix ruiz_scale(const SparseMatrix& a, Index iters, bool allow_empty = false)
{
    ScaledMatrix out{a, Vec::Ones(a.rows()), Vec::Ones(a.cols())};
    for (Index k = 0; k < iters; ++k) {
        Vec rows, cols;
        detail::lp_norms(out.A, std::numeric_limits<double>::infinity(), rows, cols);
        detail::sqrt_norms(rows, "row", allow_empty);
        detail::sqrt_norms(cols, "column", allow_empty);
        detail::scale_in_place(out.A, rows, cols);
        out.d1.array() *= rows.array();
        out.d2.array() *= cols.array();
    }
    return out;
}

/// Pock-Chambolle scaling: D1 = sqrt(row (2-alpha)-norms), D2 = sqrt(column alpha-norms).
inline ScaledMatrix pock_chambolle_scale(const SparseMatrix& a, double alpha = 1.0, bool allow_empty = false)
{
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("pock_chambolle_scale: alpha must be in (0, 2)");
    Vec rows, cols, unused;
    detail::lp_norms(a, 2.0 - alpha, rows, unused);
    detail::lp_norms(a, alpha, unused, cols);
    detail::sqrt_norms(rows, "row", allow_empty);
    detail::sqrt_norms(cols, "column", allow_empty);
    ScaledMatrix out{a, rows, cols};
    detail::scale_in_place(out.A, rows, cols);
    return out;
}

enum class ScalingOrder : std::uint8_t
{
    ruiz_then_pc,
    pc_then_ruiz,
};

struct ScalingOptions
{
    bool ruiz = true;
    bool pock_chambolle = true;
    Index ruiz_iters = 10;
    double pc_alpha = 1.0;
    ScalingOrder order = ScalingOrder::ruiz_then_pc;
    bool normalize_bc = false;
    bool unit_max_entry = true; // fold one scalar into D1 so max |A~_ij| = 1
    bool allow_empty = true; // empty rows/columns keep a unit factor
};

/// Computes D1, D2 for a problem. Entries inside each soc/rsoc/sdc block of
/// D2 are replaced by their geometric mean, then everything is clamped.
inline ScalingInfo compute_scaling(const ConicProblem& problem, const ScalingOptions& opts)
{
    ScalingInfo info = ScalingInfo::identity(problem.rows(), problem.cols());
    SparseMatrix a = problem.A;
    auto run_ruiz = [&] {
        if (!opts.ruiz) return;
        auto r = ruiz_scale(a, opts.ruiz_iters, opts.allow_empty);
        a = std::move(r.A);
        info.d1.array() *= r.d1.array();
        info.d2.array() *= r.d2.array();
        info.ruiz_iters = opts.ruiz_iters;
    };
    auto run_pc = [&] {
        if (!opts.pock_chambolle) return;
        auto r = pock_chambolle_scale(a, opts.pc_alpha, opts.allow_empty);
        a = std::move(r.A);
        info.d1.array() *= r.d1.array();
        info.d2.array() *= r.d2.array();
    };
    if (opts.order == ScalingOrder::ruiz_then_pc) {
        run_ruiz();
        run_pc();
    } else {
        run_pc();
        run_ruiz();
    }

    if (opts.unit_max_entry && a.nonZeros() > 0) {
        const double amax = a.coeffs().cwiseAbs().maxCoeff();
        if (amax > 0.0) info.d1 *= amax;
    }

    Index off = 0;
    for (const auto& k : problem.cones) {
        const Index d = k.dim();
        if (k.kind != ConeKind::nonneg) {
            const double gm = std::exp(info.d2.segment(off, d).array().log().mean());
            info.d2.segment(off, d).setConstant(gm);
        }
        off += d;
    }
    for (Vec* d : {&info.d1, &info.d2}) {
        for (Index i = 0; i < d->size(); ++i) {
            const double v = std::clamp((*d)[i], kMinScale, kMaxScale);
            if (v != (*d)[i]) ++info.clamped;
            (*d)[i] = v;
        }
    }
    if (opts.normalize_bc) {
        const Vec bs = problem.b.cwiseQuotient(info.d1);
        const Vec cs = problem.c.cwiseQuotient(info.d2);
        const double bn = bs.lpNorm<Eigen::Infinity>();
        const double cn = cs.lpNorm<Eigen::Infinity>();
        info.b_scale = bn > 0.0 ? bn : 1.0;
        info.c_scale = cn > 0.0 ? cn : 1.0;
    }
    info.applied = true;
    return info;
}

/// Throws unless D2 is constant on every non-orthant block.
inline void check_cone_uniform(const std::vector<Cone>& cones, const Vec& d2)
{
    Index off = 0;
    for (const auto& k : cones) {
        const Index d = k.dim();
        if (k.kind != ConeKind::nonneg) {
            const auto seg = d2.segment(off, d);
            if (seg.maxCoeff() - seg.minCoeff() > 1e-14 * seg.maxCoeff()) {
                throw std::invalid_argument("scaling is not uniform on " + std::string(to_string(k.kind)) +
                                            " block starting at column " + std::to_string(off));
            }
        }
        off += d;
    }
}

inline ConicProblem apply_scaling(const ConicProblem& problem, const ScalingInfo& info)
{
    if (info.d1.size() != problem.rows() || info.d2.size() != problem.cols()) {
        throw std::invalid_argument("apply_scaling: dimension mismatch");
    }
    check_cone_uniform(problem.cones, info.d2);
    ConicProblem out = problem;
    detail::scale_in_place(out.A, info.d1, info.d2);
    out.b = problem.b.cwiseQuotient(info.d1) / info.b_scale;
    out.c = problem.c.cwiseQuotient(info.d2) / info.c_scale;
    return out;
}

/// Maps a scaled (x, y, s) back:  x = b_scale D2^{-1} x~,  y = c_scale D1^{-1} y~,  s = c_scale D2 s~.
inline void unscale(const ScalingInfo& info, Vec& x, Vec& y, Vec& s)
{
    x = info.b_scale * x.cwiseQuotient(info.d2);
    y = info.c_scale * y.cwiseQuotient(info.d1);
    s = info.c_scale * s.cwiseProduct(info.d2);
}

} // namespace abip

#endif // ABIP_PRECOND_HPP
