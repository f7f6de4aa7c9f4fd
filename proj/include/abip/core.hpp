#ifndef ABIP_CORE_HPP
#define ABIP_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace abip
{

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A numerical breakdown: nonpositive pivot, stalled iterative solve, ...
/// `index` names the offending pivot when one exists (-1 otherwise) and
/// `residual` carries the last residual of an iterative method.
class NumericalError : public Error
{
public:
    NumericalError(const std::string& what, Index index = -1,
                   double residual = std::numeric_limits<double>::quiet_NaN())
        : Error(what), m_index(index), m_residual(residual)
    {
    }

    Index index() const noexcept { return m_index; }
    double residual() const noexcept { return m_residual; }

private:
    Index m_index;
    double m_residual;
};

/// Raised when a candidate solution is requested from an iterate with tau <= 0.
class NotCandidateError : public Error
{
public:
    using Error::Error;
};

enum class ConeKind : std::uint8_t
{
    nonneg,
    soc,
    rsoc,
    sdc,
};

inline std::string_view to_string(ConeKind kind)
{
    switch (kind) {
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::soc: return "soc";
    case ConeKind::rsoc: return "rsoc";
    case ConeKind::sdc: return "sdc";
    }
    return "unknown";
}

/// One factor of the primal cone K.
///
/// For the orthant and the two second-order cones `size` is the number of
/// scalar variables. For the semidefinite cone `size` is the matrix order and
/// the block occupies order*(order+1)/2 scalars, stored as packed lower
/// triangular columns with off-diagonal entries scaled by sqrt(2) so that the
/// Euclidean inner product of two packed blocks equals the Frobenius inner
/// product of the matrices.
struct Cone
{
    ConeKind kind = ConeKind::nonneg;
    Index size = 1;

    static Cone nonneg(Index dim) { return Cone{ConeKind::nonneg, dim}; }
    static Cone soc(Index dim) { return Cone{ConeKind::soc, dim}; }
    static Cone rsoc(Index dim) { return Cone{ConeKind::rsoc, dim}; }
    static Cone sdc(Index order) { return Cone{ConeKind::sdc, order}; }

    /// Number of scalar variables in the block.
    Index dim() const noexcept
    {
        return kind == ConeKind::sdc ? size * (size + 1) / 2 : size;
    }

    /// Degree of the log barrier, i.e. <x, -grad F(x)> for any interior x.
    Index barrier_degree() const noexcept
    {
        switch (kind) {
        case ConeKind::nonneg: return size;
        case ConeKind::soc:
        case ConeKind::rsoc: return 2;
        case ConeKind::sdc: return size;
        }
        return 0;
    }

    void validate() const
    {
        const Index min_size = kind == ConeKind::soc ? 2 : kind == ConeKind::rsoc ? 3 : 1;
        if (size < min_size) {
            throw std::invalid_argument(std::string(to_string(kind)) + " cone needs size >= " +
                                        std::to_string(min_size) + ", got " +
                                        std::to_string(size));
        }
    }

    friend bool operator==(const Cone&, const Cone&) = default;
};

inline Index total_dim(const std::vector<Cone>& cones)
{
    Index n = 0;
    for (const auto& k : cones) n += k.dim();
    return n;
}

inline Index total_barrier_degree(const std::vector<Cone>& cones)
{
    Index d = 0;
    for (const auto& k : cones) d += k.barrier_degree();
    return d;
}

/// Standard-form conic program
///
///     min c'x  s.t.  A x = b,  x in K = K_1 x ... x K_p
///
/// with dual  max b'y  s.t.  A'y + s = c,  s in K*.
struct ConicProblem
{
    SparseMatrix A;
    Vec b;
    Vec c;
    std::vector<Cone> cones;
    std::string name;

    Index rows() const noexcept { return A.rows(); }
    Index cols() const noexcept { return A.cols(); }

    bool is_lp() const noexcept
    {
        return std::all_of(cones.begin(), cones.end(),
                           [](const Cone& k) { return k.kind == ConeKind::nonneg; });
    }

    bool has_null_objective() const noexcept { return c.size() == 0 || c.isZero(0.0); }

    /// Throws std::invalid_argument when the data breaks the standard-form contract.
    void validate() const
    {
        if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("A must be at least 1x1");
        if (b.size() != A.rows()) throw std::invalid_argument("b length does not match rows of A");
        if (c.size() != A.cols()) throw std::invalid_argument("c length does not match cols of A");
        if (cones.empty()) throw std::invalid_argument("cone list is empty");
        for (const auto& k : cones) k.validate();
        if (total_dim(cones) != A.cols()) {
            throw std::invalid_argument("cone dimensions sum to " +
                                        std::to_string(total_dim(cones)) + " but A has " +
                                        std::to_string(A.cols()) + " columns");
        }
        if (!b.allFinite() || !c.allFinite()) throw std::invalid_argument("b or c is not finite");
        for (int j = 0; j < A.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
                if (it.value() == 0.0) throw std::invalid_argument("A stores an explicit zero");
                if (!std::isfinite(it.value())) throw std::invalid_argument("A has a non-finite entry");
            }
        }
    }
};

enum class NormMode : std::uint8_t
{
    two_norm,
    inf_norm,
};

struct Residuals
{
    double pres = std::numeric_limits<double>::infinity();
    double dres = std::numeric_limits<double>::infinity();
    double dgap = std::numeric_limits<double>::infinity();
    NormMode norm_mode = NormMode::two_norm;

    /// Largest of the three measures; `skip_dual` drops dres (null objective).
    double max(bool skip_dual = false) const noexcept
    {
        return skip_dual ? std::max(pres, dgap) : std::max({pres, dres, dgap});
    }
};

enum class Status : std::uint8_t
{
    optimal,
    primal_infeasible,
    dual_infeasible,
    iteration_limit,
    time_limit,
    numerical_failure,
};

inline std::string_view to_string(Status s)
{
    switch (s) {
    case Status::optimal: return "optimal";
    case Status::primal_infeasible: return "primal_infeasible";
    case Status::dual_infeasible: return "dual_infeasible";
    case Status::iteration_limit: return "iteration_limit";
    case Status::time_limit: return "time_limit";
    case Status::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

inline std::optional<Status> status_from_string(std::string_view s)
{
    for (auto st : {Status::optimal, Status::primal_infeasible, Status::dual_infeasible,
                    Status::iteration_limit, Status::time_limit, Status::numerical_failure}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

struct SolveResult
{
    Status status = Status::numerical_failure;
    Vec x;
    Vec y;
    Vec s;
    double objective_primal = std::numeric_limits<double>::quiet_NaN();
    double objective_dual = std::numeric_limits<double>::quiet_NaN();
    Residuals residuals;
    double tol = 0.0;
    double tau = 0.0;
    double kappa = 0.0;
    Index outer_iters = 0;
    Index admm_iters = 0;
    double wall_time = 0.0;
};

/// Relative primal residual, dual residual and duality gap of the candidate
/// (x/tau, y/tau, s/tau).
///
/// two_norm gives the LP criteria with 2-norms and (1 + |.|) denominators;
/// inf_norm gives the conic variant with infinity norms and max-normalized
/// denominators.
inline Residuals compute_residuals(const ConicProblem& problem, const Vec& x, const Vec& y,
                                   const Vec& s, double tau, NormMode mode)
{
    if (x.size() != problem.cols() || s.size() != problem.cols() || y.size() != problem.rows()) {
        throw std::invalid_argument("compute_residuals: dimension mismatch");
    }
    if (!(tau > 0.0)) {
        throw NotCandidateError("compute_residuals: tau <= 0, iterate is not a candidate solution");
    }
    const double inv_tau = 1.0 / tau;
    const Vec ax = (problem.A * x) * inv_tau;
    const Vec pr = ax - problem.b;
    const Vec dr = (problem.A.transpose() * y + s) * inv_tau - problem.c;
    const double ctx = problem.c.dot(x) * inv_tau;
    const double bty = problem.b.dot(y) * inv_tau;

    Residuals r;
    r.norm_mode = mode;
    if (mode == NormMode::two_norm) {
        r.pres = pr.norm() / (1.0 + problem.b.norm());
        r.dres = dr.norm() / (1.0 + problem.c.norm());
        r.dgap = std::abs(ctx - bty) / (1.0 + std::abs(ctx) + std::abs(bty));
    } else {
        const double ax_inf = ax.size() ? ax.lpNorm<Eigen::Infinity>() : 0.0;
        const double b_inf = problem.b.size() ? problem.b.lpNorm<Eigen::Infinity>() : 0.0;
        const double c_inf = problem.c.size() ? problem.c.lpNorm<Eigen::Infinity>() : 0.0;
        r.pres = (pr.size() ? pr.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + std::max(ax_inf, b_inf));
        r.dres = (dr.size() ? dr.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + c_inf);
        r.dgap = std::abs(ctx - bty) / (1.0 + std::max(std::abs(ctx), std::abs(bty)));
    }
    return r;
}

/// What classify_terminal_state needs to know about the final iterate.
struct TerminalView
{
    double tau = 0.0;
    double kappa = 0.0;
    double c_dot_x = 0.0;
    double b_dot_y = 0.0;
    std::optional<Residuals> residuals; // present only when tau > 0
    bool skip_dual_check = false;
};

/// kappa dominates tau when tau < 1e-8 * max(1, kappa).
inline constexpr double kDominanceRatio = 1e-8;

inline bool kappa_dominates(double tau, double kappa) noexcept
{
    return tau < kDominanceRatio * std::max(1.0, kappa);
}

/// Maps the final homogeneous iterate to a status. Total: every input yields
/// one of optimal, primal_infeasible, dual_infeasible, numerical_failure.
inline Status classify_terminal_state(const TerminalView& view, double tol) noexcept
{
    const bool dominated = kappa_dominates(view.tau, view.kappa);
    if (!dominated && view.tau > tol * view.kappa && view.residuals &&
        view.residuals->max(view.skip_dual_check) <= tol) {
        return Status::optimal;
    }
    if (dominated) {
        const bool primal_cert = view.b_dot_y > 0.0;
        const bool dual_cert = view.c_dot_x < 0.0;
        if (primal_cert && dual_cert) {
            return view.b_dot_y >= -view.c_dot_x ? Status::primal_infeasible
                                                  : Status::dual_infeasible;
        }
        if (primal_cert) return Status::primal_infeasible;
        if (dual_cert) return Status::dual_infeasible;
    }
    return Status::numerical_failure;
}

} // namespace abip

#endif // ABIP_CORE_HPP
