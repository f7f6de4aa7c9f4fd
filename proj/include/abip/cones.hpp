#ifndef ABIP_CONES_HPP
#define ABIP_CONES_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "abip/core.hpp"
#include "abip/sparse_linalg.hpp"

namespace abip
{

// Barrier proximal operators:  prox(lambda, zeta) = argmin_x lambda*F(x) + 0.5*|x - zeta|^2
// with F the log barrier of the cone:
//   orthant  -sum log x_i
//   soc      -log(t^2 - |x|^2)
//   rsoc     -log(eta*nu - 0.5*|x|^2)
//   sdc      -log det X

inline constexpr double kProxBranchBand = 1e-14;

inline double prox_nonneg_scalar(double lambda, double zeta) noexcept
{
    const double root = std::sqrt(zeta * zeta + 4.0 * lambda);
    return zeta >= 0.0 ? 0.5 * (zeta + root) : 2.0 * lambda / (root - zeta);
}

template<typename In, typename Out>
void prox_nonneg_into(double lambda, const Eigen::MatrixBase<In>& zeta, Eigen::MatrixBase<Out>& out)
{
    for (Index i = 0; i < zeta.size(); ++i) out[i] = prox_nonneg_scalar(lambda, zeta[i]);
}

inline Vec prox_nonneg(double lambda, const Vec& zeta)
{
    Vec out(zeta.size());
    prox_nonneg_into(lambda, zeta, out);
    return out;
}

namespace detail
{
// Positive root of g^2 + p g - q = 0 with q >= 0, free of cancellation.
inline double positive_root(double p, double q) noexcept
{
    const double disc = std::sqrt(p * p + 4.0 * q);
    return p > 0.0 ? 2.0 * q / (p + disc) : 0.5 * (disc - p);
}
} // namespace detail

template<typename In, typename Out>
void prox_soc_into(double lambda, const Eigen::MatrixBase<In>& zeta, Eigen::MatrixBase<Out>& out)
{
    const Index k = zeta.size();
    const double zt = zeta[0];
    const auto zx = zeta.tail(k - 1);
    const double zx2 = zx.squaredNorm();
    if (std::abs(zt) <= kProxBranchBand * (1.0 + std::sqrt(zt * zt + zx2))) {
        out[0] = std::sqrt(2.0 * lambda + 0.25 * zx2);
        out.tail(k - 1) = 0.5 * zx;
        return;
    }
    // With rho = delta/lambda and g = rho + 4/rho - 4:
    //   g^2 + (8 - a) g - 8 zt^2/lambda = 0,  a = (zt^2 - |zx|^2)/lambda.
    const double a = (zt - std::sqrt(zx2)) * (zt + std::sqrt(zx2)) / lambda;
    const double g = detail::positive_root(8.0 - a, 8.0 * zt * zt / lambda);
    const double root = std::sqrt(g * (g + 8.0));
    const double big = 0.5 * (g + 4.0 + root); // > 2
    const double big_minus_two = 0.5 * (g + root);
    double rho = 0.0;
    if (zt > 0.0) {
        rho = big;
        out[0] = big * zt / big_minus_two;
    } else {
        rho = 4.0 / big;
        out[0] = -2.0 * zt / big_minus_two;
    }
    out.tail(k - 1) = (rho / (rho + 2.0)) * zx;
}

inline Vec prox_soc(double lambda, const Vec& zeta)
{
    if (zeta.size() < 2) throw std::invalid_argument("prox_soc: dim < 2");
    Vec out(zeta.size());
    prox_soc_into(lambda, zeta, out);
    return out;
}

template<typename In, typename Out>
void prox_rsoc_into(double lambda, const Eigen::MatrixBase<In>& zeta, Eigen::MatrixBase<Out>& out)
{
    const Index k = zeta.size();
    const double ze = zeta[0];
    const double zn = zeta[1];
    const auto zx = zeta.tail(k - 2);
    const double zx2 = zx.squaredNorm();
    const double sum = ze + zn;
    const double diff = ze - zn;
    if (std::abs(sum) <= kProxBranchBand * (1.0 + std::sqrt(ze * ze + zn * zn + zx2))) {
        // rho = 1: eta - nu = ze, eta*nu = lambda + |zx|^2/8
        const double prod = lambda + 0.125 * zx2;
        const double larger = 0.5 * (std::abs(ze) + std::sqrt(ze * ze + 4.0 * prod));
        const double smaller = prod / larger;
        out[0] = ze >= 0.0 ? larger : smaller;
        out[1] = ze >= 0.0 ? smaller : larger;
        out.tail(k - 2) = 0.5 * zx;
        return;
    }
    // With g = rho + 1/rho - 2:  g^2 + (4 - a) g - (ze + zn)^2/lambda = 0,
    // a = (2 ze zn - |zx|^2)/(2 lambda).
    const double a = (0.5 * (sum * sum - diff * diff) - zx2) / (2.0 * lambda);
    const double g = detail::positive_root(4.0 - a, sum * sum / lambda);
    const double root = std::sqrt(g * (g + 4.0));
    const double big = 0.5 * (g + 2.0 + root); // > 1
    const double big_minus_one = 0.5 * (g + root);
    double rho = 0.0;
    double total = 0.0; // eta + nu
    if (sum > 0.0) {
        rho = big;
        total = big * sum / big_minus_one;
    } else {
        rho = 1.0 / big;
        total = -sum / big_minus_one;
    }
    const double gap = rho * diff / (rho + 1.0); // eta - nu
    const double scale = rho / (rho + 1.0);
    out.tail(k - 2) = scale * zx;
    const double prod = rho * lambda + 0.5 * scale * scale * zx2; // eta * nu
    const double larger = 0.5 * (total + std::abs(gap));
    const double smaller = prod / larger;
    out[0] = gap >= 0.0 ? larger : smaller;
    out[1] = gap >= 0.0 ? smaller : larger;
}

inline Vec prox_rsoc(double lambda, const Vec& zeta)
{
    if (zeta.size() < 3) throw std::invalid_argument("prox_rsoc: dim < 3");
    Vec out(zeta.size());
    prox_rsoc_into(lambda, zeta, out);
    return out;
}

// Packed symmetric storage: lower columns, off-diagonals times sqrt(2).

inline Index sdc_order_from_dim(Index dim)
{
    const Index order = static_cast<Index>(std::llround((std::sqrt(8.0 * double(dim) + 1.0) - 1.0) / 2.0));
    if (order * (order + 1) / 2 != dim) throw std::invalid_argument("not a packed symmetric length");
    return order;
}

template<typename Derived>
Mat smat(const Eigen::MatrixBase<Derived>& v)
{
    const Index n = sdc_order_from_dim(v.size());
    Mat out(n, n);
    Index p = 0;
    for (Index j = 0; j < n; ++j) {
        out(j, j) = v[p++];
        for (Index i = j + 1; i < n; ++i) {
            const double val = v[p++] * M_SQRT1_2;
            out(i, j) = val;
            out(j, i) = val;
        }
    }
    return out;
}

template<typename Derived, typename Out>
void svec_into(const Eigen::MatrixBase<Derived>& a, Eigen::MatrixBase<Out>& out)
{
    const Index n = a.rows();
    Index p = 0;
    for (Index j = 0; j < n; ++j) {
        out[p++] = a(j, j);
        for (Index i = j + 1; i < n; ++i) out[p++] = M_SQRT2 * a(i, j);
    }
}

inline Vec svec(const Mat& a)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("svec: not square");
    Vec out(a.rows() * (a.rows() + 1) / 2);
    svec_into(a, out);
    return out;
}

inline Mat prox_sdc(double lambda, const Mat& a)
{
    const auto eig = spectral_decompose_symmetric(a);
    Vec e(eig.d.size());
    for (Index i = 0; i < e.size(); ++i) e[i] = prox_nonneg_scalar(lambda, eig.d[i]);
    Mat x = eig.q.transpose() * e.asDiagonal() * eig.q;
    return 0.5 * (x + x.transpose());
}

template<typename In, typename Out>
void prox_sdc_packed_into(double lambda, const Eigen::MatrixBase<In>& zeta, Eigen::MatrixBase<Out>& out)
{
    Mat a = smat(zeta);
    a = 0.5 * (a + a.transpose()).eval();
    const Mat x = prox_sdc(lambda, a);
    svec_into(x, out);
}

template<typename In, typename Out>
void prox_cone_into(const Cone& cone, double lambda, const Eigen::MatrixBase<In>& zeta,
                    Eigen::MatrixBase<Out>& out)
{
    switch (cone.kind) {
    case ConeKind::nonneg: prox_nonneg_into(lambda, zeta, out); return;
    case ConeKind::soc: prox_soc_into(lambda, zeta, out); return;
    case ConeKind::rsoc: prox_rsoc_into(lambda, zeta, out); return;
    case ConeKind::sdc: prox_sdc_packed_into(lambda, zeta, out); return;
    }
}

inline Vec prox_cone(const Cone& cone, double lambda, const Vec& zeta)
{
    if (zeta.size() != cone.dim()) throw std::invalid_argument("prox_cone: length mismatch");
    Vec out(zeta.size());
    prox_cone_into(cone, lambda, zeta, out);
    return out;
}

/// Blockwise prox over a product of cones.
template<typename In, typename Out>
void prox_product_into(const std::vector<Cone>& cones, double lambda, const Eigen::MatrixBase<In>& zeta,
                       Eigen::MatrixBase<Out>& out)
{
    Index off = 0;
    for (const auto& k : cones) {
        const Index d = k.dim();
        auto dst = out.segment(off, d);
        prox_cone_into(k, lambda, zeta.segment(off, d), dst);
        off += d;
    }
}

inline Vec prox_product(const std::vector<Cone>& cones, double lambda, const Vec& zeta)
{
    if (zeta.size() != total_dim(cones)) throw std::invalid_argument("prox_product: length mismatch");
    Vec out(zeta.size());
    prox_product_into(cones, lambda, zeta, out);
    return out;
}

/// Unit interior point: ones, (1, 0), (1, 1, 0) or the identity.
inline Vec unit_interior_point(const Cone& cone)
{
    Vec out = Vec::Zero(cone.dim());
    switch (cone.kind) {
    case ConeKind::nonneg: out.setOnes(); break;
    case ConeKind::soc: out[0] = 1.0; break;
    case ConeKind::rsoc: out[0] = out[1] = 1.0; break;
    case ConeKind::sdc: out = svec(Mat::Identity(cone.size, cone.size)); break;
    }
    return out;
}

inline Vec unit_interior_point(const std::vector<Cone>& cones)
{
    Vec out(total_dim(cones));
    Index off = 0;
    for (const auto& k : cones) {
        out.segment(off, k.dim()) = unit_interior_point(k);
        off += k.dim();
    }
    return out;
}

/// Distance-like interiority margin: min x_i, t - |x|, eta*nu - |x|^2/2
/// (with eta, nu > 0), or the smallest eigenvalue. Positive iff interior.
inline double interior_margin(const Cone& cone, const Vec& x)
{
    switch (cone.kind) {
    case ConeKind::nonneg: return x.minCoeff();
    case ConeKind::soc: return x[0] - x.tail(x.size() - 1).norm();
    case ConeKind::rsoc: {
        const double m = std::min(x[0], x[1]);
        if (!(m > 0.0)) return m;
        return x[0] * x[1] - 0.5 * x.tail(x.size() - 2).squaredNorm();
    }
    case ConeKind::sdc: {
        Mat a = smat(x);
        Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    }
    return -1.0;
}

inline bool is_interior(const std::vector<Cone>& cones, const Vec& x)
{
    Index off = 0;
    for (const auto& k : cones) {
        if (!(interior_margin(k, x.segment(off, k.dim())) > 0.0)) return false;
        off += k.dim();
    }
    return true;
}

/// Gradient of the cone barrier at an interior x.
inline Vec barrier_gradient(const Cone& cone, const Vec& x)
{
    switch (cone.kind) {
    case ConeKind::nonneg: return -x.cwiseInverse();
    case ConeKind::soc: {
        const double delta = x[0] * x[0] - x.tail(x.size() - 1).squaredNorm();
        Vec g = (2.0 / delta) * x;
        g[0] = -g[0];
        return g;
    }
    case ConeKind::rsoc: {
        const double delta = x[0] * x[1] - 0.5 * x.tail(x.size() - 2).squaredNorm();
        Vec g = x / delta;
        g[0] = -x[1] / delta;
        g[1] = -x[0] / delta;
        return g;
    }
    case ConeKind::sdc: {
        const Mat a = smat(x);
        return svec(Mat(-a.inverse()));
    }
    }
    return {};
}

inline Vec barrier_gradient(const std::vector<Cone>& cones, const Vec& x)
{
    Vec g(x.size());
    Index off = 0;
    for (const auto& k : cones) {
        g.segment(off, k.dim()) = barrier_gradient(k, x.segment(off, k.dim()));
        off += k.dim();
    }
    return g;
}

} // namespace abip

#endif // ABIP_CONES_HPP
