#include "hypereis/hypgeom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hypereis/errors.hpp"

namespace hypereis::hypgeom {

PointH PointH::make(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y))
        throw DomainError("point has non-finite coordinates");
    if (!(y > 0.0))
        throw DomainError("point not in the upper half-plane (y = " + std::to_string(y) + ")");
    return {x, y};
}

double Matrix2::max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
}

Matrix2 Matrix2::normalized() const {
    const double dt = det();
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw DomainError("matrix is not orientation preserving");
    const double k = 1.0 / std::sqrt(dt);
    Matrix2 m{a * k, b * k, c * k, d * k};
    const bool flip = (m.a != 0.0) ? (m.a < 0.0) : (m.c < 0.0);
    if (flip) m = {-m.a, -m.b, -m.c, -m.d};
    return m;
}

Matrix2 operator*(const Matrix2& g, const Matrix2& h) {
    Matrix2 m{g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
              g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d};
    // det drift is corrected only while the determinant is computable without cancellation
    const double dt = m.det();
    const double size = std::abs(m.a * m.d) + std::abs(m.b * m.c);
    if (dt > 0.0 && size < 1e6 * dt) {
        const double k = 1.0 / std::sqrt(dt);
        m = {m.a * k, m.b * k, m.c * k, m.d * k};
    }
    const bool flip = (m.a != 0.0) ? (m.a < 0.0) : (m.c < 0.0);
    if (flip) m = {-m.a, -m.b, -m.c, -m.d};
    return m;
}

bool same_element(const Matrix2& g, const Matrix2& h, double tol) {
    auto close = [&](double s) {
        return std::abs(g.a - s * h.a) <= tol && std::abs(g.b - s * h.b) <= tol &&
               std::abs(g.c - s * h.c) <= tol && std::abs(g.d - s * h.d) <= tol;
    };
    return close(1.0) || close(-1.0);
}

void check_unimodular(const Matrix2& g) {
    const double scale = std::max(1.0, std::abs(g.a * g.d) + std::abs(g.b * g.c));
    if (!std::isfinite(g.det()) || std::abs(g.det() - 1.0) > 1e-12 * scale)
        throw DomainError("matrix determinant differs from 1 (det = " + std::to_string(g.det()) + ")");
}

PointH mobius_apply(const Matrix2& g, const PointH& z) {
    check_unimodular(g);
    const cplx w = act(g, z.z());
    return PointH::make(w.real(), w.imag());
}

double hyperbolic_distance(cplx z, cplx w) {
    // sinh(d/2) = |z-w| / (2 sqrt(y y'))
    return 2.0 * std::asinh(std::abs(z - w) / (2.0 * std::sqrt(z.imag() * w.imag())));
}

double hyperbolic_distance(const PointH& z, const PointH& w) {
    return hyperbolic_distance(z.z(), w.z());
}

FermiCoords fermi_coordinates(const PointH& z) {
    if (!(z.y > 0.0)) throw DomainError("Fermi coordinates undefined on the boundary");
    return {std::log(std::hypot(z.x, z.y)), std::asinh(z.x / z.y)};
}

PointH from_fermi(const FermiCoords& f) {
    const double r = std::exp(f.x1);
    return PointH::make(r * std::tanh(f.x2), r / std::cosh(f.x2));
}

double collar_halfwidth(double l) {
    if (!(l > 0.0)) throw DomainError("collar width needs a positive length");
    return std::asinh(1.0 / std::sinh(l / 2.0));
}

BoundaryPoint mobius_apply(const Matrix2& g, const BoundaryPoint& p) {
    if (p.at_infinity) {
        if (g.c == 0.0) return BoundaryPoint::infinity();
        return BoundaryPoint::real(g.a / g.c);
    }
    const double den = g.c * p.x + g.d;
    if (den == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint::real((g.a * p.x + g.b) / den);
}

bool near(const BoundaryPoint& p, const BoundaryPoint& q, double tol) {
    if (p.at_infinity || q.at_infinity) {
        if (p.at_infinity && q.at_infinity) return true;
        const double x = p.at_infinity ? q.x : p.x;
        return std::abs(x) > 1.0 / tol;
    }
    return std::abs(p.x - q.x) <= tol * std::max(1.0, std::abs(p.x));
}

double poisson_kernel(const PointH& z, const BoundaryPoint& b) {
    if (b.at_infinity) return z.y;
    const double dx = z.x - b.x;
    return z.y / (dx * dx + z.y * z.y);
}

IsometryType translation_length(const Matrix2& g, double parabolic_tol) {
    const double t = std::abs(g.trace());
    if (std::abs(t - 2.0) <= parabolic_tol) return {IsometryKind::Parabolic, 0.0};
    if (t < 2.0) return {IsometryKind::Elliptic, 0.0};
    return {IsometryKind::Hyperbolic, 2.0 * std::acosh(t / 2.0)};
}

namespace {

// |g'(p)| at a finite boundary fixed point; used to tell repelling from attracting.
double boundary_derivative(const Matrix2& g, double p) {
    const double j = g.c * p + g.d;
    return 1.0 / (j * j);
}

}  // namespace

Geodesic axis(const Matrix2& gin) {
    const Matrix2 g = gin.normalized();
    if (translation_length(g).kind != IsometryKind::Hyperbolic)
        throw DomainError("axis requested for a non-hyperbolic element");
    if (g.c == 0.0) {
        // fixes infinity and b/(d-a); infinity attracts when |a| > |d|
        const BoundaryPoint p = BoundaryPoint::real(g.b / (g.d - g.a));
        if (std::abs(g.a) > std::abs(g.d)) return {p, BoundaryPoint::infinity()};
        return {BoundaryPoint::infinity(), p};
    }
    // c z^2 + (d - a) z - b = 0
    const double bq = g.d - g.a;
    const double disc = std::sqrt(bq * bq + 4.0 * g.c * g.b);
    // stable root pair
    const double q = -0.5 * (bq + std::copysign(disc, bq));
    const double r1 = q / g.c;
    const double r2 = -g.b / q;
    const BoundaryPoint p1 = BoundaryPoint::real(r1), p2 = BoundaryPoint::real(r2);
    if (boundary_derivative(g, r1) > 1.0) return {p1, p2};
    return {p2, p1};
}

BoundaryPoint parabolic_fixed_point(const Matrix2& gin) {
    const Matrix2 g = gin.normalized();
    if (translation_length(g).kind != IsometryKind::Parabolic)
        throw DomainError("fixed point requested for a non-parabolic element");
    if (std::abs(g.c) <= 1e-14 * g.max_abs()) return BoundaryPoint::infinity();
    return BoundaryPoint::real((g.a - g.d) / (2.0 * g.c));
}

Geodesic mobius_apply(const Matrix2& g, const Geodesic& geo) {
    return {mobius_apply(g, geo.from), mobius_apply(g, geo.to)};
}

Geodesic geodesic_through(cplx z0, cplx z1) {
    if (std::abs(z0 - z1) == 0.0) throw DomainError("geodesic through coincident points");
    const double scale = std::max({1.0, std::abs(z0), std::abs(z1)});
    Geodesic geo;
    if (std::abs(z1.real() - z0.real()) <= 1e-14 * scale) {
        geo = {BoundaryPoint::real(z0.real()), BoundaryPoint::infinity()};
    } else {
        const double c = (std::norm(z1) - std::norm(z0)) / (2.0 * (z1.real() - z0.real()));
        const double r = std::abs(z0 - c);
        geo = {BoundaryPoint::real(c - r), BoundaryPoint::real(c + r)};
    }
    const Matrix2 C = axis_conjugator(geo);
    const Matrix2 Ci = C.inverse();
    if (act(Ci, z1).imag() < act(Ci, z0).imag()) geo = geo.reversed();
    return geo;
}

Matrix2 axis_conjugator(const Geodesic& geo) {
    const BoundaryPoint& p = geo.from;
    const BoundaryPoint& q = geo.to;
    if (near(p, q, 0.0)) throw DomainError("degenerate geodesic");
    Matrix2 m;
    if (q.at_infinity) {
        m = {1.0, p.x, 0.0, 1.0};  // z + p
    } else if (p.at_infinity) {
        m = {q.x, -1.0, 1.0, 0.0};  // (q z - 1)/z
    } else {
        // (q z + p)/(z + 1) has det q - p; flip for q < p
        m = (q.x > p.x) ? Matrix2{q.x, p.x, 1.0, 1.0} : Matrix2{q.x, -p.x, 1.0, -1.0};
    }
    const double dt = m.det();
    const double k = 1.0 / std::sqrt(dt);
    return {m.a * k, m.b * k, m.c * k, m.d * k};
}

double distance_to_geodesic(cplx z, const Geodesic& geo) {
    const cplx w = act(axis_conjugator(geo).inverse(), z);
    return std::asinh(std::abs(w.real()) / w.imag());
}

namespace {

// Endpoints of g2 in the frame where g1 is the imaginary axis.
std::pair<BoundaryPoint, BoundaryPoint> relative_endpoints(const Geodesic& g1, const Geodesic& g2) {
    const Matrix2 Ci = axis_conjugator(g1).inverse();
    return {mobius_apply(Ci, g2.from), mobius_apply(Ci, g2.to)};
}

bool touches_axis_ends(const BoundaryPoint& p) {
    return p.at_infinity || std::abs(p.x) <= 1e-14;
}

}  // namespace

std::optional<double> geodesic_separation(const Geodesic& g1, const Geodesic& g2) {
    auto [p, q] = relative_endpoints(g1, g2);
    if (touches_axis_ends(p) || touches_axis_ends(q)) return std::nullopt;
    if (p.x * q.x < 0.0) return std::nullopt;
    const double lo = std::min(std::abs(p.x), std::abs(q.x));
    const double hi = std::max(std::abs(p.x), std::abs(q.x));
    return std::acosh((hi + lo) / (hi - lo));
}

std::optional<cplx> geodesic_crossing(const Geodesic& g1, const Geodesic& g2) {
    auto [p, q] = relative_endpoints(g1, g2);
    if (touches_axis_ends(p) || touches_axis_ends(q)) return std::nullopt;
    if (p.x * q.x >= 0.0) return std::nullopt;
    const cplx w{0.0, std::sqrt(-p.x * q.x)};
    return act(axis_conjugator(g1), w);
}

cplx geodesic_tangent(const Geodesic& geo, cplx z) {
    const Matrix2 C = axis_conjugator(geo);
    const cplx w = act(C.inverse(), z);
    const cplx t = derivative(C, w) * cplx{0.0, 1.0};
    return t / std::abs(t);
}

bool HalfSpace::contains(cplx z) const {
    const cplx w = act(axis_conjugator(boundary).inverse(), z);
    return left ? (w.real() < 0.0) : (w.real() > 0.0);
}

double HalfSpace::distance(cplx z) const {
    const cplx w = act(axis_conjugator(boundary).inverse(), z);
    const bool inside = left ? (w.real() < 0.0) : (w.real() > 0.0);
    if (inside) return 0.0;
    return std::asinh(std::abs(w.real()) / w.imag());
}

HalfSpace mobius_apply(const Matrix2& g, const HalfSpace& h) {
    return {mobius_apply(g, h.boundary), h.left};
}

}  // namespace hypereis::hypgeom
