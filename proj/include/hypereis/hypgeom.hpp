#pragma once

#include <complex>
#include <optional>

namespace hypereis {

using cplx = std::complex<double>;

namespace hypgeom {

struct PointH {
    double x = 0.0;
    double y = 1.0;

    // Validating constructor: y > 0 and finite.
    static PointH make(double x, double y);
    static PointH from(cplx z) { return make(z.real(), z.imag()); }
    cplx z() const { return {x, y}; }
};

struct Matrix2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static Matrix2 identity() { return {}; }
    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    Matrix2 inverse() const { return {d, -b, -c, a}; }  // assumes det 1
    // Rescaled to det 1 and sign-fixed so the first nonzero of (a, c) is positive.
    Matrix2 normalized() const;
    double max_abs() const;
};

Matrix2 operator*(const Matrix2& g, const Matrix2& h);  // normalized product

// Same element of PSL(2,R) up to entrywise tolerance.
bool same_element(const Matrix2& g, const Matrix2& h, double tol = 1e-9);

// Throws DomainError if |det - 1| exceeds tolerance (relative to entry size).
void check_unimodular(const Matrix2& g);

PointH mobius_apply(const Matrix2& g, const PointH& z);
// Unchecked action on complex z; used in inner loops. The imaginary part is y/|cz+d|^2,
// which stays accurate for matrices with large entries.
inline cplx act(const Matrix2& g, cplx z) {
    const cplx j = g.c * z + g.d;
    const double im = z.imag() / std::norm(j);
    if (std::abs(g.c) * std::abs(z) >= std::abs(g.d)) return {(g.a / g.c - 1.0 / (g.c * j)).real(), im};
    return {((g.a * z + g.b) / j).real(), im};
}
// gamma'(z) = (cz+d)^{-2}
inline cplx derivative(const Matrix2& g, cplx z) {
    const cplx j = g.c * z + g.d;
    return 1.0 / (j * j);
}
// j_gamma(z) = (cz+d)/(c zbar + d); weight-q automorphic forms satisfy f(gz) = j^q f(z).
inline cplx automorphy_factor(const Matrix2& g, cplx z) {
    return (g.c * z + g.d) / (g.c * std::conj(z) + g.d);
}

double hyperbolic_distance(const PointH& z, const PointH& w);
double hyperbolic_distance(cplx z, cplx w);

struct FermiCoords {
    double x1 = 0.0;  // signed arclength along the imaginary axis
    double x2 = 0.0;  // signed distance from it, sign(x2) = sign(Re z)
};

FermiCoords fermi_coordinates(const PointH& z);
PointH from_fermi(const FermiCoords& f);

double collar_halfwidth(double l);

struct BoundaryPoint {
    bool at_infinity = false;
    double x = 0.0;

    static BoundaryPoint infinity() { return {true, 0.0}; }
    static BoundaryPoint real(double x) { return {false, x}; }
    bool operator==(const BoundaryPoint&) const = default;
};

BoundaryPoint mobius_apply(const Matrix2& g, const BoundaryPoint& p);
bool near(const BoundaryPoint& p, const BoundaryPoint& q, double tol = 1e-9);

double poisson_kernel(const PointH& z, const BoundaryPoint& b);

enum class IsometryKind { Hyperbolic, Parabolic, Elliptic };

struct IsometryType {
    IsometryKind kind = IsometryKind::Hyperbolic;
    double length = 0.0;  // translation length, hyperbolic only
};

IsometryType translation_length(const Matrix2& g, double parabolic_tol = 1e-10);

// Oriented geodesic between two boundary points.
struct Geodesic {
    BoundaryPoint from;
    BoundaryPoint to;

    Geodesic reversed() const { return {to, from}; }
};

// Axis of a hyperbolic element, oriented from repelling to attracting fixed point.
Geodesic axis(const Matrix2& g);
// Fixed point of a parabolic element.
BoundaryPoint parabolic_fixed_point(const Matrix2& g);

Geodesic mobius_apply(const Matrix2& g, const Geodesic& geo);
// The geodesic through two distinct points, oriented from z0 toward z1.
Geodesic geodesic_through(cplx z0, cplx z1);

// Unit-determinant C with C(0) = geo.from and C(inf) = geo.to.
Matrix2 axis_conjugator(const Geodesic& geo);

double distance_to_geodesic(cplx z, const Geodesic& geo);
// Distance between two disjoint geodesics; nullopt if they cross or share an endpoint.
std::optional<double> geodesic_separation(const Geodesic& g1, const Geodesic& g2);
// Transverse crossing point, if any.
std::optional<cplx> geodesic_crossing(const Geodesic& g1, const Geodesic& g2);
// Unit tangent (as a complex direction) of an oriented geodesic at a point on it.
cplx geodesic_tangent(const Geodesic& geo, cplx z);

// One side of a geodesic. Used for ping-pong domains and pruning.
struct HalfSpace {
    Geodesic boundary;
    bool left = true;  // points to the left of boundary (w.r.t. its orientation)

    bool contains(cplx z) const;
    // 0 if z is inside; otherwise the distance to the boundary geodesic.
    double distance(cplx z) const;
};

HalfSpace mobius_apply(const Matrix2& g, const HalfSpace& h);

}  // namespace hypgeom
}  // namespace hypereis
