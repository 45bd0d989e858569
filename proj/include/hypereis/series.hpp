#pragma once

#include <string>
#include <vector>

#include "hypereis/orbit.hpp"

namespace hypereis::series {

using group::FuchsianGroup;
using group::TruncationPolicy;
using hypgeom::BoundaryPoint;
using hypgeom::Matrix2;
using hypgeom::PointH;

// Value of a weight-q form at a point: dz_coeff dz^q (+ dzbar_coeff dzbar^q for real 1-forms).
struct FormValue {
    int q = 0;
    cplx dz_coeff{};
    cplx dzbar_coeff{};
    cplx auto_lift{};  // y^q * dz_coeff
    PointH point;

    static FormValue make(int q, cplx dz, cplx dzbar, const PointH& z);
};

struct SeriesEvaluation {
    FormValue value;
    int word_len = 0;            // deepest shell summed
    long terms = 0;
    double tail_estimate = 0.0;  // magnitude sum of the last shell
    bool converged = false;
    bool monotone_tail = true;
    std::vector<double> shell_magnitude;
};

// Omega_c(s, z): coset sum over <c>\G of pullbacks of sin^s(theta) dtheta / k(s), as the
// real form f dz + conj(f) dzbar.
SeriesEvaluation hyperbolic_eisenstein(const FuchsianGroup& g, int c_gen, cplx s, const PointH& z,
                                       const TruncationPolicy& pol = {});

// alpha_l(s, z): as Omega but with sin^{s-1}(theta) and no normalization.
SeriesEvaluation alpha_series(const FuchsianGroup& g, int c_gen, cplx s, const PointH& z,
                              const TruncationPolicy& pol = {});

struct WeightQValue {
    SeriesEvaluation A;
    SeriesEvaluation Xi;  // A / b_q(s)
};

// A_{l,q}(s, z) = sum over <c>\G of (gamma'/gamma)^q sin^{s-q}(theta(gamma z)) dz^q.
WeightQValue weight_q_series(const FuchsianGroup& g, int c_gen, int q, cplx s, const PointH& z,
                             const TruncationPolicy& pol = {});

// E_{A,q}(s, z) = sum over G_A\G of Im(sigma^{-1} gamma z)^s ((c zbar + d)/(c z + d))^q, with
// (c, d) the bottom row of sigma^{-1} gamma and sigma the width-one cusp scaling. The value
// is a weight-2q automorphic function; dz_coeff = E / y^q.
SeriesEvaluation parabolic_eisenstein(const FuchsianGroup& g, int cusp_gen, int q, cplx s, const PointH& z,
                                      const TruncationPolicy& pol = {});

// E_b(z, s, k) = sum over G of j(gamma, z)^k P(gamma z, b)^s (gamma z, b)^k with
// j = gamma'/|gamma'| and (z, b) = (zbar - b)/(z - b).
SeriesEvaluation patterson_eisenstein(const FuchsianGroup& g, const BoundaryPoint& b, int k, cplx s,
                                      const PointH& z, const TruncationPolicy& pol = {});

struct GeodesicSeries {
    SeriesEvaluation theta;
    SeriesEvaluation eta_hat;  // Im theta as a real form
};

// theta^s = sum over G of pullbacks of (y/|z|)^{s-1} dz/z / k(s-1); needs cusps at 0 and infinity.
GeodesicSeries infinite_geodesic_series(const FuchsianGroup& g, cplx s, const PointH& z,
                                        const TruncationPolicy& pol = {});

// Default bound on Re s for sums over the whole group: delta_hint + 0.1 when a hint is given,
// the exact exponent + 0.1 for cyclic groups, and 1 otherwise (delta < 1 in the second kind).
double convergence_threshold(const FuchsianGroup& g, const TruncationPolicy& pol);

// Families addressable by name (grids, functional equations, CLI).
enum class Family { Omega, Alpha, WeightQ, Xi, Parabolic, Patterson, Theta, EtaHat };

Family family_from_string(const std::string& name);
std::string to_string(Family f);

struct FamilyRequest {
    Family family = Family::Omega;
    int gen = 0;  // closed-geodesic generator or cusp generator
    int q = 0;    // weight (Patterson: k)
    cplx s{1.0, 0.0};
    BoundaryPoint b = BoundaryPoint::real(1.0);
};

SeriesEvaluation evaluate(const FuchsianGroup& g, const FamilyRequest& req, const PointH& z,
                          const TruncationPolicy& pol);

// Parallel map over points; results are independent of the thread count.
std::vector<SeriesEvaluation> evaluate_points(const FuchsianGroup& g, const FamilyRequest& req,
                                              const std::vector<PointH>& points, const TruncationPolicy& pol,
                                              int threads = 1);

struct GridSpec {
    double x0 = -1.0, x1 = 1.0;
    int nx = 10;
    double y0 = 0.5, y1 = 2.0;
    int ny = 10;

    // Row-major points (y outer, x inner); throws DomainError if y0 <= 0.
    std::vector<PointH> points() const;
};

inline constexpr const char* kGridSchema = "hypereis.grid.v1";

std::string grid_csv(const std::vector<SeriesEvaluation>& vals);
std::string grid_json(const std::vector<SeriesEvaluation>& vals, const std::string& family);

}  // namespace hypereis::series
