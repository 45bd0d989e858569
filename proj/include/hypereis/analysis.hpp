#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypereis/series.hpp"

namespace hypereis::analysis {

using group::FuchsianGroup;
using group::GroupElement;
using group::TruncationPolicy;
using group::Word;
using hypgeom::PointH;
using series::FormValue;

// Automorphic-lift samples on a uniform rectangular grid; node (i, j) sits at (x0 + i h, y0 + j h).
struct GridField {
    double x0 = 0.0, y0 = 1.0, h = 1e-3;
    int nx = 0, ny = 0;
    int q = 0;
    std::vector<cplx> values;     // row-major, y outer
    std::vector<std::uint8_t> valid;

    double x(int i) const { return x0 + i * h; }
    double y(int j) const { return y0 + j * h; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    cplx at(int i, int j) const { return values[index(i, j)]; }
    bool is_valid(int i, int j) const { return valid[index(i, j)] != 0; }

    // Samples f at every node; throws DomainError unless y0 > 0, h > 0 and all values are finite.
    static GridField sample(const std::function<cplx(const PointH&)>& f, double x0, double y0, double h, int nx,
                            int ny, int q);
};

// Delta_{2q} = y^2 (d_xx + d_yy) - 2 i q y d_x with centered second-order stencils.
// The boundary ring (and any node next to an invalid one) is marked invalid.
GridField apply_weighted_laplacian(const GridField& f);

enum class MaassDirection { Raise, Lower };

// K_q = i y d_x + y d_y + q (weight q -> q + 1), L_q = -i y d_x + y d_y - q (q -> q - 1).
GridField apply_maass(const GridField& f, MaassDirection dir);

// Centers of the functional-equation check: n x n points spaced `spacing` from (x0, y0),
// each with a 5-point stencil of step h.
struct ResidualGrid {
    double x0 = -0.29, y0 = 0.8;
    double spacing = 0.02;
    int n = 30;
    double h = 1e-3;
};

// Fixed-depth policy: the same term set at every stencil node.
TruncationPolicy matched_truncation(int shells = 3);

struct FEResidualReport {
    std::string family;
    cplx s{};
    int q = 0;
    int gen = 0;
    ResidualGrid grid;
    double residual = 0.0;  // max relative |LHS - RHS| / (|RHS| + 1e-12) over centers
    PointH worst;
    TruncationPolicy truncation;
};

// Residual of the family's differential functional equation on automorphic lifts:
//   omega:    -Delta_2 W(s) + s(s+1) W(s) = s(s+1) W(s+2)
//   eta_hat:  -Delta_2 W(s) = s(1-s) (W(s) - W(s+2))
//   weight_q: Delta_2q W(s) + s(1-s) W(s) = (s+q)(q-s) W(s+2)
FEResidualReport functional_equation_residual(const FuchsianGroup& g, const series::FamilyRequest& req,
                                              const ResidualGrid& grid,
                                              const TruncationPolicy& pol = matched_truncation(), int threads = 1);

struct FEOrderReport {
    std::vector<FEResidualReport> runs;  // one per step
    std::vector<double> ratios;          // residual(h_k) / residual(h_{k+1})
};

FEOrderReport functional_equation_order(const FuchsianGroup& g, const series::FamilyRequest& req,
                                        const ResidualGrid& grid, const std::vector<double>& steps,
                                        const TruncationPolicy& pol = matched_truncation(), int threads = 1);

enum class CycleKind { GeodesicLoop, DeckPath };

// A closed curve on the surface, given by a lift from base_point to closer(base_point).
struct Cycle {
    CycleKind kind = CycleKind::GeodesicLoop;
    PointH base_point;
    GroupElement closer;
    std::vector<cplx> samples;  // along the lift, first = base point, last = closer(first)

    Cycle reversed() const;
};

// Lift of the closed geodesic of the element w: the axis segment from the point nearest i to its image.
Cycle geodesic_loop(const FuchsianGroup& g, const Word& w, int segments = 8);
// Geodesic path from base to w(base), closed by the deck transformation w.
Cycle deck_path(const FuchsianGroup& g, const Word& w, const PointH& base, int segments = 8);

using FormEvaluator = std::function<FormValue(const PointH&)>;

// Integral of f dz + g dzbar along the lift, Gauss-Legendre with n_quad nodes per geodesic segment.
cplx integrate_form_along_cycle(const FormEvaluator& form, const Cycle& cycle, int n_quad = 16);

// Signed count of transverse crossings between the closed geodesics of a.closer and b.closer:
// lifts of a's axis crossing one period of b's axis, each counted with sign Im(conj(t_a) t_b).
int intersection_number(const FuchsianGroup& g, const Cycle& a, const Cycle& b, int max_word_len = 6);

struct DualityReport {
    int c_gen = 0;
    cplx s{};
    cplx integral{};
    int intersection = 0;
    double deviation = 0.0;  // | |integral| - |intersection| |
};

DualityReport duality_check(const FuchsianGroup& g, int c_gen, const Cycle& cycle, cplx s,
                            const TruncationPolicy& pol = {}, int n_quad = 16);

struct L2Options {
    int n_x1 = 24;          // Gauss nodes along the geodesic
    int n_x2 = 16;          // Gauss nodes per unit-length panel across it
    double panel = 1.0;
    int multiplicity_word_len = 5;
    double multiplicity_radius = 1.0;
};

struct L2Report {
    std::vector<double> cuts;
    std::vector<double> mass;        // integral over |x2| <= cut
    std::vector<double> increments;  // mass[k] - mass[k-1], k >= 1
    bool geometric_decrease = false;
    std::optional<double> closed_form;  // cyclic groups, at the last cut
    std::optional<double> closed_bound;  // cyclic groups: sqrt(pi) Gamma(sigma/2)/Gamma(1/2+sigma/2) (e^l - 1)
    long samples = 0;
    // Multiplicity lemma shape: #{gamma : d(z, gamma z) < 2 r} <= packing bound in rho(z)
    long multiplicity_max = 0;
    double multiplicity_ratio = 0.0;  // max count / bound over samples
    bool multiplicity_ok = true;
};

// Integral of |omega|^2 over the fundamental domain in Fermi coordinates of generator c_gen's axis,
// cut at |x2| <= r for each r. The domain is one period along the axis minus the ping-pong
// half-spaces of the other generators. With omega_s set on a cyclic group, the closed form and
// bound for Omega_c(omega_s) are reported.
L2Report l2_norm_estimate(const FormEvaluator& form, const FuchsianGroup& g, int c_gen, const std::vector<double>& cuts,
                          const L2Options& opt = {}, std::optional<cplx> omega_s = std::nullopt);

// (l / |k(s)|^2) int_{-r}^{r} cosh^{-2 sigma - 1}(x) dx, the cyclic-group mass of Omega.
double cyclic_l2_mass(double l, cplx s, double r);

struct DegenerationGrid {
    double u0 = -0.5, u1 = 0.5;
    int nu = 5;
    double v0 = 0.5, v1 = 1.0;
    int nv = 5;
};

// Generators as functions of l, the pinched generator, and the limit group with its cusp generator.
struct DegeneratingFamily {
    std::string name;
    std::function<FuchsianGroup(double)> group_at;
    int pinched_gen = 0;
    FuchsianGroup limit;
    int limit_cusp_gen = 0;
};

// cyclic_hyperbolic(l) pinching to cyclic_parabolic.
DegeneratingFamily elementary_family();

struct DegenerationReport {
    std::string family;
    int q = 0;
    cplx s{};
    std::vector<double> l_grid;
    std::vector<double> sup_error;          // sup over the grid of |l^{-s} a_l(pi_l w) - E_q(w)|
    std::vector<double> closed_form_error;  // elementary family: sup |v^q (sin(lv)/l)^{s-q} - v^s|
    double series_vs_closed_form = 0.0;     // elementary family: sup over l and grid
    bool monotone = false;
    bool assertive = false;  // only the elementary family asserts convergence
    double prefactor_deviation = 0.0;  // |Gamma(1+s/2)/(Gamma(1/2)Gamma(1/2+s/2)) - 1/k(s)|
    double omega_alpha_deviation = 0.0;  // sup |Omega_l(s) - alpha_l(s+1)/k(s)| on the grid
};

// With pi_l(w) = C_l(exp(l w)), C_l the axis normalizer of the pinched generator, compares
// l^{-s} y^q a_l(s, pi_l w) (pi_l'(w))^q with the weight-q parabolic series of the limit group at w.
DegenerationReport degeneration_diagnostic(const DegeneratingFamily& fam, int q, cplx s,
                                           const std::vector<double>& l_grid, const DegenerationGrid& grid = {},
                                           const TruncationPolicy& pol = {});

double abstract_prefactor_deviation(cplx s);

// Lemma checks on collars.
struct CollarPair {
    std::string label;
    double length = 0.0;         // translation length l of the geodesic
    double cosh_distance = 0.0;  // cosh d between two disjoint lifts
    double bound = 0.0;          // coth(l/2)
    bool holds = false;
};

// Pairs (axis g_i, h(axis g_i)) for hyperbolic generators g_i and other generators h^{+-1}; for rank
// two also axis g_i against conjugates of the commutator axis (the boundary geodesic).
std::vector<CollarPair> collar_separation_pairs(const FuchsianGroup& g);

nlohmann::ordered_json to_json(const FEResidualReport& r);
nlohmann::ordered_json to_json(const FEOrderReport& r);
nlohmann::ordered_json to_json(const DualityReport& r);
nlohmann::ordered_json to_json(const L2Report& r);
nlohmann::ordered_json to_json(const DegenerationReport& r);
nlohmann::ordered_json to_json(const CollarPair& r);
nlohmann::ordered_json to_json(const TruncationPolicy& p);

}  // namespace hypereis::analysis
