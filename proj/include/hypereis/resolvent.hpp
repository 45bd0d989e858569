#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "hypereis/series.hpp"
#include "hypereis/specfun.hpp"

namespace hypereis::resolvent {

using group::FuchsianGroup;
using group::TruncationPolicy;
using hypgeom::PointH;
using series::SeriesEvaluation;

struct KernelValue {
    cplx value{};
    double sigma = 1.0;       // point-pair invariant cosh^2(d/2)
    double separation = 0.0;  // hyperbolic distance
};

// Third parameter of F(s+1, s-1; c; 1/sigma) in the weight-2 kernel.
enum class ThirdParam { TwoS, S };

// |z - conj(w)|^2 / (4 Im z Im w)
double point_pair_sigma(cplx z, cplx w);

// g_s(z, w) = -(w - zbar)/(z - wbar) Gamma(s+1)Gamma(s-1)/(4 pi Gamma(2s)) sigma^{-s} F(s+1, s-1; c; 1/sigma).
KernelValue free_resolvent_w2(cplx s, const PointH& z, const PointH& w, ThirdParam third = ThirdParam::TwoS,
                              specfun::Hyp2f1Path path = specfun::Hyp2f1Path::Auto);

// G_s(z, w) = sum over G of j_gamma(w) g_s(z, gamma w), as a weight-2 function of z (auto_lift).
SeriesEvaluation group_resolvent(const FuchsianGroup& g, cplx s, const PointH& z, const PointH& w,
                                 const TruncationPolicy& pol = {}, ThirdParam third = ThirdParam::TwoS);

// Finite-difference residual |(D_2 + e s(1-s)) g| / |g| of z -> g_s(z, w) at distance about 2,
// with D_2 = y^2 (d_xx + d_yy) - 2 i y d_x.
double kernel_eigen_residual(cplx s, ThirdParam third, int eigen_sign, double h = 1e-3);

struct SelectionCandidate {
    ThirdParam third = ThirdParam::TwoS;
    int eigen_sign = 1;
    std::vector<double> residuals;  // one per s value
    bool passes = false;
};

struct SelectionReport {
    std::vector<double> s_values;
    std::vector<SelectionCandidate> candidates;
    double pass_tol = 1e-3;
    double reject_tol = 1e-1;
    int passing = 0;
    // exactly one candidate below pass_tol at every s, all others above reject_tol at every s
    bool unique = false;
    std::optional<SelectionCandidate> selected;
};

SelectionReport select_kernel_parameters(const std::vector<double>& s_values = {2.0, 3.0}, double h = 1e-3);

struct LimitReport {
    std::string identity;
    std::vector<double> grid;
    std::vector<cplx> lhs;
    cplx rhs{};
    cplx extrapolated{};
    std::vector<double> deviation;  // relative, per grid entry
    bool decreasing = false;
    std::string note;
};

// Y^{s-1} G_s(z, x' + iY) against E_{inf,1}(s, z)/(1 - 2s). The group is first conjugated so the
// cusp at infinity has width one; z and x' are coordinates in that frame.
LimitReport cusp_limit_identity(const FuchsianGroup& g, cplx s, const PointH& z, const std::vector<double>& Y_grid,
                                double x_prime = 0.0, const TruncationPolicy& pol = {});

// Ratio eps^{-s} G_s(z, x' + i eps) / E_{x'}(z, s, 1) against -4^s Gamma(s+1)Gamma(s-1)/(4 pi Gamma(2s)).
// lhs holds the ratios; deviation compares moduli.
LimitReport funnel_limit_identity(const FuchsianGroup& g, cplx s, const PointH& z, double x_prime,
                                  const std::vector<double>& eps_grid, const TruncationPolicy& pol = {});

cplx funnel_prefactor(cplx s);

nlohmann::ordered_json to_json(const LimitReport& r);
nlohmann::ordered_json to_json(const SelectionReport& r);
nlohmann::ordered_json complex_json(cplx v);

}  // namespace hypereis::resolvent
