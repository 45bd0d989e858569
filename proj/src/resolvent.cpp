#include "hypereis/resolvent.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hypereis/errors.hpp"

namespace hypereis::resolvent {

namespace {

constexpr double kPi = std::numbers::pi;
// d(z, w) < 1e-4 counts as the diagonal: sigma - 1 = sinh^2(d/2)
const double kDiagonalSigma = std::pow(std::sinh(0.5e-4), 2);

struct Kernel {
    cplx s;
    cplx pre;  // Gamma(s+1)Gamma(s-1)/(4 pi Gamma(2s))
    cplx c;
    specfun::Hyp2f1Path path;

    Kernel(cplx s_, ThirdParam third, specfun::Hyp2f1Path p) : s(s_), path(p) {
        if (!(s.real() > 1.0)) throw DomainError("weight-2 resolvent kernel needs Re s > 1");
        pre = specfun::complex_gamma(s + 1.0) * specfun::complex_gamma(s - 1.0) * specfun::rgamma(2.0 * s) /
              (4.0 * kPi);
        c = third == ThirdParam::TwoS ? 2.0 * s : s;
    }

    // value at (z, w) given sigma - 1 computed without cancellation
    cplx operator()(cplx z, cplx w, double sigma_m1) const {
        const double sigma = 1.0 + sigma_m1;
        const cplx phase = -(w - std::conj(z)) / (z - std::conj(w));
        return phase * pre * std::exp(-s * std::log(sigma)) *
               specfun::gauss_2f1(s + 1.0, s - 1.0, c, 1.0 / sigma, path);
    }
};

double sigma_minus_one(cplx z, cplx w) { return std::norm(z - w) / (4.0 * z.imag() * w.imag()); }

}  // namespace

double point_pair_sigma(cplx z, cplx w) { return std::norm(z - std::conj(w)) / (4.0 * z.imag() * w.imag()); }

KernelValue free_resolvent_w2(cplx s, const PointH& z, const PointH& w, ThirdParam third,
                              specfun::Hyp2f1Path path) {
    const Kernel k(s, third, path);
    const double sm1 = sigma_minus_one(z.z(), w.z());
    if (!(sm1 > kDiagonalSigma)) throw DomainError("resolvent kernel evaluated on the diagonal");
    KernelValue v;
    v.sigma = 1.0 + sm1;
    v.separation = hypgeom::hyperbolic_distance(z, w);
    v.value = k(z.z(), w.z(), sm1);
    return v;
}

SeriesEvaluation group_resolvent(const FuchsianGroup& g, cplx s, const PointH& z, const PointH& w,
                                 const TruncationPolicy& pol, ThirdParam third) {
    if (pol.check_region) {
        const double bound = std::max(1.0, series::convergence_threshold(g, pol));
        if (!(s.real() > bound)) {
            std::ostringstream os;
            os << "automorphic resolvent needs Re s > " << bound;
            throw DomainError(os.str());
        }
    }
    const Kernel k(s, third, specfun::Hyp2f1Path::Auto);
    const cplx z0 = z.z(), w0 = w.z();
    // sum over M of g(Mz, w) / j_M(z), the same series reindexed by M = gamma^{-1}
    auto term = [&](const hypgeom::Matrix2& m) {
        const cplx mz = hypgeom::act(m, z0);
        const double sm1 = sigma_minus_one(mz, w0);
        if (!(sm1 > kDiagonalSigma)) throw DomainError("z lies within 1e-4 of the orbit of w");
        return k(mz, w0, sm1) / hypgeom::automorphy_factor(m, z0);
    };
    const auto r = group::sum_orbit<cplx>(g, {}, pol, term, [](cplx v) { return std::abs(v); });
    SeriesEvaluation e;
    e.value = series::FormValue::make(1, r.total / z.y, 0.0, z);
    e.word_len = r.shells;
    e.terms = r.terms;
    e.tail_estimate = r.tail;
    e.converged = r.converged;
    e.monotone_tail = r.monotone_tail;
    e.shell_magnitude = r.shell_magnitude;
    if (!r.converged && pol.require_convergence)
        throw ConvergenceError("automorphic resolvent did not converge within " + std::to_string(r.shells) +
                               " shells");
    return e;
}

double kernel_eigen_residual(cplx s, ThirdParam third, int eigen_sign, double h) {
    const PointH w = PointH::make(0.3, 1.0);
    const double x = 0.3, y = std::exp(2.0);
    auto F = [&](double a, double b) { return free_resolvent_w2(s, PointH::make(a, b), w, third).value; };
    const cplx f = F(x, y);
    const cplx fxx = (F(x + h, y) - 2.0 * f + F(x - h, y)) / (h * h);
    const cplx fyy = (F(x, y + h) - 2.0 * f + F(x, y - h)) / (h * h);
    const cplx fx = (F(x + h, y) - F(x - h, y)) / (2.0 * h);
    const cplx lap = y * y * (fxx + fyy) - cplx{0.0, 2.0} * y * fx;
    return std::abs(lap + double(eigen_sign) * s * (1.0 - s) * f) / std::abs(f);
}

SelectionReport select_kernel_parameters(const std::vector<double>& s_values, double h) {
    SelectionReport rep;
    rep.s_values = s_values;
    for (ThirdParam third : {ThirdParam::TwoS, ThirdParam::S}) {
        for (int sign : {1, -1}) {
            SelectionCandidate c;
            c.third = third;
            c.eigen_sign = sign;
            c.passes = true;
            for (double s : s_values) {
                c.residuals.push_back(kernel_eigen_residual(s, third, sign, h));
                c.passes = c.passes && c.residuals.back() < rep.pass_tol;
            }
            rep.candidates.push_back(c);
        }
    }
    bool others_rejected = true;
    for (const auto& c : rep.candidates) {
        if (c.passes) {
            ++rep.passing;
            rep.selected = c;
        } else {
            for (double r : c.residuals) others_rejected = others_rejected && r > rep.reject_tol;
        }
    }
    rep.unique = rep.passing == 1 && others_rejected;
    if (rep.passing != 1) rep.selected.reset();
    return rep;
}

namespace {

bool decreasing_with_floor(const std::vector<double>& dev, double floor) {
    for (std::size_t k = 1; k < dev.size(); ++k)
        if (!(dev[k] <= dev[k - 1] || dev[k] < floor)) return false;
    return true;
}

}  // namespace

LimitReport cusp_limit_identity(const FuchsianGroup& g, cplx s, const PointH& z, const std::vector<double>& Y_grid,
                                double x_prime, const TruncationPolicy& pol) {
    const auto gen = g.parabolic_generator_fixing(hypgeom::BoundaryPoint::infinity());
    if (!gen) throw DomainError("cusp limit needs a parabolic generator fixing infinity");
    if (Y_grid.empty()) throw DomainError("empty Y grid");
    for (std::size_t k = 0; k < Y_grid.size(); ++k) {
        if (!(Y_grid[k] > 0)) throw DomainError("Y grid must be positive");
        if (k > 0 && !(Y_grid[k] > Y_grid[k - 1])) throw DomainError("Y grid must be increasing");
    }
    const FuchsianGroup gn = g.conjugated(group::cusp_of(g, *gen).scaling);
    LimitReport rep;
    rep.identity = "cusp_limit";
    rep.grid = Y_grid;
    const cplx E = series::parabolic_eisenstein(gn, *gen, 1, s, z, pol).value.auto_lift;
    rep.rhs = E / (1.0 - 2.0 * s);
    for (double Y : Y_grid) {
        const cplx G = group_resolvent(gn, s, z, PointH::make(x_prime, Y), pol).value.auto_lift;
        const cplx lhs = std::exp((s - 1.0) * std::log(Y)) * G;
        rep.lhs.push_back(lhs);
        rep.deviation.push_back(std::abs(lhs - rep.rhs) / std::abs(rep.rhs));
    }
    rep.extrapolated = rep.lhs.back();
    rep.decreasing = decreasing_with_floor(rep.deviation, 1e-8);
    rep.note = "cusp at infinity normalized to width one; deviations below 1e-8 count as converged";
    return rep;
}

cplx funnel_prefactor(cplx s) {
    return -std::exp(s * std::log(4.0)) / (4.0 * kPi) * specfun::complex_gamma(s + 1.0) *
           specfun::complex_gamma(s - 1.0) * specfun::rgamma(2.0 * s);
}

LimitReport funnel_limit_identity(const FuchsianGroup& g, cplx s, const PointH& z, double x_prime,
                                  const std::vector<double>& eps_grid, const TruncationPolicy& pol) {
    if (x_prime == 0.0) throw DomainError("funnel limit needs x' != 0");
    if (!(s.real() > 1.0)) throw DomainError("funnel limit needs Re s > 1");
    if (eps_grid.empty()) throw DomainError("empty epsilon grid");
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
        if (!(eps_grid[k] > 0)) throw DomainError("epsilon grid must be positive");
        if (k > 0 && !(eps_grid[k] < eps_grid[k - 1])) throw DomainError("epsilon grid must be decreasing");
    }
    LimitReport rep;
    rep.identity = "funnel_limit";
    rep.grid = eps_grid;
    rep.rhs = funnel_prefactor(s);
    const cplx E = series::patterson_eisenstein(g, hypgeom::BoundaryPoint::real(x_prime), 1, s, z, pol)
                       .value.auto_lift;
    for (double eps : eps_grid) {
        const cplx G = group_resolvent(g, s, z, PointH::make(x_prime, eps), pol).value.auto_lift;
        const cplx ratio = std::exp(-s * std::log(eps)) * G / E;
        rep.lhs.push_back(ratio);
        rep.deviation.push_back(std::abs(std::abs(ratio) - std::abs(rep.rhs)) / std::abs(rep.rhs));
    }
    rep.extrapolated = rep.lhs.back();
    rep.decreasing = decreasing_with_floor(rep.deviation, 1e-8);
    std::ostringstream os;
    os.precision(6);
    os << "moduli compared; limiting ratio / printed prefactor = " << rep.extrapolated / rep.rhs;
    rep.note = os.str();
    return rep;
}

nlohmann::ordered_json complex_json(cplx v) { return nlohmann::ordered_json::array({v.real(), v.imag()}); }

nlohmann::ordered_json to_json(const LimitReport& r) {
    nlohmann::ordered_json j;
    j["identity"] = r.identity;
    j["grid"] = r.grid;
    auto& l = j["lhs"] = nlohmann::ordered_json::array();
    for (cplx v : r.lhs) l.push_back(complex_json(v));
    j["rhs"] = complex_json(r.rhs);
    j["extrapolated"] = complex_json(r.extrapolated);
    j["deviation"] = r.deviation;
    j["decreasing"] = r.decreasing;
    j["note"] = r.note;
    return j;
}

nlohmann::ordered_json to_json(const SelectionReport& r) {
    nlohmann::ordered_json j;
    j["s_values"] = r.s_values;
    auto& cs = j["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : r.candidates) {
        nlohmann::ordered_json o;
        o["third_parameter"] = c.third == ThirdParam::TwoS ? "2s" : "s";
        o["operator"] = c.eigen_sign > 0 ? "D2 + s(1-s)" : "D2 - s(1-s)";
        o["residuals"] = c.residuals;
        o["passes"] = c.passes;
        cs.push_back(o);
    }
    j["passing"] = r.passing;
    j["unique"] = r.unique;
    if (r.selected) {
        j["selected"] = {{"third_parameter", r.selected->third == ThirdParam::TwoS ? "2s" : "s"},
                         {"operator", r.selected->eigen_sign > 0 ? "D2 + s(1-s)" : "D2 - s(1-s)"}};
    }
    return j;
}

}  // namespace hypereis::resolvent
