#include "hypereis/series.hpp"

#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hypereis/errors.hpp"
#include "hypereis/specfun.hpp"

namespace hypereis::series {

using group::OrbitResult;
using group::OrbitSpec;
using hypgeom::IsometryKind;

FormValue FormValue::make(int q, cplx dz, cplx dzbar, const PointH& z) {
    FormValue v;
    v.q = q;
    v.dz_coeff = dz;
    v.dzbar_coeff = dzbar;
    v.auto_lift = std::pow(z.y, q) * dz;
    v.point = z;
    return v;
}

namespace {

// Coefficients of sum S dz/z-type pullbacks: f collects S gamma'/gamma, g collects
// S conj(gamma'/gamma).
struct Pair {
    cplx f{}, g{};

    Pair& operator+=(const Pair& o) {
        f += o.f;
        g += o.g;
        return *this;
    }
    Pair operator*(double w) const { return {f * w, g * w}; }
};

double pair_mag(const Pair& p) { return std::abs(p.f) + std::abs(p.g); }
double cmag(cplx v) { return std::abs(v); }

// (y/|w|)^p
cplx sin_power(cplx w, cplx p) { return std::exp(p * std::log(w.imag() / std::abs(w))); }

void check_gen(const FuchsianGroup& g, int gen) {
    if (gen < 0 || gen >= g.rank()) throw DomainError("generator index out of range");
}

template <class V>
SeriesEvaluation finish(const OrbitResult<V>& r, const TruncationPolicy& pol, const FormValue& value,
                        const char* what) {
    SeriesEvaluation e;
    e.value = value;
    e.word_len = r.shells;
    e.terms = r.terms;
    e.tail_estimate = r.tail;
    e.converged = r.converged;
    e.monotone_tail = r.monotone_tail;
    e.shell_magnitude = r.shell_magnitude;
    if (!r.converged && pol.require_convergence) {
        std::ostringstream os;
        os << what << " did not converge: " << r.shells << " shells, " << r.terms << " terms, last shell "
           << r.tail << (r.budget_exhausted ? " (term budget exhausted)" : "");
        throw ConvergenceError(os.str());
    }
    return e;
}

// Axis of generator c moved to the imaginary axis; C maps the normalized frame to the original.
struct AxisFrame {
    FuchsianGroup g;
    Matrix2 C;
    cplx z;      // C^{-1} z
    cplx pull;   // (C^{-1})'(z)
};

AxisFrame axis_frame(const FuchsianGroup& g, int c_gen, const PointH& z) {
    check_gen(g, c_gen);
    const Matrix2 C = group::axis_normalizer(g, c_gen);
    const Matrix2 Ci = C.inverse();
    return {g.conjugated(C), C, hypgeom::act(Ci, z.z()), hypgeom::derivative(Ci, z.z())};
}

// Coset sum over <c>\G of sin^p(theta(gamma z)) (gamma'/gamma, conj) in the axis frame.
OrbitResult<Pair> geodesic_pair_sum(const FuchsianGroup& g, std::optional<int> coset, cplx z, cplx p,
                                    const TruncationPolicy& pol) {
    OrbitSpec spec;
    spec.coset_of = coset;
    auto term = [&](const Matrix2& m) {
        const cplx w = hypgeom::act(m, z);
        const cplx r = hypgeom::derivative(m, z) / w;
        const cplx S = sin_power(w, p);
        return Pair{S * r, S * std::conj(r)};
    };
    return group::sum_orbit<Pair>(g, spec, pol, term, pair_mag);
}

const cplx kHalfI = 1.0 / cplx{0.0, 2.0};  // 1/(2i): dtheta = Im(dz/z) has dz-part 1/(2i z)

FormValue real_form(const Pair& p, cplx scale, cplx pull, const PointH& z) {
    // f dz + g dzbar with f = scale p.f/(2i), g = -scale p.g/(2i), pulled back by C^{-1}
    return FormValue::make(1, scale * kHalfI * p.f * pull, -scale * kHalfI * p.g * std::conj(pull), z);
}

void require_re(cplx s, double bound, const TruncationPolicy& pol, const char* what) {
    if (!pol.check_region) return;
    if (!(s.real() > bound)) {
        std::ostringstream os;
        os << what << " needs Re s > " << bound << ", got " << s.real();
        throw DomainError(os.str());
    }
}

}  // namespace

SeriesEvaluation hyperbolic_eisenstein(const FuchsianGroup& g, int c_gen, cplx s, const PointH& z,
                                       const TruncationPolicy& pol) {
    if (!(s.real() > 0.0)) throw DomainError("hyperbolic Eisenstein series needs Re s > 0");
    const AxisFrame fr = axis_frame(g, c_gen, z);
    const auto r = geodesic_pair_sum(fr.g, c_gen, fr.z, s, pol);
    return finish(r, pol, real_form(r.total, 1.0 / specfun::k_factor(s), fr.pull, z), "Omega");
}

SeriesEvaluation alpha_series(const FuchsianGroup& g, int c_gen, cplx s, const PointH& z,
                              const TruncationPolicy& pol) {
    if (!(s.real() > 1.0)) throw DomainError("alpha series needs Re s > 1");
    const AxisFrame fr = axis_frame(g, c_gen, z);
    const auto r = geodesic_pair_sum(fr.g, c_gen, fr.z, s - 1.0, pol);
    return finish(r, pol, real_form(r.total, 1.0, fr.pull, z), "alpha");
}

WeightQValue weight_q_series(const FuchsianGroup& g, int c_gen, int q, cplx s, const PointH& z,
                             const TruncationPolicy& pol) {
    if (q < 0) throw DomainError("weight q must be non-negative");
    if (!(s.real() > 1.0)) throw DomainError("weight-q series needs Re s > 1");
    const AxisFrame fr = axis_frame(g, c_gen, z);
    OrbitSpec spec;
    spec.coset_of = c_gen;
    const cplx p = s - double(q);
    auto term = [&](const Matrix2& m) {
        const cplx w = hypgeom::act(m, fr.z);
        const cplx r = hypgeom::derivative(m, fr.z) / w;
        return std::pow(r, q) * sin_power(w, p);
    };
    const auto res = group::sum_orbit<cplx>(fr.g, spec, pol, term, cmag);
    const cplx A = res.total * std::pow(fr.pull, q);
    WeightQValue out;
    out.A = finish(res, pol, FormValue::make(q, A, 0.0, z), "A_{l,q}");
    const cplx b = specfun::b_factor(q, s);
    if (std::abs(b) < 1e-14) throw PoleError("b_q(s) vanishes; Xi is undefined at this s");
    out.Xi = out.A;
    out.Xi.value = FormValue::make(q, A / b, 0.0, z);
    return out;
}

SeriesEvaluation parabolic_eisenstein(const FuchsianGroup& g, int cusp_gen, int q, cplx s, const PointH& z,
                                      const TruncationPolicy& pol) {
    check_gen(g, cusp_gen);
    if (q < 0) throw DomainError("weight q must be non-negative");
    require_re(s, std::max(convergence_threshold(g, pol), 1.0), pol, "parabolic Eisenstein series");
    const group::Cusp cusp = group::cusp_of(g, cusp_gen);
    const Matrix2 Si = cusp.scaling.inverse();
    const FuchsianGroup gn = g.conjugated(cusp.scaling);
    const cplx zn = hypgeom::act(Si, z.z());
    OrbitSpec spec;
    spec.coset_of = cusp_gen;
    auto term = [&](const Matrix2& m) {
        const cplx w = hypgeom::act(m, zn);
        const cplx y_s = std::exp(s * std::log(w.imag()));
        if (q == 0) return y_s;
        return y_s * std::pow(1.0 / hypgeom::automorphy_factor(m, zn), q);
    };
    const auto res = group::sum_orbit<cplx>(gn, spec, pol, term, cmag);
    // sigma^{-1} gamma = gamma' sigma^{-1}: the factor of sigma^{-1} at z is common to all terms
    const cplx E = res.total * std::pow(1.0 / hypgeom::automorphy_factor(Si, z.z()), q);
    return finish(res, pol, FormValue::make(q, E / std::pow(z.y, q), 0.0, z), "parabolic Eisenstein series");
}

SeriesEvaluation patterson_eisenstein(const FuchsianGroup& g, const BoundaryPoint& b, int k, cplx s,
                                      const PointH& z, const TruncationPolicy& pol) {
    if (k < 0) throw DomainError("Patterson series weight k must be non-negative");
    require_re(s, convergence_threshold(g, pol), pol, "Patterson Eisenstein series");
    const cplx z0 = z.z();
    auto term = [&](const Matrix2& m) {
        const cplx w = hypgeom::act(m, z0);
        cplx P, phase = 1.0;
        if (b.at_infinity) {
            P = w.imag();
        } else {
            const cplx d = w - b.x;
            P = w.imag() / std::norm(d);
            phase = (std::conj(w) - b.x) / d;
        }
        const cplx Ps = std::exp(s * std::log(P.real()));
        if (k == 0) return Ps;
        const cplx j = 1.0 / hypgeom::automorphy_factor(m, z0);  // gamma'/|gamma'|
        return Ps * std::pow(j * phase, k);
    };
    const auto res = group::sum_orbit<cplx>(g, {}, pol, term, cmag);
    return finish(res, pol, FormValue::make(k, res.total / std::pow(z.y, k), 0.0, z),
                  "Patterson Eisenstein series");
}

GeodesicSeries infinite_geodesic_series(const FuchsianGroup& g, cplx s, const PointH& z,
                                        const TruncationPolicy& pol) {
    if (!(s.real() > 1.0)) throw DomainError("infinite-geodesic series needs Re s > 1");
    if (!g.parabolic_generator_fixing(BoundaryPoint::infinity()) ||
        !g.parabolic_generator_fixing(BoundaryPoint::real(0.0)))
        throw DomainError("infinite-geodesic series needs cusps at 0 and infinity");
    const auto r = geodesic_pair_sum(g, std::nullopt, z.z(), s - 1.0, pol);
    const cplx k = specfun::k_factor(s - 1.0);
    GeodesicSeries out;
    out.theta = finish(r, pol, FormValue::make(1, r.total.f / k, 0.0, z), "theta");
    out.eta_hat = out.theta;
    out.eta_hat.value = real_form(r.total, 1.0 / k, 1.0, z);
    return out;
}

double convergence_threshold(const FuchsianGroup& g, const TruncationPolicy& pol) {
    if (pol.delta_hint) return *pol.delta_hint + 0.1;
    if (g.rank() == 0) return 0.0;
    if (g.rank() == 1) return g.generator(0).type.kind == IsometryKind::Parabolic ? 0.6 : 0.1;
    return 1.0;
}

Family family_from_string(const std::string& name) {
    static const std::pair<const char*, Family> names[] = {
        {"omega", Family::Omega},         {"alpha", Family::Alpha},     {"weight_q", Family::WeightQ},
        {"xi", Family::Xi},               {"parabolic", Family::Parabolic}, {"patterson", Family::Patterson},
        {"theta", Family::Theta},         {"eta_hat", Family::EtaHat}};
    for (const auto& [n, f] : names)
        if (name == n) return f;
    throw DomainError("unknown series family '" + name + "'");
}

std::string to_string(Family f) {
    switch (f) {
        case Family::Omega: return "omega";
        case Family::Alpha: return "alpha";
        case Family::WeightQ: return "weight_q";
        case Family::Xi: return "xi";
        case Family::Parabolic: return "parabolic";
        case Family::Patterson: return "patterson";
        case Family::Theta: return "theta";
        case Family::EtaHat: return "eta_hat";
    }
    return "unknown";
}

SeriesEvaluation evaluate(const FuchsianGroup& g, const FamilyRequest& req, const PointH& z,
                          const TruncationPolicy& pol) {
    switch (req.family) {
        case Family::Omega: return hyperbolic_eisenstein(g, req.gen, req.s, z, pol);
        case Family::Alpha: return alpha_series(g, req.gen, req.s, z, pol);
        case Family::WeightQ: return weight_q_series(g, req.gen, req.q, req.s, z, pol).A;
        case Family::Xi: return weight_q_series(g, req.gen, req.q, req.s, z, pol).Xi;
        case Family::Parabolic: return parabolic_eisenstein(g, req.gen, req.q, req.s, z, pol);
        case Family::Patterson: return patterson_eisenstein(g, req.b, req.q, req.s, z, pol);
        case Family::Theta: return infinite_geodesic_series(g, req.s, z, pol).theta;
        case Family::EtaHat: return infinite_geodesic_series(g, req.s, z, pol).eta_hat;
    }
    throw DomainError("unknown series family");
}

std::vector<SeriesEvaluation> evaluate_points(const FuchsianGroup& g, const FamilyRequest& req,
                                              const std::vector<PointH>& points, const TruncationPolicy& pol,
                                              int threads) {
    const std::size_t n = points.size();
    std::vector<SeriesEvaluation> out(n);
    std::vector<std::exception_ptr> errors(n);
    const int T = std::max(1, std::min<int>(threads, int(std::max<std::size_t>(n, 1))));
    auto work = [&](int t) {
        for (std::size_t i = t; i < n; i += T) {
            try {
                out[i] = evaluate(g, req, points[i], pol);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (T == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<PointH> GridSpec::points() const {
    if (nx < 1 || ny < 1) throw DomainError("grid needs at least one node per axis");
    if (!(y0 > 0.0) || !(y1 > 0.0)) throw DomainError("grid must lie in the upper half-plane (y > 0)");
    if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1))
        throw DomainError("grid bounds must be finite");
    std::vector<PointH> pts;
    pts.reserve(std::size_t(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        const double y = ny == 1 ? y0 : y0 + (y1 - y0) * j / (ny - 1);
        for (int i = 0; i < nx; ++i) {
            const double x = nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1);
            pts.push_back(PointH::make(x, y));
        }
    }
    return pts;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string grid_csv(const std::vector<SeriesEvaluation>& vals) {
    std::string out = std::string("# schema=") + kGridSchema + "\n";
    out += "x,y,re_f,im_f,re_g,im_g,word_len,tail\n";
    for (const auto& e : vals) {
        const FormValue& v = e.value;
        out += num(v.point.x) + ',' + num(v.point.y) + ',' + num(v.dz_coeff.real()) + ',' + num(v.dz_coeff.imag()) +
               ',' + num(v.dzbar_coeff.real()) + ',' + num(v.dzbar_coeff.imag()) + ',' + std::to_string(e.word_len) +
               ',' + num(e.tail_estimate) + '\n';
    }
    return out;
}

std::string grid_json(const std::vector<SeriesEvaluation>& vals, const std::string& family) {
    nlohmann::ordered_json j;
    j["schema"] = kGridSchema;
    j["family"] = family;
    auto& recs = j["records"] = nlohmann::ordered_json::array();
    for (const auto& e : vals) {
        const FormValue& v = e.value;
        nlohmann::ordered_json r;
        r["x"] = v.point.x;
        r["y"] = v.point.y;
        r["re_f"] = v.dz_coeff.real();
        r["im_f"] = v.dz_coeff.imag();
        r["re_g"] = v.dzbar_coeff.real();
        r["im_g"] = v.dzbar_coeff.imag();
        r["word_len"] = e.word_len;
        r["tail"] = e.tail_estimate;
        recs.push_back(std::move(r));
    }
    return j.dump(1) + "\n";
}

}  // namespace hypereis::series
