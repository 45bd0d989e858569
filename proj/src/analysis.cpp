#include "hypereis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hypereis/errors.hpp"
#include "hypereis/quadrature.hpp"
#include "hypereis/specfun.hpp"

namespace hypereis::analysis {

using hypgeom::act;
using hypgeom::Geodesic;
using hypgeom::IsometryKind;
using hypgeom::Matrix2;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

cplx cpow(cplx base, cplx e) { return std::exp(e * std::log(base)); }

void require_grid(const GridField& f) {
    if (f.nx < 3 || f.ny < 3) throw DomainError("grid too small for a 5-point stencil");
    if (f.values.size() != static_cast<std::size_t>(f.nx) * f.ny || f.valid.size() != f.values.size())
        throw DomainError("grid storage does not match its shape");
}

// Interior node whose 4 neighbours and itself are valid.
bool stencil_ok(const GridField& f, int i, int j) {
    return i > 0 && j > 0 && i < f.nx - 1 && j < f.ny - 1 && f.is_valid(i, j) && f.is_valid(i - 1, j) &&
           f.is_valid(i + 1, j) && f.is_valid(i, j - 1) && f.is_valid(i, j + 1);
}

GridField like(const GridField& f, int q) {
    GridField out = f;
    out.q = q;
    std::fill(out.values.begin(), out.values.end(), cplx{});
    std::fill(out.valid.begin(), out.valid.end(), std::uint8_t{0});
    return out;
}

int family_weight(const series::FamilyRequest& req) {
    switch (req.family) {
        case series::Family::Omega:
        case series::Family::EtaHat:
            return 1;
        case series::Family::WeightQ:
            return req.q;
        default:
            throw DomainError("no functional equation for family " + series::to_string(req.family));
    }
}

Matrix2 element_matrix(const FuchsianGroup& g, const Word& w) {
    if (w.empty()) throw DomainError("empty word");
    return g.word_matrix(group::reduce(w));
}

// Points along the geodesic from p to q, equally spaced in arclength; the last is q itself.
std::vector<cplx> geodesic_samples(cplx p, cplx q, int segments) {
    if (segments < 1) throw DomainError("a cycle needs at least one segment");
    const Geodesic geo = hypgeom::geodesic_through(p, q);
    const Matrix2 C = hypgeom::axis_conjugator(geo);
    const double t0 = std::log(std::abs(act(C.inverse(), p)));
    const double t1 = std::log(std::abs(act(C.inverse(), q)));
    std::vector<cplx> out;
    out.push_back(p);
    for (int k = 1; k < segments; ++k) {
        const double t = t0 + (t1 - t0) * k / segments;
        out.push_back(act(C, cplx{0.0, std::exp(t)}));
    }
    out.push_back(q);
    return out;
}

Cycle make_cycle(const FuchsianGroup& g, const Word& w, cplx base, CycleKind kind, int segments) {
    Cycle c;
    c.kind = kind;
    c.closer = {element_matrix(g, w), group::reduce(w)};
    const cplx end = act(c.closer.matrix, base);
    if (hypgeom::hyperbolic_distance(base, end) < 1e-9) throw DomainError("closing element fixes the base point");
    c.samples = geodesic_samples(base, end, segments);
    c.base_point = PointH::from(base);
    return c;
}

bool same_geodesic(const Geodesic& a, const Geodesic& b) {
    return hypgeom::near(a.from, b.from, 1e-9) && hypgeom::near(a.to, b.to, 1e-9);
}

bool same_unoriented(const Geodesic& a, const Geodesic& b) {
    return same_geodesic(a, b) || same_geodesic(a, b.reversed());
}

// Gauss-Legendre on [a, b] of a real function.
template <class F>
double gl_integral(F&& f, double a, double b, int n) {
    const auto& r = quad::gauss_legendre(n);
    const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
    double s = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) s += r.weights[k] * f(mid + half * r.nodes[k]);
    return s * half;
}

double packing_bound(double rho, double radius) {
    return (std::cosh(2.0 * radius + rho) - 1.0) / (std::cosh(rho) - 1.0);
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] < v[k - 1])) return false;
    return true;
}

}  // namespace

GridField GridField::sample(const std::function<cplx(const PointH&)>& f, double x0, double y0, double h, int nx,
                            int ny, int q) {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing must be positive");
    if (nx < 1 || ny < 1) throw DomainError("grid needs at least one node per axis");
    if (!(y0 > 0.0) || !std::isfinite(x0) || !std::isfinite(y0)) throw DomainError("grid must lie in y > 0");
    GridField out;
    out.x0 = x0;
    out.y0 = y0;
    out.h = h;
    out.nx = nx;
    out.ny = ny;
    out.q = q;
    out.values.resize(static_cast<std::size_t>(nx) * ny);
    out.valid.assign(out.values.size(), 1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const cplx v = f(PointH::make(out.x(i), out.y(j)));
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("non-finite field value");
            out.values[out.index(i, j)] = v;
        }
    return out;
}

GridField apply_weighted_laplacian(const GridField& f) {
    require_grid(f);
    GridField out = like(f, f.q);
    const double h2 = f.h * f.h;
    for (int j = 1; j < f.ny - 1; ++j)
        for (int i = 1; i < f.nx - 1; ++i) {
            if (!stencil_ok(f, i, j)) continue;
            const cplx c = f.at(i, j), e = f.at(i + 1, j), w = f.at(i - 1, j), n = f.at(i, j + 1),
                       s = f.at(i, j - 1);
            const double y = f.y(j);
            const cplx lap = (e + w + n + s - 4.0 * c) / h2;
            const cplx dx = (e - w) / (2.0 * f.h);
            out.values[out.index(i, j)] = y * y * lap - 2.0 * kI * double(f.q) * y * dx;
            out.valid[out.index(i, j)] = 1;
        }
    return out;
}

GridField apply_maass(const GridField& f, MaassDirection dir) {
    require_grid(f);
    const int sign = dir == MaassDirection::Raise ? 1 : -1;
    GridField out = like(f, f.q + sign);
    for (int j = 1; j < f.ny - 1; ++j)
        for (int i = 1; i < f.nx - 1; ++i) {
            if (!stencil_ok(f, i, j)) continue;
            const double y = f.y(j);
            const cplx dx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * f.h);
            const cplx dy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * f.h);
            out.values[out.index(i, j)] = double(sign) * kI * y * dx + y * dy + double(sign * f.q) * f.at(i, j);
            out.valid[out.index(i, j)] = 1;
        }
    return out;
}

TruncationPolicy matched_truncation(int shells) {
    TruncationPolicy p;
    p.fixed_depth = true;
    p.max_shells = shells;
    p.require_convergence = false;
    p.outer_explicit = 6;
    p.outer_quad = 4;
    p.inner_explicit = 4;
    p.inner_quad = 3;
    return p;
}

FEResidualReport functional_equation_residual(const FuchsianGroup& g, const series::FamilyRequest& req,
                                              const ResidualGrid& grid, const TruncationPolicy& pol, int threads) {
    const int q = family_weight(req);
    if (grid.n < 1) throw DomainError("residual grid needs at least one center");
    if (!(grid.h > 0.0) || !(grid.spacing >= 0.0)) throw DomainError("residual grid needs h > 0, spacing >= 0");
    if (!(grid.y0 - grid.h > 0.0)) throw DomainError("residual grid must stay in y > 0");

    std::vector<PointH> centers, stencil;
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            const double x = grid.x0 + i * grid.spacing, y = grid.y0 + j * grid.spacing;
            centers.push_back(PointH::make(x, y));
            for (auto [dx, dy] : {std::pair{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                stencil.push_back(PointH::make(x + dx * grid.h, y + dy * grid.h));
        }
    series::FamilyRequest shifted = req;
    shifted.s = req.s + 2.0;
    const auto at_s = series::evaluate_points(g, req, stencil, pol, threads);
    const auto at_s2 = series::evaluate_points(g, shifted, centers, pol, threads);

    const cplx s = req.s;
    FEResidualReport rep;
    rep.family = series::to_string(req.family);
    rep.s = s;
    rep.q = q;
    rep.gen = req.gen;
    rep.grid = grid;
    rep.truncation = pol;
    rep.worst = centers.front();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        GridField f;
        f.x0 = centers[c].x - grid.h;
        f.y0 = centers[c].y - grid.h;
        f.h = grid.h;
        f.nx = f.ny = 3;
        f.q = q;
        f.values.assign(9, cplx{});
        f.valid.assign(9, 0);
        const std::pair<int, int> slots[5] = {{1, 1}, {2, 1}, {0, 1}, {1, 2}, {1, 0}};
        for (int k = 0; k < 5; ++k) {
            const auto idx = f.index(slots[k].first, slots[k].second);
            f.values[idx] = at_s[5 * c + k].value.auto_lift;
            f.valid[idx] = 1;
        }
        const cplx lap = apply_weighted_laplacian(f).at(1, 1);
        const cplx w = f.at(1, 1), w2 = at_s2[c].value.auto_lift;
        cplx lhs, rhs;
        switch (req.family) {
            case series::Family::Omega:
                lhs = -lap + s * (s + 1.0) * w;
                rhs = s * (s + 1.0) * w2;
                break;
            case series::Family::EtaHat:
                lhs = -lap;
                rhs = s * (1.0 - s) * (w - w2);
                break;
            default:
                lhs = lap + s * (1.0 - s) * w;
                rhs = (s + double(q)) * (double(q) - s) * w2;
                break;
        }
        const double r = std::abs(lhs - rhs) / (std::abs(rhs) + 1e-12);
        if (r > rep.residual || c == 0) {
            rep.residual = r;
            rep.worst = centers[c];
        }
    }
    return rep;
}

FEOrderReport functional_equation_order(const FuchsianGroup& g, const series::FamilyRequest& req,
                                        const ResidualGrid& grid, const std::vector<double>& steps,
                                        const TruncationPolicy& pol, int threads) {
    if (steps.size() < 2) throw DomainError("order check needs at least two steps");
    FEOrderReport rep;
    for (double h : steps) {
        ResidualGrid gr = grid;
        gr.h = h;
        rep.runs.push_back(functional_equation_residual(g, req, gr, pol, threads));
    }
    for (std::size_t k = 1; k < rep.runs.size(); ++k)
        rep.ratios.push_back(rep.runs[k - 1].residual / rep.runs[k].residual);
    return rep;
}

Cycle Cycle::reversed() const {
    Cycle r = *this;
    std::reverse(r.samples.begin(), r.samples.end());
    r.closer.matrix = closer.matrix.inverse();
    r.closer.word.clear();
    for (auto it = closer.word.rbegin(); it != closer.word.rend(); ++it) r.closer.word.push_back(-*it);
    r.base_point = PointH::from(r.samples.front());
    return r;
}

Cycle geodesic_loop(const FuchsianGroup& g, const Word& w, int segments) {
    const Matrix2 M = element_matrix(g, w);
    if (hypgeom::translation_length(M).kind != IsometryKind::Hyperbolic)
        throw DomainError("geodesic loop needs a hyperbolic element");
    const Matrix2 C = hypgeom::axis_conjugator(hypgeom::axis(M));
    const cplx base = act(C, cplx{0.0, std::abs(act(C.inverse(), cplx{0.0, 1.0}))});
    return make_cycle(g, w, base, CycleKind::GeodesicLoop, segments);
}

Cycle deck_path(const FuchsianGroup& g, const Word& w, const PointH& base, int segments) {
    return make_cycle(g, w, base.z(), CycleKind::DeckPath, segments);
}

cplx integrate_form_along_cycle(const FormEvaluator& form, const Cycle& cycle, int n_quad) {
    if (cycle.samples.size() < 2) throw DomainError("cycle has no segments");
    if (n_quad < 1) throw DomainError("n_quad must be positive");
    const cplx first = act(cycle.closer.matrix, cycle.samples.front());
    if (std::abs(first - cycle.samples.back()) > 1e-8 * std::max(1.0, std::abs(first)))
        throw DomainError("cycle closer does not map the first sample to the last");
    const auto& rule = quad::gauss_legendre(n_quad);
    cplx total{};
    for (std::size_t k = 0; k + 1 < cycle.samples.size(); ++k) {
        const cplx z0 = cycle.samples[k], z1 = cycle.samples[k + 1];
        if (z0 == z1) continue;
        const Matrix2 C = hypgeom::axis_conjugator(hypgeom::geodesic_through(z0, z1));
        const double t0 = std::log(std::abs(act(C.inverse(), z0)));
        const double t1 = std::log(std::abs(act(C.inverse(), z1)));
        const double half = 0.5 * (t1 - t0), mid = 0.5 * (t1 + t0);
        cplx seg{};
        for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
            const cplx w{0.0, std::exp(mid + half * rule.nodes[n])};
            const cplx z = act(C, w);
            const cplx dz = hypgeom::derivative(C, w) * w;  // d/dt of C(i e^t)
            const FormValue v = form(PointH::from(z));
            seg += rule.weights[n] * (v.dz_coeff * dz + v.dzbar_coeff * std::conj(dz));
        }
        total += seg * half;
    }
    return total;
}

int intersection_number(const FuchsianGroup& g, const Cycle& a, const Cycle& b, int max_word_len) {
    const Matrix2 A = a.closer.matrix, B = b.closer.matrix;
    const auto lb = hypgeom::translation_length(B);
    if (hypgeom::translation_length(A).kind != IsometryKind::Hyperbolic || lb.kind != IsometryKind::Hyperbolic)
        throw DomainError("intersection numbers need hyperbolic closing elements");
    const Geodesic axis_a = hypgeom::axis(A), axis_b = hypgeom::axis(B);
    const Matrix2 Cbi = hypgeom::axis_conjugator(axis_b).inverse();
    // one period [o, o + l) of b's axis in log-height, offset off any symmetric position
    const double o = -0.3719 * lb.length;
    std::vector<Geodesic> seen;
    int count = 0;
    for (const auto& d : group::enumerate_elements(g, max_word_len, std::max(max_word_len, group::kDefaultWordCap))) {
        const Geodesic lift = hypgeom::mobius_apply(d.matrix, axis_a);
        if (same_unoriented(lift, axis_b)) continue;
        const auto x = hypgeom::geodesic_crossing(axis_b, lift);
        if (!x) continue;
        const double t = std::log(std::abs(act(Cbi, *x)));
        if (t < o || t >= o + lb.length) continue;
        if (std::any_of(seen.begin(), seen.end(), [&](const Geodesic& s) { return same_geodesic(s, lift); }))
            continue;
        seen.push_back(lift);
        const double sin_angle =
            (std::conj(hypgeom::geodesic_tangent(lift, *x)) * hypgeom::geodesic_tangent(axis_b, *x)).imag();
        if (std::abs(sin_angle) < 1e-3) throw DomainError("non-transverse crossing");
        count += sin_angle > 0 ? 1 : -1;
    }
    return count;
}

DualityReport duality_check(const FuchsianGroup& g, int c_gen, const Cycle& cycle, cplx s,
                            const TruncationPolicy& pol, int n_quad) {
    if (c_gen < 0 || c_gen >= g.rank()) throw DomainError("generator index out of range");
    DualityReport rep;
    rep.c_gen = c_gen;
    rep.s = s;
    rep.intersection = intersection_number(g, geodesic_loop(g, {c_gen + 1}), cycle);
    rep.integral = integrate_form_along_cycle(
        [&](const PointH& z) { return series::hyperbolic_eisenstein(g, c_gen, s, z, pol).value; }, cycle, n_quad);
    rep.deviation = std::abs(std::abs(rep.integral) - std::abs(double(rep.intersection)));
    return rep;
}

double cyclic_l2_mass(double l, cplx s, double r) {
    const double sigma = s.real();
    const double k2 = std::norm(specfun::k_factor(s));
    double total = 0.0;
    const int panels = std::max(1, static_cast<int>(std::ceil(r / 0.5)));
    for (int p = 0; p < panels; ++p)
        total += gl_integral([&](double x) { return std::pow(std::cosh(x), -2.0 * sigma - 1.0); }, r * p / panels,
                             r * (p + 1) / panels, 20);
    return l * 2.0 * total / k2;
}

L2Report l2_norm_estimate(const FormEvaluator& form, const FuchsianGroup& g, int c_gen,
                          const std::vector<double>& cuts, const L2Options& opt, std::optional<cplx> omega_s) {
    if (cuts.empty()) throw DomainError("empty funnel cut grid");
    for (std::size_t k = 0; k < cuts.size(); ++k)
        if (!(cuts[k] > 0.0) || (k > 0 && !(cuts[k] > cuts[k - 1])))
            throw DomainError("funnel cuts must be positive and increasing");
    const Matrix2 C = group::axis_normalizer(g, c_gen);
    const FuchsianGroup gn = g.conjugated(C);
    const double l = gn.generator(c_gen).type.length;
    // the strip |x1| <= l/2 replaces c's own ping-pong pair
    std::vector<group::PingPongPair> domains = gn.certificate().domains;
    if (domains.size() != static_cast<std::size_t>(g.rank()))
        throw DomainError("L2 estimate needs a ping-pong certificate");
    domains[c_gen] = group::ping_pong_pair(gn.generator(c_gen).matrix);
    if (!group::validate_certificate(gn.generators(), domains).empty())
        throw DomainError("no ping-pong domain adapted to the geodesic");
    auto inside = [&](cplx z) {
        for (const auto& d : domains)
            if (d.repel.contains(z) || d.attract.contains(z)) return false;
        return true;
    };
    std::vector<GroupElement> elements;
    for (auto& e : group::enumerate_elements(gn, opt.multiplicity_word_len,
                                             std::max(opt.multiplicity_word_len, group::kDefaultWordCap)))
        if (!e.word.empty()) elements.push_back(std::move(e));

    L2Report rep;
    rep.cuts = cuts;
    const auto& r1 = quad::gauss_legendre(opt.n_x1);
    const auto& r2 = quad::gauss_legendre(opt.n_x2);
    auto strip_mass = [&](double a, double b) {
        double m = 0.0;
        for (std::size_t i = 0; i < r1.nodes.size(); ++i) {
            const double x1 = 0.5 * l * r1.nodes[i], w1 = 0.5 * l * r1.weights[i];
            for (double sgn : {1.0, -1.0})
                for (std::size_t j = 0; j < r2.nodes.size(); ++j) {
                    const double x2 = sgn * (0.5 * (a + b) + 0.5 * (b - a) * r2.nodes[j]);
                    const double w2 = 0.5 * (b - a) * r2.weights[j];
                    const PointH zn = hypgeom::from_fermi({x1, x2});
                    ++rep.samples;
                    if (!inside(zn.z())) continue;
                    double rho = std::numeric_limits<double>::infinity();
                    long n_close = 1;
                    for (const auto& e : elements) {
                        const double d = hypgeom::hyperbolic_distance(zn.z(), act(e.matrix, zn.z()));
                        rho = std::min(rho, 0.5 * d);
                        if (d < 2.0 * opt.multiplicity_radius) ++n_close;
                    }
                    if (std::isfinite(rho)) {
                        const double ratio = n_close / packing_bound(rho, opt.multiplicity_radius);
                        rep.multiplicity_ratio = std::max(rep.multiplicity_ratio, ratio);
                    }
                    rep.multiplicity_max = std::max(rep.multiplicity_max, n_close);
                    const PointH z = PointH::from(act(C, zn.z()));
                    const FormValue v = form(z);
                    const double norm2 = 2.0 * z.y * z.y * (std::norm(v.dz_coeff) + std::norm(v.dzbar_coeff));
                    m += w1 * w2 * norm2 * std::cosh(x2);
                }
        }
        return m;
    };
    double acc = 0.0, prev = 0.0;
    for (double cut : cuts) {
        const int panels = std::max(1, static_cast<int>(std::ceil((cut - prev) / opt.panel - 1e-12)));
        for (int p = 0; p < panels; ++p)
            acc += strip_mass(prev + (cut - prev) * p / panels, prev + (cut - prev) * (p + 1) / panels);
        rep.mass.push_back(acc);
        prev = cut;
    }
    for (std::size_t k = 1; k < rep.mass.size(); ++k) rep.increments.push_back(rep.mass[k] - rep.mass[k - 1]);
    rep.geometric_decrease = rep.increments.size() >= 2 && strictly_decreasing(rep.increments);
    rep.multiplicity_ok = rep.multiplicity_ratio <= 1.0;
    if (omega_s && g.rank() == 1) {
        const double sigma = omega_s->real();
        rep.closed_form = cyclic_l2_mass(l, *omega_s, cuts.back());
        rep.closed_bound = std::sqrt(kPi) * std::tgamma(sigma / 2.0) / std::tgamma(0.5 + sigma / 2.0) *
                          (std::exp(l) - 1.0);
    }
    return rep;
}

DegeneratingFamily elementary_family() {
    DegeneratingFamily f;
    f.name = "elementary";
    f.group_at = [](double l) { return group::build_preset("cyclic_hyperbolic", {l}); };
    f.pinched_gen = 0;
    f.limit = group::build_preset("cyclic_parabolic", {});
    f.limit_cusp_gen = 0;
    return f;
}

double abstract_prefactor_deviation(cplx s) {
    const cplx pre = specfun::complex_gamma(1.0 + s / 2.0) /
                     (specfun::complex_gamma(0.5) * specfun::complex_gamma(0.5 + s / 2.0));
    return std::abs(pre - 1.0 / specfun::k_factor(s));
}

DegenerationReport degeneration_diagnostic(const DegeneratingFamily& fam, int q, cplx s,
                                           const std::vector<double>& l_grid, const DegenerationGrid& grid,
                                           const TruncationPolicy& pol) {
    if (q < 0) throw DomainError("weight q must be non-negative");
    if (!(s.real() > 1.0)) throw DomainError("degeneration diagnostic needs Re s > 1");
    if (l_grid.empty()) throw DomainError("empty l grid");
    for (std::size_t k = 0; k < l_grid.size(); ++k)
        if (!(l_grid[k] > 0.0) || (k > 0 && !(l_grid[k] < l_grid[k - 1])))
            throw DomainError("l grid must be positive and strictly decreasing");
    if (grid.nu < 1 || grid.nv < 1 || !(grid.v0 > 0.0) || !(grid.v1 >= grid.v0) || !(grid.u1 >= grid.u0))
        throw DomainError("invalid compact grid");
    if (!(l_grid.front() * grid.v1 < kPi)) throw DomainError("compact grid leaves the collar: need l v < pi");

    const bool elementary = fam.name == "elementary";
    DegenerationReport rep;
    rep.family = fam.name;
    rep.q = q;
    rep.s = s;
    rep.l_grid = l_grid;
    rep.assertive = elementary;
    rep.prefactor_deviation = abstract_prefactor_deviation(s);

    std::vector<cplx> ws;
    for (int j = 0; j < grid.nv; ++j)
        for (int i = 0; i < grid.nu; ++i) {
            const double u = grid.nu == 1 ? grid.u0 : grid.u0 + (grid.u1 - grid.u0) * i / (grid.nu - 1);
            const double v = grid.nv == 1 ? grid.v0 : grid.v0 + (grid.v1 - grid.v0) * j / (grid.nv - 1);
            ws.push_back({u, v});
        }
    const FuchsianGroup limit = fam.limit.conjugated(group::cusp_of(fam.limit, fam.limit_cusp_gen).scaling);
    std::vector<cplx> E;
    for (cplx w : ws)
        E.push_back(series::parabolic_eisenstein(limit, fam.limit_cusp_gen, q, s, PointH::from(w), pol).value.auto_lift);

    const cplx ks = specfun::k_factor(s);
    for (double l : l_grid) {
        const FuchsianGroup gl = fam.group_at(l);
        const Matrix2 C = group::axis_normalizer(gl, fam.pinched_gen);
        double sup = 0.0, sup_cf = 0.0;
        for (std::size_t k = 0; k < ws.size(); ++k) {
            const cplx w = ws[k];
            const double v = w.imag();
            const cplx zeta = std::exp(l * w);
            const PointH z = PointH::from(act(C, zeta));
            const cplx a = series::weight_q_series(gl, fam.pinched_gen, q, s, z, pol).A.value.dz_coeff;
            const cplx dzdw = hypgeom::derivative(C, zeta) * l * zeta;
            const cplx scaled = a * std::pow(dzdw, q) * std::pow(v, q) * std::exp(-s * std::log(l));
            sup = std::max(sup, std::abs(scaled - E[k]));
            if (elementary) {
                const cplx cf = std::pow(v, q) * cpow(std::sin(l * v) / l, s - double(q));
                sup_cf = std::max(sup_cf, std::abs(cf - cpow(v, s)));
                rep.series_vs_closed_form = std::max(rep.series_vs_closed_form, std::abs(scaled - cf));
            }
            const cplx om = series::hyperbolic_eisenstein(gl, fam.pinched_gen, s, z, pol).value.dz_coeff;
            const cplx al = series::alpha_series(gl, fam.pinched_gen, s + 1.0, z, pol).value.dz_coeff;
            rep.omega_alpha_deviation = std::max(rep.omega_alpha_deviation, std::abs(om - al / ks) / std::abs(om));
        }
        rep.sup_error.push_back(sup);
        if (elementary) rep.closed_form_error.push_back(sup_cf);
    }
    rep.monotone = strictly_decreasing(rep.sup_error);
    return rep;
}

std::vector<CollarPair> collar_separation_pairs(const FuchsianGroup& g) {
    std::vector<CollarPair> out;
    for (int i = 0; i < g.rank(); ++i) {
        const auto& gi = g.generator(i);
        if (gi.type.kind != IsometryKind::Hyperbolic) continue;
        const Geodesic ax = hypgeom::axis(gi.matrix);
        for (int j = 0; j < g.rank(); ++j) {
            if (j == i) continue;
            for (int sgn : {1, -1}) {
                const int letter = sgn * (j + 1);
                CollarPair p;
                std::ostringstream os;
                os << g.preset().name << ": axis g" << i << " vs g" << j << (sgn > 0 ? "" : "^-1") << "(axis g" << i
                   << ")";
                p.label = os.str();
                p.length = gi.type.length;
                p.bound = 1.0 / std::tanh(p.length / 2.0);
                const auto sep = hypgeom::geodesic_separation(ax, hypgeom::mobius_apply(g.letter(letter), ax));
                p.cosh_distance = sep ? std::cosh(*sep) : 1.0;
                p.holds = sep.has_value() && p.cosh_distance >= p.bound;
                out.push_back(p);
            }
        }
    }
    // rank two: conjugates of the boundary geodesic of the commutator against each generator axis
    if (g.rank() == 2) {
        const Matrix2 A = g.generator(0).matrix, B = g.generator(1).matrix;
        const Matrix2 comm = A * B * A.inverse() * B.inverse();
        if (hypgeom::translation_length(comm).kind == IsometryKind::Hyperbolic) {
            for (int i = 0; i < 2; ++i) {
                const auto& gi = g.generator(i);
                if (gi.type.kind != IsometryKind::Hyperbolic) continue;
                const Geodesic ax = hypgeom::axis(gi.matrix);
                for (const auto& e : group::enumerate_elements(g, 1)) {
                    CollarPair p;
                    std::ostringstream os;
                    os << g.preset().name << ": axis g" << i << " vs conjugate of [g0, g1] by word of length "
                       << e.word.size() << (e.word.empty() ? "" : " starting " + std::to_string(e.word.front()));
                    p.label = os.str();
                    p.length = gi.type.length;
                    p.bound = 1.0 / std::tanh(p.length / 2.0);
                    const auto sep = hypgeom::geodesic_separation(ax, hypgeom::axis(e.matrix * comm * e.matrix.inverse()));
                    p.cosh_distance = sep ? std::cosh(*sep) : 1.0;
                    p.holds = sep.has_value() && p.cosh_distance >= p.bound;
                    out.push_back(p);
                }
            }
        }
    }
    return out;
}

namespace {

nlohmann::ordered_json cj(cplx v) { return nlohmann::ordered_json::array({v.real(), v.imag()}); }

}  // namespace

nlohmann::ordered_json to_json(const TruncationPolicy& p) {
    nlohmann::ordered_json j;
    j["mode"] = p.mode == group::ShellMode::Syllables ? "syllables" : "letters";
    j["max_shells"] = p.max_shells;
    j["abs_tol"] = p.abs_tol;
    j["rel_tol"] = p.rel_tol;
    j["fixed_depth"] = p.fixed_depth;
    j["prune_rel"] = p.prune_rel;
    j["max_terms"] = p.max_terms;
    j["outer_explicit"] = p.outer_explicit;
    j["outer_quad"] = p.outer_quad;
    j["inner_explicit"] = p.inner_explicit;
    j["inner_quad"] = p.inner_quad;
    j["check_region"] = p.check_region;
    if (p.delta_hint) j["delta_hint"] = *p.delta_hint;
    j["require_convergence"] = p.require_convergence;
    return j;
}

nlohmann::ordered_json to_json(const FEResidualReport& r) {
    nlohmann::ordered_json j;
    j["family"] = r.family;
    j["s"] = cj(r.s);
    j["q"] = r.q;
    j["gen"] = r.gen;
    j["grid"] = {{"x0", r.grid.x0}, {"y0", r.grid.y0}, {"spacing", r.grid.spacing}, {"n", r.grid.n}, {"h", r.grid.h}};
    j["residual"] = r.residual;
    j["worst_point"] = {r.worst.x, r.worst.y};
    j["truncation"] = to_json(r.truncation);
    return j;
}

nlohmann::ordered_json to_json(const FEOrderReport& r) {
    nlohmann::ordered_json j;
    auto& runs = j["runs"] = nlohmann::ordered_json::array();
    for (const auto& x : r.runs) runs.push_back(to_json(x));
    j["ratios"] = r.ratios;
    return j;
}

nlohmann::ordered_json to_json(const DualityReport& r) {
    nlohmann::ordered_json j;
    j["c_gen"] = r.c_gen;
    j["s"] = cj(r.s);
    j["integral"] = cj(r.integral);
    j["intersection"] = r.intersection;
    j["deviation"] = r.deviation;
    return j;
}

nlohmann::ordered_json to_json(const L2Report& r) {
    nlohmann::ordered_json j;
    j["cuts"] = r.cuts;
    j["mass"] = r.mass;
    j["increments"] = r.increments;
    j["geometric_decrease"] = r.geometric_decrease;
    if (r.closed_form) j["closed_form"] = *r.closed_form;
    if (r.closed_bound) j["bound"] = *r.closed_bound;
    j["samples"] = r.samples;
    j["multiplicity"] = {{"max_count", r.multiplicity_max},
                         {"max_ratio_to_packing_bound", r.multiplicity_ratio},
                         {"ok", r.multiplicity_ok}};
    return j;
}

nlohmann::ordered_json to_json(const DegenerationReport& r) {
    nlohmann::ordered_json j;
    j["family"] = r.family;
    j["q"] = r.q;
    j["s"] = cj(r.s);
    j["l_grid"] = r.l_grid;
    j["sup_error"] = r.sup_error;
    if (!r.closed_form_error.empty()) j["closed_form_error"] = r.closed_form_error;
    j["series_vs_closed_form"] = r.series_vs_closed_form;
    j["monotone"] = r.monotone;
    j["assertive"] = r.assertive;
    j["prefactor_deviation"] = r.prefactor_deviation;
    j["omega_alpha_deviation"] = r.omega_alpha_deviation;
    return j;
}

nlohmann::ordered_json to_json(const CollarPair& r) {
    nlohmann::ordered_json j;
    j["label"] = r.label;
    j["length"] = r.length;
    j["cosh_distance"] = r.cosh_distance;
    j["coth_half_length"] = r.bound;
    j["holds"] = r.holds;
    return j;
}

}  // namespace hypereis::analysis
