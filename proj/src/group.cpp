#include "hypereis/group.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "hypereis/errors.hpp"

namespace hypereis::group {

using hypgeom::Geodesic;
using hypgeom::IsometryKind;

namespace {

HalfSpace disc_interior(double center, double radius) {
    return {{BoundaryPoint::real(center + radius), BoundaryPoint::real(center - radius)}, true};
}

HalfSpace disc_exterior(double center, double radius) {
    return {{BoundaryPoint::real(center - radius), BoundaryPoint::real(center + radius)}, true};
}

HalfSpace right_of(double x0) { return {{BoundaryPoint::real(x0), BoundaryPoint::infinity()}, false}; }
HalfSpace left_of(double x0) { return {{BoundaryPoint::real(x0), BoundaryPoint::infinity()}, true}; }

// Points along a boundary geodesic, including ones close to its ends.
std::vector<cplx> boundary_samples(const Geodesic& geo, int n = 97) {
    const Matrix2 C = hypgeom::axis_conjugator(geo);
    std::vector<cplx> pts;
    pts.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = -8.0 + 16.0 * k / (n - 1);
        pts.push_back(hypgeom::act(C, cplx{0.0, std::exp(t)}));
    }
    return pts;
}

// A point on the outer side of h's boundary.
cplx outside_point(const HalfSpace& h) {
    const Matrix2 C = hypgeom::axis_conjugator(h.boundary);
    const cplx w = h.left ? cplx{1.0, 1.0} : cplx{-1.0, 1.0};
    return hypgeom::act(C, w);
}

bool strictly_inside(const HalfSpace& h, cplx z) {
    if (!h.contains(z)) return false;
    const cplx w = hypgeom::act(hypgeom::axis_conjugator(h.boundary).inverse(), z);
    return std::abs(w.real()) > 1e-9 * w.imag();
}

}  // namespace

PingPongPair ping_pong_pair(const Matrix2& gin) {
    const Matrix2 g = gin.normalized();
    const auto type = hypgeom::translation_length(g);
    if (type.kind == IsometryKind::Elliptic) throw DomainError("elliptic generator");
    const double scale = g.max_abs();
    if (std::abs(g.c) > 1e-14 * scale) {
        // isometric circles |cz + d| = 1 and |cz - a| = 1
        const double r = 1.0 / std::abs(g.c);
        return {disc_interior(-g.d / g.c, r), disc_interior(g.a / g.c, r)};
    }
    if (type.kind == IsometryKind::Parabolic) {
        // z -> z + b/d with d = +-1
        const double shift = g.b / g.d;
        const double h = std::abs(shift) / 2.0;
        if (shift > 0) return {left_of(-h), right_of(h)};
        return {right_of(h), left_of(-h)};
    }
    // z -> mu (z - p) + p
    const double mu = g.a / g.d;
    const double p = g.b / (g.d - g.a);
    const double sq = std::sqrt(mu);
    if (mu > 1.0) return {disc_interior(p, 1.0 / sq), disc_exterior(p, sq)};
    return {disc_exterior(p, 1.0 / sq), disc_interior(p, sq)};
}

std::vector<std::string> validate_certificate(const std::vector<Generator>& gens,
                                              const std::vector<PingPongPair>& domains) {
    std::vector<std::string> issues;
    std::vector<HalfSpace> all;
    for (const auto& d : domains) {
        all.push_back(d.repel);
        all.push_back(d.attract);
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto samples = boundary_samples(all[i].boundary);
        for (std::size_t j = 0; j < all.size(); ++j) {
            if (i == j) continue;
            for (const cplx z : samples) {
                if (strictly_inside(all[j], z)) {
                    std::ostringstream os;
                    os << "ping-pong domains " << i << " and " << j << " overlap";
                    issues.push_back(os.str());
                    break;
                }
            }
        }
    }
    for (std::size_t k = 0; k < gens.size(); ++k) {
        const Matrix2& g = gens[k].matrix;
        const auto& d = domains[k];
        for (const cplx z : boundary_samples(d.repel.boundary, 33)) {
            const cplx w = hypgeom::act(g, z);
            if (hypgeom::distance_to_geodesic(w, d.attract.boundary) > 1e-7) {
                issues.push_back("generator " + std::to_string(k) + " does not pair its domains");
                break;
            }
        }
        if (!d.attract.contains(hypgeom::act(g, outside_point(d.repel))))
            issues.push_back("generator " + std::to_string(k) + " maps outside its target domain");
    }
    return issues;
}

FuchsianGroup FuchsianGroup::from_matrices(const std::vector<Matrix2>& mats, bool user_asserts, PresetInfo info) {
    if (mats.empty()) throw DomainError("a group needs at least one generator");
    FuchsianGroup grp;
    grp.info_ = std::move(info);
    for (const auto& m0 : mats) {
        hypgeom::check_unimodular(m0);
        const Matrix2 m = m0.normalized();
        const auto type = hypgeom::translation_length(m);
        if (type.kind == IsometryKind::Elliptic) throw DomainError("elliptic generator");
        grp.gens_.push_back({m, type});
    }
    for (const auto& gen : grp.gens_) grp.cert_.domains.push_back(ping_pong_pair(gen.matrix));
    grp.cert_.diagnostics = validate_certificate(grp.gens_, grp.cert_.domains);
    grp.cert_.validated = grp.cert_.diagnostics.empty();
    grp.cert_.user_asserted = user_asserts;
    if (!grp.cert_.validated && !user_asserts)
        throw DomainError("discreteness validation failed: " + grp.cert_.diagnostics.front());
    return grp;
}

FuchsianGroup FuchsianGroup::trivial() {
    FuchsianGroup grp;
    grp.info_ = {"trivial", {}};
    grp.cert_.validated = true;
    return grp;
}

FuchsianGroup build_preset(const std::string& name, const std::vector<double>& p) {
    auto need = [&](std::size_t n) {
        if (p.size() != n)
            throw DomainError("preset " + name + " takes " + std::to_string(n) + " parameter(s)");
        for (double v : p)
            if (!std::isfinite(v)) throw DomainError("non-finite preset parameter");
    };
    std::vector<Matrix2> gens;
    if (name == "cyclic_hyperbolic") {
        need(1);
        if (!(p[0] > 0)) throw DomainError("cyclic_hyperbolic needs l > 0");
        gens.push_back({std::exp(p[0] / 2), 0.0, 0.0, std::exp(-p[0] / 2)});
    } else if (name == "cyclic_parabolic") {
        need(0);
        gens.push_back({1.0, 1.0, 0.0, 1.0});
    } else if (name == "schottky_torus") {
        need(2);
        if (!(p[0] > 0) || !(p[1] > 0)) throw DomainError("schottky_torus needs t, m > 0");
        gens.push_back({std::exp(p[0] / 2), 0.0, 0.0, std::exp(-p[0] / 2)});
        const double ch = std::cosh(p[1] / 2), sh = std::sinh(p[1] / 2);
        gens.push_back({ch, sh, sh, ch});
    } else if (name == "parabolic_pair") {
        need(1);
        if (!(p[0] > 2)) throw DomainError("parabolic_pair needs lambda > 2");
        gens.push_back({1.0, p[0], 0.0, 1.0});
        gens.push_back({1.0, 0.0, p[0], 1.0});
    } else {
        throw DomainError("unknown preset '" + name + "'");
    }
    return FuchsianGroup::from_matrices(gens, false, {name, p});
}

Matrix2 FuchsianGroup::letter(int l) const {
    const int i = std::abs(l) - 1;
    if (l == 0 || i >= rank()) throw DomainError("letter out of range");
    return l > 0 ? gens_[i].matrix : gens_[i].matrix.inverse();
}

Matrix2 FuchsianGroup::word_matrix(const Word& w) const {
    Matrix2 m;
    for (int l : w) m = m * letter(l);
    return m;
}

FuchsianGroup FuchsianGroup::conjugated(const Matrix2& C) const {
    hypgeom::check_unimodular(C);
    const Matrix2 Ci = C.inverse();
    FuchsianGroup out = *this;
    for (auto& gen : out.gens_) gen.matrix = Ci * gen.matrix * C;
    for (auto& d : out.cert_.domains) {
        d.repel = hypgeom::mobius_apply(Ci, d.repel);
        d.attract = hypgeom::mobius_apply(Ci, d.attract);
    }
    return out;
}

bool FuchsianGroup::in_fundamental_domain(cplx z) const {
    if (!cert_.validated) return false;
    for (const auto& d : cert_.domains)
        if (d.repel.contains(z) || d.attract.contains(z)) return false;
    return true;
}

std::optional<int> FuchsianGroup::parabolic_generator_fixing(const BoundaryPoint& p) const {
    for (int i = 0; i < rank(); ++i) {
        if (gens_[i].type.kind != IsometryKind::Parabolic) continue;
        if (hypgeom::near(hypgeom::parabolic_fixed_point(gens_[i].matrix), p, 1e-9)) return i;
    }
    return std::nullopt;
}

Word reduce(const Word& w) {
    Word out;
    for (int l : w) {
        if (!out.empty() && out.back() == -l)
            out.pop_back();
        else
            out.push_back(l);
    }
    return out;
}

Word canonical_coset_word(const Word& w, int stabilizer_gen) {
    Word r = reduce(w);
    const int s = stabilizer_gen + 1;
    std::size_t k = 0;
    while (k < r.size() && std::abs(r[k]) == s) ++k;
    return Word(r.begin() + static_cast<long>(k), r.end());
}

namespace {

void enumerate(const FuchsianGroup& g, int max_len, std::optional<int> skip_first,
               std::vector<GroupElement>& out) {
    out.push_back({Matrix2::identity(), {}});
    std::size_t begin = 0;
    for (int len = 1; len <= max_len; ++len) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i) {
            for (int gi = 0; gi < g.rank(); ++gi) {
                for (int sgn : {1, -1}) {
                    const int l = sgn * (gi + 1);
                    const auto& parent = out[i];
                    if (!parent.word.empty() && parent.word.back() == -l) continue;
                    if (parent.word.empty() && skip_first && gi == *skip_first) continue;
                    GroupElement e{parent.matrix * g.letter(l), parent.word};
                    e.word.push_back(l);
                    out.push_back(std::move(e));
                }
            }
        }
        begin = end;
    }
}

}  // namespace

std::vector<GroupElement> enumerate_elements(const FuchsianGroup& g, int max_word_len, int cap) {
    if (max_word_len < 0) throw DomainError("negative word length");
    if (max_word_len > cap) throw DomainError("word length exceeds the enumeration cap");
    std::vector<GroupElement> out;
    enumerate(g, max_word_len, std::nullopt, out);
    return out;
}

std::vector<GroupElement> coset_representatives(const FuchsianGroup& g, int stabilizer_gen, int max_word_len,
                                                int cap) {
    if (stabilizer_gen < 0 || stabilizer_gen >= g.rank()) throw DomainError("stabilizer generator out of range");
    if (max_word_len < 0) throw DomainError("negative word length");
    if (max_word_len > cap) throw DomainError("word length exceeds the enumeration cap");
    std::vector<GroupElement> out;
    enumerate(g, max_word_len, stabilizer_gen, out);
    return out;
}

FreenessReport freeness_spot_check(const FuchsianGroup& g, int len, double tol) {
    auto els = enumerate_elements(g, len, std::max(len, kDefaultWordCap));
    std::vector<Matrix2> ms;
    ms.reserve(els.size());
    for (const auto& e : els) ms.push_back(e.matrix.normalized());
    std::sort(ms.begin(), ms.end(), [](const Matrix2& x, const Matrix2& y) {
        if (x.a != y.a) return x.a < y.a;
        return x.c < y.c;
    });
    FreenessReport rep;
    rep.elements = ms.size();
    // pairs are only compared inside a window of width 1e-3 in the a entry
    constexpr double window = 1e-3;
    rep.min_separation = window;
    auto dist = [](const Matrix2& x, const Matrix2& y) {
        return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c), std::abs(x.d - y.d)});
    };
    // sign-fixed matrices with a == 0 may still differ by sign in (b, c, d); handled by same_element
    for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t j = i + 1; j < ms.size() && ms[j].a - ms[i].a <= window; ++j) {
            double d = dist(ms[i], ms[j]);
            const Matrix2 neg{-ms[j].a, -ms[j].b, -ms[j].c, -ms[j].d};
            d = std::min(d, dist(ms[i], neg));
            rep.min_separation = std::min(rep.min_separation, d);
        }
    }
    rep.distinct = rep.min_separation > tol;
    return rep;
}

namespace {

// Region {x beyond x0, 0 < y <= H} in the frame of a parabolic generator.
struct CuspClip {
    bool active = false;
    Matrix2 frame_inv;
    double x0 = 0.0;
    bool right = true;
    double H = 0.0;

    double distance(cplx w) const {
        const double x = w.real(), y = w.imag();
        const double dx = right ? x0 - x : x - x0;
        if (dx <= 0.0) return y <= H ? 0.0 : std::log(y / H);
        const double t = std::min(std::hypot(dx, y), H);
        return std::acosh(1.0 + (dx * dx + (t - y) * (t - y)) / (2.0 * y * t));
    }
};

// Clip data per signed letter (index 2i for +, 2i+1 for -).
std::vector<CuspClip> cusp_clips(const FuchsianGroup& g, cplx z0) {
    std::vector<CuspClip> out(2 * g.rank());
    for (int i = 0; i < g.rank(); ++i) {
        if (g.generator(i).type.kind != IsometryKind::Parabolic) continue;
        const Matrix2 Si = cusp_of(g, i).scaling.inverse();
        double H = hypgeom::act(Si, z0).imag();
        bool bounded = true;
        for (int j = 0; j < g.rank() && bounded; ++j) {
            if (j == i) continue;
            for (const HalfSpace* h : {&g.certificate().domains[j].repel, &g.certificate().domains[j].attract}) {
                const HalfSpace f = hypgeom::mobius_apply(Si, *h);
                if (f.boundary.from.at_infinity || f.boundary.to.at_infinity) {
                    bounded = false;
                    break;
                }
                const double c = 0.5 * (f.boundary.from.x + f.boundary.to.x);
                const double r = 0.5 * std::abs(f.boundary.from.x - f.boundary.to.x);
                if (f.contains(cplx{c, 2.0 * r})) {
                    bounded = false;
                    break;
                }
                H = std::max(H, r);
            }
        }
        if (!bounded) continue;
        const auto& dom = g.certificate().domains[i];
        for (int k = 0; k < 2; ++k) {
            const HalfSpace f = hypgeom::mobius_apply(Si, k == 0 ? dom.attract : dom.repel);
            const BoundaryPoint& fin = f.boundary.from.at_infinity ? f.boundary.to : f.boundary.from;
            CuspClip& c = out[2 * i + k];
            c.active = true;
            c.frame_inv = Si;
            c.x0 = fin.x;
            c.right = f.contains(cplx{fin.x + 1.0, 1.0});
            c.H = H;
        }
    }
    return out;
}

}  // namespace

std::vector<OrbitalCount> orbital_counts(const FuchsianGroup& g, const PointH& z0,
                                         const std::vector<double>& radii, int max_word_len) {
    if (radii.empty()) return {};
    const auto slack = [](double R) { return R + 1e-9 * std::max(1.0, R); };
    const double Rmax = slack(*std::max_element(radii.begin(), radii.end()));
    const cplx z = z0.z();
    const bool prune = g.in_fundamental_domain(z);
    std::vector<double> dists{0.0};
    // lower bound on the displacement of every element left unexplored
    double unexplored = std::numeric_limits<double>::infinity();

    const auto clips = prune ? cusp_clips(g, z) : std::vector<CuspClip>{};
    // every extension of m * l maps z0 into m(attract(l)); for parabolic letters the
    // image also stays below a horocycle in the cusp frame
    auto target_distance = [&](const Matrix2& m, int l) {
        const int gi = std::abs(l) - 1;
        const auto& dom = g.certificate().domains[gi];
        const double half = hypgeom::mobius_apply(m, l > 0 ? dom.attract : dom.repel).distance(z);
        const CuspClip& c = clips.empty() ? CuspClip{} : clips[2 * gi + (l > 0 ? 0 : 1)];
        if (!c.active) return half;
        const cplx w = hypgeom::act(c.frame_inv * m.inverse(), z);
        return std::max(half, c.distance(w));
    };
    auto extension_bound = [&](const Matrix2& m, int last) {
        double b = std::numeric_limits<double>::infinity();
        for (int gi = 0; gi < g.rank(); ++gi)
            for (int sgn : {1, -1})
                if (sgn * (gi + 1) != -last) b = std::min(b, target_distance(m, sgn * (gi + 1)));
        return b;
    };

    struct Frame {
        Matrix2 m;
        int last;
        int depth;
    };
    std::vector<Frame> stack{{Matrix2::identity(), 0, 0}};
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        for (int gi = 0; gi < g.rank(); ++gi) {
            for (int sgn : {1, -1}) {
                const int l = sgn * (gi + 1);
                if (f.last == -l) continue;
                if (prune && target_distance(f.m, l) > Rmax) continue;
                const Matrix2 m = f.m * g.letter(l);
                const double d = hypgeom::hyperbolic_distance(hypgeom::act(m, z), z);
                if (d <= Rmax) dists.push_back(d);
                if (f.depth + 1 >= max_word_len) {
                    unexplored = std::min(unexplored, prune ? extension_bound(m, l) : d);
                    continue;
                }
                stack.push_back({m, l, f.depth + 1});
            }
        }
    }
    std::sort(dists.begin(), dists.end());
    std::vector<OrbitalCount> out;
    for (double R : radii) {
        const long n = std::upper_bound(dists.begin(), dists.end(), slack(R)) - dists.begin();
        out.push_back({R, n, R < unexplored});
    }
    return out;
}

OrbitalCount orbital_count(const FuchsianGroup& g, const PointH& z0, double R, int max_word_len) {
    return orbital_counts(g, z0, {R}, max_word_len).front();
}

DeltaEstimate estimate_delta(const FuchsianGroup& g, const PointH& z0, const std::vector<double>& R_grid,
                             int max_word_len) {
    if (R_grid.size() < 4) throw DomainError("delta estimate needs at least 4 radii");
    for (std::size_t i = 1; i < R_grid.size(); ++i)
        if (!(R_grid[i] > R_grid[i - 1])) throw DomainError("radius grid must be increasing");
    DeltaEstimate est;
    // the word budget doubles until every radius is fully counted
    for (int len = std::min(64, max_word_len);; len = std::min(2 * len, max_word_len)) {
        est.counts = orbital_counts(g, z0, R_grid, len);
        if (est.counts.back().truncation_ok) break;
        if (len >= max_word_len)
            throw ConvergenceError("orbital counts truncated at word length " + std::to_string(len));
    }
    const std::size_t start = R_grid.size() / 2;
    std::vector<double> xs, ys;
    for (std::size_t i = start; i < R_grid.size(); ++i) {
        xs.push_back(R_grid[i]);
        ys.push_back(std::log(double(est.counts[i].count)));
    }
    const double n = double(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (est.counts.back().count <= est.counts.front().count)
        throw ConvergenceError("orbital counts do not grow; delta fit is degenerate");
    est.delta = sxy / sxx;
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (my + est.delta * (xs[i] - mx));
        rss += r * r;
    }
    est.fit_residual = std::sqrt(rss / n);
    return est;
}

Cusp cusp_of(const FuchsianGroup& g, int gen) {
    const Generator& G = g.generator(gen);
    if (G.type.kind != IsometryKind::Parabolic) throw DomainError("cusp generator is not parabolic");
    const BoundaryPoint a = hypgeom::parabolic_fixed_point(G.matrix);
    Matrix2 R = a.at_infinity ? Matrix2::identity() : Matrix2{a.x, -1.0, 1.0, 0.0};
    Matrix2 t = R.inverse() * G.matrix * R;
    if (t.a < 0) t = {-t.a, -t.b, -t.c, -t.d};
    const double mu = t.b;  // t = (1 mu; 0 1)
    const double k = std::sqrt(std::abs(mu));
    Cusp c;
    c.generator = gen;
    c.scaling = R * Matrix2{k, 0.0, 0.0, 1.0 / k};
    c.sign = mu > 0 ? 1 : -1;
    return c;
}

Matrix2 axis_normalizer(const FuchsianGroup& g, int gen) {
    const Generator& G = g.generator(gen);
    if (G.type.kind != IsometryKind::Hyperbolic) throw DomainError("generator is not hyperbolic");
    return hypgeom::axis_conjugator(hypgeom::axis(G.matrix));
}

}  // namespace hypereis::group
