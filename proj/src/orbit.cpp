#include "hypereis/orbit.hpp"

#include <cmath>

#include "hypereis/errors.hpp"
#include "hypereis/quadrature.hpp"

namespace hypereis::group {

ExponentRule exponent_rule(int N, int Q) {
    if (N < 2) throw DomainError("exponent rule needs at least two explicit terms");
    ExponentRule r;
    for (int n = 1; n <= N + 2; ++n) {
        r.t.push_back(n);
        r.w.push_back(n <= N ? 1.0 : 0.0);
    }
    // midpoint Euler-Maclaurin tail from a = N + 1/2:
    //   int_a^inf f + f'(a)/24 - 7 f'''(a)/5760
    // with f' and f''' from the values at N-1 .. N+2
    const double c1 = 1.0 / 24.0, c3 = -7.0 / 5760.0;
    const double d1[4] = {1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0};
    const double d3[4] = {-1.0, 3.0, -3.0, 1.0};
    for (int k = 0; k < 4; ++k) r.w[N - 2 + k] += c1 * d1[k] + c3 * d3[k];
    // integral with t = a / v^4, v in (0, 1]
    const double a = N + 0.5;
    const auto& gl = quad::gauss_legendre(Q);
    for (int k = 0; k < Q; ++k) {
        const double v = 0.5 * (gl.nodes[k] + 1.0);
        const double wv = 0.5 * gl.weights[k];
        r.t.push_back(a / std::pow(v, 4));
        r.w.push_back(wv * 4.0 * a / std::pow(v, 5));
    }
    return r;
}

Matrix2 parabolic_power(const Matrix2& p0, double t) {
    Matrix2 p = p0;
    if (p.trace() < 0) p = {-p.a, -p.b, -p.c, -p.d};
    return Matrix2{1.0 + t * (p.a - 1.0), t * p.b, t * p.c, 1.0 + t * (p.d - 1.0)}.normalized();
}

namespace detail {

StepTable::StepTable(const FuchsianGroup& g, const TruncationPolicy& pol) {
    auto fill = [&](std::vector<Child>& out, int N, int Q) {
        for (int i = 0; i < g.rank(); ++i) {
            const Generator& G = g.generator(i);
            const bool syllable = pol.mode == ShellMode::Syllables &&
                                  G.type.kind == hypgeom::IsometryKind::Parabolic;
            if (!syllable) {
                out.push_back({G.matrix, 1.0, i, 1});
                out.push_back({G.matrix.inverse(), 1.0, i, -1});
                continue;
            }
            const ExponentRule r = exponent_rule(N, Q);
            for (std::size_t k = 0; k < r.t.size(); ++k) {
                out.push_back({parabolic_power(G.matrix, r.t[k]), r.w[k], i, 1});
                out.push_back({parabolic_power(G.matrix, -r.t[k]), r.w[k], i, -1});
            }
        }
    };
    fill(outer_, pol.outer_explicit, pol.outer_quad);
    fill(inner_, pol.inner_explicit, pol.inner_quad);
}

bool allowed(const FuchsianGroup& g, ShellMode mode, const Node& parent, const Child& c) {
    if (parent.last_gen < 0 || c.gen != parent.last_gen) return true;
    const bool syllable = mode == ShellMode::Syllables &&
                          g.generator(c.gen).type.kind == hypgeom::IsometryKind::Parabolic;
    if (syllable) return false;
    return c.sign == parent.last_sign;
}

}  // namespace detail

std::vector<double> counting_bound_partials(const FuchsianGroup& g, const PointH& z, double q,
                                            const TruncationPolicy& pol) {
    if (!(q >= 1.0)) throw DomainError("counting bound needs q >= 1");
    const cplx z0 = z.z();
    auto term = [&](const Matrix2& m) {
        const cplx w = hypgeom::act(m, z0);
        return std::pow(w.imag(), q) / std::pow(1.0 + std::abs(w), 2.0 * q);
    };
    TruncationPolicy p = pol;
    p.require_convergence = false;
    auto res = sum_orbit<double>(g, {}, p, term, [](double v) { return std::abs(v); });
    return res.partials;
}

}  // namespace hypereis::group
