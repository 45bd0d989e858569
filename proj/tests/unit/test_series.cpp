#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hypereis/errors.hpp"
#include "hypereis/series.hpp"
#include "hypereis/specfun.hpp"

using namespace hypereis;
using namespace hypereis::series;
using group::build_preset;
using hypgeom::act;
using hypgeom::derivative;

namespace {

// dtheta-component of the real form f dz + conj(f) dzbar at z = r e^{i theta}.
double dtheta_component(cplx f, cplx z) {
    const double r = std::abs(z);
    return -2.0 * r * (f * (z / r)).imag();
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("Omega on the cyclic group is its single closed-form term") {
    for (double l : {0.5, 1.0, 3.0}) {
        const auto g = build_preset("cyclic_hyperbolic", {l});
        for (cplx s : {cplx{0.5, 0}, cplx{1, 0}, cplx{2.5, 0}, cplx{1.5, 0.7}}) {
            const PointH z = PointH::make(0.3, 0.8);
            const auto e = hyperbolic_eisenstein(g, 0, s, z);
            CHECK(e.terms == 1);
            CHECK(e.converged);
            const cplx zz = z.z();
            const cplx sin_s = std::exp(s * std::log(z.y / std::abs(zz)));
            const cplx f = sin_s / specfun::k_factor(s) / (cplx{0, 2} * zz);
            CHECK(rel(e.value.dz_coeff, f) < 1e-12);
            if (s.imag() == 0) {
                CHECK(rel(e.value.dzbar_coeff, std::conj(f)) < 1e-12);
                CHECK(dtheta_component(e.value.dz_coeff, zz) ==
                      doctest::Approx(std::pow(z.y / std::abs(zz), s.real()) / specfun::k_factor(s).real())
                          .epsilon(1e-12));
            }
        }
        // on the axis the dtheta-component is 1/k(s)
        const auto on = hyperbolic_eisenstein(g, 0, 2.0, PointH::make(0.0, 1.7));
        CHECK(dtheta_component(on.value.dz_coeff, {0.0, 1.7}) ==
              doctest::Approx(1.0 / specfun::k_factor(2.0).real()).epsilon(1e-12));
    }
    CHECK_THROWS_AS(hyperbolic_eisenstein(build_preset("cyclic_hyperbolic", {1.0}), 0, 0.0, PointH::make(0, 1)),
                    DomainError);
    CHECK_THROWS_AS(hyperbolic_eisenstein(build_preset("cyclic_parabolic", {}), 0, 1.0, PointH::make(0, 1)),
                    DomainError);
}

TEST_CASE("Omega on the Schottky torus converges with decreasing shells") {
    const auto g = build_preset("schottky_torus", {4.0, 4.0});
    for (double s : {0.5, 1.0, 2.0}) {
        const auto e = hyperbolic_eisenstein(g, 0, s, PointH::make(0.0, 1.0));
        CHECK(e.converged);
        CHECK(e.monotone_tail);
        CHECK(e.word_len < 14);
        for (std::size_t k = 2; k < e.shell_magnitude.size(); ++k)
            CHECK(e.shell_magnitude[k] < e.shell_magnitude[k - 1]);
        CHECK(e.tail_estimate < 1e-8);
        CHECK(rel(e.value.dzbar_coeff, std::conj(e.value.dz_coeff)) < 1e-14);
    }
}

TEST_CASE("Omega is Gamma-invariant, conjugation-equivariant and closed") {
    const auto g = build_preset("schottky_torus", {4.0, 4.0});
    const cplx s = 1.0;
    const PointH z = PointH::make(0.15, 1.3);
    const auto base = hyperbolic_eisenstein(g, 0, s, z);
    // gamma^* Omega = Omega
    for (int i = 0; i < g.rank(); ++i) {
        for (const Matrix2& M : {g.generator(i).matrix, g.generator(i).matrix.inverse()}) {
            const auto moved = hyperbolic_eisenstein(g, 0, s, hypgeom::mobius_apply(M, z));
            CHECK(rel(moved.value.dz_coeff * derivative(M, z.z()), base.value.dz_coeff) < 1e-7);
        }
    }
    // Omega for C^{-1} G C at C^{-1} z is the pullback by C
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix2 C = Matrix2{1.0 + u(rng), u(rng), u(rng), 1.0 + u(rng)}.normalized();
        const auto gc = g.conjugated(C);
        const cplx zc = act(C.inverse(), z.z());
        const auto e = hyperbolic_eisenstein(gc, 0, s, PointH::from(zc));
        CHECK(rel(e.value.dz_coeff, base.value.dz_coeff * derivative(C, zc)) < 1e-8);
    }
    // d(f dz + g dzbar) = (g_z - f_zbar) dz ^ dzbar vanishes
    const double h = 1e-3;
    for (cplx p : {cplx{0.3, 1.1}, cplx{-0.4, 0.7}, cplx{0.8, 2.0}}) {
        auto F = [&](cplx w) { return hyperbolic_eisenstein(g, 0, s, PointH::from(w)).value; };
        const FormValue xp = F(p + h), xm = F(p - h), yp = F(p + cplx{0, h}), ym = F(p - cplx{0, h});
        const cplx fx = (xp.dz_coeff - xm.dz_coeff) / (2 * h), fy = (yp.dz_coeff - ym.dz_coeff) / (2 * h);
        const cplx gx = (xp.dzbar_coeff - xm.dzbar_coeff) / (2 * h), gy = (yp.dzbar_coeff - ym.dzbar_coeff) / (2 * h);
        const cplx f_zbar = 0.5 * (fx + cplx{0, 1} * fy);
        const cplx g_z = 0.5 * (gx - cplx{0, 1} * gy);
        CHECK(std::abs(g_z - f_zbar) <= 1e-4 * std::abs(F(p).dz_coeff));
    }
}

TEST_CASE("coset sums are termwise invariant under the stabilizer") {
    const auto g = build_preset("schottky_torus", {4.0, 4.0});
    const Matrix2 C = group::axis_normalizer(g, 0);
    const auto gn = g.conjugated(C);
    const Matrix2 sigma = gn.generator(0).matrix;
    const cplx z{0.2, 0.9};
    auto omega_term = [&](const Matrix2& m) {
        const cplx w = act(m, z);
        return std::pow(w.imag() / std::abs(w), 1.5) * derivative(m, z) / w;
    };
    for (const auto& e : group::coset_representatives(gn, 0, 4)) {
        const cplx a = omega_term(e.matrix), b = omega_term(sigma * e.matrix);
        CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
    }
    const auto pp = build_preset("parabolic_pair", {3.0});
    const Matrix2 T = pp.generator(0).matrix;
    auto e_term = [&](const Matrix2& m) { return std::pow(act(m, z).imag(), 2.0); };
    for (const auto& e : group::coset_representatives(pp, 0, 4))
        CHECK(std::abs(e_term(e.matrix) - e_term(T * e.matrix)) <= 1e-10 * e_term(e.matrix));
}

TEST_CASE("weight-q series: closed forms, positivity and the alpha link") {
    const auto cyc = build_preset("cyclic_hyperbolic", {1.0});
    const PointH z = PointH::make(0.4, 0.9);
    const cplx zz = z.z();
    const double sn = z.y / std::abs(zz);
    for (double s : {2.5, 3.0}) {
        const auto v = weight_q_series(cyc, 0, 2, s, z);
        const cplx want = std::pow(sn, s - 2) / (zz * zz);
        CHECK(rel(v.A.value.dz_coeff, want) < 1e-12);
        CHECK(rel(v.Xi.value.dz_coeff, want / specfun::b_factor(2, s)) < 1e-12);
        CHECK(rel(v.A.value.auto_lift, z.y * z.y * want) < 1e-15);
    }
    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    const auto q0 = weight_q_series(sch, 1, 0, 2.0, z);
    CHECK(q0.A.value.dz_coeff.real() > 0);
    CHECK(std::abs(q0.A.value.dz_coeff.imag()) < 1e-15);

    // A_{l,1}(s) and alpha_l(s) are independent paths: alpha = Im A_{l,1}
    for (int c : {0, 1}) {
        for (cplx s : {cplx{2.0, 0}, cplx{2.5, 0.5}}) {
            const auto A = weight_q_series(sch, c, 1, s, z);
            const auto a = alpha_series(sch, c, s, z);
            CHECK(rel(a.value.dz_coeff, A.A.value.dz_coeff / cplx{0, 2}) < 1e-9);
        }
    }
    // Omega(s) = alpha(s+1)/k(s)
    for (double s : {1.0, 1.7}) {
        const auto o = hyperbolic_eisenstein(sch, 0, s, z);
        const auto a = alpha_series(sch, 0, s + 1.0, z);
        CHECK(rel(o.value.dz_coeff, a.value.dz_coeff / specfun::k_factor(s)) < 1e-12);
    }
    // Xi at a zero of b_q
    CHECK_THROWS_AS(weight_q_series(sch, 0, 2, 2.0, z), PoleError);
    CHECK_THROWS_AS(weight_q_series(sch, 0, 1, 1.0, z), DomainError);
    CHECK_THROWS_AS(weight_q_series(sch, 0, -1, 2.0, z), DomainError);
}

TEST_CASE("parabolic Eisenstein series") {
    const auto par = build_preset("cyclic_parabolic", {});
    for (double s : {1.5, 2.0, 3.0}) {
        const PointH z = PointH::make(0.3, 1.7);
        const auto e = parabolic_eisenstein(par, 0, 0, s, z);
        CHECK(e.terms == 1);
        CHECK(rel(e.value.auto_lift, std::pow(1.7, s)) < 1e-12);
        const auto e1 = parabolic_eisenstein(par, 0, 1, s, z);
        CHECK(rel(e1.value.dz_coeff, std::pow(1.7, s - 1)) < 1e-12);
    }

    // against a brute-force coset enumeration, in reverse order
    const auto pp = build_preset("parabolic_pair", {3.0});
    const PointH z = PointH::make(0.0, 1.0);
    TruncationPolicy letters;
    letters.mode = group::ShellMode::Letters;
    letters.max_shells = 10;
    letters.fixed_depth = true;
    const auto e = parabolic_eisenstein(pp, 0, 0, 2.0, z, letters);
    const Matrix2 Si = group::cusp_of(pp, 0).scaling.inverse();
    const auto reps = group::coset_representatives(pp, 0, 10);
    double brute = 0;
    for (auto it = reps.rbegin(); it != reps.rend(); ++it) brute += std::pow(act(Si * it->matrix, z.z()).imag(), 2.0);
    CHECK(e.terms == long(reps.size()));
    CHECK(std::abs(e.value.auto_lift.real() - brute) < 1e-8 * brute);

    // automorphy E(gamma z) j^{-q} = E(z)
    const PointH w = PointH::make(0.2, 1.1);
    for (int q : {0, 1, 2}) {
        const auto base = parabolic_eisenstein(pp, 0, q, 2.0, w);
        CHECK(base.converged);
        for (int i = 0; i < 2; ++i) {
            const Matrix2 M = pp.generator(i).matrix;
            const auto moved = parabolic_eisenstein(pp, 0, q, 2.0, hypgeom::mobius_apply(M, w));
            const cplx lhs = moved.value.auto_lift * std::pow(hypgeom::automorphy_factor(M, w.z()), -q);
            CHECK(rel(lhs, base.value.auto_lift) < 1e-7);
        }
    }
    // the cusp at 0 (second generator) also works and is real for q = 0
    const auto e0 = parabolic_eisenstein(pp, 1, 0, 2.0, w);
    CHECK(std::abs(e0.value.auto_lift.imag()) < 1e-15);
    CHECK(e0.value.auto_lift.real() > 0);

    CHECK_THROWS_AS(parabolic_eisenstein(pp, 0, 0, 0.9, w), DomainError);
    TruncationPolicy relaxed;
    relaxed.check_region = false;
    relaxed.require_convergence = false;
    relaxed.max_shells = 2;
    CHECK_NOTHROW(parabolic_eisenstein(pp, 0, 0, 0.9, w, relaxed));
    CHECK_THROWS_AS(parabolic_eisenstein(build_preset("schottky_torus", {4.0, 4.0}), 0, 0, 2.0, w), DomainError);
}

TEST_CASE("Patterson Eisenstein series") {
    const auto triv = group::FuchsianGroup::trivial();
    const PointH z = PointH::make(0.4, 0.7);
    const BoundaryPoint b = BoundaryPoint::real(1.0);
    const cplx zz = z.z();
    const double P = z.y / std::norm(zz - 1.0);
    const cplx phase = (std::conj(zz) - 1.0) / (zz - 1.0);
    const auto t = patterson_eisenstein(triv, b, 1, 2.0, z);
    CHECK(t.terms == 1);
    CHECK(rel(t.value.auto_lift, P * P * phase) < 1e-14);

    const auto cyc = build_preset("cyclic_hyperbolic", {1.0});
    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    // b = 1 is a fixed point of B on the torus; 0.4 lies in a funnel interval
    const BoundaryPoint bt = BoundaryPoint::real(0.4);
    for (const auto& [g, bb] : {std::pair{&cyc, b}, std::pair{&sch, bt}}) {
        const auto e0 = patterson_eisenstein(*g, bb, 0, 2.0, z);
        CHECK(e0.value.auto_lift.real() > 0);
        CHECK(std::abs(e0.value.auto_lift.imag()) < 1e-15);
        const auto e1 = patterson_eisenstein(*g, bb, 1, cplx{2.0, 0.8}, z);
        CHECK(std::abs(e1.value.auto_lift) <= e0.value.auto_lift.real() * (1 + 1e-12));
    }
    // weight-2k automorphy
    const auto base = patterson_eisenstein(sch, bt, 1, 2.0, z);
    const Matrix2 M = sch.generator(1).matrix;
    const auto moved = patterson_eisenstein(sch, bt, 1, 2.0, hypgeom::mobius_apply(M, z));
    CHECK(rel(moved.value.auto_lift, hypgeom::automorphy_factor(M, zz) * base.value.auto_lift) < 1e-7);
    CHECK_THROWS_AS(patterson_eisenstein(sch, bt, 1, 0.9, z), DomainError);
    CHECK_THROWS_AS(patterson_eisenstein(sch, b, 0, 2.0, z), ConvergenceError);
}

TEST_CASE("infinite-geodesic series") {
    const auto pp = build_preset("parabolic_pair", {3.0});
    // identity term only
    TruncationPolicy none;
    none.max_shells = 0;
    none.require_convergence = false;
    const PointH z = PointH::make(0.3, 0.5);
    const cplx zz = z.z();
    const auto one = infinite_geodesic_series(pp, 2.5, z, none);
    const cplx want = std::pow(z.y / std::abs(zz), 1.5) / zz / specfun::k_factor(1.5);
    CHECK(rel(one.theta.value.dz_coeff, want) < 1e-14);

    const auto gs = infinite_geodesic_series(pp, 2.0, PointH::make(0.0, 1.0));
    CHECK(gs.theta.converged);
    CHECK(gs.theta.monotone_tail);
    const auto& sm = gs.theta.shell_magnitude;
    for (std::size_t k = 5; k < sm.size(); ++k) CHECK(sm[k] < sm[k - 1]);
    CHECK(rel(gs.eta_hat.value.dz_coeff, gs.theta.value.dz_coeff / cplx{0, 2}) < 1e-15);
    CHECK(rel(gs.eta_hat.value.dzbar_coeff, std::conj(gs.eta_hat.value.dz_coeff)) < 1e-14);

    // theta is a Gamma-invariant holomorphic-type form: theta(gamma z) gamma'(z) = theta(z)
    const PointH w = PointH::make(0.2, 0.9);
    const auto tw = infinite_geodesic_series(pp, 2.0, w).theta;
    const Matrix2 U = pp.generator(1).matrix;
    const auto tu = infinite_geodesic_series(pp, 2.0, hypgeom::mobius_apply(U, w)).theta;
    CHECK(rel(tu.value.dz_coeff * derivative(U, w.z()), tw.value.dz_coeff) < 1e-7);

    // cusp at infinity of width one: Y |theta - 1/i| stays bounded
    const auto ppn = pp.conjugated(group::cusp_of(pp, 0).scaling);
    double first = -1, worst = 0;
    for (double Y : {10.0, 20.0, 40.0}) {
        const auto th = infinite_geodesic_series(ppn, 2.0, PointH::make(0.3, Y)).theta;
        const double v = Y * std::abs(th.value.dz_coeff - 1.0 / cplx{0, 1});
        if (first < 0) first = v;
        worst = std::max(worst, v);
    }
    CHECK(worst <= 1.5 * first);

    CHECK_THROWS_AS(infinite_geodesic_series(build_preset("schottky_torus", {4.0, 4.0}), 2.0, z), DomainError);
    CHECK_THROWS_AS(infinite_geodesic_series(pp, 1.0, z), DomainError);
}

TEST_CASE("families, grids and serialization") {
    CHECK(family_from_string("eta_hat") == Family::EtaHat);
    for (Family f : {Family::Omega, Family::Alpha, Family::WeightQ, Family::Xi, Family::Parabolic,
                     Family::Patterson, Family::Theta, Family::EtaHat})
        CHECK(family_from_string(to_string(f)) == f);
    CHECK_THROWS_AS(family_from_string("nope"), DomainError);

    GridSpec bad;
    bad.y0 = 0.0;
    CHECK_THROWS_AS(bad.points(), DomainError);

    GridSpec grid;
    grid.nx = 5;
    grid.ny = 4;
    const auto pts = grid.points();
    REQUIRE(pts.size() == 20);
    CHECK(pts[0].x == -1.0);
    CHECK(pts[4].x == 1.0);
    CHECK(pts[19].y == 2.0);

    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    FamilyRequest req;
    req.family = Family::Omega;
    req.s = 1.0;
    const auto one = evaluate_points(sch, req, pts, {}, 1);
    const auto four = evaluate_points(sch, req, pts, {}, 4);
    CHECK(grid_csv(one) == grid_csv(four));
    CHECK(grid_json(one, "omega") == grid_json(four, "omega"));

    const std::string csv = grid_csv(one);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# schema=hypereis.grid.v1");
    std::getline(in, line);
    CHECK(line == "x,y,re_f,im_f,re_g,im_g,word_len,tail");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 20);

    // an evaluation failure anywhere is reported
    req.family = Family::Theta;
    CHECK_THROWS_AS(evaluate_points(sch, req, pts, {}, 2), DomainError);
}
