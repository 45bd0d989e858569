#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hypereis/analysis.hpp"
#include "hypereis/errors.hpp"
#include "hypereis/specfun.hpp"

using namespace hypereis;
using namespace hypereis::analysis;
using group::build_preset;
using series::Family;
using series::FamilyRequest;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// f = y^s e^{3ix}: Delta_2q f = (s(s-1) - 9 y^2 + 6 q y) f
cplx test_field(const PointH& z, double s) { return std::pow(z.y, s) * std::exp(3.0 * kI * z.x); }
cplx test_laplacian(const PointH& z, double s, int q) {
    return (s * (s - 1.0) - 9.0 * z.y * z.y + 6.0 * q * z.y) * test_field(z, s);
}

double laplacian_error(double h, double s, int q) {
    const auto f = GridField::sample([&](const PointH& z) { return test_field(z, s); }, 0.2, 0.9, h, 5, 5, q);
    const auto lap = apply_weighted_laplacian(f);
    double worst = 0.0;
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i)
            if (lap.is_valid(i, j)) {
                const PointH z = PointH::make(f.x(i), f.y(j));
                worst = std::max(worst, std::abs(lap.at(i, j) - test_laplacian(z, s, q)));
            }
    return worst;
}

FormValue dtheta(const PointH& z) {
    // d arctan(x/y) = (y dx - x dy) / (x^2 + y^2) = f dz + conj(f) dzbar with f = (a - i b) / 2
    const double r2 = z.x * z.x + z.y * z.y;
    const cplx f = cplx{z.y / r2, z.x / r2} * 0.5;
    return FormValue::make(1, f, std::conj(f), z);
}

}  // namespace

TEST_CASE("weighted laplacian on constants and powers of y") {
    const auto c = GridField::sample([](const PointH&) { return cplx{2.0, -1.0}; }, 0.0, 1.0, 1e-3, 4, 4, 3);
    const auto lc = apply_weighted_laplacian(c);
    int valid = 0;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i)
            if (lc.is_valid(i, j)) {
                ++valid;
                CHECK(std::abs(lc.at(i, j)) < 1e-6);
            }
    CHECK(valid == 4);
    CHECK_FALSE(lc.is_valid(0, 0));

    for (int q : {0, 1}) {
        const double s = 2.5;
        const auto f = GridField::sample([&](const PointH& z) { return cplx{std::pow(z.y, s)}; }, 0.0, 1.0, 1e-3, 3,
                                         3, q);
        const auto l = apply_weighted_laplacian(f);
        const double y = f.y(1);
        CHECK(std::abs(l.at(1, 1) - s * (s - 1.0) * std::pow(y, s)) < 1e-5);
    }
}

TEST_CASE("laplacian stencil converges at second order") {
    for (int q : {0, 1, 2}) {
        const double e1 = laplacian_error(2e-3, 2.5, q), e2 = laplacian_error(1e-3, 2.5, q),
                     e3 = laplacian_error(5e-4, 2.5, q);
        CHECK(e1 / e2 >= 3.5);
        CHECK(e1 / e2 <= 4.5);
        CHECK(e2 / e3 >= 3.5);
        CHECK(e2 / e3 <= 4.5);
    }
}

TEST_CASE("Maass operators compose to the shifted laplacian") {
    const double s = 2.0, h = 1e-3;
    for (int q : {0, 1, 2}) {
        const auto f = GridField::sample([&](const PointH& z) { return test_field(z, s); }, 0.1, 1.2, h, 7, 7, q);
        const auto lk = apply_maass(apply_maass(f, MaassDirection::Raise), MaassDirection::Lower);
        const auto kl = apply_maass(apply_maass(f, MaassDirection::Lower), MaassDirection::Raise);
        CHECK(lk.q == q);
        CHECK(kl.q == q);
        int checked = 0;
        for (int j = 0; j < 7; ++j)
            for (int i = 0; i < 7; ++i) {
                if (!lk.is_valid(i, j)) continue;
                ++checked;
                const PointH z = PointH::make(f.x(i), f.y(j));
                const cplx lap = test_laplacian(z, s, q);
                const cplx fz = test_field(z, s);
                // L_{q+1} K_q = Delta_2q - q(q+1), K_{q-1} L_q = Delta_2q - q(q-1)
                CHECK(std::abs(lk.at(i, j) - (lap - double(q * (q + 1)) * fz)) < 1e-4 * std::abs(fz));
                CHECK(std::abs(kl.at(i, j) - (lap - double(q * (q - 1)) * fz)) < 1e-4 * std::abs(fz));
            }
        CHECK(checked == 9);
    }
}

TEST_CASE("grid construction errors") {
    auto one = [](const PointH&) { return cplx{1.0}; };
    CHECK_THROWS_AS(GridField::sample(one, 0, -0.1, 1e-3, 3, 3, 0), DomainError);
    CHECK_THROWS_AS(GridField::sample(one, 0, 1, 0.0, 3, 3, 0), DomainError);
    CHECK_THROWS_AS(apply_weighted_laplacian(GridField::sample(one, 0, 1, 1e-3, 2, 3, 0)), DomainError);
    CHECK_THROWS_AS(GridField::sample([](const PointH&) { return cplx{NAN}; }, 0, 1, 1e-3, 3, 3, 0), DomainError);
}

TEST_CASE("functional equation residuals are small and second order") {
    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    ResidualGrid grid;
    grid.n = 3;
    grid.spacing = 0.1;
    for (const FamilyRequest req : {FamilyRequest{Family::Omega, 0, 0, 1.0}, FamilyRequest{Family::WeightQ, 0, 1, 2.5},
                                    FamilyRequest{Family::WeightQ, 0, 2, 2.5}}) {
        const auto o = functional_equation_order(sch, req, grid, {1e-3, 5e-4});
        REQUIRE(o.runs.size() == 2);
        REQUIRE(o.ratios.size() == 1);
        CHECK(o.runs[0].residual < 5e-3);
        CHECK(o.ratios[0] >= 3.5);
        CHECK(o.ratios[0] <= 4.5);
    }
    const auto pp = build_preset("parabolic_pair", {3.0});
    grid.n = 2;
    const auto eta = functional_equation_residual(pp, {Family::EtaHat, 0, 0, 2.0}, grid);
    CHECK(eta.residual < 5e-3);
    const auto j = to_json(eta);
    CHECK(j["family"] == "eta_hat");
    CHECK(j.contains("truncation"));
    CHECK(j.contains("grid"));
    CHECK(j["residual"].get<double>() == eta.residual);

    CHECK_THROWS_AS(functional_equation_residual(pp, {Family::Theta, 0, 0, 2.0}, grid), DomainError);
    grid.y0 = 5e-4;
    CHECK_THROWS_AS(functional_equation_residual(sch, {Family::Omega, 0, 0, 1.0}, grid), DomainError);
}

TEST_CASE("threads do not change residuals") {
    const auto cyc = build_preset("cyclic_hyperbolic", {1.0});
    ResidualGrid grid;
    grid.n = 4;
    const auto a = functional_equation_residual(cyc, {Family::Omega, 0, 0, 1.0}, grid, matched_truncation(), 1);
    const auto b = functional_equation_residual(cyc, {Family::Omega, 0, 0, 1.0}, grid, matched_truncation(), 3);
    CHECK(a.residual == b.residual);
}

TEST_CASE("an exact form integrates to zero around the cyclic core geodesic") {
    const auto cyc = build_preset("cyclic_hyperbolic", {1.0});
    const auto loop = geodesic_loop(cyc, {1});
    CHECK(std::abs(integrate_form_along_cycle(dtheta, loop)) < 1e-14);
    const auto path = deck_path(cyc, {1}, PointH::make(0.7, 0.4));
    CHECK(std::abs(integrate_form_along_cycle(dtheta, path)) < 1e-12);
}

TEST_CASE("cycle integration is orientation-odd and quadrature-stable") {
    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    const FormEvaluator omega = [&](const PointH& z) { return series::hyperbolic_eisenstein(sch, 0, 1.0, z).value; };
    const auto B = deck_path(sch, {2}, PointH::make(0.1, 1.1));
    const cplx fwd = integrate_form_along_cycle(omega, B);
    const cplx bwd = integrate_form_along_cycle(omega, B.reversed());
    CHECK(std::abs(fwd + bwd) < 1e-12);
    CHECK(std::abs(integrate_form_along_cycle(omega, B, 32) - fwd) < 1e-9);
    CHECK(std::abs(fwd.imag()) < 1e-12);
    CHECK_THROWS_AS(deck_path(sch, {}, PointH::make(0, 1)), DomainError);
    CHECK_THROWS_AS(geodesic_loop(build_preset("cyclic_parabolic", {}), {1}), DomainError);
}

TEST_CASE("intersection numbers are antisymmetric") {
    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    const auto A = geodesic_loop(sch, {1}), B = geodesic_loop(sch, {2});
    const int ab = intersection_number(sch, A, B), ba = intersection_number(sch, B, A);
    CHECK(std::abs(ab) == 1);
    CHECK(ab == -ba);
    CHECK(intersection_number(sch, A, A) == 0);
    CHECK(intersection_number(sch, B, B) == 0);
    CHECK(intersection_number(sch, A.reversed(), B) == -ab);
}

TEST_CASE("duality: Omega_A pairs with the B loop to one and with the A loop to zero") {
    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    const auto A = geodesic_loop(sch, {1}), B = geodesic_loop(sch, {2});
    cplx first{};
    for (double s : {0.5, 1.0, 2.0}) {
        const auto d = duality_check(sch, 0, B, s);
        CHECK(std::abs(d.intersection) == 1);
        CHECK(d.deviation < 1e-3);
        if (s == 0.5) first = d.integral;
        CHECK(std::abs(d.integral - first) < 2e-3);
        CHECK(std::abs(duality_check(sch, 0, A, s).integral) < 1e-6);
    }
    // closedness: moving the base point of the B cycle leaves the integral unchanged
    const auto moved = deck_path(sch, {2}, PointH::make(0.3, 1.3));
    CHECK(std::abs(duality_check(sch, 0, moved, 1.0).integral - duality_check(sch, 0, B, 1.0).integral) < 1e-6);
    const auto j = to_json(duality_check(sch, 0, B, 1.0));
    CHECK(j.contains("integral"));
    CHECK(j["intersection"].get<int>() == intersection_number(sch, A, B));
}

TEST_CASE("cyclic L2 mass matches the closed form and decays geometrically in the cut") {
    const auto cyc = build_preset("cyclic_hyperbolic", {1.0});
    double weighted_prev = 1e300;
    for (double s : {1.0, 2.0}) {
        const FormEvaluator omega = [&](const PointH& z) { return series::hyperbolic_eisenstein(cyc, 0, s, z).value; };
        const auto r = l2_norm_estimate(omega, cyc, 0, {2, 4, 6}, {}, cplx{s});
        REQUIRE(r.closed_form);
        REQUIRE(r.closed_bound);
        CHECK(r.mass.back() == doctest::Approx(*r.closed_form).epsilon(1e-6));
        CHECK(r.closed_form == doctest::Approx(cyclic_l2_mass(1.0, s, 6.0)));
        CHECK(r.mass.back() < *r.closed_bound);
        CHECK(r.geometric_decrease);
        CHECK(r.multiplicity_ok);
        const double k = std::abs(specfun::k_factor(s));
        const double weighted = k * k * r.mass.back();
        CHECK(weighted < weighted_prev);
        weighted_prev = weighted;
    }
    // s = 1: |k|^2 mass tends to pi/2, mass tends to pi/8
    CHECK(cyclic_l2_mass(1.0, 1.0, 40.0) == doctest::Approx(kPi / 8.0));
}

TEST_CASE("Schottky L2 mass converges with the multiplicity bound respected") {
    const auto sch = build_preset("schottky_torus", {4.0, 4.0});
    const FormEvaluator omega = [&](const PointH& z) { return series::hyperbolic_eisenstein(sch, 0, 1.0, z).value; };
    L2Options opt;
    opt.n_x1 = 12;
    opt.n_x2 = 8;
    const auto r = l2_norm_estimate(omega, sch, 0, {2, 4, 6}, opt);
    CHECK_FALSE(r.closed_form);
    CHECK(r.geometric_decrease);
    CHECK(r.multiplicity_ok);
    CHECK(r.multiplicity_ratio <= 1.0);
    CHECK(r.increments.size() == 2);
    CHECK_THROWS_AS(l2_norm_estimate(omega, sch, 0, {4, 2}, opt), DomainError);
}

TEST_CASE("elementary degeneration converges to the parabolic series") {
    const auto fam = elementary_family();
    const std::vector<double> ls{0.4, 0.2, 0.1, 0.05};
    for (auto [q, s] : {std::pair{1, 2.0}, std::pair{1, 3.0}, std::pair{2, 3.0}}) {
        const auto r = degeneration_diagnostic(fam, q, s, ls);
        REQUIRE(r.sup_error.size() == ls.size());
        CHECK(r.sup_error.back() < 1e-3);
        CHECK(r.monotone);
        CHECK(r.assertive);
        CHECK(r.series_vs_closed_form < 1e-10);
        CHECK(r.prefactor_deviation < 1e-12);
        CHECK(r.omega_alpha_deviation < 1e-10);
    }
    CHECK(abstract_prefactor_deviation(cplx{2.5, 1.0}) < 1e-12);
    CHECK_THROWS_AS(degeneration_diagnostic(fam, 1, 2.0, {0.1, 0.2}), DomainError);
    CHECK_THROWS_AS(degeneration_diagnostic(fam, 1, 0.5, ls), DomainError);
    const auto j = to_json(degeneration_diagnostic(fam, 0, 2.0, {0.2, 0.1}));
    CHECK(j["sup_error"].size() == 2);
}

TEST_CASE("collar separation holds on disjoint geodesic pairs") {
    for (auto params : {std::vector<double>{4.0, 4.0}, std::vector<double>{2.0, 2.5}}) {
        const auto pairs = collar_separation_pairs(build_preset("schottky_torus", params));
        CHECK(pairs.size() >= 5);
        for (const auto& p : pairs) {
            CHECK(p.holds);
            CHECK(p.bound == doctest::Approx(1.0 / std::tanh(p.length / 2.0)));
        }
    }
    CHECK(collar_separation_pairs(build_preset("parabolic_pair", {3.0})).empty());
}
