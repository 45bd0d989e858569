#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "hypereis/errors.hpp"
#include "hypereis/group.hpp"

using namespace hypereis;
using namespace hypereis::group;
using hypgeom::IsometryKind;

namespace {

long reduced_count(int k, int n) {
    if (n == 0) return 1;
    long c = 2 * k;
    for (int i = 1; i < n; ++i) c *= 2 * k - 1;
    return c;
}

// All words over the signed alphabet of length <= len, reduced or not.
void all_words(int rank, int len, Word& cur, std::vector<Word>& out) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == len) return;
    for (int g = 1; g <= rank; ++g)
        for (int l : {g, -g}) {
            cur.push_back(l);
            all_words(rank, len, cur, out);
            cur.pop_back();
        }
}

}  // namespace

TEST_CASE("presets") {
    const auto cyc = build_preset("cyclic_hyperbolic", {1.0});
    CHECK(cyc.rank() == 1);
    CHECK(cyc.generator(0).matrix.trace() == doctest::Approx(2 * std::cosh(0.5)).epsilon(1e-15));
    CHECK(cyc.generator(0).matrix.trace() == doctest::Approx(2.2552).epsilon(1e-4));
    CHECK(cyc.certificate().validated);

    const auto pp = build_preset("parabolic_pair", {3.0});
    CHECK(pp.rank() == 2);
    for (const auto& g : pp.generators()) {
        CHECK(g.matrix.trace() == 2.0);
        CHECK(g.type.kind == IsometryKind::Parabolic);
    }
    CHECK(pp.certificate().validated);

    const auto st = build_preset("schottky_torus", {4.0, 4.0});
    CHECK(st.rank() == 2);
    for (const auto& g : st.generators()) {
        CHECK(g.type.kind == IsometryKind::Hyperbolic);
        CHECK(g.type.length == doctest::Approx(4.0).epsilon(1e-13));
    }
    CHECK(st.certificate().validated);
    CHECK(build_preset("cyclic_parabolic", {}).generator(0).type.kind == IsometryKind::Parabolic);

    CHECK_THROWS_AS(build_preset("nonsense", {}), DomainError);
    CHECK_THROWS_AS(build_preset("parabolic_pair", {1.5}), DomainError);
    CHECK_THROWS_AS(build_preset("cyclic_hyperbolic", {-1.0}), DomainError);
    CHECK_THROWS_AS(build_preset("schottky_torus", {4.0}), DomainError);
}

TEST_CASE("discreteness certificate") {
    // overlapping isometric circles: not certified
    CHECK_THROWS_AS(FuchsianGroup::from_matrices({{1, 1.5, 0, 1}, {1, 0, 1.5, 1}}, false), DomainError);
    CHECK_THROWS_AS(build_preset("schottky_torus", {0.5, 0.5}), DomainError);
    const std::vector<Matrix2> bad{{1, 1, 0, 1}, {1, 0, 1, 1}};
    CHECK_THROWS_AS(FuchsianGroup::from_matrices(bad, false), DomainError);
    const auto asserted = FuchsianGroup::from_matrices(bad, true);
    CHECK_FALSE(asserted.certificate().validated);
    CHECK(asserted.certificate().user_asserted);
    CHECK_FALSE(asserted.certificate().diagnostics.empty());
    // elliptic generators are rejected
    CHECK_THROWS_AS(FuchsianGroup::from_matrices({{0, -1, 1, 0}}, true), DomainError);
    // non-unimodular input
    CHECK_THROWS_AS(FuchsianGroup::from_matrices({{2, 0, 0, 1}}, true), DomainError);

    const auto pp = build_preset("parabolic_pair", {3.0});
    CHECK(pp.in_fundamental_domain(cplx{0.2, 1.0}));
    CHECK_FALSE(pp.in_fundamental_domain(cplx{2.0, 1.0}));
    CHECK_FALSE(pp.in_fundamental_domain(cplx{0.1, 0.1}));
}

TEST_CASE("ping-pong: generators map the complement of repel into attract") {
    for (const auto& grp : {build_preset("schottky_torus", {4.0, 4.0}), build_preset("parabolic_pair", {3.0}),
                            build_preset("cyclic_hyperbolic", {0.7})}) {
        for (int i = 0; i < grp.rank(); ++i) {
            const auto& dom = grp.certificate().domains[i];
            const Matrix2 g = grp.generator(i).matrix;
            for (double x = -5; x <= 5; x += 0.37)
                for (double y : {0.05, 0.3, 1.0, 4.0}) {
                    const cplx z{x, y};
                    if (dom.repel.contains(z)) continue;
                    CHECK(dom.attract.contains(hypgeom::act(g, z)));
                }
        }
    }
}

TEST_CASE("conjugation transports the certificate") {
    const auto grp = build_preset("schottky_torus", {4.0, 4.0});
    const Matrix2 C = Matrix2{2.0, 1.0, 1.0, 1.0};
    const auto h = grp.conjugated(C);
    const Matrix2 Ci = C.inverse();
    for (double x = -2; x <= 2; x += 0.5) {
        const cplx z{x, 0.7};
        CHECK(grp.in_fundamental_domain(z) == h.in_fundamental_domain(hypgeom::act(Ci, z)));
    }
    for (int i = 0; i < grp.rank(); ++i)
        CHECK(hypgeom::same_element(h.generator(i).matrix, Ci * grp.generator(i).matrix * C));
}

TEST_CASE("reduced-word enumeration counts") {
    const auto grp = build_preset("parabolic_pair", {3.0});
    CHECK(enumerate_elements(grp, 0).size() == 1);
    CHECK(enumerate_elements(grp, 1).size() == 5);
    CHECK(enumerate_elements(grp, 2).size() == 17);
    const auto els = enumerate_elements(grp, 8);
    std::map<std::size_t, long> by_len;
    std::set<Word> seen;
    for (const auto& e : els) {
        ++by_len[e.word.size()];
        CHECK(reduce(e.word) == e.word);
        seen.insert(e.word);
    }
    CHECK(seen.size() == els.size());
    for (int n = 0; n <= 8; ++n) CHECK(by_len[n] == reduced_count(2, n));
    CHECK_THROWS_AS(enumerate_elements(grp, 17), DomainError);
    CHECK(enumerate_elements(build_preset("cyclic_parabolic", {}), 5).size() == 11);
}

TEST_CASE("enumeration closure and word/matrix consistency") {
    const auto grp = build_preset("schottky_torus", {4.0, 4.0});
    const int cap = 5;
    const auto els = enumerate_elements(grp, cap);
    std::set<Word> words;
    for (const auto& e : els) words.insert(e.word);
    for (const auto& e : els) {
        for (int l : {1, -1, 2, -2}) {
            Word w = e.word;
            w.push_back(l);
            const Word r = reduce(w);
            if (static_cast<int>(r.size()) <= cap) CHECK(words.count(r) == 1);
        }
    }
    const auto deep = enumerate_elements(build_preset("parabolic_pair", {3.0}), 12);
    const auto pp = build_preset("parabolic_pair", {3.0});
    for (std::size_t i = 0; i < deep.size(); i += 997) {
        const Matrix2 direct = pp.word_matrix(deep[i].word);
        const double scale = std::max(1.0, direct.max_abs());
        CHECK(hypgeom::same_element(direct, deep[i].matrix, 1e-9 * scale));
    }
}

TEST_CASE("coset representatives against the brute-force coset-collapse oracle") {
    const auto grp = build_preset("schottky_torus", {4.0, 4.0});
    CHECK(coset_representatives(build_preset("cyclic_hyperbolic", {1.0}), 0, 6).size() == 1);
    const auto one = coset_representatives(grp, 0, 1);
    CHECK(one.size() == 3);
    for (int len = 0; len <= 4; ++len) {
        for (int stab : {0, 1}) {
            std::vector<Word> words;
            Word cur;
            all_words(2, len, cur, words);
            std::set<Word> canon;
            for (const auto& w : words) {
                const Word c = canonical_coset_word(w, stab);
                if (static_cast<int>(c.size()) <= len) canon.insert(c);
            }
            const auto reps = coset_representatives(grp, stab, len);
            std::set<Word> rep_words;
            for (const auto& r : reps) rep_words.insert(r.word);
            CHECK(rep_words.size() == reps.size());
            CHECK(rep_words == canon);
            // stabilizer times representative collapses onto the same coset
            for (const auto& r : reps) {
                for (int l : {stab + 1, -(stab + 1)}) {
                    Word w{l};
                    w.insert(w.end(), r.word.begin(), r.word.end());
                    CHECK(canonical_coset_word(w, stab) == r.word);
                }
            }
        }
    }
}

TEST_CASE("freeness spot check") {
    const auto rep = freeness_spot_check(build_preset("parabolic_pair", {3.0}), 8);
    CHECK(rep.elements == 1 + 2 * (6561 - 1));
    CHECK(rep.distinct);
    CHECK(rep.min_separation > 1e-6);
    // a relation: the same generator listed twice
    const auto twice = FuchsianGroup::from_matrices({{1, 3, 0, 1}, {1, 3, 0, 1}}, true);
    CHECK_FALSE(freeness_spot_check(twice, 2).distinct);
}

TEST_CASE("orbital counts") {
    for (double l : {0.7, 1.0, 2.5}) {
        const auto grp = build_preset("cyclic_hyperbolic", {l});
        for (double R : {0.0, 0.5, 3.3, 10.0, 17.2}) {
            const auto c = orbital_count(grp, PointH::make(0, 1), R, 64);
            CHECK(c.count == 2 * long(std::floor(R / l)) + 1);
            CHECK(c.truncation_ok);
        }
    }
    for (const std::string name : {"parabolic_pair", "schottky_torus"}) {
        const auto grp = name == "parabolic_pair" ? build_preset(name, {3.0}) : build_preset(name, {4.0, 4.0});
        CHECK(orbital_count(grp, PointH::make(0.1, 1.2), 0.0, 8).count == 1);
    }
    // parabolic: d(i, i + n) = 2 asinh(|n|/2)
    const auto par = build_preset("cyclic_parabolic", {});
    for (double R : {1.0, 5.0, 12.0}) {
        const long n = long(std::floor(2 * std::sinh(R / 2) + 1e-12));
        CHECK(orbital_count(par, PointH::make(0, 1), R, 4096).count == 2 * n + 1);
    }
    // counts are non-decreasing in R and pruning does not change them
    const auto pp = build_preset("parabolic_pair", {3.0});
    const std::vector<double> radii{1, 2, 3, 4, 5, 6, 7, 8};
    const auto counts = orbital_counts(pp, PointH::make(0.1, 1.1), radii, 40);
    for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i].count >= counts[i - 1].count);
    const auto els = enumerate_elements(pp, 9);
    long brute = 0;
    const cplx z{0.1, 1.1};
    for (const auto& e : els)
        if (hypgeom::hyperbolic_distance(hypgeom::act(e.matrix, z), z) <= 5.0) ++brute;
    CHECK(counts[4].count == brute);
    // too-short word budget is flagged
    CHECK_FALSE(orbital_count(par, PointH::make(0, 1), 12.0, 10).truncation_ok);
}

TEST_CASE("exponent of convergence estimates") {
    const std::vector<double> grid{6, 8, 10, 12, 14, 16, 18, 20};
    const auto cyc = estimate_delta(build_preset("cyclic_hyperbolic", {1.0}), PointH::make(0, 1), grid);
    CHECK(cyc.delta <= 0.1);
    const auto par = estimate_delta(build_preset("cyclic_parabolic", {}), PointH::make(0, 1), grid);
    CHECK(std::abs(par.delta - 0.5) < 0.1);
    const auto pp = estimate_delta(build_preset("parabolic_pair", {3.0}), PointH::make(0.1, 1.1),
                                   {4, 5, 6, 7, 8, 9, 10, 11, 12});
    CHECK(pp.delta > 0.5);
    CHECK(pp.delta < 1.0);
    CHECK_THROWS_AS(estimate_delta(build_preset("cyclic_hyperbolic", {1.0}), PointH::make(0, 1), {1, 2, 3}),
                    DomainError);
    CHECK_THROWS_AS(estimate_delta(build_preset("cyclic_hyperbolic", {5.0}), PointH::make(0, 1), {0.1, 0.2, 0.3, 0.4}),
                    ConvergenceError);
}

TEST_CASE("disjoint simple geodesics satisfy the collar separation bound") {
    for (double t : {3.0, 4.0, 5.0}) {
        const auto grp = build_preset("schottky_torus", {t, t});
        const Matrix2 A = grp.generator(0).matrix, B = grp.generator(1).matrix;
        const Matrix2 comm = A * B * A.inverse() * B.inverse();
        const auto axA = hypgeom::axis(A);
        const double l = hypgeom::translation_length(A).length;
        int pairs = 0;
        for (const auto& e : enumerate_elements(grp, 2)) {
            const Matrix2 c = e.matrix * comm * e.matrix.inverse();
            const auto sep = hypgeom::geodesic_separation(axA, hypgeom::axis(c));
            REQUIRE(sep.has_value());
            CHECK(std::cosh(*sep) >= 1.0 / std::tanh(l / 2));
            ++pairs;
        }
        CHECK(pairs == 17);
    }
}

TEST_CASE("cusps and axis normalizers") {
    const auto pp = build_preset("parabolic_pair", {3.0});
    for (int gen : {0, 1}) {
        const Cusp c = cusp_of(pp, gen);
        const Matrix2 t = c.scaling.inverse() * pp.generator(gen).matrix * c.scaling;
        const Matrix2 unit{1.0, double(c.sign), 0.0, 1.0};
        CHECK(hypgeom::same_element(t, unit, 1e-12));
    }
    CHECK(cusp_of(pp, 0).sign == 1);
    CHECK_THROWS_AS(cusp_of(build_preset("cyclic_hyperbolic", {1.0}), 0), DomainError);

    const auto st = build_preset("schottky_torus", {4.0, 4.0});
    const Matrix2 C = axis_normalizer(st, 1);
    const Matrix2 d = C.inverse() * st.generator(1).matrix * C;
    CHECK(std::abs(d.b) < 1e-12);
    CHECK(std::abs(d.c) < 1e-12);
    CHECK(d.a / d.d == doctest::Approx(std::exp(4.0)).epsilon(1e-12));
    CHECK_THROWS_AS(axis_normalizer(pp, 0), DomainError);
}
