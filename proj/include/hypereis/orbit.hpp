#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hypereis/group.hpp"

namespace hypereis::group {

// How orbit sums are cut into shells.
//   Letters:   one shell per letter (literal word length).
//   Syllables: one shell per syllable; a syllable is a single letter of a hyperbolic
//              generator or a whole power P^n of a parabolic generator, summed over n
//              by explicit terms plus an Euler-Maclaurin tail.
enum class ShellMode { Letters, Syllables };

struct TruncationPolicy {
    ShellMode mode = ShellMode::Syllables;
    int max_shells = 16;
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    // Sum exactly max_shells shells with no stopping or pruning, so the term set
    // does not depend on the evaluation point.
    bool fixed_depth = false;
    // Nodes whose weighted term is below prune_rel * (running scale) are not expanded.
    double prune_rel = 1e-13;
    // Hard cap on evaluated terms; reaching it ends the sum unconverged.
    long max_terms = 50'000'000;
    int outer_explicit = 32;
    int outer_quad = 32;
    int inner_explicit = 8;
    int inner_quad = 6;
    // Half-plane preconditions are checked unless relaxed.
    bool check_region = true;
    std::optional<double> delta_hint;
    // Throw ConvergenceError when the stopping rule is not met at the cap.
    bool require_convergence = true;
};

// Nodes and weights approximating sum_{n >= 1} f(n) for smooth, decaying f.
struct ExponentRule {
    std::vector<double> t;
    std::vector<double> w;
};

ExponentRule exponent_rule(int explicit_terms, int quad_nodes);

// Fractional power of a parabolic element, P^t = I + t (P - I) with tr P = 2.
Matrix2 parabolic_power(const Matrix2& p, double t);

struct OrbitSpec {
    // Sum over <g_k>\G: the outermost syllable may not be generator k.
    std::optional<int> coset_of;
};

template <class V>
struct OrbitResult {
    V total{};
    std::vector<V> partials;             // running total after each shell (shell 0 = identity)
    std::vector<double> shell_magnitude; // sum of |weighted term| per shell
    long terms = 0;
    int shells = 0;                      // deepest shell summed
    bool converged = false;
    bool monotone_tail = true;
    double tail = 0.0;                   // magnitude sum of the last shell
    bool budget_exhausted = false;
};

namespace detail {

struct Node {
    Matrix2 m;
    double w = 1.0;
    int last_gen = -1;
    int last_sign = 0;
};

struct Child {
    Matrix2 step;
    double w;
    int gen;
    int sign;
};

// Children steps available after a syllable (gen, sign) at a given depth.
class StepTable {
public:
    StepTable(const FuchsianGroup& g, const TruncationPolicy& pol);
    const std::vector<Child>& steps(int depth) const { return depth <= 1 ? outer_ : inner_; }

private:
    std::vector<Child> outer_, inner_;
};

bool allowed(const FuchsianGroup& g, ShellMode mode, const Node& parent, const Child& c);

}  // namespace detail

// Sum of w_gamma * term(gamma) over the orbit tree. Deterministic: shells are summed in a
// fixed order, nodes within a shell in generation order.
template <class V, class Term, class Mag>
OrbitResult<V> sum_orbit(const FuchsianGroup& g, const OrbitSpec& spec, const TruncationPolicy& pol,
                         Term&& term, Mag&& mag) {
    OrbitResult<V> res;
    detail::StepTable table(g, pol);

    V first = term(Matrix2::identity());
    res.total = first;
    res.partials.push_back(res.total);
    const double m0 = mag(first);
    res.shell_magnitude.push_back(m0);
    res.terms = 1;
    double scale = m0;

    std::vector<detail::Node> frontier{detail::Node{}};
    std::vector<detail::Node> next;
    int below = 0;
    for (int depth = 1; depth <= pol.max_shells && !frontier.empty(); ++depth) {
        V shell{};
        double shell_mag = 0.0;
        next.clear();
        const auto& steps = table.steps(depth);
        if (res.terms + static_cast<long>(frontier.size() * steps.size()) > pol.max_terms) {
            res.budget_exhausted = true;
            break;
        }
        for (const auto& node : frontier) {
            for (const auto& c : steps) {
                if (depth == 1 && spec.coset_of && c.gen == *spec.coset_of) continue;
                if (!detail::allowed(g, pol.mode, node, c)) continue;
                detail::Node child{node.m * c.step, node.w * c.w, c.gen, c.sign};
                V v = term(child.m);
                const double mv = std::abs(child.w) * mag(v);
                shell += v * child.w;
                shell_mag += mv;
                ++res.terms;
                if (pol.fixed_depth || mv >= pol.prune_rel * scale) next.push_back(child);
            }
        }
        res.total += shell;
        res.partials.push_back(res.total);
        res.shell_magnitude.push_back(shell_mag);
        res.shells = depth;
        res.tail = shell_mag;
        scale = std::max(scale, mag(res.total));
        std::swap(frontier, next);
        if (pol.fixed_depth) continue;
        if (shell_mag <= pol.abs_tol + pol.rel_tol * mag(res.total)) {
            if (++below >= 2) {
                res.converged = true;
                break;
            }
        } else {
            below = 0;
        }
    }
    if (frontier.empty() && !res.converged) {
        // finite orbit tree (e.g. nothing left to expand): exact sum
        res.converged = true;
        res.tail = 0.0;
    }
    if (pol.fixed_depth) res.converged = true;
    if (res.budget_exhausted) res.converged = false;
    const auto& sm = res.shell_magnitude;
    if (sm.size() >= 3) res.monotone_tail = sm[sm.size() - 1] <= sm[sm.size() - 2] || res.tail == 0.0;
    return res;
}

// Partial sums by shell of sum_gamma y(gamma z)^q / (1 + |gamma z|)^{2q}.
std::vector<double> counting_bound_partials(const FuchsianGroup& g, const PointH& z, double q,
                                            const TruncationPolicy& pol);

}  // namespace hypereis::group
