#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypereis/hypgeom.hpp"

namespace hypereis::group {

using hypgeom::BoundaryPoint;
using hypgeom::HalfSpace;
using hypgeom::IsometryType;
using hypgeom::Matrix2;
using hypgeom::PointH;

// Letters are signed 1-based generator indices: +(i+1) is generator i, -(i+1) its inverse.
using Word = std::vector<int>;

struct GroupElement {
    Matrix2 matrix;
    Word word;
};

struct Generator {
    Matrix2 matrix;
    IsometryType type;
};

struct PresetInfo {
    std::string name;  // "custom" for user matrices
    std::vector<double> params;
};

// Generator i maps the complement of repel onto the closure of attract.
struct PingPongPair {
    HalfSpace repel;
    HalfSpace attract;
};

struct DiscretenessCertificate {
    std::vector<PingPongPair> domains;  // one pair per generator
    bool validated = false;
    bool user_asserted = false;
    std::vector<std::string> diagnostics;
};

class FuchsianGroup {
public:
    // Generators are validated by a ping-pong certificate built from isometric circles.
    // If validation fails, the group is accepted only when user_asserts_discreteness is set.
    static FuchsianGroup from_matrices(const std::vector<Matrix2>& gens, bool user_asserts_discreteness,
                                       PresetInfo info = {"custom", {}});
    // The identity group; every orbit sum reduces to its identity term.
    static FuchsianGroup trivial();

    int rank() const { return static_cast<int>(gens_.size()); }
    const std::vector<Generator>& generators() const { return gens_; }
    const Generator& generator(int i) const { return gens_.at(i); }
    const PresetInfo& preset() const { return info_; }
    const DiscretenessCertificate& certificate() const { return cert_; }

    Matrix2 letter(int l) const;
    Matrix2 word_matrix(const Word& w) const;

    // Group C^{-1} G C; the certificate is transported along.
    FuchsianGroup conjugated(const Matrix2& C) const;

    // Outside every ping-pong domain (requires a validated certificate).
    bool in_fundamental_domain(hypereis::cplx z) const;

    // Index of a parabolic generator fixing p, if any.
    std::optional<int> parabolic_generator_fixing(const BoundaryPoint& p) const;

private:
    std::vector<Generator> gens_;
    PresetInfo info_;
    DiscretenessCertificate cert_;
};

// Presets: cyclic_hyperbolic(l), cyclic_parabolic, schottky_torus(t, m), parabolic_pair(lambda).
FuchsianGroup build_preset(const std::string& name, const std::vector<double>& params);

// Ping-pong pair for a single non-elliptic generator.
PingPongPair ping_pong_pair(const Matrix2& g);
// Numerical validation on boundary samples; returns diagnostics (empty when valid).
std::vector<std::string> validate_certificate(const std::vector<Generator>& gens,
                                              const std::vector<PingPongPair>& domains);

constexpr int kDefaultWordCap = 16;

std::vector<GroupElement> enumerate_elements(const FuchsianGroup& g, int max_word_len,
                                             int cap = kDefaultWordCap);
std::vector<GroupElement> coset_representatives(const FuchsianGroup& g, int stabilizer_gen,
                                                int max_word_len, int cap = kDefaultWordCap);

// Free reduction of a word.
Word reduce(const Word& w);
// Canonical right-coset form modulo <gen>: leading powers of gen stripped.
Word canonical_coset_word(const Word& w, int stabilizer_gen);

struct FreenessReport {
    bool distinct = true;
    std::size_t elements = 0;
    double min_separation = 0.0;  // smallest entrywise distance between two elements
};

// All reduced words of length <= len map to pairwise distinct PSL(2,R) elements.
FreenessReport freeness_spot_check(const FuchsianGroup& g, int len, double tol = 1e-6);

struct OrbitalCount {
    double radius = 0.0;
    long count = 0;
    bool truncation_ok = true;  // no element within radius lies beyond the word budget
};

// N(R) for each radius, from one pruned enumeration to word length max_word_len.
std::vector<OrbitalCount> orbital_counts(const FuchsianGroup& g, const PointH& z0,
                                         const std::vector<double>& radii, int max_word_len);
OrbitalCount orbital_count(const FuchsianGroup& g, const PointH& z0, double R, int max_word_len);

struct DeltaEstimate {
    double delta = 0.0;
    double fit_residual = 0.0;
    std::vector<OrbitalCount> counts;
};

DeltaEstimate estimate_delta(const FuchsianGroup& g, const PointH& z0, const std::vector<double>& R_grid,
                             int max_word_len = 1 << 20);

struct CountingReport {
    std::vector<double> radii;
    std::vector<long> counts;
    std::vector<double> partial_bound_sums;
    double delta_estimate = 0.0;
    double delta_fit_residual = 0.0;
};

// Cusp normalization: scaling sigma with sigma(inf) = fixed point of generator gen and
// sigma^{-1} gen^{+-1} sigma = (1 1; 0 1). `sign` is +1 if gen itself becomes z -> z+1.
struct Cusp {
    int generator = 0;
    Matrix2 scaling;
    int sign = 1;
};

Cusp cusp_of(const FuchsianGroup& g, int gen);

// Conjugator putting the axis of a hyperbolic generator on the imaginary axis,
// with the generator becoming z -> e^l z.
Matrix2 axis_normalizer(const FuchsianGroup& g, int gen);

}  // namespace hypereis::group
