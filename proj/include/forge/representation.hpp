#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "forge/halfplane.hpp"
#include "forge/presentation.hpp"

namespace forge {

// Matrix product of a long word, kept in the form exp(log_scale) * unit with
// the unit factor renormalized into a bounded Frobenius band. Traces, gaps
// and lengths of words far beyond double range stay computable.
struct StabilizedProduct {
    Eigen::MatrixXcd unit;
    double log_scale = 0.0;

    int rank() const { return static_cast<int>(unit.rows()); }
    static StabilizedProduct identity(int rank);
    void multiply_right(const Eigen::MatrixXcd& M);

    // log |tr product| (-inf if the unit trace vanishes)
    double log_abs_trace() const;
    // sum log sigma_i(unit) + rank * log_scale; ~0 for unimodular products
    double log_det_defect() const;
};

struct Representation {
    std::string kind;          // fuchsian | restricted | pinched | induced | perturbed
    int n_gens = 0;
    int rank = 0;
    int genus = 0;             // abstract surface genus of the acting group, 0 = n/a
    std::vector<Eigen::MatrixXcd> images;      // generator images
    std::vector<Eigen::MatrixXcd> inverses;    // cached inverses
    double relator_residual = 0.0;

    const Eigen::MatrixXcd& image_of(Letter v) const;
    void rebuild_inverses();

    // plain product (use evaluate() for long words)
    Eigen::MatrixXcd product(const Word& w) const;

    // max sup-norm distance of relator images from the identity
    double relator_defect(const Presentation& P) const;

    bool is_real(double tol = 1e-12) const;
    // rank-2 real images as half-plane matrices, indexed by letter rank
    // (positives then inverses)
    std::vector<M2<double>> real_m2() const;
};

// Discrete faithful representation of the genus-g surface group built from
// the regular 4g-gon side pairings; relator image is +I to rounding error and
// all generators share trace 2 + 2 cos(pi/2g) > 2.
Representation fuchsian(const Presentation& P);

StabilizedProduct evaluate(const Representation& rep, const Word& w);

// 2 * arccosh(|tr|/2) for |tr| > 2, else 0; overflow-safe for long words.
double stable_length_proxy(const Representation& rep, const Word& w);

// Independent entrywise noise of amplitude eps on every generator image,
// renormalized back to det 1. Deterministic in seed.
Representation perturb(const Representation& rep, double eps, std::uint64_t seed);

struct JorgensenReport {
    struct Pair {
        int i = 0, j = 0;
        double value = 0.0;  // |tr^2(u) - 4| + |tr([u,v]) - 2|
    };
    std::vector<Pair> pairs;       // all generator pairs
    std::vector<Pair> violations;  // value < 1 (discreteness certainly fails
                                   // for nonelementary <u,v>)
    double min_value = 0.0;
};

// Heuristic discreteness screen on generator pairs; rank-2 only.
JorgensenReport jorgensen_check(const Representation& rep);

}  // namespace forge
