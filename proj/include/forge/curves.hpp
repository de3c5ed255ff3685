#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "forge/presentation.hpp"
#include "forge/representation.hpp"
#include "forge/word.hpp"

namespace forge {

struct CurveClass {
    Word word;            // canonical class representative
    int si = -1;          // geometric self-intersection number (-1 = not computed)
    bool primitive = true;
    Word root;            // canonical primitive root (== word when primitive)
};

struct SelfIntersectionResult {
    int si = 0;
    bool saturated = true;  // certified enumeration completed within the radius cap
    int crossing_translates = 0;  // distinct crossing lifts in one period window
    int region_size = 0;          // group elements enumerated in the certified region
    double ell = 0.0;             // translation length of the class
    int escalations = 0;          // multiprecision re-checks taken
};

// Exact self-intersection number of the primitive free homotopy class c under
// the discrete faithful representation F: counts cosets g<c> whose axis
// translate crosses the axis of c with crossing parameter inside one
// fundamental window, divided by two. radius caps the tile-BFS word length.
SelfIntersectionResult self_intersection(const Presentation& P,
                                         const Representation& F, const Word& c,
                                         int radius = 64);

// Same count restricted to translates lying in the kernel of the homomorphism
// onto Z/degree given by hom (one residue per generator): the
// self-intersection number of the lifted curve in the cyclic cover.
SelfIntersectionResult self_intersection_filtered(const Presentation& P,
                                                  const Representation& F,
                                                  const Word& c, int radius,
                                                  const std::vector<int>& hom,
                                                  int degree);

// Streams every conjugacy class with canonical representative of length
// <= max_len (deterministic order: by length, then lexicographic).
void visit_classes(const Presentation& P, int max_len,
                   const std::function<void(const CurveClass&)>& visit);

// Materialized visit_classes (si not computed).
std::vector<CurveClass> enumerate_classes(const Presentation& P, int max_len);

struct StratumSample {
    int genus = 0;
    int p = 0;
    int max_word_length = 0;
    std::vector<CurveClass> classes;  // primitive classes with si == p (complete)
    std::vector<Word> excluded;       // rejected classes (capped witness list)
    std::size_t excluded_total = 0;
    std::size_t scanned_total = 0;    // conjugacy classes examined
};

// Exact partition of the primitive classes of length <= max_len into si == p
// and the rest. A sound fast rejector (verified crossings among rotation-pair
// candidate translates) prunes most classes; every admitted class carries the
// full certified count.
StratumSample stratum_sample(const Presentation& P, const Representation& F,
                             int p, int max_len, int radius = 64,
                             std::size_t excluded_cap = 10000);

struct ArrangementPoint {
    double s = 0.0;      // normalized position along the transversal, in [0,1]
    double theta = 0.0;  // normalized incidence angle, in (0,1)
};

struct AxisArrangement {
    double window_lo = 0.0, window_hi = 0.0;  // transversal parameter range
    std::size_t classes = 0;
    std::vector<ArrangementPoint> points;
};

// Crossing points of the axes of the given classes with a fixed transversal:
// the geodesic orthogonal to the a1-axis at the projection of the base point,
// clipped to the fundamental polygon.
AxisArrangement axis_arrangement(const Presentation& P, const Representation& F,
                                 const std::vector<CurveClass>& classes,
                                 int radius = 64);

struct BoxCountEstimate {
    std::vector<int> grids;
    std::vector<int> occupied;
    double slope = 0.0;      // log-log least squares over the grid sequence
    double r_squared = 0.0;
    std::size_t points = 0;
};

// Box-counting dimension estimate of the arrangement point set on dyadic
// grids 2, 4, ..., max_grid.
BoxCountEstimate bs_dimension_estimate(const AxisArrangement& A, int max_grid);

}  // namespace forge
