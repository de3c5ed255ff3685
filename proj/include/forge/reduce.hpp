#pragma once

#include "forge/presentation.hpp"
#include "forge/word.hpp"

namespace forge {

// Dehn's algorithm: repeatedly free-reduce and replace any factor that covers
// more than half of a symmetrized relator by the inverse of the complement.
// For the C'(1/6) surface presentation the result is empty iff the word is
// trivial in the group.
Word dehn_reduce(const Presentation& P, const Word& w);

bool is_trivial(const Presentation& P, const Word& w);

// Cyclic version: reductions may wrap around the seam. The result is
// cyclically freely reduced and admits no cyclic factor covering more than
// half a symmetrized relator. Empty result = trivial conjugacy class.
Word cyclic_dehn_reduce(const Presentation& P, const Word& w);

// Canonical conjugacy-class representative: lexicographically least word over
// the closure of the cyclic word under rotation, inversion, and half-relator
// swaps (a cyclic factor equal to exactly half a symmetrized relator may be
// traded for the inverse of the complementary half at equal length).
// Orientation and free homotopy direction are both quotiented out.
Word canonical_class(const Presentation& P, const Word& w);

// All same-length cyclic words reachable from w by half-relator swaps
// (each returned in least-rotation form; includes w itself).
std::vector<Word> half_swap_closure(const Presentation& P, const Word& w);

struct PrimitiveDecomposition {
    Word root;  // canonical class of the primitive root
    int power = 1;
};

// Detects proper-power classes by cyclic periodicity of every member of the
// canonical closure. Valid for canonical (cyclically Dehn-reduced) inputs.
PrimitiveDecomposition primitive_root(const Presentation& P, const Word& canonical);

}  // namespace forge
