#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace forge {

// A letter is +(i+1) for generator i, -(i+1) for its inverse.
// Generator indices follow the fixed order a1, b1, a2, b2, ... for surface
// groups (even index = a, odd index = b) and s1, s2, ... for cover groups.
using Letter = std::int8_t;

using Word = std::vector<Letter>;

inline int letter_index(Letter v) { return (v > 0 ? v : -v) - 1; }
inline Letter letter_inverse(Letter v) { return static_cast<Letter>(-v); }

// Rank for lexicographic comparisons: all positive letters (in generator
// order) precede all inverse letters.
inline int letter_rank(Letter v, int n_gens) {
    return v > 0 ? letter_index(v) : n_gens + letter_index(v);
}

Word inverse(const Word& w);
Word concat(const Word& u, const Word& v);
Word power(const Word& u, int k);  // k may be negative
Word rotate(const Word& w, int s); // cyclic rotation, w[s] becomes first

// Free reduction: cancel adjacent x x^-1 pairs until none remain.
Word free_reduce(const Word& w);
// Additionally cancel first-against-last cyclically.
Word cyclic_reduce(const Word& w);

bool is_freely_reduced(const Word& w);
bool is_cyclically_reduced(const Word& w);

// Lexicographic comparison in the fixed letter order; compares by length
// first only when shortlex = true.
bool word_less(const Word& u, const Word& v, int n_gens, bool shortlex = false);

// Least rotation of the cyclic word (rotations only, not inverses).
Word least_rotation(const Word& w, int n_gens);

// Smallest s > 0 with rotate(w, s) == w; equals w.size() iff aperiodic.
int cyclic_period(const Word& w);

}  // namespace forge
