#pragma once

#include <string>
#include <vector>

#include "forge/word.hpp"

namespace forge {

// A finite presentation with named generators. The standard closed-surface
// presentation < a1,b1,...,ag,bg | [a1,b1]...[ag,bg] > additionally carries
// its symmetrized relator table (all cyclic rotations of the relator and of
// its inverse) and small-cancellation data used by Dehn reduction.
struct Presentation {
    int n_gens = 0;
    std::vector<std::string> names;  // size n_gens
    std::vector<Word> relators;

    // Surface-specific data; genus == 0 for generic (e.g. cover) presentations.
    int genus = 0;
    std::vector<Word> symmetrized;
    int max_piece = -1;  // longest common prefix over distinct symmetrized relators

    // Standard presentation of the closed orientable surface of genus g >= 2.
    static Presentation surface(int g);

    // Generic presentation (no symmetrized/Dehn machinery).
    static Presentation generic(std::vector<std::string> names,
                                std::vector<Word> relators);

    const Word& relator() const;

    // Letter <-> token. Tokens are "a1", "b2^-1", ...; words are
    // space-separated token strings ("" = identity).
    std::string letter_token(Letter v) const;
    Letter token_letter(const std::string& tok) const;
    std::string format(const Word& w) const;
    Word parse(const std::string& text) const;

    Letter letter(const std::string& tok) const { return token_letter(tok); }
    Word gen(int index) const { return Word{static_cast<Letter>(index + 1)}; }

    // True iff every piece is shorter than |relator|/6 (metric small
    // cancellation condition); always true for surface groups of genus >= 2.
    bool satisfies_c6() const;

    // index of the unique symmetrized relator with prefix (x, y), or -1.
    int sym_with_prefix(Letter x, Letter y) const;

  private:
    std::vector<int> prefix_table_;  // (2n)^2 entries, -1 = none
    void build_symmetrized();
};

}  // namespace forge
