#pragma once

#include <optional>
#include <vector>

#include "forge/presentation.hpp"
#include "forge/representation.hpp"
#include "forge/word.hpp"

namespace forge {

// Degree-d cyclic cover data. Generators act on the cosets {0,...,d-1} of
// the kernel of a homomorphism onto Z/d by adding their residue, so the left
// and right coset actions coincide and the coset of a word is just the sum
// of its letter residues mod d. The transversal stores the shortlex-least
// representative of each coset; breadth-first construction makes it
// prefix-closed, i.e. a Schreier transversal.
struct CosetTable {
    int degree = 0;
    std::vector<int> hom;           // residue of each positive generator
    std::vector<Word> transversal;  // transversal[0] is the empty word

    int act(Letter v, int coset) const;
    int act_word(const Word& w, int coset) const;
};

// Builds the coset table for the cyclic cover determined by hom. The
// residues must generate Z/d (otherwise the cover would be disconnected).
CosetTable cyclic_cover(const Presentation& P, const std::vector<int>& hom,
                        int degree);

// A word lies in the cover subgroup iff it fixes the base coset.
bool membership(const CosetTable& T, const Word& w);

// Presentation of the cover subgroup on Schreier generators, reduced to
// surface-group shape: 2*genus_cover generators and a single relator, where
// genus_cover = d*(genus_base - 1) + 1.
struct CoverPresentation {
    int degree = 0;
    int genus_base = 0;
    int genus_cover = 0;
    CosetTable table;
    Presentation cover;               // generators s1, s2, ..., one relator
    std::vector<Word> schreier_words; // base-group word of each cover generator

    // edge_words[coset][gen] is the cover-letter word emitted when the base
    // generator is read at that coset. Spanning-tree edges emit nothing and
    // generators eliminated during the reduction emit their substitution.
    std::vector<std::vector<Word>> edge_words;
};

CoverPresentation schreier_presentation(const CosetTable& T,
                                        const Presentation& P);

// Rewrites a member word of the base group as a word in the cover
// generators by scanning it through the coset table. The result multiplied
// out through schreier_words equals the input in the base group.
Word rewrite(const CoverPresentation& C, const Word& w);

// Substitutes each cover letter by its base-group word; left inverse of
// rewrite up to triviality in the base group.
Word unrewrite(const CoverPresentation& C, const Word& s);

// Restriction of a base-group representation to the cover subgroup: the
// cover generators map to the products of their Schreier words.
Representation restrict(const Representation& rho, const CoverPresentation& C);

// Induced representation of the base group from a representation of the
// cover subgroup; rank multiplies by the degree. Block (j,i) of a generator
// image is the cover representation evaluated on the rewritten word
// t_j^-1 g t_i where j is the coset the generator sends i to, all other
// blocks in column i vanish.
Representation induce(const Representation& rho_prime,
                      const CoverPresentation& C, const Presentation& P);

// Search result for a curve whose class has p+1 double points downstairs
// but whose lift through the cover determined by hom is simple.
struct CoverCurveWitness {
    std::vector<int> hom;
    CosetTable table;
    Word curve;
    int si_base = 0;
    int si_cover = 0;
};

// Scans homomorphisms in lexicographic order and, inside each cover, conjugacy
// classes in canonical order (primitive classes that lie in the kernel, with
// p+1 double points downstairs) until one has a simple lift. Returns nullopt
// when no witness exists within the length bound.
std::optional<CoverCurveWitness> find_cover_curve(const Presentation& P,
                                                  const Representation& F,
                                                  int degree, int p,
                                                  int max_len, int radius = 64);

}  // namespace forge
