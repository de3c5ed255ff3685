#include "forge/covers.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <string>

#include "forge/core.hpp"
#include "forge/curves.hpp"

namespace forge {

int CosetTable::act(Letter v, int coset) const {
    int r = hom[static_cast<std::size_t>(letter_index(v))];
    int j = v > 0 ? coset + r : coset - r;
    j %= degree;
    return j < 0 ? j + degree : j;
}

int CosetTable::act_word(const Word& w, int coset) const {
    for (Letter v : w) coset = act(v, coset);
    return coset;
}

CosetTable cyclic_cover(const Presentation& P, const std::vector<int>& hom,
                        int degree) {
    if (degree < 2) throw usage_error("cyclic_cover: degree must be at least 2");
    if (static_cast<int>(hom.size()) != P.n_gens)
        throw usage_error("cyclic_cover: need one residue per generator");
    CosetTable T;
    T.degree = degree;
    T.hom.reserve(hom.size());
    for (int r : hom) {
        r %= degree;
        T.hom.push_back(r < 0 ? r + degree : r);
    }

    // Shortlex BFS from the trivial coset: expanding letters in rank order
    // from a FIFO queue reaches every coset along its shortlex-least word,
    // and the resulting transversal is prefix-closed.
    T.transversal.assign(static_cast<std::size_t>(degree), Word{});
    std::vector<char> seen(static_cast<std::size_t>(degree), 0);
    seen[0] = 1;
    int found = 1;
    std::deque<int> queue{0};
    while (!queue.empty() && found < degree) {
        int i = queue.front();
        queue.pop_front();
        for (int r = 0; r < 2 * P.n_gens; ++r) {
            Letter v = r < P.n_gens ? static_cast<Letter>(r + 1)
                                    : static_cast<Letter>(-(r - P.n_gens + 1));
            int j = T.act(v, i);
            if (seen[static_cast<std::size_t>(j)]) continue;
            seen[static_cast<std::size_t>(j)] = 1;
            T.transversal[static_cast<std::size_t>(j)] =
                concat(T.transversal[static_cast<std::size_t>(i)], Word{v});
            ++found;
            queue.push_back(j);
        }
    }
    if (found < degree)
        throw usage_error("cyclic_cover: residues do not generate Z/d");
    return T;
}

bool membership(const CosetTable& T, const Word& w) {
    return T.act_word(w, 0) == 0;
}

namespace {

// The raw Schreier alphabet has degree * n_gens letters, which can exceed
// the signed-byte word alphabet, so the reduction below runs on int words:
// letter +-(raw+1) stands for the Schreier generator of edge raw = i*n + g.
using RawWord = std::vector<int>;

RawWord inverse_raw(const RawWord& w) {
    RawWord out(w.rbegin(), w.rend());
    for (int& v : out) v = -v;
    return out;
}

void append_reduced(RawWord& out, int v) {
    if (!out.empty() && out.back() == -v)
        out.pop_back();
    else
        out.push_back(v);
}

// Replaces every occurrence of the generator `target` by `sol` (and of its
// inverse by the inverse of `sol`), freely reducing on the fly.
RawWord substitute_raw(const RawWord& w, int target, const RawWord& sol) {
    RawWord out;
    out.reserve(w.size());
    for (int v : w) {
        if (std::abs(v) - 1 != target) {
            append_reduced(out, v);
        } else if (v > 0) {
            for (int x : sol) append_reduced(out, x);
        } else {
            for (auto it = sol.rbegin(); it != sol.rend(); ++it)
                append_reduced(out, -*it);
        }
    }
    return out;
}

}  // namespace

CoverPresentation schreier_presentation(const CosetTable& T,
                                        const Presentation& P) {
    CoverPresentation C;
    C.degree = T.degree;
    C.genus_base = P.genus;
    C.genus_cover = T.degree * (P.genus - 1) + 1;
    C.table = T;

    const int d = T.degree;
    const int n = P.n_gens;
    const int nraw = d * n;

    // Gamma-word of the raw Schreier generator of edge (i, g): t_i g t_j^-1
    // with j the coset the edge lands on. Spanning-tree edges reduce to the
    // empty word and their generators are trivial from the start.
    std::vector<Word> raw_word(static_cast<std::size_t>(nraw));
    std::vector<char> tree(static_cast<std::size_t>(nraw), 0);
    int trivial = 0;
    for (int i = 0; i < d; ++i) {
        for (int g = 0; g < n; ++g) {
            int j = T.act(static_cast<Letter>(g + 1), i);
            Word w = concat(T.transversal[static_cast<std::size_t>(i)],
                            P.gen(g));
            w = free_reduce(
                concat(w, inverse(T.transversal[static_cast<std::size_t>(j)])));
            std::size_t raw = static_cast<std::size_t>(i * n + g);
            raw_word[raw] = w;
            if (w.empty()) {
                tree[raw] = 1;
                ++trivial;
            }
        }
    }
    if (trivial != d - 1)
        throw domain_error(
            "schreier_presentation: transversal coincidences broke the "
            "spanning-tree count");

    // Rewrite the surface relator based at every coset. Scanning a word
    // through the table and emitting the Schreier letter of each traversed
    // edge telescopes to t_i R t_i^-1, so each scan yields a cover relator.
    auto scan = [&](const Word& w, int start) {
        RawWord out;
        int i = start;
        for (Letter v : w) {
            if (v > 0) {
                std::size_t raw = static_cast<std::size_t>(i * n + letter_index(v));
                if (!tree[raw]) append_reduced(out, static_cast<int>(raw) + 1);
                i = T.act(v, i);
            } else {
                int j = T.act(v, i);
                std::size_t raw = static_cast<std::size_t>(j * n + letter_index(v));
                if (!tree[raw]) append_reduced(out, -(static_cast<int>(raw) + 1));
                i = j;
            }
        }
        if (i != start)
            throw domain_error("schreier_presentation: relator scan left its coset");
        return out;
    };
    Word R = P.relator();
    std::vector<RawWord> rels;
    rels.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) rels.push_back(scan(R, i));

    // Tietze reduction: while more than one relator survives, pick the
    // first relator holding a generator exactly once, solve for it, and
    // substitute everywhere. Each step removes one relator and one
    // generator, ending at 2*genus_cover generators and a single relator.
    std::vector<char> alive(static_cast<std::size_t>(nraw), 1);
    std::vector<RawWord> subst(static_cast<std::size_t>(nraw));
    for (int r = 0; r < nraw; ++r)
        if (tree[static_cast<std::size_t>(r)]) alive[static_cast<std::size_t>(r)] = 0;

    while (rels.size() > 1) {
        int ri = -1, target = -1;
        std::size_t pos = 0;
        for (std::size_t r = 0; r < rels.size() && ri < 0; ++r) {
            for (std::size_t t = 0; t < rels[r].size(); ++t) {
                int raw = std::abs(rels[r][t]) - 1;
                int occ = 0;
                for (int x : rels[r])
                    if (std::abs(x) - 1 == raw) ++occ;
                if (occ == 1) {
                    ri = static_cast<int>(r);
                    target = raw;
                    pos = t;
                    break;
                }
            }
        }
        if (ri < 0)
            throw domain_error(
                "schreier_presentation: no relator exposes a generator exactly "
                "once; reduction stalled");

        const RawWord& rel = rels[static_cast<std::size_t>(ri)];
        RawWord rot(rel.begin() + static_cast<std::ptrdiff_t>(pos), rel.end());
        rot.insert(rot.end(), rel.begin(),
                   rel.begin() + static_cast<std::ptrdiff_t>(pos));
        RawWord tail(rot.begin() + 1, rot.end());
        RawWord sol = rot.front() > 0 ? inverse_raw(tail) : tail;

        rels.erase(rels.begin() + ri);
        for (RawWord& r : rels) r = substitute_raw(r, target, sol);
        for (int j = 0; j < nraw; ++j) {
            std::size_t sj = static_cast<std::size_t>(j);
            if (!alive[sj] && !tree[sj])
                subst[sj] = substitute_raw(subst[sj], target, sol);
        }
        alive[static_cast<std::size_t>(target)] = 0;
        subst[static_cast<std::size_t>(target)] = sol;
    }

    // Number the surviving generators in raw order and expand every raw
    // word into the final alphabet.
    std::vector<int> fin(static_cast<std::size_t>(nraw), -1);
    int rank = 0;
    for (int r = 0; r < nraw; ++r)
        if (alive[static_cast<std::size_t>(r)]) fin[static_cast<std::size_t>(r)] = rank++;
    if (rank != 2 * C.genus_cover)
        throw domain_error("schreier_presentation: reduced rank is not 2*genus_cover");
    if (rank > 127)
        throw domain_error("schreier_presentation: cover rank exceeds the letter alphabet");

    auto expand = [&](const RawWord& w) {
        Word out;
        for (int v : w) {
            std::size_t raw = static_cast<std::size_t>(std::abs(v) - 1);
            int f = fin[raw];
            if (f < 0)
                throw domain_error("schreier_presentation: eliminated generator leaked");
            Letter l = static_cast<Letter>(f + 1);
            out.push_back(v > 0 ? l : static_cast<Letter>(-l));
        }
        return free_reduce(out);
    };
    auto expand_edge = [&](int raw) {
        std::size_t sraw = static_cast<std::size_t>(raw);
        if (alive[sraw]) return expand(RawWord{raw + 1});
        if (tree[sraw]) return Word{};
        return expand(subst[sraw]);
    };

    C.schreier_words.clear();
    std::vector<std::string> names;
    for (int r = 0; r < nraw; ++r) {
        if (!alive[static_cast<std::size_t>(r)]) continue;
        C.schreier_words.push_back(raw_word[static_cast<std::size_t>(r)]);
        names.push_back("s" + std::to_string(C.schreier_words.size()));
    }
    C.cover = Presentation::generic(names, {expand(rels.front())});

    C.edge_words.assign(static_cast<std::size_t>(d),
                        std::vector<Word>(static_cast<std::size_t>(n)));
    for (int i = 0; i < d; ++i)
        for (int g = 0; g < n; ++g)
            C.edge_words[static_cast<std::size_t>(i)][static_cast<std::size_t>(g)] =
                expand_edge(i * n + g);
    return C;
}

Word rewrite(const CoverPresentation& C, const Word& w) {
    if (!membership(C.table, w))
        throw usage_error("rewrite: word does not lie in the cover subgroup");
    Word out;
    int i = 0;
    for (Letter v : w) {
        if (v > 0) {
            const Word& e = C.edge_words[static_cast<std::size_t>(i)]
                                        [static_cast<std::size_t>(letter_index(v))];
            out.insert(out.end(), e.begin(), e.end());
            i = C.table.act(v, i);
        } else {
            int j = C.table.act(v, i);
            const Word& e = C.edge_words[static_cast<std::size_t>(j)]
                                        [static_cast<std::size_t>(letter_index(v))];
            for (auto it = e.rbegin(); it != e.rend(); ++it)
                out.push_back(static_cast<Letter>(-*it));
            i = j;
        }
    }
    return free_reduce(out);
}

Word unrewrite(const CoverPresentation& C, const Word& s) {
    Word out;
    for (Letter v : s) {
        const Word& g = C.schreier_words[static_cast<std::size_t>(letter_index(v))];
        if (v > 0) {
            out.insert(out.end(), g.begin(), g.end());
        } else {
            for (auto it = g.rbegin(); it != g.rend(); ++it)
                out.push_back(static_cast<Letter>(-*it));
        }
    }
    return free_reduce(out);
}

Representation restrict(const Representation& rho, const CoverPresentation& C) {
    Representation out;
    out.kind = "restricted";
    out.n_gens = C.cover.n_gens;
    out.rank = rho.rank;
    out.genus = C.genus_cover;
    out.images.reserve(C.schreier_words.size());
    for (const Word& sw : C.schreier_words) out.images.push_back(rho.product(sw));
    out.rebuild_inverses();
    out.relator_residual = out.relator_defect(C.cover);
    if (!(out.relator_residual <= 1e-8))
        throw domain_error("restrict: cover relator residual exceeds 1e-8");
    return out;
}

Representation induce(const Representation& rho_prime,
                      const CoverPresentation& C, const Presentation& P) {
    const int d = C.degree;
    const int m = rho_prime.rank;
    Representation out;
    out.kind = "induced";
    out.n_gens = P.n_gens;
    out.rank = m * d;
    out.genus = P.genus;
    out.images.reserve(static_cast<std::size_t>(P.n_gens));
    for (int g = 0; g < P.n_gens; ++g) {
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(m * d, m * d);
        for (int i = 0; i < d; ++i) {
            int j = C.table.act(static_cast<Letter>(g + 1), i);
            Word u = free_reduce(concat(
                inverse(C.table.transversal[static_cast<std::size_t>(j)]),
                concat(P.gen(g), C.table.transversal[static_cast<std::size_t>(i)])));
            M.block(j * m, i * m, m, m) = rho_prime.product(rewrite(C, u));
        }
        std::complex<double> det = M.determinant();
        if (std::abs(det - std::complex<double>(1.0, 0.0)) > 1e-12)
            throw domain_error("induce: induced generator determinant drifted off 1");
        out.images.push_back(M);
    }
    out.rebuild_inverses();
    out.relator_residual = out.relator_defect(P);
    if (!(out.relator_residual <= 1e-8))
        throw domain_error("induce: relator residual exceeds 1e-8");
    return out;
}

std::optional<CoverCurveWitness> find_cover_curve(const Presentation& P,
                                                  const Representation& F,
                                                  int degree, int p, int max_len,
                                                  int radius) {
    if (degree < 2) throw usage_error("find_cover_curve: degree must be at least 2");
    if (p < 0) throw usage_error("find_cover_curve: p must be non-negative");

    // The base-class double-point counts do not depend on the cover, so
    // they are shared across all homomorphisms.
    std::map<Word, int> si_cache;
    auto base_si = [&](const Word& w) {
        auto it = si_cache.find(w);
        if (it != si_cache.end()) return it->second;
        SelfIntersectionResult r = self_intersection(P, F, w, radius);
        if (!r.saturated)
            throw domain_error("find_cover_curve: unsaturated translate count");
        si_cache.emplace(w, r.si);
        return r.si;
    };

    // Homomorphisms in lexicographic order over residue vectors, the first
    // generator most significant; the zero map is not a cover and residues
    // that fail to generate Z/d give disconnected covers, so both are
    // skipped.
    const int n = P.n_gens;
    std::vector<int> hom(static_cast<std::size_t>(n), 0);
    auto advance = [&]() {
        for (int i = n - 1; i >= 0; --i) {
            std::size_t si = static_cast<std::size_t>(i);
            if (++hom[si] < degree) return true;
            hom[si] = 0;
        }
        return false;
    };
    while (advance()) {
        int g = degree;
        for (int r : hom) g = std::gcd(g, r);
        if (g != 1) continue;

        CosetTable T = cyclic_cover(P, hom, degree);
        std::optional<CoverCurveWitness> hit;
        visit_classes(P, max_len, [&](const CurveClass& cc) {
            if (hit || !cc.primitive) return;
            if (!membership(T, cc.word)) return;
            if (base_si(cc.word) != p + 1) return;
            SelfIntersectionResult up =
                self_intersection_filtered(P, F, cc.word, radius, T.hom, degree);
            if (!up.saturated)
                throw domain_error("find_cover_curve: unsaturated translate count");
            if (up.si != 0) return;
            CoverCurveWitness w;
            w.hom = T.hom;
            w.table = T;
            w.curve = cc.word;
            w.si_base = p + 1;
            w.si_cover = 0;
            hit = std::move(w);
        });
        if (hit) return hit;
    }
    return std::nullopt;
}

}  // namespace forge
