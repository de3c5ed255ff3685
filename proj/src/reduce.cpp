#include "forge/reduce.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "forge/core.hpp"

namespace forge {

namespace {

void require_surface(const Presentation& P) {
    if (P.symmetrized.empty())
        throw domain_error("Dehn machinery requires a symmetrized presentation");
}

// Longest cyclic factor of w starting at position i that is a prefix of a
// symmetrized relator; returns (sym index, match length), or (-1, 0).
// cap limits the match length (min(|w|, |relator|) for cyclic matching).
std::pair<int, int> match_at(const Presentation& P, const Word& w, int i, int cap,
                             bool cyclic) {
    int n = static_cast<int>(w.size());
    if (n < 2) return {-1, 0};
    int j = cyclic ? (i + 1) % n : i + 1;
    if (!cyclic && j >= n) return {-1, 0};
    int s = P.sym_with_prefix(w[i], w[j]);
    if (s < 0) return {-1, 0};
    const Word& r = P.symmetrized[s];
    int m = 2;
    while (m < cap) {
        int k = cyclic ? (i + m) % n : i + m;
        if (!cyclic && k >= n) break;
        if (w[k] != r[m]) break;
        ++m;
    }
    return {s, m};
}

}  // namespace

Word dehn_reduce(const Presentation& P, const Word& w0) {
    require_surface(P);
    const int L = static_cast<int>(P.relator().size());
    Word w = free_reduce(w0);
    bool changed = true;
    while (changed) {
        changed = false;
        int n = static_cast<int>(w.size());
        for (int i = 0; i + 1 < n; ++i) {
            auto [s, m] = match_at(P, w, i, std::min(L, n - i), /*cyclic=*/false);
            if (s < 0 || 2 * m <= L) continue;
            const Word& r = P.symmetrized[s];
            Word next(w.begin(), w.begin() + i);
            Word tail(r.begin() + m, r.end());
            Word t_inv = inverse(tail);
            next.insert(next.end(), t_inv.begin(), t_inv.end());
            next.insert(next.end(), w.begin() + i + m, w.end());
            w = free_reduce(next);
            changed = true;
            break;
        }
    }
    return w;
}

bool is_trivial(const Presentation& P, const Word& w) {
    return dehn_reduce(P, w).empty();
}

Word cyclic_dehn_reduce(const Presentation& P, const Word& w0) {
    require_surface(P);
    const int L = static_cast<int>(P.relator().size());
    Word w = cyclic_reduce(dehn_reduce(P, w0));
    bool changed = true;
    while (changed && !w.empty()) {
        changed = false;
        int n = static_cast<int>(w.size());
        for (int i = 0; i < n; ++i) {
            auto [s, m] = match_at(P, w, i, std::min(L, n), /*cyclic=*/true);
            if (s < 0 || 2 * m <= L) continue;
            const Word& r = P.symmetrized[s];
            Word rot = rotate(w, i);  // factor now occupies rot[0..m)
            Word tail(r.begin() + m, r.end());
            Word next = inverse(tail);
            next.insert(next.end(), rot.begin() + m, rot.end());
            w = cyclic_reduce(free_reduce(next));
            changed = true;
            break;
        }
    }
    return w;
}

std::vector<Word> half_swap_closure(const Presentation& P, const Word& w) {
    require_surface(P);
    const int L = static_cast<int>(P.relator().size());
    const int H = L / 2;
    std::set<Word> seen;
    std::deque<Word> queue;
    Word start = least_rotation(cyclic_reduce(w), P.n_gens);
    seen.insert(start);
    queue.push_back(start);
    while (!queue.empty()) {
        Word u = queue.front();
        queue.pop_front();
        int n = static_cast<int>(u.size());
        if (n < H) continue;
        for (int i = 0; i < n; ++i) {
            auto [s, m] = match_at(P, u, i, std::min(H, n), /*cyclic=*/true);
            if (s < 0 || m < H) continue;
            const Word& r = P.symmetrized[s];
            Word rot = rotate(u, i);
            Word tail(r.begin() + H, r.end());
            Word next = inverse(tail);
            next.insert(next.end(), rot.begin() + H, rot.end());
            next = cyclic_reduce(free_reduce(next));
            Word norm = least_rotation(next, P.n_gens);
            if (seen.insert(norm).second) queue.push_back(norm);
        }
    }
    return std::vector<Word>(seen.begin(), seen.end());
}

Word canonical_class(const Presentation& P, const Word& w0) {
    require_surface(P);
    Word w = cyclic_dehn_reduce(P, w0);
    for (;;) {
        if (w.empty()) return w;
        std::set<Word> members;
        for (const Word& seed : {w, inverse(w)})
            for (const Word& m : half_swap_closure(P, seed)) {
                members.insert(m);
                members.insert(least_rotation(inverse(m), P.n_gens));
            }
        // A swap can expose a new shortening; restart from the reduced word.
        bool restarted = false;
        for (const Word& m : members) {
            Word red = cyclic_dehn_reduce(P, m);
            if (red.size() < w.size()) {
                w = red;
                restarted = true;
                break;
            }
        }
        if (restarted) continue;
        Word best;
        bool first = true;
        for (const Word& m : members) {
            Word cand = least_rotation(m, P.n_gens);
            if (first || word_less(cand, best, P.n_gens)) {
                best = cand;
                first = false;
            }
        }
        return best;
    }
}

PrimitiveDecomposition primitive_root(const Presentation& P, const Word& canonical) {
    PrimitiveDecomposition out;
    out.root = canonical;
    out.power = 1;
    if (canonical.empty()) return out;
    std::set<Word> members;
    for (const Word& seed : {canonical, inverse(canonical)})
        for (const Word& m : half_swap_closure(P, seed)) members.insert(m);
    int n = static_cast<int>(canonical.size());
    for (const Word& m : members) {
        if (static_cast<int>(m.size()) != n) continue;
        int s = cyclic_period(m);
        if (s < n && n % s == 0) {
            Word root(m.begin(), m.begin() + s);
            out.root = canonical_class(P, root);
            out.power = n / s;
            return out;
        }
    }
    return out;
}

}  // namespace forge
