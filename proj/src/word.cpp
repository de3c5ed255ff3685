#include "forge/word.hpp"

#include <algorithm>

namespace forge {

Word inverse(const Word& w) {
    Word out(w.size());
    for (size_t i = 0; i < w.size(); ++i) out[i] = letter_inverse(w[w.size() - 1 - i]);
    return out;
}

Word concat(const Word& u, const Word& v) {
    Word out = u;
    out.insert(out.end(), v.begin(), v.end());
    return out;
}

Word power(const Word& u, int k) {
    Word base = k >= 0 ? u : inverse(u);
    int reps = k >= 0 ? k : -k;
    Word out;
    out.reserve(base.size() * reps);
    for (int i = 0; i < reps; ++i) out.insert(out.end(), base.begin(), base.end());
    return out;
}

Word rotate(const Word& w, int s) {
    if (w.empty()) return w;
    int n = static_cast<int>(w.size());
    s = ((s % n) + n) % n;
    Word out;
    out.reserve(w.size());
    out.insert(out.end(), w.begin() + s, w.end());
    out.insert(out.end(), w.begin(), w.begin() + s);
    return out;
}

Word free_reduce(const Word& w) {
    Word out;
    out.reserve(w.size());
    for (Letter v : w) {
        if (!out.empty() && out.back() == letter_inverse(v))
            out.pop_back();
        else
            out.push_back(v);
    }
    return out;
}

Word cyclic_reduce(const Word& w) {
    Word out = free_reduce(w);
    size_t lo = 0, hi = out.size();
    while (hi - lo >= 2 && out[lo] == letter_inverse(out[hi - 1])) {
        ++lo;
        --hi;
    }
    return Word(out.begin() + lo, out.begin() + hi);
}

bool is_freely_reduced(const Word& w) {
    for (size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i] == letter_inverse(w[i + 1])) return false;
    return true;
}

bool is_cyclically_reduced(const Word& w) {
    if (!is_freely_reduced(w)) return false;
    if (w.size() >= 2 && w.front() == letter_inverse(w.back())) return false;
    return true;
}

bool word_less(const Word& u, const Word& v, int n_gens, bool shortlex) {
    if (shortlex && u.size() != v.size()) return u.size() < v.size();
    size_t m = std::min(u.size(), v.size());
    for (size_t i = 0; i < m; ++i) {
        int ru = letter_rank(u[i], n_gens), rv = letter_rank(v[i], n_gens);
        if (ru != rv) return ru < rv;
    }
    return u.size() < v.size();
}

Word least_rotation(const Word& w, int n_gens) {
    if (w.empty()) return w;
    Word best = w;
    for (int s = 1; s < static_cast<int>(w.size()); ++s) {
        Word cand = rotate(w, s);
        if (word_less(cand, best, n_gens)) best = cand;
    }
    return best;
}

int cyclic_period(const Word& w) {
    int n = static_cast<int>(w.size());
    for (int s = 1; s < n; ++s) {
        if (n % s != 0) continue;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) ok = w[i] == w[(i + s) % n];
        if (ok) return s;
    }
    return n;
}

}  // namespace forge
