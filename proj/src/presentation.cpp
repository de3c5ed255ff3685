#include "forge/presentation.hpp"

#include <algorithm>
#include <sstream>

#include "forge/core.hpp"

namespace forge {

Presentation Presentation::surface(int g) {
    if (g < 2) throw domain_error("surface presentation requires genus >= 2");
    Presentation P;
    P.genus = g;
    P.n_gens = 2 * g;
    for (int i = 1; i <= g; ++i) {
        P.names.push_back("a" + std::to_string(i));
        P.names.push_back("b" + std::to_string(i));
    }
    Word r;
    for (int i = 0; i < g; ++i) {
        Letter a = static_cast<Letter>(2 * i + 1), b = static_cast<Letter>(2 * i + 2);
        r.push_back(a);
        r.push_back(b);
        r.push_back(letter_inverse(a));
        r.push_back(letter_inverse(b));
    }
    P.relators.push_back(r);
    P.build_symmetrized();
    return P;
}

Presentation Presentation::generic(std::vector<std::string> names,
                                   std::vector<Word> relators) {
    Presentation P;
    P.n_gens = static_cast<int>(names.size());
    P.names = std::move(names);
    P.relators = std::move(relators);
    return P;
}

const Word& Presentation::relator() const {
    if (relators.empty()) throw domain_error("presentation has no relator");
    return relators.front();
}

void Presentation::build_symmetrized() {
    const Word& r = relator();
    int L = static_cast<int>(r.size());
    Word ri = inverse(r);
    for (int s = 0; s < L; ++s) {
        symmetrized.push_back(rotate(r, s));
        symmetrized.push_back(rotate(ri, s));
    }
    std::sort(symmetrized.begin(), symmetrized.end());
    symmetrized.erase(std::unique(symmetrized.begin(), symmetrized.end()),
                      symmetrized.end());

    // max piece = longest common prefix over distinct symmetrized relators
    max_piece = 0;
    for (size_t i = 0; i < symmetrized.size(); ++i)
        for (size_t j = i + 1; j < symmetrized.size(); ++j) {
            int k = 0;
            while (k < L && symmetrized[i][k] == symmetrized[j][k]) ++k;
            max_piece = std::max(max_piece, k);
        }

    int span = 2 * n_gens;
    prefix_table_.assign(span * span, -1);
    for (size_t s = 0; s < symmetrized.size(); ++s) {
        int k1 = letter_rank(symmetrized[s][0], n_gens);
        int k2 = letter_rank(symmetrized[s][1], n_gens);
        int& slot = prefix_table_[k1 * span + k2];
        if (slot != -1)
            throw domain_error("symmetrized relator prefix collision (piece >= 2)");
        slot = static_cast<int>(s);
    }
}

bool Presentation::satisfies_c6() const {
    if (symmetrized.empty()) return false;
    return 6 * max_piece < static_cast<int>(relator().size());
}

int Presentation::sym_with_prefix(Letter x, Letter y) const {
    int span = 2 * n_gens;
    return prefix_table_[letter_rank(x, n_gens) * span + letter_rank(y, n_gens)];
}

std::string Presentation::letter_token(Letter v) const {
    int i = letter_index(v);
    if (i < 0 || i >= n_gens) throw domain_error("letter out of range");
    return v > 0 ? names[i] : names[i] + "^-1";
}

Letter Presentation::token_letter(const std::string& tok) const {
    std::string base = tok;
    bool inv = false;
    if (auto pos = tok.find('^'); pos != std::string::npos) {
        std::string suffix = tok.substr(pos);
        if (suffix != "^-1") throw usage_error("bad token suffix: " + tok);
        base = tok.substr(0, pos);
        inv = true;
    }
    for (int i = 0; i < n_gens; ++i)
        if (names[i] == base)
            return static_cast<Letter>(inv ? -(i + 1) : (i + 1));
    throw usage_error("unknown generator token: " + tok);
}

std::string Presentation::format(const Word& w) const {
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += letter_token(w[i]);
    }
    return out;
}

Word Presentation::parse(const std::string& text) const {
    Word w;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) w.push_back(token_letter(tok));
    return w;
}

}  // namespace forge
