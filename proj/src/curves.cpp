#include "forge/curves.hpp"

#include <algorithm>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "forge/core.hpp"
#include "forge/halfplane.hpp"
#include "forge/precision.hpp"
#include "forge/reduce.hpp"

namespace forge {

namespace {

using mpf = boost::multiprecision::mpfr_float;
using M2d = M2<double>;

// Window offset as a fraction of the translation length; a fixed
// irrational-looking jitter keeps crossing parameters away from the window
// boundary for typical classes.
constexpr double kWindowJitter = 0.13759719281919137;

// Thrown by the double-precision pass when a decision lands inside an
// ambiguity band; the caller re-runs the whole computation in multiprecision.
struct NeedEscalation {};

template <class R>
struct Bands;

template <>
struct Bands<double> {
    static double window() { return 1e-8; }     // window boundary half-band
    static double dedup_quick() { return 1e-4; }
    static double trace_margin() { return 1e-8; }
    // per-entry rounding budget of a five-factor matrix product, relative to
    // the product of the factor norms (measured worst case ~1.3e-15 against
    // exact recomputation; two decades of slack)
    static double prod_eps() { return 1e-13; }
    static constexpr bool can_escalate = true;
};

template <>
struct Bands<mpf> {
    static mpf window() { return mpf("1e-30"); }
    static mpf dedup_quick() { return mpf("1e-4"); }
    static mpf trace_margin() { return mpf("1e-30"); }
    static mpf prod_eps() { return mpf("1e-42"); }
    static constexpr bool can_escalate = false;
};

inline double to_double(double x) { return x; }
template <class E>
double to_double(const E& x) {
    return mpf(x).convert_to<double>();
}

// ---------------------------------------------------------------------------
// Tiling engine. All geometry happens in the upper half-plane with the
// fundamental polygon centered at i; group elements are tracked as matrices
// (original coordinates) together with defining words.
// ---------------------------------------------------------------------------

template <class R>
struct Engine {
    const Presentation& P;
    int n2 = 0;               // number of letters (2 * n_gens)
    std::vector<M2<R>> img;   // letter images by rank (positives, then inverses)
    std::vector<Pt<R>> nbr;   // images of the base point under each letter
    Pt<R> center{R(0), R(1)};
    R Rrad{}, apothem{};

    explicit Engine(const Presentation& pres) : P(pres) {
        if (P.genus < 2) throw domain_error("tiling engine requires a surface group");
        n2 = 2 * P.n_gens;
        auto gens = fuchsian_generators<R>(P.genus);
        for (const auto& G : gens) img.push_back(G);
        for (const auto& G : gens) img.push_back(G.inv());
        for (const auto& G : img) nbr.push_back(moebius(G, center));
        PolygonData<R> poly = regular_polygon<R>(P.genus);
        Rrad = poly.circumradius;
        apothem = poly.apothem;
    }

    Letter letter_of_rank(int r) const {
        return static_cast<Letter>(r < P.n_gens ? r + 1 : -(r - P.n_gens + 1));
    }
    int inv_rank(int r) const { return r < P.n_gens ? r + P.n_gens : r - P.n_gens; }

    const M2<R>& letter_image(Letter v) const {
        return img[v > 0 ? letter_index(v) : P.n_gens + letter_index(v)];
    }

    M2<R> product(const Word& w) const {
        M2<R> M = M2<R>::id();
        for (Letter v : w) M = M * letter_image(v);
        return M;
    }

    struct Node {
        M2<R> mat;   // group element in original coordinates
        M2<R> fmat;  // frame-composed product K * mat, accumulated directly so
                     // that frame coordinates carry only relative rounding
        Word word;   // freely reduced spelling
        R foot{};    // foot parameter of mat * i on the reference axis
        R sdist{};   // sinh distance of mat * i to the reference axis line
        int hom = 0; // residue of the word under the active homomorphism
    };

    // Greedy Dirichlet walk: returns h with h^{-1} z in the closed base cell.
    Node locate(const Pt<R>& z, Node h) const {
        M2<R> hinv = h.mat.inv();
        for (int iter = 0; iter < 4000; ++iter) {
            Pt<R> w = moebius(hinv, z);
            R best = cosh_dist(w, center);
            int pick = -1;
            for (int r = 0; r < n2; ++r) {
                R dd = cosh_dist(w, nbr[r]);
                if (dd < best - R(1e-13) * (R(1) + best)) {
                    best = dd;
                    pick = r;
                }
            }
            if (pick < 0) return h;
            h.mat = h.mat * img[pick];
            hinv = img[inv_rank(pick)] * hinv;
            Letter v = letter_of_rank(pick);
            if (!h.word.empty() && h.word.back() == letter_inverse(v))
                h.word.pop_back();
            else
                h.word.push_back(v);
        }
        throw domain_error("tile location walk failed to converge");
    }
};

// ---------------------------------------------------------------------------
// Region BFS around an axis segment. Explores every group element h whose
// base-point image lies within keep_dist of the segment [lo, hi] of the axis
// normalized by frame K. Tiles meeting a convex neighborhood of the segment
// form a face-connected family, and every tile containing a point of the
// neighborhood has its center within the circumradius of that point, so a
// keep radius of (neighborhood radius + circumradius) reaches all tiles the
// collection criteria below ask for. Over-inclusion is harmless, hence the
// keep test itself is not precision-critical.
// ---------------------------------------------------------------------------

template <class R>
struct RegionResult {
    std::vector<typename Engine<R>::Node> nodes;
    bool saturated = true;
};

template <class R>
RegionResult<R> region_bfs(const Engine<R>& E, const M2<R>& K, const M2<R>& Kinv,
                           const R& lo, const R& hi, const R& keep_dist, int radius,
                           const std::vector<int>* hom, int degree) {
    using std::asinh;
    using std::cosh;
    using std::exp;

    RegionResult<R> out;
    R keep_cosh = cosh(keep_dist);

    // eval computes the frame data from the frame-composed matrix. Matrix
    // products accumulate only relative rounding, so foot and offset carry
    // absolute noise ~1e-12 across the whole window; evaluating K * (mat * i)
    // instead would lose the exponential resolution near the axis endpoints.
    auto eval = [&](typename Engine<R>::Node& nd, R& cosh_seg, R& sig) {
        Pt<R> z = moebius(nd.fmat, E.center);
        nd.sdist = sinh_dist_to_im_axis(z);
        nd.foot = axis_foot_param(z);
        sig = asinh(z.x / z.y);
        R t = nd.foot < lo ? lo : (nd.foot > hi ? hi : nd.foot);
        Pt<R> q{R(0), exp(t)};
        cosh_seg = cosh_dist(z, q);
    };
    auto hom_of = [&](const Word& w) {
        if (!hom) return 0;
        int s = 0;
        for (Letter v : w) {
            int i = letter_index(v);
            s += v > 0 ? (*hom)[i] : -(*hom)[i];
        }
        s %= degree;
        return s < 0 ? s + degree : s;
    };

    // Spatial hash on the cylindrical coordinates (foot, signed offset) of
    // the base-point image about the frame axis. Within offset <= keep_dist
    // the coordinate chart stretches hyperbolic distance by at most
    // cosh(keep_dist), so distinct group elements (orbit separation >= the
    // systole ~2.26) stay >= 2e-2 apart in these coordinates, far above both
    // the 1e-3 identification tolerance and the ~1e-12 recomputation noise.
    std::unordered_map<long long, std::vector<int>> buckets;
    std::vector<std::pair<double, double>> ts;  // parallel to out.nodes
    auto pack = [](long long ku, long long kv) { return ku * (1LL << 32) + kv; };

    auto try_insert = [&](typename Engine<R>::Node nd, double t, double sig) -> int {
        long long kt0 = static_cast<long long>(std::floor(t / 0.25));
        long long ks0 = static_cast<long long>(std::floor(sig / 0.25));
        for (long long du = -1; du <= 1; ++du)
            for (long long dv = -1; dv <= 1; ++dv) {
                auto it = buckets.find(pack(kt0 + du, ks0 + dv));
                if (it == buckets.end()) continue;
                for (int idx : it->second)
                    if (std::abs(ts[idx].first - t) < 1e-3 &&
                        std::abs(ts[idx].second - sig) < 1e-3)
                        return -1;  // already present
            }
        int idx = static_cast<int>(out.nodes.size());
        nd.hom = hom_of(nd.word);
        out.nodes.push_back(std::move(nd));
        ts.emplace_back(t, sig);
        buckets[pack(kt0, ks0)].push_back(idx);
        return idx;
    };

    // Seeds: tiles containing sample points along the segment.
    typename Engine<R>::Node cursor;
    cursor.mat = M2<R>::id();
    std::deque<int> queue;
    R step = E.apothem / R(2);
    R s = lo;
    for (;;) {
        R sc = s > hi ? hi : s;
        Pt<R> z = moebius(Kinv, Pt<R>{R(0), exp(sc)});
        cursor = E.locate(z, cursor);
        typename Engine<R>::Node nd = cursor;
        nd.fmat = K * nd.mat;
        R cs{}, sig{};
        eval(nd, cs, sig);
        if (cs <= keep_cosh) {
            double td = to_double(nd.foot), sd = to_double(sig);
            int idx = try_insert(std::move(nd), td, sd);
            if (idx >= 0) queue.push_back(idx);
        }
        if (sc >= hi) break;
        s += step;
    }

    while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        if (static_cast<int>(out.nodes[cur].word.size()) >= radius) {
            out.saturated = false;
            continue;
        }
        for (int r = 0; r < E.n2; ++r) {
            typename Engine<R>::Node nd;
            nd.mat = out.nodes[cur].mat * E.img[r];
            nd.fmat = out.nodes[cur].fmat * E.img[r];
            nd.word = out.nodes[cur].word;
            Letter v = E.letter_of_rank(r);
            if (!nd.word.empty() && nd.word.back() == letter_inverse(v))
                nd.word.pop_back();
            else
                nd.word.push_back(v);
            R cs{}, sig{};
            eval(nd, cs, sig);
            if (cs > keep_cosh) continue;
            double td = to_double(nd.foot), sd = to_double(sig);
            int idx = try_insert(std::move(nd), td, sd);
            if (idx >= 0) queue.push_back(idx);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Crossing classification. For a candidate group element g and frames K_ax
// (normalizing the translated axis) and K_cross (normalizing the axis that
// crossings are measured on), the matrix T = K_cross * g * K_ax^{-1} maps the
// endpoints {0, infinity} of the normalized axis to the endpoints of the
// translate in crossing coordinates: repelling u = T(0) = b/d, attracting
// v = T(infinity) = a/c. The translate crosses iff u and v have opposite
// signs; the crossing parameter is log sqrt(-uv), and the oriented incidence
// angle satisfies cos(theta) = (u+v)/(v-u).
// ---------------------------------------------------------------------------

enum class Classify { kMemberCandidate, kCross, kMiss, kAmbiguous };

template <class R>
R frob(const M2<R>& m) {
    using std::sqrt;
    return sqrt(m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
}

// One-sided magnitude bounds: even with untrusted signs the crossing
// parameter t* = (log|ab| - log|cd|)/2 is bracketed once every entry
// magnitude is widened by the gate, and a bracket entirely outside the
// window certifies a miss whatever the degenerate entries hide.
template <class R>
bool certified_miss_by_magnitude(const M2<R>& T, const R& gate, const R& lo,
                                 const R& hi) {
    using std::abs;
    using std::log;
    R aa = abs(T.a), ab = abs(T.b), ac = abs(T.c), ad = abs(T.d);
    R margin = R(1e-2);
    if (ac > R(2) * gate && ad > R(2) * gate) {
        R t_up = (log(aa + gate) + log(ab + gate) - log(ac - gate) - log(ad - gate)) / R(2);
        if (t_up < lo - margin) return true;
    }
    if (aa > R(2) * gate && ab > R(2) * gate) {
        R t_lo = (log(aa - gate) + log(ab - gate) - log(ac + gate) - log(ad + gate)) / R(2);
        if (t_lo > hi + margin) return true;
    }
    return false;
}

// gate is an absolute bound on the rounding error of each entry of T,
// derived from the norms of the factors that produced it. Entries above the
// gate carry exact signs; entries within it are indistinguishable from zero.
// t_err is a first-order bound on the error of the crossing parameter.
// graze = |u+v|/|v-u| is set on sign-sharp verdicts: cos(angle) for a
// crossing, cosh(clearance) for a miss; zero means it was not computed.
template <class R>
Classify classify_candidate(const M2<R>& T, const R& gate, const R& lo,
                            const R& hi, R& t_star, R& theta, R& t_err,
                            R& graze) {
    using std::abs;
    using std::acos;
    using std::log;
    R aa = abs(T.a), ab = abs(T.b), ac = abs(T.c), ad = abs(T.d);
    if (ab < R(32) * gate && ac < R(32) * gate)
        return Classify::kMemberCandidate;  // near-diagonal: exact test decides
    if (aa > gate && ab > gate && ac > gate && ad > gate) {
        // all four signs exact: the crossing verdict is a pure sign product
        R u = T.b / T.d, v = T.a / T.c;
        graze = abs((u + v) / (v - u));
        if (u * v > R(0)) {
            // only near-axis misses are consumed further; far misses skip the
            // parameter logs entirely (the dominant case in the region scan)
            if (graze >= R(3)) return Classify::kMiss;
            t_star = (log(abs(u)) + log(abs(v))) / R(2);
            t_err = gate * (R(1) / aa + R(1) / ab + R(1) / ac + R(1) / ad) / R(2);
            return Classify::kMiss;
        }
        t_star = (log(abs(u)) + log(abs(v))) / R(2);
        t_err = gate * (R(1) / aa + R(1) / ab + R(1) / ac + R(1) / ad) / R(2);
        R ct = (u + v) / (v - u);
        if (ct > R(1)) ct = R(1);
        if (ct < R(-1)) ct = R(-1);
        theta = acos(ct);
        return Classify::kCross;
    }
    if (certified_miss_by_magnitude(T, gate, lo, hi)) return Classify::kMiss;
    return Classify::kAmbiguous;  // the exact coset layer decides
}

// Exact coset arithmetic. Identity-level decisions about candidate
// translates all reduce to "is g a power of w in the group"; the
// abelianization pins the exponent whenever it can, and one Dehn-algorithm
// certificate settles the rest. Nothing here depends on floating point.
std::optional<int> power_in_cyclic(const Presentation& P, const Word& g,
                                   const Word& w, int kmax) {
    std::vector<long> hg(static_cast<std::size_t>(P.n_gens), 0), hw = hg;
    for (Letter v : g) hg[static_cast<std::size_t>(letter_index(v))] += v > 0 ? 1 : -1;
    for (Letter v : w) hw[static_cast<std::size_t>(letter_index(v))] += v > 0 ? 1 : -1;
    auto test = [&](long k) {
        return is_trivial(P, concat(g, power(inverse(w), static_cast<int>(k))));
    };
    int pin = -1;
    for (int i = 0; i < P.n_gens; ++i)
        if (hw[static_cast<std::size_t>(i)] != 0) {
            pin = i;
            break;
        }
    if (pin >= 0) {
        long num = hg[static_cast<std::size_t>(pin)];
        long den = hw[static_cast<std::size_t>(pin)];
        if (num % den != 0) return std::nullopt;
        long k = num / den;
        for (int i = 0; i < P.n_gens; ++i)
            if (hg[static_cast<std::size_t>(i)] !=
                k * hw[static_cast<std::size_t>(i)])
                return std::nullopt;
        if (test(k)) return static_cast<int>(k);
        return std::nullopt;
    }
    // null-homologous w: g must be null-homologous too, else no power works
    for (int i = 0; i < P.n_gens; ++i)
        if (hg[static_cast<std::size_t>(i)] != 0) return std::nullopt;
    // scan the geometrically possible exponent range
    for (int a = 0; a <= kmax; ++a)
        for (int sgn : {1, -1}) {
            if (a == 0 && sgn < 0) continue;
            if (test(static_cast<long>(a) * sgn)) return a * sgn;
        }
    return std::nullopt;
}

struct WordHash {
    std::size_t operator()(const Word& w) const {
        std::size_t h = 1469598103934665603ull;
        for (Letter v : w) {
            h ^= static_cast<unsigned char>(v);
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Memoized power-of-w queries keyed on the freely reduced word. The exponent
// sums settle almost every query before any reduction or cache traffic; the
// surviving candidates hit the cache because the breadth-first spellings are
// systematic. Misses only cost a repeated certificate, never correctness.
struct MemberMemo {
    const Presentation& P;
    const Word& w;
    int kmax;
    std::unordered_map<Word, std::optional<int>, WordHash> cache;
    std::vector<long> hw;  // exponent sums of w
    int pin = -1;          // first generator with nonzero sum, -1 if none

    MemberMemo(const Presentation& P_, const Word& w_, int kmax_)
        : P(P_), w(w_), kmax(kmax_),
          hw(static_cast<std::size_t>(P_.n_gens), 0) {
        for (Letter v : w)
            hw[static_cast<std::size_t>(letter_index(v))] += v > 0 ? 1 : -1;
        for (int i = 0; i < P.n_gens; ++i)
            if (hw[static_cast<std::size_t>(i)] != 0) {
                pin = i;
                break;
            }
    }

    std::optional<int> query(const Word& raw) {
        long hg[128] = {};  // letter indices fit in the signed byte alphabet
        for (Letter v : raw) hg[letter_index(v)] += v > 0 ? 1 : -1;
        if (pin >= 0) {
            long den = hw[static_cast<std::size_t>(pin)];
            if (hg[pin] % den != 0) return std::nullopt;
            long k = hg[pin] / den;
            for (int i = 0; i < P.n_gens; ++i)
                if (hg[i] != k * hw[static_cast<std::size_t>(i)])
                    return std::nullopt;
        } else {
            for (int i = 0; i < P.n_gens; ++i)
                if (hg[i] != 0) return std::nullopt;
        }
        Word g = free_reduce(raw);
        auto it = cache.find(g);
        if (it != cache.end()) return it->second;
        auto r = power_in_cyclic(P, g, w, kmax);
        cache.emplace(std::move(g), r);
        return r;
    }
};

// ---------------------------------------------------------------------------
// Targeted extended-precision resolution. A candidate the double ladder can
// neither certify nor match against a sharp sibling is re-derived in
// isolation at working precision: the frames are lifted exactly from the
// double run and re-aligned to the extended-precision word images, so the
// verdict refers to the same window while the entry noise floor drops by
// nearly thirty orders of magnitude. This costs a handful of 2x2 products
// per candidate instead of a full recount of the class.
// ---------------------------------------------------------------------------

struct ResolverSpec {
    const Word* win_word = nullptr;  // refine the window frame against this
    double win_ell = 0;              // its translation length (sanity check)
    const Word* ax_word = nullptr;   // set in arrangement mode: the class
    double ax_ell = 0;               // whose translated axes are the lines
};

struct MpResolver {
    Engine<mpf> em;
    M2<mpf> Kc, Kax_i;
    mpf lo_m, hi_m, period_m, nK;
    bool stab;

    static M2<mpf> lift(const M2<double>& m) {
        return {mpf(m.a), mpf(m.b), mpf(m.c), mpf(m.d)};
    }

    // An exactly lifted frame diagonalizes the extended-precision image of w
    // only to double rounding, and hyperbolic divergence amplifies that
    // residue by e^|t| along the axis. Re-aligning by the exact similarity
    // that finishes the diagonalization removes the amplification while
    // moving the frame (hence the window) by less than the double run's own
    // rounding, so verdicts stay consistent with the counted crossings.
    M2<mpf> refine(const M2<mpf>& K0, const Word& w, double ref_ell) {
        using std::abs;
        using std::log;
        using std::sqrt;
        M2<mpf> M = em.product(w);
        mpf tw = M.tr();
        if (tw < 0) {
            M = -M;
            tw = -tw;
        }
        if (!(tw > mpf(2) + mpf(1e-12))) {
#ifdef ESC_DEBUG
            fprintf(stderr, "MPR refine: trace %.6e\n", to_double(tw));
#endif
            throw NeedEscalation{};
        }
        {
            mpf disc = sqrt(tw * tw - 4);
            mpf ell = 2 * log((tw + disc) / 2);
            mpf dl = abs(ell - mpf(ref_ell));
            if (!(dl < mpf(1e-6))) {
#ifdef ESC_DEBUG
                fprintf(stderr, "MPR refine: ell %.12f vs ref %.12f\n",
                        to_double(ell), ref_ell);
#endif
                throw NeedEscalation{};
            }
        }
        M2<mpf> W = (K0 * M) * K0.inv();
        if (!(W.a > W.d)) {
#ifdef ESC_DEBUG
            fprintf(stderr, "MPR refine: orientation a=%.3e d=%.3e\n",
                    to_double(W.a), to_double(W.d));
#endif
            throw NeedEscalation{};  // attracting end must sit on top
        }
        mpf trW = W.tr(), dW = W.det();
        mpf discW = sqrt(trW * trW - 4 * dW);
        mpf lp = (trW + discW) / 2, lm = (trW - discW) / 2;
        M2<mpf> Pm{lp - W.d, -W.b, W.c, W.a - lm};
        mpf dp = Pm.det();
        if (!(dp > 0)) {
#ifdef ESC_DEBUG
            fprintf(stderr, "MPR refine: det %.3e\n", to_double(dp));
#endif
            throw NeedEscalation{};
        }
        mpf s = sqrt(dp);
        M2<mpf> Pn{Pm.a / s, Pm.b / s, Pm.c / s, Pm.d / s};
        M2<mpf> K = Pn.inv() * K0;
        M2<mpf> Wr = (K * M) * K.inv();
        mpf off = abs(Wr.b) + abs(Wr.c);
        mpf fl = frob(Wr) * mpf(1e-38);
        if (!(off < fl)) {
#ifdef ESC_DEBUG
            fprintf(stderr, "MPR refine: residue %.3e vs %.3e\n", to_double(off),
                    to_double(fl));
#endif
            throw NeedEscalation{};
        }
        return K;
    }

    static const Presentation& with_precision(const Presentation& P) {
        ensure_mp_precision();  // must precede every member construction
        return P;
    }

    MpResolver(const Presentation& P, const ResolverSpec& spec,
               const M2<double>& K_cross, const M2<double>& Kax_inv,
               double lo_d, double hi_d)
        : em(with_precision(P)), stab(spec.ax_word == nullptr) {
        lo_m = mpf(lo_d);
        hi_m = mpf(hi_d);
        period_m = hi_m - lo_m;
        Kc = spec.win_word ? refine(lift(K_cross), *spec.win_word, spec.win_ell)
                           : lift(K_cross);
        if (stab)
            Kax_i = Kc.inv();
        else
            Kax_i = refine(lift(Kax_inv).inv(), *spec.ax_word, spec.ax_ell).inv();
        mpf n1 = frob(Kc), n2 = frob(Kax_i);
        nK = n1 * n2;
    }

    // kind 0: certified non-crossing in the window (drop)
    // kind 1: crossing, t in the window (stabilizer mode: folded, with the
    //         power m that shifts the line onto its in-window representative)
    // kind 2: still undecidable at working precision
    struct Verdict {
        int kind = 2;
        double t = 0, theta = 0;
        long m = 0;
    };

    Verdict resolve(const Word& gw) {
        using std::ceil;
        M2<mpf> G = em.product(gw);
        M2<mpf> T = (Kc * G) * Kax_i;
        mpf ng = frob(G);
        mpf gate = Bands<mpf>::prod_eps() * nK * ng;
        mpf t{}, th{}, terr{}, gz{};
        Classify cl = classify_candidate<mpf>(T, gate, lo_m, hi_m, t, th, terr, gz);
        Verdict v;
        if (cl == Classify::kMiss) {
            v.kind = 0;
            return v;
        }
        if (cl != Classify::kCross) return v;  // member-like or true tangency
        if (stab) {
            mpf q = (lo_m - t) / period_m;
            mpf mc = ceil(q);
            v.kind = 1;
            v.m = std::lround(to_double(mc));
            mpf tW = t + mc * period_m;
            v.t = to_double(tW);
            v.theta = to_double(th);
            return v;
        }
        if (t >= lo_m && t < hi_m) {
            v.kind = 1;
            v.t = to_double(t);
            v.theta = to_double(th);
            return v;
        }
        v.kind = 0;
        return v;
    }
};

template <class R>
struct Crossing {
    R t{}, theta{}, terr{};
    Word gword;  // translate generator, for exact same-coset dedup
};

template <class R>
struct CountResult {
    std::vector<Crossing<R>> crossings;  // one entry per distinct translate
    bool member_seen = false;
};

// Counts distinct translates {g A : g = h0 * f^-1, h0 in chain, f in tp}
// whose crossing parameter lies in [lo, hi). In stabilizer mode the frames
// coincide and near-diagonal candidates are tested exactly for membership in
// <w_rot>; the same exact test dedups crossings (same translate iff the
// quotient is a power of w_rot). Floating point only routes candidates:
// every identity-level verdict is word-certified.
//
// Numerically ambiguous candidates (entries inside the rounding gate) are
// deferred and resolved exactly afterwards: first against the counted
// crossings and the sign-sharp out-of-window verdicts (which settle whole
// line families), then by targeted extended-precision re-derivation. Only a
// candidate all three layers fail on escalates the whole computation.
template <class R>
CountResult<R> count_crossings(const Presentation& P, const Word& w_rot, int kmax,
                               bool stab_mode,
                               const std::vector<typename Engine<R>::Node>& chain,
                               const std::vector<typename Engine<R>::Node>& tp,
                               const M2<R>& Kax_inv, const M2<R>& K_cross,
                               const R& lo, const R& hi, bool filter_hom,
                               int degree, const ResolverSpec& rspec) {
    using std::abs;
    using std::ceil;
    using std::fmod;
    CountResult<R> out;
    MemberMemo memo(P, w_rot, kmax);
    std::vector<Word> deferred;
    // In stabilizer mode the lines related to g*A by the axis translation are
    // w^m * g * A, the double coset <w> g <w>; in arrangement mode shifted
    // lines are distinct crossings and only plain line equality matches.
    // Family membership forces ab(cand) - ab(line) into Z*ab(w_rot), so the
    // exponent sums reject almost every pair before any certificate runs.
    auto same_family = [&](const Word& line, const Word& cand) {
        long diff[128] = {};
        for (Letter v : cand) diff[letter_index(v)] += v > 0 ? 1 : -1;
        for (Letter v : line) diff[letter_index(v)] -= v > 0 ? 1 : -1;
        if (memo.pin >= 0) {
            long den = memo.hw[static_cast<std::size_t>(memo.pin)];
            if (diff[memo.pin] % den != 0) return false;
            long s = diff[memo.pin] / den;
            for (int i = 0; i < P.n_gens; ++i)
                if (diff[i] != s * memo.hw[static_cast<std::size_t>(i)])
                    return false;
        } else {
            for (int i = 0; i < P.n_gens; ++i)
                if (diff[i] != 0) return false;
        }
        Word li = inverse(line);
        if (memo.query(concat(li, cand))) return true;
        if (stab_mode)
            for (int am = 1; am <= kmax; ++am)
                for (int mm : {am, -am})
                    if (memo.query(
                            concat(li, concat(power(w_rot, -mm), cand))))
                        return true;
        return false;
    };
    [[maybe_unused]] std::unique_ptr<MpResolver> resolver;
    // Extended-precision fallback; returns true when the candidate is
    // settled (dropped as a miss or placed as a crossing), false when the
    // caller must escalate. Placements are family-deduplicated against the
    // counted crossings, so instances already counted are never doubled.
    auto resolve_exact = [&](const Word& gw) -> bool {
        if constexpr (!std::is_same_v<R, double>)
            return false;
        else {
            if (!resolver)
                resolver = std::make_unique<MpResolver>(
                    P, rspec, K_cross, Kax_inv, to_double(lo), to_double(hi));
            MpResolver::Verdict rv = resolver->resolve(gw);
            if (rv.kind == 0) return true;
            if (rv.kind != 1) return false;
            Word pw = stab_mode
                          ? free_reduce(concat(
                                power(w_rot, static_cast<int>(rv.m)), gw))
                          : gw;
            for (const auto& acc : out.crossings)
                if (same_family(acc.gword, pw)) return true;
            Crossing<R> cr;
            cr.t = R(rv.t);
            cr.theta = R(rv.theta);
            cr.terr = R(1e-12);
            cr.gword = std::move(pw);
            out.crossings.push_back(std::move(cr));
            return true;
        }
    };
    // Sign-sharp verdicts outside the window: an out-of-window crossing or a
    // near-axis miss settles every deferred candidate of its line family.
    struct SharpLine {
        R t{}, theta{}, terr{};
        bool cross = false;
        Word word;
    };
    std::vector<SharpLine> sharp;
    std::vector<R> sharp_tf;  // folded foot parameters (approximate dedup key)
    R period = hi - lo;
    R kn = Bands<R>::prod_eps() * frob(K_cross) * frob(Kax_inv);
    std::vector<R> tpn;
    tpn.reserve(tp.size());
    for (const auto& f : tp) tpn.push_back(frob(f.mat));
    for (const auto& h0 : chain) {
        R hn = kn * frob(h0.mat);
        for (std::size_t fi = 0; fi < tp.size(); ++fi) {
            const auto& f = tp[fi];
            if (filter_hom) {
                int hv = (h0.hom - f.hom) % degree;
                if (hv < 0) hv += degree;
                if (hv != 0) continue;  // stabilizer members always carry
                                        // residue 0, so none are lost here
            }
            // f was collected as a tile element; the translate generator is
            // its inverse
            M2<R> T = K_cross * (h0.mat * f.mat.inv()) * Kax_inv;
            R gate = hn * tpn[fi];
            R t{}, theta{}, terr{}, graze{};
            Classify cl =
                classify_candidate(T, gate, lo, hi, t, theta, terr, graze);
            auto remember_sharp = [&](bool cross) {
                if (sharp.size() >= 2048) return;
                R tf = t;
                if (stab_mode) {
                    tf = fmod(t - lo, period);
                    if (tf < R(0)) tf += period;
                }
                for (std::size_t si = 0; si < sharp_tf.size(); ++si)
                    if (abs(sharp_tf[si] - tf) < R(1e-3) + terr &&
                        sharp[si].cross == cross)
                        return;
                SharpLine sl;
                sl.t = t;
                sl.theta = theta;
                sl.terr = terr;
                sl.cross = cross;
                sl.word = free_reduce(concat(h0.word, inverse(f.word)));
                sharp.push_back(std::move(sl));
                sharp_tf.push_back(tf);
            };
            if (cl == Classify::kMiss) {
                if (graze > R(0) && graze < R(3)) remember_sharp(false);
                continue;
            }
            if (cl == Classify::kMemberCandidate || cl == Classify::kAmbiguous) {
                Word gw = free_reduce(concat(h0.word, inverse(f.word)));
                if (cl == Classify::kMemberCandidate && stab_mode) {
                    auto k = memo.query(gw);
                    if (k) {
                        if (*k != 0) out.member_seen = true;
                        continue;  // stabilizer translate: never a crossing
                    }
                }
                deferred.push_back(std::move(gw));
                continue;
            }
            R band = Bands<R>::window() + terr;
            if (t < lo - band || t >= hi + band) {
                remember_sharp(true);
                continue;
            }
            if (t < lo + band || t > hi - band) {
                // the instance cannot prove which side of the edge its true
                // parameter falls on; re-derive the line exactly
                Word gwb = free_reduce(concat(h0.word, inverse(f.word)));
                if (resolve_exact(gwb)) continue;
                if constexpr (Bands<R>::can_escalate) {
#ifdef ESC_DEBUG
                    fprintf(stderr, "ESC window-boundary\n");
#endif
                    throw NeedEscalation{};
                } else
                    throw domain_error("crossing parameter on the window boundary");
            }
            // identical translates reproduce t to within the summed error
            // bounds, so only t-proximate pairs need the exact coset test
            // (theta is noise-amplified near tangency and never decides)
            bool dup = false;
            std::optional<Word> gw;
            for (const auto& acc : out.crossings) {
                if (abs(acc.t - t) < Bands<R>::dedup_quick() + acc.terr + terr) {
                    if (!gw) gw = free_reduce(concat(h0.word, inverse(f.word)));
                    if (memo.query(concat(inverse(acc.gword), *gw))) {
                        dup = true;
                        break;
                    }
                }
            }
            if (dup) continue;
            Crossing<R> cr;
            cr.t = t;
            cr.theta = theta;
            cr.terr = terr;
            cr.gword = gw ? std::move(*gw)
                          : free_reduce(concat(h0.word, inverse(f.word)));
            out.crossings.push_back(std::move(cr));
        }
    }
    // Exact resolution of the deferred candidates. In stabilizer mode every
    // line family owns exactly one in-window crossing or none. A deferred
    // candidate matching a counted crossing is that crossing or an
    // out-of-window shift of it: drop. One matching a sharp near-axis miss
    // shares its clearance (the shift is an isometry) and never crosses:
    // drop. One matching a sharp out-of-window crossing proves the family
    // crosses; its in-window representative is placed from the sibling's
    // data, with the angle carried over. In arrangement mode only plain line
    // equality decides, and a sharp match always drops (the line's unique
    // transversal crossing is then known to lie outside the window). What
    // survives all matching goes to the extended-precision resolver.
    for (const Word& gw : deferred) {
        bool matched = false;
        for (const auto& acc : out.crossings)
            if ((matched = same_family(acc.gword, gw))) break;
        if (!matched)
            for (const SharpLine& sl : sharp) {
                if (!same_family(sl.word, gw)) continue;
                matched = true;
                if (sl.cross && stab_mode) {
                    // place the family's in-window crossing
                    long m = static_cast<long>(
                        ceil(to_double((lo - sl.t) / period)));
                    R tW = sl.t + R(static_cast<double>(m)) * period;
                    R band = Bands<R>::window() + sl.terr;
                    if (tW < lo + band || tW > hi - band) {
                        // edge call: let the exact layer settle the family
                        if (resolve_exact(gw)) break;
                        if constexpr (Bands<R>::can_escalate)
                            throw NeedEscalation{};
                        else
                            throw domain_error(
                                "crossing parameter on the window boundary");
                    }
                    Crossing<R> cr;
                    cr.t = tW;
                    cr.theta = sl.theta;
                    cr.terr = sl.terr;
                    cr.gword = free_reduce(
                        concat(power(w_rot, static_cast<int>(m)), sl.word));
                    out.crossings.push_back(std::move(cr));
                }
                break;
            }
        if (!matched) {
            if (resolve_exact(gw)) continue;
            if constexpr (Bands<R>::can_escalate) {
#ifdef ESC_DEBUG
                fprintf(stderr,
                        "ESC deferred-orphan len=%zu ncross=%zu nsharp=%zu kmax=%d [%s]\n",
                        gw.size(), out.crossings.size(), sharp.size(), kmax,
                        P.format(gw).c_str());
#endif
                throw NeedEscalation{};
            } else
                throw domain_error("ambiguous translate with no counted sibling");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Class frames: axis normalization of the class representative, using the
// cyclic rotation whose axis passes closest to the base point.
// ---------------------------------------------------------------------------

template <class R>
struct ClassFrames {
    M2<R> M;  // image of the rotated word, trace > 2
    M2<R> K, Kinv;
    R ell{}, t0{}, d0{}, w1{};
    Word rotated;
};

template <class R>
ClassFrames<R> class_frames(const Engine<R>& E, const Word& c) {
    using std::asinh;
    int n = static_cast<int>(c.size());
    // the trace is rotation invariant: test hyperbolicity once
    {
        M2<R> M = E.product(c);
        R t = M.tr();
        if (t < R(0)) t = -t;
        if (!(t > R(2) + Bands<R>::trace_margin())) {
            if (t > R(2)) {
                if constexpr (Bands<R>::can_escalate) {
#ifdef ESC_DEBUG
                    fprintf(stderr, "ESC trace-margin\n");
#endif
                    throw NeedEscalation{};
                }
            }
            throw domain_error("class is not hyperbolic under this representation");
        }
    }
    int best_s = 0;
    R best_d{};
    for (int s = 0; s < n; ++s) {
        M2<R> M = E.product(rotate(c, s));
        if (M.tr() < R(0)) M = -M;
        AxisFrame<R> F = axis_frame(M);
        Pt<R> zi = moebius(F.K, Pt<R>{R(0), R(1)});
        R d = asinh(sinh_dist_to_im_axis(zi));
        if (s == 0 || d < best_d) {
            best_d = d;
            best_s = s;
        }
    }
    ClassFrames<R> out;
    out.rotated = rotate(c, best_s);
    out.M = E.product(out.rotated);
    if (out.M.tr() < R(0)) out.M = -out.M;
    AxisFrame<R> F = axis_frame(out.M);
    out.K = F.K;
    out.ell = F.ell;
    {
        // recenter: slide the frame along its axis so the base-point
        // projection lands at parameter zero. This keeps the frame matrix
        // compact, which keeps every frame-conjugated product well
        // conditioned no matter where the window sits.
        using std::exp;
        Pt<R> z0 = moebius(out.K, Pt<R>{R(0), R(1)});
        R tc = axis_foot_param(z0);
        R e = exp(-tc / R(2));
        M2<R> D{e, R(0), R(0), R(1) / e};
        out.K = D * out.K;
    }
    out.Kinv = out.K.inv();
    Pt<R> zi = moebius(out.K, Pt<R>{R(0), R(1)});
    out.t0 = axis_foot_param(zi);
    out.d0 = best_d;
    out.w1 = out.t0 + R(kWindowJitter) * out.ell;
    return out;
}

// ---------------------------------------------------------------------------
// Self-intersection driver
// ---------------------------------------------------------------------------

template <class R>
SelfIntersectionResult run_si(const Presentation& P, const Word& c, int radius,
                              const std::vector<int>* hom, int degree) {
    using std::asinh;
    using std::cosh;
    using std::exp;

    Engine<R> E(P);
    ClassFrames<R> CF = class_frames(E, c);
    R delta = R(0.35), slack = R(0.05);
    R seg_lo = CF.w1 - E.Rrad - delta, seg_hi = CF.w1 + CF.ell + E.Rrad + delta;
    R keep = R(2) * E.Rrad + delta;
    RegionResult<R> region =
        region_bfs(E, CF.K, CF.Kinv, seg_lo, seg_hi, keep, radius, hom, degree);

    // chain: supertiles of the window segment (every tile containing a
    // segment point has its center within the circumradius of it);
    // tp: one-period tile representatives along the axis line
    std::vector<typename Engine<R>::Node> chain, tp;
    R chain_cosh = cosh(E.Rrad + slack);
    for (const auto& nd : region.nodes) {
        R fc = nd.foot < CF.w1 ? CF.w1
                               : (nd.foot > CF.w1 + CF.ell ? CF.w1 + CF.ell : nd.foot);
        Pt<R> zi = moebius(nd.fmat, E.center);
        Pt<R> q{R(0), exp(fc)};
        if (cosh_dist(zi, q) <= chain_cosh) chain.push_back(nd);
        if (asinh(nd.sdist) <= E.Rrad + slack && nd.foot >= CF.w1 - slack &&
            nd.foot <= CF.w1 + CF.ell + slack)
            tp.push_back(nd);
    }

    int kmax = 4 + static_cast<int>(to_double((seg_hi - seg_lo) / CF.ell) * 3);
    ResolverSpec rspec;
    rspec.win_word = &CF.rotated;
    rspec.win_ell = to_double(CF.ell);
    CountResult<R> cnt =
        count_crossings<R>(P, CF.rotated, kmax, true, chain, tp, CF.Kinv, CF.K,
                           CF.w1, CF.w1 + CF.ell, hom != nullptr, degree, rspec);

    // stabilizer-presence backstop: when the base point is deep enough in
    // the region, some nonzero power of the class must appear among the
    // certified member candidates
    if (CF.d0 < E.Rrad - R(0.1) && !cnt.member_seen)
        throw domain_error("axis stabilizer missing from certified region");

    int found = static_cast<int>(cnt.crossings.size());
    if (found % 2 != 0) {
        if constexpr (Bands<R>::can_escalate) {
#ifdef ESC_DEBUG
            fprintf(stderr, "ESC odd-count\n");
#endif
            throw NeedEscalation{};
        } else
            throw domain_error("odd crossing-translate count");
    }
    SelfIntersectionResult out;
    out.si = found / 2;
    out.saturated = region.saturated;
    out.crossing_translates = found;
    out.region_size = static_cast<int>(region.nodes.size());
    out.ell = to_double(CF.ell);
    out.escalations = std::is_same_v<R, double> ? 0 : 1;
    return out;
}

// The certified engine is tied to the canonical discrete seed: escalation
// re-derives every matrix from the polygon formulas in multiprecision, which
// is only possible when the input representation is exactly that seed.
void validate_seed(const Presentation& P, const Representation& F) {
    if (F.rank != 2 || F.n_gens != P.n_gens || !F.is_real())
        throw domain_error("self-intersection engine needs the rank-2 real seed");
    Representation ref = fuchsian(P);
    for (int i = 0; i < P.n_gens; ++i)
        if ((F.images[i] - ref.images[i]).cwiseAbs().maxCoeff() > 1e-9)
            throw domain_error(
                "self-intersection engine is certified for the canonical "
                "discrete seed only");
}

SelfIntersectionResult si_dispatch(const Presentation& P, const Representation& F,
                                   const Word& c0, int radius,
                                   const std::vector<int>* hom, int degree) {
    validate_seed(P, F);
    Word c = canonical_class(P, c0);
    if (c.empty()) throw domain_error("self-intersection of the trivial class");
    PrimitiveDecomposition pd = primitive_root(P, c);
    if (pd.power != 1) throw domain_error("self-intersection needs a primitive class");

    // Long classes go straight to multiprecision: past this window span the
    // rounding gates swallow most pair products, so the double pass would
    // defer nearly every candidate to the exact layers anyway and the direct
    // route is cheaper.
    double ell_cap = 26.0;
#ifdef ESC_DEBUG
    if (const char* s = std::getenv("FORGE_ELL_CAP")) ell_cap = atof(s);
#endif
    double ell_est = stable_length_proxy(F, c);
    if (ell_est > ell_cap) {
        ensure_mp_precision();
        return run_si<mpf>(P, c, radius, hom, degree);
    }
    try {
        return run_si<double>(P, c, radius, hom, degree);
    } catch (const NeedEscalation&) {
        ensure_mp_precision();
        return run_si<mpf>(P, c, radius, hom, degree);
    }
}

// ---------------------------------------------------------------------------
// Fast rejector: verified crossings among rotation-pair candidates. It never
// admits anything by itself -- it can only prove si too large. Candidates are
// the natural strand pairs T = S_i S_j^-1 D^q built from prefix frames; every
// decision below is taken only when it clears a margin that dwarfs rounding,
// and anything ambiguous is skipped (losing rejection power, never
// soundness).
// ---------------------------------------------------------------------------

bool fast_reject(const Engine<double>& E, const Word& c, int p) {
    try {
        ClassFrames<double> CF = class_frames(E, c);
        int n = static_cast<int>(CF.rotated.size());
        std::vector<M2d> pre(n);
        {
            M2d acc = M2d::id();
            for (int i = 0; i < n; ++i) {
                pre[i] = CF.K * acc * CF.Kinv;
                acc = acc * E.letter_image(CF.rotated[i]);
            }
        }
        M2d D = CF.K * CF.M * CF.Kinv;
        std::vector<M2d> Dq(5);
        Dq[2] = M2d::id();
        Dq[3] = D;
        Dq[4] = D * D;
        M2d Di = D.inv();
        Dq[1] = Di;
        Dq[0] = Di * Di;

        std::vector<double> npre(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) npre[static_cast<std::size_t>(i)] = frob(pre[i]);
        std::vector<double> nq(5);
        for (int q = 0; q < 5; ++q) nq[static_cast<std::size_t>(q)] = frob(Dq[static_cast<std::size_t>(q)]);

        std::vector<double> seen;  // folded crossing parameters
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                M2d T0 = pre[i] * pre[j].inv();
                double n0 = npre[static_cast<std::size_t>(i)] *
                            npre[static_cast<std::size_t>(j)];
                for (int q = 0; q < 5; ++q) {
                    M2d T = T0 * Dq[static_cast<std::size_t>(q)];
                    // decisive-margin gates relative to the rounding budget of
                    // the product; skip anything remotely unclear
                    double gate = 1e-6 * n0 * nq[static_cast<std::size_t>(q)];
                    if (std::abs(T.a) < gate || std::abs(T.b) < gate ||
                        std::abs(T.c) < gate || std::abs(T.d) < gate)
                        continue;
                    double u = T.b / T.d, v = T.a / T.c;
                    if (u * v >= 0) continue;
                    // a verified crossing by a non-stabilizer translate
                    if (p == 0) return true;
                    double t = (std::log(std::abs(u)) + std::log(std::abs(v))) / 2;
                    double ell = CF.ell;
                    double tf = std::fmod(t - CF.w1, ell);
                    if (tf < 0) tf += ell;
                    if (tf < 1e-5 || tf > ell - 1e-5) continue;
                    // the folded parameter alone keys the dedup (modularly,
                    // since residues live on a circle): identical double
                    // cosets reproduce it to well under the band, while the
                    // crossing angle is noise-amplified near tangency and
                    // never decides
                    bool dup = false;
                    for (double sv : seen) {
                        double dd = std::abs(sv - tf);
                        if (std::min(dd, ell - dd) < 1e-4) {
                            dup = true;
                            break;
                        }
                    }
                    if (dup) continue;
                    seen.push_back(tf);
                    // distinct folded parameters = distinct translate orbits,
                    // each one a certified crossing of the class
                    if (static_cast<int>(seen.size()) > 2 * p) return true;
                }
            }
        return false;
    } catch (const NeedEscalation&) {
        return false;  // inconclusive; the full engine decides
    }
}

// ---------------------------------------------------------------------------
// Class enumeration: canonical necklace DFS
// ---------------------------------------------------------------------------

// w is canonical iff it is lexicographically least (by letter rank) among all
// rotations of w and of w^-1.
bool is_canonical_necklace(const Word& w, int n_gens) {
    int n = static_cast<int>(w.size());
    auto rk = [&](Letter v) { return letter_rank(v, n_gens); };
    for (int s = 1; s < n; ++s) {
        for (int k = 0; k < n; ++k) {
            int r1 = rk(w[(s + k) % n]), r0 = rk(w[k]);
            if (r1 < r0) return false;
            if (r1 > r0) break;
        }
    }
    Word iw = inverse(w);
    for (int s = 0; s < n; ++s) {
        for (int k = 0; k < n; ++k) {
            int r1 = rk(iw[(s + k) % n]), r0 = rk(w[k]);
            if (r1 < r0) return false;
            if (r1 > r0) break;
        }
    }
    return true;
}

// longest cyclic factor of w shared with a symmetrized relator
int max_cyclic_relator_match(const Presentation& P, const Word& w) {
    int n = static_cast<int>(w.size());
    int L = static_cast<int>(P.relator().size());
    int best = n > 0 ? 1 : 0;
    for (int i = 0; i < n; ++i) {
        if (n < 2) break;
        int sym = P.sym_with_prefix(w[i], w[(i + 1) % n]);
        if (sym < 0) continue;
        const Word& r = P.symmetrized[static_cast<std::size_t>(sym)];
        int m = 2;
        while (m < n && m < L && r[m] == w[(i + m) % n]) ++m;
        best = std::max(best, m);
    }
    return best;
}

}  // namespace

void visit_classes(const Presentation& P, int max_len,
                   const std::function<void(const CurveClass&)>& visit) {
    if (P.relators.empty())
        throw domain_error("visit_classes needs a presentation with a relator");
    if (max_len < 1) return;
    int n2 = 2 * P.n_gens;
    int L = static_cast<int>(P.relator().size());
    int half = L / 2;

    Word w;
    std::function<void(int, int)> rec = [&](int pos, int len) {
        for (int r = 0; r < n2; ++r) {
            Letter v = r < P.n_gens ? static_cast<Letter>(r + 1)
                                    : static_cast<Letter>(-(r - P.n_gens + 1));
            if (pos > 0 && v == letter_inverse(w[pos - 1])) continue;
            if (pos > 0) {
                // the canonical necklace starts with a rank-minimal letter of
                // the word and of its inverse
                int r0 = letter_rank(w[0], P.n_gens);
                if (letter_rank(v, P.n_gens) < r0) continue;
                if (letter_rank(letter_inverse(v), P.n_gens) < r0) continue;
            }
            if (pos == len - 1 && v == letter_inverse(w[0])) continue;
            w[pos] = v;
            if (pos < len - 1) {
                rec(pos + 1, len);
                continue;
            }
            if (!is_canonical_necklace(w, P.n_gens)) continue;
            int m = max_cyclic_relator_match(P, w);
            if (2 * m > L) continue;  // cyclically Dehn-reducible
            CurveClass cc;
            if (m >= half) {
                // a half-relator factor opens length-preserving rewrites:
                // only the class-wide canonical word survives, and powers may
                // hide behind such rewrites
                if (canonical_class(P, w) != w) continue;
                PrimitiveDecomposition pd = primitive_root(P, w);
                cc.primitive = pd.power == 1;
                cc.root = pd.root;
            } else {
                int period = cyclic_period(w);
                cc.primitive = period == static_cast<int>(w.size());
                if (cc.primitive) {
                    cc.root = w;
                } else {
                    Word root(w.begin(), w.begin() + period);
                    cc.root = canonical_class(P, root);
                }
            }
            cc.word = w;
            visit(cc);
        }
    };
    for (int len = 1; len <= max_len; ++len) {
        w.assign(len, 0);
        rec(0, len);
    }
}

std::vector<CurveClass> enumerate_classes(const Presentation& P, int max_len) {
    std::vector<CurveClass> out;
    visit_classes(P, max_len, [&](const CurveClass& cc) { out.push_back(cc); });
    return out;
}

SelfIntersectionResult self_intersection(const Presentation& P,
                                         const Representation& F, const Word& c,
                                         int radius) {
    return si_dispatch(P, F, c, radius, nullptr, 0);
}

SelfIntersectionResult self_intersection_filtered(const Presentation& P,
                                                  const Representation& F,
                                                  const Word& c, int radius,
                                                  const std::vector<int>& hom,
                                                  int degree) {
    if (degree < 1 || static_cast<int>(hom.size()) != P.n_gens)
        throw domain_error("self_intersection_filtered: bad homomorphism data");
    return si_dispatch(P, F, c, radius, &hom, degree);
}

StratumSample stratum_sample(const Presentation& P, const Representation& F, int p,
                             int max_len, int radius, std::size_t excluded_cap) {
    validate_seed(P, F);
    if (p < 0) throw domain_error("stratum_sample: p must be non-negative");
    StratumSample out;
    out.genus = P.genus;
    out.p = p;
    out.max_word_length = max_len;

    Engine<double> E(P);
    visit_classes(P, max_len, [&](const CurveClass& cc) {
        ++out.scanned_total;
        auto exclude = [&]() {
            ++out.excluded_total;
            if (out.excluded.size() < excluded_cap) out.excluded.push_back(cc.word);
        };
        if (!cc.primitive) {
            exclude();
            return;
        }
        if (fast_reject(E, cc.word, p)) {
            exclude();
            return;
        }
        SelfIntersectionResult r = si_dispatch(P, F, cc.word, radius, nullptr, 0);
        if (r.si == p) {
            CurveClass adm = cc;
            adm.si = r.si;
            out.classes.push_back(std::move(adm));
        } else {
            exclude();
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Axis arrangement on a fixed transversal
// ---------------------------------------------------------------------------

namespace {

template <class R>
struct TransversalFrame {
    M2<R> K, Kinv;
    R lo{}, hi{};
};

// The transversal is the geodesic orthogonal to the a1-axis at the projection
// of the base point, clipped to the fundamental polygon.
template <class R>
TransversalFrame<R> transversal_frame(const Engine<R>& E) {
    using std::exp;
    using std::sqrt;
    AxisFrame<R> F1 = axis_frame(E.img[0]);
    Pt<R> zi = moebius(F1.K, E.center);
    R t0 = axis_foot_param(zi);
    R r = exp(t0);
    R s = sqrt(R(2) * r);
    M2<R> B{R(1) / s, -r / s, R(1) / s, r / s};
    TransversalFrame<R> out;
    out.K = B * F1.K;
    out.Kinv = out.K.inv();

    auto inside_gap = [&](const R& t) {
        // positive while strictly inside the base cell
        Pt<R> z = moebius(out.Kinv, Pt<R>{R(0), exp(t)});
        R dc = cosh_dist(z, E.center);
        R best{};
        for (int k = 0; k < E.n2; ++k) {
            R dn = cosh_dist(z, E.nbr[k]) - dc;
            if (k == 0 || dn < best) best = dn;
        }
        return best;
    };
    if (!(inside_gap(R(0)) > R(0)))
        throw domain_error("transversal base point is not inside the cell");
    auto clip = [&](int dir) {
        R a = R(0), b{};
        bool found = false;
        for (int k = 1; k <= 400; ++k) {
            b = R(dir) * R(0.05) * R(k);
            if (inside_gap(b) <= R(0)) {
                found = true;
                break;
            }
            a = b;
        }
        if (!found) throw domain_error("transversal does not leave the cell");
        for (int it = 0; it < 120; ++it) {
            R m = (a + b) / R(2);
            if (inside_gap(m) > R(0))
                a = m;
            else
                b = m;
        }
        return (a + b) / R(2);
    };
    out.hi = clip(+1);
    out.lo = clip(-1);
    return out;
}

template <class R>
std::vector<typename Engine<R>::Node> chain_filter(const Engine<R>& E,
                                                   const RegionResult<R>& region,
                                                   const R& lo, const R& hi) {
    using std::cosh;
    using std::exp;
    std::vector<typename Engine<R>::Node> chain;
    R chain_cosh = cosh(E.Rrad + R(0.05));
    for (const auto& nd : region.nodes) {
        R fc = nd.foot < lo ? lo : (nd.foot > hi ? hi : nd.foot);
        Pt<R> zi = moebius(nd.fmat, E.center);
        Pt<R> q{R(0), exp(fc)};
        if (cosh_dist(zi, q) <= chain_cosh) chain.push_back(nd);
    }
    return chain;
}

template <class R>
std::vector<Crossing<R>> arrangement_class(const Engine<R>& E,
                                           const TransversalFrame<R>& TF,
                                           const std::vector<typename Engine<R>::Node>& chainL,
                                           const Word& c, int radius) {
    using std::asinh;
    ClassFrames<R> CF = class_frames(E, c);
    R delta = R(0.35), slack = R(0.05);
    R seg_lo = CF.w1 - E.Rrad - delta;
    R seg_hi = CF.w1 + CF.ell + E.Rrad + delta;
    R keep = R(2) * E.Rrad + delta;
    RegionResult<R> region =
        region_bfs(E, CF.K, CF.Kinv, seg_lo, seg_hi, keep, radius, nullptr, 0);
    std::vector<typename Engine<R>::Node> tp;
    for (const auto& nd : region.nodes)
        if (asinh(nd.sdist) <= E.Rrad + slack && nd.foot >= CF.w1 - slack &&
            nd.foot <= CF.w1 + CF.ell + slack)
            tp.push_back(nd);
    int kmax = 4 + static_cast<int>(to_double((seg_hi - seg_lo) / CF.ell) * 3);
    // the transversal is short (clipped to the base cell), so its exactly
    // lifted frame needs no re-alignment; the translated class does
    ResolverSpec rspec;
    rspec.ax_word = &CF.rotated;
    rspec.ax_ell = to_double(CF.ell);
    CountResult<R> cnt =
        count_crossings<R>(E.P, CF.rotated, kmax, false, chainL, tp, CF.Kinv,
                           TF.K, TF.lo, TF.hi, false, 0, rspec);
    return cnt.crossings;
}

}  // namespace

AxisArrangement axis_arrangement(const Presentation& P, const Representation& F,
                                 const std::vector<CurveClass>& classes, int radius) {
    validate_seed(P, F);
    AxisArrangement out;
    out.classes = classes.size();

    Engine<double> E(P);
    TransversalFrame<double> TF = transversal_frame(E);
    out.window_lo = TF.lo;
    out.window_hi = TF.hi;
    double delta = 0.35;
    RegionResult<double> regionL =
        region_bfs(E, TF.K, TF.Kinv, TF.lo - E.Rrad - delta, TF.hi + E.Rrad + delta,
                   2 * E.Rrad + delta, radius, nullptr, 0);
    std::vector<Engine<double>::Node> chainL =
        chain_filter(E, regionL, TF.lo, TF.hi);

    // lazily built multiprecision mirror for escalated classes
    std::unique_ptr<Engine<mpf>> Em;
    std::unique_ptr<TransversalFrame<mpf>> TFm;
    std::vector<Engine<mpf>::Node> chainLm;

    double span = TF.hi - TF.lo;
    double pi = pi_const<double>();
    for (const auto& cc : classes) {
        Word c = canonical_class(P, cc.word);
        if (c.empty()) throw domain_error("axis_arrangement: trivial class");
        // a proper power shares its axis (and crossing points) with its root,
        // and only the root's translates form a full coset sweep of the axis
        PrimitiveDecomposition pd = primitive_root(P, c);
        if (pd.power > 1) c = pd.root;
        std::vector<ArrangementPoint> pts;
        auto emit = [&](double t, double theta) {
            ArrangementPoint ap;
            ap.s = (t - TF.lo) / span;
            ap.theta = theta / pi;
            pts.push_back(ap);
        };
        bool use_mp = stable_length_proxy(F, c) > 26.0;
        if (!use_mp) {
            try {
                for (const auto& cr : arrangement_class(E, TF, chainL, c, radius))
                    emit(cr.t, cr.theta);
            } catch (const NeedEscalation&) {
                use_mp = true;
                pts.clear();
            }
        }
        if (use_mp) {
            ensure_mp_precision();
            if (!Em) {
                Em = std::make_unique<Engine<mpf>>(P);
                TFm = std::make_unique<TransversalFrame<mpf>>(transversal_frame(*Em));
                mpf mlo = TFm->lo - Em->Rrad - mpf(delta);
                mpf mhi = TFm->hi + Em->Rrad + mpf(delta);
                mpf mkeep = mpf(2) * Em->Rrad + mpf(delta);
                RegionResult<mpf> rl = region_bfs(*Em, TFm->K, TFm->Kinv, mlo, mhi,
                                                  mkeep, radius, nullptr, 0);
                chainLm = chain_filter(*Em, rl, TFm->lo, TFm->hi);
            }
            for (const auto& cr : arrangement_class(*Em, *TFm, chainLm, c, radius))
                emit(to_double(cr.t), to_double(cr.theta));
        }
        out.points.insert(out.points.end(), pts.begin(), pts.end());
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const ArrangementPoint& a, const ArrangementPoint& b) {
                  return a.s < b.s || (a.s == b.s && a.theta < b.theta);
              });
    return out;
}

BoxCountEstimate bs_dimension_estimate(const AxisArrangement& A, int max_grid) {
    if (max_grid < 2) throw domain_error("bs_dimension_estimate: max_grid < 2");
    BoxCountEstimate out;
    out.points = A.points.size();
    for (int n = 2; n <= max_grid; n *= 2) {
        std::unordered_set<long long> cells;
        for (const auto& p : A.points) {
            long long cx =
                std::clamp(static_cast<long long>(std::floor(p.s * n)), 0LL,
                           static_cast<long long>(n - 1));
            long long cy =
                std::clamp(static_cast<long long>(std::floor(p.theta * n)), 0LL,
                           static_cast<long long>(n - 1));
            cells.insert(cx * static_cast<long long>(n) + cy);
        }
        out.grids.push_back(n);
        out.occupied.push_back(static_cast<int>(cells.size()));
    }
    if (out.points == 0) return out;

    // least squares of log(occupied) against log(grid)
    int m = static_cast<int>(out.grids.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < m; ++i) {
        double x = std::log(static_cast<double>(out.grids[i]));
        double y = std::log(static_cast<double>(std::max(out.occupied[i], 1)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double vx = sxx - sx * sx / m, vy = syy - sy * sy / m, cxy = sxy - sx * sy / m;
    if (vx > 0) {
        out.slope = cxy / vx;
        out.r_squared = vy > 1e-30 ? (cxy * cxy) / (vx * vy) : 1.0;
    }
    return out;
}

}  // namespace forge
