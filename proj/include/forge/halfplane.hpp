#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "forge/core.hpp"

// Upper half-plane model primitives, templated over the scalar so that the
// same formulas run in double and (for escalation/oracles) in multiprecision.

namespace forge {

template <class R>
struct M2 {
    R a{}, b{}, c{}, d{};

    static M2 id() { return {R(1), R(0), R(0), R(1)}; }

    M2 operator*(const M2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    M2 operator-() const { return {-a, -b, -c, -d}; }
    // inverse of a det-1 matrix
    M2 inv() const { return {d, -b, -c, a}; }
    R tr() const { return a + d; }
    R det() const { return a * d - b * c; }
};

template <class R>
struct Pt {
    R x{}, y{};  // y > 0
};

template <class R>
Pt<R> moebius(const M2<R>& M, const Pt<R>& z) {
    // (az+b)/(cz+d) written out over the reals
    R nx = M.a * z.x + M.b, ny = M.a * z.y;
    R dx = M.c * z.x + M.d, dy = M.c * z.y;
    R den = dx * dx + dy * dy;
    return {(nx * dx + ny * dy) / den, (ny * dx - nx * dy) / den};
}

template <class R>
R cosh_dist(const Pt<R>& p, const Pt<R>& q) {
    R dx = p.x - q.x, dy = p.y - q.y;
    return R(1) + (dx * dx + dy * dy) / (R(2) * p.y * q.y);
}

// distance from z to the imaginary axis satisfies sinh(d) = |x|/y
template <class R>
R sinh_dist_to_im_axis(const Pt<R>& z) {
    using std::abs;
    return abs(z.x) / z.y;
}

// arclength parameter of the orthogonal projection of z onto the imaginary
// axis (the axis point i e^t)
template <class R>
R axis_foot_param(const Pt<R>& z) {
    using std::log;
    return log(z.x * z.x + z.y * z.y) / R(2);
}

template <class R>
R pi_const() {
    using std::atan;
    return R(4) * atan(R(1));
}

// --- regular 4g-gon side-pairing construction -----------------------------

// Isometry sending p to i (upper triangular normalizer).
template <class R>
M2<R> normalizer_to_i(const Pt<R>& p) {
    using std::sqrt;
    R s = sqrt(p.y);
    return {R(1) / s, -p.x / s, R(0), s};
}

// Rotation about i whose derivative at i is e^{i phi}.
template <class R>
M2<R> rotation_about_i(const R& phi) {
    using std::cos;
    using std::sin;
    R c = cos(phi / R(2)), s = sin(phi / R(2));
    return {c, s, -s, c};
}

// Isometry sending p to i and q onto the imaginary axis above i.
template <class R>
M2<R> frame_of_segment(const Pt<R>& p, const Pt<R>& q) {
    using std::atan2;
    M2<R> N = normalizer_to_i(p);
    Pt<R> z = moebius(N, q);
    // delta = arg((z - i)/(z + i))
    R ax = z.x, ay = z.y - R(1);
    R bx = z.x, by = z.y + R(1);
    R den = bx * bx + by * by;
    R rx = (ax * bx + ay * by) / den, ry = (ay * bx - ax * by) / den;
    R delta = atan2(ry, rx);
    R neg_delta = -delta;
    return rotation_about_i(neg_delta) * N;
}

// Unique orientation-preserving isometry with p -> p2, q -> q2.
template <class R>
M2<R> carry_segment(const Pt<R>& p, const Pt<R>& q, const Pt<R>& p2, const Pt<R>& q2) {
    return frame_of_segment(p2, q2).inv() * frame_of_segment(p, q);
}

template <class R>
struct PolygonData {
    std::vector<Pt<R>> vertices;  // 4g vertices, counterclockwise
    R circumradius{}, apothem{};
    Pt<R> center{};  // i
};

// Regular 4g-gon centered at i with vertex angle 2*pi/(4g), so that 4g
// copies fit around each vertex.
template <class R>
PolygonData<R> regular_polygon(int g) {
    using std::acosh;
    using std::cos;
    using std::sin;
    using std::sqrt;
    using std::tanh;
    if (g < 2) throw domain_error("regular_polygon requires genus >= 2");
    int n = 4 * g;
    R pi = pi_const<R>();
    R alpha = pi / R(n);
    R cot_a = cos(alpha) / sin(alpha);
    R cosh_R = cot_a * cot_a;
    R Rrad = acosh(cosh_R);
    R rho = tanh(Rrad / R(2));
    PolygonData<R> P;
    P.circumradius = Rrad;
    P.apothem = acosh(cot_a);
    P.center = {R(0), R(1)};
    for (int j = 0; j < n; ++j) {
        R theta = R(2) * pi * R(j) / R(n);
        R wx = rho * cos(theta), wy = rho * sin(theta);
        // z = i (1+w)/(1-w)
        R ax = R(1) + wx, ay = wy;
        R bx = R(1) - wx, by = -wy;
        R den = bx * bx + by * by;
        R qx = (ax * bx + ay * by) / den, qy = (ay * bx - ax * by) / den;
        P.vertices.push_back({-qy, qx});
    }
    return P;
}

// Side-pairing generators of the genus-g surface group, in the order
// a1, b1, a2, b2, ...  Side 4h+k (k = 0 -> a_{h+1}, k = 1 -> b_{h+1})
// carries the positive letter; its partner is side 4h+k+2, glued with
// reversed orientation. The a-generators are the pairing maps themselves,
// the b-generators the inverses of theirs; this is the unique assignment
// (up to symmetry) for which [a1,b1]...[ag,bg] evaluates to +I exactly.
template <class R>
std::vector<M2<R>> fuchsian_generators(int g) {
    PolygonData<R> P = regular_polygon<R>(g);
    int n = 4 * g;
    std::vector<M2<R>> gens;
    for (int h = 0; h < g; ++h)
        for (int k = 0; k < 2; ++k) {
            int p = 4 * h + k, q = p + 2;
            const Pt<R>&Vp = P.vertices[p], &Vp1 = P.vertices[(p + 1) % n];
            const Pt<R>&Vq = P.vertices[q], &Vq1 = P.vertices[(q + 1) % n];
            M2<R> G = carry_segment(Vq, Vq1, Vp1, Vp);
            gens.push_back(k == 0 ? G : G.inv());
        }
    return gens;
}

// --- axis normalization -----------------------------------------------------

// For hyperbolic M (|tr| > 2), K in SL(2,R) sending the repelling fixed point
// to 0 and the attracting one to infinity, so K M K^-1 = diag(e^{l/2}, e^{-l/2})
// up to sign; ell is the translation length.
template <class R>
struct AxisFrame {
    M2<R> K;
    R ell{};
};

template <class R>
AxisFrame<R> axis_frame(M2<R> M) {
    using std::abs;
    using std::log;
    using std::sqrt;
    R t = M.tr();
    if (t < R(0)) {
        M = -M;
        t = -t;
    }
    if (!(t > R(2))) throw domain_error("axis_frame: matrix is not hyperbolic");
    R disc = sqrt(t * t - R(4));
    R lp = (t + disc) / R(2);  // attracting eigenvalue > 1
    R lm = (t - disc) / R(2);
    auto eigvec = [&](const R& lam, R& vx, R& vy) {
        // rows of (M - lam I) are proportional; pick the numerically fatter
        // of the two standard eigenvector formulas
        R n1 = M.b * M.b + (lam - M.a) * (lam - M.a);
        R n2 = (lam - M.d) * (lam - M.d) + M.c * M.c;
        if (n1 >= n2) {
            vx = M.b;
            vy = lam - M.a;
        } else {
            vx = lam - M.d;
            vy = M.c;
        }
    };
    R xp, yp, xm, ym;
    eigvec(lp, xp, yp);
    eigvec(lm, xm, ym);
    M2<R> K{ym, -xm, yp, -xp};
    R det = K.det();
    if (det < R(0)) {
        K.a = -K.a;
        K.b = -K.b;
        det = -det;
    }
    R s = sqrt(det);
    K.a /= s;
    K.b /= s;
    K.c /= s;
    K.d /= s;
    AxisFrame<R> F;
    F.K = K;
    F.ell = R(2) * log(lp);
    return F;
}

}  // namespace forge
