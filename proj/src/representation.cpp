#include "forge/representation.hpp"

#include <cmath>
#include <random>

#include "forge/core.hpp"

namespace forge {

StabilizedProduct StabilizedProduct::identity(int rank) {
    StabilizedProduct P;
    P.unit = Eigen::MatrixXcd::Identity(rank, rank);
    P.log_scale = 0.0;
    return P;
}

void StabilizedProduct::multiply_right(const Eigen::MatrixXcd& M) {
    unit = unit * M;
    double f = unit.norm() / std::sqrt(static_cast<double>(rank()));
    if (f > 2.0 || f < 0.5) {
        unit /= f;
        log_scale += std::log(f);
    }
}

double StabilizedProduct::log_abs_trace() const {
    double t = std::abs(unit.trace());
    if (t == 0.0) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(t);
}

double StabilizedProduct::log_det_defect() const {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(unit);
    double s = 0.0;
    for (int i = 0; i < rank(); ++i) s += std::log(svd.singularValues()(i));
    return s + rank() * log_scale;
}

const Eigen::MatrixXcd& Representation::image_of(Letter v) const {
    int i = letter_index(v);
    if (i < 0 || i >= n_gens) throw domain_error("letter outside representation");
    return v > 0 ? images[i] : inverses[i];
}

void Representation::rebuild_inverses() {
    inverses.clear();
    for (const auto& M : images) {
        if (rank == 2) {
            Eigen::MatrixXcd A(2, 2);  // adjugate: exact inverse for det 1
            A << M(1, 1), -M(0, 1), -M(1, 0), M(0, 0);
            inverses.push_back(A);
        } else {
            inverses.push_back(M.inverse());
        }
    }
}

Eigen::MatrixXcd Representation::product(const Word& w) const {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(rank, rank);
    for (Letter v : w) M = M * image_of(v);
    return M;
}

double Representation::relator_defect(const Presentation& P) const {
    double worst = 0.0;
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(rank, rank);
    for (const Word& r : P.relators)
        worst = std::max(worst, (product(r) - I).cwiseAbs().maxCoeff());
    return worst;
}

bool Representation::is_real(double tol) const {
    for (const auto& M : images)
        if (M.imag().cwiseAbs().maxCoeff() > tol) return false;
    return true;
}

std::vector<M2<double>> Representation::real_m2() const {
    if (rank != 2 || !is_real())
        throw domain_error("real_m2 requires a rank-2 real representation");
    std::vector<M2<double>> out;
    for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i < n_gens; ++i) {
            const Eigen::MatrixXcd& M = pass == 0 ? images[i] : inverses[i];
            out.push_back({M(0, 0).real(), M(0, 1).real(),
                           M(1, 0).real(), M(1, 1).real()});
        }
    return out;
}

Representation fuchsian(const Presentation& P) {
    if (P.genus < 2) throw domain_error("fuchsian requires a surface presentation");
    auto gens = fuchsian_generators<double>(P.genus);
    Representation rep;
    rep.kind = "fuchsian";
    rep.n_gens = P.n_gens;
    rep.rank = 2;
    rep.genus = P.genus;
    for (const auto& G : gens) {
        Eigen::MatrixXcd M(2, 2);
        M << G.a, G.b, G.c, G.d;
        rep.images.push_back(M);
    }
    rep.rebuild_inverses();
    rep.relator_residual = rep.relator_defect(P);
    if (rep.relator_residual > 1e-10)
        throw domain_error("fuchsian construction failed the relator check");
    for (const auto& G : gens)
        if (std::abs(G.tr()) <= 2.0)
            throw domain_error("fuchsian construction produced a non-hyperbolic generator");
    return rep;
}

StabilizedProduct evaluate(const Representation& rep, const Word& w) {
    StabilizedProduct P = StabilizedProduct::identity(rep.rank);
    for (Letter v : w) P.multiply_right(rep.image_of(v));
    return P;
}

double stable_length_proxy(const Representation& rep, const Word& w) {
    StabilizedProduct P = evaluate(rep, w);
    // u = log(|tr|/2); arccosh(e^u) = u + log(1 + sqrt(1 - e^{-2u}))
    double u = P.log_abs_trace() - std::log(2.0);
    if (!(u > 0.0)) return 0.0;
    double inner = -std::expm1(-2.0 * u);  // 1 - e^{-2u}, accurate near 0
    return 2.0 * (u + std::log1p(std::sqrt(std::max(0.0, inner))));
}

Representation perturb(const Representation& rep, double eps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Representation out = rep;
    out.kind = "perturbed";
    for (auto& M : out.images) {
        for (int r = 0; r < out.rank; ++r)
            for (int c = 0; c < out.rank; ++c)
                M(r, c) += eps * std::complex<double>(U(rng), U(rng));
        // scale back onto the det-1 slice (principal root)
        std::complex<double> det = M.determinant();
        std::complex<double> root =
            std::exp(std::log(det) / static_cast<double>(out.rank));
        M /= root;
    }
    out.rebuild_inverses();
    return out;
}

JorgensenReport jorgensen_check(const Representation& rep) {
    if (rep.rank != 2)
        throw domain_error("jorgensen_check applies to rank-2 representations");
    JorgensenReport rep_out;
    rep_out.min_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rep.n_gens; ++i)
        for (int j = 0; j < rep.n_gens; ++j) {
            if (i == j) continue;
            const auto& U = rep.images[i];
            const auto& V = rep.images[j];
            Eigen::MatrixXcd Ui = rep.inverses[i], Vi = rep.inverses[j];
            std::complex<double> tru = U.trace();
            std::complex<double> trc = (U * V * Ui * Vi).trace();
            double val = std::abs(tru * tru - 4.0) + std::abs(trc - 2.0);
            JorgensenReport::Pair p{i, j, val};
            rep_out.pairs.push_back(p);
            if (val < 1.0) rep_out.violations.push_back(p);
            rep_out.min_value = std::min(rep_out.min_value, val);
        }
    return rep_out;
}

}  // namespace forge
