#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core.hpp"

namespace fraclmi {

// Higher-order fractional model
//   A_n D^{n a} q + ... + A_1 D^a q + A_0 q = E
// with optional perturbations Delta_i of each coefficient.
struct HigherOrderModel {
    double alpha = 0.5;
    std::vector<Matrix> coeffs;  // A_0 .. A_n
    std::vector<Matrix> deltas;  // Delta_0 .. Delta_n, empty when nominal
    Vector drive;                // E
};

// Pseudo-state model D^a x = A x + B u, y = C x.
struct FoltiSystem {
    double alpha = 0.5;
    Matrix A;
    Matrix B;
    Matrix C;

    Eigen::Index states() const { return A.rows(); }
    Eigen::Index inputs() const { return B.cols(); }
    Eigen::Index outputs() const { return C.rows(); }

    void validate() const {
        if (!(alpha > 0.0 && alpha < 2.0)) {
            throw InvalidMatrix("fractional order must lie in (0, 2), got " + std::to_string(alpha));
        }
        require_square(A, "A");
        if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
        if (C.cols() != A.rows()) throw DimensionError("C must have as many columns as A");
        if (!A.allFinite() || !B.allFinite() || !C.allFinite()) {
            throw InvalidMatrix("system matrices contain non-finite entries");
        }
    }
};

// Delta_I = sum m_i M_i with |m_i| <= iBound, Delta_A = sum n_j N_j with |n_j| <= aBound.
// Empty generator lists encode a certain system.
struct UncertaintyModel {
    std::vector<Matrix> iGenerators;
    double iBound = 1.0;
    std::vector<Matrix> aGenerators;
    double aBound = 1.0;

    std::size_t p() const { return iGenerators.size(); }
    std::size_t q() const { return aGenerators.size(); }
    bool certain() const { return iGenerators.empty() && aGenerators.empty(); }

    void validate(Eigen::Index n) const {
        if (!(iBound > 0.0) || !(aBound > 0.0)) throw BoundViolation("uncertainty bounds must be > 0");
        for (const auto& m : iGenerators) {
            if (m.rows() != n || m.cols() != n) throw DimensionError("input-side generator must be n x n");
        }
        for (const auto& m : aGenerators) {
            if (m.rows() != n || m.cols() != n) throw DimensionError("state-side generator must be n x n");
        }
    }
};

struct UncertaintyRealization {
    Vector iParams;
    Vector aParams;
};

struct Envelope {
    Matrix H;
    Matrix G;
};

struct RealizedPlant {
    Matrix A;  // (I + Delta_I)(A + Delta_A)
    Matrix B;  // (I + Delta_I) B
};

// Reciprocal condition number (smallest over largest singular value).
inline double reciprocal_condition(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s(0) == 0.0) return 0.0;
    return s(s.size() - 1) / s(0);
}

// Block-companion pseudo-state form of a higher-order model.
inline FoltiSystem companion_form(const HigherOrderModel& model, double rcondThreshold = 1e-12) {
    if (model.coeffs.size() < 2) throw DimensionError("higher-order model needs A_0 .. A_n with n >= 1");
    const Eigen::Index m = model.coeffs.front().rows();
    for (const auto& a : model.coeffs) {
        if (a.rows() != m || a.cols() != m) throw DimensionError("coefficient matrices must all be m x m");
    }
    const std::size_t order = model.coeffs.size() - 1;
    const Matrix& lead = model.coeffs.back();
    if (reciprocal_condition(lead) < rcondThreshold) {
        throw NonsingularityViolation("leading coefficient A_n is singular or nearly singular");
    }
    const Matrix leadInv = lead.fullPivLu().inverse();

    const Eigen::Index n = static_cast<Eigen::Index>(order) * m;
    FoltiSystem sys;
    sys.alpha = model.alpha;
    sys.A = Matrix::Zero(n, n);
    for (std::size_t k = 0; k + 1 < order; ++k) {
        sys.A.block(k * m, (k + 1) * m, m, m).setIdentity();
    }
    for (std::size_t k = 0; k < order; ++k) {
        sys.A.block((order - 1) * m, k * m, m, m) = -leadInv * model.coeffs[k];
    }
    sys.B = Matrix::Zero(n, m);
    sys.B.bottomRows(m) = leadInv;
    sys.C = Matrix::Identity(n, n);
    return sys;
}

// Exact pseudo-state perturbations (Delta_I, Delta_A) induced by numeric coefficient
// perturbations Delta_0..Delta_n.
inline std::pair<Matrix, Matrix> companion_perturbation(const HigherOrderModel& model) {
    const std::size_t order = model.coeffs.size() - 1;
    const Eigen::Index m = model.coeffs.front().rows();
    const Eigen::Index n = static_cast<Eigen::Index>(order) * m;
    if (model.deltas.size() != model.coeffs.size()) {
        throw DimensionError("deltas must list Delta_0 .. Delta_n");
    }
    const Matrix perturbedLead = model.coeffs.back() + model.deltas.back();
    if (reciprocal_condition(perturbedLead) < 1e-12) {
        throw NonsingularityViolation("A_n + Delta_n is singular or nearly singular");
    }
    const Matrix leadInv = model.coeffs.back().fullPivLu().inverse();
    Matrix dI = Matrix::Zero(n, n);
    dI.bottomRightCorner(m, m) = -perturbedLead.fullPivLu().solve(model.deltas.back());
    Matrix dA = Matrix::Zero(n, n);
    for (std::size_t k = 0; k < order; ++k) {
        dA.block((order - 1) * m, k * m, m, m) = -leadInv * model.deltas[k];
    }
    return {dI, dA};
}

// H = p * mbar^2 * sum M_i M_i^T,  G = q * nbar^2 * sum N_j N_j^T.
inline Envelope uncertainty_bounds(const UncertaintyModel& u, Eigen::Index n) {
    Envelope env{Matrix::Zero(n, n), Matrix::Zero(n, n)};
    const double p = static_cast<double>(u.p());
    const double q = static_cast<double>(u.q());
    for (const auto& m : u.iGenerators) env.H += m * m.transpose();
    for (const auto& m : u.aGenerators) env.G += m * m.transpose();
    env.H *= p * u.iBound * u.iBound;
    env.G *= q * u.aBound * u.aBound;
    return env;
}

inline bool admissible(const UncertaintyModel& u, const UncertaintyRealization& r) {
    if (static_cast<std::size_t>(r.iParams.size()) != u.p() ||
        static_cast<std::size_t>(r.aParams.size()) != u.q()) {
        return false;
    }
    return (r.iParams.size() == 0 || r.iParams.cwiseAbs().maxCoeff() <= u.iBound) &&
           (r.aParams.size() == 0 || r.aParams.cwiseAbs().maxCoeff() <= u.aBound);
}

inline std::pair<Matrix, Matrix> perturbations(const UncertaintyModel& u, const UncertaintyRealization& r,
                                               Eigen::Index n) {
    Matrix dI = Matrix::Zero(n, n);
    Matrix dA = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < u.p(); ++i) dI += r.iParams(i) * u.iGenerators[i];
    for (std::size_t j = 0; j < u.q(); ++j) dA += r.aParams(j) * u.aGenerators[j];
    return {dI, dA};
}

inline RealizedPlant realize(const FoltiSystem& sys, const UncertaintyModel& u, const UncertaintyRealization& r) {
    if (static_cast<std::size_t>(r.iParams.size()) != u.p() ||
        static_cast<std::size_t>(r.aParams.size()) != u.q()) {
        throw DimensionError("realization length does not match generator count");
    }
    if (!admissible(u, r)) throw BoundViolation("uncertain parameter outside its bound");
    const Eigen::Index n = sys.states();
    auto [dI, dA] = perturbations(u, r, n);
    const Matrix left = Matrix::Identity(n, n) + dI;
    return {left * (sys.A + dA), left * sys.B};
}

inline UncertaintyRealization nominal_realization(const UncertaintyModel& u) {
    return {Vector::Zero(static_cast<Eigen::Index>(u.p())), Vector::Zero(static_cast<Eigen::Index>(u.q()))};
}

inline constexpr std::size_t kMaxVertexParams = 20;

// All 2^(p+q) sign corners of the parameter box.
inline std::vector<UncertaintyRealization> sample_vertices(const UncertaintyModel& u,
                                                           std::size_t maxParams = kMaxVertexParams) {
    const std::size_t total = u.p() + u.q();
    if (total > maxParams) {
        throw TooManyVertices(std::to_string(total) + " uncertain parameters exceed the vertex guard of " +
                              std::to_string(maxParams));
    }
    std::vector<UncertaintyRealization> out;
    out.reserve(std::size_t{1} << total);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << total); ++mask) {
        UncertaintyRealization r = nominal_realization(u);
        for (std::size_t k = 0; k < total; ++k) {
            const double sign = ((mask >> k) & 1U) ? 1.0 : -1.0;
            if (k < u.p()) {
                r.iParams(static_cast<Eigen::Index>(k)) = sign * u.iBound;
            } else {
                r.aParams(static_cast<Eigen::Index>(k - u.p())) = sign * u.aBound;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

// Uniform draws from the parameter box; deterministic for a given seed.
inline std::vector<UncertaintyRealization> sample_random(const UncertaintyModel& u, std::uint64_t seed,
                                                         std::size_t count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<UncertaintyRealization> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        UncertaintyRealization r = nominal_realization(u);
        for (Eigen::Index i = 0; i < r.iParams.size(); ++i) r.iParams(i) = u.iBound * unit(rng);
        for (Eigen::Index j = 0; j < r.aParams.size(); ++j) r.aParams(j) = u.aBound * unit(rng);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace fraclmi
