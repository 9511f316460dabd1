#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "synthesis.hpp"

namespace fraclmi {

inline constexpr std::size_t kFullMemoryLimit = 100000;

struct SimConfig {
    double step = 1e-3;
    double horizon = 10.0;
    // Number of history terms kept in the convolution; 0 means full memory up to
    // kFullMemoryLimit steps and a window of that length beyond it.
    std::size_t memoryLength = 0;
    // Initial first derivative for 1 <= alpha < 2. Only a zero value (start from
    // rest) is supported by the zero-history formulation.
    double initialRate = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    double alpha = 0.0;
};

// Grunwald-Letnikov weights c_j = (-1)^j binom(alpha, j):
//   c_0 = 1, c_j = (1 - (alpha + 1)/j) c_{j-1}.
inline std::vector<double> gl_coefficients(double alpha, std::size_t count) {
    std::vector<double> c(count + 1);
    c[0] = 1.0;
    for (std::size_t j = 1; j <= count; ++j) {
        c[j] = (1.0 - (alpha + 1.0) / static_cast<double>(j)) * c[j - 1];
    }
    return c;
}

// Implicit GL stepping of the Caputo problem D^a x = A x, x(0) = x0, written for
// z = x - x0 (zero history):
//   (I - h^a A) z_k = -sum_{j=1..k} c_j z_{k-j} + h^a A x0,  z_0 = 0.
inline Trajectory simulate(const ClosedLoop& loop, const Vector& x0, const SimConfig& cfg) {
    require_square(loop.A, "closed-loop matrix");
    if (x0.size() != loop.A.rows()) throw DimensionError("initial state has the wrong dimension");
    if (!(cfg.step > 0.0) || !(cfg.horizon >= cfg.step)) throw StepFailure("need step > 0 and horizon >= step");
    if (!(loop.alpha > 0.0 && loop.alpha < 2.0)) throw StepFailure("fractional order must lie in (0, 2)");
    if (loop.alpha > 1.0 && cfg.initialRate != 0.0) {
        throw StepFailure("nonzero initial rate is not supported by the zero-history scheme");
    }
    const Eigen::Index d = loop.A.rows();
    const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step));
    const std::size_t memory = cfg.memoryLength ? cfg.memoryLength : kFullMemoryLimit;
    const double ha = std::pow(cfg.step, loop.alpha);
    const Matrix stepping = Matrix::Identity(d, d) - ha * loop.A;
    Eigen::PartialPivLU<Matrix> lu(stepping);
    if (d > 0 && reciprocal_condition(stepping) < 1e-14) throw StepFailure("stepping matrix I - h^a A is singular");
    const std::vector<double> c = gl_coefficients(loop.alpha, std::min(steps, memory));
    const Vector forcing = ha * (loop.A * x0);

    Trajectory tr;
    tr.alpha = loop.alpha;
    tr.times.reserve(steps + 1);
    tr.states.reserve(steps + 1);
    std::vector<Vector> z;
    z.reserve(steps + 1);
    z.push_back(Vector::Zero(d));
    tr.times.push_back(0.0);
    tr.states.push_back(x0);
    for (std::size_t k = 1; k <= steps; ++k) {
        Vector rhs = forcing;
        const std::size_t jmax = std::min(k, memory);
        for (std::size_t j = 1; j <= jmax; ++j) rhs.noalias() -= c[j] * z[k - j];
        z.push_back(lu.solve(rhs));
        if (!z.back().allFinite()) throw StepFailure("simulation diverged to non-finite values");
        tr.times.push_back(static_cast<double>(k) * cfg.step);
        tr.states.push_back(z.back() + x0);
    }
    return tr;
}

struct SettlingMetrics {
    std::optional<double> overall;
    std::vector<std::optional<double>> perComponent;
};

// Last time after which |x(t)| stays within band * |x0| (infinity norm overall,
// absolute value per component, both relative to ||x0||_inf). Absent when the
// trajectory is still outside the band at the horizon.
inline SettlingMetrics settling_metrics(const Trajectory& tr, double band) {
    if (!(band > 0.0 && band < 1.0)) throw DimensionError("settling band must lie in (0, 1)");
    SettlingMetrics out;
    if (tr.states.empty()) return out;
    const double limit = band * tr.states.front().cwiseAbs().maxCoeff();
    const Eigen::Index d = tr.states.front().size();
    auto settle = [&](auto&& value) -> std::optional<double> {
        std::size_t k = tr.states.size();
        while (k > 0 && value(tr.states[k - 1]) <= limit) --k;
        if (k == tr.states.size()) return std::nullopt;
        return k == 0 ? tr.times.front() : tr.times[k];
    };
    out.overall = settle([](const Vector& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; });
    for (Eigen::Index i = 0; i < d; ++i) {
        out.perComponent.push_back(settle([i](const Vector& x) { return std::abs(x(i)); }));
    }
    return out;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, std::size_t stride = 1) {
    const Eigen::Index d = tr.states.empty() ? 0 : tr.states.front().size();
    os << "t";
    for (Eigen::Index i = 0; i < d; ++i) os << ",x" << (i + 1);
    os << "\n";
    os.precision(12);
    for (std::size_t k = 0; k < tr.times.size(); k += std::max<std::size_t>(1, stride)) {
        os << tr.times[k];
        for (Eigen::Index i = 0; i < d; ++i) os << "," << tr.states[k](i);
        os << "\n";
    }
}

// Minimal SVG line plot of every state component.
inline std::string trajectory_svg(const Trajectory& tr, const std::string& title = "") {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    const double w = 640, h = 360, pad = 40;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) os << "<text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    if (tr.states.empty()) {
        os << "</svg>\n";
        return os.str();
    }
    double lo = 0.0, hi = 0.0;
    for (const auto& x : tr.states) {
        if (x.size() == 0) continue;
        lo = std::min(lo, x.minCoeff());
        hi = std::max(hi, x.maxCoeff());
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double t0 = tr.times.front(), t1 = std::max(tr.times.back(), t0 + 1e-12);
    auto px = [&](double t) { return pad + (t - t0) / (t1 - t0) * (w - 2 * pad); };
    auto py = [&](double v) { return h - pad - (v - lo) / (hi - lo) * (h - 2 * pad); };
    os << "<line x1=\"" << pad << "\" y1=\"" << py(0) << "\" x2=\"" << w - pad << "\" y2=\"" << py(0)
       << "\" stroke=\"#999\"/>\n";
    const std::size_t stride = std::max<std::size_t>(1, tr.times.size() / 800);
    for (Eigen::Index i = 0; i < tr.states.front().size(); ++i) {
        os << "<path fill=\"none\" stroke=\"" << palette[i % 6] << "\" d=\"";
        for (std::size_t k = 0; k < tr.times.size(); k += stride) {
            os << (k ? " L" : "M") << px(tr.times[k]) << "," << py(tr.states[k](i));
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace fraclmi
