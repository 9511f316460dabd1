#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "model.hpp"

namespace fraclmi {

enum class VariableKind { Scalar, Symmetric, SkewSymmetric, Full };

inline const char* to_string(VariableKind k) {
    switch (k) {
        case VariableKind::Scalar: return "scalar";
        case VariableKind::Symmetric: return "symmetric";
        case VariableKind::SkewSymmetric: return "skew";
        case VariableKind::Full: return "full";
    }
    return "?";
}

struct DecisionVariable {
    int id = -1;
    std::string name;
    VariableKind kind = VariableKind::Scalar;
    Eigen::Index rows = 1;
    Eigen::Index cols = 1;
    Eigen::Index offset = 0;  // first scalar in the problem's flat vector

    Eigen::Index scalar_count() const {
        switch (kind) {
            case VariableKind::Scalar: return 1;
            case VariableKind::Symmetric: return rows * (rows + 1) / 2;
            case VariableKind::SkewSymmetric: return rows * (rows - 1) / 2;
            case VariableKind::Full: return rows * cols;
        }
        return 0;
    }

    // Basis matrix of the k-th free scalar.
    Matrix basis(Eigen::Index k) const {
        Matrix e = Matrix::Zero(rows, cols);
        switch (kind) {
            case VariableKind::Scalar: e(0, 0) = 1.0; break;
            case VariableKind::Full: e(k / cols, k % cols) = 1.0; break;
            case VariableKind::Symmetric:
            case VariableKind::SkewSymmetric: {
                const bool skew = kind == VariableKind::SkewSymmetric;
                Eigen::Index idx = 0;
                for (Eigen::Index i = 0; i < rows; ++i) {
                    for (Eigen::Index j = skew ? i + 1 : i; j < rows; ++j, ++idx) {
                        if (idx != k) continue;
                        e(i, j) = 1.0;
                        e(j, i) = skew ? -1.0 : 1.0;
                    }
                }
                break;
            }
        }
        return e;
    }

    // Matrix value of this variable inside a flat assignment.
    Matrix value(const Vector& x) const {
        Matrix m = Matrix::Zero(rows, cols);
        for (Eigen::Index k = 0; k < scalar_count(); ++k) m += x(offset + k) * basis(k);
        return m;
    }
};

// Matrix-valued expression affine in the scalar decision variables:
//   constant + sum_k x_k * coeff_k
// Keyed by the flat scalar index. Not necessarily symmetric or square; the
// constraint-level expressions are.
class AffineMatrixExpr {
  public:
    AffineMatrixExpr() = default;
    explicit AffineMatrixExpr(Matrix constant) : constant_(std::move(constant)) {}

    static AffineMatrixExpr zero(Eigen::Index rows, Eigen::Index cols) {
        return AffineMatrixExpr(Matrix::Zero(rows, cols));
    }

    static AffineMatrixExpr of(const DecisionVariable& v) {
        AffineMatrixExpr e = zero(v.rows, v.cols);
        for (Eigen::Index k = 0; k < v.scalar_count(); ++k) e.terms_[v.offset + k] = v.basis(k);
        return e;
    }

    Eigen::Index rows() const { return constant_.rows(); }
    Eigen::Index cols() const { return constant_.cols(); }
    const Matrix& constant() const { return constant_; }
    const std::map<Eigen::Index, Matrix>& terms() const { return terms_; }

    Matrix evaluate(const Vector& x) const {
        Matrix out = constant_;
        for (const auto& [k, c] : terms_) out += x(k) * c;
        return out;
    }

    AffineMatrixExpr transpose() const {
        AffineMatrixExpr out(constant_.transpose());
        for (const auto& [k, c] : terms_) out.terms_[k] = c.transpose();
        return out;
    }

    AffineMatrixExpr& operator+=(const AffineMatrixExpr& o) {
        check_same_shape(o);
        constant_ += o.constant_;
        for (const auto& [k, c] : o.terms_) {
            auto it = terms_.find(k);
            if (it == terms_.end()) {
                terms_.emplace(k, c);
            } else {
                it->second += c;
            }
        }
        return *this;
    }
    AffineMatrixExpr& operator+=(const Matrix& m) {
        check_same_shape(AffineMatrixExpr(m));
        constant_ += m;
        return *this;
    }
    AffineMatrixExpr& operator*=(double s) {
        constant_ *= s;
        for (auto& [k, c] : terms_) c *= s;
        return *this;
    }

    friend AffineMatrixExpr operator+(AffineMatrixExpr a, const AffineMatrixExpr& b) { return a += b; }
    friend AffineMatrixExpr operator+(AffineMatrixExpr a, const Matrix& b) { return a += b; }
    friend AffineMatrixExpr operator-(AffineMatrixExpr a, const AffineMatrixExpr& b) {
        AffineMatrixExpr nb = b;
        nb *= -1.0;
        return a += nb;
    }
    friend AffineMatrixExpr operator-(AffineMatrixExpr a, const Matrix& b) { return a += Matrix(-b); }
    friend AffineMatrixExpr operator*(double s, AffineMatrixExpr a) { return a *= s; }
    friend AffineMatrixExpr operator-(AffineMatrixExpr a) { return a *= -1.0; }

    friend AffineMatrixExpr operator*(const Matrix& m, const AffineMatrixExpr& e) {
        if (m.cols() != e.rows()) throw DimensionError("left product dimension mismatch");
        AffineMatrixExpr out(m * e.constant_);
        for (const auto& [k, c] : e.terms_) out.terms_[k] = m * c;
        return out;
    }
    friend AffineMatrixExpr operator*(const AffineMatrixExpr& e, const Matrix& m) {
        if (e.cols() != m.rows()) throw DimensionError("right product dimension mismatch");
        AffineMatrixExpr out(e.constant_ * m);
        for (const auto& [k, c] : e.terms_) out.terms_[k] = c * m;
        return out;
    }

    // kron(M, E) with constant M.
    friend AffineMatrixExpr kron(const Matrix& m, const AffineMatrixExpr& e) {
        AffineMatrixExpr out(fraclmi::kron(m, e.constant_));
        for (const auto& [k, c] : e.terms_) out.terms_[k] = fraclmi::kron(m, c);
        return out;
    }

    // s * M where s is a 1x1 expression and M constant.
    friend AffineMatrixExpr scale(const AffineMatrixExpr& s, const Matrix& m) {
        if (s.rows() != 1 || s.cols() != 1) throw DimensionError("scale() expects a 1x1 expression");
        AffineMatrixExpr out(s.constant_(0, 0) * m);
        for (const auto& [k, c] : s.terms_) out.terms_[k] = c(0, 0) * m;
        return out;
    }

    void add_term(Eigen::Index k, const Matrix& c) {
        if (c.rows() != rows() || c.cols() != cols()) throw DimensionError("term shape mismatch");
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(k, c);
        } else {
            it->second += c;
        }
    }

    // Largest absolute entry over the constant and every coefficient.
    double max_abs_entry() const {
        double s = constant_.size() ? constant_.cwiseAbs().maxCoeff() : 0.0;
        for (const auto& [k, c] : terms_) s = std::max(s, c.cwiseAbs().maxCoeff());
        return s;
    }

    // Drop coefficient matrices that vanished through cancellation.
    void prune(double tol = 0.0) {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->second.cwiseAbs().maxCoeff() <= tol) {
                it = terms_.erase(it);
            } else {
                ++it;
            }
        }
    }

  private:
    void check_same_shape(const AffineMatrixExpr& o) const {
        if (rows() != o.rows() || cols() != o.cols()) {
            throw DimensionError("expression shapes differ: " + std::to_string(rows()) + "x" +
                                 std::to_string(cols()) + " vs " + std::to_string(o.rows()) + "x" +
                                 std::to_string(o.cols()));
        }
    }

    Matrix constant_;
    std::map<Eigen::Index, Matrix> terms_;
};

inline AffineMatrixExpr sym(const AffineMatrixExpr& e) { return e + e.transpose(); }

// Assemble a block matrix from a grid of expressions. Every row of blocks must
// agree in height and every column in width.
inline AffineMatrixExpr block_matrix(const std::vector<std::vector<AffineMatrixExpr>>& grid) {
    if (grid.empty() || grid.front().empty()) throw DimensionError("empty block grid");
    std::vector<Eigen::Index> heights, widths;
    for (const auto& row : grid) heights.push_back(row.front().rows());
    for (const auto& b : grid.front()) widths.push_back(b.cols());
    Eigen::Index total_rows = 0, total_cols = 0;
    for (auto h : heights) total_rows += h;
    for (auto w : widths) total_cols += w;

    Matrix constant = Matrix::Zero(total_rows, total_cols);
    std::map<Eigen::Index, Matrix> terms;
    Eigen::Index r0 = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i].size() != widths.size()) throw DimensionError("ragged block grid");
        Eigen::Index c0 = 0;
        for (std::size_t j = 0; j < grid[i].size(); ++j) {
            const auto& b = grid[i][j];
            if (b.rows() != heights[i] || b.cols() != widths[j]) {
                throw DimensionError("block (" + std::to_string(i) + "," + std::to_string(j) +
                                     ") has inconsistent size");
            }
            constant.block(r0, c0, b.rows(), b.cols()) = b.constant();
            for (const auto& [k, c] : b.terms()) {
                auto it = terms.find(k);
                if (it == terms.end()) it = terms.emplace(k, Matrix::Zero(total_rows, total_cols)).first;
                it->second.block(r0, c0, c.rows(), c.cols()) += c;
            }
            c0 += widths[j];
        }
        r0 += heights[i];
    }
    AffineMatrixExpr out(std::move(constant));
    for (auto& [k, c] : terms) out.add_term(k, c);
    return out;
}

// Symmetric block matrix from its upper triangle; lower blocks are transposes.
inline AffineMatrixExpr symmetric_block_matrix(const std::vector<std::vector<AffineMatrixExpr>>& upper) {
    const std::size_t n = upper.size();
    std::vector<std::vector<AffineMatrixExpr>> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (upper[i].size() != n - i) throw DimensionError("upper block triangle is malformed");
        grid[i].resize(n);
        for (std::size_t j = i; j < n; ++j) grid[i][j] = upper[i][j - i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) grid[i][j] = grid[j][i].transpose();
    }
    return block_matrix(grid);
}

inline AffineMatrixExpr block_diag(const AffineMatrixExpr& a, const AffineMatrixExpr& b) {
    return block_matrix({{a, AffineMatrixExpr::zero(a.rows(), b.cols())},
                         {AffineMatrixExpr::zero(b.rows(), a.cols()), b}});
}

struct LmiConstraint {
    std::string label;
    AffineMatrixExpr expr;
    // Diagonal block partition (label, size) for diagnostics.
    std::vector<std::pair<std::string, Eigen::Index>> blocks;
};

enum class LmiBranch { Analysis, Theorem1, Theorem2, Certain1, Certain2 };

inline const char* to_string(LmiBranch b) {
    switch (b) {
        case LmiBranch::Analysis: return "analysis";
        case LmiBranch::Theorem1: return "theorem1";
        case LmiBranch::Theorem2: return "theorem2";
        case LmiBranch::Certain1: return "certain-theorem1";
        case LmiBranch::Certain2: return "certain-theorem2";
    }
    return "?";
}

// Feasibility problem: every negConstraint < 0 and every posConstraint > 0.
struct LmiProblem {
    std::vector<DecisionVariable> variables;
    std::vector<LmiConstraint> negConstraints;
    std::vector<LmiConstraint> posConstraints;
    LmiBranch branch = LmiBranch::Analysis;
    double theta = 0.0;
    Eigen::Index plantOrder = 0;
    Eigen::Index controllerOrder = 0;

    Eigen::Index scalar_count() const {
        Eigen::Index n = 0;
        for (const auto& v : variables) n += v.scalar_count();
        return n;
    }

    const DecisionVariable& add_variable(std::string name, VariableKind kind, Eigen::Index rows,
                                         Eigen::Index cols = -1) {
        for (const auto& v : variables) {
            if (v.name == name) throw DimensionError("duplicate variable name " + name);
        }
        DecisionVariable v;
        v.id = static_cast<int>(variables.size());
        v.name = std::move(name);
        v.kind = kind;
        v.rows = rows;
        v.cols = kind == VariableKind::Full ? cols : rows;
        if (kind == VariableKind::Scalar) v.rows = v.cols = 1;
        v.offset = scalar_count();
        variables.push_back(v);
        return variables.back();
    }

    const DecisionVariable* find(const std::string& name) const {
        for (const auto& v : variables) {
            if (v.name == name) return &v;
        }
        return nullptr;
    }

    const DecisionVariable& variable(const std::string& name) const {
        if (const auto* v = find(name)) return *v;
        throw DimensionError("no decision variable named " + name);
    }

    Matrix value(const std::string& name, const Vector& x) const { return variable(name).value(x); }
};

// X = X_R + i X_I, Hermitian: X_R symmetric and X_I skew-symmetric.
struct HermitianVar {
    DecisionVariable realPart;
    DecisionVariable imagPart;

    Eigen::Index dim() const { return realPart.rows; }

    ComplexMatrix value(const Vector& x) const {
        ComplexMatrix out(dim(), dim());
        out.real() = realPart.value(x);
        out.imag() = imagPart.value(x);
        return out;
    }
};

inline HermitianVar add_hermitian(LmiProblem& p, const std::string& name, Eigen::Index dim) {
    HermitianVar h;
    h.realPart = p.add_variable(name + ".re", VariableKind::Symmetric, dim);
    h.imagPart = p.add_variable(name + ".im", VariableKind::SkewSymmetric, dim);
    return h;
}

// r X + conj(r) conj(X) = 2 (cos(theta) X_R - sin(theta) X_I), r = exp(i theta).
inline AffineMatrixExpr real_combination(const HermitianVar& x, double theta) {
    AffineMatrixExpr re = AffineMatrixExpr::of(x.realPart);
    AffineMatrixExpr im = AffineMatrixExpr::of(x.imagPart);
    return (2.0 * std::cos(theta)) * re - (2.0 * std::sin(theta)) * im;
}

// Real symmetric embedding [[X_R, -X_I], [X_I, X_R]]; positive definite iff X is.
inline AffineMatrixExpr hermitian_embedding(const HermitianVar& x) {
    AffineMatrixExpr re = AffineMatrixExpr::of(x.realPart);
    AffineMatrixExpr im = AffineMatrixExpr::of(x.imagPart);
    return block_matrix({{re, -im}, {im, re}});
}

// Theta = [[sin t, -cos t], [cos t, sin t]] of the order-in-[1,2) stability test.
inline Matrix sector_rotation(double theta) {
    Matrix r(2, 2);
    r << std::sin(theta), -std::cos(theta), std::cos(theta), std::sin(theta);
    return r;
}

inline double theorem1_angle(double alpha) { return (1.0 - alpha) * kPi / 2.0; }
inline double theorem2_angle(double alpha) { return kPi - alpha * kPi / 2.0; }

namespace detail {

inline LmiConstraint scalar_positive(const DecisionVariable& v) {
    return {v.name + " > 0", AffineMatrixExpr::of(v), {{v.name, 1}}};
}

// Decision variables shared by both synthesis theorems.
struct SynthesisVars {
    std::optional<DecisionVariable> T1, T2, T3;
    DecisionVariable T4;
};

inline SynthesisVars add_controller_vars(LmiProblem& p, Eigen::Index n, Eigen::Index l, Eigen::Index nc) {
    SynthesisVars v;
    if (nc > 0) {
        v.T1 = p.add_variable("T1", VariableKind::Full, nc, nc);
        v.T2 = p.add_variable("T2", VariableKind::Full, nc, n);
        v.T3 = p.add_variable("T3", VariableKind::Full, l, nc);
    }
    v.T4 = p.add_variable("T4", VariableKind::Full, l, n);
    return v;
}

// [[A*Qs + B*T4, B*T3], [T2, T1]] with Qs, Qc the (possibly combined) Lyapunov blocks.
inline AffineMatrixExpr closed_loop_product(const FoltiSystem& sys, const AffineMatrixExpr& qs,
                                            const SynthesisVars& v) {
    AffineMatrixExpr plant = sys.A * qs + sys.B * AffineMatrixExpr::of(v.T4);
    if (!v.T1) return plant;
    return block_matrix({{plant, sys.B * AffineMatrixExpr::of(*v.T3)},
                         {AffineMatrixExpr::of(*v.T2), AffineMatrixExpr::of(*v.T1)}});
}

// [T4^T B^T ; T3^T B^T]
inline AffineMatrixExpr input_coupling(const FoltiSystem& sys, const SynthesisVars& v) {
    AffineMatrixExpr top = AffineMatrixExpr::of(v.T4).transpose() * sys.B.transpose();
    if (!v.T3) return top;
    return block_matrix({{top}, {AffineMatrixExpr::of(*v.T3).transpose() * sys.B.transpose()}});
}

inline Matrix pad(const Matrix& m, Eigen::Index extra) {
    Matrix out = Matrix::Zero(m.rows() + extra, m.cols() + extra);
    out.topLeftCorner(m.rows(), m.cols()) = m;
    return out;
}

inline AffineMatrixExpr pad_rows(const AffineMatrixExpr& e, Eigen::Index extra) {
    if (extra == 0) return e;
    return block_matrix({{e}, {AffineMatrixExpr::zero(extra, e.cols())}});
}

inline void check_synthesis_dims(const FoltiSystem& sys, const Envelope& env, Eigen::Index nc) {
    sys.validate();
    if (nc < 0) throw DimensionError("controller order must be >= 0");
    const Eigen::Index n = sys.states();
    if (env.H.rows() != n || env.H.cols() != n || env.G.rows() != n || env.G.cols() != n) {
        throw DimensionError("envelope matrices must be n x n");
    }
}

// Finish a robust main constraint: the four-block layout
//   [ S11 + eta1 Gt + (eta3+1) Ht   Y12        Y13   Y14 ]
//   [ .                             -eta1 I    0     0   ]
//   [ .                             .          S33   0   ]
//   [ .                             .          .     -eta3 I ]
inline AffineMatrixExpr robust_layout(const AffineMatrixExpr& s11, const AffineMatrixExpr& y12,
                                      const AffineMatrixExpr& y13, const AffineMatrixExpr& s33,
                                      const AffineMatrixExpr& y14, const DecisionVariable& eta1,
                                      const DecisionVariable& eta3) {
    const Eigen::Index d2 = y12.cols();
    const Eigen::Index d3 = y13.cols();
    const Eigen::Index d4 = y14.cols();
    AffineMatrixExpr e1 = AffineMatrixExpr::of(eta1);
    AffineMatrixExpr e3 = AffineMatrixExpr::of(eta3);
    return symmetric_block_matrix({
        {s11, y12, y13, y14},
        {-scale(e1, Matrix::Identity(d2, d2)), AffineMatrixExpr::zero(d2, d3), AffineMatrixExpr::zero(d2, d4)},
        {s33, AffineMatrixExpr::zero(d3, d4)},
        {-scale(e3, Matrix::Identity(d4, d4))},
    });
}

}  // namespace detail

// Robust synthesis LMI for 0 < alpha < 1 (complex Hermitian Lyapunov blocks).
inline LmiProblem assemble_theorem1(const FoltiSystem& sys, const Envelope& env, Eigen::Index nc) {
    detail::check_synthesis_dims(sys, env, nc);
    if (!(sys.alpha > 0.0 && sys.alpha < 1.0)) {
        throw WrongBranch("the Hermitian synthesis LMI needs 0 < alpha < 1");
    }
    const Eigen::Index n = sys.states();
    const Eigen::Index l = sys.inputs();
    const double theta = theorem1_angle(sys.alpha);

    LmiProblem p;
    p.branch = LmiBranch::Theorem1;
    p.theta = theta;
    p.plantOrder = n;
    p.controllerOrder = nc;

    HermitianVar ps = add_hermitian(p, "PS", n);
    std::optional<HermitianVar> pc;
    if (nc > 0) pc = add_hermitian(p, "PC", nc);
    detail::SynthesisVars v = detail::add_controller_vars(p, n, l, nc);
    const DecisionVariable eta1 = p.add_variable("eta1", VariableKind::Scalar, 1);
    const DecisionVariable eta3 = p.add_variable("eta3", VariableKind::Scalar, 1);
    const DecisionVariable eps1 = p.add_variable("eps1", VariableKind::Scalar, 1);

    const AffineMatrixExpr qs = real_combination(ps, theta);
    const AffineMatrixExpr q = pc ? block_diag(qs, real_combination(*pc, theta)) : qs;
    const Eigen::Index nz = n + nc;

    AffineMatrixExpr s11 = sym(detail::closed_loop_product(sys, qs, v));
    s11 += scale(AffineMatrixExpr::of(eta1), detail::pad(env.G, nc));
    s11 += scale(AffineMatrixExpr::of(eta3) + Matrix::Ones(1, 1), detail::pad(env.H, nc));

    const AffineMatrixExpr y13 = detail::pad_rows(qs.transpose() * sys.A.transpose(), nc);
    const AffineMatrixExpr s33 = scale(AffineMatrixExpr::of(eps1), env.G) - Matrix::Identity(n, n);
    const AffineMatrixExpr y14 = detail::input_coupling(sys, v);

    LmiConstraint main{"main", detail::robust_layout(s11, q.transpose(), y13, s33, y14, eta1, eta3),
                       {{"Sigma11", nz}, {"-eta1 I", nz}, {"eps1 G - I", n}, {"-eta3 I", n}}};
    p.negConstraints.push_back(std::move(main));
    p.posConstraints.push_back({"PS > 0", hermitian_embedding(ps), {{"PS embedding", 2 * n}}});
    if (pc) p.posConstraints.push_back({"PC > 0", hermitian_embedding(*pc), {{"PC embedding", 2 * nc}}});
    p.posConstraints.push_back(detail::scalar_positive(eta1));
    p.posConstraints.push_back(detail::scalar_positive(eta3));
    p.posConstraints.push_back(detail::scalar_positive(eps1));
    return p;
}

// Robust synthesis LMI for 1 <= alpha < 2 (real symmetric Lyapunov blocks, Kronecker form).
inline LmiProblem assemble_theorem2(const FoltiSystem& sys, const Envelope& env, Eigen::Index nc) {
    detail::check_synthesis_dims(sys, env, nc);
    if (!(sys.alpha >= 1.0 && sys.alpha < 2.0)) {
        throw WrongBranch("the Kronecker synthesis LMI needs 1 <= alpha < 2");
    }
    const Eigen::Index n = sys.states();
    const Eigen::Index l = sys.inputs();
    const double theta = theorem2_angle(sys.alpha);
    const Matrix rot = sector_rotation(theta).transpose();
    const Matrix i2 = Matrix::Identity(2, 2);

    LmiProblem p;
    p.branch = LmiBranch::Theorem2;
    p.theta = theta;
    p.plantOrder = n;
    p.controllerOrder = nc;

    const DecisionVariable ps = p.add_variable("PS", VariableKind::Symmetric, n);
    std::optional<DecisionVariable> pc;
    if (nc > 0) pc = p.add_variable("PC", VariableKind::Symmetric, nc);
    detail::SynthesisVars v = detail::add_controller_vars(p, n, l, nc);
    const DecisionVariable eta1 = p.add_variable("eta1", VariableKind::Scalar, 1);
    const DecisionVariable eta3 = p.add_variable("eta3", VariableKind::Scalar, 1);
    const DecisionVariable eps1 = p.add_variable("eps1", VariableKind::Scalar, 1);

    const AffineMatrixExpr qs = AffineMatrixExpr::of(ps);
    const AffineMatrixExpr q = pc ? block_diag(qs, AffineMatrixExpr::of(*pc)) : qs;
    const Eigen::Index nz = n + nc;

    AffineMatrixExpr s11 = sym(kron(rot, detail::closed_loop_product(sys, qs, v)));
    s11 += scale(AffineMatrixExpr::of(eta1), fraclmi::kron(i2, detail::pad(env.G, nc)));
    s11 += scale(AffineMatrixExpr::of(eta3) + Matrix::Ones(1, 1), fraclmi::kron(i2, detail::pad(env.H, nc)));

    const AffineMatrixExpr y12 = kron(i2, q);
    const AffineMatrixExpr y13 = kron(i2, detail::pad_rows(qs * sys.A.transpose(), nc));
    const AffineMatrixExpr s33 =
        kron(i2, scale(AffineMatrixExpr::of(eps1), env.G) - Matrix::Identity(n, n));
    const AffineMatrixExpr y14 = kron(i2, detail::input_coupling(sys, v));

    LmiConstraint main{"main", detail::robust_layout(s11, y12, y13, s33, y14, eta1, eta3),
                       {{"Sigma11", 2 * nz}, {"-eta1 I", 2 * nz}, {"I2 x (eps1 G - I)", 2 * n}, {"-eta3 I", 2 * n}}};
    p.negConstraints.push_back(std::move(main));
    p.posConstraints.push_back({"PS > 0", qs, {{"PS", n}}});
    if (pc) p.posConstraints.push_back({"PC > 0", AffineMatrixExpr::of(*pc), {{"PC", nc}}});
    p.posConstraints.push_back(detail::scalar_positive(eta1));
    p.posConstraints.push_back(detail::scalar_positive(eta3));
    p.posConstraints.push_back(detail::scalar_positive(eps1));
    return p;
}

// Nominal-only synthesis: Sigma11 < 0 of the branch selected by alpha.
inline LmiProblem assemble_certain(const FoltiSystem& sys, Eigen::Index nc) {
    sys.validate();
    if (nc < 0) throw DimensionError("controller order must be >= 0");
    const Eigen::Index n = sys.states();
    const Eigen::Index l = sys.inputs();
    const Eigen::Index nz = n + nc;
    LmiProblem p;
    p.plantOrder = n;
    p.controllerOrder = nc;
    if (sys.alpha < 1.0) {
        p.branch = LmiBranch::Certain1;
        p.theta = theorem1_angle(sys.alpha);
        HermitianVar ps = add_hermitian(p, "PS", n);
        std::optional<HermitianVar> pc;
        if (nc > 0) pc = add_hermitian(p, "PC", nc);
        detail::SynthesisVars v = detail::add_controller_vars(p, n, l, nc);
        const AffineMatrixExpr qs = real_combination(ps, p.theta);
        p.negConstraints.push_back({"Sigma11", sym(detail::closed_loop_product(sys, qs, v)), {{"Sigma11", nz}}});
        p.posConstraints.push_back({"PS > 0", hermitian_embedding(ps), {{"PS embedding", 2 * n}}});
        if (pc) p.posConstraints.push_back({"PC > 0", hermitian_embedding(*pc), {{"PC embedding", 2 * nc}}});
    } else {
        p.branch = LmiBranch::Certain2;
        p.theta = theorem2_angle(sys.alpha);
        const DecisionVariable ps = p.add_variable("PS", VariableKind::Symmetric, n);
        std::optional<DecisionVariable> pc;
        if (nc > 0) pc = p.add_variable("PC", VariableKind::Symmetric, nc);
        detail::SynthesisVars v = detail::add_controller_vars(p, n, l, nc);
        const Matrix rot = sector_rotation(p.theta).transpose();
        const AffineMatrixExpr qs = AffineMatrixExpr::of(ps);
        p.negConstraints.push_back(
            {"Sigma11", sym(kron(rot, detail::closed_loop_product(sys, qs, v))), {{"Sigma11", 2 * nz}}});
        p.posConstraints.push_back({"PS > 0", qs, {{"PS", n}}});
        if (pc) p.posConstraints.push_back({"PC > 0", AffineMatrixExpr::of(*pc), {{"PC", nc}}});
    }
    return p;
}

// Text diagnostics: variables, scalar counts and block partition of each constraint.
inline std::string describe(const LmiProblem& p) {
    std::ostringstream os;
    os << "LMI problem [" << to_string(p.branch) << "]  n=" << p.plantOrder << " n_c=" << p.controllerOrder
       << " theta=" << p.theta << "\n";
    os << "  variables (" << p.variables.size() << ", " << p.scalar_count() << " scalars):\n";
    for (const auto& v : p.variables) {
        os << "    " << v.name << "  " << to_string(v.kind) << " " << v.rows << "x" << v.cols << "  -> "
           << v.scalar_count() << " scalars\n";
    }
    auto dump = [&os](const char* title, const std::vector<LmiConstraint>& cs) {
        os << "  " << title << " (" << cs.size() << "):\n";
        for (const auto& c : cs) {
            os << "    " << c.label << "  size " << c.expr.rows() << "  blocks:";
            for (const auto& [label, size] : c.blocks) os << " [" << label << ":" << size << "]";
            os << "  terms " << c.expr.terms().size() << "\n";
        }
    };
    dump("negative definite", p.negConstraints);
    dump("positive definite", p.posConstraints);
    return os.str();
}

}  // namespace fraclmi
