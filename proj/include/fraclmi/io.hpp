#pragma once

// JSON and text serialization. Requires nlohmann/json ("json.hpp") on the include path.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"

#include "core.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "synthesis.hpp"

namespace fraclmi::io {

using nlohmann::json;

// Row-major nested arrays. Rejects ragged or non-numeric input. An empty array is
// a matrix with zero rows and `emptyCols` columns.
inline Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index emptyCols = 0) {
    if (!j.is_array()) throw ParseError(what + ": expected an array of rows");
    if (j.empty()) return Matrix::Zero(0, emptyCols);
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Matrix m;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array()) throw ParseError(what + ": row " + std::to_string(i) + " is not an array");
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError(what + ": ragged rows (row " + std::to_string(i) + " has " +
                             std::to_string(row.size()) + " entries, expected " + std::to_string(cols) + ")");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            const json& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) throw ParseError(what + ": non-numeric entry");
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        out.push_back(std::move(row));
    }
    return out;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

struct SystemFile {
    std::string name;
    FoltiSystem system;
    UncertaintyModel uncertainty;
};

inline SystemFile system_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("system file must be a JSON object");
    for (const char* key : {"alpha", "A", "B", "C"}) {
        if (!j.contains(key)) throw ParseError(std::string("system file is missing '") + key + "'");
    }
    SystemFile f;
    f.name = j.value("name", std::string{});
    if (!j["alpha"].is_number()) throw ParseError("'alpha' must be a number");
    f.system.alpha = j["alpha"].get<double>();
    f.system.A = matrix_from_json(j["A"], "A");
    f.system.B = matrix_from_json(j["B"], "B");
    f.system.C = matrix_from_json(j["C"], "C");
    if (j.contains("uncertainty")) {
        const json& u = j["uncertainty"];
        if (!u.is_object()) throw ParseError("'uncertainty' must be an object");
        auto gens = [&](const char* key) {
            std::vector<Matrix> out;
            if (!u.contains(key)) return out;
            if (!u[key].is_array()) throw ParseError(std::string(key) + " must be an array of matrices");
            for (std::size_t i = 0; i < u[key].size(); ++i) {
                out.push_back(matrix_from_json(u[key][i], std::string(key) + "[" + std::to_string(i) + "]"));
            }
            return out;
        };
        f.uncertainty.iGenerators = gens("iGenerators");
        f.uncertainty.aGenerators = gens("aGenerators");
        f.uncertainty.iBound = u.value("iBound", 1.0);
        f.uncertainty.aBound = u.value("aBound", 1.0);
    }
    try {
        f.system.validate();
        f.uncertainty.validate(f.system.states());
    } catch (const Error& e) {
        throw ParseError(std::string("invalid system: ") + e.what());
    }
    return f;
}

inline json system_to_json(const SystemFile& f) {
    json j;
    if (!f.name.empty()) j["name"] = f.name;
    j["alpha"] = f.system.alpha;
    j["A"] = matrix_to_json(f.system.A);
    j["B"] = matrix_to_json(f.system.B);
    j["C"] = matrix_to_json(f.system.C);
    json u;
    u["iGenerators"] = json::array();
    for (const auto& m : f.uncertainty.iGenerators) u["iGenerators"].push_back(matrix_to_json(m));
    u["iBound"] = f.uncertainty.iBound;
    u["aGenerators"] = json::array();
    for (const auto& m : f.uncertainty.aGenerators) u["aGenerators"].push_back(matrix_to_json(m));
    u["aBound"] = f.uncertainty.aBound;
    j["uncertainty"] = u;
    return j;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline SystemFile load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

inline json controller_to_json(const Controller& k) {
    return json{{"order", k.order},
                {"alpha", k.alpha},
                {"Ac", matrix_to_json(k.Ac)},
                {"Bc", matrix_to_json(k.Bc)},
                {"Cc", matrix_to_json(k.Cc)},
                {"Dc", matrix_to_json(k.Dc)}};
}

// Accepts a bare controller object or a synthesis report holding one.
inline Controller controller_from_json(const json& root) {
    const json& j = (root.contains("controller") && root["controller"].is_object()) ? root["controller"] : root;
    for (const char* key : {"Dc"}) {
        if (!j.contains(key)) throw ParseError(std::string("controller is missing '") + key + "'");
    }
    Controller k;
    k.Dc = matrix_from_json(j["Dc"], "Dc");
    k.order = j.value("order", 0);
    k.alpha = j.value("alpha", 0.0);
    const Eigen::Index l = k.Dc.rows(), m = k.Dc.cols();
    if (k.order > 0) {
        k.Ac = matrix_from_json(j.at("Ac"), "Ac");
        k.Bc = matrix_from_json(j.at("Bc"), "Bc");
        k.Cc = matrix_from_json(j.at("Cc"), "Cc");
    } else {
        k.Ac = Matrix::Zero(0, 0);
        k.Bc = Matrix::Zero(0, m);
        k.Cc = Matrix::Zero(l, 0);
    }
    return k;
}

inline json realization_to_json(const UncertaintyRealization& r) {
    return json{{"iParams", vector_to_json(r.iParams)}, {"aParams", vector_to_json(r.aParams)}};
}

inline json report_to_json(const SynthesisReport& r, bool includeTiming = true) {
    json j;
    j["feasible"] = r.feasible;
    j["status"] = to_string(r.status);
    j["branch"] = to_string(r.branch);
    j["alpha"] = r.alpha;
    j["order"] = r.order;
    j["solverMargin"] = r.solverMargin;
    j["sourceSlack"] = r.sourceSlack;
    json stats{{"iterations", r.solverStats.iterations},
               {"primalInfeasibility", r.solverStats.primalInfeasibility},
               {"dualInfeasibility", r.solverStats.dualInfeasibility},
               {"relativeGap", r.solverStats.relativeGap}};
    if (includeTiming) stats["wallSeconds"] = r.solverStats.wallSeconds;
    j["solver"] = stats;
    j["controller"] = r.controller ? controller_to_json(*r.controller) : json(nullptr);
    j["recoveryResiduals"] = {{"B", r.residualB}, {"D", r.residualD}};
    j["recoveryInexact"] = r.recoveryInexact;
    j["conditionQ"] = r.conditionQ;
    j["nominalMargin"] = r.nominalMargin;
    json failures = json::array();
    for (const auto& f : r.verification.failures) failures.push_back(realization_to_json(f));
    j["verification"] = {{"samples", r.verification.samples},
                         {"worstMargin", r.controller ? json(r.verification.worstMargin) : json(nullptr)},
                         {"failures", failures}};
    j["verified"] = r.verified();
    j["notes"] = r.notes;
    return j;
}

inline std::string format_matrix(const Matrix& m, int precision = 4, const std::string& indent = "    ") {
    std::ostringstream os;
    if (m.size() == 0) return indent + "(empty " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")\n";
    os << std::fixed << std::setprecision(precision);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << indent;
        for (Eigen::Index k = 0; k < m.cols(); ++k) os << std::setw(precision + 8) << m(i, k);
        os << "\n";
    }
    return os.str();
}

// Plain-text controller table: one section per matrix.
inline std::string controller_table(const Controller& k) {
    std::ostringstream os;
    os << "n_c = " << k.order << "   (alpha = " << k.alpha << ")\n";
    os << "A_c =\n" << format_matrix(k.Ac);
    os << "B_c =\n" << format_matrix(k.Bc);
    os << "C_c =\n" << format_matrix(k.Cc);
    os << "D_c =\n" << format_matrix(k.Dc);
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace fraclmi::io
