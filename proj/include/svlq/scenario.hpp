// JSON interchange for scenarios and reports. Matrices are row-major nested
// arrays; subsystem indices are 1-based in files (matching the usual
// subsystem numbering) and 0-based in memory.
#pragma once

#include "powernet.hpp"

#include <json.hpp>

namespace svlq {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::invalid_argument(what + ": expected a 2-D array");
    size_t cols = j.front().size();
    Matrix m(j.size(), cols);
    for (size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != cols) throw std::invalid_argument(what + ": ragged rows");
        for (size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

inline json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json scenario_to_json(const Scenario& sc) {
    json j;
    j["blocks"] = json::array();
    for (int i = 0; i < sc.sys.structure.subsystems(); ++i)
        j["blocks"].push_back({{"n", sc.sys.structure.state_dims[i]},
                               {"m", sc.sys.structure.input_dims[i]}});
    j["a_bar"] = matrix_to_json(sc.sys.a_bar);
    j["b_blocks"] = json::array();
    for (const auto& b : sc.sys.b_blocks) j["b_blocks"].push_back(matrix_to_json(b));
    j["terms"] = json::array();
    for (const auto& t : sc.sys.terms)
        j["terms"].push_back({{"subsystem", t.subsystem + 1},
                              {"basis", matrix_to_json(t.basis)},
                              {"variance", t.variance},
                              {"law", law_name(t.law)}});
    j["q"] = sc.cost.q.isIdentity(0.0) ? json("identity") : matrix_to_json(sc.cost.q);
    bool r_ident = true;
    for (const auto& r : sc.cost.r_blocks) r_ident = r_ident && r.isIdentity(0.0);
    if (r_ident) {
        j["r_blocks"] = "identity";
    } else {
        j["r_blocks"] = json::array();
        for (const auto& r : sc.cost.r_blocks) j["r_blocks"].push_back(matrix_to_json(r));
    }
    j["x0"] = vector_to_json(sc.x0);
    return j;
}

inline Scenario scenario_from_json(const json& j) {
    Scenario sc;
    if (!j.contains("blocks") || !j["blocks"].is_array() || j["blocks"].empty())
        throw std::invalid_argument("scenario: missing or empty \"blocks\"");
    for (const auto& b : j["blocks"]) {
        sc.sys.structure.state_dims.push_back(b.at("n").get<int>());
        sc.sys.structure.input_dims.push_back(b.at("m").get<int>());
    }
    sc.sys.a_bar = matrix_from_json(j.at("a_bar"), "a_bar");
    for (const auto& b : j.at("b_blocks"))
        sc.sys.b_blocks.push_back(matrix_from_json(b, "b_blocks"));
    if (j.contains("terms"))
        for (const auto& t : j["terms"]) {
            StochasticTerm st;
            st.subsystem = t.at("subsystem").get<int>() - 1;
            st.basis = matrix_from_json(t.at("basis"), "terms.basis");
            st.variance = t.at("variance").get<double>();
            if (t.contains("law")) {
                auto l = law_from_name(t["law"].get<std::string>());
                if (!l) throw std::invalid_argument("terms.law: unknown distribution tag");
                st.law = *l;
            }
            sc.sys.terms.push_back(st);
        }
    sc.cost = CostSpec::identity(sc.sys.structure);
    if (j.contains("q") && !(j["q"].is_string() && j["q"] == "identity")) {
        sc.cost.q = matrix_from_json(j["q"], "q");
        sc.cost.q_terminal = sc.cost.q;
    }
    if (j.contains("r_blocks") && !(j["r_blocks"].is_string() && j["r_blocks"] == "identity")) {
        sc.cost.r_blocks.clear();
        for (const auto& r : j["r_blocks"])
            sc.cost.r_blocks.push_back(matrix_from_json(r, "r_blocks"));
    }
    if (j.contains("x0")) {
        const auto& a = j["x0"];
        sc.x0.resize(a.size());
        for (size_t i = 0; i < a.size(); ++i) sc.x0(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    } else {
        sc.x0 = Vector::Zero(sc.sys.structure.n());
    }
    return sc;
}

}  // namespace svlq
