#ifndef CIV_IO_HPP
#define CIV_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <civ/error.hpp>
#include <civ/sem.hpp>

namespace civ {

// SEM parameter file: {"edges": [{"from", "to", "kind", "coef_or_cov"}, ...],
// "error_var": {node: v, ...}} bound to a known graph. Directed entries carry
// edge coefficients, bidirected entries error covariances; nodes without an
// entry keep the listed error variance.
inline LinearSem linear_sem_from_json(const Admg& g, const nlohmann::json& j) {
    int n = g.num_nodes();
    Matrix coeffs = Matrix::Zero(n, n);
    Matrix omega = Matrix::Zero(n, n);
    if (!j.contains("edges") || !j.contains("error_var"))
        throw Error(errc::syntax, "SEM file needs 'edges' and 'error_var'");
    for (const auto& e : j.at("edges")) {
        int from = g.index_of(e.at("from").get<std::string>());
        int to = g.index_of(e.at("to").get<std::string>());
        double value = e.at("coef_or_cov").get<double>();
        std::string kind = e.at("kind").get<std::string>();
        if (kind == "directed") {
            coeffs(to, from) = value;
        } else if (kind == "bidirected") {
            omega(from, to) = value;
            omega(to, from) = value;
        } else {
            throw Error(errc::syntax, "edge kind must be 'directed' or 'bidirected'");
        }
    }
    for (const auto& [node, v] : j.at("error_var").items())
        omega(g.index_of(node), g.index_of(node)) = v.get<double>();
    return LinearSem::create(g, std::move(coeffs), std::move(omega));
}

inline LinearSem load_linear_sem(const Admg& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io, "cannot open SEM file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::syntax, std::string("bad SEM file: ") + e.what());
    }
    return linear_sem_from_json(g, j);
}

// CSV with a header row of column names; comma separated, numeric cells.
inline DataMatrix parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(errc::syntax, "empty data file");

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };

    DataMatrix data;
    data.labels = split(line);
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != data.labels.size())
            throw Error(errc::syntax,
                        "line " + std::to_string(lineno) + ": expected " +
                            std::to_string(data.labels.size()) + " cells");
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw Error(errc::syntax,
                            "line " + std::to_string(lineno) + ": bad number '" + c + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(errc::syntax, "data file has no rows");

    data.rows = Matrix(rows.size(), data.labels.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) data.rows(i, j) = rows[i][j];
    return data;
}

inline DataMatrix load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io, "cannot open data file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

inline std::string to_csv(const DataMatrix& data) {
    std::string out;
    for (std::size_t j = 0; j < data.labels.size(); ++j) {
        if (j) out += ',';
        out += data.labels[j];
    }
    out += '\n';
    char buf[64];
    for (long i = 0; i < data.rows.rows(); ++i) {
        for (long j = 0; j < data.rows.cols(); ++j) {
            if (j) out += ',';
            std::snprintf(buf, sizeof(buf), "%.12g", data.rows(i, j));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace civ

#endif  // CIV_IO_HPP
