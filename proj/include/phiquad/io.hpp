#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "phiquad/empirical.hpp"
#include "phiquad/errors.hpp"
#include "phiquad/quadrangle_result.hpp"

// CSV ingestion and report serialization for the CLI and the case studies.

namespace phiquad {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

} // namespace detail

// Reads a CSV file with a mandatory header row; every body cell must parse as
// a number.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw DomainError("'" + path + "': empty file");
    table.columns = detail::split_csv_line(line);
    if (table.columns.empty()) throw DomainError("'" + path + "': missing header row");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != table.columns.size())
            throw DomainError("'" + path + "': row " + std::to_string(lineno) +
                              " has wrong column count");
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DomainError("'" + path + "': row " + std::to_string(lineno) +
                                  ": cannot parse '" + cell + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw DomainError("'" + path + "': no data rows");
    return table;
}

// One column of outcomes (uniform probabilities) or two columns value,prob.
inline EmpiricalDistribution read_distribution_csv(const std::string& path) {
    const auto table = read_csv(path);
    if (table.columns.size() == 1) {
        std::vector<double> values;
        values.reserve(table.rows.size());
        for (const auto& r : table.rows) values.push_back(r[0]);
        return EmpiricalDistribution::uniform(std::move(values));
    }
    if (table.columns.size() == 2 && table.columns[0] == "value" && table.columns[1] == "prob") {
        std::vector<double> values, probs;
        for (const auto& r : table.rows) {
            values.push_back(r[0]);
            probs.push_back(r[1]);
        }
        return EmpiricalDistribution(std::move(values), std::move(probs));
    }
    throw DomainError("'" + path + "': expected one outcome column or columns value,prob");
}

inline void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path + "'");
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << "\n";
    char buf[64];
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
}

// atom_index,value(s),prob,weight rows; multivariate values become v0,v1,...
inline void write_identifier_csv(const std::string& path,
                                 const std::vector<std::vector<double>>& values,
                                 const std::vector<double>& probs,
                                 const std::vector<double>& weights) {
    CsvTable table;
    const std::size_t n = probs.size();
    const std::size_t k = values.empty() ? 1 : values.front().size();
    table.columns.push_back("atom_index");
    if (k == 1) {
        table.columns.push_back("value");
    } else {
        for (std::size_t j = 0; j < k; ++j) table.columns.push_back("v" + std::to_string(j));
    }
    table.columns.push_back("prob");
    table.columns.push_back("weight");
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row;
        row.push_back(static_cast<double>(i));
        for (std::size_t j = 0; j < k; ++j) row.push_back(values[i][j]);
        row.push_back(probs[i]);
        row.push_back(weights[i]);
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

inline nlohmann::json quadrangle_to_json(const QuadrangleResult& r) {
    return {{"risk", r.risk},
            {"deviation", r.deviation},
            {"regret", r.regret},
            {"error", r.error},
            {"statistic_lo", r.statistic_lo},
            {"statistic_hi", r.statistic_hi}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    return j;
}

} // namespace phiquad
