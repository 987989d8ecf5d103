#pragma once

// Tabular output shared by the subcommands.

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cli {

// 17 significant digits round-trip every double; '.' decimal regardless of locale.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void write_csv(std::ostream& os) const {
        for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) {
                if (i) os << ',';
                if (const double* d = std::get_if<double>(&r[i]))
                    os << fmt(*d);
                else if (const long long* n = std::get_if<long long>(&r[i]))
                    os << *n;
                else
                    os << std::get<std::string>(r[i]);
            }
            os << '\n';
        }
    }

    // Non-finite doubles become null.
    nlohmann::ordered_json to_json() const {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json o;
            for (size_t i = 0; i < r.size(); ++i) {
                if (const double* d = std::get_if<double>(&r[i]))
                    o[columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d) : nlohmann::ordered_json();
                else if (const long long* n = std::get_if<long long>(&r[i]))
                    o[columns[i]] = *n;
                else
                    o[columns[i]] = std::get<std::string>(r[i]);
            }
            arr.push_back(std::move(o));
        }
        return arr;
    }
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace cli
