#include "bbm/table.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "bbm/version.hpp"

namespace bbm {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ResultTable::add_row(std::initializer_list<double> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("ResultTable: row width does not match columns");
    rows.emplace_back(row);
}

std::string ResultTable::to_csv() const {
    std::string out;
    out += "# seed=" + std::to_string(seed) + " digest=" + config_digest +
           " grid_step=" + format_double(grid_step) + " version=" + kVersion + "\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out += columns[c];
        out += c + 1 < columns.size() ? ',' : '\n';
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += format_double(row[c]);
            out += c + 1 < row.size() ? ',' : '\n';
        }
    }
    return out;
}

std::string ResultTable::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["digest"] = config_digest;
    j["grid_step"] = grid_step;
    j["version"] = kVersion;
    j["columns"] = columns;
    nlohmann::json rws = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json r = nlohmann::json::array();
        for (double v : row) r.push_back(format_double(v));
        rws.push_back(std::move(r));
    }
    j["rows"] = std::move(rws);
    return j.dump(2);
}

std::string config_digest(const std::map<std::string, std::string>& kv) {
    std::string canon;
    for (const auto& [k, v] : kv) canon += k + "=" + v + ";";
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bbm
