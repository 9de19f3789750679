#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bbm {

/// A result table with fixed columns. Values are emitted with 17 significant
/// digits so re-parsing round-trips exactly; the header embeds seed, config
/// digest, grid step and code version, and re-running with the same digest
/// reproduces byte-identical numeric columns.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::uint64_t seed = 0;
    std::string config_digest;
    double grid_step = 0.0;

    void add_row(std::initializer_list<double> row);

    std::string to_csv() const;
    std::string to_json() const;
};

/// FNV-1a digest of a canonical key=value rendering of the configuration.
std::string config_digest(const std::map<std::string, std::string>& kv);

/// 17-significant-digit rendering used by every emitter.
std::string format_double(double v);

}  // namespace bbm
