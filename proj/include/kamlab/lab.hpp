#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace kamlab::lab {

/// Experiment description: name, free-form parameters (defaults filled per
/// experiment), and the seed for randomized scans. Identical config + seed
/// must produce byte-identical reports.
struct Config {
    std::string experiment;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    std::uint64_t seed = 1;

    static Config from_json(const nlohmann::ordered_json& j);
    nlohmann::ordered_json to_json() const;
};

struct RunResult {
    nlohmann::ordered_json report;
    bool pass = true;
    std::vector<std::pair<std::string, std::string>> files;  // name -> contents
};

RunResult run_arith(const Config& c);
RunResult run_barrier(const Config& c);
RunResult run_lindstedt(const Config& c);
RunResult run_trees(const Config& c);
RunResult run_renorm(const Config& c);

/// Dispatch on c.experiment; throws Error for unknown names.
RunResult run(const Config& c);

/// Serialized report (the exact bytes written to report.json).
std::string report_bytes(const RunResult& r);

/// Writes report.json plus any CSV side files into outdir.
void write_outputs(const RunResult& r, const std::string& outdir);

}  // namespace kamlab::lab
