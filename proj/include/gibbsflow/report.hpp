// Test verdict bundles and report serialization.
//
// StatReport is the common currency of the verification layer: every check
// produces one, and the CSV writers render them with the fixed schema
// test,observable,N,estimate,error,bound,pass. Deterministic formatting is
// part of the contract (same inputs -> byte-identical files); timestamps are
// confined to the metadata sidecar.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gibbsflow {

struct StatReport {
    std::string test_name;
    std::string observable;
    std::map<std::string, std::string> parameters;
    double estimate = 0.0;
    double error = 0.0;
    double bound_or_target = 0.0;
    std::optional<double> p_value;
    bool pass = false;
    bool inconclusive = false;
    std::string note;
};

// Shortest round-trippable decimal representation.
std::string format_double(double v);

// Schema: test,observable,N,estimate,error,bound,pass
// (N is taken from parameters["N"], empty when absent.)
void write_stat_reports_csv(const std::string& path, const std::vector<StatReport>& reports);

// Generic CSV writer used for the plot-data exports.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Key-value metadata sidecar (JSON).
void write_metadata(const std::string& path, const std::map<std::string, std::string>& kv);

// FNV-1a over raw bytes; used for cache keys and config hashes.
std::uint64_t content_hash(const void* data, std::size_t n_bytes,
                           std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t content_hash(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL);

// True if any non-inconclusive report failed.
bool any_failure(const std::vector<StatReport>& reports);

}  // namespace gibbsflow
