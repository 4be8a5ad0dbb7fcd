#include "gibbsflow/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace gibbsflow {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no platform newline translation
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += "\"\"";
        q += c;
    }
    q += "\"";
    return q;
}

}  // namespace

void write_stat_reports_csv(const std::string& path, const std::vector<StatReport>& reports) {
    auto out = open_out(path);
    out << "test,observable,N,estimate,error,bound,pass\n";
    for (const auto& r : reports) {
        auto it = r.parameters.find("N");
        const std::string n = (it == r.parameters.end()) ? "" : it->second;
        const char* verdict = r.inconclusive ? "inconclusive" : (r.pass ? "pass" : "fail");
        out << csv_escape(r.test_name) << ',' << csv_escape(r.observable) << ',' << n << ','
            << format_double(r.estimate) << ',' << format_double(r.error) << ','
            << format_double(r.bound_or_target) << ',' << verdict << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << csv_escape(header[i]);
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("write_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_escape(row[i]);
        out << '\n';
    }
}

void write_metadata(const std::string& path, const std::map<std::string, std::string>& kv) {
    auto out = open_out(path);
    out << "{\n";
    bool first = true;
    for (const auto& [k, v] : kv) {
        if (!first) out << ",\n";
        first = false;
        auto emit = [&out](const std::string& s) {
            out << '"';
            for (char c : s) {
                if (c == '"' || c == '\\') out << '\\';
                out << c;
            }
            out << '"';
        };
        out << "  ";
        emit(k);
        out << ": ";
        emit(v);
    }
    out << "\n}\n";
}

std::uint64_t content_hash(const void* data, std::size_t n_bytes, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n_bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t content_hash(const std::string& s, std::uint64_t seed) {
    return content_hash(s.data(), s.size(), seed);
}

bool any_failure(const std::vector<StatReport>& reports) {
    for (const auto& r : reports)
        if (!r.inconclusive && !r.pass) return true;
    return false;
}

}  // namespace gibbsflow
