#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace rankprox {

// Shortest round-trippable decimal form of a double ("%.17g").
std::string format_g17(double v);

// Write via a sibling temp file and rename, so readers never observe a
// partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_text_file(const std::string& path);

// Minimal CSV: comma-separated, no quoting (fields here are numbers, ids,
// and relative paths, none of which contain commas).
std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::vector<std::string>> read_csv(const std::string& path, size_t expect_cols);

// key=value configuration, one entry per line. '#' starts a comment; blank
// lines are skipped; duplicate keys are rejected.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    std::string require_str(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Rejects keys outside the allowed set, naming the offender.
    void ensure_known(const std::set<std::string>& allowed) const;

    // Canonical text form: sorted key=value lines. Written next to run
    // outputs as the reproducibility record.
    std::string serialize() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

private:
    std::map<std::string, std::string> entries_;
    std::string origin_ = "<none>";
};

}  // namespace rankprox
