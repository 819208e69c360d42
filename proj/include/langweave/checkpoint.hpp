#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>

namespace langweave::checkpoint {

struct Entry {
    std::string hash;
    std::string status;  // "done" or "failed"
    std::string target_text;
    std::string backend;
    uint64_t attempt = 0;
    std::string ts;
};

// Append-only JSON-lines checkpoint. One entry per line:
//   {"hash":..., "status":"done"|"failed", "target_text":..., "backend":...,
//    "attempt":..., "ts":...}
// Each append is written and flushed before the call returns, so a crash can
// lose at most the line being written; the loader skips corrupt or truncated
// lines instead of failing.
class Checkpoint {
public:
    // Opens (creating if absent) and replays the file.
    explicit Checkpoint(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }

    bool is_done(const std::string& hash) const;
    bool is_failed(const std::string& hash) const;
    const Entry* done_entry(const std::string& hash) const;

    size_t done_count() const;
    size_t failed_count() const;
    // Lines the loader had to skip while replaying.
    size_t corrupt_lines() const { return corrupt_lines_; }

    // At-most-once: recording a hash already done is a no-op returning false.
    bool record_done(const std::string& hash, const std::string& target_text,
                     const std::string& backend, uint64_t attempt);
    void record_failed(const std::string& hash, const std::string& backend,
                       uint64_t attempt, const std::string& error);

private:
    void append_line(const std::string& line);

    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::map<std::string, Entry> done_;
    std::map<std::string, Entry> failed_;  // most recent failed entry per hash
    size_t corrupt_lines_ = 0;
    std::ofstream out_;
};

}  // namespace langweave::checkpoint
