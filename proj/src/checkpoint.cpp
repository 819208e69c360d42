#include "langweave/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::checkpoint {

using json = nlohmann::ordered_json;

Checkpoint::Checkpoint(std::filesystem::path path) : path_(std::move(path)) {
    bool unterminated = false;
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw IoError("cannot open checkpoint " + path_.string());
        if (std::filesystem::file_size(path_) > 0) {
            in.seekg(-1, std::ios::end);
            unterminated = in.peek() != '\n';
            in.seekg(0, std::ios::beg);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("hash") ||
                !j.contains("status")) {
                ++corrupt_lines_;
                continue;
            }
            Entry e;
            e.hash = j.value("hash", "");
            e.status = j.value("status", "");
            e.target_text = j.value("target_text", "");
            e.backend = j.value("backend", "");
            e.attempt = j.value("attempt", 0ull);
            e.ts = j.value("ts", "");
            if (e.status == "done") {
                // keep the first done entry; later duplicates would violate
                // the at-most-once contract and are ignored defensively
                done_.emplace(e.hash, std::move(e));
            } else if (e.status == "failed") {
                failed_[e.hash] = std::move(e);
            } else {
                ++corrupt_lines_;
            }
        }
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot append to checkpoint " + path_.string());
    if (unterminated) {
        // terminate a line cut short by a crash so the next append starts clean
        out_ << '\n';
        out_.flush();
    }
}

bool Checkpoint::is_done(const std::string& hash) const {
    std::lock_guard<std::mutex> lk(mu_);
    return done_.count(hash) > 0;
}

bool Checkpoint::is_failed(const std::string& hash) const {
    std::lock_guard<std::mutex> lk(mu_);
    return failed_.count(hash) > 0;
}

const Entry* Checkpoint::done_entry(const std::string& hash) const {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = done_.find(hash);
    return it == done_.end() ? nullptr : &it->second;
}

size_t Checkpoint::done_count() const {
    std::lock_guard<std::mutex> lk(mu_);
    return done_.size();
}

size_t Checkpoint::failed_count() const {
    std::lock_guard<std::mutex> lk(mu_);
    return failed_.size();
}

void Checkpoint::append_line(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw IoError("checkpoint write failed: " + path_.string());
}

bool Checkpoint::record_done(const std::string& hash, const std::string& target_text,
                             const std::string& backend, uint64_t attempt) {
    std::lock_guard<std::mutex> lk(mu_);
    if (done_.count(hash)) return false;
    Entry e{hash, "done", target_text, backend, attempt, util::iso8601_now()};
    json j = json::object();
    j["hash"] = e.hash;
    j["status"] = e.status;
    j["target_text"] = e.target_text;
    j["backend"] = e.backend;
    j["attempt"] = e.attempt;
    j["ts"] = e.ts;
    append_line(j.dump());
    done_.emplace(hash, std::move(e));
    return true;
}

void Checkpoint::record_failed(const std::string& hash, const std::string& backend,
                               uint64_t attempt, const std::string& error) {
    std::lock_guard<std::mutex> lk(mu_);
    Entry e{hash, "failed", "", backend, attempt, util::iso8601_now()};
    json j = json::object();
    j["hash"] = e.hash;
    j["status"] = e.status;
    j["backend"] = e.backend;
    j["attempt"] = e.attempt;
    j["error"] = error;
    j["ts"] = e.ts;
    append_line(j.dump());
    failed_[hash] = std::move(e);
}

}  // namespace langweave::checkpoint
