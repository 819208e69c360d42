#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace langweave::util {

// --- UTF-8 ---------------------------------------------------------------

// Decodes the codepoint starting at byte offset i, advancing i past it.
// Invalid sequences decode as U+FFFD and advance one byte, so iteration
// always terminates on arbitrary input.
char32_t decode_utf8(std::string_view s, size_t& i);

std::vector<char32_t> to_codepoints(std::string_view s);

void append_utf8(std::string& out, char32_t cp);

size_t codepoint_count(std::string_view s);

// Unicode-aware: covers ASCII whitespace plus NBSP, ideographic space and
// the general punctuation space block.
bool is_space(char32_t cp);

bool is_ascii_alnum(char32_t cp);

// --- strings -------------------------------------------------------------

std::string to_lower_ascii(std::string_view s);

std::string trim(std::string_view s);

std::vector<std::string> split_ws(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

// --- hashing -------------------------------------------------------------

std::string sha256_hex(std::string_view data);

// --- files ---------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);

// Writes via a temp file in the same directory, then renames into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// --- csv -----------------------------------------------------------------

// Minimal RFC-4180 helpers: fields are quoted when they contain commas,
// quotes, or newlines; parse handles quoted fields with doubled quotes.
std::string csv_escape(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);

// --- time ----------------------------------------------------------------

// ISO-8601 UTC, e.g. "2024-05-01T12:00:00Z". When pinning is enabled every
// call returns the epoch so reruns produce byte-identical artifacts.
std::string iso8601_now();

void pin_time(bool on);

bool time_pinned();

// --- parallel ------------------------------------------------------------

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any worker is rethrown on the caller after all workers join.
void parallel_for(size_t n, size_t threads, const std::function<void(size_t)>& fn);

}  // namespace langweave::util
