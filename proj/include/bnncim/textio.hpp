#ifndef BNNCIM_TEXTIO_HPP
#define BNNCIM_TEXTIO_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace bnncim::textio {

/// Shortest decimal string that parses back to exactly the same double
/// (std::to_chars). All serialized artifacts use this so that reruns are
/// byte-identical and round trips are bit-exact.
std::string format_double(double v);

/// Strict full-string parse; throws std::invalid_argument on anything else.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);
std::uint64_t parse_u64(std::string_view s);

std::string format_int(long long v);
std::string format_u64(std::uint64_t v);

/// Whole-file read; throws io_error with the path on failure.
std::string read_file(const std::string& path);

/// Write-to-temp-then-rename so a crash can never leave a half-written
/// artifact at the destination path.
void atomic_write_file(const std::string& path, std::string_view content);

std::string_view trim(std::string_view s);

} // namespace bnncim::textio

#endif
