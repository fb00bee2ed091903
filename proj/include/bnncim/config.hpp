#ifndef BNNCIM_CONFIG_HPP
#define BNNCIM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bnncim {

/// Flat key = value configuration. Lines are `key = value`; '#' starts a
/// comment; blank lines are ignored. Keys are kept sorted so serialization
/// is deterministic.
class Config {
  public:
    static Config parse(std::string_view text);
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const;
    void set(const std::string& key, std::string value);

    /// Typed getters: the _or forms return the fallback when the key is
    /// absent; all of them throw std::invalid_argument on a malformed value.
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, std::string fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    /// Comma-separated list of doubles.
    std::vector<double> get_double_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

    /// `# key = value` lines, sorted; appended to every output artifact so a
    /// result file carries the configuration that produced it.
    std::string echo_block() const;

  private:
    std::map<std::string, std::string> values_;
};

} // namespace bnncim

#endif
