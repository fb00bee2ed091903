#include "bnncim/config.hpp"

#include <sstream>
#include <stdexcept>

#include "bnncim/textio.hpp"

namespace bnncim {

Config Config::parse(std::string_view text) {
    Config c;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = (eol == std::string_view::npos) ? std::string_view{} : text.substr(eol + 1);

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = textio::trim(line);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key(textio::trim(line.substr(0, eq)));
        const std::string value(textio::trim(line.substr(eq + 1)));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        c.values_[key] = value;
    }
    return c;
}

Config Config::parse_file(const std::string& path) { return parse(textio::read_file(path)); }

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("missing config key: " + key);
    return it->second;
}

std::string Config::get_string_or(const std::string& key, std::string fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? std::move(fallback) : it->second;
}

double Config::get_double(const std::string& key) const {
    return textio::parse_double(get_string(key));
}

double Config::get_double_or(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : textio::parse_double(it->second);
}

long long Config::get_int(const std::string& key) const {
    return textio::parse_int(get_string(key));
}

long long Config::get_int_or(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : textio::parse_int(it->second);
}

std::uint64_t Config::get_u64_or(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : textio::parse_u64(it->second);
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("config key " + key + ": expected true/false");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::string_view s = values_.at(key);
    std::vector<double> out;
    while (!s.empty()) {
        const std::size_t comma = s.find(',');
        out.push_back(textio::parse_double(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s = s.substr(comma + 1);
    }
    return out;
}

std::string Config::echo_block() const {
    std::ostringstream os;
    os << "# --- configuration echo ---\n";
    for (const auto& [k, v] : values_) os << "# " << k << " = " << v << "\n";
    return os.str();
}

} // namespace bnncim

