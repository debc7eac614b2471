#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ast {

/// Minimal TOML-style config reader covering the subset the tools use:
/// `[section]` headers, `key = value` pairs with scalar values (quoted
/// string, integer, float, boolean), and `#` comments. Anything outside the
/// subset is a parse error; silently accepting almost-TOML would hide typos.

class TomlError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TomlValue {
    enum class Kind { string, integer, floating, boolean };

    Kind kind = Kind::string;
    std::string string_value;
    long long int_value = 0;
    double float_value = 0.0;
    bool bool_value = false;

    /// Typed accessors; a type mismatch throws TomlError naming `where`.
    /// as_double accepts integers as well (15 is a valid 15.0).
    const std::string& as_string(const std::string& where) const;
    long long as_int(const std::string& where) const;
    double as_double(const std::string& where) const;
    bool as_bool(const std::string& where) const;
    std::uint64_t as_seed(const std::string& where) const;
};

class TomlDocument {
public:
    using Section = std::map<std::string, TomlValue>;

    static TomlDocument parse(std::string_view text);
    static TomlDocument parse_file(const std::string& path);

    bool has_section(const std::string& name) const;
    /// nullptr when the section does not exist. Keys placed before any
    /// section header live in the section named "".
    const Section* section(const std::string& name) const;
    std::vector<std::string> section_names() const;

    const TomlValue* find(const std::string& section, const std::string& key) const;

    /// Lookups with defaults, applying the TomlValue coercion rules.
    std::string get_string(const std::string& section, const std::string& key,
                           std::string fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::uint64_t get_seed(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;

private:
    std::map<std::string, Section> sections_;
    std::vector<std::string> order_;
};

}  // namespace ast
