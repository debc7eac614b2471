#include "ast/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ast {

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
    throw TomlError("config line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_bare(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!is_bare_char(c)) return false;
    }
    return true;
}

/// Strips a trailing comment that starts outside of quotes.
std::string_view strip_comment(std::string_view s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

std::string parse_quoted(std::string_view s, int line) {
    std::string out;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '"') {
            if (i + 1 != s.size()) fail(line, "trailing characters after closing quote");
            return out;
        }
        if (c == '\\') {
            ++i;
            if (i == s.size()) fail(line, "dangling escape in string");
            switch (s[i]) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                default: fail(line, "unsupported escape in string");
            }
            continue;
        }
        out.push_back(c);
    }
    fail(line, "unterminated string");
}

TomlValue parse_value(std::string_view raw, int line) {
    TomlValue v;
    if (raw.empty()) fail(line, "missing value");

    if (raw.front() == '"') {
        v.kind = TomlValue::Kind::string;
        v.string_value = parse_quoted(raw, line);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.bool_value = raw == "true";
        return v;
    }

    const char* first = raw.data();
    const char* last = raw.data() + raw.size();

    long long i = 0;
    auto [int_end, int_err] = std::from_chars(first, last, i);
    if (int_err == std::errc() && int_end == last) {
        v.kind = TomlValue::Kind::integer;
        v.int_value = i;
        return v;
    }

    double d = 0.0;
    auto [dbl_end, dbl_err] = std::from_chars(first, last, d);
    if (dbl_err == std::errc() && dbl_end == last) {
        v.kind = TomlValue::Kind::floating;
        v.float_value = d;
        return v;
    }

    fail(line, "unrecognized value '" + std::string(raw) + "'");
}

}  // namespace

const std::string& TomlValue::as_string(const std::string& where) const {
    if (kind != Kind::string) throw TomlError(where + ": expected a string");
    return string_value;
}

long long TomlValue::as_int(const std::string& where) const {
    if (kind != Kind::integer) throw TomlError(where + ": expected an integer");
    return int_value;
}

double TomlValue::as_double(const std::string& where) const {
    if (kind == Kind::floating) return float_value;
    if (kind == Kind::integer) return static_cast<double>(int_value);
    throw TomlError(where + ": expected a number");
}

bool TomlValue::as_bool(const std::string& where) const {
    if (kind != Kind::boolean) throw TomlError(where + ": expected true or false");
    return bool_value;
}

std::uint64_t TomlValue::as_seed(const std::string& where) const {
    const long long i = as_int(where);
    if (i < 0) throw TomlError(where + ": seed must be non-negative");
    return static_cast<std::uint64_t>(i);
}

TomlDocument TomlDocument::parse(std::string_view text) {
    TomlDocument doc;
    std::string current;  // "" = root section
    doc.sections_[current];
    doc.order_.push_back(current);

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        line = trim(strip_comment(line));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (!is_bare(name)) fail(line_no, "bad section name");
            current = std::string(name);
            if (doc.sections_.count(current)) fail(line_no, "duplicate section [" + current + "]");
            doc.sections_[current];
            doc.order_.push_back(current);
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        if (!is_bare(key)) fail(line_no, "bad key '" + std::string(key) + "'");
        const std::string_view raw = trim(line.substr(eq + 1));

        Section& section = doc.sections_[current];
        if (section.count(std::string(key))) {
            fail(line_no, "duplicate key '" + std::string(key) + "'");
        }
        section[std::string(key)] = parse_value(raw, line_no);
    }
    return doc;
}

TomlDocument TomlDocument::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TomlError("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

bool TomlDocument::has_section(const std::string& name) const {
    return sections_.count(name) != 0;
}

const TomlDocument::Section* TomlDocument::section(const std::string& name) const {
    const auto it = sections_.find(name);
    return it == sections_.end() ? nullptr : &it->second;
}

std::vector<std::string> TomlDocument::section_names() const { return order_; }

const TomlValue* TomlDocument::find(const std::string& section, const std::string& key) const {
    const Section* s = this->section(section);
    if (!s) return nullptr;
    const auto it = s->find(key);
    return it == s->end() ? nullptr : &it->second;
}

std::string TomlDocument::get_string(const std::string& section, const std::string& key,
                                     std::string fallback) const {
    const TomlValue* v = find(section, key);
    return v ? v->as_string(section + "." + key) : std::move(fallback);
}

long long TomlDocument::get_int(const std::string& section, const std::string& key,
                                long long fallback) const {
    const TomlValue* v = find(section, key);
    return v ? v->as_int(section + "." + key) : fallback;
}

double TomlDocument::get_double(const std::string& section, const std::string& key,
                                double fallback) const {
    const TomlValue* v = find(section, key);
    return v ? v->as_double(section + "." + key) : fallback;
}

bool TomlDocument::get_bool(const std::string& section, const std::string& key,
                            bool fallback) const {
    const TomlValue* v = find(section, key);
    return v ? v->as_bool(section + "." + key) : fallback;
}

std::uint64_t TomlDocument::get_seed(const std::string& section, const std::string& key,
                                     std::uint64_t fallback) const {
    const TomlValue* v = find(section, key);
    return v ? v->as_seed(section + "." + key) : fallback;
}

}  // namespace ast
