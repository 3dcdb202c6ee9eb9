#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "s2e/latency_model.hpp"
#include "s2e/time.hpp"

namespace s2e::config {

enum class DiagKind {
    syntax,
    unknown_section,
    unknown_key,
    missing_key,
    bad_value,
    unknown_kind,
    unresolved_id,
    capacity,
    path,
    distribution,
    budget,
};

inline const char* to_string(DiagKind k) {
    switch (k) {
        case DiagKind::syntax: return "syntax";
        case DiagKind::unknown_section: return "unknown-section";
        case DiagKind::unknown_key: return "unknown-key";
        case DiagKind::missing_key: return "missing-key";
        case DiagKind::bad_value: return "bad-value";
        case DiagKind::unknown_kind: return "unknown-kind";
        case DiagKind::unresolved_id: return "unresolved-id";
        case DiagKind::capacity: return "capacity";
        case DiagKind::path: return "path";
        case DiagKind::distribution: return "distribution";
        case DiagKind::budget: return "budget";
    }
    return "?";
}

struct Location {
    int line = 0;    // 1-based; 0 means "whole file"
    int column = 0;  // 1-based
};

struct Diagnostic {
    Location where;
    DiagKind kind;
    std::string message;
};

inline std::string format(const Diagnostic& d, std::string_view file = "<input>") {
    std::ostringstream os;
    os << file << ':' << d.where.line << ':' << d.where.column << ": error[" << to_string(d.kind)
       << "]: " << d.message;
    return os.str();
}

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<Diagnostic> diags)
        : std::runtime_error(summary(diags)), diagnostics_(std::move(diags)) {}

    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

    bool has(DiagKind kind) const {
        for (const auto& d : diagnostics_) {
            if (d.kind == kind) return true;
        }
        return false;
    }

private:
    static std::string summary(const std::vector<Diagnostic>& diags) {
        std::string s = std::to_string(diags.size()) + " configuration error(s)";
        if (!diags.empty()) s += "; first: " + format(diags.front());
        return s;
    }
    std::vector<Diagnostic> diagnostics_;
};

struct Entry {
    std::string key;
    std::string value;
    Location key_at;
    Location value_at;
};

struct Section {
    std::string name;
    Location at;
    std::vector<Entry> entries;
};

struct Document {
    std::vector<Section> sections;
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

/// Splits the text into sections of key/value entries. Comments start with '#' or ';'.
/// Entries before the first section header, malformed lines, and duplicates are errors.
inline Document parse_document(std::string_view text, std::vector<Diagnostic>& diags) {
    Document doc;
    std::set<std::string> seen_sections;
    std::set<std::string> seen_keys;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

        std::string_view body = raw;
        if (const auto c = body.find_first_of("#;"); c != std::string_view::npos) body = body.substr(0, c);
        const std::size_t indent = body.find_first_not_of(" \t");
        if (indent == std::string_view::npos) continue;
        const int col0 = static_cast<int>(indent) + 1;
        const std::string_view content = trim(body);

        if (content.front() == '[') {
            if (content.back() != ']') {
                diags.push_back({{line_no, col0}, DiagKind::syntax, "section header missing ']'"});
                continue;
            }
            const std::string_view name = trim(content.substr(1, content.size() - 2));
            bool ok = !name.empty();
            for (char ch : name) ok = ok && is_name_char(ch);
            if (!ok) {
                diags.push_back({{line_no, col0 + 1}, DiagKind::syntax, "invalid section name '" + std::string(name) + "'"});
                continue;
            }
            if (!seen_sections.insert(std::string(name)).second) {
                diags.push_back({{line_no, col0}, DiagKind::syntax, "duplicate section [" + std::string(name) + "]"});
            }
            doc.sections.push_back({std::string(name), {line_no, col0}, {}});
            seen_keys.clear();
            continue;
        }

        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos) {
            diags.push_back({{line_no, col0}, DiagKind::syntax, "expected 'key = value' or '[section]'"});
            continue;
        }
        const std::string_view key = trim(body.substr(0, eq));
        bool key_ok = !key.empty();
        for (char ch : key) key_ok = key_ok && is_name_char(ch);
        if (!key_ok) {
            diags.push_back({{line_no, col0}, DiagKind::syntax, "invalid key '" + std::string(key) + "'"});
            continue;
        }
        if (doc.sections.empty()) {
            diags.push_back({{line_no, col0}, DiagKind::syntax, "key '" + std::string(key) + "' outside of any section"});
            continue;
        }
        const std::string_view after = body.substr(eq + 1);
        const std::size_t vstart = after.find_first_not_of(" \t");
        const int vcol = static_cast<int>(eq + 1 + (vstart == std::string_view::npos ? 0 : vstart)) + 1;
        if (!seen_keys.insert(std::string(key)).second) {
            diags.push_back({{line_no, col0}, DiagKind::syntax, "duplicate key '" + std::string(key) + "'"});
            continue;
        }
        doc.sections.back().entries.push_back(
            {std::string(key), std::string(trim(after)), {line_no, col0}, {line_no, vcol}});
    }
    return doc;
}

// -- value parsers: each returns nullopt and sets `err` on failure ---------------------

/// "<digits>[.<digits>](us|ms|s)". Values must be whole microseconds.
inline std::optional<Duration> parse_duration(std::string_view s, std::string& err) {
    s = trim(s);
    std::size_t i = 0;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
    const std::string_view number = s.substr(0, i);
    const std::string_view unit = trim(s.substr(i));
    int scale_digits = 0;
    if (unit == "us") {
        scale_digits = 0;
    } else if (unit == "ms") {
        scale_digits = 3;
    } else if (unit == "s") {
        scale_digits = 6;
    } else {
        err = "duration '" + std::string(s) + "' needs a unit suffix (us, ms or s)";
        return std::nullopt;
    }
    const std::size_t dot = number.find('.');
    std::string_view whole = number.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : number.substr(dot + 1);
    if (whole.empty() || (dot != std::string_view::npos && frac.empty()) ||
        frac.find('.') != std::string_view::npos) {
        err = "malformed duration '" + std::string(s) + "'";
        return std::nullopt;
    }
    while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);
    if (static_cast<int>(frac.size()) > scale_digits) {
        err = "duration '" + std::string(s) + "' is finer than 1us";
        return std::nullopt;
    }
    std::int64_t value = 0;
    for (char c : whole) value = value * 10 + (c - '0');
    std::int64_t f = 0;
    for (int k = 0; k < scale_digits; ++k) f = f * 10 + (k < static_cast<int>(frac.size()) ? frac[k] - '0' : 0);
    std::int64_t scale = 1;
    for (int k = 0; k < scale_digits; ++k) scale *= 10;
    return Duration{value * scale + f};
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s, std::string& err) {
    s = trim(s);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
        err = "expected a non-negative integer, got '" + std::string(s) + "'";
        return std::nullopt;
    }
    return v;
}

inline std::optional<double> parse_double(std::string_view s, std::string& err) {
    const std::string str(trim(s));
    if (str.empty()) {
        err = "expected a number";
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(str, &used);
        if (used != str.size()) throw std::invalid_argument(str);
        return v;
    } catch (const std::exception&) {
        err = "expected a number, got '" + str + "'";
        return std::nullopt;
    }
}

/// Comma-separated list; empty input gives an empty list.
inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    s = trim(s);
    if (s.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = s.find(',', start);
        out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// "0-9, 15, 20" style channel set.
inline std::optional<std::set<unsigned>> parse_index_set(std::string_view s, std::string& err) {
    std::set<unsigned> out;
    for (const auto& item : split_list(s)) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            auto v = parse_uint(item, err);
            if (!v) return std::nullopt;
            out.insert(static_cast<unsigned>(*v));
        } else {
            auto lo = parse_uint(item.substr(0, dash), err);
            auto hi = lo ? parse_uint(item.substr(dash + 1), err) : std::nullopt;
            if (!lo || !hi) return std::nullopt;
            if (*hi < *lo) {
                err = "range '" + item + "' is reversed";
                return std::nullopt;
            }
            for (auto v = *lo; v <= *hi; ++v) out.insert(static_cast<unsigned>(v));
        }
    }
    return out;
}

/// constant(d) | uniform(lo, hi) | truncnormal(mean, stddev, lo, hi) | empirical(d:w, d:w, ...)
inline std::optional<LatencyModel> parse_model(std::string_view s, std::string& err) {
    s = trim(s);
    const auto open = s.find('(');
    if (open == std::string_view::npos || s.back() != ')') {
        err = "expected distribution like 'uniform(1ms, 2ms)', got '" + std::string(s) + "'";
        return std::nullopt;
    }
    const std::string name(trim(s.substr(0, open)));
    const auto args = split_list(s.substr(open + 1, s.size() - open - 2));
    auto durations = [&](std::size_t n) -> std::optional<std::vector<Duration>> {
        if (args.size() != n) {
            err = name + " takes " + std::to_string(n) + " argument(s), got " + std::to_string(args.size());
            return std::nullopt;
        }
        std::vector<Duration> out;
        for (const auto& a : args) {
            auto d = parse_duration(a, err);
            if (!d) return std::nullopt;
            out.push_back(*d);
        }
        return out;
    };
    if (name == "constant") {
        auto d = durations(1);
        if (!d) return std::nullopt;
        return Constant{(*d)[0]};
    }
    if (name == "uniform") {
        auto d = durations(2);
        if (!d) return std::nullopt;
        return Uniform{(*d)[0], (*d)[1]};
    }
    if (name == "truncnormal") {
        auto d = durations(4);
        if (!d) return std::nullopt;
        return TruncatedNormal{(*d)[0], (*d)[1], (*d)[2], (*d)[3]};
    }
    if (name == "empirical") {
        Empirical e;
        for (const auto& a : args) {
            const auto colon = a.find(':');
            if (colon == std::string::npos) {
                err = "empirical bin '" + a + "' must be 'duration:weight'";
                return std::nullopt;
            }
            auto d = parse_duration(a.substr(0, colon), err);
            auto w = d ? parse_double(a.substr(colon + 1), err) : std::nullopt;
            if (!d || !w) return std::nullopt;
            e.bins.push_back({*d, *w});
        }
        return e;
    }
    err = "unknown distribution '" + name + "' (constant, uniform, truncnormal, empirical)";
    return std::nullopt;
}

}  // namespace s2e::config
