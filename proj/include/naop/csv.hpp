#pragma once

#include <charconv>
#include <cstdio>
#include <initializer_list>
#include <istream>
#include <string>
#include <vector>

#include "naop/error.hpp"

namespace naop {

/// Minimal reader for the comma-separated files this library writes: a fixed
/// header, no quoting beyond fields that never contain commas.
class CsvReader {
public:
    CsvReader(std::istream& in, std::initializer_list<const char*> header, std::string what)
        : in_(in), columns_(header.size()), what_(std::move(what)) {
        std::string line;
        if (!std::getline(in_, line)) fail(ErrorCode::Parse, what_ + ": empty file (missing header)");
        ++line_no_;
        strip(line);
        std::string expected;
        for (const char* h : header) expected += (expected.empty() ? "" : ",") + std::string(h);
        if (line != expected) fail(ErrorCode::Parse, what_ + ": expected header '" + expected + "'");
    }

    bool next(std::vector<std::string>& row) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            strip(line);
            if (line.empty()) continue;
            row.clear();
            std::size_t start = 0;
            while (true) {
                const auto comma = line.find(',', start);
                row.push_back(line.substr(start, comma - start));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (row.size() != columns_)
                error("expected " + std::to_string(columns_) + " fields, got " + std::to_string(row.size()));
            return true;
        }
        return false;
    }

    double to_double(const std::string& s) const {
        double v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) error("not a number: '" + s + "'");
        return v;
    }

    int to_int(const std::string& s) const {
        int v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) error("not an integer: '" + s + "'");
        return v;
    }

    [[noreturn]] void error(const std::string& why) const {
        fail(ErrorCode::Parse, what_ + ": line " + std::to_string(line_no_) + ": " + why);
    }

private:
    static void strip(std::string& line) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    }

    std::istream& in_;
    std::size_t columns_;
    std::string what_;
    std::size_t line_no_ = 0;
};

/// Shortest round-trip representation.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline const std::string& csv_field(const std::string& s) {
    if (s.find_first_of(",\n\"") != std::string::npos)
        fail(ErrorCode::InvalidArgument, "CSV field contains a delimiter: '" + s + "'");
    return s;
}

}  // namespace naop
