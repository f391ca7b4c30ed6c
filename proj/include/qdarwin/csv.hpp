#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "qdarwin/errors.hpp"

namespace qdarwin::util {

// RFC-4180-style CSV writer: "." decimal separator, LF line endings, header
// row, doubles printed with 17 significant digits so they round-trip.

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw IoError("cannot open " + path + " for writing");
        path_ = path;
        write_row(header);
    }

    void write_row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_quote(fields[i]);
        }
        out_ << '\n';
        if (!out_) throw IoError("write failed on " + path_);
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("close failed on " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

} // namespace qdarwin::util
