#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dshock/errors.hpp"

namespace dshock {

// Fixed float formatting for reproducible CSV output.
inline std::string fmt12e(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

// Compact formatting for file-name components (times, eps values).
inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Write-then-rename so concurrent runs never observe partial files.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const std::filesystem::path tmp =
        path.string() + ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot open for writing: " + tmp.string());
        out << contents;
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// CSV accumulator: comma separators, LF endings, %.12e floats.
class CsvBuilder {
public:
    explicit CsvBuilder(const std::string& header) { buf_ = header + "\n"; }

    void add_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) buf_ += ',';
            buf_ += cells[i];
        }
        buf_ += '\n';
    }

    const std::string& str() const { return buf_; }

private:
    std::string buf_;
};

inline void write_json_atomic(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace dshock
