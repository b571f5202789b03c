#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "rydpol/errors.hpp"

namespace rydpol {

/// CSV emission with a fixed column order, LF line endings and %.12g
/// number formatting.
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& columns) { line(columns); }

    void row(const std::vector<double>& values) {
        std::string s;
        char buf[32];
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) s += ',';
            std::snprintf(buf, sizeof buf, "%.12g", values[i]);
            s += buf;
        }
        out_ << s << '\n';
    }

    void line(const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        out_ << s << '\n';
    }

  private:
    std::ostream& out_;
};

/// Output stream selector: path or stdout when empty/"-".
class OutputTarget {
  public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot open output file: " + path);
        }
    }

    std::ostream& stream() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

}  // namespace rydpol
