#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdrelay {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string csv_num(std::uint64_t v) { return std::to_string(v); }
inline std::string csv_num(int v) { return std::to_string(v); }

/// Line-buffered CSV writer: header row is mandatory, rows are flushed as
/// they are written so partial results survive an interrupted run. The
/// optional timestamp is a comment line so payloads stay reproducible.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header,
              const std::string& timestamp_comment = {})
        : out_(path), n_cols_(header.size()) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        if (!timestamp_comment.empty()) out_ << "# " << timestamp_comment << "\n";
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        if (cells.size() != n_cols_)
            throw std::logic_error("CsvWriter: column count mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        out_.flush();
        if (!out_) throw std::runtime_error("CsvWriter: write failure");
    }

  private:
    std::ofstream out_;
    std::size_t n_cols_;
};

/// All non-comment lines of a file; used for byte-level reproducibility
/// checks and schema validation.
inline std::vector<std::string> read_csv_payload(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

}  // namespace fdrelay
