#pragma once

// RFC-4180 CSV reading and writing.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace imcrawler::csv {

using Row = std::vector<std::string>;

// Quotes a field when it contains a delimiter, quote, CR or LF.
std::string escape_field(std::string_view field);
std::string format_row(const Row& row);

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Reads one record. Returns false at end of input. `line_no()` is the
    // 1-based physical line the record started on.
    bool next(Row& row);
    std::size_t line_no() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    void write(const Row& row) { out_ << format_row(row); }

private:
    std::ostream& out_;
};

// Whole-file helpers. `read_file` throws Error{Io} when the file is missing.
std::vector<Row> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<Row>& rows);

} // namespace imcrawler::csv
