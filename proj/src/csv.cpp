#include "imcrawler/csv.hpp"

#include "imcrawler/error.hpp"

namespace imcrawler::csv {

std::string escape_field(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row)
{
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i)
            line.push_back(',');
        line += escape_field(row[i]);
    }
    line.push_back('\n');
    return line;
}

bool Reader::next(Row& row)
{
    row.clear();
    int c = in_.get();
    if (c == std::char_traits<char>::eof())
        return false;
    record_line_ = line_;

    std::string field;
    bool quoted = false;
    for (;; c = in_.get()) {
        if (c == std::char_traits<char>::eof()) {
            row.push_back(std::move(field));
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n')
                    ++line_;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            quoted = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            break;
        case '\r':
            if (in_.peek() == '\n')
                break;
            [[fallthrough]];
        case '\n':
            ++line_;
            row.push_back(std::move(field));
            return true;
        default:
            field.push_back(ch);
        }
    }
}

std::vector<Row> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCategory::Io, "MissingFile", "cannot open " + path.string());
    Reader reader(in);
    std::vector<Row> rows;
    Row row;
    while (reader.next(row))
        rows.push_back(row);
    return rows;
}

void write_file(const std::filesystem::path& path, const std::vector<Row>& rows)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCategory::Io, "WriteFailure", "cannot write " + path.string());
    Writer writer(out);
    for (const auto& row : rows)
        writer.write(row);
}

} // namespace imcrawler::csv
