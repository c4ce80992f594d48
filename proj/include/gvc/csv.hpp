#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace gvc::csv {

// One data line of a CSV file. Fields are accessed by header name.
class Row {
public:
    struct Source {
        std::string file;
        std::vector<std::string> header;
    };

    Row(std::shared_ptr<const Source> source, std::vector<std::string> fields, std::size_t line)
        : source_(std::move(source)), fields_(std::move(fields)), line_(line) {}

    std::size_t line() const { return line_; }
    const std::string& str(std::string_view column) const;
    // Empty field yields nullopt; anything else must parse as a decimal number.
    std::optional<double> opt_num(std::string_view column) const;
    double num(std::string_view column) const;
    int integer(std::string_view column) const;
    [[noreturn]] void fail(const std::string& what) const;

private:
    std::size_t index(std::string_view column) const;

    std::shared_ptr<const Source> source_;
    std::vector<std::string> fields_;
    std::size_t line_;
};

// Whole-file reader. Verifies that every required column is present in the header.
class Table {
public:
    static Table read(const std::filesystem::path& path, const std::vector<std::string>& required);
    static Table parse(std::string_view text, const std::string& name,
                       const std::vector<std::string>& required);

    const std::vector<Row>& rows() const { return rows_; }
    const std::vector<std::string>& header() const { return header_; }

private:
    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

std::vector<std::string> split(std::string_view line, char sep = ',');

// Shortest decimal string that round-trips to the same double.
std::string format(double value);
double parse_number(std::string_view text);

// Minimal writer: joins fields with commas, one record per line.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((emit(fields, first)), ...);
        out_ << '\n';
    }
    void row(const std::vector<std::string>& fields);

private:
    void sep(bool& first) {
        if (!first) out_ << ',';
        first = false;
    }
    void emit(const std::string& s, bool& first) { sep(first); out_ << s; }
    void emit(std::string_view s, bool& first) { sep(first); out_ << s; }
    void emit(const char* s, bool& first) { sep(first); out_ << s; }
    void emit(double v, bool& first) { sep(first); out_ << format(v); }
    void emit(int v, bool& first) { sep(first); out_ << v; }
    void emit(long v, bool& first) { sep(first); out_ << v; }
    void emit(std::size_t v, bool& first) { sep(first); out_ << v; }

    std::ostream& out_;
};

}  // namespace gvc::csv
