#include "gvc/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gvc/error.hpp"

namespace gvc::csv {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    for (auto& f : out) {
        auto b = f.find_first_not_of(" \t");
        auto e = f.find_last_not_of(" \t");
        f = (b == std::string::npos) ? std::string{} : f.substr(b, e - b + 1);
    }
    return out;
}

std::string format(double value) {
    if (value == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw NumericalError("cannot format number");
    return std::string(buf, ptr);
}

double parse_number(std::string_view text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || begin == end) {
        throw ValidationError("not a decimal number: '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) throw ValidationError("non-finite number: '" + std::string(text) + "'");
    return value;
}

std::size_t Row::index(std::string_view column) const {
    const auto& header = source_->header;
    auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) fail("unknown column '" + std::string(column) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

const std::string& Row::str(std::string_view column) const { return fields_[index(column)]; }

std::optional<double> Row::opt_num(std::string_view column) const {
    const auto& s = str(column);
    if (s.empty()) return std::nullopt;
    try {
        return parse_number(s);
    } catch (const ValidationError& e) {
        fail(std::string(column) + ": " + e.what());
    }
}

double Row::num(std::string_view column) const {
    auto v = opt_num(column);
    if (!v) fail("missing value in column '" + std::string(column) + "'");
    return *v;
}

int Row::integer(std::string_view column) const {
    const auto& s = str(column);
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        fail("column '" + std::string(column) + "' is not an integer: '" + s + "'");
    }
    return value;
}

void Row::fail(const std::string& what) const { throw ParseError(source_->file, line_, what); }

Table Table::read(const std::filesystem::path& path, const std::vector<std::string>& required) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string(), required);
}

Table Table::parse(std::string_view text, const std::string& name,
                   const std::vector<std::string>& required) {
    Table t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    std::shared_ptr<Row::Source> source;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        auto fields = split(line);
        if (!have_header) {
            t.header_ = fields;
            source = std::make_shared<Row::Source>(Row::Source{name, std::move(fields)});
            have_header = true;
            for (const auto& col : required) {
                if (std::find(t.header_.begin(), t.header_.end(), col) == t.header_.end()) {
                    throw ParseError(name, line_no, "header lacks required column '" + col + "'");
                }
            }
            continue;
        }
        if (fields.size() != t.header_.size()) {
            throw ParseError(name, line_no,
                             "expected " + std::to_string(t.header_.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        t.rows_.emplace_back(source, std::move(fields), line_no);
    }
    if (!have_header) throw ParseError(name, 1, "missing header");
    return t;
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

}  // namespace gvc::csv
