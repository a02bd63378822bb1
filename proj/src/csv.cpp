#include "upb/csv.hpp"

#include <charconv>
#include <cmath>

#include "upb/errors.hpp"

namespace upb {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw Error("could not format double");
    return std::string(buf, end);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : CsvWriter(path, std::vector<std::string>(header.begin(), header.end())) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::string_view s) {
    if (in_row_ > 0) out_ << ',';
    out_ << s;
    ++in_row_;
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) throw Error("CSV row has " + std::to_string(in_row_) + " cells, expected " +
                                         std::to_string(columns_));
    out_ << '\n';
    in_row_ = 0;
}

} // namespace upb
