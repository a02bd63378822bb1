// csv.hpp: Minimal deterministic CSV writer (shortest round-trip doubles).

#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace upb {

std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
    explicit CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(std::string_view s);
    void end_row();

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

} // namespace upb
