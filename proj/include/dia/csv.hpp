#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace dia {

/// Round-trip exact text for a double (17 significant digits).
std::string format_double(double x);

/// Header-first CSV writer. Rows are written to `<path>.tmp` and moved into
/// place by commit(); a writer destroyed before commit() removes its file.
class CsvWriter {
public:
    CsvWriter(std::filesystem::path path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    CsvWriter& field(double x);
    CsvWriter& field(long long x);
    CsvWriter& field(std::uint64_t x);
    CsvWriter& field(bool x) { return field(static_cast<long long>(x)); }
    CsvWriter& field(int x) { return field(static_cast<long long>(x)); }
    CsvWriter& field(const std::string& s);
    /// Ends the current row; throws std::logic_error on a column-count mismatch.
    void end_row();
    void commit();

    const std::filesystem::path& path() const { return path_; }

private:
    void separator();

    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t current_{0};
    bool committed_{false};
};

}  // namespace dia
