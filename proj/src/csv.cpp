#include "dia/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace dia {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(std::filesystem::path path, const std::vector<std::string>& header)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp"), columns_(header.size()) {
    if (header.empty()) throw std::invalid_argument("csv: empty header");
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("csv: cannot open '" + tmp_.string() + "' for writing");
    for (const auto& h : header) field(h);
    end_row();
}

CsvWriter::~CsvWriter() {
    if (committed_) return;
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
}

void CsvWriter::separator() {
    if (current_ == columns_) throw std::logic_error("csv: too many fields in row");
    if (current_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::field(double x) {
    separator();
    out_ << format_double(x);
    return *this;
}

CsvWriter& CsvWriter::field(long long x) {
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::field(std::uint64_t x) {
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") != std::string::npos) throw std::invalid_argument("csv: field needs quoting: " + s);
    separator();
    out_ << s;
    return *this;
}

void CsvWriter::end_row() {
    if (current_ != columns_) throw std::logic_error("csv: row has too few fields");
    out_ << '\n';
    current_ = 0;
}

void CsvWriter::commit() {
    if (current_ != 0) throw std::logic_error("csv: commit with an unfinished row");
    out_.close();
    if (!out_) throw std::runtime_error("csv: write to '" + tmp_.string() + "' failed");
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
}

}  // namespace dia
