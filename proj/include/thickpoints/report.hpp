#pragma once

#include "thickpoints/harness.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace thickpoints::report {

using json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "report-v1";
inline constexpr const char* kManifestSchema = "manifest-v1";
inline constexpr const char* kToolVersion = "0.1.0";

/// Reals with 17 significant digits, '.' as decimal point.
std::string format_real(double v);

/// One CSV field; reals are printed with `format_real`.
class Cell {
public:
    template <class T>
        requires std::is_arithmetic_v<T>
    Cell(T v) {
        if constexpr (std::is_same_v<T, bool>)
            text_ = v ? "true" : "false";
        else if constexpr (std::is_integral_v<T>)
            text_ = std::to_string(v);
        else
            text_ = format_real(static_cast<double>(v));
    }
    Cell(std::string s);
    Cell(const char* s) : Cell(std::string(s)) {}

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<Cell> cells);
    std::size_t rows() const { return rows_.size(); }
    void write(std::ostream& os) const;
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

/// EstimateReport as JSON; wall time is left out so reports stay reproducible.
json to_json(const mc::EstimateReport& r);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Files written into one output directory, remembered in order so that a
/// manifest with their digests can be written last.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<std::string>& files() const { return files_; }

    /// `name` is relative to the directory; parent directories are created.
    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const json& doc);
    void write_csv(const std::string& name, const CsvTable& table);

    /// manifest.json: tool version, config echo, seed, per-file SHA-256 and
    /// size, timing. Written last; further writes are refused.
    void write_manifest(const json& config, std::uint64_t seed, const json& timing);

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
    std::vector<std::string> digests_;
    std::vector<std::uintmax_t> sizes_;
    bool sealed_ = false;
};

} // namespace thickpoints::report
