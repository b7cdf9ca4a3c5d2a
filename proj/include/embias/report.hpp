#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace embias {

// Labeled numeric grid; absent cells (gated or unavailable results) stay
// empty through every output format.
struct ReportTable {
    std::string name;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::optional<double>> cells;

    ReportTable() = default;
    ReportTable(std::string name, std::vector<std::string> rows, std::vector<std::string> cols);

    std::optional<double>& at(std::size_t r, std::size_t c) {
        return cells[r * col_labels.size() + c];
    }
    const std::optional<double>& at(std::size_t r, std::size_t c) const {
        return cells[r * col_labels.size() + c];
    }
    void set(std::size_t r, std::size_t c, double v) { at(r, c) = v; }
    std::optional<double> cell(std::string_view row, std::string_view col) const;
};

struct Provenance {
    std::string config_hash;
    std::string embedding_checksum;
    std::uint64_t seed = 0;
};

struct SkipEntry {
    std::string context;  // which list / which annotator pair
    std::string token;
};

struct Report {
    std::string experiment;
    std::vector<ReportTable> tables;
    std::vector<SkipEntry> skips;
    std::vector<std::string> notes;
    Provenance provenance;

    const ReportTable* table(std::string_view name) const;
    void skip(std::string context, std::string token) {
        skips.push_back({std::move(context), std::move(token)});
    }
};

enum class OutputFormat { Csv, Markdown, Json };

std::optional<OutputFormat> output_format_from_string(std::string_view name) noexcept;
std::string_view output_format_extension(OutputFormat f) noexcept;

// JSON keeps full precision; csv and markdown render 4 fractional digits.
nlohmann::ordered_json report_to_json(const Report& report);
void write_report(const Report& report, OutputFormat format, std::ostream& out);
std::string render_report(const Report& report, OutputFormat format);

}  // namespace embias
