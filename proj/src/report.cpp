#include "embias/report.hpp"

#include <ostream>
#include <sstream>

#include "embias/common.hpp"

namespace embias {

ReportTable::ReportTable(std::string name_, std::vector<std::string> rows,
                         std::vector<std::string> cols)
    : name(std::move(name_)), row_labels(std::move(rows)), col_labels(std::move(cols)) {
    cells.assign(row_labels.size() * col_labels.size(), std::nullopt);
}

std::optional<double> ReportTable::cell(std::string_view row, std::string_view col) const {
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        if (row_labels[r] != row) continue;
        for (std::size_t c = 0; c < col_labels.size(); ++c) {
            if (col_labels[c] == col) return at(r, c);
        }
    }
    return std::nullopt;
}

const ReportTable* Report::table(std::string_view name) const {
    for (const auto& t : tables) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::optional<OutputFormat> output_format_from_string(std::string_view name) noexcept {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "markdown" || name == "md") return OutputFormat::Markdown;
    if (name == "json") return OutputFormat::Json;
    return std::nullopt;
}

std::string_view output_format_extension(OutputFormat f) noexcept {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Markdown: return "md";
        case OutputFormat::Json: return "json";
    }
    return "txt";
}

nlohmann::ordered_json report_to_json(const Report& report) {
    nlohmann::ordered_json j;
    j["experiment"] = report.experiment;
    j["provenance"] = {{"config_hash", report.provenance.config_hash},
                       {"embedding_checksum", report.provenance.embedding_checksum},
                       {"seed", report.provenance.seed}};
    auto tables = nlohmann::ordered_json::array();
    for (const auto& t : report.tables) {
        nlohmann::ordered_json jt;
        jt["name"] = t.name;
        jt["rows"] = t.row_labels;
        jt["cols"] = t.col_labels;
        auto cells = nlohmann::ordered_json::array();
        for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
            auto row = nlohmann::ordered_json::array();
            for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
                const auto& v = t.at(r, c);
                if (v) {
                    row.push_back(*v);
                } else {
                    row.push_back(nullptr);
                }
            }
            cells.push_back(std::move(row));
        }
        jt["cells"] = std::move(cells);
        tables.push_back(std::move(jt));
    }
    j["tables"] = std::move(tables);
    auto skips = nlohmann::ordered_json::array();
    for (const auto& s : report.skips) {
        skips.push_back({{"context", s.context}, {"token", s.token}});
    }
    j["skips"] = std::move(skips);
    j["notes"] = report.notes;
    return j;
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(const Report& report, std::ostream& out) {
    out << "# experiment: " << report.experiment << '\n';
    out << "# config_hash: " << report.provenance.config_hash << '\n';
    out << "# embedding_checksum: " << report.provenance.embedding_checksum << '\n';
    out << "# seed: " << report.provenance.seed << '\n';
    for (const auto& t : report.tables) {
        out << "# table: " << t.name << '\n';
        out << "row";
        for (const auto& c : t.col_labels) out << ',' << csv_quote(c);
        out << '\n';
        for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
            out << csv_quote(t.row_labels[r]);
            for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
                out << ',';
                if (const auto& v = t.at(r, c)) out << format_fixed(*v);
            }
            out << '\n';
        }
    }
    for (const auto& s : report.skips) {
        out << "# skipped: " << s.context << ": " << s.token << '\n';
    }
    for (const auto& n : report.notes) {
        out << "# note: " << n << '\n';
    }
}

void write_markdown(const Report& report, std::ostream& out) {
    out << "# " << report.experiment << "\n\n";
    out << "provenance: config `" << report.provenance.config_hash << "`, embedding `"
        << report.provenance.embedding_checksum << "`, seed " << report.provenance.seed << "\n";
    for (const auto& t : report.tables) {
        out << "\n## " << t.name << "\n\n";
        out << "| |";
        for (const auto& c : t.col_labels) out << ' ' << c << " |";
        out << "\n|---|";
        for (std::size_t c = 0; c < t.col_labels.size(); ++c) out << "---|";
        out << '\n';
        for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
            out << "| " << t.row_labels[r] << " |";
            for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
                const auto& v = t.at(r, c);
                out << ' ' << (v ? format_fixed(*v) : std::string()) << " |";
            }
            out << '\n';
        }
    }
    if (!report.skips.empty()) {
        out << "\n## skipped words\n\n";
        for (const auto& s : report.skips) {
            out << "- " << s.context << ": " << s.token << '\n';
        }
    }
    if (!report.notes.empty()) {
        out << "\n## notes\n\n";
        for (const auto& n : report.notes) out << "- " << n << '\n';
    }
}

}  // namespace

void write_report(const Report& report, OutputFormat format, std::ostream& out) {
    switch (format) {
        case OutputFormat::Csv: write_csv(report, out); break;
        case OutputFormat::Markdown: write_markdown(report, out); break;
        case OutputFormat::Json: out << report_to_json(report).dump(2) << '\n'; break;
    }
}

std::string render_report(const Report& report, OutputFormat format) {
    std::ostringstream out;
    write_report(report, format, out);
    return out.str();
}

}  // namespace embias
