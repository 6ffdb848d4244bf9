#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elbt/ledger.hpp"

namespace elbt {

/// Header row plus data rows of a CSV document. `line_numbers[i]` is the
/// 1-based source line of `rows[i]` for diagnostics.
struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

/// RFC 4180 subset: comma separated, double-quote escaping, no embedded
/// newlines. Blank lines are skipped. Throws ParseError.
CsvTable parse_csv(std::istream& in, std::string source = "<csv>");
CsvTable read_csv_file(const std::filesystem::path& path);

inline constexpr std::string_view kSnapshotHeader =
    "account_id,as_of,status,pd,ead,lgd,lifetime_el,default_date,pd_model,lgd_model,rating_grade,exposure_band,"
    "collateral_type,years_in_default";
inline constexpr std::string_view kEventsHeader =
    "account_id,write_off,recovery,at_default_ead,at_default_lgd,restated_bop_el";
inline constexpr std::string_view kProvisionsHeader = "llp_bop,llp_eop,ibnr_bop,ibnr_eop,sf_bop,sf_eop";

/// Builds a validated snapshot. Every row must carry the same as_of; a
/// header-only table needs `as_of` to be supplied. When both are present they
/// must agree. Errors cite the source line.
Snapshot load_snapshot(const CsvTable& table, std::optional<Date> as_of = std::nullopt);
Snapshot load_snapshot_file(const std::filesystem::path& path, std::optional<Date> as_of = std::nullopt);

PeriodEvents load_events(const CsvTable& table);
PeriodEvents load_events_file(const std::filesystem::path& path);

/// Single-record CSV, or a JSON object with the same keys (chosen by the
/// `.json` extension or a leading '{').
ProvisionBalances parse_provisions(std::string_view text, std::string_view source = "<provisions>");
ProvisionBalances load_provisions_file(const std::filesystem::path& path);

void write_snapshot_csv(std::ostream& out, const Snapshot& snapshot);
void write_events_csv(std::ostream& out, const PeriodEvents& events);
void write_provisions_json(std::ostream& out, const ProvisionBalances& provisions);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace elbt
