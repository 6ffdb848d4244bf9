#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "elbt/ledger.hpp"
#include "elbt/sum.hpp"

namespace elbt::cli {

enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitIdentityBreach = 2 };

enum class OutputFormat { Json, Csv };

struct RunConfig {
    std::filesystem::path bop;
    std::filesystem::path eop;
    std::optional<std::filesystem::path> events;
    std::optional<std::filesystem::path> provisions;
    /// Needed only when a snapshot file has no data rows.
    std::optional<Date> bop_date;
    std::optional<Date> eop_date;
    double discount_rate = 0.0;
    int loss_confirmation_months = 0;
    std::vector<std::string> segments;
    std::optional<std::filesystem::path> out;
    OutputFormat format = OutputFormat::Json;
    double tolerance = kDefaultTolerance;
    std::size_t top_n = 5;
};

struct SimulateConfig {
    std::optional<int> appendix_case;
    std::optional<std::filesystem::path> scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    OutputFormat format = OutputFormat::Json;
    double tolerance = kDefaultTolerance;
    bool verify = false;
};

struct ChainConfig {
    std::optional<std::filesystem::path> manifest;
    std::vector<std::filesystem::path> snapshots;
    /// Empty, or one as_of per snapshot; required for snapshots without rows.
    std::vector<Date> as_of;
    std::vector<std::filesystem::path> events;
    std::vector<std::filesystem::path> provisions;
    double discount_rate = 0.0;
    int loss_confirmation_months = 0;
    std::optional<std::filesystem::path> out;
    OutputFormat format = OutputFormat::Json;
    double tolerance = kDefaultTolerance;
};

struct ReportConfig {
    std::filesystem::path input;
    std::optional<std::filesystem::path> out;
    OutputFormat format = OutputFormat::Json;
};

/// Chained ledgers loaded from a manifest written by `simulate`.
std::vector<PeriodLedger> load_manifest(const std::filesystem::path& manifest);

/// Writes snapshots, events, provisions and `chain.json` into `dir`.
void write_chain(const std::filesystem::path& dir, const std::vector<PeriodLedger>& ledgers);

int cmd_backtest(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const SimulateConfig& cfg, std::ostream& out);
int cmd_chain(const ChainConfig& cfg, std::ostream& out);
int cmd_report(const ReportConfig& cfg, std::ostream& out);

/// Parses arguments, dispatches, and maps every failure to an exit code with
/// a diagnostic on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elbt::cli
