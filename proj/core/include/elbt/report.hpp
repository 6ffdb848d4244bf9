#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "elbt/backtest.hpp"

namespace elbt {

/// Fixed six fractional digits, negative zero printed as zero.
std::string format_amount(double value);

/// JSON document mirroring DecompositionReport. Monetary amounts and ratios
/// are decimal strings; absent optionals are null.
std::string report_to_json(const DecompositionReport& report, bool include_accounts = true);

/// Inverse of report_to_json up to formatting precision. Throws ParseError.
DecompositionReport report_from_json(std::string_view json_text);

void write_accounts_csv(std::ostream& out, const DecompositionReport& report);
void write_segments_csv(std::ostream& out, const DecompositionReport& report);

/// One-screen text summary for the terminal.
std::string summary_text(const DecompositionReport& report);

/// One period of a chained run with running totals.
struct ChainRow {
    std::size_t period = 0;
    Date bop_as_of;
    Date eop_as_of;
    double ior = 0.0;
    double write_off = 0.0;
    std::optional<double> cost_of_risk;
    double pl_backtest = 0.0;
    double npl_backtest = 0.0;
    double cumulative_ior = 0.0;
    double cumulative_write_off = 0.0;
    std::optional<double> cumulative_cost_of_risk;
};

struct ChainReconciliation {
    std::vector<ChainRow> rows;
    double total_ior = 0.0;
    double total_write_off = 0.0;
    std::optional<double> total_cost_of_risk;
    /// EL at the start of the first and the end of the last period.
    double el_first = 0.0;
    double el_last = 0.0;
    /// Σ IoR - Σ wo, which equals el_last - el_first.
    double ior_gap = 0.0;
    std::optional<double> cor_gap;
    /// True when the chain starts and ends with zero EL and the gaps vanish
    /// within tolerance.
    bool liquidated = false;
    bool reconciled = false;
};

ChainReconciliation reconcile_chain(const std::vector<DecompositionReport>& periods,
                                    double tolerance = kDefaultTolerance);

std::string chain_to_json(const std::vector<DecompositionReport>& periods, const ChainReconciliation& chain);
void write_chain_csv(std::ostream& out, const ChainReconciliation& chain);
std::string chain_summary_text(const ChainReconciliation& chain);

}  // namespace elbt
