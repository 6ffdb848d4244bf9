#pragma once

#include <optional>

#include "elbt/ledger.hpp"
#include "elbt/sum.hpp"

namespace elbt {

enum class PeriodEnd { Bop, Eop };

/// Capital consumption of one period. The accounting block (llp/ibnr/sf) is
/// only populated when the ledger carries provision balances; it is never
/// zero-filled.
struct CapitalFlows {
    double el_bop = 0.0;
    double el_eop = 0.0;
    double total_write_off = 0.0;

    /// EL^EOP - EL^BOP + wo.
    double ior = 0.0;
    /// Same measure with EL restricted to defaulted exposure.
    double ior_npl = 0.0;

    /// Present when any account carries a lifetime EL supplement.
    std::optional<double> ior_life_pl;
    std::optional<double> el_delta_pl_bop;
    std::optional<double> el_delta_pl_eop;
    /// Lifetime EL on performing loans (12-month EL where no supplement).
    std::optional<double> el_life_pl_bop;
    std::optional<double> el_life_pl_eop;

    std::optional<double> llp_expenses;
    std::optional<double> ibnr_expenses;
    std::optional<double> sf_bop;
    std::optional<double> sf_eop;
    std::optional<double> sf_impact;
    /// LLP + IBNR + shortfall route to IoR.
    std::optional<double> ior_accounting;
    /// Provision-based cost of risk, LLP^EOP - LLP^BOP + wo.
    std::optional<double> cost_of_risk;
    bool excess_bop = false;
    bool excess_eop = false;
};

double llp_expenses(const ProvisionBalances& provisions, double total_write_off);

double ibnr_expenses(const ProvisionBalances& provisions);

/// IBNR proxy: EL on performing loans scaled by the loss confirmation period.
/// Throws ConfigInvalid outside 0..12 months.
double ibnr_from_lcp(double el_pl, int months);

/// EL - LLP - IBNR at the chosen end of the period. Negative values are an
/// excess and are returned signed.
double shortfall(double el_total, const ProvisionBalances& provisions, PeriodEnd at) noexcept;

/// Throws IdentityBreach when the accounting route disagrees with the EL
/// route by more than `tolerance` (relative).
CapitalFlows impact_of_risk(const PeriodLedger& ledger, double tolerance = kDefaultTolerance);

}  // namespace elbt
