#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "elbt/ior.hpp"
#include "elbt/ledger.hpp"
#include "elbt/sum.hpp"

namespace elbt {

/// Everything one account contributes to a period decomposition.
/// Positive backtest contributions are adverse (realized above expected).
struct AccountContribution {
    std::string account_id;
    TransitionClass cls = TransitionClass::PerformingBoth;
    bool performing_at_bop = false;
    bool in_bop = false;
    bool in_eop = false;
    /// Benchmark BOP EL: the restated figure when one was supplied.
    double el_bop = 0.0;
    double el_bop_original = 0.0;
    double el_eop = 0.0;
    double ead_bop = 0.0;
    double ead_eop = 0.0;
    double write_off = 0.0;
    double recovery = 0.0;
    double pl_backtest = 0.0;
    double npl_backtest = 0.0;
    double recoflow = 0.0;
    /// Segment tags as of BOP when the account existed then, else EOP.
    SegmentTags segments;
};

struct BacktestResult {
    double total = 0.0;
    /// Non-zero contributions in account-id order.
    std::vector<std::pair<std::string, double>> contributions;
};

struct DefaultFrequencyView {
    double rdf = 0.0;
    double edf = 0.0;
    double pd_impact = 0.0;
    double rd_realized = 0.0;
    double rd_expected = 0.0;
    double rd_impact = 0.0;
};

struct DeltaSplit {
    double delta_pd = 0.0;
    double delta_ead = 0.0;
    double delta_lgd = 0.0;
};

/// Rolled-up figures for one segment value of one dimension.
struct SegmentRow {
    Dimension dimension = Dimension::PdModel;
    std::string value;
    std::size_t account_count = 0;
    double el_pl_bop = 0.0;
    double el_pl_eop = 0.0;
    double pl_backtest = 0.0;
    double npl_backtest = 0.0;
    double recoflow = 0.0;
    double ior = 0.0;
};

struct DecompositionReport {
    Date bop_as_of;
    Date eop_as_of;
    double tolerance = kDefaultTolerance;

    double el_bop = 0.0;
    double el_eop = 0.0;
    double el_pl_bop = 0.0;
    double el_npl_bop = 0.0;
    double el_pl_eop = 0.0;
    double el_new_npl_eop = 0.0;
    double el_old_npl_eop = 0.0;
    double wo_total = 0.0;
    double wo_new_npl = 0.0;
    double wo_old_npl = 0.0;
    double recovery_total = 0.0;

    double ead_pl_bop = 0.0;
    double ear_pl_bop = 0.0;
    double ead_npl_bop = 0.0;
    double ead_old_npl_eop = 0.0;
    double er_npl_bop = 0.0;
    double er_old_npl_eop = 0.0;

    double pl_backtest = 0.0;
    double npl_backtest = 0.0;
    /// Sum of (restated - original) BOP EL; zero without restatements.
    double model_change = 0.0;
    /// EL^EOP - EL^BOP + wo.
    double ior = 0.0;
    /// el_pl_eop + pl_backtest + npl_backtest + model_change.
    double ior_check = 0.0;

    std::optional<double> rdf;
    std::optional<double> edf;
    std::optional<double> pd_impact;
    std::optional<double> rd_realized;
    std::optional<double> rd_expected;
    std::optional<double> rd_impact;
    std::optional<double> conservativity_c;

    double recoflow = 0.0;
    double discount_rate = 0.0;
    double discount_bias = 0.0;

    std::optional<double> delta_pd;
    std::optional<double> delta_ead;
    std::optional<double> delta_lgd;

    CapitalFlows flows;
    std::array<std::size_t, 6> class_counts{};
    std::vector<std::string> flags;
    std::vector<AccountContribution> per_account;
    std::vector<SegmentRow> per_segment;
};

BacktestResult pl_backtest(const PeriodLedger& ledger, const TransitionSet& transitions);

BacktestResult npl_backtest(const PeriodLedger& ledger, const TransitionSet& transitions);

/// Full decomposition of one period. Throws IdentityBreach when the
/// component sum or the NPL exposure movement fails to reconcile.
DecompositionReport decompose_ior(const PeriodLedger& ledger, double tolerance = kDefaultTolerance);

/// Same, reusing an existing classification.
DecompositionReport decompose_ior(const PeriodLedger& ledger, const TransitionSet& transitions,
                                  double tolerance = kDefaultTolerance);

/// EAR- and EAD-weighted default frequencies. Throws ZeroExposure when the
/// BOP performing book has no exposure at risk.
DefaultFrequencyView default_frequency_view(const PeriodLedger& ledger, const TransitionSet& transitions);

/// c = -pl_backtest / el_pl_bop; c > 0 means model PDs were conservative.
double estimate_conservativity(double pl_backtest, double el_pl_bop);

/// ER_oldNPL^EOP - ER_NPL^BOP. Verifies the NPL exposure movement.
double recoflow(const PeriodLedger& ledger, const TransitionSet& transitions, double tolerance = kDefaultTolerance);

/// Expected NPL backtest drift from discounting: -r * ER_NPL^BOP.
double discount_bias(const PeriodLedger& ledger);

/// Splits the PL backtest into PD, EAD and LGD effects. Throws
/// MissingAtDefaultData when any new default lacks at-default EAD or LGD.
DeltaSplit delta_decomposition(const PeriodLedger& ledger, const TransitionSet& transitions);

struct RankedAccount {
    std::string account_id;
    double value = 0.0;

    friend bool operator==(const RankedAccount&, const RankedAccount&) = default;
};

struct OutlierRanking {
    /// New defaults by EOP EL, largest first.
    std::vector<RankedAccount> largest_new_defaults;
    /// Largest adverse (positive) NPL backtest contributions.
    std::vector<RankedAccount> npl_shortages;
    /// Largest favourable (negative) NPL backtest contributions, most negative first.
    std::vector<RankedAccount> npl_gains;
};

/// Ties break by ascending account id.
OutlierRanking rank_outliers(const DecompositionReport& report, std::size_t n);

struct SegmentReport {
    Dimension dimension = Dimension::PdModel;
    std::string value;
    DecompositionReport report;
};

/// Independent decomposition per segment value for each dimension. Accounts
/// are keyed by their BOP tags (EOP tags for new business). Throws
/// IdentityBreach if the segments do not add back to the portfolio.
std::vector<SegmentReport> segment_report(const PeriodLedger& ledger, const TransitionSet& transitions,
                                          const std::vector<Dimension>& dimensions,
                                          double tolerance = kDefaultTolerance);

/// Fills `report.per_segment` from segment_report output.
void attach_segments(DecompositionReport& report, const std::vector<SegmentReport>& segments);

}  // namespace elbt
