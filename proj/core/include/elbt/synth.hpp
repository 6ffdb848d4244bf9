#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "elbt/ledger.hpp"

namespace elbt {

/// The three annual scenarios of the 10,000-contract illustration:
/// 1 = unbiased parameters, 2 = PD too low (1%), 3 = LGD too low (25%,
/// rising to 50% once recoveries arrive). Four chained ledgers each.
std::vector<PeriodLedger> generate_appendix_case(int case_id);

enum class DefaultSampling {
    /// Independent draw per account at pd_true.
    Bernoulli,
    /// round(performing * pd_true) defaulters per year, seeded selection.
    ExactCount,
};

struct ScenarioConfig {
    int n_accounts = 10'000;
    double unit_exposure = 1.0;
    double pd_true = 0.02;
    double pd_model = 0.02;
    /// Undiscounted loss fraction actually realized on defaults.
    double lgd_true = 0.5;
    /// Loss fraction the models assume, for performing and defaulted loans.
    double lgd_model = 0.5;
    double discount_rate = 0.0;
    int horizon_years = 4;
    /// Share of the recoverable amount collected in year k after default.
    std::vector<double> recovery_profile{1.0};
    std::uint64_t seed = 1;

    int term_years = 1;
    int loss_confirmation_months = 6;
    /// LLP held as a fraction of EL on defaulted loans.
    double llp_coverage = 1.0;
    DefaultSampling sampling = DefaultSampling::Bernoulli;
    bool lifetime_el = true;
    Date start = std::chrono::year{2020} / 12 / 31;
};

/// Throws ConfigInvalid.
void validate(const ScenarioConfig& cfg);

/// Shortest horizon that liquidates the book: term + recovery years + 2.
int min_horizon_years(const ScenarioConfig& cfg);

/// Origination in year 1 to full liquidation, EL^0 = EL^n = 0, with
/// provision balances consistent with the shortfall definition.
std::vector<PeriodLedger> simulate_lifecycle(const ScenarioConfig& cfg);

/// Single defaulted exposure whose ELs are the exact discounted value of the
/// given yearly recoveries at rate `r`; the remainder is written off in the
/// last year. Throws ConfigInvalid.
std::vector<PeriodLedger> generate_recovery_scenario(double ead, double r, const std::vector<double>& recoveries);

struct ConservativityConfig {
    int n_accounts = 10'000;
    double pd_model = 0.5;
    double lgd = 1.0;
    /// Realized default probability is pd_model * (1 - c).
    double c = 0.15;
    std::uint64_t seed = 1;
};

/// One period of a homogeneous performing book with defaults drawn below
/// the model PD by the planted factor.
PeriodLedger plant_conservativity(const ConservativityConfig& cfg);

struct RandomLedgerOptions {
    int max_accounts = 5'000;
    bool lifetime_el = true;
    bool complete_at_default = true;
    bool restatements = false;
    bool provisions = true;
};

/// Randomized ledger covering every transition class: defaults, cures,
/// partial and full write-offs, repayments and new business.
PeriodLedger random_ledger(std::uint64_t seed, const RandomLedgerOptions& options = {});

ScenarioConfig parse_scenario(std::string_view json_text);
std::string scenario_to_json(const ScenarioConfig& cfg);

}  // namespace elbt
