#include "elbt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "elbt/elcore.hpp"
#include "elbt/error.hpp"
#include "elbt/ior.hpp"
#include "elbt/random.hpp"
#include "elbt/sum.hpp"

namespace elbt {

namespace {

using std::chrono::months;

Date mid_year(const Date& year_end) {
    // Year-end snapshots; the mid-point of the year they close.
    return std::chrono::year_month_day{year_end.year() / std::chrono::June / 30};
}

std::string account_name(std::string_view prefix, int index, int width = 6) {
    return fmt::format("{}{:0{}}", prefix, index, width);
}

std::string rating_for(double pd) {
    if (pd <= 0.0025) return "R1";
    if (pd <= 0.01) return "R2";
    if (pd <= 0.03) return "R3";
    if (pd <= 0.10) return "R4";
    if (pd <= 0.30) return "R5";
    return "R6";
}

std::string exposure_band_for(double ead) {
    if (ead < 1.0) return "<1";
    if (ead < 10.0) return "1-10";
    if (ead < 100.0) return "10-100";
    if (ead < 1000.0) return "100-1000";
    return ">=1000";
}

/// LLP = coverage * EL on defaulted loans, IBNR from the loss confirmation
/// period, and the reported shortfall as EL - LLP - IBNR.
struct Balances {
    double llp = 0.0;
    double ibnr = 0.0;
    double sf = 0.0;
};

Balances balances_for(const Snapshot& s, double llp_coverage, int lcp_months) {
    const auto pl = aggregate_el(s, filters::performing());
    const auto npl = aggregate_el(s, filters::non_performing());
    Balances b;
    b.llp = llp_coverage * npl.el;
    b.ibnr = ibnr_from_lcp(pl.el, lcp_months);
    b.sf = (pl.el + npl.el) - b.llp - b.ibnr;
    return b;
}

ProvisionBalances provisions_between(const Balances& bop, const Balances& eop) {
    ProvisionBalances p;
    p.llp_bop = bop.llp;
    p.llp_eop = eop.llp;
    p.ibnr_bop = bop.ibnr;
    p.ibnr_eop = eop.ibnr;
    p.sf_bop = bop.sf;
    p.sf_eop = eop.sf;
    return p;
}

std::vector<PeriodLedger> chain_with_provisions(const std::vector<Snapshot>& snapshots,
                                                const std::vector<PeriodEvents>& events, double llp_coverage,
                                                LedgerOptions options) {
    std::vector<Balances> balances;
    balances.reserve(snapshots.size());
    for (const auto& s : snapshots) {
        balances.push_back(balances_for(s, llp_coverage, options.loss_confirmation_months));
    }
    std::vector<std::optional<ProvisionBalances>> provisions;
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        provisions.emplace_back(provisions_between(balances[i - 1], balances[i]));
    }
    return pair_periods(snapshots, events, provisions, options);
}

SegmentTags retail_tags(double pd, double ead) {
    SegmentTags t;
    t.pd_model = "PD-RETAIL";
    t.lgd_model = "LGD-RETAIL";
    t.rating_grade = rating_for(pd);
    t.exposure_band = exposure_band_for(ead);
    t.collateral_type = "unsecured";
    return t;
}

}  // namespace

std::vector<PeriodLedger> generate_appendix_case(int case_id) {
    struct Params {
        double pd_model;
        double lgd_at_default;
        double lgd_after_recovery;
    };
    Params params{};
    switch (case_id) {
        case 1: params = {0.02, 0.5, 1.0}; break;
        case 2: params = {0.01, 0.5, 1.0}; break;
        case 3: params = {0.02, 0.25, 0.5}; break;
        default: fail(ErrorKind::ConfigInvalid, fmt::format("appendix case must be 1, 2 or 3, got {}", case_id));
    }
    constexpr int kContracts = 10'000;
    constexpr int kDefaultEvery = 50;  // 200 defaults out of 10,000
    constexpr double kRecovered = 0.5;

    const Date y0 = std::chrono::year{2020} / 12 / 31;
    std::vector<Date> ends;
    for (int y = 0; y <= 4; ++y) ends.push_back(add_years(y0, y));
    const Date default_date = mid_year(ends[2]);

    auto is_defaulter = [](int i) { return i % kDefaultEvery == 0; };

    std::vector<AccountState> year1;
    std::vector<AccountState> year2;
    std::vector<AccountState> year3;
    PeriodEvents events2;
    PeriodEvents events3;
    PeriodEvents events4;
    for (int i = 1; i <= kContracts; ++i) {
        AccountState a;
        a.account_id = account_name("C", i);
        a.pd = params.pd_model;
        a.ead = 1.0;
        a.lgd = params.lgd_at_default;
        a.segments = retail_tags(a.pd, a.ead);
        year1.push_back(a);
        if (!is_defaulter(i)) continue;

        AccountState npl = a;
        npl.status = Status::NonPerforming;
        npl.pd = 1.0;
        npl.default_date = default_date;
        npl.segments.years_in_default = "0";
        year2.push_back(npl);
        events2.add(a.account_id, AccountEvents{0.0, 0.0, 1.0, params.lgd_at_default, std::nullopt});

        npl.ead = 1.0 - kRecovered;
        npl.lgd = params.lgd_after_recovery;
        npl.segments.years_in_default = "1";
        npl.segments.exposure_band = exposure_band_for(npl.ead);
        year3.push_back(npl);
        events3.add(a.account_id, AccountEvents{0.0, kRecovered, std::nullopt, std::nullopt, std::nullopt});
        events4.add(a.account_id, AccountEvents{npl.ead, 0.0, std::nullopt, std::nullopt, std::nullopt});
    }

    const std::vector<Snapshot> snapshots{Snapshot(ends[0], {}), Snapshot(ends[1], std::move(year1)),
                                          Snapshot(ends[2], std::move(year2)), Snapshot(ends[3], std::move(year3)),
                                          Snapshot(ends[4], {})};
    const std::vector<PeriodEvents> events{PeriodEvents{}, std::move(events2), std::move(events3), std::move(events4)};
    return chain_with_provisions(snapshots, events, 1.0, LedgerOptions{0.0, 6});
}

void validate(const ScenarioConfig& cfg) {
    auto fraction = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
    auto bad = [](const std::string& msg) { fail(ErrorKind::ConfigInvalid, msg); };
    if (cfg.n_accounts <= 0) bad("n_accounts must be > 0");
    if (!(std::isfinite(cfg.unit_exposure) && cfg.unit_exposure > 0.0)) bad("unit_exposure must be > 0");
    if (!fraction(cfg.pd_true) || !fraction(cfg.pd_model)) bad("pd_true and pd_model must lie in [0,1]");
    if (!fraction(cfg.lgd_true) || !fraction(cfg.lgd_model)) bad("lgd_true and lgd_model must lie in [0,1]");
    if (!(std::isfinite(cfg.discount_rate) && cfg.discount_rate >= 0.0)) bad("discount_rate must be >= 0");
    if (cfg.term_years < 1) bad("term_years must be >= 1");
    if (cfg.loss_confirmation_months < 0 || cfg.loss_confirmation_months > 12) {
        bad("loss_confirmation_months must lie in [0,12]");
    }
    if (!fraction(cfg.llp_coverage)) bad("llp_coverage must lie in [0,1]");
    double total = 0.0;
    for (double f : cfg.recovery_profile) {
        if (!fraction(f)) bad("recovery_profile entries must lie in [0,1]");
        total += f;
    }
    if (total > 1.0 + 1e-12) bad(fmt::format("recovery_profile sums to {} > 1", total));
    if (!cfg.start.ok()) bad("start is not a valid date");
    if (cfg.horizon_years < 2) bad("horizon_years must be >= 2");
    if (cfg.horizon_years < min_horizon_years(cfg)) {
        bad(fmt::format("horizon_years={} cannot liquidate the book; at least {} years are needed",
                        cfg.horizon_years, min_horizon_years(cfg)));
    }
}

int min_horizon_years(const ScenarioConfig& cfg) {
    return cfg.term_years + static_cast<int>(cfg.recovery_profile.size()) + 2;
}

std::vector<PeriodLedger> simulate_lifecycle(const ScenarioConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    const int horizon = cfg.horizon_years;
    const int recovery_years = static_cast<int>(cfg.recovery_profile.size());
    const int maturity_year = cfg.term_years + 1;
    const double unit = cfg.unit_exposure;
    const double r = cfg.discount_rate;

    // Model expectation of the recovery stream, as seen k years after default.
    auto model_el = [&](double ead_now, int k) {
        double pv = 0.0;
        for (int j = k + 1; j <= recovery_years; ++j) {
            pv += unit * (1.0 - cfg.lgd_model) * cfg.recovery_profile[static_cast<std::size_t>(j - 1)] /
                  std::pow(1.0 + r, j - k);
        }
        return std::clamp(ead_now - pv, 0.0, ead_now);
    };

    struct Loan {
        std::string id;
        int default_year = 0;  // 0 while performing
        double ead = 0.0;
        bool closed = false;
    };
    std::vector<Loan> loans;
    loans.reserve(static_cast<std::size_t>(cfg.n_accounts));
    for (int i = 1; i <= cfg.n_accounts; ++i) loans.push_back({account_name("L", i, 7), 0, unit, false});

    std::vector<Snapshot> snapshots;
    std::vector<PeriodEvents> events;
    snapshots.emplace_back(cfg.start, std::vector<AccountState>{});

    for (int year = 1; year <= horizon; ++year) {
        const Date as_of = add_years(cfg.start, year);
        PeriodEvents ev;

        if (year >= 2 && year <= maturity_year) {
            std::vector<std::size_t> performing;
            for (std::size_t i = 0; i < loans.size(); ++i) {
                if (!loans[i].closed && loans[i].default_year == 0) performing.push_back(i);
            }
            std::vector<std::size_t> defaulters;
            if (cfg.sampling == DefaultSampling::Bernoulli) {
                for (std::size_t i : performing) {
                    if (rng.bernoulli(cfg.pd_true)) defaulters.push_back(i);
                }
            } else {
                const auto count = static_cast<std::size_t>(
                    std::llround(static_cast<double>(performing.size()) * cfg.pd_true));
                for (std::size_t k = 0; k < count; ++k) {
                    const auto pick = k + rng.below(performing.size() - k);
                    std::swap(performing[k], performing[pick]);
                }
                defaulters.assign(performing.begin(), performing.begin() + static_cast<std::ptrdiff_t>(count));
                std::sort(defaulters.begin(), defaulters.end());
            }
            for (std::size_t i : defaulters) {
                loans[i].default_year = year;
                ev.add(loans[i].id, AccountEvents{0.0, 0.0, loans[i].ead, cfg.lgd_model, std::nullopt});
            }
            if (year == maturity_year) {
                for (auto& loan : loans) {
                    if (!loan.closed && loan.default_year == 0) loan.closed = true;  // repaid at par
                }
            }
        }

        std::vector<AccountState> accounts;
        for (auto& loan : loans) {
            if (loan.closed) continue;
            if (loan.default_year == 0) {
                AccountState a;
                a.account_id = loan.id;
                a.pd = cfg.pd_model;
                a.ead = loan.ead;
                a.lgd = cfg.lgd_model;
                if (cfg.lifetime_el) {
                    const int remaining = maturity_year - year;
                    a.lifetime_el = (1.0 - std::pow(1.0 - cfg.pd_model, std::max(1, remaining))) * a.ead * a.lgd;
                }
                a.segments = retail_tags(a.pd, a.ead);
                accounts.push_back(std::move(a));
                continue;
            }
            const int k = year - loan.default_year;
            if (k >= 1 && k <= recovery_years) {
                const double rec = std::min(
                    loan.ead, unit * (1.0 - cfg.lgd_true) * cfg.recovery_profile[static_cast<std::size_t>(k - 1)]);
                loan.ead -= rec;
                ev.add(loan.id, AccountEvents{0.0, rec, std::nullopt, std::nullopt, std::nullopt});
            } else if (k == recovery_years + 1) {
                ev.add(loan.id, AccountEvents{loan.ead, 0.0, std::nullopt, std::nullopt, std::nullopt});
                loan.ead = 0.0;
                loan.closed = true;
                continue;
            }
            AccountState a;
            a.account_id = loan.id;
            a.status = Status::NonPerforming;
            a.pd = 1.0;
            a.ead = loan.ead;
            a.lgd = loan.ead > 0.0 ? model_el(loan.ead, k) / loan.ead : 1.0;
            a.default_date = mid_year(add_years(cfg.start, loan.default_year));
            a.segments = retail_tags(cfg.pd_model, unit);
            a.segments.years_in_default = std::to_string(k);
            a.segments.exposure_band = exposure_band_for(a.ead);
            accounts.push_back(std::move(a));
        }
        snapshots.emplace_back(as_of, std::move(accounts));
        events.push_back(std::move(ev));
    }
    return chain_with_provisions(snapshots, events, cfg.llp_coverage,
                                 LedgerOptions{cfg.discount_rate, cfg.loss_confirmation_months});
}

std::vector<PeriodLedger> generate_recovery_scenario(double ead, double r, const std::vector<double>& recoveries) {
    if (!(std::isfinite(ead) && ead > 0.0)) fail(ErrorKind::ConfigInvalid, "ead must be > 0");
    if (!(std::isfinite(r) && r >= 0.0)) fail(ErrorKind::ConfigInvalid, "discount rate must be >= 0");
    Sum total;
    for (double rec : recoveries) {
        if (!(std::isfinite(rec) && rec >= 0.0)) fail(ErrorKind::ConfigInvalid, "recoveries must be >= 0");
        total += rec;
    }
    if (total.value() > ead * (1.0 + 1e-12)) {
        fail(ErrorKind::ConfigInvalid, fmt::format("recoveries total {} exceed ead {}", total.value(), ead));
    }

    const int years = std::max<int>(1, static_cast<int>(recoveries.size()));
    auto rec_at = [&](int year) {
        return year <= static_cast<int>(recoveries.size()) ? recoveries[static_cast<std::size_t>(year - 1)] : 0.0;
    };
    // Discounted EL with `year` recoveries already collected.
    auto el_after = [&](double balance, int year) {
        double pv = 0.0;
        for (int j = year + 1; j <= years; ++j) pv += rec_at(j) / std::pow(1.0 + r, j - year);
        return std::clamp(balance - pv, 0.0, balance);
    };

    const Date start = std::chrono::year{2020} / 12 / 31;
    const Date defaulted = std::chrono::year{2020} / 3 / 31;
    const std::string id = "R000001";
    auto npl_state = [&](double balance, int year) {
        AccountState a;
        a.account_id = id;
        a.status = Status::NonPerforming;
        a.pd = 1.0;
        a.ead = balance;
        a.lgd = balance > 0.0 ? el_after(balance, year) / balance : 1.0;
        a.default_date = defaulted;
        a.segments.lgd_model = "LGD-DCF";
        a.segments.years_in_default = std::to_string(year);
        return a;
    };

    std::vector<Snapshot> snapshots{Snapshot(start, {npl_state(ead, 0)})};
    std::vector<PeriodEvents> events;
    double balance = ead;
    for (int year = 1; year <= years; ++year) {
        const double rec = std::min(balance, rec_at(year));
        balance -= rec;
        PeriodEvents ev;
        std::vector<AccountState> accounts;
        if (year < years) {
            ev.add(id, AccountEvents{0.0, rec, std::nullopt, std::nullopt, std::nullopt});
            accounts.push_back(npl_state(balance, year));
        } else {
            ev.add(id, AccountEvents{balance, rec, std::nullopt, std::nullopt, std::nullopt});
        }
        snapshots.emplace_back(add_years(start, year), std::move(accounts));
        events.push_back(std::move(ev));
    }
    return pair_periods(snapshots, events, {}, LedgerOptions{r, 0});
}

PeriodLedger plant_conservativity(const ConservativityConfig& cfg) {
    if (cfg.n_accounts <= 0) fail(ErrorKind::ConfigInvalid, "n_accounts must be > 0");
    if (!(cfg.pd_model > 0.0 && cfg.pd_model <= 1.0)) fail(ErrorKind::ConfigInvalid, "pd_model must lie in (0,1]");
    if (!(cfg.lgd > 0.0 && cfg.lgd <= 1.0)) fail(ErrorKind::ConfigInvalid, "lgd must lie in (0,1]");
    if (!(cfg.c >= 0.0 && cfg.c <= 1.0)) fail(ErrorKind::ConfigInvalid, "c must lie in [0,1]");

    Rng rng(cfg.seed);
    const double pd_realized = cfg.pd_model * (1.0 - cfg.c);
    const Date bop = std::chrono::year{2020} / 12 / 31;
    const Date eop = add_years(bop, 1);
    std::vector<AccountState> before;
    std::vector<AccountState> after;
    PeriodEvents ev;
    for (int i = 1; i <= cfg.n_accounts; ++i) {
        AccountState a;
        a.account_id = account_name("K", i);
        a.pd = cfg.pd_model;
        a.ead = 1.0;
        a.lgd = cfg.lgd;
        a.segments = retail_tags(a.pd, a.ead);
        before.push_back(a);
        if (rng.bernoulli(pd_realized)) {
            a.status = Status::NonPerforming;
            a.pd = 1.0;
            a.default_date = mid_year(eop);
            a.segments.years_in_default = "0";
            ev.add(a.account_id, AccountEvents{0.0, 0.0, a.ead, a.lgd, std::nullopt});
        }
        after.push_back(std::move(a));
    }
    return PeriodLedger(Snapshot(bop, std::move(before)), Snapshot(eop, std::move(after)), std::move(ev));
}

PeriodLedger random_ledger(std::uint64_t seed, const RandomLedgerOptions& options) {
    Rng rng(seed);
    const Date bop_date = std::chrono::year{2020} / 12 / 31;
    const Date eop_date = add_years(bop_date, 1);
    const int days_in_period = 365;
    const auto n = static_cast<int>(1 + rng.below(static_cast<std::uint64_t>(std::max(1, options.max_accounts))));

    static const std::vector<std::string> pd_models{"PD-RETAIL", "PD-SME", "PD-CORP"};
    static const std::vector<std::string> lgd_models{"LGD-MORTGAGE", "LGD-UNSECURED"};
    static const std::vector<std::string> collateral{"none", "real_estate", "financial", "guarantee"};

    auto pick = [&](const std::vector<std::string>& v) { return v[rng.below(v.size())]; };
    auto in_period = [&]() {
        return std::chrono::year_month_day{std::chrono::sys_days{bop_date} +
                                           std::chrono::days{1 + static_cast<int>(rng.below(days_in_period))}};
    };
    auto before_period = [&]() {
        return std::chrono::year_month_day{std::chrono::sys_days{bop_date} -
                                           std::chrono::days{static_cast<int>(rng.below(5 * 365))}};
    };
    auto performing_state = [&](std::string id) {
        AccountState a;
        a.account_id = std::move(id);
        a.pd = rng.uniform(0.0005, 0.25);
        a.ead = std::exp(rng.uniform(std::log(0.5), std::log(5000.0)));
        a.lgd = rng.uniform(0.05, 0.95);
        if (options.lifetime_el && rng.bernoulli(0.7)) {
            a.lifetime_el = a.pd * a.ead * a.lgd * rng.uniform(1.0, 4.0);
        }
        a.segments.pd_model = pick(pd_models);
        a.segments.lgd_model = pick(lgd_models);
        a.segments.rating_grade = rating_for(a.pd);
        a.segments.exposure_band = exposure_band_for(a.ead);
        a.segments.collateral_type = pick(collateral);
        return a;
    };
    auto to_npl = [&](AccountState a, Date dd, int years_in_default) {
        a.status = Status::NonPerforming;
        a.pd = 1.0;
        a.default_date = dd;
        a.lifetime_el.reset();
        a.lgd = rng.uniform(0.1, 1.0);
        a.segments.years_in_default = std::to_string(years_in_default);
        return a;
    };

    std::vector<AccountState> bop;
    std::vector<AccountState> eop;
    PeriodEvents events;
    auto at_default = [&](const AccountState& prior, AccountEvents& ev) {
        if (!options.complete_at_default && rng.bernoulli(0.2)) return;
        ev.at_default_ead = prior.ead * rng.uniform(0.7, 1.3);
        ev.at_default_lgd = std::clamp(prior.lgd * rng.uniform(0.8, 1.2), 0.0, 1.0);
    };

    for (int i = 1; i <= n; ++i) {
        const std::string id = account_name("A", i);
        const bool new_business = rng.bernoulli(0.1);
        AccountEvents ev;
        if (new_business) {
            AccountState a = performing_state(id);
            if (rng.bernoulli(0.1)) {
                // Originated and defaulted inside the period.
                at_default(a, ev);
                a = to_npl(a, in_period(), 0);
                if (rng.bernoulli(0.3)) ev.write_off = a.ead * rng.uniform(0.0, 0.5);
            }
            eop.push_back(std::move(a));
        } else if (rng.bernoulli(0.8)) {
            AccountState a = performing_state(id);
            bop.push_back(a);
            const double fate = rng.uniform();
            if (fate < 0.70) {
                AccountState next = a;
                next.pd = std::clamp(a.pd * rng.uniform(0.5, 1.5), 0.0, 1.0);
                next.ead = a.ead * rng.uniform(0.6, 1.1);
                next.lgd = std::clamp(a.lgd * rng.uniform(0.9, 1.1), 0.0, 1.0);
                next.segments.rating_grade = rating_for(next.pd);
                if (next.lifetime_el) next.lifetime_el = next.pd * next.ead * next.lgd * rng.uniform(1.0, 4.0);
                eop.push_back(std::move(next));
            } else if (fate < 0.85) {
                at_default(a, ev);
                AccountState npl = to_npl(a, in_period(), 0);
                npl.ead = a.ead * rng.uniform(0.7, 1.3);
                if (rng.bernoulli(0.3)) {
                    ev.write_off = npl.ead * rng.uniform(0.0, 0.4);
                    npl.ead -= ev.write_off;
                }
                eop.push_back(std::move(npl));
            } else if (fate < 0.90) {
                // Defaulted and written off entirely within the period.
                at_default(a, ev);
                ev.write_off = a.ead * rng.uniform(0.3, 1.0);
            } else if (fate < 0.92) {
                // Distressed restructuring: partial write-off, performing again at EOP.
                at_default(a, ev);
                ev.write_off = a.ead * rng.uniform(0.05, 0.3);
                AccountState next = a;
                next.ead = a.ead - ev.write_off;
                eop.push_back(std::move(next));
            }
            // else: repaid, absent at EOP
        } else {
            const int years = static_cast<int>(rng.below(5));
            AccountState a = to_npl(performing_state(id), before_period(), years);
            bop.push_back(a);
            const double fate = rng.uniform();
            ev.recovery = a.ead * rng.uniform(0.0, 0.3);
            if (fate < 0.55) {
                AccountState next = a;
                next.ead = std::max(0.0, a.ead - ev.recovery);
                if (rng.bernoulli(0.3)) {
                    ev.write_off = next.ead * rng.uniform(0.0, 0.5);
                    next.ead -= ev.write_off;
                }
                next.lgd = rng.uniform(0.1, 1.0);
                next.segments.years_in_default = std::to_string(years + 1);
                eop.push_back(std::move(next));
            } else if (fate < 0.80) {
                ev.write_off = std::max(0.0, a.ead - ev.recovery);
            } else if (fate < 0.95) {
                AccountState cured = performing_state(id);
                cured.default_date = a.default_date;  // history retained
                cured.ead = a.ead * rng.uniform(0.5, 1.0);
                if (cured.lifetime_el) cured.lifetime_el = cured.pd * cured.ead * cured.lgd * rng.uniform(1.0, 4.0);
                cured.segments = a.segments;
                cured.segments.years_in_default.clear();
                if (rng.bernoulli(0.2)) ev.write_off = a.ead * rng.uniform(0.0, 0.2);
                eop.push_back(std::move(cured));
            }
            // else: sold or settled, leaves the book as old NPL without write-off
        }
        if (options.restatements && !new_business && rng.bernoulli(0.05) &&
            (!bop.empty() && bop.back().account_id == id)) {
            const auto& prior = bop.back();
            ev.restated_bop_el = prior.pd * prior.ead * prior.lgd * rng.uniform(0.7, 1.3);
        }
        if (ev.write_off != 0.0 || ev.recovery != 0.0 || ev.at_default_ead || ev.at_default_lgd ||
            ev.restated_bop_el) {
            events.add(id, ev);
        }
    }

    Snapshot bop_snap(bop_date, std::move(bop));
    Snapshot eop_snap(eop_date, std::move(eop));
    LedgerOptions ledger_options{rng.uniform(0.0, 0.12), static_cast<int>(rng.below(13))};
    std::optional<ProvisionBalances> provisions;
    if (options.provisions) {
        const double coverage = rng.uniform(0.5, 1.0);
        provisions = provisions_between(balances_for(bop_snap, coverage, ledger_options.loss_confirmation_months),
                                        balances_for(eop_snap, coverage, ledger_options.loss_confirmation_months));
    }
    return PeriodLedger(std::move(bop_snap), std::move(eop_snap), std::move(events), provisions, ledger_options);
}

ScenarioConfig parse_scenario(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ConfigInvalid, fmt::format("scenario is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) fail(ErrorKind::ConfigInvalid, "scenario must be a JSON object");
    ScenarioConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n_accounts") cfg.n_accounts = value.get<int>();
            else if (key == "unit_exposure") cfg.unit_exposure = value.get<double>();
            else if (key == "pd_true") cfg.pd_true = value.get<double>();
            else if (key == "pd_model") cfg.pd_model = value.get<double>();
            else if (key == "lgd_true") cfg.lgd_true = value.get<double>();
            else if (key == "lgd_model") cfg.lgd_model = value.get<double>();
            else if (key == "discount_rate") cfg.discount_rate = value.get<double>();
            else if (key == "horizon_years") cfg.horizon_years = value.get<int>();
            else if (key == "recovery_profile") cfg.recovery_profile = value.get<std::vector<double>>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "term_years") cfg.term_years = value.get<int>();
            else if (key == "loss_confirmation_months") cfg.loss_confirmation_months = value.get<int>();
            else if (key == "llp_coverage") cfg.llp_coverage = value.get<double>();
            else if (key == "lifetime_el") cfg.lifetime_el = value.get<bool>();
            else if (key == "start") cfg.start = parse_date(value.get<std::string>());
            else if (key == "sampling") {
                const auto s = value.get<std::string>();
                if (s == "bernoulli") cfg.sampling = DefaultSampling::Bernoulli;
                else if (s == "exact") cfg.sampling = DefaultSampling::ExactCount;
                else fail(ErrorKind::ConfigInvalid, fmt::format("sampling must be 'bernoulli' or 'exact', got '{}'", s));
            } else {
                fail(ErrorKind::ConfigInvalid, fmt::format("unknown scenario key '{}'", key));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ConfigInvalid, fmt::format("scenario field has the wrong type: {}", e.what()));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigInvalid) throw;
        fail(ErrorKind::ConfigInvalid, e.what());
    }
    validate(cfg);
    return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
    nlohmann::ordered_json j;
    j["n_accounts"] = cfg.n_accounts;
    j["unit_exposure"] = cfg.unit_exposure;
    j["pd_true"] = cfg.pd_true;
    j["pd_model"] = cfg.pd_model;
    j["lgd_true"] = cfg.lgd_true;
    j["lgd_model"] = cfg.lgd_model;
    j["discount_rate"] = cfg.discount_rate;
    j["horizon_years"] = cfg.horizon_years;
    j["recovery_profile"] = cfg.recovery_profile;
    j["seed"] = cfg.seed;
    j["term_years"] = cfg.term_years;
    j["loss_confirmation_months"] = cfg.loss_confirmation_months;
    j["llp_coverage"] = cfg.llp_coverage;
    j["sampling"] = cfg.sampling == DefaultSampling::Bernoulli ? "bernoulli" : "exact";
    j["lifetime_el"] = cfg.lifetime_el;
    j["start"] = format_date(cfg.start);
    return j.dump(2);
}

}  // namespace elbt
