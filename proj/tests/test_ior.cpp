#include <gtest/gtest.h>

#include "elbt/backtest.hpp"
#include "elbt/error.hpp"
#include "elbt/ior.hpp"
#include "elbt/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace elbt;
using namespace elbt::testing;

TEST(AccountingPieces, HandEvaluations) {
    EXPECT_EQ(llp_expenses(ProvisionBalances{100, 80, 0, 0, {}, {}}, 30), 10.0);
    EXPECT_EQ(llp_expenses(ProvisionBalances{}, 0), 0.0);
    EXPECT_EQ(llp_expenses(ProvisionBalances{40, 40, 0, 0, {}, {}}, 0), 0.0);
    EXPECT_EQ(ibnr_expenses(ProvisionBalances{0, 0, 50, 60, {}, {}}), 10.0);
    EXPECT_EQ(ibnr_expenses(ProvisionBalances{0, 0, 7, 7, {}, {}}), 0.0);
    EXPECT_EQ(ibnr_expenses(ProvisionBalances{0, 0, 25, 0, {}, {}}), -25.0);
}

TEST(AccountingPieces, IbnrFromLossConfirmationPeriod) {
    EXPECT_EQ(ibnr_from_lcp(100, 6), 50.0);
    EXPECT_EQ(ibnr_from_lcp(100, 0), 0.0);
    EXPECT_EQ(ibnr_from_lcp(100, 12), 100.0);
    EXPECT_THROW(ibnr_from_lcp(100, 13), Error);
}

TEST(AccountingPieces, ShortfallSigned) {
    const ProvisionBalances p{0, 80, 0, 10, {}, {}};
    EXPECT_EQ(shortfall(120, p, PeriodEnd::Eop), 30.0);
    EXPECT_EQ(shortfall(90, p, PeriodEnd::Eop), 0.0);
    EXPECT_EQ(shortfall(50, ProvisionBalances{80, 0, 0, 0, {}, {}}, PeriodEnd::Bop), -30.0);
}

TEST(ImpactOfRisk, AppendixYears) {
    const auto c1 = generate_appendix_case(1);
    EXPECT_EQ(impact_of_risk(c1[0]).ior, 100.0);
    const auto c2 = generate_appendix_case(2);
    const auto f = impact_of_risk(c2[1]);
    EXPECT_EQ(f.el_bop, 50.0);
    EXPECT_EQ(f.el_eop, 100.0);
    EXPECT_EQ(f.ior, 50.0);
}

TEST(ImpactOfRisk, UnchangedSnapshotsNoWriteOff) {
    std::vector<AccountState> v{performing("A", 0.1, 10, 0.5), defaulted("B", 5, 0.3)};
    const auto f = impact_of_risk(ledger(v, v));
    EXPECT_EQ(f.ior, 0.0);
    EXPECT_FALSE(f.ior_accounting.has_value());
    EXPECT_FALSE(f.llp_expenses.has_value());
    EXPECT_FALSE(f.ior_life_pl.has_value());
}

TEST(ImpactOfRisk, ExcessFlaggedNotClamped) {
    // EL 10 at both ends, provisions of 15: shortfall -5 each side.
    std::vector<AccountState> v{defaulted("B", 20, 0.5)};
    const auto f = impact_of_risk(ledger(v, v, {}, ProvisionBalances{15, 15, 0, 0, {}, {}}));
    EXPECT_TRUE(f.excess_bop);
    EXPECT_TRUE(f.excess_eop);
    EXPECT_EQ(*f.sf_bop, -5.0);
    EXPECT_EQ(*f.ior_accounting, 0.0);
}

TEST(ImpactOfRisk, ReportedShortfallMismatchIsBreach) {
    std::vector<AccountState> bop{defaulted("B", 20, 0.5)};
    std::vector<AccountState> eop{defaulted("B", 20, 0.6)};
    // EL 10 -> 12; llp 8 -> 9, ibnr 0, reported sf 2 -> 3 is consistent.
    EXPECT_NO_THROW(impact_of_risk(ledger(bop, eop, {}, ProvisionBalances{8, 9, 0, 0, 2.0, 3.0})));
    try {
        impact_of_risk(ledger(bop, eop, {}, ProvisionBalances{8, 9.5, 0, 0, 2.0, 3.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IdentityBreach);
    }
}

TEST(ImpactOfRisk, LifetimeVariant) {
    auto a = performing("A", 0.1, 100, 0.5);
    a.lifetime_el = 12.0;
    auto b = performing("A", 0.2, 100, 0.5);
    b.lifetime_el = 20.0;
    const auto f = impact_of_risk(ledger({a}, {b}));
    EXPECT_EQ(f.ior, 5.0);
    ASSERT_TRUE(f.ior_life_pl.has_value());
    EXPECT_EQ(*f.ior_life_pl, 8.0);
    EXPECT_EQ(*f.el_delta_pl_bop, 7.0);
    EXPECT_EQ(*f.el_delta_pl_eop, 10.0);
    EXPECT_EQ(*f.ior_life_pl - f.ior, *f.el_delta_pl_eop - *f.el_delta_pl_bop);
}

TEST(ImpactOfRisk, RandomizedMatchesOracle) {
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 500});
        const auto f = impact_of_risk(l);
        const double expected = static_cast<double>(oracle::ior(l));
        EXPECT_TRUE(nearly_equal(f.ior, expected, 1e-9, f.el_bop + f.el_eop + f.total_write_off)) << seed;
        ASSERT_TRUE(f.ior_accounting.has_value());
        EXPECT_TRUE(nearly_equal(*f.ior_accounting, f.ior, 1e-9, f.el_bop + f.el_eop + f.total_write_off));
        if (f.ior_life_pl) {
            EXPECT_TRUE(nearly_equal(*f.ior_life_pl - f.ior, *f.el_delta_pl_eop - *f.el_delta_pl_bop, 1e-9,
                                     f.el_bop + f.el_eop + *f.el_life_pl_bop + *f.el_life_pl_eop));
        }
    }
}

TEST(ImpactOfRisk, NplRestrictedMatchesBacktests) {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 500});
        const auto r = decompose_ior(l);
        const double rhs = r.el_pl_bop + r.pl_backtest + r.npl_backtest;
        EXPECT_TRUE(nearly_equal(r.flows.ior_npl, rhs, 1e-9, r.el_bop + r.el_eop + r.wo_total)) << seed;
    }
}

TEST(ImpactOfRisk, LifecycleTotals) {
    ScenarioConfig cfg;
    cfg.n_accounts = 2000;
    cfg.seed = 12;
    const auto chain = simulate_lifecycle(cfg);
    Sum ior;
    Sum cor;
    Sum wo;
    for (const auto& l : chain) {
        const auto f = impact_of_risk(l);
        ior += f.ior;
        cor += *f.cost_of_risk;
        wo += f.total_write_off;
    }
    EXPECT_GT(wo.value(), 0.0);
    EXPECT_TRUE(nearly_equal(ior.value(), wo.value(), 1e-9));
    EXPECT_TRUE(nearly_equal(cor.value(), wo.value(), 1e-9));
}
