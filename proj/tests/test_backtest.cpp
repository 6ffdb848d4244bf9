#include <gtest/gtest.h>

#include <fmt/format.h>

#include <algorithm>

#include "elbt/backtest.hpp"
#include "elbt/error.hpp"
#include "elbt/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace elbt;
using namespace elbt::testing;

namespace {

double scale_of(const DecompositionReport& r) { return r.el_bop + r.el_eop + r.wo_total; }

AccountState tagged(AccountState a, std::string years) {
    a.segments.years_in_default = std::move(years);
    return a;
}

}  // namespace

TEST(PlBacktest, AppendixYearTwo) {
    const auto c1 = generate_appendix_case(1);
    EXPECT_EQ(pl_backtest(c1[1], classify_transitions(c1[1])).total, 0.0);
    const auto c2 = generate_appendix_case(2);
    const auto r = pl_backtest(c2[1], classify_transitions(c2[1]));
    EXPECT_EQ(r.total, 50.0);
    EXPECT_FALSE(r.contributions.empty());
}

TEST(PlBacktest, NoDefaultsNoBenchmark) {
    const auto l = ledger({}, {performing("A", 0.1, 1, 0.5)});
    EXPECT_EQ(pl_backtest(l, classify_transitions(l)).total, 0.0);
}

TEST(NplBacktest, AppendixCases) {
    const auto c3 = generate_appendix_case(3);
    EXPECT_EQ(npl_backtest(c3[3], classify_transitions(c3[3])).total, 50.0);
    const auto c1 = generate_appendix_case(1);
    EXPECT_EQ(npl_backtest(c1[2], classify_transitions(c1[2])).total, 0.0);
}

TEST(NplBacktest, CureContributesMinusBopEl) {
    const auto l = ledger({defaulted("C", 80, 0.5)}, {performing("C", 0.1, 80, 0.5)});
    const auto r = npl_backtest(l, classify_transitions(l));
    EXPECT_EQ(r.total, -40.0);
    ASSERT_EQ(r.contributions.size(), 1u);
    EXPECT_EQ(r.contributions[0].second, -40.0);
}

TEST(Decompose, AppendixCaseTwoYearTwo) {
    const auto c2 = generate_appendix_case(2);
    const auto r = decompose_ior(c2[1]);
    EXPECT_EQ(r.el_pl_eop, 0.0);
    EXPECT_EQ(r.pl_backtest, 50.0);
    EXPECT_EQ(r.npl_backtest, 0.0);
    EXPECT_EQ(r.ior, 50.0);
}

TEST(Decompose, EmptyLedgerAllZero) {
    const auto r = decompose_ior(ledger({}, {}));
    EXPECT_EQ(r.ior, 0.0);
    EXPECT_EQ(r.ior_check, 0.0);
    EXPECT_EQ(r.pl_backtest, 0.0);
    EXPECT_EQ(r.npl_backtest, 0.0);
    EXPECT_FALSE(r.rdf.has_value());
    EXPECT_FALSE(r.conservativity_c.has_value());
    EXPECT_TRUE(r.per_account.empty());
}

TEST(Decompose, RejectsNonPositiveTolerance) {
    EXPECT_THROW(decompose_ior(ledger({}, {}), 0.0), Error);
}

TEST(Decompose, HandBuiltLedger) {
    // P1 stays performing, P2 defaults, N1 recovers 10, N2 is written off, P3 is new.
    const auto l = ledger(
        {performing("P1", 0.02, 100, 0.5), performing("P2", 0.05, 200, 0.4), defaulted("N1", 50, 0.6),
         defaulted("N2", 20, 1.0)},
        {performing("P1", 0.03, 90, 0.5), defaulted("P2", 180, 0.5, kMidPeriod), defaulted("N1", 40, 0.6),
         performing("P3", 0.01, 50, 0.4)},
        {{"P2", at_default(190, 0.45)}, {"N1", recovery(10)}, {"N2", write_off(20)}});
    const auto r = decompose_ior(l);
    EXPECT_NEAR(r.ior, 80.55, 1e-12);
    EXPECT_NEAR(r.el_pl_eop, 1.55, 1e-12);
    EXPECT_NEAR(r.pl_backtest, 85.0, 1e-12);
    EXPECT_NEAR(r.npl_backtest, -6.0, 1e-12);
    EXPECT_NEAR(r.recoflow, (40 - 24) - (50 - 30 + 20 - 20), 1e-12);
    ASSERT_TRUE(r.delta_pd.has_value());
    EXPECT_NEAR(*r.delta_pd, 200 * 0.4 - 5.0, 1e-12);
    EXPECT_NEAR(*r.delta_ead, 190 * 0.45 - 200 * 0.4, 1e-12);
    EXPECT_NEAR(*r.delta_lgd, 90 - 190 * 0.45, 1e-12);
}

TEST(Decompose, RandomizedAgainstIndependentIor) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 500});
        const auto r = decompose_ior(l);
        const double oracle_ior = static_cast<double>(oracle::ior(l));
        EXPECT_TRUE(nearly_equal(r.el_pl_eop + r.pl_backtest + r.npl_backtest, oracle_ior, 1e-9, scale_of(r)))
            << "seed " << seed;
    }
}

TEST(Decompose, RestatementIsolatedAsModelChange) {
    AccountEvents restated;
    restated.restated_bop_el = 8.0;
    const auto l = ledger({defaulted("N", 20, 0.5)}, {defaulted("N", 20, 0.4)}, {{"N", restated}});
    const auto r = decompose_ior(l);
    EXPECT_EQ(r.ior, -2.0);
    EXPECT_EQ(r.npl_backtest, 0.0);  // 8 measured against the restated 8
    EXPECT_EQ(r.model_change, -2.0);
    EXPECT_EQ(r.ior_check, r.ior);
    EXPECT_NE(std::find_if(r.flags.begin(), r.flags.end(),
                           [](const std::string& f) { return f.rfind("model_change", 0) == 0; }),
              r.flags.end());
}

TEST(Decompose, RandomizedWithRestatements) {
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 500, .restatements = true});
        EXPECT_NO_THROW(decompose_ior(l)) << seed;
    }
}

TEST(Decompose, ClosedPerformingFlagged) {
    const auto r = decompose_ior(ledger({performing("A", 0.1, 10, 0.5)}, {}));
    EXPECT_EQ(r.pl_backtest, -0.5);
    ASSERT_FALSE(r.flags.empty());
    EXPECT_EQ(r.flags[0].rfind("closed_performing", 0), 0u);
}

TEST(DefaultFrequency, AppendixYearTwo) {
    const auto c1 = generate_appendix_case(1);
    const auto v1 = default_frequency_view(c1[1], classify_transitions(c1[1]));
    EXPECT_DOUBLE_EQ(v1.rdf, 100.0 / 5000.0);
    EXPECT_DOUBLE_EQ(v1.edf, 0.02);
    EXPECT_NEAR(v1.pd_impact, 0.0, 1e-15);
    const auto c2 = generate_appendix_case(2);
    const auto v2 = default_frequency_view(c2[1], classify_transitions(c2[1]));
    EXPECT_DOUBLE_EQ(v2.rdf, 0.02);
    EXPECT_DOUBLE_EQ(v2.edf, 0.01);
    EXPECT_NEAR(v2.pd_impact, 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(v2.rd_realized, 0.01);
    EXPECT_DOUBLE_EQ(v2.rd_expected, 0.005);
}

TEST(DefaultFrequency, NoDefaultsAndZeroExposure) {
    const auto l = ledger({performing("A", 0.1, 10, 0.5)}, {performing("A", 0.1, 10, 0.5)});
    EXPECT_EQ(default_frequency_view(l, classify_transitions(l)).rdf, 0.0);
    const auto empty = ledger({}, {});
    try {
        default_frequency_view(empty, classify_transitions(empty));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroExposure);
    }
}

TEST(Conservativity, Inversion) {
    EXPECT_DOUBLE_EQ(estimate_conservativity(-20, 100), 0.20);
    EXPECT_EQ(estimate_conservativity(0, 100), 0.0);
    EXPECT_THROW(estimate_conservativity(1, 0), Error);
}

TEST(Conservativity, ExactPlantedInflow) {
    // Every default realizes (1 - c) of its predicted EAR inflow.
    const double c = 0.15;
    std::vector<AccountState> bop;
    std::vector<AccountState> eop;
    for (int i = 0; i < 100; ++i) {
        const std::string id = fmt::format("A{:03}", i);
        bop.push_back(performing(id, 0.04, 10, 0.5));
        if (i < 4) {
            eop.push_back(defaulted(id, 10 * (1 - c), 0.5, kMidPeriod));
        } else {
            eop.push_back(performing(id, 0.04, 10, 0.5));
        }
    }
    const auto r = decompose_ior(ledger(bop, eop));
    ASSERT_TRUE(r.conservativity_c.has_value());
    EXPECT_NEAR(*r.conservativity_c, c, 1e-9);
}

TEST(RecoFlow, AppendixYearThree) {
    const auto c1 = generate_appendix_case(1);
    EXPECT_EQ(recoflow(c1[2], classify_transitions(c1[2])), -100.0);
}

TEST(RecoFlow, NoNplAndGuarantee) {
    const auto none = ledger({performing("A", 0.1, 10, 0.5)}, {performing("A", 0.1, 10, 0.5)});
    EXPECT_EQ(recoflow(none, classify_transitions(none)), 0.0);
    // A guarantee lowers LGD from 50% to 40% on 100 of exposure: ER 50 -> 60.
    const auto g = ledger({defaulted("N", 100, 0.5)}, {defaulted("N", 100, 0.4)});
    EXPECT_NEAR(recoflow(g, classify_transitions(g)), 10.0, 1e-12);
}

TEST(RecoFlow, EadMovementIdentityOnRandomLedgers) {
    for (std::uint64_t seed = 400; seed < 440; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 500});
        const auto r = decompose_ior(l);
        const double lhs = r.ead_old_npl_eop + r.wo_old_npl;
        const double rhs = r.ead_npl_bop + r.npl_backtest + r.recoflow;
        EXPECT_TRUE(nearly_equal(lhs, rhs, 1e-9, lhs + r.ead_npl_bop)) << seed;
    }
}

TEST(DiscountBias, DerivedExample) {
    const double el_bop = static_cast<double>(oracle::discounted_el(100, 0.10, {50, 30}));
    const auto l = ledger({defaulted("N", 100, el_bop / 100)}, {}, {{"N", write_off(100)}}, std::nullopt,
                          LedgerOptions{0.10, 0});
    EXPECT_NEAR(el_bop, 29.7521, 1e-4);
    EXPECT_NEAR(discount_bias(l), -7.02479, 1e-5);
}

TEST(DiscountBias, ZeroRateAndUndiscountedCase) {
    const auto l = ledger({defaulted("N", 100, 0.3)}, {});
    EXPECT_EQ(discount_bias(l), 0.0);
    const auto c1 = generate_appendix_case(1);
    for (const auto& p : c1) EXPECT_EQ(discount_bias(p), 0.0);
}

TEST(DeltaSplit, SingleDefaultUnchangedParameters) {
    const auto l = ledger({performing("A", 0.02, 100, 0.5)}, {defaulted("A", 100, 0.5, kMidPeriod)},
                          {{"A", at_default(100, 0.5)}});
    const auto d = delta_decomposition(l, classify_transitions(l));
    EXPECT_DOUBLE_EQ(d.delta_pd, 49.0);
    EXPECT_EQ(d.delta_ead, 0.0);
    EXPECT_EQ(d.delta_lgd, 0.0);
    EXPECT_DOUBLE_EQ(decompose_ior(l).pl_backtest, 49.0);
}

TEST(DeltaSplit, NoDefaults) {
    const auto l = ledger({}, {performing("A", 0.1, 1, 0.5)});
    const auto d = delta_decomposition(l, classify_transitions(l));
    EXPECT_EQ(d.delta_pd, 0.0);
    EXPECT_EQ(d.delta_ead, 0.0);
    EXPECT_EQ(d.delta_lgd, 0.0);
}

TEST(DeltaSplit, CollateralRepossessedAtDefault) {
    // 40 of collateral taken at default: EAD 100 -> 60 with LGD 0.2 on the rest.
    const auto l = ledger({performing("A", 0.02, 100, 0.5)}, {defaulted("A", 60, 0.2, kMidPeriod)},
                          {{"A", at_default(60, 0.2)}});
    const auto d = delta_decomposition(l, classify_transitions(l));
    EXPECT_DOUBLE_EQ(d.delta_pd, 49.0);
    EXPECT_DOUBLE_EQ(d.delta_ead, 12.0 - 50.0);
    EXPECT_NEAR(d.delta_lgd, 0.0, 1e-12);
    EXPECT_NEAR(d.delta_pd + d.delta_ead + d.delta_lgd, decompose_ior(l).pl_backtest, 1e-12);
}

TEST(DeltaSplit, MissingAtDefaultData) {
    const auto l = ledger({performing("A", 0.02, 100, 0.5)}, {defaulted("A", 100, 0.5, kMidPeriod)});
    try {
        delta_decomposition(l, classify_transitions(l));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingAtDefaultData);
    }
    EXPECT_FALSE(decompose_ior(l).delta_pd.has_value());
}

TEST(DeltaSplit, TelescopesOnRandomLedgers) {
    for (std::uint64_t seed = 500; seed < 540; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 500});
        const auto r = decompose_ior(l);
        ASSERT_TRUE(r.delta_pd.has_value()) << seed;
        EXPECT_TRUE(
            nearly_equal(*r.delta_pd + *r.delta_ead + *r.delta_lgd, r.pl_backtest, 1e-9, scale_of(r)))
            << seed;
    }
}

TEST(Outliers, ZeroAndTies) {
    const auto c2 = generate_appendix_case(2);
    const auto r = decompose_ior(c2[1]);
    const auto none = rank_outliers(r, 0);
    EXPECT_TRUE(none.largest_new_defaults.empty());
    EXPECT_TRUE(none.npl_shortages.empty());
    const auto one = rank_outliers(r, 1);
    ASSERT_EQ(one.largest_new_defaults.size(), 1u);
    EXPECT_EQ(one.largest_new_defaults[0].account_id, "C000050");
    EXPECT_EQ(one.largest_new_defaults[0].value, 0.5);
}

TEST(Outliers, DominanceAndScaleInvariance) {
    std::vector<AccountState> bop;
    std::vector<AccountState> eop;
    for (int i = 0; i < 20; ++i) {
        const std::string id = fmt::format("D{:02}", i);
        const double ead = i == 13 ? 1000.0 : 1.0;
        bop.push_back(performing(id, 0.05, ead, 0.5));
        eop.push_back(defaulted(id, ead, 0.5, kMidPeriod));
        bop.push_back(defaulted("N" + id, ead, 0.5));
        eop.push_back(defaulted("N" + id, ead, i % 2 ? 0.6 : 0.4));
    }
    const auto r = decompose_ior(ledger(bop, eop));
    const auto ranked = rank_outliers(r, 3);
    EXPECT_EQ(ranked.largest_new_defaults[0].account_id, "D13");
    EXPECT_EQ(ranked.npl_shortages[0].account_id, "ND13");

    for (auto* v : {&bop, &eop}) {
        for (auto& a : *v) a.ead *= 7.0;
    }
    const auto scaled = rank_outliers(decompose_ior(ledger(bop, eop)), 3);
    auto ids = [](const std::vector<RankedAccount>& list) {
        std::vector<std::string> out;
        for (const auto& a : list) out.push_back(a.account_id);
        return out;
    };
    EXPECT_EQ(ids(scaled.largest_new_defaults), ids(ranked.largest_new_defaults));
    EXPECT_EQ(ids(scaled.npl_shortages), ids(ranked.npl_shortages));
    EXPECT_EQ(ids(scaled.npl_gains), ids(ranked.npl_gains));
}

TEST(Segments, SingleSegmentEqualsPortfolio) {
    const auto c1 = generate_appendix_case(1);
    const auto t = classify_transitions(c1[1]);
    const auto segs = segment_report(c1[1], t, {Dimension::RatingGrade});
    ASSERT_EQ(segs.size(), 1u);
    const auto whole = decompose_ior(c1[1], t);
    EXPECT_EQ(segs[0].report.pl_backtest, whole.pl_backtest);
    EXPECT_EQ(segs[0].report.npl_backtest, whole.npl_backtest);
    EXPECT_EQ(segs[0].report.ior, whole.ior);
}

TEST(Segments, TwoCohortsByYearsInDefault) {
    const auto l = ledger({tagged(defaulted("A", 100, 0.5), "1"), tagged(defaulted("B", 50, 0.8), "2")},
                          {tagged(defaulted("A", 80, 0.55), "2"), tagged(defaulted("B", 40, 0.9), "3")},
                          {{"A", recovery(20)}, {"B", recovery(10)}});
    const auto t = classify_transitions(l);
    const auto segs = segment_report(l, t, {Dimension::YearsInDefault});
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_EQ(segs[0].value, "1");
    EXPECT_NEAR(segs[0].report.npl_backtest, 44.0 - 50.0, 1e-12);
    EXPECT_NEAR(segs[1].report.npl_backtest, 36.0 - 40.0, 1e-12);
    EXPECT_NEAR(segs[0].report.npl_backtest + segs[1].report.npl_backtest, decompose_ior(l).npl_backtest, 1e-12);
}

TEST(Segments, AdditivityOnRandomLedgers) {
    const std::vector<Dimension> dims(kAllDimensions.begin(), kAllDimensions.end());
    for (std::uint64_t seed = 600; seed < 620; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 400});
        const auto t = classify_transitions(l);
        const auto whole = decompose_ior(l, t);
        const auto segs = segment_report(l, t, dims);
        for (Dimension d : dims) {
            double pl = 0;
            double npl = 0;
            double reco = 0;
            std::size_t n = 0;
            for (const auto& s : segs) {
                if (s.dimension != d) continue;
                pl += s.report.pl_backtest;
                npl += s.report.npl_backtest;
                reco += s.report.recoflow;
                n += s.report.per_account.size();
            }
            EXPECT_EQ(n, whole.per_account.size());
            EXPECT_TRUE(nearly_equal(pl, whole.pl_backtest, 1e-9, scale_of(whole)));
            EXPECT_TRUE(nearly_equal(npl, whole.npl_backtest, 1e-9, scale_of(whole)));
            EXPECT_TRUE(nearly_equal(reco, whole.recoflow, 1e-9, scale_of(whole) + whole.ead_npl_bop));
        }
        auto report = whole;
        attach_segments(report, segs);
        EXPECT_EQ(report.per_segment.size(), segs.size());
    }
}
