#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "elbt/error.hpp"
#include "elbt/ledger.hpp"
#include "elbt/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace elbt;
using namespace elbt::testing;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no elbt::Error thrown";
    return ErrorKind::IoError;
}

}  // namespace

TEST(AccountState, ValidationBounds) {
    EXPECT_NO_THROW(validate(performing("A", 0.02, 1.0, 0.5)));
    EXPECT_EQ(kind_of([] { validate(performing("A", 1.2, 1.0, 0.5)); }), ErrorKind::FieldOutOfRange);
    EXPECT_EQ(kind_of([] { validate(performing("A", 0.1, -1.0, 0.5)); }), ErrorKind::FieldOutOfRange);
    EXPECT_EQ(kind_of([] { validate(performing("A", 0.1, 1.0, 1.5)); }), ErrorKind::FieldOutOfRange);

    auto npl = defaulted("N", 10.0, 0.4);
    npl.default_date.reset();
    EXPECT_EQ(kind_of([&] { validate(npl); }), ErrorKind::MissingDefaultDate);

    auto npl_pd = defaulted("N", 10.0, 0.4);
    npl_pd.pd = 0.9;
    EXPECT_EQ(kind_of([&] { validate(npl_pd); }), ErrorKind::FieldOutOfRange);

    auto life = performing("L", 0.1, 100.0, 0.5);
    life.lifetime_el = 4.0;  // below 12-month EL of 5
    EXPECT_EQ(kind_of([&] { validate(life); }), ErrorKind::FieldOutOfRange);
    life.lifetime_el = 5.0;
    EXPECT_NO_THROW(validate(life));
}

TEST(Snapshot, SortsAndFinds) {
    Snapshot s(kBop, {performing("B", 0.1, 1, 0.5), performing("A", 0.2, 2, 0.5)});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.accounts()[0].account_id, "A");
    ASSERT_NE(s.find("B"), nullptr);
    EXPECT_EQ(s.find("B")->pd, 0.1);
    EXPECT_EQ(s.find("C"), nullptr);
}

TEST(Snapshot, RejectsDuplicates) {
    EXPECT_EQ(kind_of([] { Snapshot(kBop, {performing("A", 0.1, 1, 0.5), performing("A", 0.2, 2, 0.5)}); }),
              ErrorKind::DuplicateAccount);
}

TEST(Snapshot, EmptyIsValid) {
    Snapshot s(kBop, {});
    EXPECT_TRUE(s.empty());
}

TEST(Snapshot, TenThousandUnitContracts) {
    std::vector<AccountState> v;
    for (int i = 0; i < 10'000; ++i) v.push_back(performing("C" + std::to_string(i), 0.02, 1.0, 0.5));
    EXPECT_EQ(Snapshot(kBop, std::move(v)).size(), 10'000u);
}

TEST(PeriodEvents, RejectsNegativeAndDuplicate) {
    PeriodEvents ev;
    EXPECT_EQ(kind_of([&] { ev.add("A", write_off(-1)); }), ErrorKind::FieldOutOfRange);
    EXPECT_EQ(kind_of([&] { ev.add("A", recovery(-1)); }), ErrorKind::FieldOutOfRange);
    ev.add("A", write_off(1));
    EXPECT_EQ(kind_of([&] { ev.add("A", recovery(1)); }), ErrorKind::DuplicateAccount);
}

TEST(PeriodLedger, Guards) {
    EXPECT_EQ(kind_of([] { PeriodLedger(Snapshot(kEop, {}), Snapshot(kBop, {})); }), ErrorKind::NonMonotoneDates);
    EXPECT_EQ(kind_of([] { PeriodLedger(Snapshot(kBop, {}), Snapshot(kBop, {})); }), ErrorKind::NonMonotoneDates);
    EXPECT_EQ(kind_of([] { ledger({}, {}, {{"ghost", write_off(1)}}); }), ErrorKind::InconsistentEvents);
    EXPECT_EQ(kind_of([] { ledger({}, {}, {}, std::nullopt, LedgerOptions{-0.1, 0}); }), ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { ledger({}, {}, {}, std::nullopt, LedgerOptions{0.0, 13}); }), ErrorKind::ConfigInvalid);
}

TEST(Classify, IdenticalSnapshotsArePerformingBoth) {
    std::vector<AccountState> v{performing("A", 0.1, 1, 0.5), performing("B", 0.2, 3, 0.4)};
    const auto t = classify_transitions(ledger(v, v));
    EXPECT_EQ(t.performing_both(), (std::vector<std::string>{"A", "B"}));
    EXPECT_TRUE(t.new_npl().empty());
}

TEST(Classify, PartitionRules) {
    const auto l = ledger(
        {
            performing("pb", 0.1, 1, 0.5),
            performing("def", 0.1, 1, 0.5),
            defaulted("old", 5, 0.5),
            defaulted("cure", 5, 0.5),
            performing("closed", 0.1, 1, 0.5),
            defaulted("gone", 4, 0.5),
            performing("direct", 0.1, 2, 0.5),
        },
        {
            performing("pb", 0.1, 1, 0.5),
            defaulted("def", 1, 0.5, kMidPeriod),
            defaulted("old", 4, 0.5),
            performing("cure", 0.05, 5, 0.3),
            performing("new", 0.1, 1, 0.5),
            defaulted("newdef", 1, 0.6, kMidPeriod),
        },
        {{"gone", write_off(4)}, {"direct", write_off(2)}});
    const auto t = classify_transitions(l);
    EXPECT_EQ(t.class_of("pb"), TransitionClass::PerformingBoth);
    EXPECT_EQ(t.class_of("def"), TransitionClass::NewNpl);
    EXPECT_EQ(t.class_of("old"), TransitionClass::OldNpl);
    EXPECT_EQ(t.class_of("cure"), TransitionClass::Cured);
    EXPECT_EQ(t.class_of("closed"), TransitionClass::ClosedPerforming);
    EXPECT_EQ(t.class_of("gone"), TransitionClass::OldNpl);
    EXPECT_EQ(t.class_of("direct"), TransitionClass::NewNpl);
    EXPECT_EQ(t.class_of("new"), TransitionClass::NewBusiness);
    EXPECT_EQ(t.class_of("newdef"), TransitionClass::NewNpl);
    EXPECT_EQ(t.size(), 9u);
}

TEST(Classify, DefaultDateAfterEopIsInconsistent) {
    EXPECT_EQ(kind_of([] {
                  classify_transitions(ledger({performing("A", 0.1, 1, 0.5)},
                                              {defaulted("A", 1, 0.5, ymd(2023, 1, 15))}));
              }),
              ErrorKind::InconsistentDates);
}

TEST(Classify, PerformingAtBopWithOldDefaultDateIsInconsistent) {
    EXPECT_EQ(kind_of([] {
                  classify_transitions(ledger({performing("A", 0.1, 1, 0.5)}, {defaulted("A", 1, 0.5)}));
              }),
              ErrorKind::InconsistentDates);
}

TEST(Classify, AtDefaultDataOnlyForNewDefaults) {
    EXPECT_EQ(kind_of([] {
                  classify_transitions(ledger({performing("A", 0.1, 1, 0.5)}, {performing("A", 0.1, 1, 0.5)},
                                              {{"A", at_default(1, 0.5)}}));
              }),
              ErrorKind::InconsistentEvents);
}

TEST(Classify, AppendixCaseOneYearTwo) {
    const auto chain = generate_appendix_case(1);
    const auto t = classify_transitions(chain[1]);
    EXPECT_EQ(t.new_npl().size(), 200u);
    EXPECT_EQ(t.old_npl().size(), 0u);
}

TEST(Classify, FullyWorkedOutNplIsOld) {
    const auto t = classify_transitions(ledger({defaulted("A", 7, 0.5)}, {}, {{"A", write_off(7)}}));
    EXPECT_EQ(t.old_npl(), std::vector<std::string>{"A"});
}

TEST(Classify, PartitionIsDisjointAndExhaustive) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto l = random_ledger(seed, {.max_accounts = 400});
        const auto t = classify_transitions(l);
        const auto universe = oracle::partition_inputs(l).all;
        std::set<std::string> seen;
        std::size_t total = 0;
        for (TransitionClass c : kAllTransitionClasses) {
            for (const auto& id : t.members(c)) {
                EXPECT_TRUE(seen.insert(id).second) << id << " in two classes";
                EXPECT_TRUE(universe.count(id)) << id;
                ++total;
            }
        }
        EXPECT_EQ(total, universe.size()) << "seed " << seed;
    }
}

TEST(Classify, ShuffleInvariantAndDeterministic) {
    const auto l = random_ledger(17, {.max_accounts = 800});
    std::vector<AccountState> bop(l.bop().accounts().begin(), l.bop().accounts().end());
    std::vector<AccountState> eop(l.eop().accounts().begin(), l.eop().accounts().end());
    std::mt19937 g(5);
    std::shuffle(bop.begin(), bop.end(), g);
    std::shuffle(eop.begin(), eop.end(), g);
    const PeriodLedger shuffled(Snapshot(l.bop().as_of(), bop), Snapshot(l.eop().as_of(), eop), l.events(),
                                l.provisions(), l.options());
    const auto t = classify_transitions(l);
    EXPECT_EQ(t, classify_transitions(shuffled));
    EXPECT_EQ(t, classify_transitions(l));
}

TEST(PairPeriods, ChainLengthAndLinking) {
    std::vector<Snapshot> snaps;
    for (int y = 0; y < 5; ++y) snaps.emplace_back(ymd(2020 + y, 12, 31), std::vector<AccountState>{});
    const auto chain = pair_periods(snaps);
    ASSERT_EQ(chain.size(), 4u);
    for (std::size_t i = 1; i < chain.size(); ++i) EXPECT_EQ(chain[i - 1].eop().as_of(), chain[i].bop().as_of());
    EXPECT_TRUE(pair_periods({snaps[0]}).empty());
}

TEST(PairPeriods, RejectsNonMonotone) {
    std::vector<Snapshot> snaps{Snapshot(kEop, {}), Snapshot(kBop, {})};
    EXPECT_EQ(kind_of([&] { pair_periods(snaps); }), ErrorKind::NonMonotoneDates);
}

TEST(PairPeriods, AppendixTimeline) {
    const auto chain = generate_appendix_case(1);
    ASSERT_EQ(chain.size(), 4u);
    EXPECT_EQ(chain.front().bop().as_of(), ymd(2020, 12, 31));
    EXPECT_EQ(chain.back().eop().as_of(), ymd(2024, 12, 31));
}

TEST(Dimension, ParseRoundTrip) {
    for (Dimension d : kAllDimensions) EXPECT_EQ(parse_dimension(to_string(d)), d);
    EXPECT_EQ(kind_of([] { parse_dimension("region"); }), ErrorKind::UnknownDimension);
}

TEST(PeriodLedger, RestrictedToDropsProvisions) {
    const auto l = ledger({performing("A", 0.1, 1, 0.5), performing("B", 0.1, 1, 0.5)},
                          {performing("A", 0.1, 1, 0.5)}, {}, ProvisionBalances{1, 1, 1, 1, {}, {}});
    const auto r = l.restricted_to({"B"});
    EXPECT_EQ(r.bop().size(), 1u);
    EXPECT_TRUE(r.eop().empty());
    EXPECT_FALSE(r.provisions().has_value());
}
