#include "elbt/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "elbt/elcore.hpp"
#include "elbt/error.hpp"

namespace elbt {

namespace {

TransitionClass class_or_fail(const TransitionSet& transitions, std::string_view id) {
    auto cls = transitions.class_of(id);
    if (!cls) {
        fail(ErrorKind::InconsistentEvents, fmt::format("account {} missing from the transition set", id));
    }
    return *cls;
}

struct Accumulators {
    Sum el_bop_original;
    Sum el_eop;
    Sum el_pl_bop;
    Sum el_npl_bop;
    Sum el_pl_eop;
    Sum el_new_eop;
    Sum el_old_eop;
    Sum wo_total;
    Sum wo_new;
    Sum wo_old;
    Sum recovery;
    Sum ead_pl_bop;
    Sum ear_pl_bop;
    Sum ead_npl_bop;
    Sum ead_old_eop;
    Sum er_npl_bop;
    Sum er_old_eop;
    Sum pl;
    Sum npl;
    Sum recoflow;
    Sum model_change;
};

// Single id-ordered pass shared by every backtest entry point.
DecompositionReport compute_core(const PeriodLedger& ledger, const TransitionSet& transitions) {
    DecompositionReport r;
    r.bop_as_of = ledger.bop().as_of();
    r.eop_as_of = ledger.eop().as_of();
    r.discount_rate = ledger.discount_rate();

    Accumulators acc;
    const auto views = merged_accounts(ledger);
    r.per_account.reserve(views.size());
    for (const auto& v : views) {
        AccountContribution c;
        c.account_id = std::string(v.account_id);
        c.cls = class_or_fail(transitions, v.account_id);
        c.in_bop = v.bop != nullptr;
        c.in_eop = v.eop != nullptr;
        c.write_off = v.write_off();
        c.recovery = v.events ? v.events->recovery : 0.0;
        c.segments = v.bop ? v.bop->segments : v.eop->segments;

        if (v.events && v.events->restated_bop_el && !v.bop) {
            fail(ErrorKind::InconsistentEvents,
                 fmt::format("account {}: restated_bop_el given for an account absent at BOP", v.account_id));
        }

        if (v.bop) {
            c.performing_at_bop = v.bop->performing();
            c.el_bop_original = account_el(*v.bop);
            c.el_bop = (v.events && v.events->restated_bop_el) ? *v.events->restated_bop_el : c.el_bop_original;
            c.ead_bop = v.bop->ead;
            acc.el_bop_original += c.el_bop_original;
            acc.model_change += c.el_bop - c.el_bop_original;
            if (c.performing_at_bop) {
                acc.el_pl_bop += c.el_bop;
                acc.ead_pl_bop += v.bop->ead;
                acc.ear_pl_bop += account_ear(*v.bop);
                c.pl_backtest -= c.el_bop;
            } else {
                acc.el_npl_bop += c.el_bop;
                acc.ead_npl_bop += v.bop->ead;
                acc.er_npl_bop += v.bop->ead - c.el_bop;
                c.npl_backtest -= c.el_bop;
                c.recoflow -= v.bop->ead - c.el_bop;
            }
        }
        if (v.eop) {
            c.el_eop = account_el(*v.eop);
            c.ead_eop = v.eop->ead;
            acc.el_eop += c.el_eop;
        }
        acc.wo_total += c.write_off;
        acc.recovery += c.recovery;

        switch (c.cls) {
            case TransitionClass::NewNpl:
                acc.el_new_eop += c.el_eop;
                acc.wo_new += c.write_off;
                c.pl_backtest += c.el_eop + c.write_off;
                break;
            case TransitionClass::OldNpl:
                acc.el_old_eop += c.el_eop;
                acc.wo_old += c.write_off;
                acc.ead_old_eop += c.ead_eop;
                acc.er_old_eop += c.ead_eop - c.el_eop;
                c.npl_backtest += c.el_eop + c.write_off;
                c.recoflow += c.ead_eop - c.el_eop;
                break;
            case TransitionClass::PerformingBoth:
            case TransitionClass::Cured:
            case TransitionClass::NewBusiness:
                acc.el_pl_eop += c.el_eop;
                break;
            case TransitionClass::ClosedPerforming:
                break;
        }
        acc.pl += c.pl_backtest;
        acc.npl += c.npl_backtest;
        acc.recoflow += c.recoflow;
        ++r.class_counts[static_cast<std::size_t>(c.cls)];
        r.per_account.push_back(std::move(c));
    }

    r.el_bop = acc.el_bop_original.value();
    r.el_eop = acc.el_eop.value();
    r.el_pl_bop = acc.el_pl_bop.value();
    r.el_npl_bop = acc.el_npl_bop.value();
    r.el_pl_eop = acc.el_pl_eop.value();
    r.el_new_npl_eop = acc.el_new_eop.value();
    r.el_old_npl_eop = acc.el_old_eop.value();
    r.wo_total = acc.wo_total.value();
    r.wo_new_npl = acc.wo_new.value();
    r.wo_old_npl = acc.wo_old.value();
    r.recovery_total = acc.recovery.value();
    r.ead_pl_bop = acc.ead_pl_bop.value();
    r.ear_pl_bop = acc.ear_pl_bop.value();
    r.ead_npl_bop = acc.ead_npl_bop.value();
    r.ead_old_npl_eop = acc.ead_old_eop.value();
    r.er_npl_bop = acc.er_npl_bop.value();
    r.er_old_npl_eop = acc.er_old_eop.value();
    r.model_change = acc.model_change.value();

    // Component totals come from class-level aggregates so that they follow
    // the defining formulas term by term.
    r.pl_backtest = r.el_new_npl_eop + r.wo_new_npl - r.el_pl_bop;
    r.npl_backtest = r.el_old_npl_eop + r.wo_old_npl - r.el_npl_bop;
    r.recoflow = r.er_old_npl_eop - r.er_npl_bop;
    r.ior = r.el_eop - r.el_bop + r.wo_total;
    r.ior_check = r.el_pl_eop + r.pl_backtest + r.npl_backtest + r.model_change;
    r.discount_bias = -r.discount_rate * r.er_npl_bop;

    if (r.ear_pl_bop > 0.0) {
        r.rdf = (r.el_new_npl_eop + r.wo_new_npl) / r.ear_pl_bop;
        r.edf = r.el_pl_bop / r.ear_pl_bop;
        r.pd_impact = *r.rdf - *r.edf;
    }
    if (r.ead_pl_bop > 0.0) {
        r.rd_realized = (r.el_new_npl_eop + r.wo_new_npl) / r.ead_pl_bop;
        r.rd_expected = r.el_pl_bop / r.ead_pl_bop;
        r.rd_impact = *r.rd_realized - *r.rd_expected;
    }
    if (r.el_pl_bop > 0.0) {
        r.conservativity_c = estimate_conservativity(r.pl_backtest, r.el_pl_bop);
    }
    return r;
}

double identity_scale(const DecompositionReport& r) {
    return std::fabs(r.el_bop) + std::fabs(r.el_eop) + std::fabs(r.wo_total) + std::fabs(r.model_change);
}

void check_ead_movement(const DecompositionReport& r, double tolerance) {
    const double lhs = r.ead_old_npl_eop + r.wo_old_npl;
    const double rhs = r.ead_npl_bop + r.npl_backtest + r.recoflow;
    const double scale = r.ead_old_npl_eop + r.wo_old_npl + r.ead_npl_bop + std::fabs(r.el_npl_bop) +
                         std::fabs(r.el_old_npl_eop);
    if (!nearly_equal(lhs, rhs, tolerance, scale)) {
        fail(ErrorKind::IdentityBreach,
             fmt::format("NPL exposure movement does not reconcile: EAD_oldNPL^EOP + wo_oldNPL = {:.9f} but "
                         "EAD_NPL^BOP + NPL backtest + RecoFlow = {:.9f}",
                         lhs, rhs));
    }
}

std::optional<DeltaSplit> try_delta_split(const PeriodLedger& ledger, const TransitionSet& transitions,
                                          std::string* missing) {
    Sum exp_at_bop;
    Sum exp_at_def;
    Sum realized;
    for (const auto& id : transitions.new_npl()) {
        const AccountState* bop = ledger.bop().find(id);
        const AccountState* eop = ledger.eop().find(id);
        const AccountEvents* ev = ledger.events().find(id);
        if (!ev || !ev->at_default_ead || !ev->at_default_lgd) {
            if (missing) *missing = id;
            return std::nullopt;
        }
        // PD is taken as 1 at default and at EOP; an NPL account carries
        // pd = 1 by construction so account_el gives EAD * LGD_NPL there.
        exp_at_bop += bop ? bop->ead * bop->lgd : 0.0;
        exp_at_def += *ev->at_default_ead * *ev->at_default_lgd;
        realized += (eop ? account_el(*eop) : 0.0) + ev->write_off;
    }
    Sum el_pl_bop;
    for (const auto& a : ledger.bop().accounts()) {
        if (!a.performing()) continue;
        const AccountEvents* ev = ledger.events().find(a.account_id);
        el_pl_bop += (ev && ev->restated_bop_el) ? *ev->restated_bop_el : account_el(a);
    }
    DeltaSplit d;
    d.delta_pd = exp_at_bop.value() - el_pl_bop.value();
    d.delta_ead = exp_at_def.value() - exp_at_bop.value();
    d.delta_lgd = realized.value() - exp_at_def.value();
    return d;
}

BacktestResult collect(const DecompositionReport& r, double total, double AccountContribution::*field) {
    BacktestResult out;
    out.total = total;
    for (const auto& c : r.per_account) {
        if (c.*field != 0.0) out.contributions.emplace_back(c.account_id, c.*field);
    }
    return out;
}

}  // namespace

BacktestResult pl_backtest(const PeriodLedger& ledger, const TransitionSet& transitions) {
    const auto r = compute_core(ledger, transitions);
    return collect(r, r.pl_backtest, &AccountContribution::pl_backtest);
}

BacktestResult npl_backtest(const PeriodLedger& ledger, const TransitionSet& transitions) {
    const auto r = compute_core(ledger, transitions);
    return collect(r, r.npl_backtest, &AccountContribution::npl_backtest);
}

DecompositionReport decompose_ior(const PeriodLedger& ledger, double tolerance) {
    return decompose_ior(ledger, classify_transitions(ledger), tolerance);
}

DecompositionReport decompose_ior(const PeriodLedger& ledger, const TransitionSet& transitions, double tolerance) {
    if (!(tolerance > 0.0)) {
        fail(ErrorKind::ConfigInvalid, "tolerance must be positive");
    }
    DecompositionReport r = compute_core(ledger, transitions);
    r.tolerance = tolerance;
    r.flows = impact_of_risk(ledger, tolerance);

    if (!nearly_equal(r.ior_check, r.flows.ior, tolerance, identity_scale(r))) {
        fail(ErrorKind::IdentityBreach,
             fmt::format("IoR decomposition does not reconcile: EL_PL^EOP + PL + NPL backtest{} = {:.9f} but "
                         "EL^EOP - EL^BOP + wo = {:.9f}",
                         r.model_change != 0.0 ? " + model change" : "", r.ior_check, r.flows.ior));
    }
    check_ead_movement(r, tolerance);

    if (auto d = try_delta_split(ledger, transitions, nullptr)) {
        r.delta_pd = d->delta_pd;
        r.delta_ead = d->delta_ead;
        r.delta_lgd = d->delta_lgd;
    }

    if (r.flows.excess_bop) r.flags.emplace_back("excess_bop: provisions exceed EL at BOP (negative shortfall)");
    if (r.flows.excess_eop) r.flags.emplace_back("excess_eop: provisions exceed EL at EOP (negative shortfall)");
    if (const auto closed = r.class_counts[static_cast<std::size_t>(TransitionClass::ClosedPerforming)]; closed > 0) {
        r.flags.push_back(fmt::format(
            "closed_performing: {} account(s) left the book without write-off and were treated as repaid at par",
            closed));
    }
    if (r.model_change != 0.0) {
        r.flags.push_back(fmt::format("model_change: restated BOP EL differs from reported BOP EL by {:.6f}",
                                      r.model_change));
    }
    return r;
}

DefaultFrequencyView default_frequency_view(const PeriodLedger& ledger, const TransitionSet& transitions) {
    const auto r = compute_core(ledger, transitions);
    if (!r.rdf) {
        fail(ErrorKind::ZeroExposure, "performing book has zero exposure at risk at BOP");
    }
    if (!r.rd_realized) {
        fail(ErrorKind::ZeroExposure, "performing book has zero exposure at BOP");
    }
    return DefaultFrequencyView{*r.rdf, *r.edf, *r.pd_impact, *r.rd_realized, *r.rd_expected, *r.rd_impact};
}

double estimate_conservativity(double pl_backtest, double el_pl_bop) {
    if (el_pl_bop == 0.0) {
        fail(ErrorKind::ZeroExposure, "conservativity undefined without BOP performing EL");
    }
    return -pl_backtest / el_pl_bop;
}

double recoflow(const PeriodLedger& ledger, const TransitionSet& transitions, double tolerance) {
    const auto r = compute_core(ledger, transitions);
    check_ead_movement(r, tolerance);
    return r.recoflow;
}

double discount_bias(const PeriodLedger& ledger) {
    const auto npl = aggregate_el(ledger.bop(), filters::non_performing());
    // Restatements replace the BOP benchmark EL, hence the expected recoveries.
    Sum restated_shift;
    for (const auto& [id, ev] : ledger.events().entries()) {
        if (!ev.restated_bop_el) continue;
        if (const AccountState* a = ledger.bop().find(id); a && !a->performing()) {
            restated_shift += *ev.restated_bop_el - account_el(*a);
        }
    }
    return -ledger.discount_rate() * (npl.er - restated_shift.value());
}

DeltaSplit delta_decomposition(const PeriodLedger& ledger, const TransitionSet& transitions) {
    std::string missing;
    auto d = try_delta_split(ledger, transitions, &missing);
    if (!d) {
        fail(ErrorKind::MissingAtDefaultData,
             fmt::format("new default {} lacks at_default_ead/at_default_lgd", missing));
    }
    return *d;
}

OutlierRanking rank_outliers(const DecompositionReport& report, std::size_t n) {
    OutlierRanking out;
    if (n == 0) return out;

    auto top = [n](std::vector<RankedAccount> items, bool descending) {
        auto cmp = [descending](const RankedAccount& l, const RankedAccount& r) {
            if (l.value != r.value) return descending ? l.value > r.value : l.value < r.value;
            return l.account_id < r.account_id;
        };
        const std::size_t k = std::min(n, items.size());
        std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k), items.end(), cmp);
        items.resize(k);
        return items;
    };

    std::vector<RankedAccount> defaults;
    std::vector<RankedAccount> shortages;
    std::vector<RankedAccount> gains;
    for (const auto& c : report.per_account) {
        if (c.cls == TransitionClass::NewNpl) defaults.push_back({c.account_id, c.el_eop});
        if (c.npl_backtest > 0.0) shortages.push_back({c.account_id, c.npl_backtest});
        if (c.npl_backtest < 0.0) gains.push_back({c.account_id, c.npl_backtest});
    }
    out.largest_new_defaults = top(std::move(defaults), true);
    out.npl_shortages = top(std::move(shortages), true);
    out.npl_gains = top(std::move(gains), false);
    return out;
}

std::vector<SegmentReport> segment_report(const PeriodLedger& ledger, const TransitionSet& transitions,
                                          const std::vector<Dimension>& dimensions, double tolerance) {
    const auto portfolio = compute_core(ledger, transitions);
    std::vector<SegmentReport> out;
    for (Dimension dim : dimensions) {
        std::map<std::string, std::vector<std::string>> groups;
        for (const auto& c : portfolio.per_account) {
            groups[c.segments.get(dim)].push_back(c.account_id);
        }
        Sum pl;
        Sum npl;
        Sum reco;
        for (auto& [value, ids] : groups) {
            // ids arrive in ascending order from the merged pass.
            PeriodLedger sub = ledger.restricted_to(ids);
            TransitionSet sub_transitions;
            for (const auto& id : ids) sub_transitions.assign(id, *transitions.class_of(id));
            SegmentReport seg{dim, value, decompose_ior(sub, sub_transitions, tolerance)};
            pl += seg.report.pl_backtest;
            npl += seg.report.npl_backtest;
            reco += seg.report.recoflow;
            out.push_back(std::move(seg));
        }
        const double scale = identity_scale(portfolio) + portfolio.ead_npl_bop + portfolio.ead_old_npl_eop;
        if (!nearly_equal(pl.value(), portfolio.pl_backtest, tolerance, scale) ||
            !nearly_equal(npl.value(), portfolio.npl_backtest, tolerance, scale) ||
            !nearly_equal(reco.value(), portfolio.recoflow, tolerance, scale)) {
            fail(ErrorKind::IdentityBreach,
                 fmt::format("segments of dimension {} do not add back to portfolio totals", to_string(dim)));
        }
    }
    return out;
}

void attach_segments(DecompositionReport& report, const std::vector<SegmentReport>& segments) {
    report.per_segment.clear();
    for (const auto& s : segments) {
        SegmentRow row;
        row.dimension = s.dimension;
        row.value = s.value;
        row.account_count = s.report.per_account.size();
        row.el_pl_bop = s.report.el_pl_bop;
        row.el_pl_eop = s.report.el_pl_eop;
        row.pl_backtest = s.report.pl_backtest;
        row.npl_backtest = s.report.npl_backtest;
        row.recoflow = s.report.recoflow;
        row.ior = s.report.ior;
        report.per_segment.push_back(std::move(row));
    }
}

}  // namespace elbt
