#include "elbt/ledger.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "elbt/error.hpp"
#include "elbt/sum.hpp"

namespace elbt {

namespace {

bool is_fraction(double x) noexcept { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }
bool is_amount(double x) noexcept { return std::isfinite(x) && x >= 0.0; }

// Lifetime EL may not undercut the 12-month figure; allow for rounding in
// the producing system.
constexpr double kLifetimeSlack = 1e-12;

}  // namespace

std::string_view to_string(Dimension dimension) noexcept {
    switch (dimension) {
        case Dimension::PdModel: return "pd_model";
        case Dimension::LgdModel: return "lgd_model";
        case Dimension::RatingGrade: return "rating_grade";
        case Dimension::ExposureBand: return "exposure_band";
        case Dimension::CollateralType: return "collateral_type";
        case Dimension::YearsInDefault: return "years_in_default";
    }
    return "";
}

Dimension parse_dimension(std::string_view name) {
    for (Dimension d : kAllDimensions) {
        if (to_string(d) == name) return d;
    }
    fail(ErrorKind::UnknownDimension, fmt::format("unknown segment dimension '{}'", name));
}

const std::string& SegmentTags::get(Dimension dimension) const noexcept {
    switch (dimension) {
        case Dimension::PdModel: return pd_model;
        case Dimension::LgdModel: return lgd_model;
        case Dimension::RatingGrade: return rating_grade;
        case Dimension::ExposureBand: return exposure_band;
        case Dimension::CollateralType: return collateral_type;
        case Dimension::YearsInDefault: return years_in_default;
    }
    return pd_model;
}

std::string& SegmentTags::get(Dimension dimension) noexcept {
    return const_cast<std::string&>(std::as_const(*this).get(dimension));
}

void validate(const AccountState& a) {
    if (a.account_id.empty()) {
        fail(ErrorKind::FieldOutOfRange, "empty account_id");
    }
    if (!is_fraction(a.pd)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: pd={} outside [0,1]", a.account_id, a.pd));
    }
    if (!is_fraction(a.lgd)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: lgd={} outside [0,1]", a.account_id, a.lgd));
    }
    if (!is_amount(a.ead)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: ead={} negative", a.account_id, a.ead));
    }
    if (a.status == Status::NonPerforming) {
        if (a.pd != 1.0) {
            fail(ErrorKind::FieldOutOfRange,
                 fmt::format("account {}: non-performing account must carry pd=1, got {}", a.account_id, a.pd));
        }
        if (!a.default_date) {
            fail(ErrorKind::MissingDefaultDate,
                 fmt::format("account {}: non-performing account without default_date", a.account_id));
        }
    }
    if (a.lifetime_el) {
        const double el = a.pd * a.ead * a.lgd;
        if (!is_amount(*a.lifetime_el) || *a.lifetime_el < el - kLifetimeSlack * std::max(1.0, el)) {
            fail(ErrorKind::FieldOutOfRange,
                 fmt::format("account {}: lifetime_el={} below 12-month EL {}", a.account_id, *a.lifetime_el, el));
        }
    }
}

Snapshot::Snapshot()
    : as_of_(std::chrono::year{1970} / 1 / 1),
      accounts_(std::make_shared<const std::vector<AccountState>>()) {}

Snapshot::Snapshot(Date as_of, std::vector<AccountState> accounts) : as_of_(as_of) {
    if (!as_of.ok()) {
        fail(ErrorKind::ParseError, "snapshot as_of is not a valid date");
    }
    for (const auto& a : accounts) validate(a);
    std::sort(accounts.begin(), accounts.end(),
              [](const AccountState& l, const AccountState& r) { return l.account_id < r.account_id; });
    auto dup = std::adjacent_find(accounts.begin(), accounts.end(), [](const auto& l, const auto& r) {
        return l.account_id == r.account_id;
    });
    if (dup != accounts.end()) {
        fail(ErrorKind::DuplicateAccount,
             fmt::format("account {} appears twice in snapshot {}", dup->account_id, format_date(as_of)));
    }
    accounts_ = std::make_shared<const std::vector<AccountState>>(std::move(accounts));
}

const AccountState* Snapshot::find(std::string_view account_id) const noexcept {
    const auto& v = *accounts_;
    auto it = std::lower_bound(v.begin(), v.end(), account_id,
                               [](const AccountState& a, std::string_view id) { return a.account_id < id; });
    if (it == v.end() || it->account_id != account_id) return nullptr;
    return &*it;
}

void PeriodEvents::add(std::string account_id, AccountEvents ev) {
    if (!is_amount(ev.write_off)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: write_off={} negative", account_id, ev.write_off));
    }
    if (!is_amount(ev.recovery)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: recovery={} negative", account_id, ev.recovery));
    }
    if (ev.at_default_ead && !is_amount(*ev.at_default_ead)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: at_default_ead negative", account_id));
    }
    if (ev.at_default_lgd && !is_fraction(*ev.at_default_lgd)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: at_default_lgd outside [0,1]", account_id));
    }
    if (ev.restated_bop_el && !is_amount(*ev.restated_bop_el)) {
        fail(ErrorKind::FieldOutOfRange, fmt::format("account {}: restated_bop_el negative", account_id));
    }
    auto [it, inserted] = entries_.emplace(std::move(account_id), ev);
    if (!inserted) {
        fail(ErrorKind::DuplicateAccount, fmt::format("account {} has two event records", it->first));
    }
}

const AccountEvents* PeriodEvents::find(std::string_view account_id) const noexcept {
    auto it = entries_.find(account_id);
    return it == entries_.end() ? nullptr : &it->second;
}

double PeriodEvents::total_write_off() const noexcept {
    Sum s;
    for (const auto& [id, ev] : entries_) s += ev.write_off;
    return s.value();
}

double PeriodEvents::total_recovery() const noexcept {
    Sum s;
    for (const auto& [id, ev] : entries_) s += ev.recovery;
    return s.value();
}

void validate(const ProvisionBalances& p) {
    for (double v : {p.llp_bop, p.llp_eop, p.ibnr_bop, p.ibnr_eop}) {
        if (!is_amount(v)) {
            fail(ErrorKind::FieldOutOfRange, "provision balances must be finite and non-negative");
        }
    }
    for (const auto& sf : {p.sf_bop, p.sf_eop}) {
        if (sf && !std::isfinite(*sf)) {
            fail(ErrorKind::FieldOutOfRange, "reported shortfall must be finite");
        }
    }
}

PeriodLedger::PeriodLedger(Snapshot bop, Snapshot eop, PeriodEvents events,
                           std::optional<ProvisionBalances> provisions, LedgerOptions options)
    : bop_(std::move(bop)),
      eop_(std::move(eop)),
      events_(std::move(events)),
      provisions_(std::move(provisions)),
      options_(options) {
    if (!(bop_.as_of() < eop_.as_of())) {
        fail(ErrorKind::NonMonotoneDates, fmt::format("BOP {} is not before EOP {}", format_date(bop_.as_of()),
                                                      format_date(eop_.as_of())));
    }
    if (!std::isfinite(options_.discount_rate) || options_.discount_rate < 0.0) {
        fail(ErrorKind::ConfigInvalid, "discount_rate must be >= 0");
    }
    if (options_.loss_confirmation_months < 0 || options_.loss_confirmation_months > 12) {
        fail(ErrorKind::ConfigInvalid, "loss_confirmation_months must lie in [0,12]");
    }
    if (provisions_) validate(*provisions_);
    for (const auto& [id, ev] : events_.entries()) {
        if (!bop_.find(id) && !eop_.find(id)) {
            fail(ErrorKind::InconsistentEvents,
                 fmt::format("events reference account {} which is in neither snapshot", id));
        }
    }
}

PeriodLedger PeriodLedger::restricted_to(const std::vector<std::string>& sorted_ids) const {
    auto keep = [&](std::string_view id) {
        return std::binary_search(sorted_ids.begin(), sorted_ids.end(), id,
                                  [](auto const& l, auto const& r) { return std::string_view(l) < std::string_view(r); });
    };
    auto filter = [&](const Snapshot& s) {
        std::vector<AccountState> out;
        for (const auto& a : s.accounts()) {
            if (keep(a.account_id)) out.push_back(a);
        }
        return Snapshot(s.as_of(), std::move(out));
    };
    PeriodEvents ev;
    for (const auto& [id, e] : events_.entries()) {
        if (keep(id)) ev.add(id, e);
    }
    return PeriodLedger(filter(bop_), filter(eop_), std::move(ev), std::nullopt, options_);
}

std::vector<AccountView> merged_accounts(const PeriodLedger& ledger) {
    const auto bop = ledger.bop().accounts();
    const auto eop = ledger.eop().accounts();
    std::vector<AccountView> out;
    out.reserve(std::max(bop.size(), eop.size()));
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < bop.size() || j < eop.size()) {
        AccountView v;
        if (j == eop.size() || (i < bop.size() && bop[i].account_id < eop[j].account_id)) {
            v.bop = &bop[i++];
            v.account_id = v.bop->account_id;
        } else if (i == bop.size() || eop[j].account_id < bop[i].account_id) {
            v.eop = &eop[j++];
            v.account_id = v.eop->account_id;
        } else {
            v.bop = &bop[i++];
            v.eop = &eop[j++];
            v.account_id = v.bop->account_id;
        }
        v.events = ledger.events().find(v.account_id);
        out.push_back(v);
    }
    return out;
}

std::string_view to_string(TransitionClass cls) noexcept {
    switch (cls) {
        case TransitionClass::PerformingBoth: return "performing_both";
        case TransitionClass::NewNpl: return "new_npl";
        case TransitionClass::OldNpl: return "old_npl";
        case TransitionClass::Cured: return "cured";
        case TransitionClass::ClosedPerforming: return "closed_performing";
        case TransitionClass::NewBusiness: return "new_business";
    }
    return "";
}

void TransitionSet::assign(std::string account_id, TransitionClass cls) {
    auto [it, inserted] = lookup_.emplace(account_id, cls);
    if (!inserted) {
        fail(ErrorKind::DuplicateAccount, fmt::format("account {} classified twice", account_id));
    }
    auto& bucket = classes_[static_cast<std::size_t>(cls)];
    bucket.insert(std::lower_bound(bucket.begin(), bucket.end(), account_id), std::move(account_id));
}

const std::vector<std::string>& TransitionSet::members(TransitionClass cls) const noexcept {
    return classes_[static_cast<std::size_t>(cls)];
}

std::optional<TransitionClass> TransitionSet::class_of(std::string_view account_id) const noexcept {
    auto it = lookup_.find(account_id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

TransitionClass classify_account(const AccountView& v, Date bop_as_of, Date eop_as_of) {
    const bool written_off = v.write_off() > 0.0;

    auto by_default_date = [&](const AccountState& npl, bool performing_at_bop) {
        const Date dd = *npl.default_date;
        if (dd > eop_as_of) {
            fail(ErrorKind::InconsistentDates,
                 fmt::format("account {}: default_date {} after EOP {}", npl.account_id, format_date(dd),
                             format_date(eop_as_of)));
        }
        if (dd > bop_as_of) return TransitionClass::NewNpl;
        if (performing_at_bop) {
            fail(ErrorKind::InconsistentDates,
                 fmt::format("account {}: performing at BOP but default_date {} precedes BOP {}", npl.account_id,
                             format_date(dd), format_date(bop_as_of)));
        }
        return TransitionClass::OldNpl;
    };

    if (v.bop && v.eop) {
        const bool bop_pl = v.bop->performing();
        if (!v.eop->performing()) return by_default_date(*v.eop, bop_pl);
        // Performing at EOP. A write-off in between is a credit event that
        // must land in one of the NPL classes.
        if (written_off) return bop_pl ? TransitionClass::NewNpl : TransitionClass::OldNpl;
        return bop_pl ? TransitionClass::PerformingBoth : TransitionClass::Cured;
    }
    if (v.bop) {
        if (!v.bop->performing()) return TransitionClass::OldNpl;
        return written_off ? TransitionClass::NewNpl : TransitionClass::ClosedPerforming;
    }
    if (!v.eop->performing()) return by_default_date(*v.eop, false);
    return written_off ? TransitionClass::NewNpl : TransitionClass::NewBusiness;
}

TransitionSet classify_transitions(const PeriodLedger& ledger) {
    TransitionSet out;
    const Date bop_as_of = ledger.bop().as_of();
    const Date eop_as_of = ledger.eop().as_of();
    for (const auto& v : merged_accounts(ledger)) {
        const TransitionClass cls = classify_account(v, bop_as_of, eop_as_of);
        if (v.events && cls != TransitionClass::NewNpl &&
            (v.events->at_default_ead || v.events->at_default_lgd)) {
            fail(ErrorKind::InconsistentEvents,
                 fmt::format("account {}: at-default data supplied but the account did not default in the period",
                             v.account_id));
        }
        out.assign(std::string(v.account_id), cls);
    }
    return out;
}

std::vector<PeriodLedger> pair_periods(const std::vector<Snapshot>& snapshots, const std::vector<PeriodEvents>& events,
                                       const std::vector<std::optional<ProvisionBalances>>& provisions,
                                       LedgerOptions options) {
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        if (!(snapshots[i - 1].as_of() < snapshots[i].as_of())) {
            fail(ErrorKind::NonMonotoneDates,
                 fmt::format("snapshot {} ({}) is not after snapshot {} ({})", i, format_date(snapshots[i].as_of()),
                             i - 1, format_date(snapshots[i - 1].as_of())));
        }
    }
    const std::size_t n = snapshots.empty() ? 0 : snapshots.size() - 1;
    if (!events.empty() && events.size() != n) {
        fail(ErrorKind::ConfigInvalid, fmt::format("expected {} event sets, got {}", n, events.size()));
    }
    if (!provisions.empty() && provisions.size() != n) {
        fail(ErrorKind::ConfigInvalid, fmt::format("expected {} provision blocks, got {}", n, provisions.size()));
    }
    std::vector<PeriodLedger> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(snapshots[i], snapshots[i + 1], events.empty() ? PeriodEvents{} : events[i],
                         provisions.empty() ? std::nullopt : provisions[i], options);
    }
    return out;
}

}  // namespace elbt
