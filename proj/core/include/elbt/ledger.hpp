#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elbt/date.hpp"

namespace elbt {

enum class Status { Performing, NonPerforming };

/// Segmentation tag dimensions carried on every account.
enum class Dimension { PdModel, LgdModel, RatingGrade, ExposureBand, CollateralType, YearsInDefault };

inline constexpr std::array<Dimension, 6> kAllDimensions{
    Dimension::PdModel,      Dimension::LgdModel,       Dimension::RatingGrade,
    Dimension::ExposureBand, Dimension::CollateralType, Dimension::YearsInDefault};

std::string_view to_string(Dimension dimension) noexcept;

/// Throws UnknownDimension for anything outside the schema's tag columns.
Dimension parse_dimension(std::string_view name);

struct SegmentTags {
    std::string pd_model;
    std::string lgd_model;
    std::string rating_grade;
    std::string exposure_band;
    std::string collateral_type;
    std::string years_in_default;

    [[nodiscard]] const std::string& get(Dimension dimension) const noexcept;
    std::string& get(Dimension dimension) noexcept;

    friend bool operator==(const SegmentTags&, const SegmentTags&) = default;
};

/// One account at one as-of date. For non-performing accounts `pd` is pinned
/// to 1 and `lgd` is the best-estimate LGD of the defaulted exposure.
struct AccountState {
    std::string account_id;
    Status status = Status::Performing;
    std::optional<Date> default_date;
    double pd = 0.0;
    double ead = 0.0;
    double lgd = 0.0;
    std::optional<double> lifetime_el;
    SegmentTags segments;

    [[nodiscard]] bool performing() const noexcept { return status == Status::Performing; }

    friend bool operator==(const AccountState&, const AccountState&) = default;
};

/// Throws FieldOutOfRange or MissingDefaultDate.
void validate(const AccountState& account);

/// Immutable, id-sorted collection of account states at one as-of date.
/// Copies share the underlying storage.
class Snapshot {
public:
    Snapshot();
    /// Validates every account and rejects duplicate ids (DuplicateAccount).
    Snapshot(Date as_of, std::vector<AccountState> accounts);

    [[nodiscard]] Date as_of() const noexcept { return as_of_; }
    [[nodiscard]] std::span<const AccountState> accounts() const noexcept { return *accounts_; }
    [[nodiscard]] std::size_t size() const noexcept { return accounts_->size(); }
    [[nodiscard]] bool empty() const noexcept { return accounts_->empty(); }
    [[nodiscard]] const AccountState* find(std::string_view account_id) const noexcept;

private:
    Date as_of_;
    std::shared_ptr<const std::vector<AccountState>> accounts_;
};

struct AccountEvents {
    double write_off = 0.0;
    double recovery = 0.0;
    std::optional<double> at_default_ead;
    std::optional<double> at_default_lgd;
    std::optional<double> restated_bop_el;

    friend bool operator==(const AccountEvents&, const AccountEvents&) = default;
};

/// Per-account events booked during one period, keyed by account id.
class PeriodEvents {
public:
    PeriodEvents() = default;

    /// Throws DuplicateAccount or FieldOutOfRange.
    void add(std::string account_id, AccountEvents events);

    [[nodiscard]] const AccountEvents* find(std::string_view account_id) const noexcept;
    [[nodiscard]] const std::map<std::string, AccountEvents, std::less<>>& entries() const noexcept {
        return entries_;
    }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] double total_write_off() const noexcept;
    [[nodiscard]] double total_recovery() const noexcept;

    friend bool operator==(const PeriodEvents&, const PeriodEvents&) = default;

private:
    std::map<std::string, AccountEvents, std::less<>> entries_;
};

/// Provision balances at both ends of a period. `sf_bop`/`sf_eop` are the
/// reported shortfall figures; when given they are reconciled against
/// EL - LLP - IBNR rather than derived from it.
struct ProvisionBalances {
    double llp_bop = 0.0;
    double llp_eop = 0.0;
    double ibnr_bop = 0.0;
    double ibnr_eop = 0.0;
    std::optional<double> sf_bop;
    std::optional<double> sf_eop;

    friend bool operator==(const ProvisionBalances&, const ProvisionBalances&) = default;
};

void validate(const ProvisionBalances& provisions);

struct LedgerOptions {
    double discount_rate = 0.0;
    int loss_confirmation_months = 0;
};

/// A BOP/EOP snapshot pair with the events booked in between.
class PeriodLedger {
public:
    /// Throws NonMonotoneDates, InconsistentEvents or ConfigInvalid.
    PeriodLedger(Snapshot bop, Snapshot eop, PeriodEvents events = {},
                 std::optional<ProvisionBalances> provisions = std::nullopt, LedgerOptions options = {});

    [[nodiscard]] const Snapshot& bop() const noexcept { return bop_; }
    [[nodiscard]] const Snapshot& eop() const noexcept { return eop_; }
    [[nodiscard]] const PeriodEvents& events() const noexcept { return events_; }
    [[nodiscard]] const std::optional<ProvisionBalances>& provisions() const noexcept { return provisions_; }
    [[nodiscard]] double discount_rate() const noexcept { return options_.discount_rate; }
    [[nodiscard]] int loss_confirmation_months() const noexcept { return options_.loss_confirmation_months; }
    [[nodiscard]] const LedgerOptions& options() const noexcept { return options_; }

    /// Ledger restricted to the given account ids (used for segment reports).
    /// Provision balances are portfolio-level and are dropped.
    [[nodiscard]] PeriodLedger restricted_to(const std::vector<std::string>& sorted_ids) const;

private:
    Snapshot bop_;
    Snapshot eop_;
    PeriodEvents events_;
    std::optional<ProvisionBalances> provisions_;
    LedgerOptions options_;
};

/// One row of the BOP/EOP merge: either side may be absent.
struct AccountView {
    std::string_view account_id;
    const AccountState* bop = nullptr;
    const AccountState* eop = nullptr;
    const AccountEvents* events = nullptr;

    [[nodiscard]] double write_off() const noexcept { return events ? events->write_off : 0.0; }
};

/// Merge-join of BOP and EOP in ascending account-id order.
std::vector<AccountView> merged_accounts(const PeriodLedger& ledger);

enum class TransitionClass { PerformingBoth, NewNpl, OldNpl, Cured, ClosedPerforming, NewBusiness };

inline constexpr std::array<TransitionClass, 6> kAllTransitionClasses{
    TransitionClass::PerformingBoth, TransitionClass::NewNpl,           TransitionClass::OldNpl,
    TransitionClass::Cured,          TransitionClass::ClosedPerforming, TransitionClass::NewBusiness};

std::string_view to_string(TransitionClass cls) noexcept;

/// True for the classes whose EOP state feeds EL_PL at end of period.
constexpr bool counts_as_performing_at_eop(TransitionClass cls) noexcept {
    return cls == TransitionClass::PerformingBoth || cls == TransitionClass::Cured ||
           cls == TransitionClass::NewBusiness;
}

/// Partition of bop ∪ eop into six disjoint classes. Each list is id-sorted.
class TransitionSet {
public:
    TransitionSet() = default;

    void assign(std::string account_id, TransitionClass cls);

    [[nodiscard]] const std::vector<std::string>& members(TransitionClass cls) const noexcept;
    [[nodiscard]] std::optional<TransitionClass> class_of(std::string_view account_id) const noexcept;
    [[nodiscard]] std::size_t size() const noexcept { return lookup_.size(); }

    [[nodiscard]] const std::vector<std::string>& performing_both() const noexcept {
        return members(TransitionClass::PerformingBoth);
    }
    [[nodiscard]] const std::vector<std::string>& new_npl() const noexcept { return members(TransitionClass::NewNpl); }
    [[nodiscard]] const std::vector<std::string>& old_npl() const noexcept { return members(TransitionClass::OldNpl); }
    [[nodiscard]] const std::vector<std::string>& cured() const noexcept { return members(TransitionClass::Cured); }
    [[nodiscard]] const std::vector<std::string>& closed_performing() const noexcept {
        return members(TransitionClass::ClosedPerforming);
    }
    [[nodiscard]] const std::vector<std::string>& new_business() const noexcept {
        return members(TransitionClass::NewBusiness);
    }

    friend bool operator==(const TransitionSet&, const TransitionSet&) = default;

private:
    std::array<std::vector<std::string>, 6> classes_;
    std::map<std::string, TransitionClass, std::less<>> lookup_;
};

/// Classifies a single merged row. Exposed so per-account reporting and the
/// full classification share one rule.
TransitionClass classify_account(const AccountView& view, Date bop_as_of, Date eop_as_of);

TransitionSet classify_transitions(const PeriodLedger& ledger);

/// n snapshots -> n-1 chained ledgers. `events` and `provisions` are either
/// empty or hold one entry per interval.
std::vector<PeriodLedger> pair_periods(const std::vector<Snapshot>& snapshots,
                                       const std::vector<PeriodEvents>& events = {},
                                       const std::vector<std::optional<ProvisionBalances>>& provisions = {},
                                       LedgerOptions options = {});

}  // namespace elbt
