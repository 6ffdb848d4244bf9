#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "elbt/ledger.hpp"

namespace elbt {

/// Sums over a set of accounts. `er` (expected discounted recoveries) is
/// always ead_total - el.
struct ElAggregate {
    double el = 0.0;
    double ead_total = 0.0;
    double ear = 0.0;
    double er = 0.0;
    std::size_t count = 0;

    friend bool operator==(const ElAggregate&, const ElAggregate&) = default;
};

/// pd * ead * lgd.
double account_el(const AccountState& account) noexcept;

/// Exposure at risk, ead * lgd.
double account_ear(const AccountState& account) noexcept;

using AccountFilter = std::function<bool(const AccountState&)>;

namespace filters {
AccountFilter all();
AccountFilter performing();
AccountFilter non_performing();
AccountFilter segment(Dimension dimension, std::string value);
}  // namespace filters

/// Id-ordered sums over the accounts of `snapshot` accepted by `filter`
/// (all accounts when the filter is empty).
ElAggregate aggregate_el(const Snapshot& snapshot, const AccountFilter& filter = {});

/// el / ead_total. Throws ZeroExposure when ead_total is zero.
double risk_density(const ElAggregate& aggregate);

}  // namespace elbt
