#include "elbt/elcore.hpp"

#include "elbt/error.hpp"
#include "elbt/sum.hpp"

namespace elbt {

double account_el(const AccountState& a) noexcept { return a.pd * a.ead * a.lgd; }

double account_ear(const AccountState& a) noexcept { return a.ead * a.lgd; }

namespace filters {

AccountFilter all() {
    return [](const AccountState&) { return true; };
}

AccountFilter performing() {
    return [](const AccountState& a) { return a.performing(); };
}

AccountFilter non_performing() {
    return [](const AccountState& a) { return !a.performing(); };
}

AccountFilter segment(Dimension dimension, std::string value) {
    return [dimension, value = std::move(value)](const AccountState& a) { return a.segments.get(dimension) == value; };
}

}  // namespace filters

ElAggregate aggregate_el(const Snapshot& snapshot, const AccountFilter& filter) {
    Sum el;
    Sum ead;
    Sum ear;
    ElAggregate out;
    for (const auto& a : snapshot.accounts()) {
        if (filter && !filter(a)) continue;
        el += account_el(a);
        ead += a.ead;
        ear += account_ear(a);
        ++out.count;
    }
    out.el = el.value();
    out.ead_total = ead.value();
    out.ear = ear.value();
    out.er = out.ead_total - out.el;
    return out;
}

double risk_density(const ElAggregate& aggregate) {
    if (aggregate.ead_total == 0.0) {
        fail(ErrorKind::ZeroExposure, "risk density undefined for zero exposure");
    }
    return aggregate.el / aggregate.ead_total;
}

}  // namespace elbt
