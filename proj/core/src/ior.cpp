#include "elbt/ior.hpp"

#include <cmath>

#include <fmt/format.h>

#include "elbt/elcore.hpp"
#include "elbt/error.hpp"

namespace elbt {

double llp_expenses(const ProvisionBalances& p, double total_write_off) {
    return p.llp_eop - p.llp_bop + total_write_off;
}

double ibnr_expenses(const ProvisionBalances& p) { return p.ibnr_eop - p.ibnr_bop; }

double ibnr_from_lcp(double el_pl, int months) {
    if (months < 0 || months > 12) {
        fail(ErrorKind::ConfigInvalid, fmt::format("loss confirmation period {} months outside [0,12]", months));
    }
    return el_pl * months / 12.0;
}

double shortfall(double el_total, const ProvisionBalances& p, PeriodEnd at) noexcept {
    return at == PeriodEnd::Bop ? el_total - p.llp_bop - p.ibnr_bop : el_total - p.llp_eop - p.ibnr_eop;
}

CapitalFlows impact_of_risk(const PeriodLedger& ledger, double tolerance) {
    Sum el_bop;
    Sum el_eop;
    Sum el_npl_bop;
    Sum el_npl_eop;
    Sum delta_pl_bop;
    Sum delta_pl_eop;
    Sum life_bop;
    Sum life_eop;
    Sum life_pl_bop;
    Sum life_pl_eop;
    bool has_lifetime = false;

    const Date bop_as_of = ledger.bop().as_of();
    const Date eop_as_of = ledger.eop().as_of();
    for (const auto& v : merged_accounts(ledger)) {
        if (v.bop) {
            const double el = account_el(*v.bop);
            el_bop += el;
            if (v.bop->performing()) {
                const double life = v.bop->lifetime_el.value_or(el);
                has_lifetime = has_lifetime || v.bop->lifetime_el.has_value();
                delta_pl_bop += life - el;
                life_bop += life;
                life_pl_bop += life;
            } else {
                el_npl_bop += el;
                life_bop += el;
            }
        }
        if (v.eop) {
            const double el = account_el(*v.eop);
            el_eop += el;
            if (counts_as_performing_at_eop(classify_account(v, bop_as_of, eop_as_of))) {
                const double life = v.eop->lifetime_el.value_or(el);
                has_lifetime = has_lifetime || v.eop->lifetime_el.has_value();
                delta_pl_eop += life - el;
                life_eop += life;
                life_pl_eop += life;
            } else {
                el_npl_eop += el;
                life_eop += el;
            }
        }
    }

    CapitalFlows out;
    out.el_bop = el_bop.value();
    out.el_eop = el_eop.value();
    out.total_write_off = ledger.events().total_write_off();
    out.ior = out.el_eop - out.el_bop + out.total_write_off;
    out.ior_npl = el_npl_eop.value() - el_npl_bop.value() + out.total_write_off;
    if (has_lifetime) {
        out.el_delta_pl_bop = delta_pl_bop.value();
        out.el_delta_pl_eop = delta_pl_eop.value();
        out.el_life_pl_bop = life_pl_bop.value();
        out.el_life_pl_eop = life_pl_eop.value();
        out.ior_life_pl = life_eop.value() - life_bop.value() + out.total_write_off;
    }

    if (const auto& p = ledger.provisions()) {
        out.llp_expenses = llp_expenses(*p, out.total_write_off);
        out.cost_of_risk = out.llp_expenses;
        out.ibnr_expenses = ibnr_expenses(*p);
        out.sf_bop = p->sf_bop.value_or(shortfall(out.el_bop, *p, PeriodEnd::Bop));
        out.sf_eop = p->sf_eop.value_or(shortfall(out.el_eop, *p, PeriodEnd::Eop));
        out.sf_impact = *out.sf_eop - *out.sf_bop;
        out.excess_bop = *out.sf_bop < 0.0;
        out.excess_eop = *out.sf_eop < 0.0;
        out.ior_accounting = *out.llp_expenses + *out.ibnr_expenses + *out.sf_impact;

        const double scale = std::fabs(out.el_bop) + std::fabs(out.el_eop) + out.total_write_off + p->llp_bop +
                             p->llp_eop + p->ibnr_bop + p->ibnr_eop;
        if (!nearly_equal(*out.ior_accounting, out.ior, tolerance, scale)) {
            fail(ErrorKind::IdentityBreach,
                 fmt::format("provision route IoR {:.6f} (dLLP + wo + dIBNR + dSF) differs from EL route IoR {:.6f} "
                             "(EL^EOP - EL^BOP + wo); check llp/ibnr/sf balances",
                             *out.ior_accounting, out.ior));
        }
    }
    return out;
}

}  // namespace elbt
