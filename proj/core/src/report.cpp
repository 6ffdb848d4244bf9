#include "elbt/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "elbt/error.hpp"
#include "elbt/io.hpp"

namespace elbt {

namespace {

using ojson = nlohmann::ordered_json;

ojson amount(double v) { return format_amount(v); }

ojson amount(const std::optional<double>& v) { return v ? ojson(format_amount(*v)) : ojson(nullptr); }

double read_amount(const ojson& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        fail(ErrorKind::ParseError, fmt::format("report field '{}' missing or not a decimal string", key));
    }
    const auto& s = j.at(key).get_ref<const std::string&>();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        fail(ErrorKind::ParseError, fmt::format("report field '{}' is not a number: '{}'", key, s));
    }
}

std::optional<double> read_optional(const ojson& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return read_amount(j, key);
}

// Quotes a CSV field when it contains a separator or quote.
std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

ojson flows_json(const CapitalFlows& f) {
    ojson j;
    j["el_bop"] = amount(f.el_bop);
    j["el_eop"] = amount(f.el_eop);
    j["total_write_off"] = amount(f.total_write_off);
    j["ior"] = amount(f.ior);
    j["ior_npl"] = amount(f.ior_npl);
    j["ior_life_pl"] = amount(f.ior_life_pl);
    j["el_delta_pl_bop"] = amount(f.el_delta_pl_bop);
    j["el_delta_pl_eop"] = amount(f.el_delta_pl_eop);
    j["el_life_pl_bop"] = amount(f.el_life_pl_bop);
    j["el_life_pl_eop"] = amount(f.el_life_pl_eop);
    j["llp_expenses"] = amount(f.llp_expenses);
    j["ibnr_expenses"] = amount(f.ibnr_expenses);
    j["sf_bop"] = amount(f.sf_bop);
    j["sf_eop"] = amount(f.sf_eop);
    j["sf_impact"] = amount(f.sf_impact);
    j["ior_accounting"] = amount(f.ior_accounting);
    j["cost_of_risk"] = amount(f.cost_of_risk);
    j["excess_bop"] = f.excess_bop;
    j["excess_eop"] = f.excess_eop;
    return j;
}

CapitalFlows flows_from_json(const ojson& j) {
    CapitalFlows f;
    f.el_bop = read_amount(j, "el_bop");
    f.el_eop = read_amount(j, "el_eop");
    f.total_write_off = read_amount(j, "total_write_off");
    f.ior = read_amount(j, "ior");
    f.ior_npl = read_amount(j, "ior_npl");
    f.ior_life_pl = read_optional(j, "ior_life_pl");
    f.el_delta_pl_bop = read_optional(j, "el_delta_pl_bop");
    f.el_delta_pl_eop = read_optional(j, "el_delta_pl_eop");
    f.el_life_pl_bop = read_optional(j, "el_life_pl_bop");
    f.el_life_pl_eop = read_optional(j, "el_life_pl_eop");
    f.llp_expenses = read_optional(j, "llp_expenses");
    f.ibnr_expenses = read_optional(j, "ibnr_expenses");
    f.sf_bop = read_optional(j, "sf_bop");
    f.sf_eop = read_optional(j, "sf_eop");
    f.sf_impact = read_optional(j, "sf_impact");
    f.ior_accounting = read_optional(j, "ior_accounting");
    f.cost_of_risk = read_optional(j, "cost_of_risk");
    f.excess_bop = j.value("excess_bop", false);
    f.excess_eop = j.value("excess_eop", false);
    return f;
}

TransitionClass parse_class(const std::string& s) {
    for (TransitionClass c : kAllTransitionClasses) {
        if (to_string(c) == s) return c;
    }
    fail(ErrorKind::ParseError, fmt::format("unknown transition class '{}'", s));
}

ojson report_json(const DecompositionReport& r, bool include_accounts) {
    ojson j;
    j["bop_as_of"] = format_date(r.bop_as_of);
    j["eop_as_of"] = format_date(r.eop_as_of);
    j["tolerance"] = r.tolerance;

    j["ior"] = amount(r.ior);
    j["ior_check"] = amount(r.ior_check);
    j["el_pl_eop"] = amount(r.el_pl_eop);
    j["pl_backtest"] = amount(r.pl_backtest);
    j["npl_backtest"] = amount(r.npl_backtest);
    j["model_change"] = amount(r.model_change);

    j["el_bop"] = amount(r.el_bop);
    j["el_eop"] = amount(r.el_eop);
    j["el_pl_bop"] = amount(r.el_pl_bop);
    j["el_npl_bop"] = amount(r.el_npl_bop);
    j["el_new_npl_eop"] = amount(r.el_new_npl_eop);
    j["el_old_npl_eop"] = amount(r.el_old_npl_eop);
    j["wo_total"] = amount(r.wo_total);
    j["wo_new_npl"] = amount(r.wo_new_npl);
    j["wo_old_npl"] = amount(r.wo_old_npl);
    j["recovery_total"] = amount(r.recovery_total);

    j["ead_pl_bop"] = amount(r.ead_pl_bop);
    j["ear_pl_bop"] = amount(r.ear_pl_bop);
    j["ead_npl_bop"] = amount(r.ead_npl_bop);
    j["ead_old_npl_eop"] = amount(r.ead_old_npl_eop);
    j["er_npl_bop"] = amount(r.er_npl_bop);
    j["er_old_npl_eop"] = amount(r.er_old_npl_eop);

    j["rdf"] = amount(r.rdf);
    j["edf"] = amount(r.edf);
    j["pd_impact"] = amount(r.pd_impact);
    j["rd_realized"] = amount(r.rd_realized);
    j["rd_expected"] = amount(r.rd_expected);
    j["rd_impact"] = amount(r.rd_impact);
    j["conservativity_c"] = amount(r.conservativity_c);

    j["recoflow"] = amount(r.recoflow);
    j["discount_rate"] = amount(r.discount_rate);
    j["discount_bias"] = amount(r.discount_bias);

    j["delta_pd"] = amount(r.delta_pd);
    j["delta_ead"] = amount(r.delta_ead);
    j["delta_lgd"] = amount(r.delta_lgd);

    j["flows"] = flows_json(r.flows);

    ojson counts = ojson::object();
    for (std::size_t i = 0; i < kAllTransitionClasses.size(); ++i) {
        counts[std::string(to_string(kAllTransitionClasses[i]))] = r.class_counts[i];
    }
    j["class_counts"] = counts;
    j["flags"] = r.flags;

    ojson segments = ojson::array();
    for (const auto& s : r.per_segment) {
        ojson row;
        row["dimension"] = std::string(to_string(s.dimension));
        row["value"] = s.value;
        row["account_count"] = s.account_count;
        row["el_pl_bop"] = amount(s.el_pl_bop);
        row["el_pl_eop"] = amount(s.el_pl_eop);
        row["pl_backtest"] = amount(s.pl_backtest);
        row["npl_backtest"] = amount(s.npl_backtest);
        row["recoflow"] = amount(s.recoflow);
        row["ior"] = amount(s.ior);
        segments.push_back(std::move(row));
    }
    j["per_segment"] = std::move(segments);

    if (include_accounts) {
        ojson accounts = ojson::array();
        for (const auto& c : r.per_account) {
            ojson row;
            row["account_id"] = c.account_id;
            row["class"] = std::string(to_string(c.cls));
            row["performing_at_bop"] = c.performing_at_bop;
            row["in_bop"] = c.in_bop;
            row["in_eop"] = c.in_eop;
            row["el_bop"] = amount(c.el_bop);
            row["el_bop_original"] = amount(c.el_bop_original);
            row["el_eop"] = amount(c.el_eop);
            row["ead_bop"] = amount(c.ead_bop);
            row["ead_eop"] = amount(c.ead_eop);
            row["write_off"] = amount(c.write_off);
            row["recovery"] = amount(c.recovery);
            row["pl_backtest"] = amount(c.pl_backtest);
            row["npl_backtest"] = amount(c.npl_backtest);
            row["recoflow"] = amount(c.recoflow);
            ojson tags;
            for (Dimension d : kAllDimensions) tags[std::string(to_string(d))] = c.segments.get(d);
            row["segments"] = std::move(tags);
            accounts.push_back(std::move(row));
        }
        j["per_account"] = std::move(accounts);
    }
    return j;
}

DecompositionReport report_from(const ojson& j) {
    DecompositionReport r;
    r.bop_as_of = parse_date(j.at("bop_as_of").get<std::string>());
    r.eop_as_of = parse_date(j.at("eop_as_of").get<std::string>());
    r.tolerance = j.value("tolerance", kDefaultTolerance);

    r.ior = read_amount(j, "ior");
    r.ior_check = read_amount(j, "ior_check");
    r.el_pl_eop = read_amount(j, "el_pl_eop");
    r.pl_backtest = read_amount(j, "pl_backtest");
    r.npl_backtest = read_amount(j, "npl_backtest");
    r.model_change = read_amount(j, "model_change");

    r.el_bop = read_amount(j, "el_bop");
    r.el_eop = read_amount(j, "el_eop");
    r.el_pl_bop = read_amount(j, "el_pl_bop");
    r.el_npl_bop = read_amount(j, "el_npl_bop");
    r.el_new_npl_eop = read_amount(j, "el_new_npl_eop");
    r.el_old_npl_eop = read_amount(j, "el_old_npl_eop");
    r.wo_total = read_amount(j, "wo_total");
    r.wo_new_npl = read_amount(j, "wo_new_npl");
    r.wo_old_npl = read_amount(j, "wo_old_npl");
    r.recovery_total = read_amount(j, "recovery_total");

    r.ead_pl_bop = read_amount(j, "ead_pl_bop");
    r.ear_pl_bop = read_amount(j, "ear_pl_bop");
    r.ead_npl_bop = read_amount(j, "ead_npl_bop");
    r.ead_old_npl_eop = read_amount(j, "ead_old_npl_eop");
    r.er_npl_bop = read_amount(j, "er_npl_bop");
    r.er_old_npl_eop = read_amount(j, "er_old_npl_eop");

    r.rdf = read_optional(j, "rdf");
    r.edf = read_optional(j, "edf");
    r.pd_impact = read_optional(j, "pd_impact");
    r.rd_realized = read_optional(j, "rd_realized");
    r.rd_expected = read_optional(j, "rd_expected");
    r.rd_impact = read_optional(j, "rd_impact");
    r.conservativity_c = read_optional(j, "conservativity_c");

    r.recoflow = read_amount(j, "recoflow");
    r.discount_rate = read_amount(j, "discount_rate");
    r.discount_bias = read_amount(j, "discount_bias");

    r.delta_pd = read_optional(j, "delta_pd");
    r.delta_ead = read_optional(j, "delta_ead");
    r.delta_lgd = read_optional(j, "delta_lgd");

    if (j.contains("flows")) r.flows = flows_from_json(j.at("flows"));
    if (j.contains("class_counts")) {
        const auto& counts = j.at("class_counts");
        for (std::size_t i = 0; i < kAllTransitionClasses.size(); ++i) {
            r.class_counts[i] = counts.value(std::string(to_string(kAllTransitionClasses[i])), std::size_t{0});
        }
    }
    if (j.contains("flags")) r.flags = j.at("flags").get<std::vector<std::string>>();

    if (j.contains("per_segment")) {
        for (const auto& row : j.at("per_segment")) {
            SegmentRow s;
            s.dimension = parse_dimension(row.at("dimension").get<std::string>());
            s.value = row.at("value").get<std::string>();
            s.account_count = row.at("account_count").get<std::size_t>();
            s.el_pl_bop = read_amount(row, "el_pl_bop");
            s.el_pl_eop = read_amount(row, "el_pl_eop");
            s.pl_backtest = read_amount(row, "pl_backtest");
            s.npl_backtest = read_amount(row, "npl_backtest");
            s.recoflow = read_amount(row, "recoflow");
            s.ior = read_amount(row, "ior");
            r.per_segment.push_back(std::move(s));
        }
    }
    if (j.contains("per_account")) {
        for (const auto& row : j.at("per_account")) {
            AccountContribution c;
            c.account_id = row.at("account_id").get<std::string>();
            c.cls = parse_class(row.at("class").get<std::string>());
            c.performing_at_bop = row.value("performing_at_bop", false);
            c.in_bop = row.value("in_bop", false);
            c.in_eop = row.value("in_eop", false);
            c.el_bop = read_amount(row, "el_bop");
            c.el_bop_original = read_amount(row, "el_bop_original");
            c.el_eop = read_amount(row, "el_eop");
            c.ead_bop = read_amount(row, "ead_bop");
            c.ead_eop = read_amount(row, "ead_eop");
            c.write_off = read_amount(row, "write_off");
            c.recovery = read_amount(row, "recovery");
            c.pl_backtest = read_amount(row, "pl_backtest");
            c.npl_backtest = read_amount(row, "npl_backtest");
            c.recoflow = read_amount(row, "recoflow");
            if (row.contains("segments")) {
                const auto& tags = row.at("segments");
                for (Dimension d : kAllDimensions) c.segments.get(d) = tags.value(std::string(to_string(d)), "");
            }
            r.per_account.push_back(std::move(c));
        }
    }
    return r;
}

std::string optional_text(const std::optional<double>& v) { return v ? format_amount(*v) : "n/a"; }

}  // namespace

std::string format_amount(double value) {
    if (value == 0.0 || std::abs(value) < 5e-7) return "0.000000";
    return fmt::format("{:.6f}", value);
}

std::string report_to_json(const DecompositionReport& report, bool include_accounts) {
    return report_json(report, include_accounts).dump(2) + "\n";
}

DecompositionReport report_from_json(std::string_view json_text) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, fmt::format("report is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) fail(ErrorKind::ParseError, "report must be a JSON object");
    if (j.contains("periods")) {
        fail(ErrorKind::ParseError, "document is a chain report; pass one period's report");
    }
    try {
        return report_from(j);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, fmt::format("malformed report: {}", e.what()));
    }
}

void write_accounts_csv(std::ostream& out, const DecompositionReport& report) {
    out << "account_id,class,performing_at_bop,el_bop,el_bop_original,el_eop,ead_bop,ead_eop,write_off,recovery,"
           "pl_backtest,npl_backtest,recoflow";
    for (Dimension d : kAllDimensions) out << ',' << to_string(d);
    out << '\n';
    for (const auto& c : report.per_account) {
        out << csv_field(c.account_id) << ',' << to_string(c.cls) << ',' << (c.performing_at_bop ? 1 : 0) << ','
            << format_amount(c.el_bop) << ',' << format_amount(c.el_bop_original) << ',' << format_amount(c.el_eop)
            << ',' << format_amount(c.ead_bop) << ',' << format_amount(c.ead_eop) << ','
            << format_amount(c.write_off) << ',' << format_amount(c.recovery) << ','
            << format_amount(c.pl_backtest) << ',' << format_amount(c.npl_backtest) << ','
            << format_amount(c.recoflow);
        for (Dimension d : kAllDimensions) out << ',' << csv_field(c.segments.get(d));
        out << '\n';
    }
}

void write_segments_csv(std::ostream& out, const DecompositionReport& report) {
    out << "dimension,value,account_count,el_pl_bop,el_pl_eop,pl_backtest,npl_backtest,recoflow,ior\n";
    for (const auto& s : report.per_segment) {
        out << to_string(s.dimension) << ',' << csv_field(s.value) << ',' << s.account_count << ','
            << format_amount(s.el_pl_bop) << ',' << format_amount(s.el_pl_eop) << ','
            << format_amount(s.pl_backtest) << ',' << format_amount(s.npl_backtest) << ','
            << format_amount(s.recoflow) << ',' << format_amount(s.ior) << '\n';
    }
}

std::string summary_text(const DecompositionReport& r) {
    std::string s;
    auto line = [&s](std::string_view label, const std::string& value) {
        s += fmt::format("  {:<24}{:>20}\n", label, value);
    };
    s += fmt::format("Period {} -> {}\n", format_date(r.bop_as_of), format_date(r.eop_as_of));
    line("Impact of Risk", format_amount(r.ior));
    line("  EL_PL at EOP", format_amount(r.el_pl_eop));
    line("  PL backtest", format_amount(r.pl_backtest));
    line("  NPL backtest", format_amount(r.npl_backtest));
    if (r.model_change != 0.0) line("  model change", format_amount(r.model_change));
    line("Write-offs", format_amount(r.wo_total));
    if (r.flows.ior_accounting) line("IoR (accounting)", format_amount(*r.flows.ior_accounting));
    if (r.flows.cost_of_risk) line("Cost of risk", format_amount(*r.flows.cost_of_risk));
    line("rDF / eDF", fmt::format("{} / {}", optional_text(r.rdf), optional_text(r.edf)));
    line("Conservativity c", optional_text(r.conservativity_c));
    line("RecoFlow", format_amount(r.recoflow));
    line("Discount bias", format_amount(r.discount_bias));
    if (r.delta_pd) {
        line("Delta PD/EAD/LGD", fmt::format("{} / {} / {}", format_amount(*r.delta_pd),
                                             format_amount(*r.delta_ead), format_amount(*r.delta_lgd)));
    }
    std::string counts;
    for (std::size_t i = 0; i < kAllTransitionClasses.size(); ++i) {
        if (r.class_counts[i] == 0) continue;
        if (!counts.empty()) counts += ", ";
        counts += fmt::format("{} {}", to_string(kAllTransitionClasses[i]), r.class_counts[i]);
    }
    s += fmt::format("  Accounts: {}\n", counts.empty() ? "none" : counts);
    for (const auto& f : r.flags) s += fmt::format("  flag: {}\n", f);
    return s;
}

ChainReconciliation reconcile_chain(const std::vector<DecompositionReport>& periods, double tolerance) {
    ChainReconciliation chain;
    Sum ior;
    Sum wo;
    Sum cor;
    bool have_cor = !periods.empty();
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto& p = periods[i];
        ChainRow row;
        row.period = i + 1;
        row.bop_as_of = p.bop_as_of;
        row.eop_as_of = p.eop_as_of;
        row.ior = p.ior;
        row.write_off = p.wo_total;
        row.cost_of_risk = p.flows.cost_of_risk;
        row.pl_backtest = p.pl_backtest;
        row.npl_backtest = p.npl_backtest;
        ior += p.ior;
        wo += p.wo_total;
        if (p.flows.cost_of_risk) {
            cor += *p.flows.cost_of_risk;
        } else {
            have_cor = false;
        }
        row.cumulative_ior = ior.value();
        row.cumulative_write_off = wo.value();
        if (have_cor) row.cumulative_cost_of_risk = cor.value();
        chain.rows.push_back(row);
    }
    chain.total_ior = ior.value();
    chain.total_write_off = wo.value();
    if (have_cor) chain.total_cost_of_risk = cor.value();
    if (!periods.empty()) {
        chain.el_first = periods.front().el_bop;
        chain.el_last = periods.back().el_eop;
    }
    chain.ior_gap = chain.total_ior - chain.total_write_off;
    if (chain.total_cost_of_risk) chain.cor_gap = *chain.total_cost_of_risk - chain.total_write_off;

    const double scale = std::max(1.0, std::abs(chain.total_write_off));
    chain.liquidated = std::abs(chain.el_first) <= tolerance * scale && std::abs(chain.el_last) <= tolerance * scale;
    chain.reconciled = chain.liquidated && std::abs(chain.ior_gap) <= tolerance * scale &&
                       (!chain.cor_gap || std::abs(*chain.cor_gap) <= tolerance * scale);
    return chain;
}

std::string chain_to_json(const std::vector<DecompositionReport>& periods, const ChainReconciliation& chain) {
    ojson j;
    ojson list = ojson::array();
    for (const auto& p : periods) list.push_back(report_json(p, false));
    j["periods"] = std::move(list);

    ojson rows = ojson::array();
    for (const auto& r : chain.rows) {
        ojson row;
        row["period"] = r.period;
        row["bop_as_of"] = format_date(r.bop_as_of);
        row["eop_as_of"] = format_date(r.eop_as_of);
        row["ior"] = amount(r.ior);
        row["write_off"] = amount(r.write_off);
        row["cost_of_risk"] = amount(r.cost_of_risk);
        row["pl_backtest"] = amount(r.pl_backtest);
        row["npl_backtest"] = amount(r.npl_backtest);
        row["cumulative_ior"] = amount(r.cumulative_ior);
        row["cumulative_write_off"] = amount(r.cumulative_write_off);
        row["cumulative_cost_of_risk"] = amount(r.cumulative_cost_of_risk);
        rows.push_back(std::move(row));
    }
    ojson rec;
    rec["rows"] = std::move(rows);
    rec["total_ior"] = amount(chain.total_ior);
    rec["total_write_off"] = amount(chain.total_write_off);
    rec["total_cost_of_risk"] = amount(chain.total_cost_of_risk);
    rec["el_first"] = amount(chain.el_first);
    rec["el_last"] = amount(chain.el_last);
    rec["ior_gap"] = amount(chain.ior_gap);
    rec["cor_gap"] = amount(chain.cor_gap);
    rec["liquidated"] = chain.liquidated;
    rec["reconciled"] = chain.reconciled;
    j["reconciliation"] = std::move(rec);
    return j.dump(2) + "\n";
}

void write_chain_csv(std::ostream& out, const ChainReconciliation& chain) {
    out << "period,bop_as_of,eop_as_of,ior,write_off,cost_of_risk,pl_backtest,npl_backtest,cumulative_ior,"
           "cumulative_write_off,cumulative_cost_of_risk\n";
    for (const auto& r : chain.rows) {
        out << r.period << ',' << format_date(r.bop_as_of) << ',' << format_date(r.eop_as_of) << ','
            << format_amount(r.ior) << ',' << format_amount(r.write_off) << ','
            << (r.cost_of_risk ? format_amount(*r.cost_of_risk) : "") << ',' << format_amount(r.pl_backtest) << ','
            << format_amount(r.npl_backtest) << ',' << format_amount(r.cumulative_ior) << ','
            << format_amount(r.cumulative_write_off) << ','
            << (r.cumulative_cost_of_risk ? format_amount(*r.cumulative_cost_of_risk) : "") << '\n';
    }
}

std::string chain_summary_text(const ChainReconciliation& chain) {
    std::string s = fmt::format("{:>3}  {:<10}  {:>16}  {:>16}  {:>16}  {:>16}  {:>16}\n", "#", "eop", "IoR",
                                "write-off", "PL backtest", "NPL backtest", "cum. IoR");
    for (const auto& r : chain.rows) {
        s += fmt::format("{:>3}  {:<10}  {:>16}  {:>16}  {:>16}  {:>16}  {:>16}\n", r.period,
                         format_date(r.eop_as_of), format_amount(r.ior), format_amount(r.write_off),
                         format_amount(r.pl_backtest), format_amount(r.npl_backtest),
                         format_amount(r.cumulative_ior));
    }
    s += fmt::format("Total IoR {}  total write-off {}", format_amount(chain.total_ior),
                     format_amount(chain.total_write_off));
    if (chain.total_cost_of_risk) s += fmt::format("  total CoR {}", format_amount(*chain.total_cost_of_risk));
    s += '\n';
    if (!chain.liquidated) {
        s += fmt::format("EL not run off: first {} last {}; totals differ by the EL change\n",
                         format_amount(chain.el_first), format_amount(chain.el_last));
    }
    s += fmt::format("Reconciled: {}\n", chain.reconciled ? "yes" : "no");
    return s;
}

}  // namespace elbt
