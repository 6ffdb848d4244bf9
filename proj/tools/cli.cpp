#include "cli.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "elbt/backtest.hpp"
#include "elbt/error.hpp"
#include "elbt/io.hpp"
#include "elbt/report.hpp"
#include "elbt/synth.hpp"

namespace elbt::cli {

namespace fs = std::filesystem;

namespace {

void require_tolerance(double tolerance) {
    if (!(std::isfinite(tolerance) && tolerance > 0.0)) {
        fail(ErrorKind::ConfigInvalid, fmt::format("tolerance must be > 0, got {}", tolerance));
    }
}

std::vector<Dimension> parse_dimensions(const std::vector<std::string>& names) {
    std::vector<Dimension> dims;
    for (const auto& n : names) dims.push_back(parse_dimension(n));
    return dims;
}

void write_totals_csv(std::ostream& out, const DecompositionReport& report) {
    const auto j = nlohmann::ordered_json::parse(report_to_json(report, false));
    out << "field,value\n";
    for (const auto& [key, value] : j.items()) {
        if (value.is_string()) out << key << ',' << value.get<std::string>() << '\n';
        if (value.is_null()) out << key << ",\n";
    }
}

void write_report(const fs::path& dir, const DecompositionReport& report, OutputFormat format) {
    if (format == OutputFormat::Json) {
        write_text_file(dir / "report.json", report_to_json(report));
        return;
    }
    std::ostringstream accounts;
    std::ostringstream segments;
    std::ostringstream totals;
    write_accounts_csv(accounts, report);
    write_segments_csv(segments, report);
    write_totals_csv(totals, report);
    write_text_file(dir / "accounts.csv", accounts.str());
    write_text_file(dir / "segments.csv", segments.str());
    write_text_file(dir / "totals.csv", totals.str());
}

void write_chain_report(const fs::path& dir, const std::vector<DecompositionReport>& reports,
                        const ChainReconciliation& chain, OutputFormat format) {
    if (format == OutputFormat::Json) {
        write_text_file(dir / "chain_report.json", chain_to_json(reports, chain));
        return;
    }
    std::ostringstream table;
    write_chain_csv(table, chain);
    write_text_file(dir / "reconciliation.csv", table.str());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        write_report(dir / fmt::format("period_{:02}", i + 1), reports[i], format);
    }
}

std::string outlier_lines(const DecompositionReport& report, std::size_t n) {
    if (n == 0) return {};
    const auto ranked = rank_outliers(report, n);
    auto join = [](const std::vector<RankedAccount>& list) {
        std::string s;
        for (const auto& a : list) {
            if (!s.empty()) s += ", ";
            s += fmt::format("{} ({})", a.account_id, format_amount(a.value));
        }
        return s.empty() ? std::string("none") : s;
    };
    std::string s;
    s += fmt::format("  Largest new defaults: {}\n", join(ranked.largest_new_defaults));
    s += fmt::format("  NPL shortages: {}\n", join(ranked.npl_shortages));
    s += fmt::format("  NPL gains: {}\n", join(ranked.npl_gains));
    return s;
}

// Balances at the end of one period must open the next.
void check_provision_continuity(const std::vector<PeriodLedger>& ledgers, double tolerance) {
    for (std::size_t i = 1; i < ledgers.size(); ++i) {
        const auto& prev = ledgers[i - 1].provisions();
        const auto& next = ledgers[i].provisions();
        if (!prev || !next) continue;
        auto check = [&](const char* name, double closing, double opening) {
            if (!nearly_equal(closing, opening, tolerance)) {
                fail(ErrorKind::IdentityBreach,
                     fmt::format("period {} closes {} at {} but period {} opens at {}", i, name,
                                 format_number(closing), i + 1, format_number(opening)));
            }
        };
        check("llp", prev->llp_eop, next->llp_bop);
        check("ibnr", prev->ibnr_eop, next->ibnr_bop);
        if (prev->sf_eop && next->sf_bop) check("sf", *prev->sf_eop, *next->sf_bop);
    }
}

std::vector<DecompositionReport> decompose_chain(const std::vector<PeriodLedger>& ledgers, double tolerance) {
    std::vector<DecompositionReport> reports;
    reports.reserve(ledgers.size());
    for (std::size_t i = 0; i < ledgers.size(); ++i) {
        try {
            reports.push_back(decompose_ior(ledgers[i], tolerance));
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("period {}: {}", i + 1, std::string_view(e.what()).substr(
                                                                          to_string(e.kind()).size() + 2)));
        }
    }
    return reports;
}

std::string ior_sequence(const ChainReconciliation& chain) {
    std::string s;
    for (const auto& r : chain.rows) {
        if (!s.empty()) s += ", ";
        s += format_number(std::round(r.ior * 1e6) / 1e6);
    }
    return "(" + s + ")";
}

// Identity suite run by `simulate --verify` on top of the checks inside
// decompose_ior. Returns the number of checks performed.
std::size_t verify_chain(const std::vector<PeriodLedger>& ledgers, const std::vector<DecompositionReport>& reports,
                         const ChainReconciliation& chain, double tolerance) {
    std::size_t checks = 0;
    auto breach = [](std::string msg) { fail(ErrorKind::IdentityBreach, std::move(msg)); };
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const double scale = std::abs(r.el_bop) + std::abs(r.el_eop) + std::abs(r.wo_total);
        if (!nearly_equal(r.ior_check, r.ior, tolerance, scale)) {
            breach(fmt::format("period {}: components {} differ from IoR {}", i + 1, r.ior_check, r.ior));
        }
        ++checks;
        if (r.delta_pd) {
            const double sum = *r.delta_pd + *r.delta_ead + *r.delta_lgd;
            if (!nearly_equal(sum, r.pl_backtest, tolerance, scale)) {
                breach(fmt::format("period {}: delta split {} differs from PL backtest {}", i + 1, sum,
                                   r.pl_backtest));
            }
            ++checks;
        }
        Sum npl_restatement;
        for (const auto& c : r.per_account) {
            if (c.in_bop && !c.performing_at_bop) npl_restatement += c.el_bop - c.el_bop_original;
        }
        const double npl_view = r.el_pl_bop + r.pl_backtest + r.npl_backtest + npl_restatement.value();
        if (!nearly_equal(npl_view, r.flows.ior_npl, tolerance, scale)) {
            breach(fmt::format("period {}: NPL-restricted IoR {} differs from {}", i + 1, r.flows.ior_npl,
                               npl_view));
        }
        ++checks;
        if (r.flows.ior_accounting) ++checks;
    }
    check_provision_continuity(ledgers, tolerance);
    ++checks;
    if (!chain.reconciled) {
        breach(fmt::format("cumulative IoR {} does not reconcile with cumulative write-offs {}",
                           format_amount(chain.total_ior), format_amount(chain.total_write_off)));
    }
    ++checks;
    return checks;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<PeriodLedger> load_manifest(const fs::path& manifest) {
    const std::string text = read_text_file(manifest);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, fmt::format("{}: {}", manifest.string(), e.what()));
    }
    const fs::path base = manifest.parent_path();
    try {
        LedgerOptions options{j.value("discount_rate", 0.0), j.value("loss_confirmation_months", 0)};
        std::vector<Snapshot> snapshots;
        for (const auto& s : j.at("snapshots")) {
            std::optional<Date> as_of;
            if (s.contains("as_of")) as_of = parse_date(s.at("as_of").get<std::string>());
            snapshots.push_back(load_snapshot_file(resolve(base, s.at("path").get<std::string>()), as_of));
        }
        if (snapshots.size() < 2) {
            fail(ErrorKind::ConfigInvalid,
                 fmt::format("{}: a chain needs at least two snapshots, found {}", manifest.string(),
                             snapshots.size()));
        }
        std::vector<PeriodEvents> events;
        std::vector<std::optional<ProvisionBalances>> provisions;
        if (j.contains("periods")) {
            for (const auto& p : j.at("periods")) {
                events.push_back(p.contains("events") ? load_events_file(resolve(base, p.at("events").get<std::string>()))
                                                      : PeriodEvents{});
                provisions.push_back(p.contains("provisions") ? std::optional(load_provisions_file(resolve(
                                                                    base, p.at("provisions").get<std::string>())))
                                                              : std::nullopt);
            }
        }
        return pair_periods(snapshots, events, provisions, options);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, fmt::format("{}: malformed manifest: {}", manifest.string(), e.what()));
    }
}

void write_chain(const fs::path& dir, const std::vector<PeriodLedger>& ledgers) {
    nlohmann::ordered_json manifest;
    manifest["discount_rate"] = ledgers.empty() ? 0.0 : ledgers.front().discount_rate();
    manifest["loss_confirmation_months"] = ledgers.empty() ? 0 : ledgers.front().loss_confirmation_months();
    auto snapshots = nlohmann::ordered_json::array();
    auto periods = nlohmann::ordered_json::array();
    auto write_snapshot = [&](const Snapshot& s, std::size_t index) {
        const auto name = fmt::format("snapshot_{:02}.csv", index);
        std::ostringstream csv;
        write_snapshot_csv(csv, s);
        write_text_file(dir / name, csv.str());
        snapshots.push_back({{"as_of", format_date(s.as_of())}, {"path", name}});
    };
    for (std::size_t i = 0; i < ledgers.size(); ++i) {
        if (i == 0) write_snapshot(ledgers[i].bop(), 0);
        write_snapshot(ledgers[i].eop(), i + 1);

        nlohmann::ordered_json period;
        const auto events_name = fmt::format("events_{:02}.csv", i + 1);
        std::ostringstream events;
        write_events_csv(events, ledgers[i].events());
        write_text_file(dir / events_name, events.str());
        period["events"] = events_name;
        if (ledgers[i].provisions()) {
            const auto prov_name = fmt::format("provisions_{:02}.json", i + 1);
            std::ostringstream prov;
            write_provisions_json(prov, *ledgers[i].provisions());
            write_text_file(dir / prov_name, prov.str());
            period["provisions"] = prov_name;
        }
        periods.push_back(std::move(period));
    }
    manifest["snapshots"] = std::move(snapshots);
    manifest["periods"] = std::move(periods);
    write_text_file(dir / "chain.json", manifest.dump(2) + "\n");
}

int cmd_backtest(const RunConfig& cfg, std::ostream& out) {
    require_tolerance(cfg.tolerance);
    const auto dims = parse_dimensions(cfg.segments);
    Snapshot bop = load_snapshot_file(cfg.bop, cfg.bop_date);
    Snapshot eop = load_snapshot_file(cfg.eop, cfg.eop_date);
    PeriodEvents events = cfg.events ? load_events_file(*cfg.events) : PeriodEvents{};
    std::optional<ProvisionBalances> provisions;
    if (cfg.provisions) provisions = load_provisions_file(*cfg.provisions);
    const PeriodLedger ledger(std::move(bop), std::move(eop), std::move(events), provisions,
                              LedgerOptions{cfg.discount_rate, cfg.loss_confirmation_months});

    const auto transitions = classify_transitions(ledger);
    auto report = decompose_ior(ledger, transitions, cfg.tolerance);
    if (!dims.empty()) attach_segments(report, segment_report(ledger, transitions, dims, cfg.tolerance));

    out << summary_text(report) << outlier_lines(report, cfg.top_n);
    if (cfg.out) {
        write_report(*cfg.out, report, cfg.format);
        out << fmt::format("Report written to {}\n", cfg.out->string());
    }
    return kExitOk;
}

int cmd_simulate(const SimulateConfig& cfg, std::ostream& out) {
    require_tolerance(cfg.tolerance);
    std::vector<PeriodLedger> ledgers;
    if (cfg.appendix_case) {
        ledgers = generate_appendix_case(*cfg.appendix_case);
    } else {
        ScenarioConfig scenario;
        if (cfg.scenario) scenario = parse_scenario(read_text_file(*cfg.scenario));
        if (cfg.seed) scenario.seed = *cfg.seed;
        ledgers = simulate_lifecycle(scenario);
    }
    const auto reports = decompose_chain(ledgers, cfg.tolerance);
    const auto chain = reconcile_chain(reports, cfg.tolerance);
    out << chain_summary_text(chain);
    out << fmt::format("IoR sequence: {}\n", ior_sequence(chain));

    if (cfg.out) {
        write_chain(*cfg.out, ledgers);
        write_chain_report(*cfg.out, reports, chain, cfg.format);
        out << fmt::format("Chain written to {}\n", (*cfg.out / "chain.json").string());
    }
    if (cfg.verify) {
        std::size_t checks = verify_chain(ledgers, reports, chain, cfg.tolerance);
        if (cfg.out) {
            const auto reloaded = decompose_chain(load_manifest(*cfg.out / "chain.json"), cfg.tolerance);
            for (std::size_t i = 0; i < reports.size(); ++i) {
                if (report_to_json(reloaded[i]) != report_to_json(reports[i])) {
                    fail(ErrorKind::IdentityBreach,
                         fmt::format("period {}: report from the written files differs from the in-memory one",
                                     i + 1));
                }
            }
            ++checks;
        }
        out << fmt::format("Verified: {} checks over {} periods passed\n", checks, reports.size());
    }
    return kExitOk;
}

int cmd_chain(const ChainConfig& cfg, std::ostream& out) {
    require_tolerance(cfg.tolerance);
    std::vector<PeriodLedger> ledgers;
    if (cfg.manifest) {
        ledgers = load_manifest(*cfg.manifest);
    } else {
        if (cfg.snapshots.size() < 2) {
            fail(ErrorKind::ConfigInvalid,
                 fmt::format("a chain needs at least two snapshots, got {}", cfg.snapshots.size()));
        }
        if (!cfg.as_of.empty() && cfg.as_of.size() != cfg.snapshots.size()) {
            fail(ErrorKind::ConfigInvalid, fmt::format("got {} --as-of dates for {} snapshots", cfg.as_of.size(),
                                                       cfg.snapshots.size()));
        }
        std::vector<Snapshot> snapshots;
        for (std::size_t i = 0; i < cfg.snapshots.size(); ++i) {
            std::optional<Date> as_of;
            if (!cfg.as_of.empty()) as_of = cfg.as_of[i];
            snapshots.push_back(load_snapshot_file(cfg.snapshots[i], as_of));
        }
        std::vector<PeriodEvents> events;
        for (const auto& p : cfg.events) events.push_back(load_events_file(p));
        std::vector<std::optional<ProvisionBalances>> provisions;
        for (const auto& p : cfg.provisions) provisions.emplace_back(load_provisions_file(p));
        ledgers = pair_periods(snapshots, events, provisions,
                               LedgerOptions{cfg.discount_rate, cfg.loss_confirmation_months});
    }
    check_provision_continuity(ledgers, cfg.tolerance);
    const auto reports = decompose_chain(ledgers, cfg.tolerance);
    const auto chain = reconcile_chain(reports, cfg.tolerance);
    out << chain_summary_text(chain);
    if (cfg.out) {
        write_chain_report(*cfg.out, reports, chain, cfg.format);
        out << fmt::format("Reports written to {}\n", cfg.out->string());
    }
    return kExitOk;
}

int cmd_report(const ReportConfig& cfg, std::ostream& out) {
    const std::string text = read_text_file(cfg.input);
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, fmt::format("{}: {}", cfg.input.string(), e.what()));
    }
    if (j.is_object() && j.contains("periods")) {
        std::vector<DecompositionReport> reports;
        for (const auto& p : j.at("periods")) reports.push_back(report_from_json(p.dump()));
        const auto chain = reconcile_chain(reports, reports.empty() ? kDefaultTolerance : reports.front().tolerance);
        for (const auto& r : reports) out << summary_text(r);
        out << chain_summary_text(chain);
        if (cfg.out) write_chain_report(*cfg.out, reports, chain, cfg.format);
        return kExitOk;
    }
    const auto report = report_from_json(text);
    out << summary_text(report);
    if (cfg.out) write_report(*cfg.out, report, cfg.format);
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Expected-loss backtesting: Impact of Risk decomposition into PL and NPL backtests", "elbt"};
    app.set_config("--config", "", "TOML/INI file with option values");
    app.require_subcommand(1);

    const std::map<std::string, OutputFormat> formats{{"json", OutputFormat::Json}, {"csv", OutputFormat::Csv}};
    std::string bop_date;
    std::string eop_date;
    std::vector<std::string> chain_dates;

    RunConfig run_cfg;
    auto* backtest = app.add_subcommand("backtest", "Decompose one period's Impact of Risk");
    backtest->add_option("--bop", run_cfg.bop, "Snapshot at begin of period")->required()->check(CLI::ExistingFile);
    backtest->add_option("--eop", run_cfg.eop, "Snapshot at end of period")->required()->check(CLI::ExistingFile);
    backtest->add_option("--events", run_cfg.events, "Write-offs, recoveries and at-default data")
        ->check(CLI::ExistingFile);
    backtest->add_option("--provisions", run_cfg.provisions, "LLP/IBNR balances (CSV or JSON)")
        ->check(CLI::ExistingFile);
    backtest->add_option("--bop-date", bop_date, "as_of for a BOP snapshot without rows");
    backtest->add_option("--eop-date", eop_date, "as_of for an EOP snapshot without rows");
    backtest->add_option("--discount-rate", run_cfg.discount_rate, "Discount rate of the LGD model")
        ->check(CLI::Range(0.0, 1.0));
    backtest->add_option("--lcp-months", run_cfg.loss_confirmation_months, "Loss confirmation period")
        ->check(CLI::Range(0, 12));
    backtest->add_option("--segments", run_cfg.segments, "Comma separated segment dimensions")->delimiter(',');
    backtest->add_option("--out", run_cfg.out, "Output directory");
    backtest->add_option("--format", run_cfg.format, "json or csv")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    backtest->add_option("--tolerance", run_cfg.tolerance, "Relative tolerance of identity checks");
    backtest->add_option("--top", run_cfg.top_n, "Outliers listed in the summary");

    SimulateConfig sim_cfg;
    auto* simulate = app.add_subcommand("simulate", "Generate a ledger chain from a scenario");
    auto* case_opt = simulate->add_option("--case", sim_cfg.appendix_case, "Appendix case 1, 2 or 3");
    auto* scenario_opt =
        simulate->add_option("--scenario", sim_cfg.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
    case_opt->excludes(scenario_opt);
    simulate->add_option("--seed", sim_cfg.seed, "Override the scenario seed")->excludes(case_opt);
    simulate->add_option("--out", sim_cfg.out, "Output directory for the chain");
    simulate->add_option("--format", sim_cfg.format, "json or csv")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    simulate->add_option("--tolerance", sim_cfg.tolerance, "Relative tolerance of identity checks");
    simulate->add_flag("--verify", sim_cfg.verify, "Run the identity suite on the emitted chain");

    ChainConfig chain_cfg;
    auto* chain = app.add_subcommand("chain", "Decompose consecutive periods and reconcile IoR with write-offs");
    auto* manifest_opt =
        chain->add_option("--manifest", chain_cfg.manifest, "chain.json written by simulate")->check(CLI::ExistingFile);
    chain->add_option("--snapshot", chain_cfg.snapshots, "Snapshots in date order")
        ->check(CLI::ExistingFile)
        ->excludes(manifest_opt);
    chain->add_option("--as-of", chain_dates, "One as_of per snapshot, for snapshots without rows")
        ->excludes(manifest_opt);
    chain->add_option("--events", chain_cfg.events, "One events file per period")
        ->check(CLI::ExistingFile)
        ->excludes(manifest_opt);
    chain->add_option("--provisions", chain_cfg.provisions, "One provisions file per period")
        ->check(CLI::ExistingFile)
        ->excludes(manifest_opt);
    chain->add_option("--discount-rate", chain_cfg.discount_rate, "Discount rate of the LGD model")
        ->check(CLI::Range(0.0, 1.0));
    chain->add_option("--lcp-months", chain_cfg.loss_confirmation_months, "Loss confirmation period")
        ->check(CLI::Range(0, 12));
    chain->add_option("--out", chain_cfg.out, "Output directory");
    chain->add_option("--format", chain_cfg.format, "json or csv")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    chain->add_option("--tolerance", chain_cfg.tolerance, "Relative tolerance of identity checks");

    ReportConfig report_cfg;
    auto* report = app.add_subcommand("report", "Re-render a saved JSON report");
    report->add_option("--in,input", report_cfg.input, "report.json or chain_report.json")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--out", report_cfg.out, "Output directory");
    report->add_option("--format", report_cfg.format, "json or csv")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (*backtest) {
            if (!bop_date.empty()) run_cfg.bop_date = parse_date(bop_date);
            if (!eop_date.empty()) run_cfg.eop_date = parse_date(eop_date);
            return cmd_backtest(run_cfg, out);
        }
        if (*simulate) return cmd_simulate(sim_cfg, out);
        if (*chain) {
            for (const auto& d : chain_dates) chain_cfg.as_of.push_back(parse_date(d));
            return cmd_chain(chain_cfg, out);
        }
        return cmd_report(report_cfg, out);
    } catch (const Error& e) {
        err << "elbt: " << e.what() << '\n';
        return e.kind() == ErrorKind::IdentityBreach ? kExitIdentityBreach : kExitInputError;
    } catch (const std::exception& e) {
        err << "elbt: " << e.what() << '\n';
        return kExitInputError;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("elbt");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace elbt::cli
