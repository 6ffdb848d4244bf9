#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "elbt/ledger.hpp"

namespace elbt::testing {

inline Date ymd(int y, unsigned m, unsigned d) { return std::chrono::year{y} / m / d; }

inline const Date kBop = ymd(2021, 12, 31);
inline const Date kEop = ymd(2022, 12, 31);
inline const Date kMidPeriod = ymd(2022, 6, 30);
inline const Date kPastDefault = ymd(2020, 3, 31);

inline AccountState performing(std::string id, double pd, double ead, double lgd) {
    AccountState a;
    a.account_id = std::move(id);
    a.pd = pd;
    a.ead = ead;
    a.lgd = lgd;
    return a;
}

inline AccountState defaulted(std::string id, double ead, double lgd, Date default_date = kPastDefault) {
    AccountState a;
    a.account_id = std::move(id);
    a.status = Status::NonPerforming;
    a.pd = 1.0;
    a.ead = ead;
    a.lgd = lgd;
    a.default_date = default_date;
    return a;
}

inline AccountEvents write_off(double amount) {
    AccountEvents e;
    e.write_off = amount;
    return e;
}

inline AccountEvents recovery(double amount) {
    AccountEvents e;
    e.recovery = amount;
    return e;
}

inline AccountEvents at_default(double ead, double lgd, double wo = 0.0) {
    AccountEvents e;
    e.write_off = wo;
    e.at_default_ead = ead;
    e.at_default_lgd = lgd;
    return e;
}

inline PeriodLedger ledger(std::vector<AccountState> bop, std::vector<AccountState> eop,
                           std::vector<std::pair<std::string, AccountEvents>> events = {},
                           std::optional<ProvisionBalances> provisions = std::nullopt, LedgerOptions options = {}) {
    PeriodEvents ev;
    for (auto& [id, e] : events) ev.add(id, e);
    return PeriodLedger(Snapshot(kBop, std::move(bop)), Snapshot(kEop, std::move(eop)), std::move(ev), provisions,
                        options);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("elbt_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace elbt::testing
