#include "elbt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "elbt/error.hpp"

namespace elbt {

namespace {

std::vector<std::string> split_csv_line(std::string_view line, const std::string& where) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(ch);
        }
    }
    if (quoted) fail(ErrorKind::ParseError, where + ": unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string location(const CsvTable& t, std::size_t row) {
    return fmt::format("{}:{}", t.source, t.line_numbers[row]);
}

double parse_number(std::string_view text, std::string_view column, const std::string& where) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        fail(ErrorKind::ParseError, fmt::format("{}: column {}: '{}' is not a number", where, column, text));
    }
    return value;
}

/// Column lookup by header name. Rejects unknown and duplicate columns.
class Columns {
public:
    Columns(const CsvTable& t, std::string_view known_header, std::initializer_list<std::string_view> required) {
        std::vector<std::string_view> known;
        for (std::size_t pos = 0; pos <= known_header.size();) {
            const auto next = std::min(known_header.find(',', pos), known_header.size());
            known.push_back(known_header.substr(pos, next - pos));
            pos = next + 1;
        }
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            const auto& name = t.header[i];
            if (std::find(known.begin(), known.end(), name) == known.end()) {
                fail(ErrorKind::ParseError, fmt::format("{}: unknown column '{}'", t.source, name));
            }
            if (!index_.emplace(name, i).second) {
                fail(ErrorKind::ParseError, fmt::format("{}: duplicate column '{}'", t.source, name));
            }
        }
        for (auto name : required) {
            if (!index_.count(std::string(name))) {
                fail(ErrorKind::ParseError, fmt::format("{}: missing required column '{}'", t.source, name));
            }
        }
    }

    [[nodiscard]] std::string_view get(const std::vector<std::string>& row, std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end() || it->second >= row.size()) return {};
        return row[it->second];
    }

private:
    std::map<std::string, std::size_t> index_;
};

[[noreturn]] void rethrow_at(const Error& e, const std::string& where) {
    std::string_view msg = e.what();
    const auto prefix = std::string(to_string(e.kind())) + ": ";
    if (msg.substr(0, prefix.size()) == prefix) msg.remove_prefix(prefix.size());
    if (msg.substr(0, where.size()) == where) fail(e.kind(), std::string(msg));
    fail(e.kind(), fmt::format("{}: {}", where, msg));
}

std::optional<double> optional_number(std::string_view text, std::string_view column, const std::string& where) {
    if (text.empty()) return std::nullopt;
    return parse_number(text, column, where);
}

}  // namespace

CsvTable parse_csv(std::istream& in, std::string source) {
    CsvTable t;
    t.source = std::move(source);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line, fmt::format("{}:{}", t.source, line_no));
        for (auto& f : fields) f = trim(f);
        if (!have_header) {
            if (line_no == 1 && fields.size() > 0 && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
                fields[0].erase(0, 3);
            }
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            fail(ErrorKind::ParseError, fmt::format("{}:{}: expected {} fields, found {}", t.source, line_no,
                                                    t.header.size(), fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(line_no);
    }
    if (!have_header) fail(ErrorKind::ParseError, fmt::format("{}: missing header row", t.source));
    return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, fmt::format("cannot open {}", path.string()));
    return parse_csv(in, path.string());
}

Snapshot load_snapshot(const CsvTable& t, std::optional<Date> as_of) {
    const Columns cols(t, kSnapshotHeader, {"account_id", "as_of", "status", "pd", "ead", "lgd"});
    std::vector<AccountState> accounts;
    accounts.reserve(t.rows.size());
    std::optional<Date> row_as_of;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::string where = location(t, i);
        try {
            const Date d = parse_date(cols.get(row, "as_of"));
            if (row_as_of && *row_as_of != d) {
                fail(ErrorKind::ParseError, fmt::format("as_of {} differs from earlier rows ({})", format_date(d),
                                                        format_date(*row_as_of)));
            }
            row_as_of = d;

            AccountState a;
            a.account_id = std::string(cols.get(row, "account_id"));
            const auto status = cols.get(row, "status");
            if (status == "P") {
                a.status = Status::Performing;
            } else if (status == "N") {
                a.status = Status::NonPerforming;
            } else {
                fail(ErrorKind::ParseError, fmt::format("status '{}' not in {{P,N}}", status));
            }
            a.pd = parse_number(cols.get(row, "pd"), "pd", where);
            a.ead = parse_number(cols.get(row, "ead"), "ead", where);
            a.lgd = parse_number(cols.get(row, "lgd"), "lgd", where);
            a.lifetime_el = optional_number(cols.get(row, "lifetime_el"), "lifetime_el", where);
            if (auto dd = cols.get(row, "default_date"); !dd.empty()) a.default_date = parse_date(dd);
            for (Dimension dim : kAllDimensions) {
                a.segments.get(dim) = std::string(cols.get(row, to_string(dim)));
            }
            validate(a);
            accounts.push_back(std::move(a));
        } catch (const Error& e) {
            rethrow_at(e, where);
        }
    }
    if (as_of && row_as_of && *as_of != *row_as_of) {
        fail(ErrorKind::ParseError, fmt::format("{}: rows are dated {} but {} was expected", t.source,
                                                format_date(*row_as_of), format_date(*as_of)));
    }
    if (!as_of && !row_as_of) {
        fail(ErrorKind::ParseError,
             fmt::format("{}: snapshot has no rows, so its as_of date must be supplied separately", t.source));
    }
    try {
        return Snapshot(row_as_of ? *row_as_of : *as_of, std::move(accounts));
    } catch (const Error& e) {
        rethrow_at(e, t.source);
    }
}

Snapshot load_snapshot_file(const std::filesystem::path& path, std::optional<Date> as_of) {
    return load_snapshot(read_csv_file(path), as_of);
}

PeriodEvents load_events(const CsvTable& t) {
    const Columns cols(t, kEventsHeader, {"account_id"});
    PeriodEvents events;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::string where = location(t, i);
        AccountEvents ev;
        ev.write_off = optional_number(cols.get(row, "write_off"), "write_off", where).value_or(0.0);
        ev.recovery = optional_number(cols.get(row, "recovery"), "recovery", where).value_or(0.0);
        ev.at_default_ead = optional_number(cols.get(row, "at_default_ead"), "at_default_ead", where);
        ev.at_default_lgd = optional_number(cols.get(row, "at_default_lgd"), "at_default_lgd", where);
        ev.restated_bop_el = optional_number(cols.get(row, "restated_bop_el"), "restated_bop_el", where);
        const auto id = cols.get(row, "account_id");
        if (id.empty()) fail(ErrorKind::ParseError, where + ": empty account_id");
        try {
            events.add(std::string(id), ev);
        } catch (const Error& e) {
            rethrow_at(e, where);
        }
    }
    return events;
}

PeriodEvents load_events_file(const std::filesystem::path& path) { return load_events(read_csv_file(path)); }

ProvisionBalances parse_provisions(std::string_view text, std::string_view source) {
    ProvisionBalances p;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::ParseError, fmt::format("{}: {}", source, e.what()));
        }
        auto number = [&](const char* key, bool required) -> std::optional<double> {
            if (!j.contains(key) || j[key].is_null()) {
                if (required) fail(ErrorKind::ParseError, fmt::format("{}: missing key '{}'", source, key));
                return std::nullopt;
            }
            const auto& v = j[key];
            if (v.is_number()) return v.get<double>();
            if (v.is_string()) return parse_number(v.get<std::string>(), key, std::string(source));
            fail(ErrorKind::ParseError, fmt::format("{}: key '{}' must be a number", source, key));
        };
        p.llp_bop = *number("llp_bop", true);
        p.llp_eop = *number("llp_eop", true);
        p.ibnr_bop = *number("ibnr_bop", true);
        p.ibnr_eop = *number("ibnr_eop", true);
        p.sf_bop = number("sf_bop", false);
        p.sf_eop = number("sf_eop", false);
    } else {
        std::istringstream in{std::string(text)};
        const auto t = parse_csv(in, std::string(source));
        const Columns cols(t, kProvisionsHeader, {"llp_bop", "llp_eop", "ibnr_bop", "ibnr_eop"});
        if (t.rows.size() != 1) {
            fail(ErrorKind::ParseError, fmt::format("{}: expected exactly one provisions record, found {}", source,
                                                    t.rows.size()));
        }
        const auto& row = t.rows.front();
        const std::string where = location(t, 0);
        p.llp_bop = parse_number(cols.get(row, "llp_bop"), "llp_bop", where);
        p.llp_eop = parse_number(cols.get(row, "llp_eop"), "llp_eop", where);
        p.ibnr_bop = parse_number(cols.get(row, "ibnr_bop"), "ibnr_bop", where);
        p.ibnr_eop = parse_number(cols.get(row, "ibnr_eop"), "ibnr_eop", where);
        p.sf_bop = optional_number(cols.get(row, "sf_bop"), "sf_bop", where);
        p.sf_eop = optional_number(cols.get(row, "sf_eop"), "sf_eop", where);
    }
    try {
        validate(p);
    } catch (const Error& e) {
        rethrow_at(e, std::string(source));
    }
    return p;
}

ProvisionBalances load_provisions_file(const std::filesystem::path& path) {
    return parse_provisions(read_text_file(path), path.string());
}

std::string format_number(double value) {
    if (value == 0.0) return "0";
    return fmt::format("{}", value);
}

void write_snapshot_csv(std::ostream& out, const Snapshot& s) {
    out << kSnapshotHeader << '\n';
    const std::string as_of = format_date(s.as_of());
    for (const auto& a : s.accounts()) {
        out << csv_escape(a.account_id) << ',' << as_of << ',' << (a.performing() ? 'P' : 'N') << ','
            << format_number(a.pd) << ',' << format_number(a.ead) << ',' << format_number(a.lgd) << ','
            << (a.lifetime_el ? format_number(*a.lifetime_el) : "") << ','
            << (a.default_date ? format_date(*a.default_date) : "");
        for (Dimension dim : kAllDimensions) out << ',' << csv_escape(a.segments.get(dim));
        out << '\n';
    }
}

void write_events_csv(std::ostream& out, const PeriodEvents& events) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    out << kEventsHeader << '\n';
    for (const auto& [id, ev] : events.entries()) {
        out << csv_escape(id) << ',' << format_number(ev.write_off) << ',' << format_number(ev.recovery) << ','
            << opt(ev.at_default_ead) << ',' << opt(ev.at_default_lgd) << ',' << opt(ev.restated_bop_el) << '\n';
    }
}

void write_provisions_json(std::ostream& out, const ProvisionBalances& p) {
    nlohmann::ordered_json j;
    j["llp_bop"] = p.llp_bop;
    j["llp_eop"] = p.llp_eop;
    j["ibnr_bop"] = p.ibnr_bop;
    j["ibnr_eop"] = p.ibnr_eop;
    if (p.sf_bop) j["sf_bop"] = *p.sf_bop;
    if (p.sf_eop) j["sf_eop"] = *p.sf_eop;
    out << j.dump(2) << '\n';
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, fmt::format("cannot write {}", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::IoError, fmt::format("failed writing {}", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace elbt
