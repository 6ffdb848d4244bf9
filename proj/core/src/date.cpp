#include "elbt/date.hpp"

#include <charconv>
#include <cstdio>

#include "elbt/error.hpp"

namespace elbt {

namespace {

int parse_fixed(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        fail(ErrorKind::ParseError, "invalid date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        fail(ErrorKind::ParseError, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i != 4 && i != 7 && (text[i] < '0' || text[i] > '9')) {
            fail(ErrorKind::ParseError, "invalid date '" + std::string(text) + "'");
        }
    }
    const int y = parse_fixed(text.substr(0, 4), text);
    const int m = parse_fixed(text.substr(5, 2), text);
    const int d = parse_fixed(text.substr(8, 2), text);
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        fail(ErrorKind::ParseError, "invalid calendar date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

Date add_years(const Date& date, int years) {
    Date shifted = date + std::chrono::years{years};
    if (!shifted.ok()) {
        shifted = shifted.year() / shifted.month() / std::chrono::last;
    }
    return shifted;
}

}  // namespace elbt
