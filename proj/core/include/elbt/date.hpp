#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace elbt {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws ParseError.
Date parse_date(std::string_view text);

std::string format_date(const Date& date);

/// Same calendar day-of-month shifted by whole years; Feb 29 clamps to Feb 28.
Date add_years(const Date& date, int years);

}  // namespace elbt
