// UTC calendar helpers over integer-second timestamps.
#pragma once

#include <string>
#include <string_view>

#include "culture/core.hpp"

namespace culture {

// Parses "YYYY-MM-DDTHH:MM:SSZ" (also accepts a bare "YYYY-MM-DD").
Timestamp parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp ts);
std::string format_date(Timestamp ts);

Timestamp floor_to_hour(Timestamp ts);
Timestamp floor_to_day(Timestamp ts);
Timestamp floor_to_month(Timestamp ts);
Timestamp add_months(Timestamp month_start, int months);

// Hour of day after applying a fixed UTC offset, 0..23.
int local_hour(Timestamp ts, Timestamp utc_offset_seconds);

}  // namespace culture
