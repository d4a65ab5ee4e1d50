#include "foresight/date.hpp"

#include "foresight/error.hpp"

#include <charconv>
#include <cstdio>

namespace foresight {

namespace {

int parse_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) throw DataError("truncated date: " + std::string(whole));
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc{} || ptr != text.data() + pos + len) {
        throw DataError("malformed date: " + std::string(whole));
    }
    return v;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw DataError("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) + "-" +
                        std::to_string(day));
    }
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
        throw DataError("malformed date: " + std::string(text));
    }
    Date d(parse_int(text, 0, 4, text), static_cast<unsigned>(parse_int(text, 5, 2, text)),
           static_cast<unsigned>(parse_int(text, 8, 2, text)));
    if (text.size() == 10) return d;

    if (text[10] != 'T' && text[10] != ' ') throw DataError("malformed date: " + std::string(text));
    int hh = parse_int(text, 11, 2, text);
    if (text.size() < 16 || text[13] != ':') throw DataError("malformed timestamp: " + std::string(text));
    int mm = parse_int(text, 14, 2, text);
    std::size_t pos = 16;
    int ss = 0;
    if (pos < text.size() && text[pos] == ':') {
        ss = parse_int(text, pos + 1, 2, text);
        pos += 3;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) throw DataError("malformed timestamp: " + std::string(text));

    long offset_minutes = 0;
    if (pos == text.size()) {
        // No zone designator: already UTC.
    } else if (text[pos] == 'Z' && pos + 1 == text.size()) {
    } else if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
        int oh = parse_int(text, pos + 1, 2, text);
        int om = parse_int(text, pos + 4, 2, text);
        offset_minutes = (oh * 60 + om) * (text[pos] == '-' ? -1 : 1);
    } else {
        throw DataError("malformed timezone in timestamp: " + std::string(text));
    }
    long minutes_utc = hh * 60L + mm - offset_minutes;
    long day_shift = 0;
    while (minutes_utc < 0) {
        minutes_utc += 24 * 60;
        --day_shift;
    }
    while (minutes_utc >= 24 * 60) {
        minutes_utc -= 24 * 60;
        ++day_shift;
    }
    return d.plus_days(day_shift);
}

std::string Date::iso() const {
    std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace foresight
