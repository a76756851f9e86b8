#ifndef IDRISK_TIMEUTIL_HPP
#define IDRISK_TIMEUTIL_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace idrisk {

namespace detail {

// Days from civil date, Howard Hinnant's algorithm.
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

} // namespace detail

// Strict "YYYY-MM-DDTHH:MM:SSZ" (an optional fractional-seconds part is
// accepted and discarded). Returns false on any deviation.
inline bool parse_iso8601_utc(std::string_view s, std::int64_t& out_epoch) {
    if (s.size() < 20 || s.back() != 'Z') return false;
    if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':')
        return false;
    std::string_view ys = s.substr(0, 4), mos = s.substr(5, 2), ds = s.substr(8, 2);
    std::string_view hs = s.substr(11, 2), mis = s.substr(14, 2), ses = s.substr(17, 2);
    if (!detail::all_digits(ys) || !detail::all_digits(mos) || !detail::all_digits(ds) ||
        !detail::all_digits(hs) || !detail::all_digits(mis) || !detail::all_digits(ses))
        return false;
    if (s.size() > 20) {
        std::string_view frac = s.substr(19, s.size() - 20);
        if (frac.size() < 2 || frac[0] != '.' || !detail::all_digits(frac.substr(1)))
            return false;
    }
    int y = detail::to_int(ys), mo = detail::to_int(mos), d = detail::to_int(ds);
    int h = detail::to_int(hs), mi = detail::to_int(mis), se = detail::to_int(ses);
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return false;
    if (h > 23 || mi > 59 || se > 60) return false;
    out_epoch = detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
    return true;
}

inline std::string format_iso8601_utc(std::int64_t epoch) {
    std::int64_t days = epoch / 86400;
    std::int64_t rem = epoch % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

} // namespace idrisk

#endif // IDRISK_TIMEUTIL_HPP
