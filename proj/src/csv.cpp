#include "ductwarp/csv.hpp"

#include <charconv>

namespace ductwarp {

std::string csv_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace ductwarp
