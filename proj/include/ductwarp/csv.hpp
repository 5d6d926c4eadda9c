#ifndef DUCTWARP_CSV_HPP
#define DUCTWARP_CSV_HPP

#include <string>

namespace ductwarp {

/// Shortest decimal representation that round-trips the exact double value.
std::string csv_number(double v);

} // namespace ductwarp

#endif
