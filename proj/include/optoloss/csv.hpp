#pragma once

#include <string>
#include <vector>

namespace optoloss::csv {

// 17 significant digits: round-trips every double and is byte-stable.
std::string num(double x);

std::vector<std::string> split(const std::string& line, char sep = ',');

}  // namespace optoloss::csv
