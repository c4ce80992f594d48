#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace gvc {

struct SummaryRow {
    std::string industry;
    std::size_t obs = 0;
    double min = 0, max = 0, mean = 0, sd = 0;
};

// Obs/Min/Max/Mean/Std (sample standard deviation) per key, keys ascending.
std::vector<SummaryRow> summarize(const std::vector<std::pair<std::string, double>>& values);

}  // namespace gvc
