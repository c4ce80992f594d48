#include "gvc/summary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace gvc {

std::vector<SummaryRow> summarize(const std::vector<std::pair<std::string, double>>& values) {
    std::map<std::string, std::vector<double>> by;
    for (const auto& [k, v] : values) by[k].push_back(v);
    std::vector<SummaryRow> out;
    for (const auto& [k, v] : by) {
        SummaryRow r;
        r.industry = k;
        r.obs = v.size();
        r.min = *std::min_element(v.begin(), v.end());
        r.max = *std::max_element(v.begin(), v.end());
        r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out.push_back(r);
    }
    return out;
}

}  // namespace gvc
