#pragma once

#include <string>
#include <vector>

#include "cowp/strutil.hpp"

namespace cowp {

/// Minimal line-oriented unified-style diff (no hunk headers, full context
/// elided). Good enough for surgery audit logs.
inline std::string unified_diff(const std::string& before, const std::string& after) {
    std::vector<std::string> a = str::split(before, '\n');
    std::vector<std::string> b = str::split(after, '\n');
    if (!a.empty() && a.back().empty()) a.pop_back();
    if (!b.empty() && b.back().empty()) b.pop_back();

    const size_t n = a.size(), m = b.size();
    std::vector<std::vector<size_t>> lcs(n + 1, std::vector<size_t>(m + 1, 0));
    for (size_t i = n; i-- > 0;) {
        for (size_t j = m; j-- > 0;) {
            lcs[i][j] = (a[i] == b[j]) ? lcs[i + 1][j + 1] + 1
                                       : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        }
    }
    std::string out;
    size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i] == b[j]) {
            ++i;
            ++j;
        } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
            out += "-" + a[i++] + "\n";
        } else {
            out += "+" + b[j++] + "\n";
        }
    }
    while (i < n) out += "-" + a[i++] + "\n";
    while (j < m) out += "+" + b[j++] + "\n";
    return out;
}

} // namespace cowp
