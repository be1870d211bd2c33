#pragma once

// Brute-force reference for fuzzy window matching, written independently of
// the library implementation so the two can be checked against each other.

#include <algorithm>
#include <string>
#include <vector>

namespace oracle {

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
    }
  }
  return d[a.size()][b.size()];
}

inline double fuzzy_similarity(const std::string& expected, const std::string& target) {
  if (expected.empty() || target.empty()) return 0.0;
  size_t n = expected.size();
  size_t lmin = (7 * n + 9) / 10;
  size_t lmax = 13 * n / 10;
  if (lmin < 1) lmin = 1;
  if (lmin > target.size()) lmin = lmax = target.size();
  if (lmax > target.size()) lmax = target.size();
  double best = 0.0;
  for (size_t len = lmin; len <= lmax; ++len) {
    for (size_t start = 0; start + len <= target.size(); ++start) {
      std::string w = target.substr(start, len);
      double sim =
          1.0 - static_cast<double>(edit_distance(expected, w)) /
                    static_cast<double>(std::max(n, len));
      best = std::max(best, sim);
    }
  }
  return best;
}

// Enumerates every string of length [0, max_len] over the given alphabet.
inline std::vector<std::string> all_strings(const std::string& alphabet, int max_len) {
  std::vector<std::string> out{""};
  std::vector<std::string> frontier{""};
  for (int l = 0; l < max_len; ++l) {
    std::vector<std::string> next;
    for (const auto& s : frontier) {
      for (char c : alphabet) next.push_back(s + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace oracle
