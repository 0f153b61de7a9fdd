#include <cmath>
#include <limits>
#include <string>

#include "simota/assigner.hpp"
#include "simota/errors.hpp"

namespace simota {

// Shortest augmenting path with row/column potentials, O(n^2 m) for n rows
// and m >= n columns. Indices are 1-based internally; column 0 is the
// virtual source of each augmentation.
std::vector<std::size_t> hungarian(const MatrixD& costs) {
  const std::size_t n = costs.rows();
  const std::size_t m = costs.cols();
  if (n > m)
    throw InfeasibleError("one-to-one assignment infeasible: " + std::to_string(n) + " gts for " +
                          std::to_string(m) + " anchors");
  for (double c : costs.data())
    if (!std::isfinite(c)) throw ValidationError("hungarian: non-finite cost");
  if (n == 0) return {};

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = costs(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j)
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace simota
