#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "simota/assigner.hpp"
#include "simota/errors.hpp"

namespace simota {

namespace {

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

// Log-domain Sinkhorn. Rows are the G gts plus a zero-cost background row
// supplying A - sum(k); every anchor demands one unit. Each iteration fits
// the rows then the columns, so after it the column marginals hold to
// rounding and the reported violation is the row residual.
TransportPlan sinkhorn_ot(const MatrixD& costs, std::span<const int> k_values, const SinkhornOptions& opts) {
  if (!(opts.eps > 0.0)) throw ValidationError("sinkhorn: eps must be > 0");
  if (opts.max_iters < 1) throw ValidationError("sinkhorn: max_iters must be >= 1");
  const std::size_t g = costs.rows();
  const std::size_t a = costs.cols();
  if (k_values.size() != g) throw ValidationError("sinkhorn: one k per gt required");
  if (a == 0) throw ValidationError("sinkhorn: no anchors");
  for (double c : costs.data())
    if (!std::isfinite(c)) throw ValidationError("sinkhorn: non-finite cost");

  TransportPlan out;
  out.supply.resize(g + 1);
  long long total_k = 0;
  for (std::size_t i = 0; i < g; ++i) {
    if (k_values[i] < 1) throw ValidationError("sinkhorn: k must be >= 1");
    out.supply[i] = k_values[i];
    total_k += k_values[i];
  }
  if (total_k > static_cast<long long>(a)) throw ValidationError("sinkhorn: sum of k exceeds anchor count");
  out.supply[g] = static_cast<double>(static_cast<long long>(a) - total_k);
  out.demand.assign(a, 1.0);

  // A zero-mass background row is dropped from the iteration entirely.
  const std::size_t rows = out.supply[g] > 0.0 ? g + 1 : g;
  const double eps = opts.eps;
  auto cost = [&](std::size_t i, std::size_t j) { return i < g ? costs(i, j) : 0.0; };

  std::vector<double> f(rows, 0.0), gpot(a, 0.0), buf(std::max(rows, a));
  std::vector<double> log_supply(rows);
  for (std::size_t i = 0; i < rows; ++i) log_supply[i] = std::log(out.supply[i]);

  auto row_violation = [&]() {
    double v = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < a; ++j) s += std::exp((f[i] + gpot[j] - cost(i, j)) / eps);
      v = std::max(v, std::abs(s - out.supply[i]));
    }
    return v;
  };

  for (int it = 1; it <= opts.max_iters; ++it) {
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < a; ++j) buf[j] = (gpot[j] - cost(i, j)) / eps;
      f[i] = eps * (log_supply[i] - log_sum_exp({buf.data(), a}));
    }
    for (std::size_t j = 0; j < a; ++j) {
      for (std::size_t i = 0; i < rows; ++i) buf[i] = (f[i] - cost(i, j)) / eps;
      gpot[j] = -eps * log_sum_exp({buf.data(), rows});  // log demand = 0
    }
    out.iterations = it;
    out.violation = row_violation();
    if (opts.keep_history) out.violation_history.push_back(out.violation);
    if (out.violation < opts.tol) {
      out.converged = true;
      break;
    }
  }

  out.plan = MatrixD(g + 1, a, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < a; ++j) out.plan(i, j) = std::exp((f[i] + gpot[j] - cost(i, j)) / eps);
  return out;
}

TransportPlan sinkhorn_ot(const CostMatrix& cm, std::span<const int> k_values, const SinkhornOptions& opts) {
  return sinkhorn_ot(cm.costs, k_values, opts);
}

}  // namespace simota
