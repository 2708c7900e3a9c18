#include "pda/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "pda/wasserstein.hpp"

namespace pda::oracle {

namespace {

// Min-cost flow with successive shortest paths (Bellman-Ford, bottleneck
// augmentation). Costs are integers so the arithmetic is exact and the
// residual graph can never pick up rounding-induced negative cycles.
class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t num_nodes) : head_(num_nodes, -1) {}

  void add_edge(std::size_t from, std::size_t to, std::int64_t cap, std::int64_t cost) {
    edges_.push_back({static_cast<int>(to), head_[from], cap, cost});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({static_cast<int>(from), head_[to], 0, -cost});
    head_[to] = static_cast<int>(edges_.size()) - 1;
  }

  /// Sends `amount` units from s to t; returns the total cost.
  __int128 solve(std::size_t s, std::size_t t, std::int64_t amount) {
    __int128 total = 0;
    while (amount > 0) {
      const std::size_t nn = head_.size();
      std::vector<std::int64_t> dist(nn, std::numeric_limits<std::int64_t>::max());
      std::vector<int> prev_edge(nn, -1);
      std::vector<char> in_queue(nn, 0);
      std::vector<std::size_t> queue;
      queue.reserve(nn * 4);
      dist[s] = 0;
      queue.push_back(s);
      in_queue[s] = 1;
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t node = queue[qi];
        in_queue[node] = 0;
        for (int e = head_[node]; e != -1; e = edges_[e].next) {
          if (edges_[e].cap <= 0) continue;
          const std::size_t to = static_cast<std::size_t>(edges_[e].to);
          const std::int64_t nd = dist[node] + edges_[e].cost;
          if (nd < dist[to]) {
            dist[to] = nd;
            prev_edge[to] = e;
            if (!in_queue[to]) {
              queue.push_back(to);
              in_queue[to] = 1;
            }
          }
        }
      }
      if (prev_edge[t] == -1)
        throw std::runtime_error("transport_lp: flow network infeasible");
      std::int64_t push = amount;
      for (std::size_t node = t; node != s;) {
        const auto& e = edges_[prev_edge[node]];
        push = std::min(push, e.cap);
        node = static_cast<std::size_t>(edges_[prev_edge[node] ^ 1].to);
      }
      for (std::size_t node = t; node != s;) {
        auto& e = edges_[prev_edge[node]];
        e.cap -= push;
        edges_[prev_edge[node] ^ 1].cap += push;
        total += static_cast<__int128>(push) * e.cost;
        node = static_cast<std::size_t>(edges_[prev_edge[node] ^ 1].to);
      }
      amount -= push;
    }
    return total;
  }

  std::int64_t reverse_cap(int edge_id) const { return edges_[edge_id ^ 1].cap; }

 private:
  struct Edge {
    int to;
    int next;
    std::int64_t cap;
    std::int64_t cost;
  };
  std::vector<int> head_;
  std::vector<Edge> edges_;
};

}  // namespace

TransportSolution transport_lp(const Matrix& costs) {
  const std::size_t n = costs.rows();
  const std::size_t m = costs.cols();
  if (n == 0 || m == 0) throw std::invalid_argument("transport_lp: empty cost matrix");
  if (n * m > 250000)
    throw std::invalid_argument("transport_lp: instance too large for the exact path");
  double max_abs_cost = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!std::isfinite(costs.data()[i]))
      throw std::invalid_argument("transport_lp: non-finite cost");
    max_abs_cost = std::max(max_abs_cost, std::fabs(costs.data()[i]));
  }

  // Scale costs onto an integer grid fine enough that rounding is below
  // every tolerance in play (relative ~1e-16). Power of two keeps the
  // scaling itself exact.
  double scale = 1.0;
  if (max_abs_cost > 0.0) {
    int expo = 0;
    std::frexp(max_abs_cost, &expo);
    scale = std::ldexp(1.0, 51 - expo);
  }

  // One unit = mass 1/(n*m): rows supply m units, columns demand n units.
  const std::size_t source = n + m;
  const std::size_t sink = n + m + 1;
  MinCostFlow flow(n + m + 2);
  std::vector<int> cell_edge(n * m);
  for (std::size_t i = 0; i < n; ++i)
    flow.add_edge(source, i, static_cast<std::int64_t>(m), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      cell_edge[i * m + j] = static_cast<int>(2 * (n + i * m + j));
      flow.add_edge(i, n + j, static_cast<std::int64_t>(m),
                    static_cast<std::int64_t>(std::llround(costs(i, j) * scale)));
    }
  for (std::size_t j = 0; j < m; ++j)
    flow.add_edge(n + j, sink, static_cast<std::int64_t>(n), 0);

  const std::int64_t total_units =
      static_cast<std::int64_t>(n) * static_cast<std::int64_t>(m);
  const __int128 raw = flow.solve(source, sink, total_units);

  TransportSolution out;
  const double unit = 1.0 / static_cast<double>(total_units);
  out.value = static_cast<double>(raw) / scale * unit;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const std::int64_t units = flow.reverse_cap(cell_edge[i * m + j]);
      if (units > 0) out.plan.push_back({i, j, static_cast<double>(units) * unit});
    }
  return out;
}

Vector finite_difference_gradient(const SampleSet& x, const SampleSet& y,
                                  std::span<const double> beta, double h) {
  if (beta.size() != x.dim())
    throw std::invalid_argument("finite_difference_gradient: dimension mismatch");
  Vector grad(beta.size());
  Vector probe(beta.begin(), beta.end());
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + h;
    const double hi = objective(x, y, probe);
    probe[k] = saved - h;
    const double lo = objective(x, y, probe);
    probe[k] = saved;
    grad[k] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

}  // namespace pda::oracle
