#include "fibered/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fibered {

namespace {

struct BasicCell {
  int row;
  int col;
  double value;
};

// Nodes 0..m-1 are rows, m..m+n-1 are columns; basic cells are tree edges.
class BasisTree {
 public:
  BasisTree(int m, int n) : m_(m), n_(n) {}

  void potentials(const std::vector<BasicCell>& basis, std::span<const double> cost,
                  std::vector<double>& u, std::vector<double>& v) const {
    const int nodes = m_ + n_;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nodes));
    for (int e = 0; e < static_cast<int>(basis.size()); ++e) {
      adj[static_cast<std::size_t>(basis[e].row)].push_back(e);
      adj[static_cast<std::size_t>(m_ + basis[e].col)].push_back(e);
    }
    std::vector<char> done(static_cast<std::size_t>(nodes), 0);
    std::vector<double> pot(static_cast<std::size_t>(nodes), 0.0);
    std::vector<int> stack{0};
    done[0] = 1;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int e : adj[static_cast<std::size_t>(a)]) {
        const auto& c = basis[static_cast<std::size_t>(e)];
        const int r = c.row, k = m_ + c.col;
        const double cij = cost[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n_) +
                                static_cast<std::size_t>(c.col)];
        const int other = (a == r) ? k : r;
        if (done[static_cast<std::size_t>(other)]) continue;
        // u_r + v_k = c_rk
        pot[static_cast<std::size_t>(other)] = cij - pot[static_cast<std::size_t>(a)];
        done[static_cast<std::size_t>(other)] = 1;
        stack.push_back(other);
      }
    }
    if (std::find(done.begin(), done.end(), 0) != done.end()) {
      throw std::logic_error("solve_transport: basis is not a spanning tree");
    }
    u.assign(pot.begin(), pot.begin() + m_);
    v.assign(pot.begin() + m_, pot.end());
  }

  // Basic-cell indices on the tree path from row r to column c.
  std::vector<int> path(const std::vector<BasicCell>& basis, int r, int c) const {
    const int nodes = m_ + n_;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nodes));
    for (int e = 0; e < static_cast<int>(basis.size()); ++e) {
      adj[static_cast<std::size_t>(basis[e].row)].push_back(e);
      adj[static_cast<std::size_t>(m_ + basis[e].col)].push_back(e);
    }
    std::vector<int> via(static_cast<std::size_t>(nodes), -1);
    std::vector<int> parent(static_cast<std::size_t>(nodes), -1);
    std::vector<int> queue{r};
    parent[static_cast<std::size_t>(r)] = r;
    const int target = m_ + c;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int a = queue[q];
      if (a == target) break;
      for (int e : adj[static_cast<std::size_t>(a)]) {
        const auto& cell = basis[static_cast<std::size_t>(e)];
        const int other = (a == cell.row) ? m_ + cell.col : cell.row;
        if (parent[static_cast<std::size_t>(other)] != -1) continue;
        parent[static_cast<std::size_t>(other)] = a;
        via[static_cast<std::size_t>(other)] = e;
        queue.push_back(other);
      }
    }
    if (parent[static_cast<std::size_t>(target)] == -1) {
      throw std::logic_error("solve_transport: no tree path for entering cell");
    }
    std::vector<int> edges;  // ordered from column c back to row r
    for (int a = target; a != r; a = parent[static_cast<std::size_t>(a)]) {
      edges.push_back(via[static_cast<std::size_t>(a)]);
    }
    return edges;
  }

 private:
  int m_;
  int n_;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0) throw std::invalid_argument("solve_transport: empty marginals");
  if (cost.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("solve_transport: cost matrix has wrong size");
  }
  const double ts = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double td = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(ts - td) > 1e-9 * std::max(1.0, ts)) {
    throw std::invalid_argument("solve_transport: supply and demand totals differ");
  }
  for (double s : supply) {
    if (!(s >= 0.0)) throw std::invalid_argument("solve_transport: negative supply");
  }
  for (double d : demand) {
    if (!(d >= 0.0)) throw std::invalid_argument("solve_transport: negative demand");
  }

  // North-west corner start; ties advance a single index so the basis keeps
  // exactly m + n - 1 cells (degenerate zeros included).
  std::vector<double> s(supply.begin(), supply.end());
  std::vector<double> d(demand.begin(), demand.end());
  std::vector<BasicCell> basis;
  basis.reserve(static_cast<std::size_t>(m + n - 1));
  for (int i = 0, j = 0;;) {
    const double x = std::min(s[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(j)]);
    basis.push_back({i, j, x});
    s[static_cast<std::size_t>(i)] -= x;
    d[static_cast<std::size_t>(j)] -= x;
    if (i == m - 1 && j == n - 1) break;
    if (j == n - 1 || (i < m - 1 && s[static_cast<std::size_t>(i)] <= d[static_cast<std::size_t>(j)])) {
      ++i;
    } else {
      ++j;
    }
  }
  // Absorb the round-off left in the last cell.
  basis.back().value = std::max(0.0, basis.back().value + s.back());

  double cmax = 0.0;
  for (double c : cost) cmax = std::max(cmax, std::abs(c));
  const double eps = 1e-12 * std::max(1.0, cmax);

  BasisTree tree(m, n);
  std::vector<double> u, v;
  std::vector<char> in_basis(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), 0);
  TransportSolution out;
  const int max_pivots = 50 * (m + n) * (m + n) + 1000;
  for (;;) {
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (const auto& c : basis) {
      in_basis[static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c.col)] = 1;
    }
    tree.potentials(basis, cost, u, v);
    int er = -1, ec = -1;
    double best = -eps;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
        if (in_basis[k]) continue;
        const double r = cost[k] - u[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(j)];
        if (r < best) {
          best = r;
          er = i;
          ec = j;
        }
      }
    }
    if (er < 0) break;
    if (++out.pivots > max_pivots) throw std::runtime_error("solve_transport: pivot limit exceeded");

    // Path edges from column ec back to row er alternate -, +, -, ..., -.
    const auto edges = tree.path(basis, er, ec);
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t k = 0; k < edges.size(); k += 2) {
      const auto& c = basis[static_cast<std::size_t>(edges[k])];
      if (c.value < theta) {
        theta = c.value;
        leave = edges[k];
      }
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
      auto& c = basis[static_cast<std::size_t>(edges[k])];
      c.value += (k % 2 == 0) ? -theta : theta;
      if (c.value < 0.0) c.value = 0.0;
    }
    basis[static_cast<std::size_t>(leave)] = {er, ec, theta};
  }

  out.plan.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), 0.0);
  for (const auto& c : basis) {
    const auto k = static_cast<std::size_t>(c.row) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c.col);
    out.plan[k] = c.value;
    out.cost += c.value * cost[k];
  }
  return out;
}

}  // namespace fibered
