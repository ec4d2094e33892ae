#include "coulomb_ot/network_simplex.hpp"

#include "coulomb_ot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coulomb_ot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kUp = 1;     // tree arc points from the node to its parent
constexpr int kDown = -1;  // tree arc points from the parent to the node

class NetworkSimplex {
 public:
  NetworkSimplex(const RowMatrix& cost, const Vector& supply, const Vector& demand)
      : cost_(cost),
        m_(static_cast<int>(cost.rows())),
        n_(static_cast<int>(cost.cols())),
        nodes_(m_ + n_),
        root_(m_ + n_),
        real_arcs_(static_cast<long>(m_) * n_) {
    double max_cost = 0.0;
    for (long a = 0; a < real_arcs_; ++a) {
      const double c = cost_.data()[a];
      if (std::isfinite(c)) max_cost = std::max(max_cost, std::abs(c));
    }
    art_cost_ = (max_cost + 1.0) * (nodes_ + 1);
    rc_tol_ = 1e-12 * (1.0 + max_cost);

    const int total = nodes_ + 1;
    parent_.assign(total, -1);
    pred_.assign(total, -1);
    dir_.assign(total, 0);
    depth_.assign(total, 0);
    flow_.assign(total, 0.0);
    pi_.assign(total, 0.0);
    art_up_.assign(nodes_, 1);
    children_.assign(total, {});
    children_[root_].reserve(nodes_);

    for (int u = 0; u < nodes_; ++u) {
      const double s = u < m_ ? supply[u] : -demand[u - m_];
      parent_[u] = root_;
      pred_[u] = static_cast<long>(real_arcs_ + u);
      depth_[u] = 1;
      if (s >= 0.0) {
        art_up_[u] = 1;
        dir_[u] = kUp;
        flow_[u] = s;
        pi_[u] = 0.0;
      } else {
        art_up_[u] = 0;
        dir_[u] = kDown;
        flow_[u] = -s;
        pi_[u] = art_cost_;
      }
      children_[root_].push_back(u);
    }
    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  long run(long max_iterations) {
    long iterations = 0;
    long in_arc = -1;
    while (find_entering(in_arc)) {
      if (++iterations > max_iterations) {
        throw ConvergenceError("network simplex exceeded its pivot budget", 0.0);
      }
      pivot(in_arc);
    }
    return iterations;
  }

  NetworkSimplexResult result(const Vector& supply, const Vector& demand, double floor) const {
    NetworkSimplexResult out;
    for (int u = 0; u < nodes_; ++u) {
      if (pred_[u] >= real_arcs_ && flow_[u] > 1e-12) {
        throw InfeasibleError("no coupling with finite cost exists");
      }
    }
    for (int u = 0; u < nodes_; ++u) {
      const long a = pred_[u];
      if (a < real_arcs_ && flow_[u] > floor) {
        out.flows.push_back({static_cast<int>(a / n_), static_cast<int>(a % n_), flow_[u]});
      }
    }
    std::sort(out.flows.begin(), out.flows.end(), [](const TransportEntry& a, const TransportEntry& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    out.source_potential.resize(m_);
    out.target_potential.resize(n_);
    for (int i = 0; i < m_; ++i) out.source_potential[i] = -pi_[i];
    for (int j = 0; j < n_; ++j) out.target_potential[j] = pi_[m_ + j];
    // Components hanging off the root by idle artificial arcs carry an
    // arbitrary offset; shift so the smallest source potential is zero.
    const double shift = out.source_potential.minCoeff();
    out.source_potential.array() -= shift;
    out.target_potential.array() += shift;
    for (const auto& e : out.flows) out.primal_cost += e.mass * cost_(e.i, e.j);
    out.dual_cost = supply.dot(out.source_potential) + demand.dot(out.target_potential);
    return out;
  }

 private:
  int src(long a) const {
    if (a < real_arcs_) return static_cast<int>(a / n_);
    const int u = static_cast<int>(a - real_arcs_);
    return art_up_[u] ? u : root_;
  }
  int tgt(long a) const {
    if (a < real_arcs_) return m_ + static_cast<int>(a % n_);
    const int u = static_cast<int>(a - real_arcs_);
    return art_up_[u] ? root_ : u;
  }
  double arc_cost(long a) const {
    if (a < real_arcs_) return cost_.data()[a];
    return art_up_[a - real_arcs_] ? 0.0 : art_cost_;
  }

  bool find_entering(long& in_arc) {
    double best = -rc_tol_;
    in_arc = -1;
    long counted = 0;
    for (long k = 0; k < real_arcs_; ++k) {
      long a = next_arc_ + k;
      if (a >= real_arcs_) a -= real_arcs_;
      const int i = static_cast<int>(a / n_);
      const int j = static_cast<int>(a % n_);
      const double rc = cost_.data()[a] + pi_[i] - pi_[m_ + j];
      if (rc < best) {
        best = rc;
        in_arc = a;
      }
      if (++counted == block_) {
        if (in_arc >= 0) {
          next_arc_ = a + 1 == real_arcs_ ? 0 : a + 1;
          return true;
        }
        counted = 0;
      }
    }
    return in_arc >= 0;
  }

  int find_join(int u, int v) const {
    while (u != v) {
      if (depth_[u] >= depth_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    return u;
  }

  void pivot(long in_arc) {
    const int first = src(in_arc);
    const int second = tgt(in_arc);
    const int join = find_join(first, second);

    double delta = kInf;
    int u_out = -1;
    int side = 0;
    for (int u = first; u != join; u = parent_[u]) {
      if (dir_[u] == kUp && flow_[u] < delta) {
        delta = flow_[u];
        u_out = u;
        side = 1;
      }
    }
    for (int u = second; u != join; u = parent_[u]) {
      if (dir_[u] == kDown && flow_[u] <= delta) {
        delta = flow_[u];
        u_out = u;
        side = 2;
      }
    }
    if (side == 0) throw std::logic_error("network simplex found an unbounded cycle");

    if (delta > 0.0) {
      for (int u = first; u != join; u = parent_[u]) flow_[u] -= dir_[u] * delta;
      for (int u = second; u != join; u = parent_[u]) flow_[u] += dir_[u] * delta;
    }
    flow_[u_out] = 0.0;

    const int u_in = side == 1 ? first : second;
    const int v_in = side == 1 ? second : first;

    stem_.clear();
    for (int u = u_in;; u = parent_[u]) {
      stem_.push_back(u);
      if (u == u_out) break;
    }
    detach(parent_[u_out], u_out);
    saved_.clear();
    for (int u : stem_) saved_.push_back({pred_[u], dir_[u], flow_[u]});
    for (std::size_t k = stem_.size() - 1; k >= 1; --k) {
      const int w = stem_[k];
      const int prev = stem_[k - 1];
      detach(w, prev);
      children_[prev].push_back(w);
      parent_[w] = prev;
      pred_[w] = saved_[k - 1].pred;
      dir_[w] = -saved_[k - 1].dir;
      flow_[w] = saved_[k - 1].flow;
    }
    parent_[u_in] = v_in;
    pred_[u_in] = in_arc;
    dir_[u_in] = u_in == src(in_arc) ? kUp : kDown;
    flow_[u_in] = delta;
    children_[v_in].push_back(u_in);

    refresh_subtree(u_in);
  }

  void detach(int parent, int child) {
    auto& list = children_[parent];
    const auto it = std::find(list.begin(), list.end(), child);
    if (it != list.end()) {
      *it = list.back();
      list.pop_back();
    }
  }

  // Recompute depth and potentials below `top` from the tree arc costs.
  void refresh_subtree(int top) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const int u = stack_.back();
      stack_.pop_back();
      const int p = parent_[u];
      depth_[u] = depth_[p] + 1;
      const double c = arc_cost(pred_[u]);
      pi_[u] = dir_[u] == kUp ? pi_[p] - c : pi_[p] + c;
      for (int child : children_[u]) stack_.push_back(child);
    }
  }

  struct Saved {
    long pred;
    int dir;
    double flow;
  };

  const RowMatrix& cost_;
  int m_, n_, nodes_, root_;
  long real_arcs_;
  double art_cost_ = 0.0;
  double rc_tol_ = 0.0;
  long block_ = 10;
  long next_arc_ = 0;

  std::vector<int> parent_;
  std::vector<long> pred_;
  std::vector<int> dir_;
  std::vector<int> depth_;
  std::vector<double> flow_;
  std::vector<double> pi_;
  std::vector<char> art_up_;
  std::vector<std::vector<int>> children_;
  std::vector<int> stem_;
  std::vector<Saved> saved_;
  std::vector<int> stack_;
};

}  // namespace

NetworkSimplexResult solve_transport(const RowMatrix& cost, const Vector& supply, const Vector& demand,
                                     const NetworkSimplexOptions& options) {
  if (supply.size() != cost.rows() || demand.size() != cost.cols()) {
    throw std::invalid_argument("marginal sizes do not match the cost matrix");
  }
  if (cost.rows() == 0 || cost.cols() == 0) throw std::invalid_argument("empty transport problem");
  if ((supply.array() < 0.0).any() || (demand.array() < 0.0).any()) {
    throw std::invalid_argument("marginals must be nonnegative");
  }
  if (std::abs(supply.sum() - demand.sum()) > 1e-9 * std::max(1.0, supply.sum())) {
    throw std::invalid_argument("marginals carry different total mass");
  }
  NetworkSimplex ns(cost, supply, demand);
  const long iterations = ns.run(options.max_iterations);
  auto out = ns.result(supply, demand, options.mass_floor);
  out.iterations = iterations;
  return out;
}

}  // namespace coulomb_ot
