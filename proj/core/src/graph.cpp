#include "dra/graph.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace dra {

namespace {

constexpr double kZeroEigClamp = 1e-10;

void bfs_mark(const std::vector<std::vector<int>>& adj, std::vector<char>& seen) {
  std::vector<int> stack{0};
  seen.assign(adj.size(), 0);
  seen[0] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
}

}  // namespace

Network::Network(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  const int n = static_cast<int>(weights_.rows());
  neighbors_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && weights_(i, j) > 0.0) neighbors_[i].push_back(j);
    }
  }
}

Network Network::from_weights(Eigen::MatrixXd weights) {
  if (weights.rows() != weights.cols()) {
    throw std::invalid_argument("network weight matrix must be square");
  }
  const int n = static_cast<int>(weights.rows());
  if (n < 1) throw std::invalid_argument("network needs at least one node");
  for (int i = 0; i < n; ++i) {
    if (weights(i, i) != 0.0) {
      throw std::invalid_argument("network weight matrix must have zero diagonal");
    }
    for (int j = 0; j < n; ++j) {
      if (weights(i, j) < 0.0) {
        throw std::invalid_argument("network weights must be non-negative");
      }
      if (weights(i, j) != weights(j, i)) {
        throw std::invalid_argument("network weight matrix must be symmetric");
      }
    }
  }
  return Network(std::move(weights));
}

Network Network::from_edges(int node_count, std::span<const Edge> edges) {
  if (node_count < 1) throw std::invalid_argument("network needs at least one node");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(node_count, node_count);
  for (const Edge& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= node_count || e.j >= node_count) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.i == e.j) throw std::invalid_argument("self-loops are not allowed");
    if (e.weight <= 0.0) throw std::invalid_argument("edge weight must be positive");
    w(e.i, e.j) = e.weight;
    w(e.j, e.i) = e.weight;
  }
  return Network(std::move(w));
}

Network Network::cycle(int node_count, double weight) {
  if (node_count < 3) {
    throw std::invalid_argument("cycle needs at least 3 nodes, got " +
                                std::to_string(node_count));
  }
  if (weight <= 0.0) throw std::invalid_argument("link weight must be positive");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(node_count, node_count);
  for (int i = 0; i < node_count; ++i) {
    const int j = (i + 1) % node_count;
    w(i, j) = weight;
    w(j, i) = weight;
  }
  return Network(std::move(w));
}

Network Network::k_hop_cycle(int node_count, int hops, double weight) {
  if (hops < 1) throw std::invalid_argument("hop radius must be >= 1");
  if (node_count <= 2 * hops) {
    throw std::invalid_argument("k-hop cycle needs n >= 2k+1, got n=" +
                                std::to_string(node_count) +
                                " k=" + std::to_string(hops));
  }
  if (weight <= 0.0) throw std::invalid_argument("link weight must be positive");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(node_count, node_count);
  for (int i = 0; i < node_count; ++i) {
    for (int h = 1; h <= hops; ++h) {
      const int j = (i + h) % node_count;
      w(i, j) = weight;
      w(j, i) = weight;
    }
  }
  return Network(std::move(w));
}

int Network::edge_count() const {
  int twice = 0;
  for (const auto& nbrs : neighbors_) twice += static_cast<int>(nbrs.size());
  return twice / 2;
}

bool Network::connected() const {
  if (size() == 0) return false;
  std::vector<char> seen;
  bfs_mark(neighbors_, seen);
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

Eigen::MatrixXd Network::laplacian() const {
  Eigen::MatrixXd l = -weights_;
  for (int i = 0; i < size(); ++i) l(i, i) = weights_.row(i).sum();
  return l;
}

Spectrum spectrum(const Network& net) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(net.laplacian(),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Laplacian eigendecomposition did not converge");
  }
  Spectrum s;
  const auto& ev = solver.eigenvalues();
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
  for (double& v : s.eigenvalues) {
    if (std::abs(v) <= kZeroEigClamp) v = 0.0;
  }
  s.lambdaN = s.eigenvalues.back();
  s.lambda2 = s.eigenvalues.size() > 1 ? s.eigenvalues[1] : 0.0;
  s.connected = s.lambda2 > 0.0;
  return s;
}

bool check_uniform_connectivity(std::span<const Network> nets, int window) {
  if (nets.empty()) throw std::invalid_argument("empty network sequence");
  if (window < 1) throw std::invalid_argument("connectivity window must be >= 1");
  const int n = nets.front().size();
  for (const Network& net : nets) {
    if (net.size() != n) {
      throw std::invalid_argument("networks in a sequence must share the node count");
    }
  }

  const int len = static_cast<int>(nets.size());
  const int positions = std::max(1, len - window + 1);
  for (int start = 0; start < positions; ++start) {
    std::vector<std::vector<int>> adj(n);
    Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(n, n);
    for (int t = start; t < std::min(len, start + window); ++t) {
      merged += nets[t].weights();
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && merged(i, j) > 0.0) adj[i].push_back(j);
      }
    }
    std::vector<char> seen;
    bfs_mark(adj, seen);
    if (!std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; })) {
      return false;
    }
  }
  return true;
}

}  // namespace dra
