#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace dra {

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

// Undirected weighted communication graph of energy nodes.
//
// The weight matrix is symmetric with zero diagonal; W_ij > 0 iff the link
// {i,j} exists. Immutable after construction, so instances can be shared
// freely across threads running independent scenarios.
class Network {
 public:
  Network() : weights_(0, 0) {}  // empty placeholder; populate via factories

  // Validates symmetry (exact), non-negativity and zero diagonal.
  static Network from_weights(Eigen::MatrixXd weights);
  static Network from_edges(int node_count, std::span<const Edge> edges);

  // Ring of n >= 3 nodes, every node of degree 2.
  static Network cycle(int node_count, double weight);

  // Each node linked to its `hops` nearest neighbours on each side of the
  // ring (degree 2*hops). Requires node_count >= 2*hops + 1.
  static Network k_hop_cycle(int node_count, int hops, double weight);

  int size() const { return static_cast<int>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  int degree(int node) const { return static_cast<int>(neighbors_[node].size()); }
  int edge_count() const;

  bool connected() const;

  // L = D - W with D = diag(row sums). Symmetric positive semi-definite.
  Eigen::MatrixXd laplacian() const;

 private:
  explicit Network(Eigen::MatrixXd weights);

  Eigen::MatrixXd weights_;
  std::vector<std::vector<int>> neighbors_;
};

// Laplacian eigenvalues sorted ascending. lambda2 (algebraic connectivity)
// and lambdaN enter the step-rate bound.
struct Spectrum {
  std::vector<double> eigenvalues;
  double lambda2 = 0.0;
  double lambdaN = 0.0;
  bool connected = false;
};

// Dense symmetric eigendecomposition; eigenvalues within [-1e-10, 1e-10]
// are clamped to zero before lambda2 is read off.
Spectrum spectrum(const Network& net);

// True iff the union graph over every sliding window of `window` consecutive
// snapshots is connected. A sequence shorter than the window is treated as a
// single window.
bool check_uniform_connectivity(std::span<const Network> nets, int window);

}  // namespace dra
