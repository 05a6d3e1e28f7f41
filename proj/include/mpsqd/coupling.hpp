#pragma once

// Device connectivity graphs and the heavy-hex generator.
//
// heavy_hex_map(rows, cols) builds `rows` horizontal chains of `cols` qubits
// joined by bridge qubits on alternating columns: between rows r and r+1 the
// bridges sit at columns c % 4 == 0 for even r and c % 4 == 2 for odd r, so
// every qubit has degree <= 3. Qubit ids: row qubits first in row-major
// order (r*cols + c), bridge qubits appended sorted by (row pair, column).
// (1, k) degenerates to a k-qubit path. rows >= 3 requires cols >= 3, or the
// odd-row bridges would not exist and the tiling would disconnect.

#include <algorithm>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "mpsqd/errors.hpp"

namespace mpsqd {

class CouplingMap {
 public:
  CouplingMap() = default;
  explicit CouplingMap(int num_qubits) : adj_(static_cast<std::size_t>(num_qubits)) {
    if (num_qubits < 1) throw InputError("coupling map needs at least one qubit");
    faulty_.assign(static_cast<std::size_t>(num_qubits), 0);
  }

  int num_qubits() const { return static_cast<int>(adj_.size()); }

  void add_edge(int u, int v) {
    check_qubit(u);
    check_qubit(v);
    if (u == v) throw InputError("self-loop edge");
    auto& au = adj_[static_cast<std::size_t>(u)];
    if (std::find(au.begin(), au.end(), v) != au.end())
      throw InputError("duplicate edge");
    au.push_back(v);
    adj_[static_cast<std::size_t>(v)].push_back(u);
    edges_.push_back({std::min(u, v), std::max(u, v)});
  }

  void mark_faulty(int q) {
    check_qubit(q);
    faulty_[static_cast<std::size_t>(q)] = 1;
  }

  bool is_faulty(int q) const {
    check_qubit(q);
    return faulty_[static_cast<std::size_t>(q)] != 0;
  }

  const std::vector<int>& neighbors(int q) const {
    check_qubit(q);
    return adj_[static_cast<std::size_t>(q)];
  }

  int degree(int q) const { return static_cast<int>(neighbors(q).size()); }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  void check_qubit(int q) const {
    if (q < 0 || q >= num_qubits())
      throw InputError("qubit id " + std::to_string(q) + " out of range");
  }

 private:
  std::vector<std::vector<int>> adj_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<char> faulty_;
};

// Hop count between two qubits; -1 when disconnected. Faulty qubits still
// carry distance (faults constrain placement, not geometry).
inline int graph_distance(const CouplingMap& map, int a, int b) {
  map.check_qubit(a);
  map.check_qubit(b);
  if (a == b) return 0;
  std::vector<int> dist(static_cast<std::size_t>(map.num_qubits()), -1);
  std::deque<int> queue{a};
  dist[static_cast<std::size_t>(a)] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : map.neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] >= 0) continue;
      dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
      if (v == b) return dist[static_cast<std::size_t>(v)];
      queue.push_back(v);
    }
  }
  return -1;
}

inline CouplingMap heavy_hex_map(int rows, int cols) {
  if (rows < 1 || cols < 2) throw InputError("heavy_hex_map: rows >= 1 and cols >= 2 required");
  if (rows >= 3 && cols < 3)
    throw InputError("heavy_hex_map: rows >= 3 requires cols >= 3 to stay connected");

  struct Bridge {
    int row;  // joins rows row and row+1
    int col;
  };
  std::vector<Bridge> bridges;
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = r % 2 == 0 ? 0 : 2; c < cols; c += 4) bridges.push_back({r, c});

  CouplingMap map(rows * cols + static_cast<int>(bridges.size()));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) map.add_edge(r * cols + c, r * cols + c + 1);
  for (std::size_t i = 0; i < bridges.size(); ++i) {
    const int id = rows * cols + static_cast<int>(i);
    map.add_edge(id, bridges[i].row * cols + bridges[i].col);
    map.add_edge(id, (bridges[i].row + 1) * cols + bridges[i].col);
  }
  return map;
}

}  // namespace mpsqd
