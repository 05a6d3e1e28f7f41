#pragma once

// Lowest eigenpair of a symmetric subspace Hamiltonian. Small problems go
// through a dense solver; larger ones through a Davidson iteration with a
// diagonal preconditioner and thick restarts. Both paths fix the eigenvector
// sign so the first coefficient above 1e-12 in magnitude is positive.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mpsqd/determinant.hpp"
#include "mpsqd/errors.hpp"
#include "mpsqd/slater_condon.hpp"

namespace mpsqd {

struct EigenResult {
  double energy = 0.0;
  std::vector<double> vector;  // unit norm, canonical sign
  int iterations = 0;
  double residual_norm = 0.0;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iterations = 200;
  int restart_dim = 20;
  int max_subspace = 40;
  int dense_threshold = 2000;
};

namespace detail {

inline void canonical_sign(std::vector<double>& v) {
  for (double c : v) {
    if (std::abs(c) > 1e-12) {
      if (c < 0.0)
        for (double& x : v) x = -x;
      return;
    }
  }
}

inline EigenResult dense_lowest(const SubspaceMatrix& m) {
  const int n = m.dim();
  Eigen::MatrixXd a(n, n);
  a.setZero();
  const auto dense = m.to_dense();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("dense eigensolver failed", std::numeric_limits<double>::infinity());
  EigenResult out;
  out.energy = solver.eigenvalues()(0);
  const auto v = solver.eigenvectors().col(0);
  out.vector.assign(v.data(), v.data() + n);
  out.iterations = 0;
  out.residual_norm = (a * v - out.energy * v).norm();
  canonical_sign(out.vector);
  return out;
}

inline EigenResult davidson_lowest(const SubspaceMatrix& m, const SolverOptions& opt) {
  const int n = m.dim();
  const auto& diag = m.diagonal();

  auto matvec = [&](const Eigen::VectorXd& x) {
    std::vector<double> xin(x.data(), x.data() + n), yout;
    m.apply(xin, yout);
    return Eigen::Map<Eigen::VectorXd>(yout.data(), n).eval();
  };

  // Start from the lowest-diagonal basis vector (the aufbau determinant for
  // a chemistry subspace).
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return diag[static_cast<std::size_t>(a)] < diag[static_cast<std::size_t>(b)]; });

  std::vector<Eigen::VectorXd> basis, sigma;
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n);
  v0(order[0]) = 1.0;
  basis.push_back(v0);
  sigma.push_back(matvec(v0));

  double best_residual = std::numeric_limits<double>::infinity();
  int fallback_idx = 1;

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    const int k = static_cast<int>(basis.size());
    Eigen::MatrixXd t(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j <= i; ++j) {
        t(i, j) = basis[static_cast<std::size_t>(i)].dot(sigma[static_cast<std::size_t>(j)]);
        t(j, i) = t(i, j);
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const double theta = small.eigenvalues()(0);
    const Eigen::VectorXd s = small.eigenvectors().col(0);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd ax = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) {
      x += s(i) * basis[static_cast<std::size_t>(i)];
      ax += s(i) * sigma[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd r = ax - theta * x;
    const double rnorm = r.norm();
    best_residual = std::min(best_residual, rnorm);

    if (rnorm <= opt.tol) {
      EigenResult out;
      out.energy = theta;
      out.vector.assign(x.data(), x.data() + n);
      const double nrm = x.norm();
      for (double& c : out.vector) c /= nrm;
      out.iterations = iter;
      out.residual_norm = rnorm;
      canonical_sign(out.vector);
      return out;
    }

    // Thick restart: keep the leading Ritz vectors.
    if (k >= opt.max_subspace) {
      const int keep = std::min(opt.restart_dim, k);
      std::vector<Eigen::VectorXd> nb, ns;
      for (int c = 0; c < keep; ++c) {
        Eigen::VectorXd vb = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd vs = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < k; ++i) {
          vb += small.eigenvectors()(i, c) * basis[static_cast<std::size_t>(i)];
          vs += small.eigenvectors()(i, c) * sigma[static_cast<std::size_t>(i)];
        }
        nb.push_back(std::move(vb));
        ns.push_back(std::move(vs));
      }
      basis = std::move(nb);
      sigma = std::move(ns);
    }

    // Diagonal preconditioner with a clamped denominator.
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
      double d = theta - diag[static_cast<std::size_t>(i)];
      if (std::abs(d) < 1e-8) d = d < 0 ? -1e-8 : 1e-8;
      w(i) = r(i) / d;
    }

    // Orthogonalize twice against the current basis. Collapse is judged
    // relative to the pre-orthogonalization norm: a small correction near
    // convergence is fine as long as its direction is new.
    const double wn0 = w.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    double wn = w.norm();
    if (wn < 1e-10 * wn0 || wn == 0.0) {
      // Stagnated correction: inject the next-lowest diagonal unit vector.
      while (fallback_idx < n) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        u(order[static_cast<std::size_t>(fallback_idx++)]) = 1.0;
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& b : basis) u -= b.dot(u) * b;
        if (u.norm() > 1e-6) {
          w = u;
          wn = w.norm();
          break;
        }
      }
      if (wn < 1e-10 * wn0 || wn == 0.0) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "davidson stagnated with residual %.3e", best_residual);
        throw ConvergenceError(msg, best_residual);
      }
    }
    w /= wn;
    basis.push_back(w);
    sigma.push_back(matvec(w));
  }
  char msg[128];
  std::snprintf(msg, sizeof msg, "davidson failed to converge in %d iterations; best residual %.3e",
                opt.max_iterations, best_residual);
  throw ConvergenceError(msg, best_residual);
}

}  // namespace detail

inline EigenResult lowest_eigenpair(const SubspaceMatrix& m,
                                    const SolverOptions& opt = {}) {
  if (m.dim() < 1) throw InputError("lowest_eigenpair: empty matrix");
  if (m.dim() <= opt.dense_threshold) return detail::dense_lowest(m);
  return detail::davidson_lowest(m, opt);
}

struct FciResult {
  double energy = 0.0;
  std::vector<std::pair<Determinant, double>> amplitudes;  // basis order
};

inline constexpr std::uint64_t kFciCapacity = 1'000'000;

// Full diagonalization in the (n_alpha, n_beta) sector of the Hamiltonian.
inline FciResult fci_ground_state(const FermionHamiltonian& ham,
                                  const SolverOptions& opt = {}) {
  const std::uint64_t dim = binomial(ham.norb(), ham.n_alpha()) *
                            binomial(ham.norb(), ham.n_beta());
  if (dim == 0) throw InputError("fci_ground_state: empty sector");
  if (dim > kFciCapacity)
    throw CapacityError("fci_ground_state: sector dimension " + std::to_string(dim) +
                        " exceeds capacity " + std::to_string(kFciCapacity));
  const auto basis = sector_basis(ham.norb(), ham.n_alpha(), ham.n_beta());
  const auto matrix = project_hamiltonian(ham, basis);
  const auto eig = lowest_eigenpair(matrix, opt);
  FciResult out;
  out.energy = eig.energy;
  out.amplitudes.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    out.amplitudes.push_back({basis[i], eig.vector[i]});
  return out;
}

}  // namespace mpsqd
