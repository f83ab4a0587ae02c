#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's filtering or consensus code paths.

#include <Eigen/Dense>
#include <optional>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix triple_loop_product(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

inline bool bfs_connected(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const std::size_t i = q.front();
    q.pop();
    for (std::size_t j = 0; j < n; ++j) {
      if (adj[i][j] && !seen[j]) {
        seen[j] = true;
        ++count;
        q.push(j);
      }
    }
  }
  return count == n;
}

inline Matrix random_spd(int n, std::mt19937_64& rng, double floor = 0.5) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return m * m.transpose() + floor * Matrix::Identity(n, n);
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Vector random_vector(int n, std::mt19937_64& rng) {
  return random_matrix(n, 1, rng);
}

/// Textbook covariance-form Kalman filter.
struct CovarianceKf {
  Vector x;
  Matrix P;

  void correct(const std::vector<Matrix>& Cs, const std::vector<Matrix>& Rs,
               const std::vector<Vector>& ys) {
    for (std::size_t s = 0; s < Cs.size(); ++s) {
      const Matrix& C = Cs[s];
      const Matrix S = C * P * C.transpose() + Rs[s];
      const Matrix K = P * C.transpose() * S.inverse();
      x = x + K * (ys[s] - C * x);
      // Joseph form keeps P symmetric.
      const Matrix I_KC = Matrix::Identity(P.rows(), P.cols()) - K * C;
      P = I_KC * P * I_KC.transpose() + K * Rs[s] * K.transpose();
    }
  }

  void predict(const Matrix& A, const Matrix& Q) {
    x = A * x;
    P = A * P * A.transpose() + Q;
  }
};

/// Original information-weighted consensus filter: every consensus message
/// carries the full (B, b) pair. Written directly from the algorithm
/// description with dense matrices and no entry selection.
class ReferenceIcf {
 public:
  struct Node {
    Matrix omega;
    Vector q;
  };

  ReferenceIcf(int n_nodes, int n, const Matrix& A, const Matrix& Q,
               std::vector<std::vector<int>> neighbors, double eps)
      : A_(A), Q_(Q), neighbors_(std::move(neighbors)), eps_(eps),
        nodes_(static_cast<std::size_t>(n_nodes),
               Node{Matrix::Zero(n, n), Vector::Zero(n)}) {}

  struct Output {
    std::vector<Vector> estimates;
    std::vector<Matrix> posteriors;
  };

  Output step(const std::vector<std::optional<Vector>>& ys, const Matrix& C,
              const Matrix& V, int L) {
    const std::size_t N = nodes_.size();
    const double inv_n = 1.0 / static_cast<double>(N);
    std::vector<Matrix> B(N);
    std::vector<Vector> b(N);
    for (std::size_t i = 0; i < N; ++i) {
      B[i] = nodes_[i].omega * inv_n;
      b[i] = nodes_[i].q * inv_n;
      const Eigen::Index n = B[i].rows();
      Matrix dO = Matrix::Zero(n, n);
      Vector dq = Vector::Zero(n);
      if (ys[i]) {
        const Matrix CtV = C.transpose() * V;
        dO = 0.5 * ((CtV * C) + (CtV * C).transpose());
        dq = CtV * *ys[i];
      }
      B[i] += dO;
      b[i] += dq;
    }
    for (int l = 0; l < L; ++l) {
      std::vector<Matrix> B2(N);
      std::vector<Vector> b2(N);
      for (std::size_t i = 0; i < N; ++i) {
        Matrix sB = Matrix::Zero(B[i].rows(), B[i].cols());
        Vector sb = Vector::Zero(b[i].size());
        for (int j : neighbors_[i]) {
          sB += B[static_cast<std::size_t>(j)] - B[i];
          sb += b[static_cast<std::size_t>(j)] - b[i];
        }
        B2[i] = B[i] + eps_ * sB;
        b2[i] = b[i] + eps_ * sb;
      }
      B = std::move(B2);
      b = std::move(b2);
    }

    Output out;
    for (std::size_t i = 0; i < N; ++i) {
      const Matrix omega_post = 0.5 * ((static_cast<double>(N) * B[i]) +
                                       (static_cast<double>(N) * B[i]).transpose());
      const Vector x = solve(B[i], b[i]);
      out.estimates.push_back(x);
      out.posteriors.push_back(omega_post);
      nodes_[i] = predict(omega_post, x);
    }
    return out;
  }

 private:
  static Vector solve(const Matrix& B, const Vector& b) {
    const Matrix S = 0.5 * (B + B.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    const Vector& d = eig.eigenvalues();
    if (d.minCoeff() >= 1e-10) return S.ldlt().solve(b);
    const double scale = std::max(std::abs(d.minCoeff()), std::abs(d.maxCoeff()));
    const double cut = std::max(1e-10, scale * static_cast<double>(d.size()) *
                                           std::numeric_limits<double>::epsilon());
    Vector inv = Vector::Zero(d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k)
      if (std::abs(d[k]) > cut) inv[k] = 1.0 / d[k];
    return eig.eigenvectors() * inv.asDiagonal() * (eig.eigenvectors().transpose() * b);
  }

  static Matrix inverse(const Matrix& m) {
    Eigen::LDLT<Matrix> ldlt(m);
    if (ldlt.isPositive() && ldlt.vectorD().minCoeff() > 0.0)
      return ldlt.solve(Matrix::Identity(m.rows(), m.cols()));
    return m.fullPivLu().inverse();
  }

  Node predict(const Matrix& omega_post, const Vector& x) const {
    const Eigen::Index n = omega_post.rows();
    Matrix om = omega_post;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(om, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < 1e-10) {
      om += 1e-8 * (1.0 + om.trace() / static_cast<double>(n)) * Matrix::Identity(n, n);
    }
    const Matrix P = inverse(om);
    const Matrix Qs = inverse(0.5 * (inverse(Q_) + inverse(Q_).transpose()));
    Matrix Pn = A_ * P * A_.transpose() + Qs;
    Pn = 0.5 * (Pn + Pn.transpose());
    Matrix omega_next = inverse(Pn);
    omega_next = 0.5 * (omega_next + omega_next.transpose());
    return {omega_next, omega_next * (A_ * x)};
  }

  Matrix A_;
  Matrix Q_;
  std::vector<std::vector<int>> neighbors_;
  double eps_;
  std::vector<Node> nodes_;
};

}  // namespace oracle
