#pragma once

// Brute-force vertex enumeration of {z : A z <= b}: every n-subset of rows
// with a nonsingular square system is solved and kept if feasible. Test-only.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace testing_support {

inline void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > m) return;
  for (;;) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::vector<Eigen::VectorXd> enumerate_vertices(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                                       double tol = 1e-9) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  std::vector<Eigen::VectorXd> out;
  for_each_subset(m, n, [&](const std::vector<int>& rows) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      M.row(i) = A.row(rows[i]);
      r(i) = b(rows[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.rank() < n) return;
    const Eigen::VectorXd z = lu.solve(r);
    if (((A * z - b).array() <= tol * (1.0 + b.cwiseAbs().array())).all()) out.push_back(z);
  });
  return out;
}

}  // namespace testing_support
