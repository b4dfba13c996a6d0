#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace rnncert {

using Vector = std::vector<double>;

/// Dense row-major matrix. Networks here are small (a few hundred neurons),
/// so no sparse or blocked storage is needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    assert(rows >= 0 && cols >= 0);
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::vector<std::vector<double>> rows) {
    if (rows.empty()) return Matrix();
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows(); ++r) {
      assert(static_cast<int>(rows[r].size()) == m.cols());
      for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
  }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline Vector matvec(const Matrix& m, const Vector& v) {
  assert(static_cast<int>(v.size()) == m.cols());
  Vector out(m.rows(), 0.0);
  for (int r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (int c = 0; c < m.cols(); ++c) acc += m(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

inline void add_in_place(Vector& a, const Vector& b) {
  assert(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace rnncert
