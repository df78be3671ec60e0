#ifndef PAIRSHAP_LINALG_HPP
#define PAIRSHAP_LINALG_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pairshap::linalg {

using Vector = std::vector<double>;

// Tolerances that form part of the numerical contract.
inline constexpr double kSymmetrySolveTol = 1e-12;   // relative, solve_spd
inline constexpr double kSymmetryEigTol = 1e-10;     // relative, eig_sym
inline constexpr double kPivotTol = 1e-12;           // x max initial diagonal
inline constexpr double kJacobiOffDiagTol = 1e-14;   // x ||A||_F
inline constexpr int kJacobiMaxSweeps = 100;

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  std::vector<Vector> to_rows() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

// a += w * x x'
void add_outer(Matrix& a, std::span<const double> x, double w);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs(std::span<const double> x);
double trace(const Matrix& a);
bool is_symmetric(const Matrix& a, double rel_tol);
// (A + A') / 2
Matrix symmetrized(const Matrix& a);

// Solves A x = b for symmetric A by Gaussian elimination with partial
// pivoting. Throws SingularMatrix when a pivot falls below
// kPivotTol * max initial |diagonal|.
Vector solve_spd(const Matrix& a, std::span<const double> b);
// Column-by-column solve, A X = B.
Matrix solve_spd(const Matrix& a, const Matrix& b);

// J^{-1} M J^{-1} for symmetric J and M, via two solves.
Matrix sandwich(const Matrix& j, const Matrix& m);

// Least squares through the normal equations (Z'Z) x = Z'y.
Vector least_squares(const Matrix& design, std::span<const double> response);

struct EigenDecomposition {
  Vector values;    // descending
  Matrix vectors;   // column i pairs with values[i]
};

// Cyclic Jacobi rotations. Throws NoConvergence after kJacobiMaxSweeps.
EigenDecomposition eig_sym(const Matrix& a);

// Numerical rank by Gaussian elimination with complete pivoting; pivots below
// tol * (largest initial pivot) count as zero.
std::size_t rank(const Matrix& a, double tol);

}  // namespace pairshap::linalg

#endif  // PAIRSHAP_LINALG_HPP
