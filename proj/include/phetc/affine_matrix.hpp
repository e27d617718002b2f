#pragma once

#include <Eigen/Dense>

#include <vector>

namespace phetc {

/// Matrix-valued affine map of a decision vector,
///   F(x) = F0 + sum_i x_i F_i.
class AffineMatrix {
 public:
  using Mat = Eigen::MatrixXd;
  using Vec = Eigen::VectorXd;

  AffineMatrix() = default;
  AffineMatrix(Eigen::Index rows, Eigen::Index cols, Eigen::Index numVars);

  static AffineMatrix constant(const Mat& value, Eigen::Index numVars);
  /// Symmetric k x k matrix variable occupying k(k+1)/2 consecutive entries
  /// of x starting at offset (row-major upper triangle).
  static AffineMatrix symmetricVariable(Eigen::Index offset, Eigen::Index k,
                                        Eigen::Index numVars);

  /// 2-D block assembly; blocks in a row share a row count, blocks in a
  /// column share a column count.
  static AffineMatrix blocks(const std::vector<std::vector<AffineMatrix>>& grid);

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }
  Eigen::Index numVars() const { return static_cast<Eigen::Index>(coefficients_.size()); }

  const Mat& constantTerm() const { return constant_; }
  const Mat& coefficient(Eigen::Index i) const { return coefficients_[static_cast<std::size_t>(i)]; }

  Mat evaluate(const Vec& x) const;
  AffineMatrix transpose() const;
  /// (F + F^T) / 2
  AffineMatrix symmetrized() const;

  AffineMatrix& operator+=(const AffineMatrix& other);
  AffineMatrix& operator-=(const AffineMatrix& other);
  AffineMatrix& operator+=(const Mat& c);
  AffineMatrix& operator-=(const Mat& c);
  AffineMatrix& operator*=(double s);

  friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
  friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
  friend AffineMatrix operator+(AffineMatrix a, const Mat& c) { return a += c; }
  friend AffineMatrix operator-(AffineMatrix a, const Mat& c) { return a -= c; }
  friend AffineMatrix operator*(double s, AffineMatrix a) { return a *= s; }
  friend AffineMatrix operator-(AffineMatrix a) { return a *= -1.0; }
  friend AffineMatrix operator*(const Mat& left, const AffineMatrix& a);
  friend AffineMatrix operator*(const AffineMatrix& a, const Mat& right);

 private:
  Mat constant_;
  std::vector<Mat> coefficients_;
};

/// Number of free entries of a symmetric k x k matrix.
constexpr Eigen::Index sym_size(Eigen::Index k) { return k * (k + 1) / 2; }

/// Writes a symmetric matrix into its k(k+1)/2 slots of x.
void pack_symmetric(const Eigen::MatrixXd& S, Eigen::Index offset, Eigen::VectorXd& x);
Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& x, Eigen::Index offset, Eigen::Index k);

}  // namespace phetc
