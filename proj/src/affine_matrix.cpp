#include "phetc/affine_matrix.hpp"

#include "phetc/errors.hpp"

namespace phetc {

AffineMatrix::AffineMatrix(Eigen::Index rows, Eigen::Index cols, Eigen::Index numVars)
    : constant_(Mat::Zero(rows, cols)),
      coefficients_(static_cast<std::size_t>(numVars), Mat::Zero(rows, cols)) {}

AffineMatrix AffineMatrix::constant(const Mat& value, Eigen::Index numVars) {
  AffineMatrix out(value.rows(), value.cols(), numVars);
  out.constant_ = value;
  return out;
}

AffineMatrix AffineMatrix::symmetricVariable(Eigen::Index offset, Eigen::Index k,
                                             Eigen::Index numVars) {
  if (offset + sym_size(k) > numVars) throw DimensionMismatch("variable block exceeds x");
  AffineMatrix out(k, k, numVars);
  Eigen::Index slot = offset;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j, ++slot) {
      Mat& c = out.coefficients_[static_cast<std::size_t>(slot)];
      c(i, j) = 1.0;
      c(j, i) = 1.0;
    }
  }
  return out;
}

AffineMatrix AffineMatrix::blocks(const std::vector<std::vector<AffineMatrix>>& grid) {
  if (grid.empty() || grid.front().empty()) throw DimensionMismatch("empty block grid");
  const std::size_t br = grid.size(), bc = grid.front().size();
  const Eigen::Index nv = grid.front().front().numVars();
  std::vector<Eigen::Index> rowSizes(br), colSizes(bc);
  for (std::size_t i = 0; i < br; ++i) {
    if (grid[i].size() != bc) throw DimensionMismatch("ragged block grid");
    rowSizes[i] = grid[i][0].rows();
  }
  for (std::size_t j = 0; j < bc; ++j) colSizes[j] = grid[0][j].cols();

  Eigen::Index totalRows = 0, totalCols = 0;
  for (auto r : rowSizes) totalRows += r;
  for (auto c : colSizes) totalCols += c;
  AffineMatrix out(totalRows, totalCols, nv);

  Eigen::Index r0 = 0;
  for (std::size_t i = 0; i < br; ++i) {
    Eigen::Index c0 = 0;
    for (std::size_t j = 0; j < bc; ++j) {
      const AffineMatrix& b = grid[i][j];
      if (b.rows() != rowSizes[i] || b.cols() != colSizes[j] || b.numVars() != nv) {
        throw DimensionMismatch("block sizes are inconsistent");
      }
      out.constant_.block(r0, c0, b.rows(), b.cols()) = b.constant_;
      for (std::size_t v = 0; v < out.coefficients_.size(); ++v) {
        out.coefficients_[v].block(r0, c0, b.rows(), b.cols()) = b.coefficients_[v];
      }
      c0 += colSizes[j];
    }
    r0 += rowSizes[i];
  }
  return out;
}

AffineMatrix::Mat AffineMatrix::evaluate(const Vec& x) const {
  if (x.size() != numVars()) throw DimensionMismatch("decision vector has the wrong size");
  Mat value = constant_;
  for (std::size_t v = 0; v < coefficients_.size(); ++v) {
    const double xv = x(static_cast<Eigen::Index>(v));
    if (xv != 0.0) value += xv * coefficients_[v];
  }
  return value;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out;
  out.constant_ = constant_.transpose();
  out.coefficients_.reserve(coefficients_.size());
  for (const auto& c : coefficients_) out.coefficients_.push_back(c.transpose());
  return out;
}

AffineMatrix AffineMatrix::symmetrized() const {
  AffineMatrix out = *this;
  out += transpose();
  out *= 0.5;
  return out;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
  if (rows() != other.rows() || cols() != other.cols() || numVars() != other.numVars()) {
    throw DimensionMismatch("affine matrix shapes differ");
  }
  constant_ += other.constant_;
  for (std::size_t v = 0; v < coefficients_.size(); ++v) coefficients_[v] += other.coefficients_[v];
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) {
  if (rows() != other.rows() || cols() != other.cols() || numVars() != other.numVars()) {
    throw DimensionMismatch("affine matrix shapes differ");
  }
  constant_ -= other.constant_;
  for (std::size_t v = 0; v < coefficients_.size(); ++v) coefficients_[v] -= other.coefficients_[v];
  return *this;
}

AffineMatrix& AffineMatrix::operator+=(const Mat& c) {
  if (rows() != c.rows() || cols() != c.cols()) throw DimensionMismatch("constant shape differs");
  constant_ += c;
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const Mat& c) {
  if (rows() != c.rows() || cols() != c.cols()) throw DimensionMismatch("constant shape differs");
  constant_ -= c;
  return *this;
}

AffineMatrix& AffineMatrix::operator*=(double s) {
  constant_ *= s;
  for (auto& c : coefficients_) c *= s;
  return *this;
}

AffineMatrix operator*(const AffineMatrix::Mat& left, const AffineMatrix& a) {
  if (left.cols() != a.rows()) throw DimensionMismatch("left factor does not conform");
  AffineMatrix out;
  out.constant_ = left * a.constant_;
  out.coefficients_.reserve(a.coefficients_.size());
  for (const auto& c : a.coefficients_) out.coefficients_.push_back(left * c);
  return out;
}

AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix::Mat& right) {
  if (a.cols() != right.rows()) throw DimensionMismatch("right factor does not conform");
  AffineMatrix out;
  out.constant_ = a.constant_ * right;
  out.coefficients_.reserve(a.coefficients_.size());
  for (const auto& c : a.coefficients_) out.coefficients_.push_back(c * right);
  return out;
}

void pack_symmetric(const Eigen::MatrixXd& S, Eigen::Index offset, Eigen::VectorXd& x) {
  Eigen::Index slot = offset;
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    for (Eigen::Index j = i; j < S.cols(); ++j) x(slot++) = 0.5 * (S(i, j) + S(j, i));
  }
}

Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& x, Eigen::Index offset, Eigen::Index k) {
  Eigen::MatrixXd S(k, k);
  Eigen::Index slot = offset;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      S(i, j) = x(slot);
      S(j, i) = x(slot);
      ++slot;
    }
  }
  return S;
}

}  // namespace phetc
