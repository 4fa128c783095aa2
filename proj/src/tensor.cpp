#include "drm/tensor.hpp"

#include <cmath>
#include <string>

#include "drm/error.hpp"

namespace drm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonScalarOutput: return "NonScalarOutput";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::NonPositiveRatio: return "NonPositiveRatio";
    case ErrorCode::DegenerateConstraint: return "DegenerateConstraint";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::UnknownShape: return "UnknownShape";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                              " != " + std::to_string(rows_) + "x" +
                                              std::to_string(cols_));
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::ShapeMismatch, "ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

Tensor Tensor::column(std::span<const double> v) {
  return Tensor(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

double Tensor::item() const {
  if (rows_ != 1 || cols_ != 1) {
    throw Error(ErrorCode::NonScalarOutput,
                "item() on " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::gather_rows(std::span<const std::size_t> idx) const {
  Tensor out(idx.size(), cols_);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Tensor Tensor::transposed() const {
  Tensor out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

}  // namespace drm
