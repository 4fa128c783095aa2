#include "drm/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "drm/error.hpp"

namespace drm::kernels {
namespace {

// Below this many multiply-adds the fork/join costs more than it saves.
constexpr long kParallelWork = 1L << 15;

void check_inner(std::size_t lhs, std::size_t rhs, const char* what) {
  if (lhs != rhs) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": inner dimensions " +
                                              std::to_string(lhs) + " vs " + std::to_string(rhs));
  }
}

inline double sq_dist(const double* x, const double* y, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = x[k] - y[k];
    s += diff * diff;
  }
  return s;
}

inline double kde_norm(std::size_t d, double h) {
  return std::pow(2.0 * std::numbers::pi * h * h, 0.5 * static_cast<double>(d));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  const long n = static_cast<long>(a.rows());
  const std::size_t inner = a.cols(), m = b.cols();
  Tensor c(a.rows(), m);
  const long work = n * static_cast<long>(inner * m);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    double* crow = &c(i, 0);
    const double* arow = &a(i, 0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      const double* brow = &b(k, 0);
      for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  const long n = static_cast<long>(a.cols());
  const std::size_t inner = a.rows(), m = b.cols();
  Tensor c(a.cols(), m);
  const long work = n * static_cast<long>(inner * m);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    double* crow = &c(i, 0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double aki = a(k, i);
      const double* brow = &b(k, 0);
      for (std::size_t j = 0; j < m; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  const long n = static_cast<long>(a.rows());
  const std::size_t inner = a.cols(), m = b.rows();
  Tensor c(a.rows(), m);
  const long work = n * static_cast<long>(inner * m);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    const double* arow = &a(i, 0);
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = &b(j, 0);
      double s = 0.0;
      for (std::size_t k = 0; k < inner; ++k) s += arow[k] * brow[k];
      c(i, j) = s;
    }
  }
  return c;
}

Tensor gaussian_kernel(const Tensor& a, const Tensor& b, double sigma) {
  check_inner(a.cols(), b.cols(), "gaussian_kernel");
  const long n = static_cast<long>(a.rows());
  const std::size_t m = b.rows(), d = a.cols();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Tensor k(a.rows(), m);
  const long work = n * static_cast<long>(m * (d + 8));
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) k(i, j) = std::exp(-sq_dist(&a(i, 0), &b(j, 0), d) * scale);
  }
  return k;
}

double gaussian_kernel_mean(const Tensor& a, const Tensor& b, double sigma) {
  check_inner(a.cols(), b.cols(), "gaussian_kernel_mean");
  const long n = static_cast<long>(a.rows());
  const std::size_t m = b.rows(), d = a.cols();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> row_sums(a.rows(), 0.0);
  const long work = n * static_cast<long>(m * (d + 8));
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::exp(-sq_dist(&a(i, 0), &b(j, 0), d) * scale);
    row_sums[i] = s;
  }
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total / (static_cast<double>(a.rows()) * static_cast<double>(m));
}

std::vector<double> pairwise_distances(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.cols(), "pairwise_distances");
  const long n = static_cast<long>(a.rows());
  const std::size_t m = b.rows(), d = a.cols();
  std::vector<double> out(a.rows() * m);
  const long work = n * static_cast<long>(m * (d + 4));
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      out[static_cast<std::size_t>(i) * m + j] = std::sqrt(sq_dist(&a(i, 0), &b(j, 0), d));
  }
  return out;
}

std::vector<double> kde_log_density(const Tensor& points, const Tensor& queries, double h,
                                    double floor) {
  check_inner(points.cols(), queries.cols(), "kde_log_density");
  const long nq = static_cast<long>(queries.rows());
  const std::size_t np = points.rows(), d = points.cols();
  const double scale = 1.0 / (2.0 * h * h);
  const double norm = kde_norm(d, h) * static_cast<double>(np);
  std::vector<double> out(queries.rows());
  const long work = nq * static_cast<long>(np * (d + 8));
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long i = 0; i < nq; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < np; ++j) s += std::exp(-sq_dist(&queries(i, 0), &points(j, 0), d) * scale);
    const double dens = s / norm;
    out[i] = std::log(dens < floor ? floor : dens);
  }
  return out;
}

namespace serial {

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Tensor c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  Tensor c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  Tensor c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

Tensor gaussian_kernel(const Tensor& a, const Tensor& b, double sigma) {
  check_inner(a.cols(), b.cols(), "gaussian_kernel");
  Tensor k(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      k(i, j) = std::exp(-sq_dist(&a(i, 0), &b(j, 0), a.cols()) * (1.0 / (2.0 * sigma * sigma)));
  return k;
}

double gaussian_kernel_mean(const Tensor& a, const Tensor& b, double sigma) {
  check_inner(a.cols(), b.cols(), "gaussian_kernel_mean");
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < b.rows(); ++j)
      s += std::exp(-sq_dist(&a(i, 0), &b(j, 0), a.cols()) * (1.0 / (2.0 * sigma * sigma)));
    total += s;
  }
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

std::vector<double> pairwise_distances(const Tensor& a, const Tensor& b) {
  check_inner(a.cols(), b.cols(), "pairwise_distances");
  std::vector<double> out;
  out.reserve(a.rows() * b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      out.push_back(std::sqrt(sq_dist(&a(i, 0), &b(j, 0), a.cols())));
  return out;
}

std::vector<double> kde_log_density(const Tensor& points, const Tensor& queries, double h,
                                    double floor) {
  check_inner(points.cols(), queries.cols(), "kde_log_density");
  std::vector<double> out;
  out.reserve(queries.rows());
  const double norm = kde_norm(points.cols(), h) * static_cast<double>(points.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < points.rows(); ++j)
      s += std::exp(-sq_dist(&queries(i, 0), &points(j, 0), points.cols()) * (1.0 / (2.0 * h * h)));
    const double dens = s / norm;
    out.push_back(std::log(dens < floor ? floor : dens));
  }
  return out;
}

}  // namespace serial
}  // namespace drm::kernels
