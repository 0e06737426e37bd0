#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stkrr/error.hpp"

namespace stkrr {

enum class KernelKind { Gaussian, Sobolev1 };

/// Closed interval [lo, hi] on which a kernel is evaluated.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  [[nodiscard]] bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Which kernel to use, its bandwidth (Gaussian only) and its domain.
///
/// Gaussian:  k(s,t) = exp(-(s-t)^2 / (2 b^2))
/// Sobolev-1: k(s,t) = min(s,t), PSD only on the nonnegative half line.
class KernelSpec {
public:
  static KernelSpec gaussian(double bandwidth, Interval domain = {-1.0, 1.0}) {
    return KernelSpec(KernelKind::Gaussian, bandwidth, domain);
  }

  static KernelSpec sobolev1(Interval domain = {0.0, 1.0}) {
    return KernelSpec(KernelKind::Sobolev1, 0.0, domain);
  }

  [[nodiscard]] KernelKind kind() const { return kind_; }
  [[nodiscard]] double bandwidth() const { return bandwidth_; }
  [[nodiscard]] const Interval& domain() const { return domain_; }

  /// Evaluates k(s,t). Throws DomainError if either point is outside the domain.
  [[nodiscard]] double operator()(double s, double t) const {
    if (!domain_.contains(s) || !domain_.contains(t)) {
      throw DomainError("kernel argument outside domain [" + std::to_string(domain_.lo) + ", " +
                        std::to_string(domain_.hi) + "]");
    }
    switch (kind_) {
      case KernelKind::Gaussian: {
        const double d = s - t;
        return std::exp(-(d * d) / (2.0 * bandwidth_ * bandwidth_));
      }
      case KernelKind::Sobolev1:
        return std::min(s, t);
    }
    return 0.0;
  }

private:
  KernelSpec(KernelKind kind, double bandwidth, Interval domain)
      : kind_(kind), bandwidth_(bandwidth), domain_(domain) {
    if (!(domain.lo < domain.hi)) {
      throw ArgumentError("kernel domain must satisfy lo < hi");
    }
    if (kind == KernelKind::Gaussian && !(bandwidth > 0.0)) {
      throw ArgumentError("Gaussian bandwidth must be positive");
    }
    if (kind == KernelKind::Sobolev1 && domain.lo < 0.0) {
      throw ArgumentError("Sobolev-1 kernel min(s,t) requires a nonnegative domain");
    }
  }

  KernelKind kind_;
  double bandwidth_;
  Interval domain_;
};

/// Anything callable as k(s, t) -> double can back a kernel matrix.
template <class K>
concept KernelFunction = requires(const K& k, double s, double t) {
  { k(s, t) } -> std::convertible_to<double>;
};

inline double eval_kernel(const KernelSpec& spec, double s, double t) { return spec(s, t); }

enum class DesignScheme {
  EquispacedClosed,    // a + (b-a)(i-1)/(n-1), i = 1..n
  EquispacedOpenLeft,  // a + (b-a) i/n,         i = 1..n
};

/// Default grid for a kernel: open-left for Sobolev-1 (x = 0 gives a zero row),
/// closed otherwise.
inline DesignScheme default_scheme(const KernelSpec& spec) {
  return spec.kind() == KernelKind::Sobolev1 ? DesignScheme::EquispacedOpenLeft
                                             : DesignScheme::EquispacedClosed;
}

/// Fixed design covariates, strictly increasing.
class DesignPoints {
public:
  explicit DesignPoints(std::vector<double> x) : x_(std::move(x)) {
    if (x_.empty()) throw ArgumentError("design must contain at least one point");
    for (std::size_t i = 1; i < x_.size(); ++i) {
      if (!(x_[i] > x_[i - 1])) throw ArgumentError("design points must be strictly increasing");
    }
  }

  [[nodiscard]] std::size_t size() const { return x_.size(); }
  [[nodiscard]] const std::vector<double>& points() const { return x_; }
  [[nodiscard]] double operator[](std::size_t i) const { return x_[i]; }

private:
  std::vector<double> x_;
};

inline DesignPoints make_design(const Interval& domain, std::size_t n, DesignScheme scheme) {
  if (n < 2) throw ArgumentError("make_design requires n >= 2");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = scheme == DesignScheme::EquispacedClosed
                         ? static_cast<double>(i) / static_cast<double>(n - 1)
                         : static_cast<double>(i + 1) / static_cast<double>(n);
    // Convex combination keeps both endpoints exact.
    x[i] = domain.lo * (1.0 - t) + domain.hi * t;
  }
  return DesignPoints(std::move(x));
}

inline DesignPoints make_design(const KernelSpec& spec, std::size_t n, DesignScheme scheme) {
  return make_design(spec.domain(), n, scheme);
}

/// Normalized empirical kernel matrix K = (1/n) (k(x_i, x_j)), stored dense.
class KernelMatrix {
public:
  /// Wraps an existing matrix; it must be square and symmetric to 1e-12 relative.
  explicit KernelMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
      throw ArgumentError("kernel matrix must be square and non-empty");
    }
    const double scale = std::max(entries_.cwiseAbs().maxCoeff(), 1e-300);
    if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw ArgumentError("kernel matrix is not symmetric");
    }
  }

  [[nodiscard]] Eigen::Index n() const { return entries_.rows(); }
  [[nodiscard]] const Eigen::MatrixXd& entries() const { return entries_; }

private:
  Eigen::MatrixXd entries_;
};

template <KernelFunction Kernel>
KernelMatrix kernel_matrix(const Kernel& kernel, const DesignPoints& design) {
  const auto n = static_cast<Eigen::Index>(design.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = static_cast<double>(kernel(design[i], design[j])) * inv_n;
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return KernelMatrix(std::move(k));
}

}  // namespace stkrr
