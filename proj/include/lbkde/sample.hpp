#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace lbkde {

/// Observations Y_1..Y_n, all strictly positive.
class Sample {
public:
  /// Throws DomainError when empty or when any value is <= 0 or non-finite.
  explicit Sample(Eigen::ArrayXd values);
  explicit Sample(const std::vector<double> &values);

  const Eigen::ArrayXd &values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

private:
  Eigen::ArrayXd values_;
};

} // namespace lbkde
