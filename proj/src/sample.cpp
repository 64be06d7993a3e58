#include "lbkde/sample.hpp"

#include "lbkde/error.hpp"

namespace lbkde {

Sample::Sample(Eigen::ArrayXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw DomainError("sample must contain at least one observation");
  if (!values_.isFinite().all() || (values_ <= 0.0).any())
    throw DomainError("sample values must be finite and strictly positive");
}

Sample::Sample(const std::vector<double> &values)
    : Sample(Eigen::ArrayXd(Eigen::Map<const Eigen::ArrayXd>(values.data(), static_cast<Eigen::Index>(values.size())))) {}

} // namespace lbkde
