#pragma once

#include "pam/forward_operator.hpp"
#include "pam/geometry.hpp"
#include "pam/tensor.hpp"

namespace pam {

/// Time-exposure acoustics: X[n] = sum_k (sum_m y_m[k + delta_{m,n} - 1])^2 over valid samples.
/// Unweighted and unnormalized; the per-pixel delayed sum is exactly A^T y.
PowerMap td_das(const RfFrame& y, const DelayTable& table, const GridSpec& grid);
PowerMap td_das(const RfFrame& y, const DelayOperator& op);

}  // namespace pam
