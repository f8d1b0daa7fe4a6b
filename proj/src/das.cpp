#include "pam/das.hpp"

#include <algorithm>
#include <vector>

#include "pam/error.hpp"

namespace pam {

PowerMap td_das(const RfFrame& y, const DelayTable& table, const GridSpec& grid) {
  if (y.num_sensors() != table.num_sensors) throw InvalidInput("td_das: sensor count mismatch");
  if (table.num_pixels != grid.num_pixels()) throw InvalidInput("td_das: table/grid size mismatch");
  if (table.delays.size() != table.num_sensors * table.num_pixels) throw InvalidInput("td_das: malformed table");
  if (std::any_of(table.delays.begin(), table.delays.end(), [](std::int64_t d) { return d < 1; })) {
    throw InvalidInput("td_das: delays must be >= 1");
  }
  const std::size_t nt = y.nt();
  const auto snt = static_cast<std::int64_t>(nt);
  PowerMap map(grid);

#pragma omp parallel
  {
    std::vector<double> sum(nt);
#pragma omp for schedule(static)
    for (std::size_t n = 0; n < table.num_pixels; ++n) {
      std::fill(sum.begin(), sum.end(), 0.0);
      for (std::size_t m = 0; m < table.num_sensors; ++m) {
        const std::int64_t shift = table.at(m, n) - 1;
        const std::int64_t len = snt - shift;
        const auto tr = y.trace(m);
        for (std::int64_t k = 0; k < len; ++k) sum[static_cast<std::size_t>(k)] += tr[static_cast<std::size_t>(k + shift)];
      }
      double p = 0.0;
      for (double v : sum) p += v * v;
      map.values[n] = p;
    }
  }
  return map;
}

PowerMap td_das(const RfFrame& y, const DelayOperator& op) {
  if (y.nt() != op.num_samples()) throw InvalidInput("td_das: sample count mismatch");
  return td_das(y, op.table(), op.grid());
}

}  // namespace pam
