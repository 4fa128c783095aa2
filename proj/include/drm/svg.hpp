#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drm::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// One box per group: quartiles, whiskers at min and max. Non-finite values are dropped.
void boxplot(std::ostream& os, const std::string& title, const std::vector<std::string>& labels,
             const std::vector<std::vector<double>>& groups);

void line_chart(std::ostream& os, const std::string& title, const std::vector<Series>& series);

}  // namespace drm::svg
