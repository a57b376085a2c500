#pragma once

#include <functional>
#include <vector>

namespace svl {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_intervals = 400000;
};

// Globally adaptive Gauss-Kronrod 15(7) over the panels delimited by `knots`
// (ascending; at least two entries). The panel with the largest error
// estimate is bisected until the accumulated error meets
// max(abs_tol, rel_tol * |integral|). Throws svl::Error if the interval
// budget runs out first.
double integrate_adaptive(const std::function<double(double)>& f,
                          const std::vector<double>& knots,
                          const QuadratureOptions& options = {});

inline double integrate_adaptive(const std::function<double(double)>& f, double a,
                                 double b, const QuadratureOptions& options = {}) {
  return integrate_adaptive(f, std::vector<double>{a, b}, options);
}

// Panel edges 'a + width*{0,1,4,16,...}' and mirrored at b, for integrands
// peaked at both endpoints; pass the result as `knots`.
std::vector<double> peak_refined_knots(double a, double b, double peak_width);

}  // namespace svl
