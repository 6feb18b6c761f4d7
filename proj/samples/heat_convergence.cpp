// Heat equation on the unit circle at four resolutions, forward Euler.
#include <cstdio>
#include <vector>

#include "cpmol/cpmol.hpp"

int main() {
  using namespace cpmol;
  const ProblemSpec spec = make_problem(ProblemKind::heat_circle);
  RunSettings rs;
  rs.scheme = Scheme::forward_euler;
  rs.dt_policy = {DtPolicy::Kind::dx2_over_4, 0.0};
  rs.p = 3;

  std::vector<double> dxs, errs;
  std::printf("%8s %12s %12s\n", "dx", "dt", "max_err");
  for (double dx : {0.2, 0.1, 0.05, 0.025}) {
    rs.dx = dx;
    rs.penalty = PenaltyConfig::fixed(4.0 / (dx * dx));
    const ErrorReport r = run_problem(spec, rs);
    std::printf("%8.4f %12.4e %12.4e\n", r.dx, r.dt, r.max_err);
    dxs.push_back(dx);
    errs.push_back(r.max_err);
  }
  std::printf("observed order %.3f\n", convergence_slope(dxs, errs));
}
