#include <cstdio>

#include "cpmol/cpmol.hpp"

// Diffusion with a = 1/(1+|kappa|) on an ellipse, compared against the
// arclength solver on the curve itself.
int main() {
  using namespace cpmol;
  const ProblemSpec spec = make_problem(ProblemKind::curvdiff_ellipse);
  const CurveSolution ref = curvature_diffusion_reference(spec.surface, 0.5);
  std::printf("reference: %zu points, %zu steps\n", ref.s.size(), ref.steps);

  RunSettings rs;
  rs.scheme = Scheme::bdf2;
  rs.dt_policy = {DtPolicy::Kind::dx_over_4, 0.0};
  rs.p = 3;
  rs.t_end = 0.5;
  for (double dx : {0.1, 0.05, 0.025}) {
    rs.dx = dx;
    const ErrorReport r = run_curvature_diffusion(spec.surface, rs, ref);
    std::printf("dx %.3f  max discrepancy %.3e  (err/dx^2 = %.3f)\n", dx, r.max_err, r.max_err / (dx * dx));
  }
}
