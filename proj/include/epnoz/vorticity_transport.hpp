// Swirl-potential Poisson solve and streamline transport of the advected
// scalars.  The swirl potential psi satisfies
//   psi_rr + (2/r) psi_r + (1/r^2)(psi_pp + cot(phi) psi_p)
//     - psi/(r^2 sin^2 phi) = -G#
// with psi = 0 on axis, wall and exit and the Robin condition
// d_r(r psi) = gamma on the entrance (gamma = 0 in the physical problem;
// manufactured tests feed nonzero data).  Entropy S and angular momentum
// density Lambda = r sin(phi) u_theta ride along streamlines, so both are
// recovered by tracing dphi/dr = u_phi / (r u_r) backward to the entrance.
#pragma once

#include <functional>
#include <vector>

#include "epnoz/grid.hpp"

namespace epnoz {

// Second-order finite-difference solve of the psi problem above; robin_en
// holds d_r(r psi) at the entrance per phi-node (empty means zero).
Field solve_psi(const Grid& g, const Field& G_sharp,
                const std::vector<double>& robin_en = {});

// Where a backward-traced streamline met the entrance plane, per node.
enum class FootStatus { Interior = 0, Axis = 1, Wall = 2 };

struct StreamlineFeet {
    Field foot;                    // entrance angle
    std::vector<FootStatus> status; // same layout as foot.v
};

// Backward trace from (r0, phi_start) to r_en with adaptive RK4 (step
// doubling) on dphi/dr = u_phi / (r u_r); velocities are local-cubic
// interpolants of the node data.  Trajectories are clamped to [0, phi0]:
// axis and wall are exact streamlines, so a crossing is an event that parks
// the trace on the boundary.  Throws BackflowError when u_r <= 0 on the path.
double trace_streamline(const Grid& g, const Field& ur, const Field& uphi,
                        double r0, double phi_start, FootStatus& status,
                        double rtol = 1e-10);

StreamlineFeet trace_streamlines(const Grid& g, const Field& ur, const Field& uphi,
                                 double rtol = 1e-10);

// S(node) = S_en(foot), V(node) = r_en sin(foot) w_en(foot) / (r sin phi)
// with the axis value forced to the limit 0.  Throws CompatibilityError when
// w_en(0) != 0 (the swirl limit would not exist).
void transport_scalars(const Grid& g, const StreamlineFeet& feet,
                       const std::function<double(double)>& S_en,
                       const std::function<double(double)>& w_en, Field& S, Field& V);

} // namespace epnoz
