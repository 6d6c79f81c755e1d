// Nested damped Picard iteration over the three solution mappings:
//   I_p  (innermost)  frozen-coefficient linear step for (chi, Psi),
//   I_v  (middle)     swirl-potential update psi from the source G,
//   I_t  (outermost)  streamline transport of (S, Lambda).
// Each loop monitors a relative discrete-H1 increment and a trust budget on
// the iterate norms; divergence is a reported status, never undefined
// behavior.  Damping defaults to pure Picard and drops to 0.5 on the first
// observed norm increase.
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "epnoz/core_model.hpp"
#include "epnoz/eigenbasis.hpp"
#include "epnoz/linear_subsystem.hpp"
#include "epnoz/radial_background.hpp"
#include "epnoz/vorticity_transport.hpp"

namespace epnoz {

// Deviations of the boundary/doping data from the background values; all
// profiles are analytic in phi with two derivatives.  chi_trace is the
// entrance potential trace r_en * integral_0^phi v_en (so chi_trace.d1 =
// r_en * v_en), dS_en the entrance entropy deviation from S0, dE_en the
// entrance field deviation from E0, dPhi_ex the exit deviation of the radial
// potential gradient, and doping the full profile b(r, phi) (empty = b0).
struct PerturbationData {
    AngularProfile du_en = AngularProfile::zero();
    AngularProfile chi_trace = AngularProfile::zero();
    AngularProfile w_en = AngularProfile::zero();
    AngularProfile dS_en = AngularProfile::zero();
    AngularProfile dE_en = AngularProfile::zero();
    AngularProfile dPhi_ex = AngularProfile::zero();
    AngularProfile db = AngularProfile::zero();   // doping deviation profile in phi
    std::function<double(double, double)> doping; // full b(r, phi); overrides b0 + db
};

struct IterationConfig {
    double tol_p = 1e-10, tol_v = 1e-10, tol_t = 1e-10;
    int max_p = 50, max_v = 40, max_t = 40;
    double relax = 1.0; // damping factor in (0, 1]
    // trust budgets on iterate H1 norms (the delta caps of the iteration sets)
    double budget_p = 10.0, budget_v = 10.0, budget_t = 10.0;
    double sonic_margin = 1e-10; // floor on q1^2 - c^2 and c^2 - q2^2
};

struct NozzleCase {
    NozzleGeometry geom;
    GasLaw gas;
    BackgroundParams bg; // radii and gas duplicated here feed the ODE solve
    PerturbationData pert;
    int nr = 64, nphi = 16, modes = 8;
    IterationConfig iter;
    std::string name = "case";
};

enum class SolveStatus {
    Converged,
    Diverged,
    SonicApproach,
    Cavitation,
    Backflow,
    HorizonBeforeExit
};
const char* to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::Diverged;
    std::string message;
    int outer_iters = 0;
    std::vector<int> p_iters, v_iters;            // per middle/outer pass
    std::vector<double> p_history, v_history, t_history; // relative increments
    double relax_used = 1.0;
    double min_sup_margin = 0.0; // min over grid of q1^2 - c^2 (last assembly)
    double min_sub_margin = 0.0; // min over grid of c^2 - q2^2
    double min_mach_margin = 0.0; // min over grid of M - 1 on the final fields
    double mach_loc_r = 0.0, mach_loc_phi = 0.0;
};

// Discrete H1 norm with the axisymmetric volume element 2 pi r^2 sin(phi):
// sqrt( int (f^2 + f_r^2 + (f_phi/r)^2) dV ) with trapezoidal node weights;
// parity picks the axis ghost reflection for the phi-derivative.  This is
// the iteration-monitor norm (the verification harness carries its own
// independently assembled Sobolev norms).
double h1_norm(const Grid& g, const Field& f, Parity parity = Parity::Even);

struct PicardOutcome {
    int iters = 0;
    bool budget_hit = false;
    std::vector<double> history; // relative increments
    double min_sup = 0.0, min_sub = 0.0;
};

class CaseSolver {
  public:
    CaseSolver(const NozzleCase& nc, const IterationConfig& cfg);

    const Grid& grid() const { return g_; }
    const RadialBackground& background() const { return bg_; }
    const BackgroundOnGrid& background_grid() const { return bgg_; }
    const EigenBasis& basis() const { return basis_; }
    const Lifting& lifting() const { return lift_; }
    const Field& doping() const { return doping_; }

    // One frozen-coefficient linear step: (chi, Psi) <- linear solve at the
    // current state.  Returns the supersonicity margins of the assembly.
    std::pair<double, double> potentials_step(FlowFields& state) const;

    // Iterate potentials_step with damping until the relative H1 increment
    // meets tol_p.  Throws NonConvergenceError after max_p iterations.
    PicardOutcome picard_potentials(FlowFields& state) const;

    // Undamped I_v: psi solve from the swirl source at the given state.
    Field update_vorticity(const FlowFields& state) const;

    // Undamped I_t: transported (S, V) from the composed velocity.
    void update_transport(const FlowFields& state, Field& S_new, Field& V_new) const;

    // Full nested iteration; never throws on the controlled failure modes,
    // reporting them as statuses instead.
    SolveReport solve(FlowFields& state);

    double relax() const { return relax_; }

  private:
    NozzleCase nc_;
    IterationConfig cfg_;
    Grid g_;
    RadialBackground bg_;
    BackgroundOnGrid bgg_;
    EigenBasis basis_;
    Lifting lift_;
    Field doping_;
    mutable double relax_ = 1.0; // shared damping; drops once on a norm increase
    mutable bool relax_dropped_ = false;
};

// Builds the solver, runs the nested iteration, and attaches the derived
// fields; controlled failures come back as report statuses.
std::pair<FlowFields, SolveReport> solve_case(const NozzleCase& nc,
                                              const IterationConfig& cfg);

// Runs the family at each epsilon, computes the H1_* deviation norm of the
// converged state from the background, and fits the log-log slope.
struct ScalingStudy {
    std::vector<double> eps, norm; // fitted members
    double slope = 0.0;
    std::vector<std::string> notes; // excluded members, warnings
};
ScalingStudy scaling_study(const std::function<NozzleCase(double)>& family,
                           const std::vector<double>& eps,
                           const IterationConfig& cfg);

} // namespace epnoz
