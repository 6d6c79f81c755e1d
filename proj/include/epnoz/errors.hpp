// Exception hierarchy for the nozzle solver.  Every failure mode that a case
// file can trigger gets its own type so callers (CLI, outer iteration) can
// map it to a report status instead of a crash.
#pragma once

#include <stdexcept>
#include <string>

namespace epnoz {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Background ODE / admissibility failures ------------------------------------

// Entrance data violate the admissible-data inequalities.
struct AdmissibilityError : Error { using Error::Error; };

// Density left (0, rho_s) during integration: flow cavitates or chokes.
struct CavitationError : Error { using Error::Error; };

// Mach squared reached the sonic guard while integrating the background.
struct SonicSingularityError : Error { using Error::Error; };

// The admissible radial horizon r_star lies before the requested exit.
struct HorizonBeforeExitError : Error { using Error::Error; };

// Field / grid failures -------------------------------------------------------

struct GridMismatchError : Error { using Error::Error; };
struct InsufficientGridError : Error { using Error::Error; };
struct AxisRegularityError : Error { using Error::Error; };

// Eigenbasis / linear algebra -------------------------------------------------

// Requested eigenvalue not converged under quadrature refinement.
struct ResolutionError : Error { using Error::Error; };

// Sparse factorization failed (zero pivot / structurally singular block).
struct SingularSystemError : Error { using Error::Error; };

// Nonlinear state guards ------------------------------------------------------

// q1^2 - c^2 fell below the supersonicity margin at some node.
struct SonicApproachError : Error {
    SonicApproachError(const std::string& what, double r_, double phi_)
        : Error(what), r(r_), phi(phi_) {}
    double r = 0.0, phi = 0.0;
};

// u_r lost positivity: streamline tracing has no upstream direction.
struct BackflowError : Error {
    BackflowError(const std::string& what, double r_, double phi_)
        : Error(what), r(r_), phi(phi_) {}
    double r = 0.0, phi = 0.0;
};

// Streamline left the wedge through a face that is not the entrance.
struct OutOfDomainError : Error { using Error::Error; };

// Fixed-point iteration exceeded its budget or its monitor.
struct NonConvergenceError : Error { using Error::Error; };

// Case file / IO ---------------------------------------------------------------

struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct CompatibilityError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace epnoz
