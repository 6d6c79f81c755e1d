// Case-file parsing, perturbation profile families, compatibility checks,
// and solution/report archiving.
//
// Case files are INI-like:
//   [geometry]  r_en, r_ex, phi0
//   [gas]       gamma, S0
//   [background] m0, rho0, E0, b0 (+ rtol, atol, nsamp, sonic_guard)
//   [perturbation] channels u_en, v_en, w_en, S_en, E_en, Phi_ex, b,
//       each "family coefficients...":
//         cosine c0 c1 ...   ->  sum_k c_k cos(k pi phi / phi0)
//         bump   c1 c2 ...   ->  sum_k c_k sin^2(k pi phi / phi0)
//         table  p0:v0 p1:v1 ...  (monotone cubic through the pairs)
//       all channels are deviations from the background data.
//   [numerics]  nr, nphi, modes, tol/tol_p/tol_v/tol_t, relax, max_p/v/t,
//       budget_p/v/t, sonic_margin
// The cosine and bump families satisfy the wall/axis compatibility
// conditions identically; tables must pass validate_compatibility.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epnoz/outer_iteration.hpp"
#include "epnoz/verify_report.hpp"

namespace epnoz {

AngularProfile cosine_profile(const std::vector<double>& c, double phi0);
AngularProfile bump_profile(const std::vector<double>& c, double phi0);

// scale * integral_0^phi of the family (used for the entrance potential
// trace chi_trace = r_en * int v_en).
AngularProfile cosine_integral_profile(const std::vector<double>& c, double phi0,
                                       double scale);
AngularProfile bump_integral_profile(const std::vector<double>& c, double phi0,
                                     double scale);

// Monotone (Fritsch-Carlson) cubic through strictly increasing abscissae;
// clamped outside the table.
AngularProfile table_profile(const std::vector<double>& phi,
                             const std::vector<double>& val);
AngularProfile table_integral_profile(const std::vector<double>& phi,
                                      const std::vector<double>& val, double scale);

NozzleCase parse_case(const std::string& path);
NozzleCase parse_case_text(const std::string& text, const std::string& origin);

// Checks the wall/axis compatibility conditions of the perturbation data to
// 1e-8 and throws CompatibilityError listing every violated one.
void validate_compatibility(const NozzleCase& nc);

std::uint64_t fnv1a64(const std::string& bytes);

// Multiplies every perturbation channel by s (profile values and their
// derivatives alike); the base case defines the unit-amplitude shape.
NozzleCase scale_perturbations(const NozzleCase& nc, double s);

struct ArchivePaths {
    std::string solution_csv, report_json;
};

// solution.csv: header `r,phi,rho,u_r,u_phi,u_theta,S,Phi,M,psi,chi,Psi`,
// one node per line, r-outer order, 17 significant digits; report.json with
// the full iteration/verification record.  Bit-exact on round trip.
ArchivePaths write_solution(const std::string& dir, const NozzleCase& nc,
                            std::uint64_t case_hash, const FlowFields& fields,
                            const PrimitiveFields& prim, const SolveReport& rep,
                            const ResidualReport& res,
                            const ConservationReport& cons);

struct SolutionTable {
    Grid grid;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // column-major, row index = node
};

SolutionTable read_solution(const std::string& csv_path);

} // namespace epnoz
