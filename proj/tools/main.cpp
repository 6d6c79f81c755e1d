// epnoz command-line front end.
//
//   epnoz background --case nozzle.case [--out DIR]
//   epnoz eigen      [--case nozzle.case | --phi0 X] [--modes M] [--out DIR]
//   epnoz solve      --case nozzle.case [--out DIR] [--grid NRxNPHI]
//                    [--modes M] [--tol T] [--relax R]
//   epnoz verify     --case nozzle.case [--out DIR]   (reads DIR/solution.csv)
//   epnoz sweep      --case nozzle.case --eps 1e-4,1e-3,1e-2 [...]
//
// Exit codes: 0 success / converged; 2 controlled solver outcome (sonic
// approach, cavitation, backflow, horizon before exit, divergence);
// 1 usage, parse, validation, or IO failure.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "epnoz/case_io.hpp"
#include "epnoz/eigenbasis.hpp"
#include "epnoz/errors.hpp"
#include "epnoz/outer_iteration.hpp"
#include "epnoz/radial_background.hpp"
#include "epnoz/verify_report.hpp"

namespace {

using namespace epnoz;

struct Options {
    std::string case_path;
    std::string out_dir = "out";
    std::string grid_spec;
    int modes = -1;
    double tol = -1.0;
    double relax = -1.0;
    double phi0 = -1.0; // eigen-only; set when > 0
    std::vector<double> eps;
};

void apply_overrides(NozzleCase& nc, const Options& o) {
    if (!o.grid_spec.empty()) {
        int nr = 0, nphi = 0;
        char x = 0;
        std::istringstream is(o.grid_spec);
        if (!(is >> nr >> x >> nphi) || (x != 'x' && x != 'X') ||
            !(is >> std::ws).eof() || nr < 8 || nphi < 5)
            throw ValidationError("--grid expects NRxNPHI with NR >= 8, NPHI >= 5");
        nc.nr = nr;
        nc.nphi = nphi;
    }
    if (o.modes >= 0) nc.modes = o.modes;
    if (o.tol > 0.0) nc.iter.tol_p = nc.iter.tol_v = nc.iter.tol_t = o.tol;
    if (o.relax > 0.0) nc.iter.relax = o.relax;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw IoError("cannot write " + dir + "/" + name);
    return out;
}

Field doping_field(const Grid& g, const NozzleCase& nc) {
    Field b(g);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j)
            b(i, j) = nc.pert.doping ? nc.pert.doping(g.r(i), g.phi(j))
                                     : nc.bg.b0 + nc.pert.db.f(g.phi(j));
    return b;
}

PrimitiveFields zero_primitives(const Grid& g) {
    PrimitiveFields p;
    p.vel.ur = Field(g);
    p.vel.uphi = Field(g);
    p.vel.utheta = Field(g);
    p.rho = Field(g);
    p.M = Field(g);
    p.Phi = Field(g);
    return p;
}

int run_background(const Options& o) {
    const NozzleCase nc = parse_case(o.case_path);
    RadialBackground bg;
    try {
        bg = integrate_background(nc.bg);
    } catch (const HorizonBeforeExitError& e) {
        std::fprintf(stderr, "background: %s\n", e.what());
        return 2;
    }
    auto out = open_out(o.out_dir, "background.csv");
    out << "r,rho,E,u,M,Phi,phibar\n";
    char buf[40];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << sep;
    };
    for (int k = 0; k < bg.nsamp(); ++k) {
        const double r = bg.r_s[k];
        put(r, ',');
        put(bg.rho(r), ',');
        put(bg.E(r), ',');
        put(bg.u(r), ',');
        put(std::sqrt(bg.Msq(r)), ',');
        put(bg.Phi(r), ',');
        put(bg.phibar(r), '\n');
    }
    const double cross = crossform_check(bg);
    std::printf("background: %d samples on [%g, %g]\n", bg.nsamp(), nc.bg.r_en,
                nc.bg.r_ex);
    std::printf("  entrance M = %.12g, exit M = %.12g\n",
                std::sqrt(bg.Msq(nc.bg.r_en)), std::sqrt(bg.Msq(nc.bg.r_ex)));
    std::printf("  mach-form cross-check (rel M^2) = %.3e\n", cross);
    std::printf("  potential defect |int E - B|    = %.3e\n",
                bg.potential_defect());
    std::printf("  wrote %s/background.csv\n", o.out_dir.c_str());
    return 0;
}

int run_eigen(const Options& o) {
    double phi0 = o.phi0;
    int modes = (o.modes >= 0) ? o.modes : 8;
    if (!o.case_path.empty()) {
        const NozzleCase nc = parse_case(o.case_path);
        if (phi0 <= 0.0) phi0 = nc.geom.phi0;
        if (o.modes < 0) modes = nc.modes;
    } else if (phi0 <= 0.0) {
        throw ValidationError("eigen needs --case or --phi0");
    }
    const EigenBasis basis = build_basis(phi0, modes);
    auto out = open_out(o.out_dir, "eigen.csv");
    out << "k,omega\n";
    char buf[48];
    for (int k = 0; k <= basis.m; ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", k, basis.omega[k]);
        out << buf;
    }
    std::printf("eigenbasis: phi0 = %.12g, modes 0..%d\n", phi0, basis.m);
    for (int k = 0; k <= basis.m; ++k)
        std::printf("  omega[%2d] = %.12g\n", k, basis.omega[k]);
    std::printf("  gram defect            = %.3e\n", basis.gram_defect());
    std::printf("  derivative gram defect = %.3e\n",
                basis.derivative_gram_defect());
    std::printf("  wrote %s/eigen.csv\n", o.out_dir.c_str());
    return 0;
}

int run_solve(const Options& o) {
    NozzleCase nc = parse_case(o.case_path);
    apply_overrides(nc, o);
    const std::uint64_t hash = fnv1a64(slurp(o.case_path));

    auto [fields, rep] = solve_case(nc, nc.iter);

    PrimitiveFields prim = zero_primitives(fields.grid);
    ResidualReport res;
    ConservationReport cons;
    if (rep.status != SolveStatus::HorizonBeforeExit) {
        try {
            const RadialBackground bg = integrate_background(nc.bg);
            prim = derive_primitives(fields.grid, bg, fields);
            res = residual_euler_poisson(fields.grid, nc.gas, prim, fields.S,
                                         doping_field(fields.grid, nc));
            cons = conservation_report(fields.grid, nc.gas, prim, fields.S);
        } catch (const Error& e) {
            prim = zero_primitives(fields.grid);
            if (rep.message.empty())
                rep.message = std::string("post-processing failed: ") + e.what();
        }
    }

    const ArchivePaths paths =
        write_solution(o.out_dir, nc, hash, fields, prim, rep, res, cons);

    std::printf("solve: %s\n", nc.name.c_str());
    std::printf("  status      = %s\n", to_string(rep.status));
    if (!rep.message.empty()) std::printf("  message     = %s\n", rep.message.c_str());
    std::printf("  outer iters = %d, relax = %g\n", rep.outer_iters, rep.relax_used);
    if (rep.status == SolveStatus::Converged) {
        std::printf("  min (M - 1) = %.6e at (r, phi) = (%.6g, %.6g)\n",
                    rep.min_mach_margin, rep.mach_loc_r, rep.mach_loc_phi);
        std::printf("  residual total = %.6e (mass %.2e, mom_phi %.2e, entropy "
                    "%.2e, angular %.2e, poisson %.2e)\n",
                    res.total, res.mass, res.mom_phi, res.entropy, res.angular,
                    res.poisson);
        std::printf("  mass-flux spread = %.6e, K defect = %.6e\n",
                    cons.mass_flux_spread, cons.K_defect);
    }
    std::printf("  wrote %s and %s\n", paths.solution_csv.c_str(),
                paths.report_json.c_str());
    return rep.status == SolveStatus::Converged ? 0 : 2;
}

int run_verify(const Options& o) {
    const NozzleCase nc = parse_case(o.case_path);
    const std::string csv = o.out_dir + "/solution.csv";
    const SolutionTable t = read_solution(csv);
    const Grid& g = t.grid;

    auto col = [&](const std::string& name) -> const std::vector<double>& {
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            if (t.columns[c] == name) return t.data[c];
        throw ParseError(csv + ": missing column '" + name + "'");
    };
    auto field_of = [&](const std::string& name) {
        const std::vector<double>& d = col(name);
        Field f(g);
        f.v = d;
        return f;
    };

    PrimitiveFields p;
    p.vel.ur = field_of("u_r");
    p.vel.uphi = field_of("u_phi");
    p.vel.utheta = field_of("u_theta");
    p.rho = field_of("rho");
    p.M = field_of("M");
    p.Phi = field_of("Phi");
    const Field S = field_of("S");

    const ResidualReport res =
        residual_euler_poisson(g, nc.gas, p, S, doping_field(g, nc));
    const ConservationReport cons = conservation_report(g, nc.gas, p, S);
    const MachMargin mm = supersonic_margin(g, p);

    nlohmann::ordered_json J;
    J["solution"] = csv;
    J["grid"] = {{"nr", g.nr}, {"nphi", g.nphi}};
    J["residuals"] = {{"mass", res.mass},       {"mom_phi", res.mom_phi},
                      {"entropy", res.entropy}, {"angular", res.angular},
                      {"poisson", res.poisson}, {"total", res.total}};
    J["conservation"] = {{"mass_flux_mean", cons.mass_flux_mean},
                         {"mass_flux_spread", cons.mass_flux_spread},
                         {"K_defect", cons.K_defect},
                         {"S_transport", cons.S_transport},
                         {"Lambda_transport", cons.Lambda_transport},
                         {"S_min", cons.S_min},
                         {"S_max", cons.S_max}};
    J["mach_margin"] = {{"min", mm.margin}, {"r", mm.r}, {"phi", mm.phi}};
    auto out = open_out(o.out_dir, "verify.json");
    out << J.dump(2) << "\n";

    std::printf("verify: %s (%d x %d)\n", csv.c_str(), g.nr, g.nphi);
    std::printf("  residual total = %.6e (mass %.2e, mom_phi %.2e, entropy %.2e, "
                "angular %.2e, poisson %.2e)\n",
                res.total, res.mass, res.mom_phi, res.entropy, res.angular,
                res.poisson);
    std::printf("  mass-flux spread = %.6e (mean %.12g)\n", cons.mass_flux_spread,
                cons.mass_flux_mean);
    std::printf("  K defect = %.6e, S in [%.12g, %.12g]\n", cons.K_defect,
                cons.S_min, cons.S_max);
    std::printf("  transport defects: S %.6e, Lambda %.6e\n", cons.S_transport,
                cons.Lambda_transport);
    std::printf("  min (M - 1) = %.6e at (r, phi) = (%.6g, %.6g)\n", mm.margin,
                mm.r, mm.phi);
    std::printf("  wrote %s/verify.json\n", o.out_dir.c_str());
    return 0;
}

int run_sweep(const Options& o) {
    NozzleCase base = parse_case(o.case_path);
    apply_overrides(base, o);
    if (o.eps.empty())
        throw ValidationError("sweep needs --eps e1,e2,... (at least two values)");
    auto family = [&base](double e) {
        NozzleCase nc = scale_perturbations(base, e);
        std::ostringstream name;
        name << base.name << " @ eps=" << e;
        nc.name = name.str();
        return nc;
    };
    ScalingStudy st;
    try {
        st = scaling_study(family, o.eps, base.iter);
    } catch (const NonConvergenceError& e) {
        std::fprintf(stderr, "sweep: %s\n", e.what());
        return 2;
    }
    std::printf("sweep: %s\n", base.name.c_str());
    std::printf("  %-12s %-20s\n", "eps", "deviation norm");
    for (std::size_t k = 0; k < st.eps.size(); ++k)
        std::printf("  %-12.6g %-20.12e\n", st.eps[k], st.norm[k]);
    for (const std::string& n : st.notes) std::printf("  note: %s\n", n.c_str());
    std::printf("  log-log slope = %.6f\n", st.slope);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"axisymmetric supersonic Euler-Poisson nozzle solver"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* s, bool case_required) {
        auto* c = s->add_option("--case", o.case_path, "case file");
        if (case_required) c->required();
        s->add_option("--out", o.out_dir, "output directory (default: out)");
        return s;
    };
    auto add_solver_flags = [&](CLI::App* s) {
        s->add_option("--grid", o.grid_spec, "grid override, NRxNPHI");
        s->add_option("--modes", o.modes, "Galerkin mode count override");
        s->add_option("--tol", o.tol, "tolerance override for all three stages");
        s->add_option("--relax", o.relax, "damping factor override, in (0,1]");
    };

    CLI::App* bg = add_common(app.add_subcommand("background",
                                                 "integrate the radial background and cross-check it"),
                              true);
    (void)bg;
    CLI::App* ei = add_common(app.add_subcommand("eigen",
                                                 "build the angular eigenbasis and report its defects"),
                              false);
    ei->add_option("--phi0", o.phi0, "wedge half-angle (when no case file)");
    ei->add_option("--modes", o.modes, "number of modes (0..m)");
    CLI::App* so = add_common(app.add_subcommand("solve",
                                                 "run the nested solver and archive the solution"),
                              true);
    add_solver_flags(so);
    CLI::App* ve = add_common(app.add_subcommand("verify",
                                                 "re-evaluate residuals of an archived solution"),
                              true);
    (void)ve;
    CLI::App* sw = add_common(app.add_subcommand("sweep",
                                                 "amplitude scaling study over --eps values"),
                              true);
    add_solver_flags(sw);
    sw->add_option("--eps", o.eps, "comma-separated amplitudes")
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("background")) return run_background(o);
        if (app.got_subcommand("eigen")) return run_eigen(o);
        if (app.got_subcommand("solve")) return run_solve(o);
        if (app.got_subcommand("verify")) return run_verify(o);
        if (app.got_subcommand("sweep")) return run_sweep(o);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
