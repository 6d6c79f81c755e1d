#include "epnoz/outer_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "epnoz/verify_report.hpp"

namespace epnoz {

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::Diverged: return "Diverged";
    case SolveStatus::SonicApproach: return "SonicApproach";
    case SolveStatus::Cavitation: return "Cavitation";
    case SolveStatus::Backflow: return "Backflow";
    case SolveStatus::HorizonBeforeExit: return "HorizonBeforeExit";
    }
    return "Unknown";
}

double h1_norm(const Grid& g, const Field& f, Parity parity) {
    require_match(g, f, "h1_norm");
    const Field fr = d_r(g, f);
    const Field fp = d_phi(g, f, parity);
    double acc = 0.0;
    for (int i = 0; i < g.nr; ++i) {
        const double wr = (i == 0 || i == g.nr - 1) ? 0.5 * g.hr() : g.hr();
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            const double wp = (j == 0 || j == g.nphi - 1) ? 0.5 * g.hphi() : g.hphi();
            const double fq = f(i, j), frq = fr(i, j), fpq = fp(i, j) / r;
            acc += wr * wp * (fq * fq + frq * frq + fpq * fpq) * r * r *
                   std::sin(g.phi(j));
        }
    }
    return std::sqrt(2.0 * M_PI * acc);
}

namespace {

Field sub(const Field& a, const Field& b) {
    Field out = a;
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] -= b.v[k];
    return out;
}

void blend(Field& cur, const Field& next, double relax) {
    for (std::size_t k = 0; k < cur.v.size(); ++k)
        cur.v[k] += relax * (next.v[k] - cur.v[k]);
}

} // namespace

CaseSolver::CaseSolver(const NozzleCase& nc, const IterationConfig& cfg)
    : nc_(nc), cfg_(cfg) {
    g_.r_en = nc.geom.r_en;
    g_.r_ex = nc.geom.r_ex;
    g_.phi0 = nc.geom.phi0;
    g_.nr = nc.nr;
    g_.nphi = nc.nphi;
    BackgroundParams bp = nc.bg;
    bp.gas = nc.gas;
    bp.r_en = nc.geom.r_en;
    bp.r_ex = nc.geom.r_ex;
    bg_ = integrate_background(bp);
    nc_.bg = bp;
    bgg_ = BackgroundOnGrid::make(bg_, g_);
    basis_ = build_basis(g_.phi0, nc.modes);
    lift_ = lift_boundary(g_, nc.pert.chi_trace, nc.pert.dE_en, nc.pert.dPhi_ex);
    doping_ = Field(g_, bp.b0);
    for (int i = 0; i < g_.nr; ++i)
        for (int j = 0; j < g_.nphi; ++j)
            doping_(i, j) = nc.pert.doping
                                ? nc.pert.doping(g_.r(i), g_.phi(j))
                                : bp.b0 + nc.pert.db.f(g_.phi(j));
    relax_ = cfg.relax;
}

std::pair<double, double> CaseSolver::potentials_step(FlowFields& state) const {
    LinearSystemFields lsf =
        assemble_coefficients(g_, nc_.gas, bgg_, state, doping_, nc_.bg.b0,
                              cfg_.sonic_margin, lift_);
    ModalSystem ms = galerkin_reduce(g_, basis_, lsf, bgg_, nc_.pert.du_en);
    ModalSolution sol = solve_modal_system(ms);
    reconstruct_fields(g_, basis_, sol, lift_, state.chi, state.Psi);
    return {lsf.min_sup_margin, lsf.min_sub_margin};
}

PicardOutcome CaseSolver::picard_potentials(FlowFields& state) const {
    PicardOutcome out;
    double prev = -1.0;
    for (int it = 1; it <= cfg_.max_p; ++it) {
        FlowFields trial = state;
        const auto margins = potentials_step(trial);
        out.min_sup = margins.first;
        out.min_sub = margins.second;
        const double inc = h1_norm(g_, sub(trial.chi, state.chi)) +
                           h1_norm(g_, sub(trial.Psi, state.Psi));
        const double rel =
            inc / (1.0 + h1_norm(g_, trial.chi) + h1_norm(g_, trial.Psi));
        out.history.push_back(rel);
        blend(state.chi, trial.chi, relax_);
        blend(state.Psi, trial.Psi, relax_);
        out.iters = it;
        if (h1_norm(g_, state.chi) + h1_norm(g_, state.Psi) > cfg_.budget_p) {
            out.budget_hit = true;
            return out;
        }
        if (rel <= cfg_.tol_p) return out;
        if (prev >= 0.0 && rel > prev && !relax_dropped_ && relax_ > 0.5) {
            relax_ = 0.5;
            relax_dropped_ = true;
        }
        prev = rel;
    }
    throw NonConvergenceError(
        "picard_potentials: potential loop hit max iterations without meeting tol_p");
}

Field CaseSolver::update_vorticity(const FlowFields& state) const {
    const VelocityTriple q =
        compose_velocity(g_, bgg_.u, state.chi, state.psi, state.V);
    Field Phi(g_);
    for (int i = 0; i < g_.nr; ++i)
        for (int j = 0; j < g_.nphi; ++j) Phi(i, j) = bgg_.Phi[i] + state.Psi(i, j);
    const Field G = swirl_source(g_, nc_.gas.gamma, state.S, state.V, Phi, q);
    return solve_psi(g_, G);
}

void CaseSolver::update_transport(const FlowFields& state, Field& S_new,
                                  Field& V_new) const {
    const VelocityTriple q =
        compose_velocity(g_, bgg_.u, state.chi, state.psi, state.V);
    const StreamlineFeet feet = trace_streamlines(g_, q.ur, q.uphi);
    const double S0 = nc_.gas.S0;
    const AngularProfile& dS = nc_.pert.dS_en;
    const AngularProfile& w = nc_.pert.w_en;
    transport_scalars(
        g_, feet, [&](double phi) { return S0 + dS.f(phi); },
        [&](double phi) { return w.f(phi); }, S_new, V_new);
}

SolveReport CaseSolver::solve(FlowFields& state) {
    SolveReport rep;
    state = FlowFields::background_init(g_, nc_.gas.S0);
    try {
        double prev_dt = -1.0;
        bool converged = false;
        for (int it_t = 1; it_t <= cfg_.max_t && !converged; ++it_t) {
            rep.outer_iters = it_t;
            bool v_done = false;
            double prev_dv = -1.0;
            for (int it_v = 1; it_v <= cfg_.max_v; ++it_v) {
                PicardOutcome po = picard_potentials(state);
                rep.p_iters.push_back(po.iters);
                rep.p_history.insert(rep.p_history.end(), po.history.begin(),
                                     po.history.end());
                rep.min_sup_margin = po.min_sup;
                rep.min_sub_margin = po.min_sub;
                if (po.budget_hit) {
                    rep.status = SolveStatus::Diverged;
                    rep.message = "potential iterate exceeded its trust budget";
                    rep.relax_used = relax_;
                    return rep;
                }
                const Field psi_new = update_vorticity(state);
                const double dv =
                    h1_norm(g_, sub(psi_new, state.psi), Parity::Odd) /
                    (1.0 + h1_norm(g_, psi_new, Parity::Odd));
                blend(state.psi, psi_new, relax_);
                rep.v_history.push_back(dv);
                if (h1_norm(g_, state.psi, Parity::Odd) > cfg_.budget_v) {
                    rep.status = SolveStatus::Diverged;
                    rep.message = "swirl-potential iterate exceeded its trust budget";
                    rep.relax_used = relax_;
                    return rep;
                }
                if (dv <= cfg_.tol_v) {
                    rep.v_iters.push_back(it_v);
                    v_done = true;
                    break;
                }
                if (prev_dv >= 0.0 && dv > prev_dv && !relax_dropped_ &&
                    relax_ > 0.5) {
                    relax_ = 0.5;
                    relax_dropped_ = true;
                }
                prev_dv = dv;
            }
            if (!v_done) {
                rep.status = SolveStatus::Diverged;
                rep.message = "swirl-potential loop hit max iterations";
                rep.relax_used = relax_;
                return rep;
            }
            Field S_new, V_new;
            update_transport(state, S_new, V_new);
            const double dt =
                (h1_norm(g_, sub(S_new, state.S)) +
                 h1_norm(g_, sub(V_new, state.V), Parity::Odd)) /
                (1.0 + h1_norm(g_, S_new) + h1_norm(g_, V_new, Parity::Odd));
            blend(state.S, S_new, relax_);
            blend(state.V, V_new, relax_);
            rep.t_history.push_back(dt);
            Field devS = state.S;
            for (double& x : devS.v) x -= nc_.gas.S0;
            if (h1_norm(g_, devS) + h1_norm(g_, state.V, Parity::Odd) >
                cfg_.budget_t) {
                rep.status = SolveStatus::Diverged;
                rep.message = "transported iterate exceeded its trust budget";
                rep.relax_used = relax_;
                return rep;
            }
            if (dt <= cfg_.tol_t) converged = true;
            if (prev_dt >= 0.0 && dt > prev_dt && !relax_dropped_ && relax_ > 0.5) {
                relax_ = 0.5;
                relax_dropped_ = true;
            }
            prev_dt = dt;
        }
        if (!converged) {
            rep.status = SolveStatus::Diverged;
            rep.message = "outer transport loop hit max iterations";
            rep.relax_used = relax_;
            return rep;
        }
        rep.status = SolveStatus::Converged;
        const PrimitiveFields prim = derive_primitives(g_, bg_, state);
        const MachMargin mm = supersonic_margin(g_, prim);
        rep.min_mach_margin = mm.margin;
        rep.mach_loc_r = mm.r;
        rep.mach_loc_phi = mm.phi;
    } catch (const SonicApproachError& e) {
        rep.status = SolveStatus::SonicApproach;
        rep.message = e.what();
    } catch (const SonicSingularityError& e) {
        rep.status = SolveStatus::SonicApproach;
        rep.message = e.what();
    } catch (const CavitationError& e) {
        rep.status = SolveStatus::Cavitation;
        rep.message = e.what();
    } catch (const BackflowError& e) {
        rep.status = SolveStatus::Backflow;
        rep.message = e.what();
    } catch (const NonConvergenceError& e) {
        rep.status = SolveStatus::Diverged;
        rep.message = e.what();
    }
    rep.relax_used = relax_;
    return rep;
}

std::pair<FlowFields, SolveReport> solve_case(const NozzleCase& nc,
                                              const IterationConfig& cfg) {
    Grid g{nc.geom.r_en, nc.geom.r_ex, nc.geom.phi0, nc.nr, nc.nphi};
    try {
        CaseSolver solver(nc, cfg);
        FlowFields state;
        SolveReport rep = solver.solve(state);
        return {std::move(state), std::move(rep)};
    } catch (const HorizonBeforeExitError& e) {
        SolveReport rep;
        rep.status = SolveStatus::HorizonBeforeExit;
        rep.message = e.what();
        return {FlowFields::background_init(g, nc.gas.S0), rep};
    }
}

ScalingStudy scaling_study(const std::function<NozzleCase(double)>& family,
                           const std::vector<double>& eps,
                           const IterationConfig& cfg) {
    ScalingStudy st;
    auto run_one = [&family, &cfg](double e) -> std::pair<double, SolveStatus> {
        const NozzleCase nc = family(e);
        auto solved = solve_case(nc, cfg);
        const FlowFields& f = solved.first;
        const SolveReport& rep = solved.second;
        if (rep.status != SolveStatus::Converged) return {-1.0, rep.status};
        const Grid& g = f.grid;
        Field devS = f.S;
        for (double& x : devS.v) x -= nc.gas.S0;
        const double norm = hk_star_norm(g, f.chi, 1) + hk_star_norm(g, f.Psi, 1) +
                            hk_star_norm(g, f.psi, 1) + hk_star_norm(g, devS, 1) +
                            hk_star_norm(g, f.V, 1);
        return {norm, rep.status};
    };

    std::vector<std::future<std::pair<double, SolveStatus>>> futs;
    futs.reserve(eps.size());
    for (double e : eps)
        futs.push_back(std::async(std::launch::async, run_one, e));

    for (std::size_t k = 0; k < eps.size(); ++k) {
        const auto outcome = futs[k].get();
        if (outcome.first < 0.0) {
            std::ostringstream os;
            os << "scaling_study: member eps = " << eps[k] << " ended "
               << to_string(outcome.second);
            throw NonConvergenceError(os.str());
        }
        if (eps[k] <= 0.0 || outcome.first <= 0.0) {
            std::ostringstream os;
            os << "excluded eps = " << eps[k]
               << " from the fit (nonpositive value has no logarithm)";
            st.notes.push_back(os.str());
            continue;
        }
        st.eps.push_back(eps[k]);
        st.norm.push_back(outcome.first);
    }

    if (st.eps.size() >= 2) {
        const std::size_t n = st.eps.size();
        double mx = 0.0, my = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            mx += std::log(st.eps[k]);
            my += std::log(st.norm[k]);
        }
        mx /= double(n);
        my /= double(n);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double dx = std::log(st.eps[k]) - mx;
            sxy += dx * (std::log(st.norm[k]) - my);
            sxx += dx * dx;
        }
        st.slope = sxy / sxx;
    } else {
        st.notes.push_back("fewer than two usable members; slope not fitted");
    }
    return st;
}

} // namespace epnoz
