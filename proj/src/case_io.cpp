#include "epnoz/case_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"

namespace epnoz {

AngularProfile cosine_profile(const std::vector<double>& c, double phi0) {
    AngularProfile p;
    p.f = [c, phi0](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k)
            s += c[k] * std::cos(double(k) * M_PI * x / phi0);
        return s;
    };
    p.d1 = [c, phi0](double x) {
        double s = 0.0;
        for (std::size_t k = 1; k < c.size(); ++k) {
            const double a = double(k) * M_PI / phi0;
            s -= c[k] * a * std::sin(a * x);
        }
        return s;
    };
    p.d2 = [c, phi0](double x) {
        double s = 0.0;
        for (std::size_t k = 1; k < c.size(); ++k) {
            const double a = double(k) * M_PI / phi0;
            s -= c[k] * a * a * std::cos(a * x);
        }
        return s;
    };
    return p;
}

AngularProfile bump_profile(const std::vector<double>& c, double phi0) {
    AngularProfile p;
    p.f = [c, phi0](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double t = std::sin(double(k + 1) * M_PI * x / phi0);
            s += c[k] * t * t;
        }
        return s;
    };
    p.d1 = [c, phi0](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double a = double(k + 1) * M_PI / phi0;
            s += c[k] * a * std::sin(2.0 * a * x);
        }
        return s;
    };
    p.d2 = [c, phi0](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double a = double(k + 1) * M_PI / phi0;
            s += 2.0 * c[k] * a * a * std::cos(2.0 * a * x);
        }
        return s;
    };
    return p;
}

AngularProfile cosine_integral_profile(const std::vector<double>& c, double phi0,
                                       double scale) {
    const AngularProfile base = cosine_profile(c, phi0);
    AngularProfile p;
    p.f = [c, phi0, scale](double x) {
        double s = c.empty() ? 0.0 : c[0] * x;
        for (std::size_t k = 1; k < c.size(); ++k) {
            const double a = double(k) * M_PI / phi0;
            s += c[k] * std::sin(a * x) / a;
        }
        return scale * s;
    };
    p.d1 = [base, scale](double x) { return scale * base.f(x); };
    p.d2 = [base, scale](double x) { return scale * base.d1(x); };
    return p;
}

AngularProfile bump_integral_profile(const std::vector<double>& c, double phi0,
                                     double scale) {
    const AngularProfile base = bump_profile(c, phi0);
    AngularProfile p;
    p.f = [c, phi0, scale](double x) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double a = double(k + 1) * M_PI / phi0;
            s += c[k] * (0.5 * x - std::sin(2.0 * a * x) / (4.0 * a));
        }
        return scale * s;
    };
    p.d1 = [base, scale](double x) { return scale * base.f(x); };
    p.d2 = [base, scale](double x) { return scale * base.d1(x); };
    return p;
}

namespace {

// Fritsch-Carlson monotone cubic Hermite through strictly increasing nodes.
struct MonotoneCubic {
    std::vector<double> x, y, m, cum; // cum: integral from x[0] to x[i]

    MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
        : x(std::move(xs)), y(std::move(ys)) {
        const int n = int(x.size());
        if (n < 2 || y.size() != x.size())
            throw ValidationError("table profile needs at least two (phi, value) pairs");
        for (int i = 0; i + 1 < n; ++i)
            if (!(x[i + 1] > x[i]))
                throw ValidationError(
                    "table profile abscissae must be strictly increasing");
        std::vector<double> d(n - 1);
        for (int i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        m.assign(n, 0.0);
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for (int i = 1; i + 1 < n; ++i)
            m[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
        for (int i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            const double a = m[i] / d[i], b = m[i + 1] / d[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double t = 3.0 / std::sqrt(s);
                m[i] = t * a * d[i];
                m[i + 1] = t * b * d[i];
            }
        }
        cum.assign(n, 0.0);
        for (int i = 0; i + 1 < n; ++i) {
            const double h = x[i + 1] - x[i];
            cum[i + 1] = cum[i] + h * (0.5 * (y[i] + y[i + 1]) +
                                       h * (m[i] - m[i + 1]) / 12.0);
        }
    }

    int seg(double t) const {
        int lo = 0, hi = int(x.size()) - 2;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (x[mid] <= t)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    double value(double t) const {
        if (t <= x.front()) return y.front();
        if (t >= x.back()) return y.back();
        const int i = seg(t);
        const double h = x[i + 1] - x[i], s = (t - x[i]) / h;
        const double h00 = (2 * s - 3) * s * s + 1, h10 = ((s - 2) * s + 1) * s;
        const double h01 = (3 - 2 * s) * s * s, h11 = (s - 1) * s * s;
        return y[i] * h00 + h * m[i] * h10 + y[i + 1] * h01 + h * m[i + 1] * h11;
    }

    double deriv(double t) const {
        if (t <= x.front() || t >= x.back()) {
            // one-sided end derivative (flat outside the table)
            if (t < x.front() || t > x.back()) return 0.0;
            return (t <= x.front()) ? m.front() : m.back();
        }
        const int i = seg(t);
        const double h = x[i + 1] - x[i], s = (t - x[i]) / h;
        const double d00 = (6 * s - 6) * s, d10 = (3 * s - 4) * s + 1;
        const double d01 = (6 - 6 * s) * s, d11 = (3 * s - 2) * s;
        return (y[i] * d00 + h * m[i] * d10 + y[i + 1] * d01 + h * m[i + 1] * d11) / h;
    }

    double deriv2(double t) const {
        if (t <= x.front() || t >= x.back()) return 0.0;
        const int i = seg(t);
        const double h = x[i + 1] - x[i], s = (t - x[i]) / h;
        const double e00 = 12 * s - 6, e10 = 6 * s - 4;
        const double e01 = 6 - 12 * s, e11 = 6 * s - 2;
        return (y[i] * e00 + h * m[i] * e10 + y[i + 1] * e01 + h * m[i + 1] * e11) /
               (h * h);
    }

    double integral(double t) const {
        if (t <= x.front()) return y.front() * (t - x.front());
        if (t >= x.back()) return cum.back() + y.back() * (t - x.back());
        const int i = seg(t);
        const double h = x[i + 1] - x[i], s = (t - x[i]) / h;
        const double H00 = ((0.5 * s - 1) * s * s + 1) * s;
        const double H10 = ((0.25 * s - 2.0 / 3.0) * s + 0.5) * s * s;
        const double H01 = (1 - 0.5 * s) * s * s * s;
        const double H11 = (0.25 * s - 1.0 / 3.0) * s * s * s;
        return cum[i] + h * (y[i] * H00 + h * m[i] * H10 + y[i + 1] * H01 +
                             h * m[i + 1] * H11);
    }
};

} // namespace

AngularProfile table_profile(const std::vector<double>& phi,
                             const std::vector<double>& val) {
    auto mc = std::make_shared<MonotoneCubic>(phi, val);
    AngularProfile p;
    p.f = [mc](double x) { return mc->value(x); };
    p.d1 = [mc](double x) { return mc->deriv(x); };
    p.d2 = [mc](double x) { return mc->deriv2(x); };
    return p;
}

AngularProfile table_integral_profile(const std::vector<double>& phi,
                                      const std::vector<double>& val, double scale) {
    auto mc = std::make_shared<MonotoneCubic>(phi, val);
    AngularProfile p;
    p.f = [mc, scale](double x) { return scale * mc->integral(x); };
    p.d1 = [mc, scale](double x) { return scale * mc->value(x); };
    p.d2 = [mc, scale](double x) { return scale * mc->deriv(x); };
    return p;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

AngularProfile scale_profile(const AngularProfile& p, double s) {
    AngularProfile q;
    q.f = [p, s](double x) { return s * p.f(x); };
    q.d1 = [p, s](double x) { return s * p.d1(x); };
    q.d2 = [p, s](double x) { return s * p.d2(x); };
    return q;
}

} // namespace

NozzleCase scale_perturbations(const NozzleCase& nc, double s) {
    NozzleCase out = nc;
    out.pert.du_en = scale_profile(nc.pert.du_en, s);
    out.pert.chi_trace = scale_profile(nc.pert.chi_trace, s);
    out.pert.w_en = scale_profile(nc.pert.w_en, s);
    out.pert.dS_en = scale_profile(nc.pert.dS_en, s);
    out.pert.dE_en = scale_profile(nc.pert.dE_en, s);
    out.pert.dPhi_ex = scale_profile(nc.pert.dPhi_ex, s);
    out.pert.db = scale_profile(nc.pert.db, s);
    // a doping override is an absolute field, not a deviation: pass through
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(const std::string& origin, int line,
                             const std::string& what) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << what;
    throw ParseError(os.str());
}

double parse_num(const std::string& tok, const std::string& origin, int line) {
    if (tok.empty()) parse_fail(origin, line, "empty number");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        parse_fail(origin, line, "not a number: '" + tok + "'");
    if (errno == ERANGE) parse_fail(origin, line, "number out of range: '" + tok + "'");
    return v;
}

long parse_int(const std::string& tok, const std::string& origin, int line) {
    if (tok.empty()) parse_fail(origin, line, "empty integer");
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size())
        parse_fail(origin, line, "not an integer: '" + tok + "'");
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

struct ProfileSpec {
    std::string family;
    std::vector<double> coef;       // cosine/bump
    std::vector<double> tx, tv;     // table
    int line = 0;
};

ProfileSpec parse_profile(const std::string& value, const std::string& origin,
                          int line) {
    ProfileSpec ps;
    ps.line = line;
    const std::vector<std::string> toks = split_ws(value);
    if (toks.empty()) parse_fail(origin, line, "empty profile specification");
    ps.family = toks[0];
    if (ps.family == "cosine" || ps.family == "bump") {
        for (std::size_t k = 1; k < toks.size(); ++k)
            ps.coef.push_back(parse_num(toks[k], origin, line));
        if (ps.coef.empty())
            parse_fail(origin, line, ps.family + " profile needs coefficients");
        return ps;
    }
    if (ps.family == "table") {
        for (std::size_t k = 1; k < toks.size(); ++k) {
            const std::size_t c = toks[k].find(':');
            if (c == std::string::npos)
                parse_fail(origin, line,
                           "table entries are phi:value pairs, got '" + toks[k] + "'");
            ps.tx.push_back(parse_num(toks[k].substr(0, c), origin, line));
            ps.tv.push_back(parse_num(toks[k].substr(c + 1), origin, line));
        }
        if (ps.tx.size() < 2)
            parse_fail(origin, line, "table profile needs at least two pairs");
        return ps;
    }
    parse_fail(origin, line,
               "unknown profile family '" + ps.family +
                   "' (expected cosine, bump, or table)");
}

AngularProfile build_profile(const ProfileSpec& ps, double phi0) {
    if (ps.family == "cosine") return cosine_profile(ps.coef, phi0);
    if (ps.family == "bump") return bump_profile(ps.coef, phi0);
    return table_profile(ps.tx, ps.tv);
}

AngularProfile build_integral_profile(const ProfileSpec& ps, double phi0,
                                      double scale) {
    if (ps.family == "cosine") return cosine_integral_profile(ps.coef, phi0, scale);
    if (ps.family == "bump") return bump_integral_profile(ps.coef, phi0, scale);
    return table_integral_profile(ps.tx, ps.tv, scale);
}

} // namespace

NozzleCase parse_case_text(const std::string& text, const std::string& origin) {
    // section -> key -> (line, raw value); duplicates rejected
    std::map<std::string, std::map<std::string, std::pair<int, std::string>>> doc;
    static const std::vector<std::string> known_sections = {
        "geometry", "gas", "background", "perturbation", "numerics"};

    {
        std::istringstream is(text);
        std::string line;
        std::string section;
        int ln = 0;
        while (std::getline(is, line)) {
            ++ln;
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    parse_fail(origin, ln, "unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                if (std::find(known_sections.begin(), known_sections.end(),
                              section) == known_sections.end())
                    parse_fail(origin, ln, "unknown section [" + section + "]");
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                parse_fail(origin, ln, "expected 'key = value', got '" + line + "'");
            if (section.empty())
                parse_fail(origin, ln, "key before any [section] header");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) parse_fail(origin, ln, "empty key");
            if (doc[section].count(key))
                parse_fail(origin, ln, "duplicate key '" + key + "'");
            doc[section][key] = {ln, value};
        }
    }

    NozzleCase nc;
    nc.name = origin;

    auto take = [&](const std::string& sec,
                    const std::string& key) -> const std::pair<int, std::string>* {
        auto s = doc.find(sec);
        if (s == doc.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        const auto* p = &k->second;
        return p;
    };
    auto num = [&](const std::string& sec, const std::string& key, double dflt) {
        const auto* p = take(sec, key);
        return p ? parse_num(p->second, origin, p->first) : dflt;
    };
    auto inum = [&](const std::string& sec, const std::string& key, long dflt) {
        const auto* p = take(sec, key);
        return p ? parse_int(p->second, origin, p->first) : dflt;
    };

    nc.geom.r_en = num("geometry", "r_en", 1.5);
    nc.geom.r_ex = num("geometry", "r_ex", 2.5);
    nc.geom.phi0 = num("geometry", "phi0", 0.5);
    nc.gas.gamma = num("gas", "gamma", 2.0);
    nc.gas.S0 = num("gas", "S0", 1.0);
    nc.bg.gas = nc.gas;
    nc.bg.r_en = nc.geom.r_en;
    nc.bg.r_ex = nc.geom.r_ex;
    nc.bg.m0 = num("background", "m0", 1.0);
    nc.bg.rho0 = num("background", "rho0", 0.1);
    nc.bg.E0 = num("background", "E0", 0.0);
    nc.bg.b0 = num("background", "b0", 0.05);
    nc.bg.rtol = num("background", "rtol", nc.bg.rtol);
    nc.bg.atol = num("background", "atol", nc.bg.atol);
    nc.bg.sonic_guard = num("background", "sonic_guard", nc.bg.sonic_guard);
    nc.bg.nsamp = int(inum("background", "nsamp", nc.bg.nsamp));
    nc.nr = int(inum("numerics", "nr", 64));
    nc.nphi = int(inum("numerics", "nphi", 16));
    nc.modes = int(inum("numerics", "modes", 8));
    const double tol_all = num("numerics", "tol", -1.0);
    if (tol_all > 0.0) nc.iter.tol_p = nc.iter.tol_v = nc.iter.tol_t = tol_all;
    nc.iter.tol_p = num("numerics", "tol_p", nc.iter.tol_p);
    nc.iter.tol_v = num("numerics", "tol_v", nc.iter.tol_v);
    nc.iter.tol_t = num("numerics", "tol_t", nc.iter.tol_t);
    nc.iter.relax = num("numerics", "relax", nc.iter.relax);
    nc.iter.max_p = int(inum("numerics", "max_p", nc.iter.max_p));
    nc.iter.max_v = int(inum("numerics", "max_v", nc.iter.max_v));
    nc.iter.max_t = int(inum("numerics", "max_t", nc.iter.max_t));
    nc.iter.budget_p = num("numerics", "budget_p", nc.iter.budget_p);
    nc.iter.budget_v = num("numerics", "budget_v", nc.iter.budget_v);
    nc.iter.budget_t = num("numerics", "budget_t", nc.iter.budget_t);
    nc.iter.sonic_margin = num("numerics", "sonic_margin", nc.iter.sonic_margin);

    // perturbation channels
    static const std::vector<std::string> channels = {"u_en",  "v_en", "w_en", "S_en",
                                                      "E_en", "Phi_ex", "b"};
    if (doc.count("perturbation")) {
        for (const auto& kv : doc.at("perturbation")) {
            if (std::find(channels.begin(), channels.end(), kv.first) ==
                channels.end())
                parse_fail(origin, kv.second.first,
                           "unknown perturbation channel '" + kv.first + "'");
            const ProfileSpec ps =
                parse_profile(kv.second.second, origin, kv.second.first);
            if (kv.first == "u_en")
                nc.pert.du_en = build_profile(ps, nc.geom.phi0);
            else if (kv.first == "v_en")
                nc.pert.chi_trace =
                    build_integral_profile(ps, nc.geom.phi0, nc.geom.r_en);
            else if (kv.first == "w_en")
                nc.pert.w_en = build_profile(ps, nc.geom.phi0);
            else if (kv.first == "S_en")
                nc.pert.dS_en = build_profile(ps, nc.geom.phi0);
            else if (kv.first == "E_en")
                nc.pert.dE_en = build_profile(ps, nc.geom.phi0);
            else if (kv.first == "Phi_ex")
                nc.pert.dPhi_ex = build_profile(ps, nc.geom.phi0);
            else
                nc.pert.db = build_profile(ps, nc.geom.phi0);
        }
    }

    // reject unknown keys in the scalar sections
    static const std::map<std::string, std::vector<std::string>> known_keys = {
        {"geometry", {"r_en", "r_ex", "phi0"}},
        {"gas", {"gamma", "S0"}},
        {"background",
         {"m0", "rho0", "E0", "b0", "rtol", "atol", "sonic_guard", "nsamp"}},
        {"numerics",
         {"nr", "nphi", "modes", "tol", "tol_p", "tol_v", "tol_t", "relax",
          "max_p", "max_v", "max_t", "budget_p", "budget_v", "budget_t",
          "sonic_margin"}}};
    for (const auto& sec : known_keys) {
        if (!doc.count(sec.first)) continue;
        for (const auto& kv : doc.at(sec.first))
            if (std::find(sec.second.begin(), sec.second.end(), kv.first) ==
                sec.second.end())
                parse_fail(origin, kv.second.first,
                           "unknown key '" + kv.first + "' in [" + sec.first + "]");
    }

    // static validation
    auto invalid = [&](const std::string& what) {
        throw ValidationError(origin + ": " + what);
    };
    if (!(nc.gas.gamma > 1.0)) invalid("gamma must exceed 1");
    if (!(nc.gas.S0 > 0.0)) invalid("S0 must be positive");
    if (!(nc.geom.r_en > 1.0)) invalid("r_en must exceed 1");
    if (!(nc.geom.r_ex > nc.geom.r_en)) invalid("r_ex must exceed r_en");
    if (!(nc.geom.phi0 > 0.0 && nc.geom.phi0 < M_PI))
        invalid("phi0 must lie in (0, pi)");
    if (!(nc.bg.m0 > 0.0)) invalid("m0 must be positive");
    const double rho_sonic =
        std::pow(nc.bg.m0 * nc.bg.m0 /
                     (nc.gas.gamma * std::pow(nc.geom.r_en, 4) * nc.gas.S0),
                 1.0 / (nc.gas.gamma + 1.0));
    if (!(nc.bg.rho0 > 0.0 && nc.bg.rho0 < rho_sonic)) {
        std::ostringstream os;
        os << origin << ": rho0 = " << nc.bg.rho0
           << " outside the supersonic admissibility window (0, " << rho_sonic
           << ")";
        throw ValidationError(os.str());
    }
    if (!(nc.bg.b0 >= 0.0)) invalid("b0 must be nonnegative");
    if (nc.nr < 8 || nc.nphi < 5) invalid("grid must be at least 8 x 5");
    if (nc.modes < 0) invalid("modes must be nonnegative");
    if (nc.modes > 64) invalid("modes must not exceed 64");
    if (!(nc.iter.tol_p > 0.0 && nc.iter.tol_v > 0.0 && nc.iter.tol_t > 0.0))
        invalid("tolerances must be positive");
    if (!(nc.iter.relax > 0.0 && nc.iter.relax <= 1.0))
        invalid("relax must lie in (0, 1]");

    validate_compatibility(nc);
    return nc;
}

NozzleCase parse_case(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open case file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_case_text(buf.str(), path);
}

void validate_compatibility(const NozzleCase& nc) {
    const double tol = 1e-8;
    const double p0 = nc.geom.phi0;
    std::vector<std::string> bad;
    auto check = [&](double v, const std::string& what) {
        if (std::abs(v) > tol) {
            std::ostringstream os;
            os << what << " = " << v << " (tolerance " << tol << ")";
            bad.push_back(os.str());
        }
    };
    check(nc.pert.w_en.f(0.0), "w_en(0)");
    check(nc.pert.dPhi_ex.d1(p0), "d(Phi_ex)/dphi at the wall");
    check(nc.pert.db.d1(p0), "d(b)/dphi at the wall");
    check(nc.pert.du_en.d1(p0), "d(u_en)/dphi at the wall");
    check(nc.pert.chi_trace.d2(p0) / nc.geom.r_en, "d(v_en)/dphi at the wall");
    check(nc.pert.w_en.d1(p0), "d(w_en)/dphi at the wall");
    check(nc.pert.dS_en.d1(p0), "d(S_en)/dphi at the wall");
    check(nc.pert.dE_en.d1(p0), "d(E_en)/dphi at the wall");
    if (!bad.empty()) {
        std::string msg = "compatibility conditions violated:";
        for (const std::string& b : bad) msg += "\n  " + b;
        throw CompatibilityError(msg);
    }
}

ArchivePaths write_solution(const std::string& dir, const NozzleCase& nc,
                            std::uint64_t case_hash, const FlowFields& fields,
                            const PrimitiveFields& prim, const SolveReport& rep,
                            const ResidualReport& res,
                            const ConservationReport& cons) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

    ArchivePaths paths;
    paths.solution_csv = dir + "/solution.csv";
    paths.report_json = dir + "/report.json";

    std::ofstream csv(paths.solution_csv, std::ios::binary);
    if (!csv) throw IoError("cannot write " + paths.solution_csv);
    csv << "r,phi,rho,u_r,u_phi,u_theta,S,Phi,M,psi,chi,Psi\n";
    const Grid& g = fields.grid;
    char buf[40];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        csv << buf << sep;
    };
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            put(g.r(i), ',');
            put(g.phi(j), ',');
            put(prim.rho(i, j), ',');
            put(prim.vel.ur(i, j), ',');
            put(prim.vel.uphi(i, j), ',');
            put(prim.vel.utheta(i, j), ',');
            put(fields.S(i, j), ',');
            put(prim.Phi(i, j), ',');
            put(prim.M(i, j), ',');
            put(fields.psi(i, j), ',');
            put(fields.chi(i, j), ',');
            put(fields.Psi(i, j), '\n');
        }
    csv.close();
    if (!csv) throw IoError("failed writing " + paths.solution_csv);

    nlohmann::ordered_json J;
    J["version"] = "1";
    J["case"] = nc.name;
    {
        char hexbuf[24];
        std::snprintf(hexbuf, sizeof hexbuf, "%016llx",
                      static_cast<unsigned long long>(case_hash));
        J["case_hash"] = hexbuf;
    }
    J["grid"] = {{"nr", g.nr}, {"nphi", g.nphi}, {"modes", nc.modes}};
    J["tolerances"] = {{"tol_p", nc.iter.tol_p},
                       {"tol_v", nc.iter.tol_v},
                       {"tol_t", nc.iter.tol_t}};
    J["status"] = to_string(rep.status);
    J["message"] = rep.message;
    J["iterations"] = {{"outer", rep.outer_iters},
                       {"potentials_per_pass", rep.p_iters},
                       {"vorticity_per_outer", rep.v_iters}};
    J["histories"] = {{"potentials", rep.p_history},
                      {"vorticity", rep.v_history},
                      {"transport", rep.t_history}};
    J["relax_used"] = rep.relax_used;
    J["margins"] = {{"min_sup", rep.min_sup_margin},
                    {"min_sub", rep.min_sub_margin},
                    {"min_mach", rep.min_mach_margin},
                    {"mach_loc_r", rep.mach_loc_r},
                    {"mach_loc_phi", rep.mach_loc_phi}};
    J["residuals"] = {{"mass", res.mass},         {"mom_phi", res.mom_phi},
                      {"entropy", res.entropy},   {"angular", res.angular},
                      {"poisson", res.poisson},   {"total", res.total}};
    J["conservation"] = {{"mass_flux_mean", cons.mass_flux_mean},
                         {"mass_flux_spread", cons.mass_flux_spread},
                         {"K_defect", cons.K_defect},
                         {"S_transport", cons.S_transport},
                         {"Lambda_transport", cons.Lambda_transport},
                         {"S_min", cons.S_min},
                         {"S_max", cons.S_max}};

    std::ofstream js(paths.report_json, std::ios::binary);
    if (!js) throw IoError("cannot write " + paths.report_json);
    js << J.dump(2) << "\n";
    js.close();
    if (!js) throw IoError("failed writing " + paths.report_json);
    return paths;
}

SolutionTable read_solution(const std::string& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(csv_path + ": empty file");
    SolutionTable t;
    {
        std::istringstream hs(trim(line));
        std::string col;
        while (std::getline(hs, col, ',')) t.columns.push_back(col);
    }
    t.data.assign(t.columns.size(), {});
    int ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(rs, cell, ',')) {
            if (c >= t.columns.size())
                parse_fail(csv_path, ln, "too many columns");
            t.data[c++].push_back(parse_num(trim(cell), csv_path, ln));
        }
        if (c != t.columns.size()) parse_fail(csv_path, ln, "too few columns");
    }
    if (t.columns.size() < 2 || t.columns[0] != "r" || t.columns[1] != "phi")
        throw ParseError(csv_path + ": expected leading columns r,phi");
    const std::vector<double>& r = t.data[0];
    const std::vector<double>& phi = t.data[1];
    if (r.empty()) throw ParseError(csv_path + ": no data rows");
    std::size_t nphi = 1;
    while (nphi < r.size() && r[nphi] == r[0]) ++nphi;
    if (r.size() % nphi != 0)
        throw ParseError(csv_path + ": node count is not a full tensor grid");
    t.grid.nphi = int(nphi);
    t.grid.nr = int(r.size() / nphi);
    t.grid.r_en = r.front();
    t.grid.r_ex = r.back();
    t.grid.phi0 = phi[nphi - 1];
    return t;
}

} // namespace epnoz
