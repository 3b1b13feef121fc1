#include "polyfsi/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace polyfsi {

namespace {

std::vector<ConfigKeySpec> make_registry() {
    const double inf = 1e300;
    std::vector<ConfigKeySpec> r;
    auto num = [&](const char* k, const char* d, const char* doc, double lo, double hi) {
        r.push_back({k, d, doc, true, lo, hi, ""});
    };
    auto str = [&](const char* k, const char* d, const char* doc, const char* choices) {
        r.push_back({k, d, doc, false, 0, 0, choices});
    };

    str("run.name", "run", "label used for output file names", "");
    num("run.seed", "1", "RNG seed (deterministic outputs for fixed seed)", 0, 9.2e18);
    num("run.t_end", "0.5", "final time", 0, inf);
    num("run.dt", "1e-3", "time step", 1e-12, 1.0);
    str("run.out_dir", "out", "output directory (POLYFSI_OUT_ROOT env var prepends a root)", "");
    num("run.write_fields", "0", "write structured-grid field snapshots (0/1)", 0, 1);
    num("run.write_every", "50", "steps between field snapshots", 1, 1e9);
    str("run.scenario", "rest-state", "preset scenario name for `simulate`", "");

    num("geom.L", "0.5", "collar depth of the boundary tubular neighborhood", 1e-6, 0.95);
    num("geom.Ltilde", "0.5", "admissibility bound used by the elastic energy coercivity", 1e-6, 1.0);
    num("geom.gamma_min", "0.1", "lower bound enforced on the surface measure ratio", 1e-6, 1.0);
    num("geom.newton_tol", "1e-12", "tolerance of the inverse-map Newton iteration", 1e-16, 1e-6);
    num("geom.newton_max_iter", "50", "iteration cap of the inverse-map Newton iteration", 1, 1000);
    num("geom.bump_amp", "0.0", "amplitude of the analytic height bump of the reference surface", -0.4, 0.4);

    str("poly.kind", "fene", "spring law", "hookean|tanner|fene");
    num("poly.b", "10", "domain size parameter of the finitely extensible spring", 2.0, 1e4);
    num("poly.chains", "1", "number of springs K in the chain", 1, 1);
    num("poly.dim", "2", "ambient dimension d of each configuration vector", 2, 2);
    num("poly.eps", "0.1", "center-of-mass diffusion coefficient", 0.0, 100.0);
    num("poly.lambda", "1.0", "relaxation time", 1e-6, 1e6);
    num("poly.kpoly", "1.0", "polymer stress scale factor k", 0.0, 1e6);
    num("poly.dh", "0.5", "quadratic number-density stress coefficient", 0.0, 1e6);
    num("poly.rouse_a11", "2.0", "Rouse matrix entry (K=1)", 1e-6, 1e3);
    num("poly.m_floor", "1e5", "m in the floored weight max(M,0)+1/m", 1.0, 1e12);
    num("poly.ell", "16.0", "cutoff level of the truncated drag/stress", 1e-3, 1e9);
    num("poly.delta", "1e-4", "entropy regularization shift", 0.0, 1.0);
    num("poly.quad_nr", "24", "radial quadrature nodes on the spring domain", 4, 512);
    num("poly.quad_nth", "24", "angular quadrature nodes on the spring domain", 4, 1024);
    num("poly.slock", "5.0", "locking value of |q|^2/2 for the locked spring", 0.1, 1e4);

    num("fp.kmax", "3", "highest angular wavenumber of the configuration basis", 0, 32);
    num("fp.nrad", "5", "radial modes per angular wavenumber", 1, 64);
    num("fp.x_modes", "3", "horizontal Fourier modes of the spatial basis", 0, 32);
    num("fp.z_modes", "3", "vertical cosine modes of the spatial basis", 0, 64);
    num("fp.quad_nx", "32", "horizontal quadrature nodes (midpoint rule)", 4, 1024);
    num("fp.quad_nz", "16", "vertical quadrature nodes (midpoint rule)", 4, 1024);
    num("fp.drag_picard", "1", "fixed-point sweeps for the midpoint drag argument", 0, 8);
    num("fp.tol_neg", "1e-8", "negativity tolerance before clipping inside entropy evaluation", 0.0, 1e-2);

    num("shell.n1", "32", "shell grid size along y1 (power of 2)", 2, 4096);
    num("shell.n2", "2", "shell grid size along y2 (power of 2)", 2, 4096);
    num("shell.eps0", "0.1", "shell thickness", 1e-6, 10.0);
    num("shell.lame_lambda", "1.0", "first Lame constant of the elastic tensor", 0.0, 1e6);
    num("shell.lame_mu", "1.0", "second Lame constant of the elastic tensor", 1e-6, 1e6);
    num("shell.weighted_measure", "0", "include the measure ratio weight in the elastic energy (0/1)", 0, 1);
    num("shell.inner_tol", "1e-12", "inner fixed-point tolerance of the implicit midpoint shell step", 1e-16, 1e-3);
    num("shell.inner_max_iter", "60", "inner iteration cap of the implicit midpoint shell step", 1, 10000);

    num("fluid.nx", "32", "horizontal cells of the staggered fluid grid (power of 2)", 4, 4096);
    num("fluid.nz", "16", "vertical cells of the staggered fluid grid", 4, 4096);
    num("fluid.mu", "1.0", "solvent viscosity", 1e-6, 1e6);

    num("coupler.rho", "1e-2", "regularization strength (mollifier widths scale like its square root)", 1e-12, 1.0);
    num("coupler.theta", "0.5", "damping of the fixed-point update", 1e-3, 1.0);
    num("coupler.tol", "1e-7", "fixed-point tolerance in discrete L2(I;L2)", 1e-15, 1.0);
    num("coupler.max_iter", "200", "fixed-point iteration cap per window", 1, 100000);
    num("coupler.margin", "1e-3", "relative corridor margin kept between sup|eta| and the invertibility bound", 1e-9, 0.5);
    num("coupler.width_space0", "0.5", "base spatial mollifier width", 1e-6, 10.0);
    num("coupler.width_time0", "0.5", "base temporal mollifier width (in units of dt at scale 1)", 1e-6, 100.0);
    num("coupler.width_shell0", "0.5", "base shell mollifier width", 1e-6, 10.0);
    num("coupler.halvings_max", "6", "maximum window halvings before giving up", 0, 32);

    str("forcing.kind", "none", "volume/shell forcing preset", "none|breathing|shear_body");
    num("forcing.amp", "0.0", "forcing amplitude", -1e6, 1e6);
    num("forcing.freq", "1.0", "forcing frequency", 0.0, 1e6);
    num("forcing.mode", "1", "horizontal mode number of the forcing", 0, 64);

    str("init.psi", "equilibrium", "initial configuration density", "equilibrium|shear_perturbed|positive_random");
    num("init.psi_amp", "0.5", "amplitude of the non-equilibrium part of the initial density", 0.0, 0.95);
    num("init.eta_amp", "0.0", "initial shell displacement amplitude", -0.5, 0.5);
    num("init.eta_mode", "1", "initial shell displacement mode", 0, 64);
    num("init.eta1_amp", "0.0", "initial shell velocity amplitude", -10.0, 10.0);
    num("init.u_amp", "0.0", "initial velocity amplitude (solenoidal test pattern)", -100.0, 100.0);
    str("init.xi_kind", "marginal", "initial number density", "marginal|constant|bump");

    num("shear.rate", "1.0", "shear rate of the prescribed-velocity scenarios", -100.0, 100.0);

    return r;
}

const ConfigKeySpec* find_spec(const std::string& key) {
    for (const auto& s : RunConfig::registry())
        if (s.key == key) return &s;
    return nullptr;
}

}  // namespace

const std::vector<ConfigKeySpec>& RunConfig::registry() {
    static const std::vector<ConfigKeySpec> reg = make_registry();
    return reg;
}

RunConfig::RunConfig() {
    for (const auto& s : registry()) values_[s.key] = s.def;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const ConfigKeySpec* spec = find_spec(key);
    if (!spec) throw ConfigError("unknown configuration key: " + key);
    if (spec->numeric) {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
            throw ConfigError("key " + key + ": not a finite number: '" + value + "'");
        if (v < spec->lo || v > spec->hi) {
            std::ostringstream os;
            os << "key " << key << ": value " << value << " out of range [" << spec->lo << ", "
               << spec->hi << "]";
            throw ConfigError(os.str());
        }
    } else if (!spec->choices.empty()) {
        bool ok = false;
        std::stringstream ss(spec->choices);
        std::string tok;
        while (std::getline(ss, tok, '|'))
            if (tok == value) ok = true;
        if (!ok)
            throw ConfigError("key " + key + ": invalid value '" + value + "' (choices: " +
                              spec->choices + ")");
    }
    values_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

double RunConfig::get_d(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key: " + key);
    return std::strtod(it->second.c_str(), nullptr);
}

int RunConfig::get_i(const std::string& key) const {
    const double v = get_d(key);
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9) throw ConfigError("key " + key + ": expected an integer");
    return static_cast<int>(r);
}

bool RunConfig::get_b(const std::string& key) const { return get_i(key) != 0; }

const std::string& RunConfig::get_s(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key: " + key);
    return it->second;
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        auto ltrim = line.find_first_not_of(" \t\r");
        if (ltrim == std::string::npos) continue;
        auto rtrim = line.find_last_not_of(" \t\r");
        line = line.substr(ltrim, rtrim - ltrim + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        std::string k = line.substr(0, eq);
        std::string v = line.substr(eq + 1);
        auto strip = [](std::string s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        k = strip(k);
        v = strip(v);
        if (!section.empty()) k = section + "." + k;
        try {
            set(k, v);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open configuration file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    load_text(ss.str(), path);
}

std::string RunConfig::dump() const {
    std::ostringstream os;
    std::string section;
    for (const auto& s : registry()) {
        const auto dot = s.key.find('.');
        const std::string sec = s.key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) os << "\n";
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << s.key.substr(dot + 1) << " = " << values_.at(s.key) << "\n";
    }
    return os.str();
}

std::string RunConfig::help_text() {
    std::ostringstream os;
    for (const auto& s : registry()) {
        os << "  " << s.key << " (default " << s.def << ")";
        if (s.numeric)
            os << " [" << s.lo << ", " << s.hi << "]";
        else if (!s.choices.empty())
            os << " {" << s.choices << "}";
        os << "\n      " << s.doc << "\n";
    }
    return os.str();
}

}  // namespace polyfsi
