#include "polyfsi/presets.hpp"

#include "polyfsi/errors.hpp"

namespace polyfsi {

namespace {

const char* kRestState = R"cfg(# Quiescent coupled run: equilibrium density, uniform number density,
# fluid and shell at rest. Nothing may move.
[run]
name = rest-state
scenario = rest-state
t_end = 1.0
dt = 1e-3

[init]
psi = equilibrium
xi_kind = constant
)cfg";

const char* kShearFixedDomain = R"cfg(# Prescribed linear shear on the static slab; configuration density and
# number density evolve, solvent and shell are frozen.
[run]
name = shear-fixed-domain
scenario = shear-fixed-domain
t_end = 0.5
dt = 1e-3

[shear]
rate = 0.25

[init]
psi = equilibrium
xi_kind = constant
)cfg";

const char* kFreeShellVibration = R"cfg(# Elastic shell released from a single-mode displacement, no fluid, no forcing.
[run]
name = free-shell-vibration
scenario = free-shell-vibration
t_end = 0.1
dt = 1e-4

[init]
eta_amp = 0.01
eta_mode = 1

[coupler]
rho = 1e-2
)cfg";

const char* kForcedBreathingShell = R"cfg(# Coupled run driven by an oscillating single-mode shell load plus a small
# solenoidal initial velocity.
[run]
name = forced-breathing-shell
scenario = forced-breathing-shell
t_end = 0.2
dt = 1e-3

[forcing]
kind = breathing
amp = 1.0
freq = 1.0
mode = 1

[init]
u_amp = 0.05
psi = equilibrium
xi_kind = constant

[fluid]
nx = 16
nz = 8

[fp]
quad_nx = 16
quad_nz = 8

[shell]
n1 = 16
)cfg";

const char* kBlowUpGuard = R"cfg(# Strong shell load with a weak regularizer: the displacement must hit the
# admissibility guard and the run must stop with the partial trajectory saved.
[run]
name = blow-up-guard
scenario = blow-up-guard
t_end = 1.0
dt = 1e-3

[forcing]
kind = breathing
amp = 200.0
freq = 0.25
mode = 1

[coupler]
rho = 1e-6

[poly]
kpoly = 0.0
dh = 0.0

[init]
psi = equilibrium
xi_kind = constant

[fluid]
nx = 16
nz = 8

[fp]
quad_nx = 16
quad_nz = 8

[shell]
n1 = 16
)cfg";

}  // namespace

const std::vector<Preset>& scenario_catalogue() {
    static const std::vector<Preset> cat = {
        {"rest-state", kRestState},
        {"shear-fixed-domain", kShearFixedDomain},
        {"free-shell-vibration", kFreeShellVibration},
        {"forced-breathing-shell", kForcedBreathingShell},
        {"blow-up-guard", kBlowUpGuard},
    };
    return cat;
}

const Preset* find_preset(const std::string& name) {
    for (const Preset& p : scenario_catalogue())
        if (p.name == name) return &p;
    return nullptr;
}

RunConfig preset_config(const std::string& name) {
    const Preset* p = find_preset(name);
    if (!p) throw ConfigError("unknown preset: " + name);
    RunConfig cfg;
    cfg.load_text(p->text, "preset:" + name);
    return cfg;
}

}  // namespace polyfsi
