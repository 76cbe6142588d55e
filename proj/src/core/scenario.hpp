#pragma once

// Scenario description, config parsing (flat key = value text with [sections],
// fail-closed on unknown keys) and initial-condition / potential presets.

#include <string>

#include "core/fluid.hpp"

namespace gm {

struct Scenario {
    // model
    std::string model = "qde1";
    bool kinetic = false;
    ScalingKind scaling = ScalingKind::Diffusive;
    FluidKind fluid = FluidKind::QDE1;  // fluid model, or the kinetic equilibrium supplier

    // grid
    std::size_t nr = 64;
    std::size_t np = 64;
    double length = 2.0 * M_PI;
    double pmax = 8.0;

    ModelParams params;

    // initial condition
    std::string density = "constant";
    double density_floor = 1.0;
    double density_amplitude = 0.0;
    double density_width = 0.8;
    std::string polarization = "zero";     // diffusive
    double polarization_amplitude = 0.0;
    std::string spin = "zero";             // hydrodynamic
    double spin_amplitude = 0.0;
    std::string flow = "zero";
    double flow_amplitude = 0.0;

    // potential
    std::string potential = "zero";
    double potential_amplitude = 0.0;
    double barrier_center = -1.0;  // < 0: domain center
    double barrier_width = 1.0;
    double barrier_smoothing = 0.25;

    // run control
    double t_end = 0.1;
    double dt = 0.0;  // 0 = from the CFL bound
    Scheme scheme = Scheme::RK4;
    CflOptions cfl;
    double diagnostics_every = 0.0;  // 0 = every step
    double snapshot_every = 0.0;     // 0 = none

    void validate() const;
};

Scenario parse_config_string(const std::string& text);
Scenario parse_config_file(const std::string& path);

PosField build_potential(const Scenario& s, const PosGrid& g);
DiffusiveState build_diffusive_state(const Scenario& s, const PosGrid& g);
HydroState build_hydro_state(const Scenario& s, const PosGrid& g);

}  // namespace gm
