#pragma once

// Time integration of the four explicit fluid models on the periodic position
// grid: two quantum-diffusive (particle density + pseudo-spin polarization)
// and two quantum-hydrodynamic (density + spin vector + flow vector).

#include <string>
#include <utility>
#include <vector>

#include "core/closure.hpp"

namespace gm {

struct DiffusiveState {
    PosField n0;
    PosField nsigma;
};

struct HydroState {
    PosField n0;
    PosVec3 nvec;
    PosVec2 Jvec;  // in-plane flow, third component identically zero
};

enum class FluidKind { QDE1, QDE2, QHE1, QHE2 };
enum class Scheme { RK4, SSPRK3 };

bool is_diffusive(FluidKind k);
FluidKind fluid_kind_from_name(const std::string& name);
std::string fluid_kind_name(FluidKind k);

// V_B = -(eps^2/6) lap(sqrt n)/sqrt n
PosField bohm_potential(const PosField& n0, double eps);

struct CflOptions {
    double c_diffusive = 0.2;
    double c_hydro = 0.4;
};

class DiffusiveSolver {
  public:
    DiffusiveSolver(FluidKind kind, const ModelParams& par, const PosField& V,
                    Scheme scheme = Scheme::RK4, CflOptions cfl = {});

    DiffusiveState rhs(const DiffusiveState& s) const;
    double default_dt() const;
    // one step of size dt; invariant violations reject the step and retry with
    // halved dt (10 halvings, then DtUnderflow)
    void advance(DiffusiveState& s, double dt) const;

    FluidKind kind() const { return kind_; }
    const ModelParams& params() const { return par_; }

  private:
    void single_step(DiffusiveState& s, double dt) const;
    bool state_ok(const DiffusiveState& s) const;

    FluidKind kind_;
    ModelParams par_;
    Scheme scheme_;
    CflOptions cfl_;
    PosField V_;
    PosVec2 gradV_;
    PosField lapV_;
    PosField gradV2_;  // |grad V|^2
};

class HydroSolver {
  public:
    HydroSolver(FluidKind kind, const ModelParams& par, const PosField& V,
                Scheme scheme = Scheme::RK4, CflOptions cfl = {});

    HydroState rhs(const HydroState& s) const;
    double default_dt(const HydroState& s) const;
    void advance(HydroState& s, double dt) const;

    FluidKind kind() const { return kind_; }
    const ModelParams& params() const { return par_; }

  private:
    void single_step(HydroState& s, double dt) const;
    bool state_ok(const HydroState& s) const;

    FluidKind kind_;
    ModelParams par_;
    Scheme scheme_;
    CflOptions cfl_;
    PosField V_;
    PosVec2 gradV_;
};

using DiagnosticRow = std::vector<std::pair<std::string, double>>;
DiagnosticRow diagnostics(const DiffusiveState& s);
DiagnosticRow diagnostics(const HydroState& s);

double integral(const PosField& f);                    // \int f dr
double l2_norm(const PosField& f);
double sup_diff(const PosField& a, const PosField& b);

}  // namespace gm
