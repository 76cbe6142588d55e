#pragma once

// Reference solver for the scaled spinorial Wigner-BGK systems in both the
// diffusive and the hydrodynamic scaling. Strang splitting with an exact
// exponential relaxation substep (the collision term is stiff as tau -> 0)
// and RK4 spectral transport.

#include "core/closure.hpp"
#include "core/fluid.hpp"
#include "core/moyal.hpp"

namespace gm {

struct WignerField {
    PauliField w;
    ScalingKind scaling = ScalingKind::Diffusive;
};

// P_+- = (sigma_0 +- (p/|p|).sigma)/2; OriginSingularity at p = 0
std::pair<Mat2, Mat2> band_projection(double p1, double p2);
// E_+-(p) = |p|^2/2m +- v_F |p| (physical units)
std::pair<double, double> band_energy(double p1, double p2, double mass, double v_fermi);

// n_+- = <w_0 +- (p/|p|).w_vec>; asserts momentum-boundary decay
std::pair<PosField, PosField> band_densities(const PauliField& w);

struct HydroMoments {
    PosField n0;
    PosVec3 nvec;
    PosVec2 Jvec;
};
HydroMoments hydro_moments(const PauliField& w);

class KineticSolver {
  public:
    // equilibrium: QDE1/QDE2 for the diffusive scaling, QHE1/QHE2 hydrodynamic
    KineticSolver(const PhaseSpaceGrid& grid, const ModelParams& par, const PosField& V,
                  ScalingKind scaling, FluidKind equilibrium);

    // transport operator T(w) of (T0Ts) / the hydrodynamic system
    PauliField transport(const PauliField& w) const;
    // BGK equilibrium from the instantaneous moments of w
    PauliField local_equilibrium(const PauliField& w) const;

    // one Strang step: half relaxation, RK4 transport, half relaxation
    void step(PauliField& w, double dt) const;
    double default_dt() const;  // resolves the relaxation scale and the CFL

    const PhaseSpaceGrid& grid() const { return grid_; }
    const ModelParams& params() const { return par_; }
    ScalingKind scaling() const { return scaling_; }

  private:
    void relax(PauliField& w, double dt) const;

    PhaseSpaceGrid grid_;
    ModelParams par_;
    ScalingKind scaling_;
    FluidKind equilibrium_;
    ThetaOperator theta_;
};

}  // namespace gm
