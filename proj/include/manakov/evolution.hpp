#pragma once

#include <string>

#include "manakov/direct.hpp"

namespace manakov {

enum class Flow { manakov_lambda2, sasa_satsuma_lambda3 };

int flow_exponent(Flow f);
std::string flow_name(Flow f);
/// Accepts "manakov"/"lambda2"/"2" and "sasa-satsuma"/"lambda3"/"3".
Flow parse_flow(const std::string& s);

/// Phase constants kappa in rho(t) = rho e^{i kappa lambda^p t}; defaults are the calibrated values.
struct PhaseConvention {
    double kappa2 = 2.0;
    double kappa3 = -8.0;
    double kappa(Flow f) const { return f == Flow::manakov_lambda2 ? kappa2 : kappa3; }
};

struct EvolvedScatteringData {
    ScatteringData data;
    double t = 0.0;
    Flow flow = Flow::manakov_lambda2;
    double kappa = 0.0;
};

/// rho_k e^{i kappa lambda^p t}, C_i e^{i kappa z_i^p t}.
EvolvedScatteringData evolve_scattering(const ScatteringData& data, double t, Flow flow, double kappa);
inline EvolvedScatteringData evolve_scattering(const ScatteringData& data, double t, Flow flow) {
    return evolve_scattering(data, t, flow, PhaseConvention{}.kappa(flow));
}

struct Calibration {
    double raw = 0.0;
    double kappa = 0.0;
    bool snapped = false;
};

/// Fits kappa from the phase drift of the reflection coefficients of a sample potential
/// carried by the PDE oracle over a short time (split-step for p = 2, free u_t = u_xxx
/// propagation for p = 3, which needs a small sample). Snaps to {+-2,+-4} or {+-4,+-8} within 5%.
Calibration calibrate_phase_convention(const GridPotential& sample, Flow flow);

/// Strang splitting for i u_t + u_xx/2 + eps(|u|^2+|v|^2) u = 0 (same for v) with zero padding
/// of `padding` times the domain length on each side. Sets *warn when dt max|U|^2 > 0.1.
GridPotential split_step_manakov(const GridPotential& pot, double t, double dt = 1e-3, bool* warn = nullptr,
                                 double padding = 0.25);

/// Linear part of the Sasa-Satsuma flow in the frame of the 3x3 problem: u_t = u_xxx for both components.
GridPotential free_airy(const GridPotential& pot, double t, double padding = 0.25);

}  // namespace manakov
