// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Ring/racetrack-resonator cavity-QED figures of merit.
//
// Unit convention: kappa0 = 2 pi c / (lambda0 Q0) is an angular rate (1/s);
// nu_FSR is entered in ordinary Hz, exactly as resonator FSRs are quoted,
// and enters the cooperativity as-is: C = beta nu_FSR (1 + F_P) / kappa0.
// The superstrong threshold compares the collective Rabi frequency against
// 2 pi nu_FSR (angular). kFsrAngularFactor pins the convention in one place.

#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "slotwg/constants.hpp"
#include "slotwg/errors.hpp"

namespace slotwg {

inline constexpr double kFsrAngularFactor = 2.0 * kPi;

struct ResonatorSpec {
  double nu_fsr_hz = 0.0;   // free spectral range, ordinary Hz
  double lambda0_nm = 0.0;  // resonance wavelength
  double q0 = 0.0;          // intrinsic quality factor

  void validate() const {
    if (!(nu_fsr_hz > 0) || !(lambda0_nm > 0) || !(q0 > 0))
      throw ConfigError("resonator spec fields must all be positive");
  }
};

struct EmitterParams {
  double beta = 0.0;
  double f_p = 0.0;
  std::optional<double> gamma_l_per_s;  // free-space decay rate
  double n_emitters = 1.0;

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0))
      throw ConfigError("emitter beta must lie in [0, 1]");
    if (!(f_p >= 0.0)) throw ConfigError("emitter F_P must be >= 0");
    if (!(n_emitters >= 1.0)) throw ConfigError("emitter count must be >= 1");
    if (gamma_l_per_s && !(*gamma_l_per_s > 0))
      throw ConfigError("gamma_l must be positive when given");
  }
};

enum class CouplingRegime { kWeak, kStrong, kSuperstrong };

inline const char* to_string(CouplingRegime r) {
  switch (r) {
    case CouplingRegime::kWeak: return "weak";
    case CouplingRegime::kStrong: return "strong";
    case CouplingRegime::kSuperstrong: return "superstrong";
  }
  return "?";
}

struct CavityFigures {
  double kappa0_per_s = 0.0;
  double cooperativity = 0.0;
  std::optional<double> g1_per_s;
  std::optional<double> g_n_per_s;
  std::optional<CouplingRegime> regime;
};

/// kappa0 = 2 pi c / (lambda0 Q0).
inline double kappa0(const ResonatorSpec& res) {
  res.validate();
  return 2.0 * kPi * kSpeedOfLightNmps / (res.lambda0_nm * res.q0);
}

/// C = beta nu_FSR (1 + F_P) / kappa0.
inline double cooperativity(const ResonatorSpec& res, const EmitterParams& em) {
  res.validate();
  em.validate();
  return em.beta * res.nu_fsr_hz * (1.0 + em.f_p) / kappa0(res);
}

/// Vacuum Rabi frequency, g1 = sqrt(2 gamma_l beta nu_FSR (1 + F_P)).
inline double vacuum_rabi(const ResonatorSpec& res, const EmitterParams& em) {
  res.validate();
  em.validate();
  if (!em.gamma_l_per_s)
    throw ConfigError("vacuum_rabi requires gamma_l");
  return std::sqrt(2.0 * *em.gamma_l_per_s * em.beta * res.nu_fsr_hz *
                   (1.0 + em.f_p));
}

/// The inverse of Eq.-style cooperativity: C = g1^2 / (2 kappa0 gamma_l).
inline double cooperativity_from_g1(double g1, double kappa0_per_s,
                                    double gamma_l_per_s) {
  return g1 * g1 / (2.0 * kappa0_per_s * gamma_l_per_s);
}

/// Collective (Tavis-Cummings) coupling of N emitters.
inline double collective_rabi(double g1, double n_emitters) {
  return g1 * std::sqrt(n_emitters);
}

/// superstrong: g_N exceeds the (angular) free spectral range;
/// strong: g_N exceeds both loss channels; weak otherwise.
inline CouplingRegime classify_regime(const CavityFigures& fig,
                                      const ResonatorSpec& res,
                                      double gamma_total_per_s) {
  if (!fig.g_n_per_s) throw ConfigError("classify_regime requires g_N");
  const double gn = *fig.g_n_per_s;
  if (gn > kFsrAngularFactor * res.nu_fsr_hz)
    return CouplingRegime::kSuperstrong;
  if (gn > std::max(fig.kappa0_per_s, gamma_total_per_s))
    return CouplingRegime::kStrong;
  return CouplingRegime::kWeak;
}

/// One-stop evaluation used by the CLI.
inline CavityFigures cavity_figures(const ResonatorSpec& res,
                                    const EmitterParams& em) {
  CavityFigures fig;
  fig.kappa0_per_s = kappa0(res);
  fig.cooperativity = cooperativity(res, em);
  if (em.gamma_l_per_s) {
    fig.g1_per_s = vacuum_rabi(res, em);
    fig.g_n_per_s = collective_rabi(*fig.g1_per_s, em.n_emitters);
    // Total emitter linewidth in this model: the Purcell-scaled decay.
    const double gamma_total = *em.gamma_l_per_s * std::max(em.f_p, 1.0);
    fig.regime = classify_regime(fig, res, gamma_total);
  }
  return fig;
}

}  // namespace slotwg
