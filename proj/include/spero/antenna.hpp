// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "spero/common.hpp"

namespace spero {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kMu0 = 4.0 * kPi * 1e-7;  // H/m

// Electrically small loop antenna. Wavelength and angular frequency are
// independent inputs so either can be pinned exactly when reproducing a
// published operating point.
struct AntennaSpec {
  double circumference = 0.08;    // C, m
  int turns = 1;                  // N
  double wire_diameter = 0.001;   // b, m
  double conductivity = 5.8e7;    // sigma, S/m (copper)
  double wavelength = 18.75;      // lambda, m
  double omega = 2.0 * kPi * 16e6;  // rad/s
  double mu0 = kMu0;
  double directivity = 1.5;       // D, small-loop far-field value
  std::optional<double> r_ant;    // antenna resistance override, ohms
  double r_inst = 50.0;           // instrument input, ohms

  void validate() const {
    if (turns < 0) throw ConfigError("turns must be >= 0");
    if (circumference <= 0 || wire_diameter <= 0 || conductivity <= 0 ||
        wavelength <= 0 || omega <= 0 || mu0 <= 0 || directivity <= 0 ||
        r_inst <= 0)
      throw ConfigError("antenna parameters must be positive");
    if (r_ant && *r_ant <= 0)
      throw ConfigError("antenna resistance override must be positive");
  }
};

// R_r = 20 pi^2 (C/lambda)^4 N^2
inline double radiation_resistance(const AntennaSpec& s) {
  s.validate();
  double ratio = s.circumference / s.wavelength;
  double r4 = ratio * ratio * ratio * ratio;
  return 20.0 * kPi * kPi * r4 * static_cast<double>(s.turns) *
         static_cast<double>(s.turns);
}

// R_L = (N C / (2 pi b)) * sqrt(omega mu0 / (2 sigma))
inline double loss_resistance(const AntennaSpec& s) {
  s.validate();
  return static_cast<double>(s.turns) * s.circumference /
         (2.0 * kPi * s.wire_diameter) *
         std::sqrt(s.omega * s.mu0 / (2.0 * s.conductivity));
}

// e_cd = R_r / (R_L + R_r)
inline double radiation_efficiency(const AntennaSpec& s) {
  double rr = radiation_resistance(s);
  double rl = loss_resistance(s);
  if (rr + rl <= 0.0)
    throw DegenerateAntenna("zero radiation and loss resistance");
  return rr / (rl + rr);
}

// A_e = e_cd lambda^2 D / (4 pi)
inline double effective_aperture(const AntennaSpec& s) {
  return radiation_efficiency(s) * s.wavelength * s.wavelength *
         s.directivity / (4.0 * kPi);
}

// G = e_cd D
inline double antenna_gain(const AntennaSpec& s) {
  return radiation_efficiency(s) * s.directivity;
}

// P_r = P_t G A_e sigma_rcs / ((4 pi)^2 R^4).  The cross-section sigma_rcs
// defaults to 1: the geometry term is negligible at near-field probing
// distances but the formula keeps it as an input.
inline double received_power(double p_t, double gain, double aperture,
                             double sigma_rcs, double r_dist) {
  if (p_t <= 0 || r_dist <= 0 || sigma_rcs <= 0)
    throw ConfigError("received_power inputs must be positive");
  double four_pi_sq = (4.0 * kPi) * (4.0 * kPi);
  double r4 = r_dist * r_dist * r_dist * r_dist;
  return p_t * gain * aperture * sigma_rcs / (four_pi_sq * r4);
}

inline double received_power(const AntennaSpec& s, double p_t, double r_dist,
                             double sigma_rcs = 1.0) {
  return received_power(p_t, antenna_gain(s), effective_aperture(s),
                        sigma_rcs, r_dist);
}

inline double antenna_resistance(const AntennaSpec& s) {
  if (s.r_ant) return *s.r_ant;
  double r = radiation_resistance(s) + loss_resistance(s);
  if (r <= 0.0) throw DegenerateAntenna("zero antenna resistance");
  return r;
}

// V_inst = sqrt(P_r / R_ant) R_inst
inline double instrument_voltage(double p_r, double r_ant, double r_inst) {
  if (p_r < 0) throw ConfigError("received power must be >= 0");
  if (r_ant <= 0) throw DegenerateAntenna("antenna resistance must be positive");
  if (r_inst <= 0) throw ConfigError("instrument load must be positive");
  return std::sqrt(p_r / r_ant) * r_inst;
}

inline double instrument_voltage(const AntennaSpec& s, double p_t,
                                 double r_dist, double sigma_rcs = 1.0) {
  return instrument_voltage(received_power(s, p_t, r_dist, sigma_rcs),
                            antenna_resistance(s), s.r_inst);
}

// I = 20 log10(V_test / V_ref); V_ref defaults to the 3 V reference level.
inline double magnitude_db(double v_test, double v_ref = 3.0) {
  if (v_test <= 0 || v_ref <= 0)
    throw NonPositiveVoltage("voltages must be positive");
  return 20.0 * std::log10(v_test / v_ref);
}

struct AntennaSweepRow {
  int turns;
  double r_r, r_l, e_cd, gain, a_e, p_r, v_inst;
};

// Turn-count sweep at fixed geometry; shows the efficiency/voltage trade-off
// as the loss resistance grows linearly and radiation quadratically in N.
inline std::vector<AntennaSweepRow> sweep_turns(AntennaSpec s, int n_lo,
                                                int n_hi, double p_t,
                                                double r_dist,
                                                double sigma_rcs = 1.0) {
  if (n_lo < 1 || n_hi < n_lo) throw ConfigError("bad turn range");
  std::vector<AntennaSweepRow> rows;
  for (int n = n_lo; n <= n_hi; n++) {
    s.turns = n;
    AntennaSweepRow row;
    row.turns = n;
    row.r_r = radiation_resistance(s);
    row.r_l = loss_resistance(s);
    row.e_cd = radiation_efficiency(s);
    row.gain = antenna_gain(s);
    row.a_e = effective_aperture(s);
    row.p_r = received_power(s, p_t, r_dist, sigma_rcs);
    row.v_inst = instrument_voltage(row.p_r, antenna_resistance(s), s.r_inst);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace spero
