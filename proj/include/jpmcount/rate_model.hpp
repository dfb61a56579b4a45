#pragma once

// Fast-decoherence layer: absorption rates, classical rate equations, count
// probabilities, discrimination errors, timing and the two-step protocol.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jpmcount/circuit_model.hpp"

namespace jpm {

/// B_{N,N-2} = 4 g~^2 N (N-1) / (tildeGamma2 + Gamma22), 1/s.
double absorption_rate(int photons, const CouplingRates& rates);

struct OnePhotonAbsorption {
  double b10 = 0.0;    ///< 4 g1^2 / (tildeGamma1 + Gamma11), 1/s
  double ratio = 0.0;  ///< B20 / B10 (0 when B10 = 0)
};
OnePhotonAbsorption one_photon_absorption_rate(const CouplingRates& rates);

/// 1 - exp(-gamma0 t), for vacuum and one-photon inputs alike.
double p_false(double t, double gamma0);

/// (Gamma21 / tildeGamma2)(Gamma10 / tildeGamma1): chance that a level-2
/// excitation relaxes all the way to the ground state instead of tunneling.
double branching_product(const CouplingRates& rates);

struct FlaggedProbability {
  double value = 0.0;
  bool valid = true;  ///< false before the fast-decoherence regime sets in
};

/// Time before which p_bright and the error formulas are flagged, 5/(tildeGamma2 + Gamma22).
double validity_onset(const CouplingRates& rates);

/// 1 - exp(-B t) - x exp(-gamma0 t) with B = B_{N,N-2}. Not clamped.
FlaggedProbability p_bright(double t, const CouplingRates& rates, int photons = 2);

struct DiscriminationPriors {
  double dark = 0.5;    ///< zero or one photon
  double bright = 0.5;  ///< two photons
  void validate() const;
};

/// dark * P_false + bright * (1 - P_bright).
FlaggedProbability discrimination_error(double t, const CouplingRates& rates,
                                        const DiscriminationPriors& priors = {});

struct OptimalTime {
  double t_opt = 0.0;          ///< ln(B20/gamma0)/B20
  double eps_min = 0.0;        ///< closed-form minimal error
  double t_numeric = 0.0;      ///< argmin of the equal-prior error by Brent search
  double eps_numeric = 0.0;
};
OptimalTime optimal_time(const CouplingRates& rates);

/// Occupations of (fock, jpm level 0..2) plus accumulated click probability.
class RateSystemState {
 public:
  explicit RateSystemState(int max_photons);
  /// All population in |photons, 0>.
  static RateSystemState fock_input(int photons);

  int max_photons() const { return max_photons_; }
  double& at(int fock, int jpm);
  double at(int fock, int jpm) const;
  std::span<double> occupations() { return occupations_; }
  std::span<const double> occupations() const { return occupations_; }
  /// Sum of occupations and the click probability.
  double total() const;

  double p_click = 0.0;
  double time = 0.0;

 private:
  int max_photons_;
  std::vector<double> occupations_;
};

/// Numerical solution of the rate-equation ladder (no stimulated emission).
std::vector<RateSystemState> integrate_rate_equations(const RateSystemState& initial,
                                                      const CouplingRates& rates,
                                                      std::span<const double> times,
                                                      double tolerance = 1e-12);

/// Click probability for the |2, 0> input from the inverse Laplace transform
/// of the four-state chain (2,0) -> (0,2) -> (0,1) -> (0,0), evaluated as a
/// sum of residues. Throws DomainError for coincident poles.
double closed_form_click_probability(double t, const CouplingRates& rates);

struct ValidityCheck {
  std::string name;
  double ratio = 0.0;      ///< larger is safer
  double threshold = 0.0;  ///< pass iff ratio >= threshold
  bool pass = false;
};

struct ValidityOptions {
  double factor = 10.0;  ///< operational meaning of "much less than"
  double margin = kDefaultNmaxMargin;
  double gap_factor = 4.0;
  std::optional<double> temperature;  ///< K
  int photon_number = 2;
};

std::vector<ValidityCheck> validity_report(const DeviceConfig& cfg, const LevelStructure& levels,
                                           const CouplingRates& rates, double t,
                                           const ValidityOptions& options = {});

struct ProtocolPriors {
  double p0 = 1.0 / 3.0;
  double p1 = 1.0 / 3.0;
  double p2 = 1.0 / 3.0;
  void validate() const;
};

struct TwoStepOptions {
  ProtocolPriors priors;
  /// Optional stage-2 false-count rate gamma0' (1/s) and stage-2 duration;
  /// neglected when unset.
  std::optional<double> stage2_false_rate;
  double stage2_time = 0.0;
};

struct DetectionReport {
  double t_opt = 0.0;
  double p_false_at_topt = 0.0;
  double p_bright_at_topt = 0.0;
  double eps_min = 0.0;
  double eps2 = 0.0;
  double p_bright_01 = 0.0;
  double b20 = 0.0;
  double b10 = 0.0;
  std::vector<ValidityCheck> validity;
};

/// gamma1' / (Gamma10 + gamma1'): one photon detected in the two-level mode.
double one_photon_bright(double gamma1_one_photon, double Gamma10);

/// Two-step protocol: two-photon discrimination at t_opt, then one-photon
/// discrimination with tunneling rate gamma1_one_photon (1/s).
DetectionReport two_step_error(const CouplingRates& rates, double gamma1_one_photon,
                               const TwoStepOptions& options = {});

}  // namespace jpm
