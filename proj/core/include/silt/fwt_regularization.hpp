#pragma once

// Fourier-Wiener transform integrands of the self-intersection local time and
// their regularizations, evaluated pointwise and integrated over the simplex.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "silt/function_spec.hpp"
#include "silt/integrator_process.hpp"
#include "silt/operator_catalog.hpp"
#include "silt/parallel.hpp"
#include "silt/simplex_rule.hpp"

namespace silt {

// Test directions (h1, h2) for the two planar coordinates.
struct FwtProbe {
  std::string label;
  GridFunction h1;
  GridFunction h2;
};

struct ProbeSpec {
  std::string label;
  FunctionSpec h1;
  FunctionSpec h2;
};

FwtProbe realize(const ProbeSpec& spec, const GridContext& ctx);

// (2 pi)^-(k-1) G^-1 exp(-(|P h1|^2 + |P h2|^2) / 2), P the projection onto
// the span of the increment images. Throws SingularGram when G is clamped to 0.
double fwt_integrand(const OperatorMatrix& op, const SimplexPoint& times, const FwtProbe& probe);

// G^-1 sum_M (-1)^|M| exp(-|P_M h|^2 / 2) over subsets of the orthonormalized
// increments, no (2 pi) factor. Evaluated as sum_M (-1)^|M| expm1(-|P_M h|^2/2),
// which is the same sum because the signs cancel for k >= 2.
double regularized_integrand_thm1(const OperatorMatrix& op, const SimplexPoint& times, const GridFunction& h);

// |A1_[t1,t2]|^-2 (exp(-|P h|^2 / 2) - 1), P the projection onto A1_[t1,t2].
// Throws KernelIndicator when A1_[t1,t2] vanishes within tolerance.
double thm2_integrand(const OperatorMatrix& op, double t1, double t2, const GridFunction& h);

struct QuadratureLevel {
  int n = 0;
  double value = 0.0;
  std::size_t tuples = 0;
  std::size_t singular_hits = 0;
  double singular_weight = 0.0;  // simplex measure of the skipped tuples
};

struct QuadratureReport {
  std::string integrand;
  int k = 0;
  double delta = 0.0;
  double value = 0.0;  // finest level
  std::vector<QuadratureLevel> levels;
  double error_estimate = 0.0;  // |difference of the last two levels|, 0 for one level
  std::size_t singular_hits = 0;  // finest level
  // Convention flags.
  bool two_pi_factor = false;
  std::string sign_convention;  // "none", "one_minus_exp" (1 - e^...) or "exp_minus_one" (e^... - 1)
  std::string domain;           // "full_simplex" or "delta_simplex"
};

// Integral of 1/G over Delta_k^delta at each grid level. Throws
// ConditionsViolated when the operator has no bounded-below complement or its
// kernel dimension changes between levels.
QuadratureReport theorem3_integral(const OperatorSpec& spec, int k, double delta, const std::vector<int>& levels,
                                   const Exec& exec = {});
QuadratureReport theorem3_integral(const OperatorMatrix& op, int k, double delta, const Exec& exec = {});

// -ln(delta) - (1 - delta): the k = 2 Wiener value of the integral above.
double wiener_inverse_gram_integral_k2(double delta);

struct FwtMode {
  enum class Kind { Thm1FullSimplex, Thm2K2, Eq3Delta };
  Kind kind = Kind::Thm1FullSimplex;
  double delta = 0.0;  // Eq3Delta only

  static FwtMode thm1_full_simplex() { return {Kind::Thm1FullSimplex, 0.0}; }
  static FwtMode thm2_k2() { return {Kind::Thm2K2, 0.0}; }
  static FwtMode eq3_delta(double d) { return {Kind::Eq3Delta, d}; }
};

std::string to_string(const FwtMode& mode);

// Regularized modes integrate the h1 direction of the probe; eq3_delta uses
// both. Thm2K2 needs k = 2 and an identity-plus-compact operator
// (UnsupportedSpec otherwise).
QuadratureReport regularized_fwt_quadrature(const OperatorSpec& spec, int k, const ProbeSpec& probe,
                                            const FwtMode& mode, const std::vector<int>& levels,
                                            const Exec& exec = {});
QuadratureReport regularized_fwt_quadrature(const OperatorMatrix& op, int k, const FwtProbe& probe,
                                            const FwtMode& mode, const Exec& exec = {});

// <h, d>^2 / |d|^2 for d = 1_[a,b] - 1_[t0]; throws DegenerateDifference when
// the indicators coincide.
double lemma2_pairing(const GridFunction& h, NodePair t0, int a, int b);

// For each radius r, the maximum of lemma2_pairing over node pairs on the
// boundary of the box of half-width r around t0. Radii must be decreasing and
// at least 2/n.
std::vector<double> lemma2_weak_convergence_scan(const GridFunction& h, std::pair<double, double> t0,
                                                 const std::vector<double>& radii);

struct RatioBand {
  double radius = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;
};

// Extremes of |A 1_[a,b]|^2 / |1_[a,b] - 1_[t0]|^2 on each box boundary around
// a kernel indicator t0. Throws NotAKernelIndicator otherwise.
std::vector<RatioBand> lemma3_ratio_scan(const OperatorMatrix& op, std::pair<double, double> t0,
                                         const std::vector<double>& radii);

}  // namespace silt
