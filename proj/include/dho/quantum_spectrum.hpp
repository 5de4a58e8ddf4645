#pragma once

// Quantized constant of motion on a truncated Fock basis |0>..|n_max-1>.
//
//   K = K_o + K_I,  K_o = omega J,  J = hbar (N + 1/2)
//   K_I = (omega_alpha/3)[JCS + CJS + CSJ + JSC + SJC + SCJ] - omega_alpha [J phi + phi J]

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "dho/core_model.hpp"

namespace dho {

struct FockSpaceConfig {
  std::size_t n_max = 256;
  std::size_t series_k_max = 64;
  // Allowed max entry of the last retained phi-series term on the trusted block.
  double series_tolerance = 1e-4;

  std::size_t validity_margin() const { return 2 * series_k_max + 2; }
  /// Levels n < trusted_window() are free of basis and series truncation effects.
  std::size_t trusted_window() const { return n_max - validity_margin(); }

  /// InvalidArgument unless series_k_max >= 1 and n_max > validity_margin().
  void validate() const;
};

struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  std::string label;
  std::size_t trusted_window = 0;
  // Largest entry of the first dropped series term (phi and K_I only).
  double truncation_estimate = 0.0;

  std::complex<double> operator()(std::size_t row, std::size_t col) const {
    return entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
};

struct LadderOperators {
  OperatorMatrix a;
  OperatorMatrix a_dagger;
  OperatorMatrix number;  // a_dagger a
};

LadderOperators build_ladder(const FockSpaceConfig& config, const OscillatorParams& params);

/// hbar (N + 1/2).
OperatorMatrix build_j_op(const FockSpaceConfig& config, const OscillatorParams& params);

/// omega J.
OperatorMatrix build_k0(const FockSpaceConfig& config, const OscillatorParams& params);

struct SineCosine {
  OperatorMatrix s_hat;  // S|n> = (i/2)(|n+1> - |n-1>)
  OperatorMatrix c_hat;  // C|n> = (1/2)(|n+1> + |n-1>)
};

SineCosine build_sine_cosine(const FockSpaceConfig& config);

/// binom(-1/2, k) by b_0 = 1, b_k = b_{k-1} (-1/2 - k + 1) / k.
double binomial_minus_half(std::size_t k);

/// (pi/2) I - sum_{k=0}^{series_k_max} [(-1)^k / (2k+1)] binom(-1/2, k) C^{2k+1},
/// symmetrized. Throws SeriesNotConverged if the last retained term has an
/// entry above config.series_tolerance on the trusted block.
OperatorMatrix build_phi_op(const FockSpaceConfig& config);

/// Symmetrized K_I. The second overload reuses a prebuilt phi.
OperatorMatrix build_k_interaction(const FockSpaceConfig& config, const OscillatorParams& params);
OperatorMatrix build_k_interaction(const FockSpaceConfig& config, const OscillatorParams& params,
                                   const OperatorMatrix& phi);

/// <n|K_I|n>. OutsideTrustedWindow unless n < trusted window.
double first_order_shift(std::size_t n, const FockSpaceConfig& config,
                         const OscillatorParams& params);
double first_order_shift(std::size_t n, const OperatorMatrix& k_interaction);

/// omega - pi omega_alpha.
double shifted_frequency(const OscillatorParams& params);

/// The printed closed form for <k|K_I|n>:
///   (hbar wa / 12)[(2k+4n+5) d_{k,n+2} - (2k+4n+1) d_{k,n-2}]
///   + hbar wa (n+k+1) sum_{l<=L} sum_{s<=2l+1} [(-1)^l/(2l+1)] binom(-1/2,l) binom(2l+1,s) d_{k,n-2l-1-s}
/// It is real; the constructed matrix element is compared against it.
std::complex<double> matrix_element_closed_form(std::size_t k, std::size_t n,
                                                const FockSpaceConfig& config,
                                                const OscillatorParams& params);

struct SecondOrderShift {
  double value = 0.0;
  // Power-law extrapolation of the terms beyond the trusted window.
  double tail_estimate = 0.0;
};

/// sum_{k != n, k < window} |<k|K_I|n>|^2 / (E_n - E_k).
SecondOrderShift second_order_shift_sum(std::size_t n, const FockSpaceConfig& config,
                                        const OscillatorParams& params);
SecondOrderShift second_order_shift_sum(std::size_t n, const OperatorMatrix& k_interaction,
                                        const OscillatorParams& params);

/// The printed second-order closed form, s summed over 0..2l+1 without a k >= 0 constraint.
double second_order_closed_form(std::size_t n, const FockSpaceConfig& config,
                                const OscillatorParams& params);

struct SpectrumLevel {
  std::size_t n = 0;
  double e0 = 0.0;
  double de1 = 0.0;
  double de2 = 0.0;
  double de2_tail = 0.0;
  double e_pert = 0.0;  // e0 + de1 + de2
  double e_diag = 0.0;
  double de2_closed_form = 0.0;
  double e_diag_doubled = 0.0;  // same level with n_max doubled
  double truncation_change = 0.0;  // |e_diag_doubled - e_diag| / |e_diag|
  bool stable = true;
};

struct SpectrumReport {
  OscillatorParams params;
  FockSpaceConfig config;
  std::vector<SpectrumLevel> levels;
  double max_truncation_change = 0.0;
  bool truncation_stable = true;
};

/// Relative change of a reported eigenvalue under n_max doubling that still counts as stable.
inline constexpr double kTruncationStabilityTolerance = 1e-8;

enum class TruncationPolicy { Enforce, Report };

/// Full Hermitian diagonalization of K at n_max and 2 n_max, paired with the
/// perturbative predictions for the lowest `level_count` levels.
/// Enforce throws TruncationUnstable when any level moves by more than the
/// tolerance; Report only clears the flags.
SpectrumReport diagonalize_k(const FockSpaceConfig& config, const OscillatorParams& params,
                             std::size_t level_count = 21,
                             TruncationPolicy policy = TruncationPolicy::Enforce);

/// Ascending eigenvalues of K_o + K_I.
std::vector<double> k_eigenvalues(const FockSpaceConfig& config, const OscillatorParams& params);

}  // namespace dho
