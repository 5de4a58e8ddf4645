#include "dho/quantum_spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "dho/error.hpp"

namespace dho {

namespace {

using Matrix = Eigen::MatrixXcd;
using Index = Eigen::Index;
using cd = std::complex<double>;

constexpr double kPi = std::numbers::pi;

Index dim(const FockSpaceConfig& config) { return static_cast<Index>(config.n_max); }

OperatorMatrix make(Matrix m, std::string label, const FockSpaceConfig& config) {
  return {std::move(m), std::move(label), config.trusted_window(), 0.0};
}

// C * m for the tridiagonal cosine operator, O(n^2).
Matrix cosine_times(const Matrix& m) {
  const Index n = m.rows();
  Matrix out = Matrix::Zero(n, m.cols());
  if (n > 1) {
    out.topRows(n - 1) += 0.5 * m.bottomRows(n - 1);
    out.bottomRows(n - 1) += 0.5 * m.topRows(n - 1);
  }
  return out;
}

double max_abs_on_block(const Matrix& m, std::size_t window) {
  const auto w = static_cast<Index>(window);
  return m.topLeftCorner(w, w).cwiseAbs().maxCoeff();
}

void require_trusted(std::size_t n, std::size_t window) {
  if (n >= window) {
    throw Error(ErrorCode::OutsideTrustedWindow,
                "level " + std::to_string(n) + " is outside the trusted window n < " +
                    std::to_string(window));
  }
}

double series_coefficient(std::size_t k) {
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign / static_cast<double>(2 * k + 1) * binomial_minus_half(k);
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

std::vector<double> eigenvalues_of(const FockSpaceConfig& config, const OscillatorParams& params,
                                   const OperatorMatrix& k_interaction) {
  const Matrix k = hermitian_part(build_k0(config, params).entries + k_interaction.entries);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(k, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "Hermitian eigensolver failed");
  }
  const Eigen::VectorXd values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

}  // namespace

void FockSpaceConfig::validate() const {
  if (series_k_max < 1) {
    throw Error(ErrorCode::InvalidArgument, "series_k_max must be at least 1");
  }
  if (n_max <= validity_margin()) {
    throw Error(ErrorCode::InvalidArgument,
                "n_max = " + std::to_string(n_max) + " must exceed 2 series_k_max + 2 = " +
                    std::to_string(validity_margin()));
  }
  if (!(series_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "series tolerance must be positive");
  }
}

LadderOperators build_ladder(const FockSpaceConfig& config, const OscillatorParams& params) {
  config.validate();
  params.validate();
  const Index n = dim(config);
  Matrix a = Matrix::Zero(n, n);
  for (Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  Matrix ad = a.adjoint();
  Matrix number = ad * a;
  return {make(std::move(a), "a", config), make(std::move(ad), "a_dagger", config),
          make(std::move(number), "N", config)};
}

OperatorMatrix build_j_op(const FockSpaceConfig& config, const OscillatorParams& params) {
  config.validate();
  params.validate();
  const Index n = dim(config);
  Matrix j = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) j(k, k) = params.hbar * (static_cast<double>(k) + 0.5);
  return make(std::move(j), "J", config);
}

OperatorMatrix build_k0(const FockSpaceConfig& config, const OscillatorParams& params) {
  OperatorMatrix k0 = build_j_op(config, params);
  k0.entries *= params.omega;
  k0.label = "K_o";
  return k0;
}

SineCosine build_sine_cosine(const FockSpaceConfig& config) {
  config.validate();
  const Index n = dim(config);
  Matrix s = Matrix::Zero(n, n);
  Matrix c = Matrix::Zero(n, n);
  for (Index k = 0; k + 1 < n; ++k) {
    s(k + 1, k) = cd(0.0, 0.5);
    s(k, k + 1) = cd(0.0, -0.5);
    c(k + 1, k) = 0.5;
    c(k, k + 1) = 0.5;
  }
  return {make(std::move(s), "S", config), make(std::move(c), "C", config)};
}

double binomial_minus_half(std::size_t k) {
  double b = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    b *= (-0.5 - static_cast<double>(i) + 1.0) / static_cast<double>(i);
  }
  return b;
}

OperatorMatrix build_phi_op(const FockSpaceConfig& config) {
  config.validate();
  const Index n = dim(config);
  const std::size_t window = config.trusted_window();
  Matrix phi = Matrix::Identity(n, n) * (kPi / 2.0);
  Matrix power = cosine_times(Matrix::Identity(n, n));  // C^{2k+1}
  double last_term = 0.0;
  for (std::size_t k = 0; k <= config.series_k_max; ++k) {
    const double coef = series_coefficient(k);
    phi -= coef * power;
    if (k == config.series_k_max) last_term = std::abs(coef) * max_abs_on_block(power, window);
    power = cosine_times(cosine_times(power));
  }
  if (last_term > config.series_tolerance) {
    throw Error(ErrorCode::SeriesNotConverged,
                "last phi-series term has entries of size " + std::to_string(last_term) +
                    " > tolerance " + std::to_string(config.series_tolerance));
  }
  OperatorMatrix out = make(hermitian_part(phi), "phi", config);
  out.truncation_estimate =
      std::abs(series_coefficient(config.series_k_max + 1)) * max_abs_on_block(power, window);
  return out;
}

OperatorMatrix build_k_interaction(const FockSpaceConfig& config, const OscillatorParams& params) {
  return build_k_interaction(config, params, build_phi_op(config));
}

OperatorMatrix build_k_interaction(const FockSpaceConfig& config, const OscillatorParams& params,
                                   const OperatorMatrix& phi) {
  params.validate();
  config.validate();
  if (phi.entries.rows() != dim(config)) {
    throw Error(ErrorCode::InvalidArgument, "phi was built for a different basis size");
  }
  const Eigen::VectorXcd j = build_j_op(config, params).entries.diagonal();
  const auto [s_op, c_op] = build_sine_cosine(config);
  const Matrix& s = s_op.entries;
  const Matrix& c = c_op.entries;
  const Matrix cs = c * s;
  const Matrix sc = s * c;
  const Matrix js = j.asDiagonal() * s;
  const Matrix jc = j.asDiagonal() * c;

  Matrix bracket = j.asDiagonal() * cs;  // JCS
  bracket += c * js;                     // CJS
  bracket += cs * j.asDiagonal();        // CSJ
  bracket += j.asDiagonal() * sc;        // JSC
  bracket += s * jc;                     // SJC
  bracket += sc * j.asDiagonal();        // SCJ

  const Matrix j_phi = j.asDiagonal() * phi.entries;
  const Matrix phi_j = phi.entries * j.asDiagonal();
  Matrix k = (params.omega_alpha / 3.0) * bracket - params.omega_alpha * (j_phi + phi_j);

  OperatorMatrix out = make(hermitian_part(k), "K_I", config);
  // dropped phi terms enter through omega_alpha (J phi + phi J)
  out.truncation_estimate = 2.0 * params.omega_alpha * params.hbar *
                            static_cast<double>(config.trusted_window()) *
                            phi.truncation_estimate;
  return out;
}

double first_order_shift(std::size_t n, const FockSpaceConfig& config,
                         const OscillatorParams& params) {
  config.validate();
  require_trusted(n, config.trusted_window());
  return first_order_shift(n, build_k_interaction(config, params));
}

double first_order_shift(std::size_t n, const OperatorMatrix& k_interaction) {
  require_trusted(n, k_interaction.trusted_window);
  return k_interaction(n, n).real();
}

double shifted_frequency(const OscillatorParams& params) {
  params.validate();
  return params.omega - kPi * params.omega_alpha;
}

std::complex<double> matrix_element_closed_form(std::size_t k, std::size_t n,
                                                const FockSpaceConfig& config,
                                                const OscillatorParams& params) {
  config.validate();
  params.validate();
  require_trusted(k, config.trusted_window());
  require_trusted(n, config.trusted_window());
  const double scale = params.hbar * params.omega_alpha;
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  double value = 0.0;
  if (k == n + 2) value += scale / 12.0 * (2 * kk + 4 * nn + 5);
  if (k + 2 == n) value -= scale / 12.0 * (2 * kk + 4 * nn + 1);

  double series = 0.0;
  for (std::size_t l = 0; l <= config.series_k_max; ++l) {
    for (std::size_t s = 0; s <= 2 * l + 1; ++s) {
      // d_{k, n-2l-1-s}
      if (k + 2 * l + 1 + s != n) continue;
      series += series_coefficient(l) *
                boost::math::binomial_coefficient<double>(static_cast<unsigned>(2 * l + 1),
                                                          static_cast<unsigned>(s));
    }
  }
  value += scale * (nn + kk + 1.0) * series;
  return {value, 0.0};
}

SecondOrderShift second_order_shift_sum(std::size_t n, const FockSpaceConfig& config,
                                        const OscillatorParams& params) {
  config.validate();
  require_trusted(n, config.trusted_window());
  return second_order_shift_sum(n, build_k_interaction(config, params), params);
}

SecondOrderShift second_order_shift_sum(std::size_t n, const OperatorMatrix& k_interaction,
                                        const OscillatorParams& params) {
  params.validate();
  const std::size_t window = k_interaction.trusted_window;
  require_trusted(n, window);
  const double e_n = params.hbar * params.omega * (static_cast<double>(n) + 0.5);
  SecondOrderShift out;
  std::vector<double> terms(window, 0.0);
  for (std::size_t k = 0; k < window; ++k) {
    if (k == n) continue;
    const double e_k = params.hbar * params.omega * (static_cast<double>(k) + 0.5);
    terms[k] = std::norm(k_interaction(k, n)) / (e_n - e_k);
    out.value += terms[k];
  }

  // Tail beyond the window: fit |term| ~ A k^-p on the last nonzero terms of
  // one parity and integrate the power law.
  std::size_t last = window;
  while (last > n + 1 && terms[last - 1] == 0.0) --last;
  if (last > n + 1) {
    const std::size_t k_hi = last - 1;
    std::size_t k_lo = n + (k_hi - n) / 2;
    if ((k_hi - k_lo) % 2 != 0) --k_lo;
    const double t_hi = std::abs(terms[k_hi]);
    const double t_lo = std::abs(terms[k_lo]);
    if (k_lo > n && t_lo > 0.0 && t_hi > 0.0) {
      const double d_hi = static_cast<double>(k_hi - n);
      const double d_lo = static_cast<double>(k_lo - n);
      const double p = std::log(t_lo / t_hi) / std::log(d_hi / d_lo);
      // every other index contributes, hence the factor 1/2
      out.tail_estimate = p > 1.0 ? 0.5 * t_hi * d_hi / (p - 1.0)
                                  : std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

double second_order_closed_form(std::size_t n, const FockSpaceConfig& config,
                                const OscillatorParams& params) {
  config.validate();
  params.validate();
  require_trusted(n, config.trusted_window());
  const double nn = static_cast<double>(n);
  double series = 0.0;
  for (std::size_t l = 0; l <= config.series_k_max; ++l) {
    const double b = binomial_minus_half(l);
    const double two_l1 = static_cast<double>(2 * l + 1);
    for (std::size_t s = 0; s <= 2 * l + 1; ++s) {
      const double binom = boost::math::binomial_coefficient<double>(
          static_cast<unsigned>(2 * l + 1), static_cast<unsigned>(s));
      const double ss = static_cast<double>(s);
      const double diff = 2 * nn - 2 * static_cast<double>(l) - ss;
      series += b * b * binom * binom * diff * diff / (two_l1 * two_l1 * (two_l1 + ss));
    }
  }
  const double wa = params.omega_alpha;
  return -(params.hbar * wa * wa / params.omega) * ((2.0 * nn / 3.0 + 0.25) - series);
}

std::vector<double> k_eigenvalues(const FockSpaceConfig& config, const OscillatorParams& params) {
  return eigenvalues_of(config, params, build_k_interaction(config, params));
}

SpectrumReport diagonalize_k(const FockSpaceConfig& config, const OscillatorParams& params,
                             std::size_t level_count, TruncationPolicy policy) {
  config.validate();
  params.validate();
  if (level_count == 0 || level_count > config.trusted_window()) {
    throw Error(ErrorCode::OutsideTrustedWindow,
                "requested " + std::to_string(level_count) + " levels, trusted window holds " +
                    std::to_string(config.trusted_window()));
  }
  const OperatorMatrix k_i = build_k_interaction(config, params);
  const std::vector<double> e_diag = eigenvalues_of(config, params, k_i);

  FockSpaceConfig doubled = config;
  doubled.n_max = 2 * config.n_max;
  const std::vector<double> e_doubled = k_eigenvalues(doubled, params);

  SpectrumReport report;
  report.params = params;
  report.config = config;
  for (std::size_t n = 0; n < level_count; ++n) {
    SpectrumLevel level;
    level.n = n;
    level.e0 = params.hbar * params.omega * (static_cast<double>(n) + 0.5);
    level.de1 = first_order_shift(n, k_i);
    const SecondOrderShift de2 = second_order_shift_sum(n, k_i, params);
    level.de2 = de2.value;
    level.de2_tail = de2.tail_estimate;
    level.e_pert = level.e0 + level.de1 + level.de2;
    level.e_diag = e_diag[n];
    level.de2_closed_form = second_order_closed_form(n, config, params);
    level.e_diag_doubled = e_doubled[n];
    level.truncation_change = std::abs(level.e_diag_doubled - level.e_diag) / std::abs(level.e_diag);
    level.stable = level.truncation_change <= kTruncationStabilityTolerance;
    report.max_truncation_change = std::max(report.max_truncation_change, level.truncation_change);
    report.truncation_stable = report.truncation_stable && level.stable;
    report.levels.push_back(level);
  }
  if (policy == TruncationPolicy::Enforce && !report.truncation_stable) {
    throw Error(ErrorCode::TruncationUnstable,
                "eigenvalues moved by " + std::to_string(report.max_truncation_change) +
                    " (relative) when n_max was doubled");
  }
  return report;
}

}  // namespace dho
