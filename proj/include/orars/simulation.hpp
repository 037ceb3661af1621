#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orars/rng.hpp"
#include "orars/types.hpp"

namespace orars {

enum class ErrorDist { uniform, normal };

std::string to_string(ErrorDist dist);
ErrorDist error_dist_from_string(const std::string& s);

/// Parameters for one synthetic rescoring experiment: C true scores drawn
/// from U(0, score_scale), perturbed by uniform(-M, M) or normal(0, M)
/// error, then rescored against each other.
struct SimConfig {
  double score_scale = 100.0;  // N
  double error_scale = 10.0;   // M: half-width (uniform) or stddev (normal)
  Index sample_count = 1000;   // C
  ErrorDist dist = ErrorDist::uniform;
  int repeats = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimResult {
  double mae_reg = 0.0;
  double mae_sorars = 0.0;
  double mae_gain = 0.0;      // mae_reg - mae_sorars, by construction
  double empirical_xi = 0.0;  // fraction of misordered distinct pairs
  SimConfig config;
  std::uint64_t seed = 0;
};

/// Rescoring core: for each point i, all other points act as anchors with
/// their true scores, ordered by the perturbed scores. Pure in its inputs;
/// depends only on the order of `perturbed`, not its values.
Vector rescore_by_rank(const Vector& truths, const Vector& perturbed);

/// Fraction of distinct pairs whose perturbed order contradicts the true
/// order; exactly tied pairs (in either sequence) are excluded. Counted by
/// merge-sort inversions, O(C log C).
double misordered_pair_fraction(const Vector& truths, const Vector& perturbed);

/// One simulation draw under the given rng stream.
SimResult simulate_once(const SimConfig& config, Rng& rng);

/// `config.repeats` independent draws from child streams of config.seed.
std::vector<SimResult> simulate_repeats(const SimConfig& config, int jobs = 1);

/// Mean MAE gain per (sample count, error scale) cell.
struct GainGrid {
  std::vector<Index> c_axis;
  std::vector<double> m_axis;
  Matrix mean_gain;  // rows follow c_axis, columns follow m_axis
  ErrorDist dist = ErrorDist::uniform;
  double score_scale = 100.0;
  int repeats = 1;
  std::uint64_t seed = 0;
};

GainGrid gain_grid(const std::vector<Index>& c_axis, const std::vector<double>& m_axis,
                   ErrorDist dist, int repeats, std::uint64_t seed, double score_scale = 100.0,
                   int jobs = 1);

/// Default axes mirroring the simulation figures.
std::vector<Index> default_c_axis();
std::vector<double> default_m_axis();

/// Expected |error| of the uniform(-M, M) perturbation: M / 2.
double analytic_mae_reg(double error_scale);

/// Closed-form misorder probability for uniform error on a uniform score
/// scale: (2NM - M^2) / (3N^2). Derived only for 0 <= 2M <= N; outside that
/// support an OutOfDomain error is thrown.
double analytic_xi(double score_scale, double error_scale);

/// Independent sampling estimate of the misorder probability; the oracle
/// analytic_xi is checked against. Requires at least 1e5 trials.
double monte_carlo_xi(double score_scale, double error_scale, ErrorDist dist, std::int64_t trials,
                      std::uint64_t seed);

/// Expected rescored MAE via the xi substitution route: xi * N / 2.
double analytic_mae_sorars(double score_scale, double error_scale);

/// The further-simplified expression M/3 - M^2/N for the same quantity.
/// The two routes disagree algebraically, so reports carry both side by
/// side instead of asserting either.
double analytic_mae_sorars_closed_form(double score_scale, double error_scale);

}  // namespace orars
