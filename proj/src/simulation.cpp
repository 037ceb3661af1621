#include "orars/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orars/metrics.hpp"
#include "orars/parallel.hpp"

namespace orars {

std::string to_string(ErrorDist dist) {
  return dist == ErrorDist::uniform ? "uniform" : "normal";
}

ErrorDist error_dist_from_string(const std::string& s) {
  if (s == "uniform") return ErrorDist::uniform;
  if (s == "normal") return ErrorDist::normal;
  throw InvalidConfig("unknown error distribution '" + s + "' (expected uniform|normal)");
}

void SimConfig::validate() const {
  if (!(score_scale > 0.0)) {
    throw InvalidConfig("SimConfig: score_scale must be positive");
  }
  if (!(error_scale >= 0.0)) {
    throw InvalidConfig("SimConfig: error_scale must be nonnegative");
  }
  if (sample_count < 2) {
    throw InvalidConfig("SimConfig: sample_count must be at least 2");
  }
  if (repeats < 1) {
    throw InvalidConfig("SimConfig: repeats must be positive");
  }
}

namespace {

/// Indices 0..n-1 ordered by (values asc, index asc).
std::vector<Index> argsort(const Vector& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  return order;
}

/// Strict inversions of `seq` counted by merge sort.
std::uint64_t count_inversions(std::vector<double>& seq) {
  const std::size_t n = seq.size();
  std::vector<double> buf(n);
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, out = lo;
      while (a < mid && b < hi) {
        if (seq[b] < seq[a]) {
          inversions += mid - a;  // every remaining left element exceeds seq[b]
          buf[out++] = seq[b++];
        } else {
          buf[out++] = seq[a++];
        }
      }
      while (a < mid) buf[out++] = seq[a++];
      while (b < hi) buf[out++] = seq[b++];
      std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                buf.begin() + static_cast<std::ptrdiff_t>(hi),
                seq.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return inversions;
}

std::uint64_t tied_pair_count(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::uint64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i < values.size() && values[i] == values[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

std::uint64_t tied_pair_count_joint(const Vector& a, const Vector& b) {
  std::vector<std::pair<double, double>> joined(static_cast<std::size_t>(a.size()));
  for (Index i = 0; i < a.size(); ++i) {
    joined[static_cast<std::size_t>(i)] = {a[i], b[i]};
  }
  std::sort(joined.begin(), joined.end());
  std::uint64_t ties = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= joined.size(); ++i) {
    if (i < joined.size() && joined[i] == joined[i - 1]) {
      ++run;
    } else {
      ties += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return ties;
}

Vector draw_errors(const SimConfig& config, Rng& rng) {
  if (config.dist == ErrorDist::uniform) {
    return rng.uniform_vector(config.sample_count, -config.error_scale, config.error_scale);
  }
  return rng.normal_vector(config.sample_count, 0.0, config.error_scale);
}

}  // namespace

Vector rescore_by_rank(const Vector& truths, const Vector& perturbed) {
  const Index c = truths.size();
  if (perturbed.size() != c) {
    throw ContractViolation("rescore_by_rank: size mismatch");
  }
  if (c < 2) {
    throw InvalidConfig("rescore_by_rank: need at least 2 points");
  }

  // Strict rank of each perturbed score among all perturbed scores.
  std::vector<double> sorted_perturbed(perturbed.begin(), perturbed.end());
  std::sort(sorted_perturbed.begin(), sorted_perturbed.end());

  // Ascending true scores plus each point's own slot within them.
  const std::vector<Index> y_order = argsort(truths);
  Vector sorted_truths(c);
  std::vector<Index> position(static_cast<std::size_t>(c));
  for (Index t = 0; t < c; ++t) {
    sorted_truths[t] = truths[y_order[static_cast<std::size_t>(t)]];
    position[static_cast<std::size_t>(y_order[static_cast<std::size_t>(t)])] = t;
  }

  Vector predictions(c);
  for (Index i = 0; i < c; ++i) {
    const auto below = static_cast<Index>(
        std::lower_bound(sorted_perturbed.begin(), sorted_perturbed.end(), perturbed[i]) -
        sorted_perturbed.begin());
    // The anchor list for point i is sorted_truths with slot position[i]
    // removed; clamp into its 0..c-2 index range.
    const Index k = std::min(below, c - 2);
    predictions[i] = sorted_truths[k < position[static_cast<std::size_t>(i)] ? k : k + 1];
  }
  return predictions;
}

double misordered_pair_fraction(const Vector& truths, const Vector& perturbed) {
  const Index c = truths.size();
  if (perturbed.size() != c) {
    throw ContractViolation("misordered_pair_fraction: size mismatch");
  }
  if (c < 2) {
    throw InvalidConfig("misordered_pair_fraction: need at least 2 points");
  }

  // Perturbed scores laid out in true-score order, ties broken so that
  // neither tied truths nor tied perturbed values register as inversions.
  std::vector<Index> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (truths[a] != truths[b]) return truths[a] < truths[b];
    if (perturbed[a] != perturbed[b]) return perturbed[a] < perturbed[b];
    return a < b;
  });
  std::vector<double> seq(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < order.size(); ++i) {
    seq[i] = perturbed[order[i]];
  }
  const std::uint64_t misordered = count_inversions(seq);

  const std::uint64_t total =
      static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(c - 1) / 2;
  const std::uint64_t tied_y = tied_pair_count({truths.begin(), truths.end()});
  const std::uint64_t tied_s = tied_pair_count({perturbed.begin(), perturbed.end()});
  const std::uint64_t tied_both = tied_pair_count_joint(truths, perturbed);
  const std::uint64_t excluded = tied_y + tied_s - tied_both;
  if (excluded >= total) {
    return 0.0;
  }
  return static_cast<double>(misordered) / static_cast<double>(total - excluded);
}

SimResult simulate_once(const SimConfig& config, Rng& rng) {
  config.validate();
  const Vector truths = rng.uniform_vector(config.sample_count, 0.0, config.score_scale);
  const Vector errors = draw_errors(config, rng);
  const Vector perturbed = truths + errors;

  SimResult result;
  result.config = config;
  result.seed = rng.seed();
  result.mae_reg = errors.cwiseAbs().mean();
  const Vector rescored = rescore_by_rank(truths, perturbed);
  result.mae_sorars = mae(rescored, truths);
  result.mae_gain = result.mae_reg - result.mae_sorars;
  result.empirical_xi = misordered_pair_fraction(truths, perturbed);
  return result;
}

std::vector<SimResult> simulate_repeats(const SimConfig& config, int jobs) {
  config.validate();
  const Rng root(config.seed);
  std::vector<SimResult> results(static_cast<std::size_t>(config.repeats));
  parallel_for(results.size(), jobs, [&](std::size_t r) {
    Rng stream = root.child(r);
    results[r] = simulate_once(config, stream);
  });
  return results;
}

GainGrid gain_grid(const std::vector<Index>& c_axis, const std::vector<double>& m_axis,
                   ErrorDist dist, int repeats, std::uint64_t seed, double score_scale,
                   int jobs) {
  if (c_axis.empty() || m_axis.empty()) {
    throw InvalidConfig("gain_grid: axes must be nonempty");
  }
  GainGrid grid;
  grid.c_axis = c_axis;
  grid.m_axis = m_axis;
  grid.dist = dist;
  grid.score_scale = score_scale;
  grid.repeats = repeats;
  grid.seed = seed;
  grid.mean_gain = Matrix(static_cast<Index>(c_axis.size()), static_cast<Index>(m_axis.size()));

  const Rng root(seed);
  const std::size_t cells = c_axis.size() * m_axis.size();
  parallel_for(cells, jobs, [&](std::size_t cell) {
    const std::size_t ci = cell / m_axis.size();
    const std::size_t mi = cell % m_axis.size();
    SimConfig cfg;
    cfg.score_scale = score_scale;
    cfg.error_scale = m_axis[mi];
    cfg.sample_count = c_axis[ci];
    cfg.dist = dist;
    cfg.repeats = repeats;
    cfg.seed = root.child(cell).seed();
    double sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      Rng stream = Rng(cfg.seed).child(static_cast<std::uint64_t>(r));
      sum += simulate_once(cfg, stream).mae_gain;
    }
    grid.mean_gain(static_cast<Index>(ci), static_cast<Index>(mi)) =
        sum / static_cast<double>(repeats);
  });
  return grid;
}

std::vector<Index> default_c_axis() { return {50, 100, 200, 500, 1000, 2000, 5000}; }

std::vector<double> default_m_axis() { return {1, 2, 3, 5, 10, 20, 50}; }

double analytic_mae_reg(double error_scale) {
  if (!(error_scale >= 0.0)) {
    throw InvalidConfig("analytic_mae_reg: error scale must be nonnegative");
  }
  return error_scale / 2.0;
}

double analytic_xi(double score_scale, double error_scale) {
  if (!(score_scale > 0.0) || !(error_scale >= 0.0)) {
    throw InvalidConfig("analytic_xi: need score_scale > 0 and error_scale >= 0");
  }
  if (2.0 * error_scale > score_scale) {
    throw OutOfDomain("analytic_xi: derived only for 2M <= N");
  }
  return (2.0 * score_scale * error_scale - error_scale * error_scale) /
         (3.0 * score_scale * score_scale);
}

double monte_carlo_xi(double score_scale, double error_scale, ErrorDist dist, std::int64_t trials,
                      std::uint64_t seed) {
  if (trials < 100000) {
    throw InvalidConfig("monte_carlo_xi: needs at least 1e5 trials");
  }
  Rng rng(seed);
  std::int64_t misordered = 0;
  std::int64_t counted = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    const double y1 = rng.uniform(0.0, score_scale);
    const double y2 = rng.uniform(0.0, score_scale);
    double e1, e2;
    if (dist == ErrorDist::uniform) {
      e1 = rng.uniform(-error_scale, error_scale);
      e2 = rng.uniform(-error_scale, error_scale);
    } else {
      e1 = rng.normal(0.0, error_scale);
      e2 = rng.normal(0.0, error_scale);
    }
    const double dy = y1 - y2;
    const double ds = (y1 + e1) - (y2 + e2);
    if (dy == 0.0 || ds == 0.0) {
      continue;  // tie, excluded
    }
    ++counted;
    if ((dy > 0.0) != (ds > 0.0)) {
      ++misordered;
    }
  }
  return counted == 0 ? 0.0 : static_cast<double>(misordered) / static_cast<double>(counted);
}

double analytic_mae_sorars(double score_scale, double error_scale) {
  return analytic_xi(score_scale, error_scale) * score_scale / 2.0;
}

double analytic_mae_sorars_closed_form(double score_scale, double error_scale) {
  if (!(score_scale > 0.0) || !(error_scale >= 0.0)) {
    throw InvalidConfig("analytic_mae_sorars_closed_form: invalid scales");
  }
  if (2.0 * error_scale > score_scale) {
    throw OutOfDomain("analytic_mae_sorars_closed_form: derived only for 2M <= N");
  }
  return error_scale / 3.0 - error_scale * error_scale / score_scale;
}

}  // namespace orars
