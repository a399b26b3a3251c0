#include "tastesim/aif.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tastesim::aif {

DirichletModel::DirichletModel(std::size_t n_obs, std::size_t n_songs, double prior_floor)
    : n_obs_(n_obs), n_songs_(n_songs), a_(n_obs * n_songs, prior_floor), q_(n_songs) {
  if (n_obs == 0 || n_songs == 0) throw std::invalid_argument("empty Dirichlet model");
  if (!(prior_floor > 0.0)) throw std::invalid_argument("prior floor must be > 0");
  std::fill(q_.begin(), q_.end(), 1.0 / static_cast<double>(n_songs));
}

void DirichletModel::set_concentration(std::size_t obs, std::size_t song, double value) {
  if (!(value > 0.0)) throw std::invalid_argument("concentrations must be > 0");
  a_.at(obs * n_songs_ + song) = value;
}

void DirichletModel::scale_column(std::size_t song, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be > 0");
  for (std::size_t k = 0; k < n_obs_; ++k) a_[k * n_songs_ + song] *= factor;
}

double DirichletModel::column_total(std::size_t song) const {
  double total = 0.0;
  for (std::size_t k = 0; k < n_obs_; ++k) total += a_[k * n_songs_ + song];
  return total;
}

void DirichletModel::set_posterior(std::span<const double> q) {
  if (q.size() != n_songs_) throw std::invalid_argument("posterior size mismatch");
  double total = 0.0;
  for (double v : q) {
    if (v < 0.0) throw std::invalid_argument("posterior entries must be >= 0");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("posterior must have positive mass");
  for (std::size_t s = 0; s < n_songs_; ++s) q_[s] = q[s] / total;
}

void DirichletModel::focus(std::size_t song) {
  std::fill(q_.begin(), q_.end(), 0.0);
  q_.at(song) = 1.0;
}

void DirichletModel::observe(std::size_t song, std::size_t obs) {
  if (song >= n_songs_ || obs >= n_obs_) throw std::out_of_range("observe: bad index");
  a_[obs * n_songs_ + song] += 1.0;
}

Likelihood likelihood(const DirichletModel& model) {
  Likelihood l{model.n_obs(), model.n_songs(),
               std::vector<double>(model.n_obs() * model.n_songs())};
  for (std::size_t j = 0; j < model.n_songs(); ++j) {
    const double total = model.column_total(j);
    for (std::size_t k = 0; k < model.n_obs(); ++k) {
      l.values[k * l.n_songs + j] = model.concentration(k, j) / total;
    }
  }
  return l;
}

namespace {

std::vector<double> predictive(const Likelihood& a, std::span<const double> q) {
  std::vector<double> p(a.n_obs, 0.0);
  for (std::size_t k = 0; k < a.n_obs; ++k) {
    for (std::size_t s = 0; s < a.n_songs; ++s) p[k] += a.at(k, s) * q[s];
  }
  return p;
}

}  // namespace

std::vector<double> predictive(const DirichletModel& model) {
  return predictive(likelihood(model), model.posterior());
}

double surprisal(const DirichletModel& model, std::size_t obs) {
  return -std::log(predictive(model).at(obs));
}

double preference(double surprisal_value, const PreferenceParams& prefs) {
  const double d = surprisal_value - prefs.mu_c;
  return -(d * d) / (2.0 * prefs.sigma_c * prefs.sigma_c);
}

EfeBreakdown expected_free_energy(const DirichletModel& model, const PreferenceParams& prefs,
                                  std::size_t song_id) {
  if (song_id >= model.n_songs()) throw std::out_of_range("expected_free_energy: bad song");
  const Likelihood a = likelihood(model);
  const auto q = model.posterior();
  const std::vector<double> q_o = predictive(a, q);
  const std::size_t n_obs = model.n_obs();

  // Normalized preference over observation categories, log-sum-exp stable.
  std::vector<double> c(n_obs);
  for (std::size_t k = 0; k < n_obs; ++k) c[k] = preference(-std::log(q_o[k]), prefs);
  const double c_max = *std::max_element(c.begin(), c.end());
  double z = 0.0;
  for (double v : c) z += std::exp(v - c_max);
  const double log_z = c_max + std::log(z);

  const double col_total = model.column_total(song_id);
  EfeBreakdown out;
  for (std::size_t k = 0; k < n_obs; ++k) {
    const double p_o = q_o[k];
    if (p_o <= 0.0) continue;

    double kl_state = 0.0;
    for (std::size_t s = 0; s < model.n_songs(); ++s) {
      if (q[s] <= 0.0) continue;
      const double post = a.at(k, s) * q[s] / p_o;
      if (post > 0.0) kl_state += post * std::log(post / q[s]);
    }

    double kl_column = 0.0;
    for (std::size_t m = 0; m < n_obs; ++m) {
      const double prior = model.concentration(m, song_id) / col_total;
      const double updated =
          (model.concentration(m, song_id) + (m == k ? 1.0 : 0.0)) / (col_total + 1.0);
      kl_column += updated * std::log(updated / prior);
    }

    out.salience += p_o * kl_state;
    out.novelty += p_o * kl_column;
    out.pragmatic += p_o * (c[k] - log_z);
  }
  // Rounding can leave a KL a hair below zero.
  out.salience = std::max(out.salience, 0.0);
  out.novelty = std::max(out.novelty, 0.0);
  out.epistemic = out.salience + out.novelty;
  out.total_G = -(out.epistemic + out.pragmatic);
  return out;
}

std::string_view trajectory_name(Trajectory t) {
  switch (t) {
    case Trajectory::InvertedU: return "inverted_u";
    case Trajectory::MonotonicDecline: return "monotonic_decline";
    case Trajectory::NeverRewarding: return "never_rewarding";
    case Trajectory::Unresolved: return "unresolved";
  }
  return "unknown";
}

Trajectory classify_sequence(std::span<const double> values, double threshold) {
  if (values.empty()) return Trajectory::Unresolved;
  if (std::all_of(values.begin(), values.end(), [threshold](double v) { return v < threshold; })) {
    return Trajectory::NeverRewarding;
  }
  const auto peak = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  bool nonincreasing = true;
  for (std::size_t t = 1; t < values.size(); ++t) {
    if (values[t] > values[t - 1]) nonincreasing = false;
  }
  if (nonincreasing) return Trajectory::MonotonicDecline;
  if (peak > 0 && peak + 1 < values.size() && values.back() < values[peak]) {
    bool rising = true;
    for (std::size_t t = 1; t <= peak; ++t) rising = rising && values[t] >= values[t - 1];
    bool falling = true;
    for (std::size_t t = peak + 1; t < values.size(); ++t) {
      falling = falling && values[t] <= values[t - 1];
    }
    if (rising && falling) return Trajectory::InvertedU;
  }
  return Trajectory::Unresolved;
}

std::vector<double> exposure_preference_sequence(double initial_surprisal,
                                                 const PreferenceParams& prefs,
                                                 std::size_t horizon,
                                                 const TrajectoryOptions& options) {
  if (horizon < 3) throw std::invalid_argument("trajectory horizon must be >= 3");
  if (!(initial_surprisal > 0.0)) throw std::invalid_argument("initial surprisal must be > 0");
  if (options.n_obs < 2) throw std::invalid_argument("need at least two observation categories");

  // Category 0 gets concentration x with every other category at 1, so that
  // x / (x + n_obs - 1) = exp(-initial_surprisal).
  const double p = std::exp(-initial_surprisal);
  const double others = static_cast<double>(options.n_obs - 1);
  DirichletModel model(options.n_obs, 1, 1.0);
  model.set_concentration(0, 0, others * p / (1.0 - p));
  model.focus(0);

  std::vector<double> values;
  values.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    values.push_back(preference(surprisal(model, 0), prefs));
    model.observe(0, 0);
  }
  return values;
}

Trajectory classify_trajectory(double initial_surprisal, const PreferenceParams& prefs,
                               std::size_t horizon, const TrajectoryOptions& options) {
  const auto values = exposure_preference_sequence(initial_surprisal, prefs, horizon, options);
  return classify_sequence(values, options.never_rewarding_threshold);
}

}  // namespace tastesim::aif
