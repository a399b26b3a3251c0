#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace tastesim::aif {

/// Dirichlet-categorical listener model at desk scale.
///
/// `concentrations` holds a_kj row-major (observation category k by song j);
/// the likelihood P(o = k | s = j) is column j normalized. `posterior` is the
/// belief Q(s) over songs. Entries of `concentrations` stay strictly positive.
class DirichletModel {
 public:
  /// Every a_kj = prior_floor, Q uniform.
  DirichletModel(std::size_t n_obs, std::size_t n_songs, double prior_floor = 1.0);

  std::size_t n_obs() const { return n_obs_; }
  std::size_t n_songs() const { return n_songs_; }

  double concentration(std::size_t obs, std::size_t song) const {
    return a_[obs * n_songs_ + song];
  }
  /// Throws std::invalid_argument for a value <= 0.
  void set_concentration(std::size_t obs, std::size_t song, double value);
  void scale_column(std::size_t song, double factor);
  double column_total(std::size_t song) const;

  std::span<const double> posterior() const { return q_; }
  /// Normalizes `q` (nonnegative, positive sum) and stores it.
  void set_posterior(std::span<const double> q);
  /// Q(s) = 1 on `song`, 0 elsewhere.
  void focus(std::size_t song);

  /// a[obs][song] += 1.
  void observe(std::size_t song, std::size_t obs);

 private:
  std::size_t n_obs_;
  std::size_t n_songs_;
  std::vector<double> a_;
  std::vector<double> q_;
};

struct Likelihood {
  std::size_t n_obs = 0;
  std::size_t n_songs = 0;
  std::vector<double> values;  // row-major, columns sum to 1

  double at(std::size_t obs, std::size_t song) const { return values[obs * n_songs + song]; }
};

struct PreferenceParams {
  double mu_c = 1.0;
  double sigma_c = 1.0;
};

struct EfeBreakdown {
  // Expected KL of the state posterior from the state prior.
  double salience = 0.0;
  // Expected KL of song j's predictive likelihood column after one more
  // observation from the column before it.
  double novelty = 0.0;
  double epistemic = 0.0;  // salience + novelty, >= 0
  double pragmatic = 0.0;  // expected log normalized preference, <= 0
  double total_G = 0.0;    // -(epistemic + pragmatic)
};

Likelihood likelihood(const DirichletModel& model);

/// Predicted observation distribution sum_s A[o][s] Q(s).
std::vector<double> predictive(const DirichletModel& model);

/// -ln sum_s A[obs][s] Q(s), in nats.
double surprisal(const DirichletModel& model, std::size_t obs);

/// -(I - mu_c)^2 / (2 sigma_c^2).
double preference(double surprisal_value, const PreferenceParams& prefs);

/// Expected free energy of the policy "listen to song j" at fixed a. The
/// state prior is the model's posterior (focus() the model for single-song
/// attention); the novelty term tracks column j, which is the column a
/// listen to song j updates.
EfeBreakdown expected_free_energy(const DirichletModel& model, const PreferenceParams& prefs,
                                  std::size_t song_id);

enum class Trajectory { InvertedU, MonotonicDecline, NeverRewarding, Unresolved };

std::string_view trajectory_name(Trajectory t);

/// Classifies a preference-value sequence. NeverRewarding when every value is
/// below `threshold`; InvertedU when it rises to an interior peak and then
/// falls; MonotonicDecline when it never rises; Unresolved otherwise (for
/// example a sequence still rising at the horizon).
Trajectory classify_sequence(std::span<const double> preference_values, double threshold);

struct TrajectoryOptions {
  std::size_t n_obs = 8;
  double never_rewarding_threshold = -2.0;
};

/// Builds a one-song model whose surprisal for a fixed category equals
/// `initial_surprisal`, observes that category `horizon - 1` times, and
/// classifies the preference values C(I_0), ..., C(I_{horizon-1}).
/// Throws std::invalid_argument for horizon < 3 or initial_surprisal <= 0.
Trajectory classify_trajectory(double initial_surprisal, const PreferenceParams& prefs,
                               std::size_t horizon, const TrajectoryOptions& options = {});

/// The preference sequence classify_trajectory inspects.
std::vector<double> exposure_preference_sequence(double initial_surprisal,
                                                 const PreferenceParams& prefs,
                                                 std::size_t horizon,
                                                 const TrajectoryOptions& options = {});

}  // namespace tastesim::aif
