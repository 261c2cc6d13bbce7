#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dlr::hyperopt {

enum class DomainKind { continuous, log_continuous, integer_set, categorical };

/// Domain of one hyperparameter. Integer sets carry their admissible values;
/// categorical parameters are represented by their index into `categories`.
struct ParamDomain {
  std::string name;
  DomainKind kind = DomainKind::continuous;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> values;
  std::vector<std::string> categories;

  static ParamDomain continuous(std::string name, double lo, double hi);
  static ParamDomain log_scale(std::string name, double lo, double hi);
  static ParamDomain integers(std::string name, std::vector<double> values);
  static ParamDomain categorical(std::string name, std::vector<std::string> categories);
};

using ParamPoint = std::map<std::string, double>;
using Constraint = std::function<bool(const ParamPoint&)>;

struct SearchSpace {
  std::vector<ParamDomain> params;
  /// Checked before every objective call; a point failing any constraint is
  /// never evaluated.
  std::vector<Constraint> constraints;

  void validate() const;
  [[nodiscard]] bool admissible(const ParamPoint& point) const;
};

/// One objective evaluation. Failed evaluations keep `accuracy` empty and
/// carry the error text.
struct TrialRecord {
  std::size_t index = 0;
  ParamPoint params;
  std::optional<double> accuracy;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string stage;
  std::string error;

  [[nodiscard]] bool ok() const noexcept { return accuracy.has_value(); }
};

/// Validation accuracy in [0, 1] for a parameter point. Must be a pure
/// function of (point, seed).
using Objective = std::function<double(const ParamPoint&, std::uint64_t seed)>;
using TrialCallback = std::function<void(const TrialRecord&)>;

struct SearchResult {
  TrialRecord best;
  std::vector<TrialRecord> log;
  std::vector<std::string> notes;
};

struct GridOptions {
  std::size_t levels = 2;
  std::size_t points_per_axis = 5;  ///< continuous axes, per level
  std::uint64_t seed = 0;
  /// Ties in accuracy prefer smaller values of these parameters, in order.
  std::vector<std::string> cost_order{"n_nodes", "k"};
  TrialCallback on_trial;
};

/// Exhaustive grid per level; each further level refines around the best
/// point of the previous one (continuous axes shrink, integer axes keep the
/// best value and its neighbours, categorical axes are fixed).
[[nodiscard]] SearchResult grid_search(const SearchSpace& space,
                                       const Objective& objective,
                                       const GridOptions& options = {});

struct BayesOptions {
  std::size_t budget = 30;
  std::size_t initial_design = 8;  ///< Latin hypercube points
  std::uint64_t seed = 0;
  std::size_t acquisition_samples = 2000;
  std::size_t local_restarts = 5;
  double exploration = 0.01;  ///< EI margin xi, in standardized units
  TrialCallback on_trial;
};

/// Gaussian-process Bayesian optimization with a squared-exponential kernel
/// and expected improvement. Returns the best observed trial.
[[nodiscard]] SearchResult bayes_opt(const SearchSpace& space,
                                     const Objective& objective,
                                     const BayesOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const TrialRecord& trial);
[[nodiscard]] TrialRecord trial_from_json(const nlohmann::json& j);

/// True when a is preferred over b: higher accuracy, then cheaper by
/// `cost_order`, then earlier.
[[nodiscard]] bool better_trial(const TrialRecord& a, const TrialRecord& b,
                                const std::vector<std::string>& cost_order);

}  // namespace dlr::hyperopt
