#include "dlr/hyperopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "dlr/error.hpp"
#include "dlr/random.hpp"

namespace dlr::hyperopt {

ParamDomain ParamDomain::continuous(std::string name, double lo, double hi) {
  ParamDomain d;
  d.name = std::move(name);
  d.kind = DomainKind::continuous;
  d.lo = lo;
  d.hi = hi;
  return d;
}

ParamDomain ParamDomain::log_scale(std::string name, double lo, double hi) {
  ParamDomain d = continuous(std::move(name), lo, hi);
  d.kind = DomainKind::log_continuous;
  return d;
}

ParamDomain ParamDomain::integers(std::string name, std::vector<double> values) {
  ParamDomain d;
  d.name = std::move(name);
  d.kind = DomainKind::integer_set;
  d.values = std::move(values);
  return d;
}

ParamDomain ParamDomain::categorical(std::string name,
                                     std::vector<std::string> categories) {
  ParamDomain d;
  d.name = std::move(name);
  d.kind = DomainKind::categorical;
  d.categories = std::move(categories);
  return d;
}

void SearchSpace::validate() const {
  if (params.empty()) throw InvalidArgument("search space has no parameters");
  for (const auto& p : params) {
    switch (p.kind) {
      case DomainKind::continuous:
        if (!(p.lo <= p.hi)) throw InvalidArgument("empty interval for " + p.name);
        break;
      case DomainKind::log_continuous:
        if (!(p.lo > 0.0 && p.lo <= p.hi))
          throw InvalidArgument("log-scale interval for " + p.name +
                                " must be positive and non-empty");
        break;
      case DomainKind::integer_set:
        if (p.values.empty()) throw InvalidArgument("empty value set for " + p.name);
        break;
      case DomainKind::categorical:
        if (p.categories.empty())
          throw InvalidArgument("empty category list for " + p.name);
        break;
    }
  }
}

bool SearchSpace::admissible(const ParamPoint& point) const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [&](const Constraint& c) { return c(point); });
}

bool better_trial(const TrialRecord& a, const TrialRecord& b,
                  const std::vector<std::string>& cost_order) {
  if (a.ok() != b.ok()) return a.ok();
  if (a.ok() && *a.accuracy != *b.accuracy) return *a.accuracy > *b.accuracy;
  for (const auto& name : cost_order) {
    auto ia = a.params.find(name);
    auto ib = b.params.find(name);
    if (ia != a.params.end() && ib != b.params.end() && ia->second != ib->second)
      return ia->second < ib->second;
  }
  return a.index < b.index;
}

namespace {

using Clock = std::chrono::steady_clock;

// Evaluates points at most once each, in call order, and keeps the log.
class TrialRunner {
 public:
  TrialRunner(const SearchSpace& space, const Objective& objective,
              std::uint64_t seed, TrialCallback callback)
      : space_(space), objective_(objective), seed_(seed), callback_(std::move(callback)) {}

  // Returns nullptr when the point violates a constraint.
  const TrialRecord* evaluate(const ParamPoint& point, const std::string& stage) {
    if (!space_.admissible(point)) return nullptr;
    if (auto it = seen_.find(point); it != seen_.end()) return &log_[it->second];
    TrialRecord trial;
    trial.index = log_.size();
    trial.params = point;
    trial.seed = seed_;
    trial.stage = stage;
    const auto start = Clock::now();
    try {
      const double acc = objective_(point, seed_);
      if (!std::isfinite(acc)) throw std::runtime_error("objective returned non-finite value");
      trial.accuracy = acc;
    } catch (const std::exception& e) {
      trial.error = e.what();
    }
    trial.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    seen_.emplace(point, log_.size());
    log_.push_back(trial);
    if (callback_) callback_(log_.back());
    return &log_.back();
  }

  [[nodiscard]] bool seen(const ParamPoint& point) const { return seen_.count(point) > 0; }
  [[nodiscard]] const std::vector<TrialRecord>& log() const { return log_; }
  std::vector<TrialRecord> take_log() { return std::move(log_); }

 private:
  const SearchSpace& space_;
  const Objective& objective_;
  std::uint64_t seed_;
  TrialCallback callback_;
  std::map<ParamPoint, std::size_t> seen_;
  std::vector<TrialRecord> log_;
};

SearchResult finish(TrialRunner& runner, std::vector<std::string> notes,
                    const std::vector<std::string>& cost_order) {
  SearchResult result;
  result.log = runner.take_log();
  result.notes = std::move(notes);
  if (result.log.empty())
    throw InvalidArgument("no admissible point was evaluated");
  result.best = result.log.front();
  for (const auto& t : result.log)
    if (better_trial(t, result.best, cost_order)) result.best = t;
  return result;
}

// ---------------------------------------------------------------- grid --

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n <= 1 || lo == hi) return {0.5 * (lo + hi)};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

struct Axis {
  std::vector<double> points;  // native units
  double step = 0.0;           // continuous: native; log: natural-log units
};

Axis initial_axis(const ParamDomain& d, std::size_t per_axis) {
  Axis a;
  const std::size_t n = std::max<std::size_t>(per_axis, 1);
  switch (d.kind) {
    case DomainKind::continuous:
      a.points = linspace(d.lo, d.hi, n);
      a.step = n > 1 ? (d.hi - d.lo) / static_cast<double>(n - 1) : 0.5 * (d.hi - d.lo);
      break;
    case DomainKind::log_continuous: {
      const double l0 = std::log(d.lo), l1 = std::log(d.hi);
      for (double v : linspace(l0, l1, n)) a.points.push_back(std::exp(v));
      a.step = n > 1 ? (l1 - l0) / static_cast<double>(n - 1) : 0.5 * (l1 - l0);
      break;
    }
    case DomainKind::integer_set:
      a.points = d.values;
      break;
    case DomainKind::categorical:
      for (std::size_t i = 0; i < d.categories.size(); ++i)
        a.points.push_back(static_cast<double>(i));
      break;
  }
  return a;
}

Axis refine_axis(const ParamDomain& d, const Axis& prev, double center,
                 std::size_t per_axis) {
  Axis a;
  const std::size_t n = std::max<std::size_t>(per_axis, 2);
  auto dedupe = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  switch (d.kind) {
    case DomainKind::continuous:
      for (double v : linspace(center - prev.step, center + prev.step, n))
        a.points.push_back(std::clamp(v, d.lo, d.hi));
      dedupe(a.points);
      a.step = 2.0 * prev.step / static_cast<double>(n - 1);
      break;
    case DomainKind::log_continuous: {
      const double lc = std::log(center);
      for (double v : linspace(lc - prev.step, lc + prev.step, n))
        a.points.push_back(std::clamp(std::exp(v), d.lo, d.hi));
      dedupe(a.points);
      a.step = 2.0 * prev.step / static_cast<double>(n - 1);
      break;
    }
    case DomainKind::integer_set: {
      auto it = std::find(d.values.begin(), d.values.end(), center);
      const auto idx = static_cast<std::size_t>(it - d.values.begin());
      for (std::size_t j = (idx > 0 ? idx - 1 : 0);
           j <= std::min(idx + 1, d.values.size() - 1); ++j)
        a.points.push_back(d.values[j]);
      break;
    }
    case DomainKind::categorical:
      a.points = {center};
      break;
  }
  return a;
}

template <class Fn>
void for_each_grid_point(const SearchSpace& space, const std::vector<Axis>& axes,
                         Fn&& fn) {
  std::vector<std::size_t> idx(axes.size(), 0);
  for (const auto& a : axes)
    if (a.points.empty()) return;
  while (true) {
    ParamPoint p;
    for (std::size_t i = 0; i < axes.size(); ++i)
      p[space.params[i].name] = axes[i].points[idx[i]];
    fn(p);
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].points.size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (axes.empty()) return;
  }
}

// ---------------------------------------------------------------- bayes --

double encode_value(const ParamDomain& d, double v) {
  switch (d.kind) {
    case DomainKind::continuous:
      return d.hi > d.lo ? (v - d.lo) / (d.hi - d.lo) : 0.5;
    case DomainKind::log_continuous:
      return d.hi > d.lo ? (std::log(v) - std::log(d.lo)) / (std::log(d.hi) - std::log(d.lo))
                         : 0.5;
    case DomainKind::integer_set: {
      auto it = std::find(d.values.begin(), d.values.end(), v);
      const auto i = static_cast<double>(it - d.values.begin());
      return d.values.size() > 1 ? i / static_cast<double>(d.values.size() - 1) : 0.5;
    }
    case DomainKind::categorical:
      return (v + 0.5) / static_cast<double>(d.categories.size());
  }
  return 0.5;
}

// Relaxed coordinate in [0, 1] -> admissible native value (rounding for
// discrete axes).
double decode_value(const ParamDomain& d, double u) {
  u = std::clamp(u, 0.0, 1.0);
  switch (d.kind) {
    case DomainKind::continuous:
      return d.lo + u * (d.hi - d.lo);
    case DomainKind::log_continuous:
      return std::exp(std::log(d.lo) + u * (std::log(d.hi) - std::log(d.lo)));
    case DomainKind::integer_set: {
      const auto i = static_cast<std::size_t>(
          std::lround(u * static_cast<double>(d.values.size() - 1)));
      return d.values[std::min(i, d.values.size() - 1)];
    }
    case DomainKind::categorical: {
      const auto i = static_cast<std::size_t>(u * static_cast<double>(d.categories.size()));
      return static_cast<double>(std::min(i, d.categories.size() - 1));
    }
  }
  return 0.0;
}

ParamPoint decode(const SearchSpace& space, const Eigen::VectorXd& u) {
  ParamPoint p;
  for (std::size_t i = 0; i < space.params.size(); ++i)
    p[space.params[i].name] = decode_value(space.params[i], u[static_cast<Eigen::Index>(i)]);
  return p;
}

Eigen::VectorXd encode(const SearchSpace& space, const ParamPoint& p) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(space.params.size()));
  for (std::size_t i = 0; i < space.params.size(); ++i)
    u[static_cast<Eigen::Index>(i)] = encode_value(space.params[i], p.at(space.params[i].name));
  return u;
}

class GaussianProcess {
 public:
  GaussianProcess(Eigen::MatrixXd x, Eigen::VectorXd y) : x_(std::move(x)), y_(std::move(y)) {}

  // Log marginal likelihood for the given length scales; keeps the
  // factorization when it is the best seen so far.
  double fit(const Eigen::VectorXd& scales) {
    const Eigen::Index n = x_.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(x_.row(i), x_.row(j), scales);
    k.diagonal().array() += kNoise;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd alpha = llt.solve(y_);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double lml = -0.5 * y_.dot(alpha) - 0.5 * log_det -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return lml;
  }

  void set(const Eigen::VectorXd& scales) {
    scales_ = scales;
    const Eigen::Index n = x_.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(x_.row(i), x_.row(j), scales);
    k.diagonal().array() += kNoise;
    llt_.compute(k);
    alpha_ = llt_.solve(y_);
  }

  // Posterior mean and standard deviation.
  std::pair<double, double> predict(const Eigen::VectorXd& u) const {
    const Eigen::Index n = x_.rows();
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) ks[i] = kernel(x_.row(i), u.transpose(), scales_);
    const double mean = ks.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double var = std::max(1.0 + kNoise - v.squaredNorm(), 1e-12);
    return {mean, std::sqrt(var)};
  }

 private:
  static constexpr double kNoise = 1e-6;

  static double kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b,
                       const Eigen::VectorXd& scales) {
    double r2 = 0.0;
    for (Eigen::Index d = 0; d < a.size(); ++d) {
      const double t = (a[d] - b[d]) / scales[d];
      r2 += t * t;
    }
    return std::exp(-0.5 * r2);
  }

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd scales_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

double expected_improvement(double mean, double sd, double best, double xi) {
  const double imp = mean - best - xi;
  const double z = imp / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return imp * cdf + sd * pdf;
}

Eigen::VectorXd random_unit(Rng& rng, Eigen::Index dims) {
  Eigen::VectorXd u(dims);
  for (Eigen::Index d = 0; d < dims; ++d) u[d] = rng.uniform();
  return u;
}

}  // namespace

SearchResult grid_search(const SearchSpace& space, const Objective& objective,
                         const GridOptions& options) {
  space.validate();
  TrialRunner runner(space, objective, options.seed, options.on_trial);
  std::vector<std::string> notes;

  std::vector<Axis> axes;
  for (const auto& d : space.params) axes.push_back(initial_axis(d, options.points_per_axis));

  const std::size_t levels = std::max<std::size_t>(options.levels, 1);
  std::optional<TrialRecord> level_best;
  for (std::size_t level = 0; level < levels; ++level) {
    if (level > 0) {
      if (!level_best || !level_best->ok()) break;
      for (std::size_t i = 0; i < axes.size(); ++i)
        axes[i] = refine_axis(space.params[i], axes[i],
                              level_best->params.at(space.params[i].name),
                              options.points_per_axis);
    }
    const std::string stage = "grid-L" + std::to_string(level);
    std::size_t skipped = 0;
    for_each_grid_point(space, axes, [&](const ParamPoint& p) {
      const TrialRecord* t = runner.evaluate(p, stage);
      if (t == nullptr) {
        ++skipped;
        return;
      }
      if (!level_best || better_trial(*t, *level_best, options.cost_order)) level_best = *t;
    });
    if (skipped > 0)
      notes.push_back(stage + ": skipped " + std::to_string(skipped) +
                      " points violating constraints");
  }
  return finish(runner, std::move(notes), options.cost_order);
}

SearchResult bayes_opt(const SearchSpace& space, const Objective& objective,
                       const BayesOptions& options) {
  space.validate();
  if (options.budget < options.initial_design || options.initial_design == 0)
    throw InvalidArgument("budget must be >= initial design size >= 1");

  TrialRunner runner(space, objective, options.seed, options.on_trial);
  std::vector<std::string> notes;
  Rng rng(derive_seed(options.seed, {0xb0ULL}));
  const auto dims = static_cast<Eigen::Index>(space.params.size());
  constexpr int kMaxDraws = 200;

  // Admissible, not-yet-evaluated point from a relaxed coordinate, with
  // random redraws when the preferred one is unusable.
  auto random_fresh = [&]() -> std::optional<ParamPoint> {
    for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
      ParamPoint p = decode(space, random_unit(rng, dims));
      if (space.admissible(p) && !runner.seen(p)) return p;
    }
    return std::nullopt;
  };

  // Latin hypercube initial design.
  const std::size_t n0 = options.initial_design;
  std::vector<std::vector<std::size_t>> strata(static_cast<std::size_t>(dims));
  for (auto& perm : strata) {
    perm.resize(n0);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n0; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  for (std::size_t i = 0; i < n0; ++i) {
    Eigen::VectorXd u(dims);
    for (Eigen::Index d = 0; d < dims; ++d)
      u[d] = (static_cast<double>(strata[static_cast<std::size_t>(d)][i]) + rng.uniform()) /
             static_cast<double>(n0);
    ParamPoint p = decode(space, u);
    if (!space.admissible(p) || runner.seen(p)) {
      auto alt = random_fresh();
      if (!alt) break;
      p = *alt;
    }
    runner.evaluate(p, "lhs");
  }

  bool fallback = false;
  while (runner.log().size() < options.budget) {
    std::vector<const TrialRecord*> ok;
    for (const auto& t : runner.log())
      if (t.ok()) ok.push_back(&t);

    std::optional<ParamPoint> next;
    std::string stage = "ei";
    double mean_y = 0.0, sd_y = 0.0;
    if (!ok.empty()) {
      for (auto* t : ok) mean_y += *t->accuracy;
      mean_y /= static_cast<double>(ok.size());
      for (auto* t : ok) sd_y += (*t->accuracy - mean_y) * (*t->accuracy - mean_y);
      sd_y = std::sqrt(sd_y / static_cast<double>(ok.size()));
    }
    if (ok.size() < 2 || sd_y < 1e-12) {
      if (!fallback) {
        notes.push_back("degenerate observations after trial " +
                        std::to_string(runner.log().size()) +
                        "; falling back to random sampling");
        fallback = true;
      }
      stage = "random";
      next = random_fresh();
    } else {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(ok.size()), dims);
      Eigen::VectorXd y(static_cast<Eigen::Index>(ok.size()));
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ok.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = encode(space, ok[i]->params).transpose();
        y[static_cast<Eigen::Index>(i)] = (*ok[i]->accuracy - mean_y) / sd_y;
        best = std::max(best, y[static_cast<Eigen::Index>(i)]);
      }
      GaussianProcess gp(x, y);
      // Length scales: best shared value, then one coordinate pass.
      static const double kScales[] = {0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
      Eigen::VectorXd scales = Eigen::VectorXd::Constant(dims, kScales[0]);
      double best_lml = -std::numeric_limits<double>::infinity();
      for (double s : kScales) {
        const Eigen::VectorXd trial = Eigen::VectorXd::Constant(dims, s);
        const double lml = gp.fit(trial);
        if (lml > best_lml) {
          best_lml = lml;
          scales = trial;
        }
      }
      for (Eigen::Index d = 0; d < dims && dims > 1; ++d) {
        for (double s : kScales) {
          Eigen::VectorXd trial = scales;
          trial[d] = s;
          const double lml = gp.fit(trial);
          if (lml > best_lml) {
            best_lml = lml;
            scales = trial;
          }
        }
      }
      gp.set(scales);

      // Acquisition on snapped points, so discrete axes are rounded inside
      // the search.
      auto acquisition = [&](const ParamPoint& p) {
        if (!space.admissible(p) || runner.seen(p))
          return -std::numeric_limits<double>::infinity();
        auto [m, s] = gp.predict(encode(space, p));
        return expected_improvement(m, s, best, options.exploration);
      };
      std::vector<std::pair<double, Eigen::VectorXd>> pool;
      pool.reserve(options.acquisition_samples);
      for (std::size_t i = 0; i < options.acquisition_samples; ++i) {
        Eigen::VectorXd u = random_unit(rng, dims);
        pool.emplace_back(acquisition(decode(space, u)), std::move(u));
      }
      std::stable_sort(pool.begin(), pool.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      double best_ei = -std::numeric_limits<double>::infinity();
      Eigen::VectorXd best_u;
      const std::size_t starts = std::min(options.local_restarts, pool.size());
      for (std::size_t r = 0; r < starts; ++r) {
        Eigen::VectorXd u = pool[r].second;
        double value = pool[r].first;
        double radius = 0.1;
        for (int step = 0; step < 40; ++step) {
          Eigen::VectorXd cand = u;
          for (Eigen::Index d = 0; d < dims; ++d)
            cand[d] = std::clamp(cand[d] + radius * rng.normal(), 0.0, 1.0);
          const double v = acquisition(decode(space, cand));
          if (v > value) {
            value = v;
            u = cand;
          } else {
            radius *= 0.9;
          }
        }
        if (value > best_ei) {
          best_ei = value;
          best_u = u;
        }
      }
      if (std::isfinite(best_ei)) {
        next = decode(space, best_u);
      } else {
        stage = "random";
        next = random_fresh();
      }
    }
    if (!next) {
      notes.push_back("no admissible unevaluated point left after trial " +
                      std::to_string(runner.log().size()));
      break;
    }
    runner.evaluate(*next, stage);
  }
  return finish(runner, std::move(notes), {});
}

nlohmann::json to_json(const TrialRecord& trial) {
  nlohmann::json j;
  j["trial"] = trial.index;
  j["params"] = trial.params;
  j["accuracy"] = trial.accuracy ? nlohmann::json(*trial.accuracy) : nlohmann::json(nullptr);
  j["seconds"] = trial.wall_seconds;
  j["seed"] = trial.seed;
  j["stage"] = trial.stage;
  j["error"] = trial.error;
  return j;
}

TrialRecord trial_from_json(const nlohmann::json& j) {
  TrialRecord t;
  t.index = j.at("trial").get<std::size_t>();
  t.params = j.at("params").get<ParamPoint>();
  if (!j.at("accuracy").is_null()) t.accuracy = j.at("accuracy").get<double>();
  t.wall_seconds = j.at("seconds").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.stage = j.at("stage").get<std::string>();
  t.error = j.at("error").get<std::string>();
  return t;
}

}  // namespace dlr::hyperopt
