#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cylev/hilbert.hpp"
#include "cylev/rng.hpp"

namespace cylev {

// Strictly increasing times starting at 0; the discrete carrier of a
// cadlag path on [0, T]. Jump models insert their exact event times.
template <typename Scalar>
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<Scalar> times) : times_(std::move(times)) {
    if (times_.empty() || times_.front() != Scalar(0)) {
      throw std::invalid_argument("TimeGrid: times must start at 0");
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!std::isfinite(static_cast<double>(times_[i]))) {
        throw std::invalid_argument("TimeGrid: times must be finite");
      }
      if (i > 0 && !(times_[i] > times_[i - 1])) {
        throw std::invalid_argument("TimeGrid: times must be strictly increasing");
      }
    }
  }

  static TimeGrid uniform(Scalar horizon, Index steps) {
    if (!(horizon > Scalar(0))) {
      throw std::invalid_argument("TimeGrid::uniform: horizon must be positive");
    }
    if (steps < 1) {
      throw std::invalid_argument("TimeGrid::uniform: steps must be >= 1");
    }
    std::vector<Scalar> times(static_cast<std::size_t>(steps) + 1);
    for (Index i = 0; i <= steps; ++i) {
      times[static_cast<std::size_t>(i)] = horizon * Scalar(i) / Scalar(steps);
    }
    return TimeGrid(std::move(times));
  }

  // Merge event times into the grid; events outside (0, T) and exact
  // duplicates are dropped.
  TimeGrid with_inserted(const std::vector<Scalar>& events) const {
    std::vector<Scalar> merged = times_;
    merged.reserve(times_.size() + events.size());
    for (Scalar e : events) {
      if (e > Scalar(0) && e < horizon()) merged.push_back(e);
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return TimeGrid(std::move(merged));
  }

  const std::vector<Scalar>& times() const noexcept { return times_; }
  Index size() const noexcept { return static_cast<Index>(times_.size()); }
  Scalar horizon() const noexcept { return times_.back(); }
  Scalar operator[](Index i) const { return times_[static_cast<std::size_t>(i)]; }

  // Locate a time on the grid (within a tight absolute tolerance).
  Index index_of(Scalar t) const {
    const Scalar tol = Scalar(1e-9) * std::max(Scalar(1), horizon());
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it != times_.end() && std::abs(*it - t) <= tol) {
      return static_cast<Index>(it - times_.begin());
    }
    if (it != times_.begin() && std::abs(*(it - 1) - t) <= tol) {
      return static_cast<Index>(it - times_.begin()) - 1;
    }
    std::ostringstream msg;
    msg << "TimeGrid: time " << t << " is not a grid point";
    throw std::out_of_range(msg.str());
  }

  bool contains(Scalar t) const {
    const Scalar tol = Scalar(1e-9) * std::max(Scalar(1), horizon());
    auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
    return it != times_.end() && std::abs(*it - t) <= tol;
  }

 private:
  std::vector<Scalar> times_;
};

enum class LevyKind { Wiener, CompoundPoisson, Stable };

inline const char* to_cstr(LevyKind k) noexcept {
  switch (k) {
    case LevyKind::Wiener: return "wiener";
    case LevyKind::CompoundPoisson: return "compound_poisson";
    case LevyKind::Stable: return "stable";
  }
  return "?";
}

// Per-coordinate i.i.d. law of the jump vectors of a compound Poisson
// model. Named laws carry a closed-form marginal characteristic function;
// Custom supplies only a quantile (inverse cdf) sampler.
class JumpLaw {
 public:
  enum class Kind { StandardNormal, Rademacher, UniformSymmetric, Custom };

  JumpLaw() : kind_(Kind::StandardNormal) {}

  static JumpLaw standard_normal() { return JumpLaw(Kind::StandardNormal); }
  static JumpLaw rademacher() { return JumpLaw(Kind::Rademacher); }
  static JumpLaw uniform_symmetric() { return JumpLaw(Kind::UniformSymmetric); }
  static JumpLaw custom(std::function<double(double)> quantile) {
    JumpLaw law(Kind::Custom);
    if (!quantile) throw std::invalid_argument("JumpLaw::custom: quantile must be callable");
    law.quantile_ = std::move(quantile);
    return law;
  }

  Kind kind() const noexcept { return kind_; }

  const char* name() const noexcept {
    switch (kind_) {
      case Kind::StandardNormal: return "standard_normal";
      case Kind::Rademacher: return "rademacher";
      case Kind::UniformSymmetric: return "uniform_symmetric";
      case Kind::Custom: return "custom";
    }
    return "?";
  }

  bool has_closed_form_cf() const noexcept { return kind_ != Kind::Custom; }

  double sample(CounterEngine& rng) const {
    switch (kind_) {
      case Kind::StandardNormal: return rng.normal();
      case Kind::Rademacher: return rng.uniform() < 0.5 ? -1.0 : 1.0;
      case Kind::UniformSymmetric: return 2.0 * rng.uniform() - 1.0;
      case Kind::Custom: return quantile_(rng.uniform());
    }
    return 0.0;
  }

  // Marginal characteristic function E exp(iu xi).
  std::complex<double> marginal_cf(double u) const {
    switch (kind_) {
      case Kind::StandardNormal: return {std::exp(-0.5 * u * u), 0.0};
      case Kind::Rademacher: return {std::cos(u), 0.0};
      case Kind::UniformSymmetric: return {u == 0.0 ? 1.0 : std::sin(u) / u, 0.0};
      case Kind::Custom:
        throw std::invalid_argument(
            "JumpLaw: custom law has no closed-form cf; compare empirically via the stats tests");
    }
    return {0.0, 0.0};
  }

 private:
  explicit JumpLaw(Kind k) : kind_(k) {}

  Kind kind_;
  std::function<double(double)> quantile_;
};

// Parameters of the coordinate Lévy law: one of three kinds, with spare
// parameters absent rather than defaulted.
template <typename Scalar>
class CoordinateLevyModel {
 public:
  static CoordinateLevyModel wiener() { return CoordinateLevyModel(LevyKind::Wiener); }

  static CoordinateLevyModel compound_poisson(Scalar intensity,
                                              JumpLaw law = JumpLaw::standard_normal()) {
    CoordinateLevyModel m(LevyKind::CompoundPoisson);
    m.intensity_ = intensity;
    m.jump_law_ = std::move(law);
    m.validate();
    return m;
  }

  static CoordinateLevyModel stable(Scalar alpha) {
    CoordinateLevyModel m(LevyKind::Stable);
    m.alpha_ = alpha;
    m.validate();
    return m;
  }

  LevyKind kind() const noexcept { return kind_; }

  Scalar intensity() const {
    require(kind_ == LevyKind::CompoundPoisson && intensity_.has_value(), "intensity");
    return *intensity_;
  }
  const JumpLaw& jump_law() const {
    require(kind_ == LevyKind::CompoundPoisson && jump_law_.has_value(), "jump_law");
    return *jump_law_;
  }
  Scalar alpha() const {
    require(kind_ == LevyKind::Stable && alpha_.has_value(), "alpha");
    return *alpha_;
  }

  void validate() const {
    switch (kind_) {
      case LevyKind::Wiener:
        if (intensity_ || jump_law_ || alpha_) {
          throw std::invalid_argument("model: wiener takes no extra parameters");
        }
        break;
      case LevyKind::CompoundPoisson:
        if (alpha_) throw std::invalid_argument("model: alpha is not a compound_poisson parameter");
        if (!intensity_ || !jump_law_) {
          throw std::invalid_argument("model: compound_poisson requires intensity and jump_law");
        }
        if (!(*intensity_ > Scalar(0))) {
          throw std::invalid_argument("model: intensity must be positive");
        }
        break;
      case LevyKind::Stable:
        if (intensity_ || jump_law_) {
          throw std::invalid_argument("model: intensity/jump_law are not stable parameters");
        }
        if (!alpha_ || !(*alpha_ > Scalar(0)) || !(*alpha_ < Scalar(2))) {
          throw std::invalid_argument("model: alpha must lie in (0, 2)");
        }
        break;
    }
  }

 private:
  explicit CoordinateLevyModel(LevyKind k) : kind_(k) {}

  static void require(bool ok, const char* field) {
    if (!ok) {
      std::ostringstream msg;
      msg << "model: parameter '" << field << "' is not set for this kind";
      throw std::logic_error(msg.str());
    }
  }

  LevyKind kind_;
  std::optional<Scalar> intensity_;
  std::optional<JumpLaw> jump_law_;
  std::optional<Scalar> alpha_;
};

// Exact exponential-arrival partial sums below the horizon.
template <typename Scalar>
std::vector<Scalar> poisson_clock(Scalar intensity, Scalar horizon, std::uint64_t seed) {
  if (!(intensity > Scalar(0))) {
    throw std::invalid_argument("poisson_clock: intensity must be positive");
  }
  if (horizon < Scalar(0)) {
    throw std::invalid_argument("poisson_clock: horizon must be nonnegative");
  }
  std::vector<Scalar> events;
  CounterEngine rng(seed, StreamPurpose::PoissonClock, 0);
  Scalar t = Scalar(0);
  for (;;) {
    t += static_cast<Scalar>(rng.exponential(static_cast<double>(intensity)));
    if (!(t < horizon)) break;
    events.push_back(t);
  }
  return events;
}

// K truncated coordinate Lévy paths on a shared grid with shared
// randomness; X_t(h) is realized by the linear evaluation paths * h.
template <typename Scalar>
class CylindricalPathBundle {
 public:
  CylindricalPathBundle(TimeGrid<Scalar> grid, MatrixX<Scalar> paths,
                        CoordinateLevyModel<Scalar> model, std::uint64_t seed,
                        std::vector<Scalar> event_times = {})
      : grid_(std::move(grid)),
        paths_(std::move(paths)),
        model_(std::move(model)),
        seed_(seed),
        event_times_(std::move(event_times)) {
    if (paths_.rows() != grid_.size()) {
      throw std::invalid_argument("CylindricalPathBundle: path rows must match grid length");
    }
    if (paths_.cols() < 1) {
      throw std::invalid_argument("CylindricalPathBundle: needs at least one coordinate");
    }
    if (!paths_.row(0).isZero(Scalar(0))) {
      throw std::invalid_argument("CylindricalPathBundle: paths must start at 0");
    }
    if (!all_finite(paths_)) {
      throw std::invalid_argument("CylindricalPathBundle: path values must be finite");
    }
  }

  const TimeGrid<Scalar>& grid() const noexcept { return grid_; }
  const MatrixX<Scalar>& paths() const noexcept { return paths_; }
  const CoordinateLevyModel<Scalar>& model() const noexcept { return model_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<Scalar>& event_times() const noexcept { return event_times_; }
  Index coordinates() const noexcept { return paths_.cols(); }

 private:
  TimeGrid<Scalar> grid_;
  MatrixX<Scalar> paths_;  // grid length x K
  CoordinateLevyModel<Scalar> model_;
  std::uint64_t seed_;
  std::vector<Scalar> event_times_;
};

// Simulate the coordinate paths of a cylindrical Lévy process. Each
// coordinate draws from its own counter stream, so the result is
// bit-identical for a given (model, grid, K, seed) under any schedule.
template <typename Scalar>
CylindricalPathBundle<Scalar> simulate_bundle(const CoordinateLevyModel<Scalar>& model,
                                              const TimeGrid<Scalar>& grid, Index coordinates,
                                              std::uint64_t seed) {
  model.validate();
  if (coordinates < 1) {
    throw std::invalid_argument("simulate_bundle: coordinate count K must be >= 1");
  }

  switch (model.kind()) {
    case LevyKind::Wiener: {
      const Index t_count = grid.size();
      MatrixX<Scalar> paths(t_count, coordinates);
      for (Index k = 0; k < coordinates; ++k) {
        CounterEngine rng(seed, StreamPurpose::WienerIncrement, static_cast<std::uint64_t>(k));
        Scalar level = Scalar(0);
        paths(0, k) = level;
        for (Index i = 1; i < t_count; ++i) {
          const Scalar dt = grid[i] - grid[i - 1];
          level += std::sqrt(dt) * static_cast<Scalar>(rng.normal());
          paths(i, k) = level;
        }
      }
      return CylindricalPathBundle<Scalar>(grid, std::move(paths), model, seed);
    }

    case LevyKind::Stable: {
      const Scalar alpha = model.alpha();
      const Index t_count = grid.size();
      MatrixX<Scalar> paths(t_count, coordinates);
      for (Index k = 0; k < coordinates; ++k) {
        CounterEngine rng(seed, StreamPurpose::StableIncrement, static_cast<std::uint64_t>(k));
        Scalar level = Scalar(0);
        paths(0, k) = level;
        for (Index i = 1; i < t_count; ++i) {
          const Scalar dt = grid[i] - grid[i - 1];
          level += std::pow(dt, Scalar(1) / alpha) *
                   static_cast<Scalar>(rng.stable_symmetric(static_cast<double>(alpha)));
          paths(i, k) = level;
        }
      }
      return CylindricalPathBundle<Scalar>(grid, std::move(paths), model, seed);
    }

    case LevyKind::CompoundPoisson: {
      std::vector<Scalar> events = poisson_clock(model.intensity(), grid.horizon(), seed);
      TimeGrid<Scalar> full = grid.with_inserted(events);
      const Index t_count = full.size();
      const Index n_jumps = static_cast<Index>(events.size());

      // cumulative jump levels: level_j = sum of the first j jump vectors
      MatrixX<Scalar> levels(n_jumps + 1, coordinates);
      levels.row(0).setZero();
      for (Index k = 0; k < coordinates; ++k) {
        CounterEngine rng(seed, StreamPurpose::JumpCoordinate, static_cast<std::uint64_t>(k));
        for (Index j = 0; j < n_jumps; ++j) {
          levels(j + 1, k) = levels(j, k) + static_cast<Scalar>(model.jump_law().sample(rng));
        }
      }

      MatrixX<Scalar> paths(t_count, coordinates);
      Index arrived = 0;
      for (Index i = 0; i < t_count; ++i) {
        while (arrived < n_jumps && events[static_cast<std::size_t>(arrived)] <= full[i]) {
          ++arrived;
        }
        paths.row(i) = levels.row(arrived);
      }
      return CylindricalPathBundle<Scalar>(std::move(full), std::move(paths), model, seed,
                                           std::move(events));
    }
  }
  throw std::logic_error("simulate_bundle: unreachable");
}

// The defining action of the cylindrical process: X_t(h) = sum_k h_k beta_k(t),
// exactly linear in h because the randomness is shared across evaluations.
template <typename Scalar>
VectorX<Scalar> evaluate(const CylindricalPathBundle<Scalar>& bundle,
                         const CoordinateVector<Scalar>& h) {
  if (h.space() != Space::H) {
    std::ostringstream msg;
    msg << "evaluate: argument lives in " << to_cstr(h.space()) << ", bundle coordinates are in H";
    throw std::invalid_argument(msg.str());
  }
  if (h.size() != bundle.coordinates()) {
    std::ostringstream msg;
    msg << "evaluate: dimension mismatch (" << h.size() << " vs " << bundle.coordinates() << ")";
    throw std::invalid_argument(msg.str());
  }
  return bundle.paths() * h.coords();
}

// Characteristic function of X_t(h) at frequency u, in closed form.
template <typename Scalar>
std::complex<double> closed_form_cf(const CoordinateLevyModel<Scalar>& model,
                                    const CoordinateVector<Scalar>& h, Scalar t, double u) {
  model.validate();
  if (!(t >= Scalar(0))) {
    throw std::invalid_argument("closed_form_cf: time must be nonnegative");
  }
  switch (model.kind()) {
    case LevyKind::Wiener: {
      const double hh = static_cast<double>(h.coords().squaredNorm());
      return {std::exp(-0.5 * static_cast<double>(t) * u * u * hh), 0.0};
    }
    case LevyKind::CompoundPoisson: {
      std::complex<double> prod(1.0, 0.0);
      for (Index k = 0; k < h.size(); ++k) {
        prod *= model.jump_law().marginal_cf(u * static_cast<double>(h[k]));
      }
      const double lt = static_cast<double>(model.intensity()) * static_cast<double>(t);
      return std::exp(lt * (prod - std::complex<double>(1.0, 0.0)));
    }
    case LevyKind::Stable: {
      const double alpha = static_cast<double>(model.alpha());
      const double scale = h.coords().cwiseAbs().array().pow(alpha).sum();
      return {std::exp(-static_cast<double>(t) * std::pow(std::abs(u), alpha) * scale), 0.0};
    }
  }
  throw std::logic_error("closed_form_cf: unreachable");
}

}  // namespace cylev
