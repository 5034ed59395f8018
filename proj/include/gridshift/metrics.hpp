#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gridshift {

// One return measurement. `timestep` is the cumulative environment timestep
// at the episode's reset, so the first post-novelty point carries the
// injection timestep itself.
struct CurvePoint {
  long episode = 0;
  long timestep = 0;
  double ret = 0.0;
  bool post_novelty = false;
};

using PerformanceCurve = std::vector<CurvePoint>;

// Engine-produced curves satisfy these; the metric functions themselves stay
// pure and do not reject synthetic inputs (property tests shift returns out
// of [0, 1] on purpose).
inline void validate_curve(const PerformanceCurve& curve) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].ret < 0.0 || curve[i].ret > 1.0)
      throw std::invalid_argument("curve return outside [0, 1]");
    if (i > 0) {
      if (curve[i].episode <= curve[i - 1].episode)
        throw std::invalid_argument("curve episodes must be strictly increasing");
      if (curve[i].timestep < curve[i - 1].timestep)
        throw std::invalid_argument("curve timesteps must be non-decreasing");
    }
  }
}

struct EvalSummary {
  double mean = 0.0;
  double variance = 0.0;
  long episodes = 0;
};

inline EvalSummary summarize(const std::vector<double>& returns) {
  if (returns.empty())
    throw std::invalid_argument("evaluation summary needs at least one episode");
  double sum = 0.0;
  for (double r : returns) sum += r;
  const double mean = sum / returns.size();
  double sq = 0.0;
  for (double r : returns) sq += (r - mean) * (r - mean);
  return {mean, sq / returns.size(), static_cast<long>(returns.size())};
}

inline PerformanceCurve post_novelty_part(const PerformanceCurve& curve) {
  PerformanceCurve post;
  for (const auto& p : curve)
    if (p.post_novelty) post.push_back(p);
  return post;
}

// Frozen pre-novelty policy on the post-novelty world, above random.
inline double resilience(const EvalSummary& frozen_eval,
                         const EvalSummary& random_eval) {
  return frozen_eval.mean - random_eval.mean;
}

// Earliest index i such that every sliding window mean from i to the end of
// the curve stays within `tolerance` of the final full-window mean. Windows
// hold `window` points; windows near the tail are truncated, which is what
// lets a curve that keeps moving until its last point count as not converged.
// Returns nullopt when no such index exists.
inline std::optional<std::size_t> detect_convergence(const PerformanceCurve& curve,
                                                     std::size_t window,
                                                     double tolerance) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  const std::size_t n = curve.size();
  if (n < window)
    throw std::invalid_argument("curve shorter than the convergence window");

  double final_sum = 0.0;
  for (std::size_t i = n - window; i < n; ++i) final_sum += curve[i].ret;
  const double final_mean = final_sum / window;

  std::optional<std::size_t> earliest;
  double running = 0.0;
  std::size_t count = 0;
  for (std::size_t i = n; i-- > 0;) {
    running += curve[i].ret;
    ++count;
    if (count > window) {
      running -= curve[i + window].ret;
      count = window;
    }
    const double mean = running / count;
    if (mean > final_mean + tolerance || mean < final_mean - tolerance) break;
    earliest = i;
  }
  return earliest;
}

struct AsymptoticResult {
  bool converged = false;
  double above_random = 0.0;  // final-window mean minus random, either way
};

// Converged post-novelty performance above random. When convergence is not
// detected the result still carries the tail-window mean, flagged as such.
inline AsymptoticResult asymptotic_adaptive_performance(
    const PerformanceCurve& curve, const EvalSummary& random_eval,
    std::size_t window = 100, double tolerance = 0.05) {
  const PerformanceCurve post = post_novelty_part(curve);
  if (post.empty())
    throw std::invalid_argument("curve has no post-novelty episodes");
  const auto conv = detect_convergence(post, window, tolerance);
  double tail_sum = 0.0;
  for (std::size_t i = post.size() - window; i < post.size(); ++i)
    tail_sum += post[i].ret;
  return {conv.has_value(), tail_sum / window - random_eval.mean};
}

// Environment timesteps from the injection to detected convergence; nullopt
// when the post-novelty curve never converges.
inline std::optional<long> adaptive_efficiency(const PerformanceCurve& curve,
                                               std::size_t window = 100,
                                               double tolerance = 0.05) {
  const PerformanceCurve post = post_novelty_part(curve);
  if (post.empty())
    throw std::invalid_argument("curve has no post-novelty episodes");
  const auto conv = detect_convergence(post, window, tolerance);
  if (!conv) return std::nullopt;
  return post[*conv].timestep - post.front().timestep;
}

// Measurement recorded immediately after the first post-novelty training
// episode. The curve passed here is the evaluation curve: its first
// post-novelty point is the frozen pre-adaptation evaluation, the second is
// the one-shot point.
inline double one_shot_adaptive_performance(const PerformanceCurve& curve) {
  const PerformanceCurve post = post_novelty_part(curve);
  if (post.size() < 2)
    throw std::invalid_argument(
        "one-shot performance needs at least two post-novelty records");
  return post[1].ret;
}

}  // namespace gridshift
