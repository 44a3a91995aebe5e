#include "spkid/vq.hpp"

#include <algorithm>
#include <cmath>

#include "spkid/error.hpp"

namespace spkid {
namespace {

constexpr int kPowerIterations = 100;
constexpr double kPowerTolerance = 1e-10;
constexpr int kMaxBits = 10;

Vec mean_of(std::span<const Vec> vs, std::size_t dim) {
  Vec m(dim, 0.0);
  for (const auto& v : vs) {
    for (std::size_t d = 0; d < dim; ++d) m[d] += v[d];
  }
  if (!vs.empty()) {
    for (double& x : m) x /= static_cast<double>(vs.size());
  }
  return m;
}

void fix_sign(Vec& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0.0) {
    for (double& x : v) x = -x;
  }
}

double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Vec multiply(std::span<const double> m, const Vec& v) {
  const std::size_t dim = v.size();
  Vec out(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) acc += m[i * dim + j] * v[j];
    out[i] = acc;
  }
  return out;
}

}  // namespace

const char* to_string(SplitMethod m) noexcept {
  return m == SplitMethod::hyperplane ? "hyperplane" : "std_deviation";
}

SplitMethod split_method_from_string(const std::string& s) {
  if (s == "hyperplane") return SplitMethod::hyperplane;
  if (s == "std_deviation" || s == "stddev") return SplitMethod::std_deviation;
  throw Error(ErrorKind::config, "unknown split method '" + s + "'");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

std::pair<Vec, Vec> split_stddev(std::span<const double> centroid,
                                 std::span<const Vec> assigned, double epsilon) {
  const std::size_t dim = centroid.size();
  const Vec mean = mean_of(assigned, dim);
  Vec sigma(dim, 0.0);
  for (const auto& v : assigned) {
    for (std::size_t d = 0; d < dim; ++d) sigma[d] += (v[d] - mean[d]) * (v[d] - mean[d]);
  }
  bool all_zero = true;
  for (double& s : sigma) {
    s = assigned.empty() ? 0.0 : std::sqrt(s / static_cast<double>(assigned.size()));
    all_zero = all_zero && s == 0.0;
  }
  if (all_zero) {
    sigma.assign(dim, 0.0);
    sigma[0] = 1e-4;
  }
  Vec plus(centroid.begin(), centroid.end());
  Vec minus(centroid.begin(), centroid.end());
  for (std::size_t d = 0; d < dim; ++d) {
    plus[d] += epsilon * sigma[d];
    minus[d] -= epsilon * sigma[d];
  }
  return {std::move(plus), std::move(minus)};
}

EigenPair dominant_eigenpair(std::span<const double> matrix, std::size_t dim) {
  Vec v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
  double n0 = norm(v);
  for (double& x : v) x /= n0;

  for (int restart = 0; restart < 2; ++restart) {
    for (int it = 0; it < kPowerIterations; ++it) {
      Vec w = multiply(matrix, v);
      const double nw = norm(w);
      if (nw == 0.0) break;
      for (double& x : w) x /= nw;
      double delta = 0.0;
      for (std::size_t i = 0; i < dim; ++i) delta = std::max(delta, std::abs(w[i] - v[i]));
      v = std::move(w);
      if (delta < kPowerTolerance) break;
    }
    const Vec mv = multiply(matrix, v);
    double lambda = 0.0;
    for (std::size_t i = 0; i < dim; ++i) lambda += v[i] * mv[i];
    if (lambda > 0.0 || restart == 1) {
      fix_sign(v);
      return {std::max(lambda, 0.0), v};
    }
    // Start vector fell in the null space; restart on the largest variance axis.
    std::size_t axis = 0;
    for (std::size_t i = 1; i < dim; ++i) {
      if (matrix[i * dim + i] > matrix[axis * dim + axis]) axis = i;
    }
    v.assign(dim, 0.0);
    v[axis] = 1.0;
  }
  return {0.0, v};
}

std::pair<Vec, Vec> split_hyperplane(std::span<const double> centroid,
                                     std::span<const Vec> assigned, double epsilon) {
  const std::size_t dim = centroid.size();
  if (assigned.size() < 2) return split_stddev(centroid, assigned, epsilon);
  const Vec mean = mean_of(assigned, dim);
  std::vector<double> cov(dim * dim, 0.0);
  for (const auto& v : assigned) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double di = v[i] - mean[i];
      for (std::size_t j = 0; j < dim; ++j) cov[i * dim + j] += di * (v[j] - mean[j]);
    }
  }
  for (double& c : cov) c /= static_cast<double>(assigned.size());

  const EigenPair eig = dominant_eigenpair(cov, dim);
  if (!(eig.value > 0.0)) return split_stddev(centroid, assigned, epsilon);
  const double scale = epsilon * std::sqrt(eig.value);
  Vec plus(centroid.begin(), centroid.end());
  Vec minus(centroid.begin(), centroid.end());
  for (std::size_t d = 0; d < dim; ++d) {
    plus[d] += scale * eig.vector[d];
    minus[d] -= scale * eig.vector[d];
  }
  return {std::move(plus), std::move(minus)};
}

Quantized quantize(std::span<const double> v, const LinearCodebook& codebook,
                   CoefficientMetric metric) {
  if (codebook.codewords.empty()) {
    throw Error(ErrorKind::invalid_argument, "quantize: empty codebook");
  }
  Quantized best{0, 0.0};
  for (std::size_t i = 0; i < codebook.codewords.size(); ++i) {
    const auto& c = codebook.codewords[i].lpcc;
    double s = 0.0;
    if (metric == CoefficientMetric::mse) {
      for (std::size_t d = 0; d < v.size(); ++d) s += (v[d] - c[d]) * (v[d] - c[d]);
    } else {
      for (std::size_t d = 0; d < v.size(); ++d) s += std::abs(v[d] - c[d]);
    }
    s /= static_cast<double>(v.size());
    if (i == 0 || s < best.distance) best = {i, s};
  }
  return best;
}

LloydOutcome lloyd_iterate(const LinearCodebook& codebook, std::span<const Vec> vectors) {
  LloydOutcome out;
  out.codebook = codebook;
  const std::size_t k = codebook.size();
  if (k == 0 || vectors.empty()) return out;
  const std::size_t dim = vectors.front().size();

  out.assignment.resize(vectors.size());
  std::vector<double> dist(vectors.size());
  std::vector<std::size_t> population(k, 0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const Quantized q = quantize(vectors[i], codebook);
    out.assignment[i] = q.index;
    dist[i] = q.distance;
    ++population[q.index];
  }

  auto& cells = out.codebook.codewords;
  for (std::size_t empty = 0; empty < k; ++empty) {
    if (population[empty] != 0) continue;
    // Highest-distortion cluster that can spare a member.
    std::vector<double> cluster_cost(k, 0.0);
    for (std::size_t i = 0; i < vectors.size(); ++i) cluster_cost[out.assignment[i]] += dist[i];
    std::size_t donor = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (population[c] < 2 || cluster_cost[c] <= 0.0) continue;
      if (donor == k || cluster_cost[c] > cluster_cost[donor]) donor = c;
    }
    if (donor == k) break;  // nothing left to split off: degenerate data
    std::size_t far = vectors.size();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (out.assignment[i] != donor) continue;
      if (far == vectors.size() || dist[i] > dist[far]) far = i;
    }
    cells[empty].lpcc = vectors[far];
    out.assignment[far] = empty;
    dist[far] = 0.0;
    --population[donor];
    population[empty] = 1;
    out.repaired = true;
  }

  std::vector<Vec> sums(k, Vec(dim, 0.0));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    auto& s = sums[out.assignment[i]];
    for (std::size_t d = 0; d < dim; ++d) s[d] += vectors[i][d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    cells[c].population = population[c];
    if (population[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      cells[c].lpcc[d] = sums[c][d] / static_cast<double>(population[c]);
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    total += squared_distance(vectors[i], cells[out.assignment[i]].lpcc);
  }
  out.distortion = total / static_cast<double>(vectors.size());
  out.codebook.training_distortion = out.distortion;
  return out;
}

LinearCodebook train_codebook(std::span<const Vec> lpcc, std::span<const Vec> lpc, int bits,
                              SplitMethod method, const VqOptions& options, VqTrace* trace) {
  if (bits < 0 || bits > kMaxBits) {
    throw Error(ErrorKind::invalid_argument, "train_codebook: bits must be in [0, 10]");
  }
  const std::size_t target = std::size_t{1} << bits;
  if (lpcc.size() < target) {
    throw Error(ErrorKind::insufficient_data,
                "train_codebook: " + std::to_string(lpcc.size()) + " vectors for a codebook of " +
                    std::to_string(target));
  }
  if (lpc.size() != lpcc.size()) {
    throw Error(ErrorKind::invalid_argument, "train_codebook: lpc and lpcc counts differ");
  }
  if (!(options.epsilon > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "train_codebook: epsilon must be positive");
  }
  const std::size_t dim = lpcc.front().size();
  const std::size_t lpc_dim = lpc.front().size();

  LinearCodebook cb;
  cb.bits = bits;
  cb.codewords.push_back({mean_of(lpcc, dim), Vec(lpc_dim, 0.0), lpcc.size()});
  std::vector<std::size_t> assignment(lpcc.size(), 0);

  const bool identical = std::all_of(lpcc.begin(), lpcc.end(),
                                     [&](const Vec& v) { return v == lpcc.front(); });
  if (identical) {
    cb.codewords.front().lpcc = lpcc.front();
    cb.codewords.front().lpc = mean_of(lpc, lpc_dim);
    Codeword empty = cb.codewords.front();
    empty.population = 0;
    cb.codewords.resize(target, empty);
    cb.training_distortion = 0.0;
    cb.degenerate = bits > 0;
    return cb;
  }

  double distortion = 0.0;
  for (std::size_t i = 0; i < lpcc.size(); ++i) {
    distortion += squared_distance(lpcc[i], cb.codewords[0].lpcc);
  }
  distortion /= static_cast<double>(lpcc.size());

  for (int stage = 1; stage <= bits; ++stage) {
    std::vector<std::vector<Vec>> members(cb.size());
    for (std::size_t i = 0; i < lpcc.size(); ++i) members[assignment[i]].push_back(lpcc[i]);

    LinearCodebook next;
    next.bits = stage;
    next.codewords.reserve(2 * cb.size());
    for (std::size_t c = 0; c < cb.size(); ++c) {
      auto [plus, minus] = method == SplitMethod::hyperplane
                               ? split_hyperplane(cb.codewords[c].lpcc, members[c], options.epsilon)
                               : split_stddev(cb.codewords[c].lpcc, members[c], options.epsilon);
      next.codewords.push_back({std::move(plus), Vec(lpc_dim, 0.0), 0});
      next.codewords.push_back({std::move(minus), Vec(lpc_dim, 0.0), 0});
    }
    cb = std::move(next);

    double previous = -1.0;
    for (int it = 0; it < options.max_iterations; ++it) {
      LloydOutcome step = lloyd_iterate(cb, lpcc);
      cb = std::move(step.codebook);
      assignment = std::move(step.assignment);
      distortion = step.distortion;
      if (trace) trace->steps.push_back({stage, cb.size(), it, distortion, step.repaired});
      if (distortion == 0.0) break;
      if (previous > 0.0 && !step.repaired && (previous - distortion) / previous < options.tolerance) {
        break;
      }
      previous = distortion;
    }
  }

  // Re-partition against the final centroids so codeword populations and
  // LPC means match what quantize() will do at scoring time. Kept only when
  // no cell empties out.
  if (bits > 0) {
    std::vector<std::size_t> nearest(lpcc.size());
    std::vector<std::size_t> count(cb.size(), 0);
    double total = 0.0;
    for (std::size_t i = 0; i < lpcc.size(); ++i) {
      const Quantized q = quantize(lpcc[i], cb);
      nearest[i] = q.index;
      ++count[q.index];
      total += q.distance;
    }
    if (std::none_of(count.begin(), count.end(), [](std::size_t c) { return c == 0; })) {
      assignment = std::move(nearest);
      distortion = total / static_cast<double>(lpcc.size());
    }
  }

  std::vector<Vec> lpc_sum(cb.size(), Vec(lpc_dim, 0.0));
  std::vector<std::size_t> population(cb.size(), 0);
  for (std::size_t i = 0; i < lpc.size(); ++i) {
    ++population[assignment[i]];
    for (std::size_t d = 0; d < lpc_dim; ++d) lpc_sum[assignment[i]][d] += lpc[i][d];
  }
  for (std::size_t c = 0; c < cb.size(); ++c) {
    auto& cw = cb.codewords[c];
    cw.population = population[c];
    if (population[c] == 0) {
      cb.degenerate = true;
      continue;
    }
    for (std::size_t d = 0; d < lpc_dim; ++d) {
      cw.lpc[d] = lpc_sum[c][d] / static_cast<double>(population[c]);
    }
  }
  cb.bits = bits;
  cb.training_distortion = distortion;
  return cb;
}

}  // namespace spkid
