#include "privae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace privae {

std::vector<int> equal_count_bins(std::span<const double> values, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("equal_count_bins: bins must be >= 2");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<int> out(n);
  std::size_t group_rank = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && values[order[r]] != values[order[r - 1]]) group_rank = r;
    out[order[r]] = static_cast<int>(group_rank * bins / n);
  }
  return out;
}

double discrete_entropy(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int v : labels) ++counts[v];
  const double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

double discrete_mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("discrete MI: length mismatch");
  if (a.empty()) throw std::invalid_argument("discrete MI: empty input");
  std::map<int, std::size_t> ca, cb;
  std::map<std::pair<int, int>, std::size_t> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++cab[{a[i], b[i]}];
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (const auto& [key, c] : cab) {
    const double pab = static_cast<double>(c) / n;
    const double pa = static_cast<double>(ca[key.first]) / n;
    const double pb = static_cast<double>(cb[key.second]) / n;
    mi += pab * std::log(pab / (pa * pb));
  }
  return std::max(0.0, mi);
}

MigResult mig(const Eigen::MatrixXd& latent_means, const Eigen::MatrixXi& factors,
              std::size_t bins) {
  const Eigen::Index n = latent_means.rows();
  if (n < 100) throw std::invalid_argument("mig: need at least 100 samples, got " + std::to_string(n));
  if (factors.rows() != n) throw std::invalid_argument("mig: latent and factor row counts differ");
  if (latent_means.cols() == 0 || factors.cols() == 0) {
    throw std::invalid_argument("mig: need at least one latent and one factor");
  }
  if (bins < 2) throw std::invalid_argument("mig: bins must be >= 2");
  if (!latent_means.allFinite()) throw std::invalid_argument("mig: non-finite latent values");

  std::vector<std::vector<int>> codes;
  for (Eigen::Index j = 0; j < latent_means.cols(); ++j) {
    std::vector<double> col(latent_means.col(j).data(), latent_means.col(j).data() + n);
    codes.push_back(equal_count_bins(col, bins));
  }

  MigResult result;
  for (Eigen::Index k = 0; k < factors.cols(); ++k) {
    std::vector<int> v(factors.col(k).data(), factors.col(k).data() + n);
    const double hv = discrete_entropy(v);
    if (hv <= 0.0) {
      result.warnings.push_back("factor " + std::to_string(k) + " is constant; skipped");
      continue;
    }
    double best = 0.0, second = 0.0;
    bool have_best = false;
    for (const auto& code : codes) {
      const double mi = discrete_mutual_information(code, v);
      // Strict comparison keeps the lower index on ties.
      if (!have_best || mi > best) {
        second = have_best ? best : 0.0;
        best = mi;
        have_best = true;
      } else if (mi > second) {
        second = mi;
      }
    }
    if (codes.size() == 1) second = 0.0;
    result.per_factor.push_back((best - second) / hv);
    result.scored.push_back(static_cast<std::size_t>(k));
  }
  if (result.per_factor.empty()) throw std::invalid_argument("mig: every factor is constant");
  result.score = std::accumulate(result.per_factor.begin(), result.per_factor.end(), 0.0) /
                 static_cast<double>(result.per_factor.size());
  return result;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: series lengths differ");
  if (a.size() < 3) throw std::invalid_argument("pearson: need at least 3 points");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("pearson: constant series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

PhaseReport phase_detect(std::span<const double> series, std::size_t smooth_window) {
  const std::size_t n = series.size();
  if (n <= 2 * smooth_window) {
    throw std::invalid_argument("phase_detect: series of length " + std::to_string(n) +
                                " too short for smoothing window " + std::to_string(smooth_window));
  }
  PhaseReport r;
  r.smoothed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= smooth_window ? i - smooth_window : 0;
    const std::size_t hi = std::min(n - 1, i + smooth_window);
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += series[k];
    r.smoothed[i] = acc / static_cast<double>(hi - lo + 1);
  }
  r.peak_index = static_cast<std::size_t>(
      std::max_element(r.smoothed.begin(), r.smoothed.end()) - r.smoothed.begin());
  const double peak = r.smoothed[r.peak_index];
  r.final_below_peak = peak - r.smoothed.back() > 0.05 * std::abs(peak);
  return r;
}

double trend_slope(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("trend_slope: need at least 2 points");
  const double mx = (static_cast<double>(n) - 1.0) / 2.0;
  const double my = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxy += dx * (series[i] - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace privae
