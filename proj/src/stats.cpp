// Copyright 2026 The rarepath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rarepath/stats.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "rarepath/error.hpp"

namespace rarepath::stats {

void RunningMoments::add(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) noexcept {
  if (other.n_ == 0) {
    return;
  }
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / total;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
  n_ += other.n_;
}

double RunningMoments::variance() const noexcept {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningMoments::stderr_of_mean() const noexcept {
  if (n_ < 2) {
    return std::numeric_limits<double>::infinity();
  }
  return std::sqrt(variance() / static_cast<double>(n_));
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi_square_survival(double x, double dof) {
  require(dof > 0, "chi_square_survival: dof must be positive");
  if (x <= 0) {
    return 1.0;
  }
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

ChiSquareResult two_sample_chi_square(std::span<const double> a, std::span<const double> b,
                                      double min_pooled) {
  require(a.size() == b.size() && !a.empty(), "two_sample_chi_square: histogram size mismatch");
  // Pool from the right so sparse tails form one bin.
  std::vector<double> pa, pb;
  double tail_a = 0.0, tail_b = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) {
    tail_a += a[k];
    tail_b += b[k];
    if (tail_a + tail_b >= min_pooled) {
      pa.push_back(tail_a);
      pb.push_back(tail_b);
      tail_a = tail_b = 0.0;
    }
  }
  if (tail_a + tail_b > 0) {
    if (pa.empty()) {
      pa.push_back(0.0);
      pb.push_back(0.0);
    }
    pa.back() += tail_a;
    pb.back() += tail_b;
  }
  const double na = std::accumulate(pa.begin(), pa.end(), 0.0);
  const double nb = std::accumulate(pb.begin(), pb.end(), 0.0);
  require(na > 0 && nb > 0, "two_sample_chi_square: empty sample");
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  ChiSquareResult result;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    const double diff = ka * pa[k] - kb * pb[k];
    result.statistic += diff * diff / (pa[k] + pb[k]);
  }
  result.bins = pa.size();
  result.dof = static_cast<double>(pa.size()) - 1.0;
  result.p_value = result.dof > 0 ? chi_square_survival(result.statistic, result.dof) : 1.0;
  return result;
}

ChiSquareResult goodness_of_fit(std::span<const double> observed, std::span<const double> probs,
                                double min_expected) {
  require(observed.size() == probs.size() && !observed.empty(),
          "goodness_of_fit: histogram size mismatch");
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  require(n > 0, "goodness_of_fit: no observations");
  std::vector<double> obs, expct;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = n * probs[k];
    if (e >= min_expected) {
      obs.push_back(observed[k]);
      expct.push_back(e);
    } else {
      pooled_obs += observed[k];
      pooled_exp += e;
    }
  }
  if (pooled_exp > 0 || pooled_obs > 0) {
    if (pooled_exp >= min_expected || obs.empty()) {
      obs.push_back(pooled_obs);
      expct.push_back(pooled_exp);
    } else {
      obs.back() += pooled_obs;
      expct.back() += pooled_exp;
    }
  }
  ChiSquareResult result;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (expct[k] <= 0) {
      result.statistic = obs[k] > 0 ? std::numeric_limits<double>::infinity() : result.statistic;
      continue;
    }
    const double diff = obs[k] - expct[k];
    result.statistic += diff * diff / expct[k];
  }
  result.bins = obs.size();
  result.dof = static_cast<double>(obs.size()) - 1.0;
  result.p_value = result.dof > 0 ? chi_square_survival(result.statistic, result.dof) : 1.0;
  return result;
}

ChiSquareResult weighted_vs_unweighted(std::span<const std::size_t> weighted_bins,
                                       std::span<const double> weights,
                                       std::span<const std::size_t> direct_bins, std::size_t bins,
                                       double min_pooled) {
  require(weighted_bins.size() == weights.size() && !weights.empty() && !direct_bins.empty() &&
              bins > 0,
          "weighted_vs_unweighted: empty or mismatched samples");
  const double nw = static_cast<double>(weights.size());
  const double nd = static_cast<double>(direct_bins.size());
  std::vector<double> hits_w(bins, 0.0), hits_d(bins, 0.0);
  for (const std::size_t k : weighted_bins) {
    require(k < bins, "weighted_vs_unweighted: bin index out of range");
    hits_w[k] += 1.0;
  }
  for (const std::size_t k : direct_bins) {
    require(k < bins, "weighted_vs_unweighted: bin index out of range");
    hits_d[k] += 1.0;
  }
  // A weighted bin seen a handful of times has a badly underestimated
  // variance, so sparse bins are merged from the right.
  std::vector<std::size_t> target(bins);
  std::size_t pooled = 0;
  {
    double run_w = 0.0, run_d = 0.0;
    std::vector<std::size_t> open;
    for (std::size_t k = bins; k-- > 0;) {
      open.push_back(k);
      run_w += hits_w[k];
      run_d += hits_d[k];
      if ((run_w >= min_pooled && run_d >= min_pooled) || k == 0) {
        for (const std::size_t j : open) target[j] = pooled;
        ++pooled;
        open.clear();
        run_w = run_d = 0.0;
      }
    }
  }
  const auto out_bins = static_cast<Eigen::Index>(pooled);
  Eigen::VectorXd pw = Eigen::VectorXd::Zero(out_bins);
  Eigen::VectorXd m2 = pw, pd = pw;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(target[weighted_bins[i]]);
    pw[k] += weights[i];
    m2[k] += weights[i] * weights[i];
  }
  for (const std::size_t k : direct_bins) {
    pd[static_cast<Eigen::Index>(target[k])] += 1.0;
  }
  pw /= nw;
  m2 /= nw;
  pd /= nd;

  Eigen::MatrixXd cov = (Eigen::MatrixXd(m2.asDiagonal()) - pw * pw.transpose()) / nw +
                        (Eigen::MatrixXd(pd.asDiagonal()) - pd * pd.transpose()) / nd;
  const Eigen::VectorXd diff = pw - pd;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * lambda.cwiseAbs().maxCoeff();
  const Eigen::VectorXd projected = eig.eigenvectors().transpose() * diff;
  ChiSquareResult result;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > cutoff) {
      result.statistic += projected[i] * projected[i] / lambda[i];
      ++rank;
    }
  }
  result.bins = pooled;
  result.dof = static_cast<double>(rank);
  result.p_value = rank > 0 ? chi_square_survival(result.statistic, result.dof) : 1.0;
  return result;
}

}  // namespace rarepath::stats
