#pragma once

#include "core.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

namespace corrbc {

struct McConfig {
  std::uint64_t master_seed = 1;
  std::int64_t trials = 20000;
  double confidence = 0.95;
  unsigned threads = 0;  ///< 0 = process default
};

struct Estimate {
  double mean = 0.0;
  double ci = 0.0;  ///< half-width at the configured confidence
  std::int64_t used = 0;
  std::int64_t rejected = 0;
};

inline Estimate operator*(double a, Estimate e) {
  e.mean *= a;
  e.ci *= std::abs(a);
  return e;
}

// Sum of independent estimates; half-widths combine in quadrature.
inline Estimate operator+(Estimate a, const Estimate& b) {
  a.mean += b.mean;
  a.ci = std::sqrt(a.ci * a.ci + b.ci * b.ci);
  a.used = std::min(a.used, b.used);
  a.rejected += b.rejected;
  return a;
}

namespace detail {

inline std::atomic<unsigned>& default_threads_ref() {
  static std::atomic<unsigned> n{0};
  return n;
}

inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace detail

inline void set_default_threads(unsigned n) { detail::default_threads_ref() = n; }

inline unsigned resolve_threads(unsigned requested) {
  unsigned n = requested ? requested : detail::default_threads_ref().load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

inline double z_value(double confidence) {
  boost::math::normal_distribution<double> nd;
  return boost::math::quantile(nd, 0.5 + confidence / 2.0);
}

// Mean and CI of a finite-valued sample set, in a fixed summation order.
inline Estimate summarize(const std::vector<double>& all, double confidence) {
  std::vector<double> v;
  v.reserve(all.size());
  for (double x : all)
    if (std::isfinite(x)) v.push_back(x);
  Estimate e;
  e.used = static_cast<std::int64_t>(v.size());
  e.rejected = static_cast<std::int64_t>(all.size() - v.size());
  require(!v.empty(), errc::estimation_failure, "all Monte Carlo samples are non-finite");
  e.mean = detail::pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
  if (v.size() > 1) {
    std::vector<double> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = (v[i] - e.mean) * (v[i] - e.mean);
    const double var = detail::pairwise_sum(d.data(), d.size()) / static_cast<double>(v.size() - 1);
    e.ci = z_value(confidence) * std::sqrt(var / static_cast<double>(v.size()));
  }
  return e;
}

// Samples n quantities per trial. f(rng, trial_index, out) fills out[0..n).
// Each trial owns stream_rng(seed, index), so results do not depend on the thread count.
inline std::vector<Estimate> expect_multi(
    const McConfig& cfg, std::size_t n,
    const std::function<void(Rng&, std::uint64_t, double*)>& f) {
  require(cfg.trials >= 2, errc::invalid_config, "trials must be at least 2");
  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<double> vals(trials * n, 0.0);
  constexpr std::size_t chunk = 64;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= trials) return;
      const std::size_t end = std::min(trials, begin + chunk);
      for (std::size_t t = begin; t < end; ++t) {
        Rng rng = stream_rng(cfg.master_seed, t);
        f(rng, t, vals.data() + t * n);
      }
    }
  };
  const unsigned nt = std::min<std::size_t>(resolve_threads(cfg.threads), (trials + chunk - 1) / chunk);
  if (nt <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nt; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<Estimate> out(n);
  std::vector<double> col(trials);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < trials; ++t) col[t] = vals[t * n + k];
    out[k] = summarize(col, cfg.confidence);
  }
  return out;
}

inline Estimate expect(const McConfig& cfg, const std::function<double(Rng&, std::uint64_t)>& f) {
  return expect_multi(cfg, 1, [&](Rng& rng, std::uint64_t t, double* out) { out[0] = f(rng, t); })[0];
}

}  // namespace corrbc
