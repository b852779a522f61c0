#pragma once

// Brute-force reference implementations used only by the tests. Everything
// here is a literal transcription of the averages and double sums that the
// library computes by faster routes (FFT correlation, matrix products,
// blocked inner sums).

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "impactlab/core.hpp"
#include "impactlab/propagator.hpp"

namespace oracles {

using namespace impactlab;

inline double response(const PairPanel& panel, long tau) {
  double acc = 0.0;
  long long n = 0;
  for (std::size_t d = 0; d < panel.days(); ++d) {
    const BarSeries& a = panel.a[d];
    const BarSeries& b = panel.b[d];
    for (int t = a.valid_from; t + tau < a.slots(); ++t) {
      if (b.sign[static_cast<std::size_t>(t)] == 0) continue;
      const double r = a.log_mid[static_cast<std::size_t>(t + tau)] -
                       a.log_mid[static_cast<std::size_t>(t)];
      acc += r * static_cast<double>(b.sign[static_cast<std::size_t>(t)]);
      ++n;
    }
  }
  return n > 0 ? acc / static_cast<double>(n) : kNaN;
}

inline double correlator(const PairPanel& panel, long tau) {
  double acc = 0.0;
  long long n = 0;
  for (std::size_t d = 0; d < panel.days(); ++d) {
    const BarSeries& a = panel.a[d];
    const BarSeries& b = panel.b[d];
    for (int t = 0; t + tau < a.slots(); ++t)
      acc += static_cast<double>(a.sign[static_cast<std::size_t>(t + tau)] *
                                 b.sign[static_cast<std::size_t>(t)]);
    n += a.slots() - tau;
  }
  return n > 0 ? acc / static_cast<double>(n) : kNaN;
}

inline double diffusion(const PairPanel& panel, long tau) {
  double acc = 0.0;
  long long n = 0;
  for (std::size_t d = 0; d < panel.days(); ++d) {
    const BarSeries& a = panel.a[d];
    const BarSeries& b = panel.b[d];
    const int mv = std::max(a.valid_from, b.valid_from);
    for (int t = mv; t + tau < a.slots(); ++t) {
      const double ra = a.log_mid[static_cast<std::size_t>(t + tau)] -
                        a.log_mid[static_cast<std::size_t>(t)];
      const double rb = b.log_mid[static_cast<std::size_t>(t + tau)] -
                        b.log_mid[static_cast<std::size_t>(t)];
      acc += ra * rb;
      ++n;
    }
  }
  return n > 0 ? acc / static_cast<double>(n) : kNaN;
}

// Direct evaluation of the superposition response: future trades enter with
// the kernel at the remaining lag, past trades with the kernel difference;
// the kernel vanishes outside [1, t_cut] and history is cut t_cut back.
inline double theo_response(const LagCurve& theta_first, const LagCurve& theta_second,
                            const LagCurve& kernel, long t_cut, long tau) {
  auto g = [&](long s) { return (s >= 1 && s <= t_cut) ? kernel.at(s) : 0.0; };
  double acc = 0.0;
  for (long t = 0; t < tau; ++t) acc += g(tau - t) * theta_first.at(t);
  for (long t = -t_cut; t < 0; ++t) acc += (g(tau - t) - g(-t)) * theta_second.at(-t);
  return acc;
}

// Literal six-sum evaluation of one diffusion component (small t_cut only).
struct DiffusionFns {
  std::function<double(long)> g1, g2, th1, th2;
  double v = 1.0;
  double d_eta = 0.0;
};

inline double diffusion_component(const DiffusionFns& f, long t_cut, long tau) {
  double equal = 0.0;
  for (long tp = 0; tp < tau; ++tp) equal += f.g1(tau - tp) * f.g2(tau - tp);
  for (long tp = -t_cut; tp < 0; ++tp)
    equal += (f.g1(tau - tp) - f.g1(-tp)) * (f.g2(tau - tp) - f.g2(-tp));
  equal *= f.th1(0) * f.v;

  double delta = 0.0;
  for (long tp = 0; tp < tau; ++tp)
    for (long ts = tp + 1; ts < tau; ++ts) delta += f.g1(tau - tp) * f.g2(tau - ts) * f.th2(ts - tp);
  for (long ts = 0; ts < tau; ++ts)
    for (long tp = ts + 1; tp < tau; ++tp) delta += f.g1(tau - tp) * f.g2(tau - ts) * f.th1(tp - ts);
  for (long tp = -t_cut; tp < 0; ++tp)
    for (long ts = tp + 1; ts < 0; ++ts)
      delta += (f.g1(tau - tp) - f.g1(-tp)) * (f.g2(tau - ts) - f.g2(-ts)) * f.th2(ts - tp);
  for (long ts = -t_cut; ts < 0; ++ts)
    for (long tp = ts + 1; tp < 0; ++tp)
      delta += (f.g1(tau - tp) - f.g1(-tp)) * (f.g2(tau - ts) - f.g2(-ts)) * f.th1(tp - ts);
  for (long ts = 0; ts < tau; ++ts)
    for (long tp = -t_cut; tp < 0; ++tp)
      delta += (f.g1(tau - tp) - f.g1(-tp)) * f.g2(tau - ts) * f.th2(ts - tp);
  for (long tp = 0; tp < tau; ++tp)
    for (long ts = -t_cut; ts < 0; ++ts)
      delta += f.g1(tau - tp) * (f.g2(tau - ts) - f.g2(-ts)) * f.th1(tp - ts);

  return equal + delta * f.v + static_cast<double>(tau) * f.d_eta;
}

// --- synthetic day generators -------------------------------------------------

// Signal-rich test days: persistent signs (slowly flipping regime) and
// prices that respond to own and partner signs through a short exponential
// kernel, so responses, correlators and diffusions all carry real signal.
struct TestUniverse {
  std::vector<std::vector<BarSeries>> stocks;  // [stock][day]
};

inline TestUniverse make_universe(int n_stocks, int n_days, int slots, std::uint64_t seed,
                                  double flip_prob = 0.02, double common_mix = 0.3,
                                  int valid_from = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  TestUniverse out;
  out.stocks.resize(static_cast<std::size_t>(n_stocks));
  for (int d = 0; d < n_days; ++d) {
    std::vector<std::vector<SignValue>> signs(static_cast<std::size_t>(n_stocks));
    std::vector<SignValue> common(static_cast<std::size_t>(slots));
    SignValue cur = u(rng) < 0.5 ? SignValue{1} : SignValue{-1};
    for (int t = 0; t < slots; ++t) {
      if (u(rng) < flip_prob) cur = static_cast<SignValue>(-cur);
      common[static_cast<std::size_t>(t)] = cur;
    }
    for (int s = 0; s < n_stocks; ++s) {
      auto& sg = signs[static_cast<std::size_t>(s)];
      sg.resize(static_cast<std::size_t>(slots));
      SignValue own = u(rng) < 0.5 ? SignValue{1} : SignValue{-1};
      for (int t = 0; t < slots; ++t) {
        if (u(rng) < flip_prob) own = static_cast<SignValue>(-own);
        const SignValue base =
            (u(rng) < common_mix) ? common[static_cast<std::size_t>(t)] : own;
        sg[static_cast<std::size_t>(t)] = (u(rng) < 0.25) ? SignValue{0} : base;
      }
    }
    const std::string date = "2008-01-" + std::string(d + 2 < 10 ? "0" : "") +
                             std::to_string(d + 2);
    for (int s = 0; s < n_stocks; ++s) {
      BarSeries bars;
      bars.stock.symbol = "T" + std::to_string(s);
      bars.grid = SessionGrid(date, slots);
      bars.valid_from = valid_from;
      bars.log_mid.assign(static_cast<std::size_t>(slots), kNaN);
      bars.sign = signs[static_cast<std::size_t>(s)];
      bars.volume.assign(static_cast<std::size_t>(slots), 0.0);
      double level = 0.0;
      double impact = 0.0;
      for (int t = 0; t < slots; ++t) {
        impact *= 0.97;  // short exponential memory of past flow
        double flow = 0.0;
        for (int k = 0; k < n_stocks; ++k) {
          const double w = (k == s) ? 8e-4 : 2e-4;
          flow += w * static_cast<double>(signs[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)]);
        }
        impact += flow;
        level += impact + 2e-4 * gauss(rng);
        if (t >= valid_from) bars.log_mid[static_cast<std::size_t>(t)] = level;
        if (bars.sign[static_cast<std::size_t>(t)] != 0)
          bars.volume[static_cast<std::size_t>(t)] = std::exp(0.8 * gauss(rng));
      }
      out.stocks[static_cast<std::size_t>(s)].push_back(std::move(bars));
    }
  }
  return out;
}

inline PairPanel make_panel(const TestUniverse& u, int i, int j) {
  return align_pair(u.stocks[static_cast<std::size_t>(i)], u.stocks[static_cast<std::size_t>(j)]);
}

}  // namespace oracles
