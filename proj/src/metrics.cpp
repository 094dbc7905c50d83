#include "nfdp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace nfdp {

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("weighted_mean: empty or mismatched input");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    num += values[i] * weights[i];
    den += weights[i];
  }
  if (den <= 0) throw std::invalid_argument("weighted_mean: non-positive total weight");
  return num / den;
}

double weighted_spread(std::span<const double> values, std::span<const double> weights) {
  const double mean = weighted_mean(values, weights);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    num += weights[i] * d * d;
    den += weights[i];
  }
  return std::sqrt(num / den);
}

namespace {

void gather(const SimOutput& out, const Network& net, std::span<const int> link_ids,
            int interval, bool flow, std::vector<double>& values,
            std::vector<double>& weights) {
  if (link_ids.empty()) throw std::invalid_argument("empty subnetwork");
  values.clear();
  weights.clear();
  for (int lid : link_ids) {
    const LinkIntervalState& st = out.links[interval][lid];
    values.push_back(flow ? st.flow_vphpl : st.density_vpkmpl);
    weights.push_back(net.links[lid].lane_km());
  }
}

}  // namespace

double network_density(const SimOutput& out, const Network& net,
                       std::span<const int> link_ids, int interval) {
  std::vector<double> v, w;
  gather(out, net, link_ids, interval, false, v, w);
  return weighted_mean(v, w);
}

double network_flow(const SimOutput& out, const Network& net, std::span<const int> link_ids,
                    int interval) {
  std::vector<double> v, w;
  gather(out, net, link_ids, interval, true, v, w);
  return weighted_mean(v, w);
}

double spread_of_density(const SimOutput& out, const Network& net,
                         std::span<const int> link_ids, int interval) {
  std::vector<double> v, w;
  gather(out, net, link_ids, interval, false, v, w);
  return weighted_spread(v, w);
}

double mean_subnetwork_speed_kmh(const SimOutput& out, std::span<const int> link_ids,
                                 int interval) {
  if (link_ids.empty()) throw std::invalid_argument("empty subnetwork");
  double sum = 0.0;
  for (int lid : link_ids) sum += out.links[interval][lid].speed_kmh;
  return sum / static_cast<double>(link_ids.size());
}

NfdSeries nfd_series(const SimOutput& out, const Network& net, std::span<const int> link_ids) {
  NfdSeries series;
  series.reserve(out.num_intervals);
  for (int h = 0; h < out.num_intervals; ++h) {
    NfdPoint p;
    p.interval = h;
    p.k = network_density(out, net, link_ids, h);
    p.q = network_flow(out, net, link_ids, h);
    p.gamma = spread_of_density(out, net, link_ids, h);
    p.vbar_kmh = mean_subnetwork_speed_kmh(out, link_ids, h);
    series.push_back(p);
  }
  return series;
}

// ---------------------------------------------------------------------------
// Envelope fit
// ---------------------------------------------------------------------------

EnvelopeModel fit_lower_envelope(std::span<const NfdSeries> runs, double bin_width) {
  if (bin_width <= 0) throw std::invalid_argument("fit_lower_envelope: bin width must be > 0");
  std::map<long, std::pair<double, double>> bins;  // bin -> (k, min gamma) at the minimum
  for (const NfdSeries& run : runs) {
    for (const NfdPoint& p : run) {
      long bin = static_cast<long>(std::floor(p.k / bin_width));
      auto it = bins.find(bin);
      if (it == bins.end() || p.gamma < it->second.second)
        bins[bin] = {p.k, p.gamma};
    }
  }
  if (bins.size() < 4)
    throw std::runtime_error("fit_lower_envelope: fewer than 4 occupied density bins");

  // normal equations for gamma ~ a k^3 + b k^2 + c k
  double m[3][3] = {};
  double rhs[3] = {};
  for (const auto& [bin, kv] : bins) {
    const double k = kv.first, g = kv.second;
    const double basis[3] = {k * k * k, k * k, k};
    for (int i = 0; i < 3; ++i) {
      rhs[i] += basis[i] * g;
      for (int j = 0; j < 3; ++j) m[i][j] += basis[i] * basis[j];
    }
  }
  // gaussian elimination with partial pivoting
  int order[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(m[order[row]][col]) > std::abs(m[order[pivot]][col])) pivot = row;
    std::swap(order[col], order[pivot]);
    const double diag = m[order[col]][col];
    if (std::abs(diag) < 1e-30)
      throw std::runtime_error("fit_lower_envelope: singular normal equations");
    for (int row = col + 1; row < 3; ++row) {
      const double f = m[order[row]][col] / diag;
      for (int j = col; j < 3; ++j) m[order[row]][j] -= f * m[order[col]][j];
      rhs[order[row]] -= f * rhs[order[col]];
    }
  }
  double coef[3];
  for (int col = 2; col >= 0; --col) {
    double acc = rhs[order[col]];
    for (int j = col + 1; j < 3; ++j) acc -= m[order[col]][j] * coef[j];
    coef[col] = acc / m[order[col]][col];
  }
  return EnvelopeModel{coef[0], coef[1], coef[2]};
}

double deviation_from_spread(double gamma_observed, double k, const EnvelopeModel& envelope) {
  return gamma_observed - envelope.eval(k);
}

// ---------------------------------------------------------------------------
// Critical state
// ---------------------------------------------------------------------------

CriticalState identify_critical_state(const NfdSeries& series, double interval_s,
                                      double bin_width) {
  if (series.empty()) throw std::invalid_argument("identify_critical_state: empty series");

  std::map<long, std::pair<double, int>> bins;  // bin -> (sum q, count)
  for (const NfdPoint& p : series) {
    long bin = static_cast<long>(std::floor(p.k / bin_width));
    auto& acc = bins[bin];
    acc.first += p.q;
    acc.second += 1;
  }
  long best_bin = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (const auto& [bin, acc] : bins) {
    const double mean = acc.first / acc.second;
    if (mean > best_mean) {  // ties keep the lower bin
      best_mean = mean;
      best_bin = bin;
    }
  }

  CriticalState crit;
  crit.k_cr = (best_bin + 0.5) * bin_width;

  int first = -1, last = -1;
  for (const NfdPoint& p : series) {
    if (p.k > crit.k_cr) {
      if (first == -1) first = p.interval;
      last = p.interval;
    }
  }
  if (first == -1) {
    crit.pricing_needed = false;
    return crit;
  }
  crit.pricing_needed = true;
  crit.period_start_s = first * interval_s;
  crit.period_end_s = (last + 1) * interval_s;
  crit.k_max = k_max_in_window(series, interval_s, crit.period_start_s, crit.period_end_s);
  return crit;
}

double k_max_in_window(const NfdSeries& series, double interval_s, double start_s,
                       double end_s) {
  double k_max = 0.0;
  for (const NfdPoint& p : series) {
    const double t = p.interval * interval_s;
    if (t >= start_s && t < end_s) k_max = std::max(k_max, p.k);
  }
  return k_max;
}

double hysteresis_loop_area(const NfdSeries& series) {
  if (series.size() < 3) return 0.0;
  double twice_area = 0.0;
  for (size_t i = 0; i < series.size(); ++i) {
    const NfdPoint& a = series[i];
    const NfdPoint& b = series[(i + 1) % series.size()];
    twice_area += a.k * b.q - b.k * a.q;
  }
  return std::abs(twice_area) / 2.0;
}

// ---------------------------------------------------------------------------
// Performance summaries
// ---------------------------------------------------------------------------

PerformanceSummary performance_summary(const SimOutput& out, const Scenario& scenario) {
  PerformanceSummary summary;
  summary.cordon_entries = out.cordon_entries;
  summary.in_network_end = out.in_network_end;
  summary.stalled = out.stalled;

  for (const TripRecord& trip : out.trips) {
    if (!trip.completed) continue;
    summary.network.vehicles++;
    summary.network.total_time_h += (trip.complete_s - trip.depart_s) / 3600.0;
    summary.network.total_km += trip.distance_km;
    if (trip.entered_cordon) {
      summary.cordon.vehicles++;
      summary.cordon.total_time_h += trip.cordon_time_s / 3600.0;
      summary.cordon.total_km += trip.cordon_km;
    }
  }
  for (PerformanceRow* row : {&summary.network, &summary.cordon}) {
    if (row->vehicles > 0) {
      row->avg_km = row->total_km / row->vehicles;
      row->avg_min = row->total_time_h * 60.0 / row->vehicles;
    }
    if (row->total_time_h > 0) row->avg_speed_kmh = row->total_km / row->total_time_h;
  }

  const std::vector<int> cordon_links = scenario.cordon.cordon_links();
  summary.avg_queue_cordon.resize(out.num_intervals, 0.0);
  for (int h = 0; h < out.num_intervals; ++h) {
    double total = 0.0;
    for (int lid : cordon_links) total += out.links[h][lid].queue_end;
    summary.avg_queue_cordon[h] = cordon_links.empty() ? 0.0 : total / cordon_links.size();
  }
  return summary;
}

}  // namespace nfdp
