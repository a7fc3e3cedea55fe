#include "pulse/ingest/resample.hpp"

#include <cmath>
#include <stdexcept>

namespace pulse::ingest {

std::vector<double> resample_uniform(const std::vector<double>& ts, const std::vector<double>& vs, double period) {
  if (ts.size() != vs.size()) throw std::invalid_argument("resample: timestamps and values differ in length");
  if (ts.size() < 2) throw std::invalid_argument("resample: need at least two samples");
  if (!(period > 0.0)) throw std::invalid_argument("resample: period must be positive");
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] == ts[i - 1]) throw std::invalid_argument("resample: duplicate timestamp " + std::to_string(ts[i]));
    if (ts[i] < ts[i - 1]) throw std::invalid_argument("resample: timestamps not increasing");
  }
  const double t0 = ts.front();
  const auto n = static_cast<std::size_t>(std::floor((ts.back() - t0) / period + 1e-9)) + 1;
  std::vector<double> out(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * period;
    while (seg + 2 < ts.size() && ts[seg + 1] <= t) ++seg;
    const double ta = ts[seg], tb = ts[seg + 1];
    if (t == ta) {
      out[k] = vs[seg];
    } else if (t >= tb) {
      out[k] = vs[seg + 1];
    } else {
      out[k] = vs[seg] + ((vs[seg + 1] - vs[seg]) * (t - ta)) / (tb - ta);
    }
  }
  return out;
}

DerivedSpeed derive_speed(const std::vector<double>& distance, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("derive_speed: dt must be positive");
  DerivedSpeed r;
  r.speed.assign(distance.size(), 0.0);
  for (std::size_t t = 1; t < distance.size(); ++t) {
    double inc = distance[t] - distance[t - 1];
    if (inc < 0.0) {
      inc = 0.0;
      ++r.clamped;
    }
    r.speed[t] = inc / dt;
  }
  if (r.speed.size() >= 2) r.speed[0] = r.speed[1];
  return r;
}

}  // namespace pulse::ingest
