#include "ulab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ulab/errors.hpp"
#include "ulab/parallel.hpp"

namespace ulab::systems {

namespace {

constexpr u128 kTopLen = static_cast<u128>(0) - 1;  // full-circle cap (1 ulp short)

// Wraps to 0 exactly when the arc ends at the top of the circle.
u128 arc_end(const CircleSet::Arc& a) { return a.lo + a.len; }

}  // namespace

void CircleSet::normalize(std::vector<Arc> raw) {
  std::vector<Arc> split;
  for (const Arc& a : raw) {
    if (a.len == 0) continue;
    if (a.lo == 0) {
      split.push_back(a);
      continue;
    }
    const u128 room = static_cast<u128>(0) - a.lo;  // distance from lo to the top
    if (a.len > room) {
      split.push_back({a.lo, room});
      split.push_back({0, a.len - room});
    } else {
      split.push_back(a);
    }
  }
  std::sort(split.begin(), split.end(), [](const Arc& x, const Arc& y) { return x.lo < y.lo; });
  arcs_.clear();
  for (const Arc& a : split) {
    if (!arcs_.empty()) {
      Arc& prev = arcs_.back();
      const u128 prev_end = arc_end(prev);  // wraps to 0 iff prev ends at the top
      if (prev_end == 0) continue;          // prev covers through the top already
      if (a.lo <= prev_end) {               // overlap or adjacency: extend prev
        const u128 a_end = arc_end(a);
        if (a_end == 0) {
          prev.len = prev.lo == 0 ? kTopLen : static_cast<u128>(0) - prev.lo;
        } else if (a_end > prev_end) {
          prev.len = a_end - prev.lo;
        }
        continue;
      }
    }
    arcs_.push_back(a);
  }
}

CircleSet CircleSet::from_arcs(std::span<const std::pair<double, double>> arcs) {
  std::vector<Arc> raw;
  for (const auto& [lo, hi] : arcs) {
    const double len = hi - lo;
    if (!(len > 0.0) || len > 1.0)
      throw invalid_argument("CircleSet: arc length must lie in (0, 1]");
    const double lo_mod = lo - std::floor(lo);
    const u128 lo_bits = lo_mod >= 1.0 ? 0 : fixed128::from_double(lo_mod);
    const u128 len_bits = len >= 1.0 ? kTopLen : fixed128::from_double(len);
    raw.push_back({lo_bits, len_bits});
  }
  CircleSet s;
  s.normalize(std::move(raw));
  return s;
}

CircleSet CircleSet::interval(double lo, double hi) {
  const std::pair<double, double> one[] = {{lo, hi}};
  return from_arcs(one);
}

CircleSet CircleSet::full_circle() {
  CircleSet s;
  s.arcs_.push_back({0, kTopLen});
  return s;
}

u128 CircleSet::measure_bits() const {
  u128 total = 0;
  for (const Arc& a : arcs_) total += a.len;
  return total;
}

bool CircleSet::contains(u128 x) const {
  auto it = std::upper_bound(arcs_.begin(), arcs_.end(), x,
                             [](u128 v, const Arc& a) { return v < a.lo; });
  if (it == arcs_.begin()) return false;
  --it;
  return x - it->lo < it->len;
}

CircleSet CircleSet::translated(u128 delta) const {
  std::vector<Arc> raw = arcs_;
  for (Arc& a : raw) a.lo += delta;  // unsigned wrap is the mod-1 reduction
  CircleSet s;
  s.normalize(std::move(raw));
  return s;
}

u128 CircleSet::intersection_measure_bits(std::span<const CircleSet* const> sets) {
  if (sets.empty()) throw invalid_argument("intersection_measure: need at least one set");
  if (sets.size() > 16) throw invalid_argument("intersection_measure: at most 16 sets");
  size_t total_arcs = 0;
  for (const CircleSet* s : sets) {
    if (s->empty()) return 0;
    if (s->arc_count() > 10000) throw invalid_argument("intersection_measure: too many arcs");
    total_arcs += s->arc_count();
  }
  // Sweep: +1 where an arc opens, -1 where it closes; the final segment runs
  // to the top of the circle, where arcs ending there simply never close.
  std::vector<std::pair<u128, int>> events;
  events.reserve(2 * total_arcs);
  for (const CircleSet* s : sets) {
    for (const Arc& a : s->arcs()) {
      events.emplace_back(a.lo, +1);
      const u128 end = arc_end(a);
      if (end != 0) events.emplace_back(end, -1);
    }
  }
  std::sort(events.begin(), events.end(),
            [](const auto& x, const auto& y) { return x.first != y.first ? x.first < y.first : x.second < y.second; });
  const int want = static_cast<int>(sets.size());
  u128 measure = 0;
  u128 prev = 0;
  int cov = 0;
  for (const auto& [pt, delta] : events) {
    if (pt > prev && cov == want) measure += pt - prev;
    if (pt > prev) prev = pt;
    cov += delta;
  }
  if (cov == want) measure += static_cast<u128>(0) - prev;  // [prev, top)
  return measure;
}

double CircleSet::intersection_measure(std::span<const CircleSet* const> sets) {
  return fixed128::to_double(intersection_measure_bits(sets));
}

std::vector<std::pair<double, double>> CircleSet::arcs_double() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(arcs_.size());
  for (const Arc& a : arcs_) {
    const u128 end = arc_end(a);
    out.emplace_back(fixed128::to_double(a.lo), end == 0 ? 1.0 : fixed128::to_double(end));
  }
  return out;
}

RotationSystem RotationSystem::circle(sequences::Irrational a) {
  RotationSystem s;
  s.alpha.push_back(std::move(a));
  return s;
}

CircleSet rotate_set(const RotationSystem& system, const CircleSet& set, int64_t steps) {
  if (system.dim() != 1) throw invalid_argument("rotate_set: 1-dimensional rotations only");
  if (steps == 0) return set;
  const u128 frac = system.alpha[0].frac_bits(static_cast<uint64_t>(steps < 0 ? -steps : steps));
  const u128 delta = steps > 0 ? static_cast<u128>(0) - frac : frac;
  return set.translated(delta);
}

HeisenbergSystem::Point HeisenbergSystem::reduce(const Point& p) {
  const long double x = p[0], y = p[1], z = p[2];
  const long double px = -std::floor(x);
  const long double z1 = z + px * y;
  Point out;
  out[0] = static_cast<double>(x - std::floor(x));
  out[1] = static_cast<double>(y - std::floor(y));
  out[2] = static_cast<double>(z1 - std::floor(z1));
  for (double& c : out)
    if (c >= 1.0) c = 0.0;  // guard the open end after rounding
  return out;
}

HeisenbergSystem::Point HeisenbergSystem::compose(const Point& a, const Point& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1]};
}

HeisenbergSystem::Point HeisenbergSystem::multiply(const Point& a, const Point& b) {
  return reduce(compose(a, b));
}

HeisenbergSystem::Point HeisenbergSystem::power(int64_t e) const {
  if (e > 1000000000 || e < -1000000000)
    throw invalid_argument("HeisenbergSystem::power: |e| must be <= 1e9");
  const long double ed = static_cast<long double>(e);
  const long double half = ed * (ed - 1.0L) / 2.0L;
  const long double ab = static_cast<long double>(g[0]) * static_cast<long double>(g[1]);
  const long double guard = 9007199254740992.0L;  // 2^53
  if (std::abs(ed * g[0]) > guard || std::abs(ed * g[1]) > guard ||
      std::abs(ed * g[2]) > guard || std::abs(half * ab) > guard)
    throw precision_error("HeisenbergSystem::power: e(e-1)/2 term exceeds working precision");
  Point p;
  p[0] = static_cast<double>(ed * g[0]);
  p[1] = static_cast<double>(ed * g[1]);
  p[2] = static_cast<double>(ed * g[2] + half * ab);
  return p;  // not reduced; callers reduce after composing
}

std::vector<HeisenbergSystem::Point> heisenberg_orbit(const HeisenbergSystem& system,
                                                      const HeisenbergSystem::Point& x0,
                                                      std::span<const int64_t> exponents) {
  std::vector<HeisenbergSystem::Point> out;
  out.reserve(exponents.size());
  for (int64_t e : exponents) {
    const auto ge = system.power(e);
    out.push_back(HeisenbergSystem::multiply(ge, x0));
  }
  return out;
}

Observable::Observable(Payload payload) : payload_(std::move(payload)) {
  sup_ = std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ArcIndicator>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, TrigPolynomial>) {
          double s = 0.0;
          for (const auto& [f, c] : v.terms) s += std::abs(c);
          return s;
        } else if constexpr (std::is_same_v<T, HeisenbergBump>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, CyclicVector>) {
          double s = 0.0;
          for (const auto& c : v.values) s = std::max(s, std::abs(c));
          return s;
        } else {
          double s = 0.0;
          for (double x : v.samples) s = std::max(s, std::abs(x));
          return s;
        }
      },
      payload_);
}

complexd Observable::eval_circle(u128 x) const {
  if (const auto* ind = std::get_if<ArcIndicator>(&payload_))
    return ind->set.contains(x) ? complexd{1.0, 0.0} : complexd{0.0, 0.0};
  if (const auto* trig = std::get_if<TrigPolynomial>(&payload_)) {
    const double xd = fixed128::to_double(x);
    complexd acc{0.0, 0.0};
    for (const auto& [f, c] : trig->terms) {
      const double ang = 2.0 * M_PI * f * xd;
      acc += c * complexd{std::cos(ang), std::sin(ang)};
    }
    return acc;
  }
  if (const auto* lip = std::get_if<LipschitzGrid>(&payload_)) {
    const uint64_t g = lip->samples.size();
    const auto idx = static_cast<size_t>(fixed128::mul(x, g).floor_part);
    return {lip->samples[idx % g], 0.0};
  }
  throw invalid_argument("Observable: not a circle observable");
}

complexd Observable::eval_point(const std::array<double, 3>& p) const {
  if (const auto* bump = std::get_if<HeisenbergBump>(&payload_)) {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      double d = std::abs(p[i] - bump->center[i]);
      d = std::min(d, 1.0 - d);
      d2 += d * d;
    }
    return {std::max(0.0, 1.0 - 4.0 * std::sqrt(d2)), 0.0};
  }
  throw invalid_argument("Observable: not a nilmanifold observable");
}

complexd Observable::eval_residue(uint64_t idx) const {
  if (const auto* cv = std::get_if<CyclicVector>(&payload_)) return cv->values[idx % cv->values.size()];
  throw invalid_argument("Observable: not a cyclic observable");
}

Observable Observable::indicator(CircleSet set) { return Observable(ArcIndicator{std::move(set)}); }

Observable Observable::character(int32_t freq) {
  return Observable(TrigPolynomial{{{freq, complexd{1.0, 0.0}}}});
}

Observable Observable::trig(std::vector<std::pair<int32_t, complexd>> terms) {
  return Observable(TrigPolynomial{std::move(terms)});
}

double grid_l2_distance(const GridFunction& f, const GridFunction& g) {
  if (f.grid.dim != g.grid.dim || f.grid.points_per_dim != g.grid.points_per_dim ||
      f.values.size() != g.values.size())
    throw invalid_argument("grid_l2_distance: grid mismatch");
  std::vector<double> sq(f.values.size());
  for (size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(f.values[i] - g.values[i]);
  return std::sqrt(parallel::pairwise_sum(std::span<const double>(sq)) /
                   static_cast<double>(sq.size()));
}

double grid_l2_norm(const GridFunction& f) {
  std::vector<double> sq(f.values.size());
  for (size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(f.values[i]);
  return std::sqrt(parallel::pairwise_sum(std::span<const double>(sq)) /
                   static_cast<double>(sq.size()));
}

double grid_sup_norm(const GridFunction& f) {
  double s = 0.0;
  for (const auto& v : f.values) s = std::max(s, std::abs(v));
  return s;
}

SequenceWindow nilsequence_sample(const NilsequenceSpec& spec, uint64_t length) {
  SequenceWindow win;
  win.values.resize(length);
  if (spec.kind == NilsequenceKind::HeisenbergLipschitz) {
    const Observable bump((HeisenbergBump()));
    // F(g^n x0) with the closed-form power; incremental stepping through
    // reduced representatives would drift off the left-coset orbit.
    for (uint64_t n = 1; n <= length; ++n) {
      const auto x = HeisenbergSystem::multiply(spec.system.power(static_cast<int64_t>(n)), spec.x0);
      win.values[n - 1] = bump.eval_point(x);
    }
    return win;
  }
  if (spec.coeffs.size() > 4)
    throw invalid_argument("nilsequence_sample: polynomial phase degree must be <= 3");
  for (uint64_t n = 1; n <= length; ++n) {
    long double phase = 0.0L;
    for (size_t j = spec.coeffs.size(); j-- > 0;)
      phase = phase * static_cast<long double>(n) + static_cast<long double>(spec.coeffs[j]);
    phase -= std::floor(phase);
    const double ang = 2.0 * M_PI * static_cast<double>(phase);
    win.values[n - 1] = {std::cos(ang), std::sin(ang)};
  }
  return win;
}

SequenceWindow rotation_indicator_window(const sequences::Irrational& alpha, const CircleSet& set,
                                         u128 x0, uint64_t stride, uint64_t length) {
  if (stride == 0) throw invalid_argument("rotation_indicator_window: stride must be >= 1");
  SequenceWindow win;
  win.values.resize(length);
  for (uint64_t n = 1; n <= length; ++n) {
    const u128 x = x0 + alpha.frac_bits(stride * n);
    win.values[n - 1] = set.contains(x) ? complexd{1.0, 0.0} : complexd{0.0, 0.0};
  }
  return win;
}

void save_grid(const GridFunction& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("save_grid: cannot open " + path);
  const char magic[] = "ULAB-GRID-1";
  out.write(magic, sizeof(magic) - 1);
  const auto dim = static_cast<uint32_t>(f.grid.dim);
  const auto per = static_cast<uint64_t>(f.grid.points_per_dim);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(&per), 8);
  for (const auto& v : f.values) {
    const double re = v.real(), im = v.imag();
    out.write(reinterpret_cast<const char*>(&re), 8);
    out.write(reinterpret_cast<const char*>(&im), 8);
  }
  if (!out) throw io_error("save_grid: write failed for " + path);
}

}  // namespace ulab::systems
