#include "ulab/averages.hpp"

#include <algorithm>
#include <cmath>

#include "ulab/errors.hpp"
#include "ulab/fft.hpp"
#include "ulab/parallel.hpp"

namespace ulab::averages {

using fixed128::u128;
using systems::CyclicShiftSystem;
using systems::HeisenbergSystem;

namespace {

struct Term {
  uint64_t m = 0;       // index the pattern is evaluated at
  complexd weight{1.0, 0.0};
};

// Grid evaluation of (1/divisor) sum_t weight_t prod_i f_i(T^{e_{t,i}} x).
GridFunction run_engine(const DynamicalSystem& system, std::span<const Observable> observables,
                        std::span<const Term> terms, std::span<const int64_t> exponents,
                        const GridSpec& grid, double divisor) {
  const size_t k = observables.size();
  const size_t nt = terms.size();
  GridFunction out;
  out.grid = grid;

  if (const auto* rot = std::get_if<RotationSystem>(&system)) {
    // Averages take 1-dimensional circle observables; product tori are
    // supported at the type level (measure preservation etc.) but not here.
    if (rot->dim() != 1 || grid.dim != 1)
      throw invalid_argument("average: rotation averages need a 1-dimensional system and grid");
    std::vector<u128> shifts(nt * k);
    for (size_t t = 0; t < nt; ++t) {
      for (size_t i = 0; i < k; ++i) {
        const int64_t e = exponents[t * k + i];
        const u128 f = rot->alpha[0].frac_bits(static_cast<uint64_t>(e < 0 ? -e : e));
        shifts[t * k + i] = e < 0 ? static_cast<u128>(0) - f : f;
      }
    }
    const uint64_t total = grid.total();
    out.values.assign(total, {0.0, 0.0});
    parallel::parallel_for(total, [&](size_t point) {
      thread_local std::vector<complexd> buf;
      buf.resize(nt);
      const u128 x = fixed128::grid_point(point, grid.points_per_dim);
      for (size_t t = 0; t < nt; ++t) {
        complexd prod = terms[t].weight;
        for (size_t i = 0; i < k && prod != complexd{0.0, 0.0}; ++i)
          prod *= observables[i].eval_circle(x + shifts[t * k + i]);
        buf[t] = prod;
      }
      out.values[point] = parallel::pairwise_sum(std::span<const complexd>(buf)) / divisor;
    });
    return out;
  }

  if (const auto* heis = std::get_if<HeisenbergSystem>(&system)) {
    std::vector<HeisenbergSystem::Point> powers(nt * k);
    for (size_t t = 0; t < nt; ++t)
      for (size_t i = 0; i < k; ++i) powers[t * k + i] = heis->power(exponents[t * k + i]);
    GridSpec g3 = grid;
    g3.dim = 3;
    out.grid = g3;
    const uint64_t per = g3.points_per_dim;
    const uint64_t total = g3.total();
    out.values.assign(total, {0.0, 0.0});
    parallel::parallel_for(total, [&](size_t point) {
      thread_local std::vector<complexd> buf;
      buf.resize(nt);
      const double inv = 1.0 / static_cast<double>(per);
      const HeisenbergSystem::Point x{
          static_cast<double>(point / (per * per)) * inv,
          static_cast<double>((point / per) % per) * inv,
          static_cast<double>(point % per) * inv,
      };
      for (size_t t = 0; t < nt; ++t) {
        complexd prod = terms[t].weight;
        for (size_t i = 0; i < k && prod != complexd{0.0, 0.0}; ++i) {
          const auto y = HeisenbergSystem::multiply(powers[t * k + i], x);
          prod *= observables[i].eval_point(y);
        }
        buf[t] = prod;
      }
      out.values[point] = parallel::pairwise_sum(std::span<const complexd>(buf)) / divisor;
    });
    return out;
  }

  const auto& cyc = std::get<CyclicShiftSystem>(system);
  GridSpec gc = grid;
  gc.dim = 1;
  gc.points_per_dim = cyc.m;
  out.grid = gc;
  out.values.assign(cyc.m, {0.0, 0.0});
  parallel::parallel_for(cyc.m, [&](size_t point) {
    thread_local std::vector<complexd> buf;
    buf.resize(nt);
    for (size_t t = 0; t < nt; ++t) {
      complexd prod = terms[t].weight;
      for (size_t i = 0; i < k && prod != complexd{0.0, 0.0}; ++i) {
        const int64_t e = exponents[t * k + i];
        const auto idx = static_cast<uint64_t>(
            ((e % cyc.m) + cyc.m + static_cast<int64_t>(point)) % cyc.m);
        prod *= observables[i].eval_residue(idx);
      }
      buf[t] = prod;
    }
    out.values[point] = parallel::pairwise_sum(std::span<const complexd>(buf)) / divisor;
  });
  return out;
}

complexd weight_value(const WeightSpec& weight, const AverageSpec& spec, uint64_t n, uint64_t m) {
  complexd v{1.0, 0.0};
  switch (weight.kind) {
    case WeightSpec::Kind::unit:
      break;
    case WeightSpec::Kind::von_mangoldt_prime:
      if (!spec.tables) throw invalid_argument("average: von Mangoldt weight needs prime tables");
      v *= primes::lambda_prime(*spec.tables, m);
      break;
    case WeightSpec::Kind::modified_mangoldt:
      if (!spec.tables || !weight.wtrick)
        throw invalid_argument("average: modified von Mangoldt weight needs tables and params");
      v *= primes::modified_mangoldt(*spec.tables, *weight.wtrick, n);
      break;
  }
  if (weight.interval) {
    if (spec.pattern.kind == sequences::PatternKind::Linear)
      throw invalid_argument("average: interval weight needs a bracket pattern");
    v *= weight.interval->contains(spec.pattern.alpha.frac_bits(m)) ? 1.0 : 0.0;
  }
  if (weight.window) {
    if (weight.window->length() < n) throw invalid_argument("average: weight window too short");
    v *= weight.window->values[n - 1];
  }
  return v;
}

std::vector<int64_t> pattern_exponents_for(const BracketPattern& pattern,
                                           std::span<const Term> terms, bool with_f0) {
  const auto k = static_cast<size_t>(pattern.k);
  const size_t cols = k + (with_f0 ? 1 : 0);
  std::vector<int64_t> exps(terms.size() * cols, 0);
  for (size_t t = 0; t < terms.size(); ++t)
    for (size_t i = 0; i < k; ++i)
      exps[t * cols + i + (with_f0 ? 1 : 0)] =
          sequences::bracket_exponent(pattern, static_cast<int>(i) + 1, terms[t].m);
  return exps;
}

std::vector<Observable> effective_observables(const AverageSpec& spec) {
  std::vector<Observable> obs;
  if (spec.f0) obs.push_back(*spec.f0);
  obs.insert(obs.end(), spec.observables.begin(), spec.observables.end());
  return obs;
}

void check_spec(const AverageSpec& spec) {
  if (!spec.system) throw invalid_argument("average: missing system");
  if (spec.N < 1) throw invalid_argument("average: N must be >= 1");
  if (spec.observables.size() != static_cast<size_t>(spec.pattern.k))
    throw invalid_argument("average: need exactly k observables");
}

}  // namespace

WeightSpec WeightSpec::von_mangoldt() {
  WeightSpec w;
  w.kind = Kind::von_mangoldt_prime;
  return w;
}

WeightSpec WeightSpec::modified(primes::WTrickParams params) {
  WeightSpec w;
  w.kind = Kind::modified_mangoldt;
  w.wtrick = params;
  return w;
}

std::string WeightSpec::label() const {
  std::string s;
  switch (kind) {
    case Kind::unit: s = "unit"; break;
    case Kind::von_mangoldt_prime: s = "von_mangoldt"; break;
    case Kind::modified_mangoldt:
      s = "modified_mangoldt_w" + std::to_string(wtrick ? wtrick->w : 0) + "_r" +
          std::to_string(wtrick ? wtrick->r : 0);
      break;
  }
  if (interval)
    s += "*cell" + std::to_string(interval->index()) + "of" + std::to_string(interval->cells());
  if (window) s += "*window";
  return s;
}

GridFunction multi_average(const AverageSpec& spec) {
  check_spec(spec);
  std::vector<Term> terms(spec.N);
  for (uint64_t n = 1; n <= spec.N; ++n) {
    const uint64_t m = spec.stride * n + spec.offset;
    terms[n - 1] = {m, weight_value(spec.weight, spec, n, m)};
  }
  const auto exps = pattern_exponents_for(spec.pattern, terms, spec.f0.has_value());
  return run_engine(*spec.system, effective_observables(spec), terms, exps, spec.grid,
                    static_cast<double>(spec.N));
}

GridFunction prime_average(const AverageSpec& spec) {
  check_spec(spec);
  if (!spec.tables) throw invalid_argument("prime_average: needs prime tables");
  if (spec.tables->limit() < spec.N)
    throw resource_error("prime_average: sieve limit " + std::to_string(spec.tables->limit()) +
                         " below N = " + std::to_string(spec.N));
  const auto ps = spec.tables->primes_up_to(spec.N);
  if (ps.empty()) throw invalid_argument("prime_average: no primes below N");
  std::vector<Term> terms(ps.size());
  for (size_t i = 0; i < ps.size(); ++i) terms[i] = {ps[i], {1.0, 0.0}};
  const auto exps = pattern_exponents_for(spec.pattern, terms, spec.f0.has_value());
  return run_engine(*spec.system, effective_observables(spec), terms, exps, spec.grid,
                    static_cast<double>(ps.size()));
}

GridFunction w_tricked_average(const AverageSpec& spec, const primes::WTrickParams& params) {
  AverageSpec s = spec;
  s.stride = params.W;
  s.offset = params.r;
  return multi_average(s);
}

double prime_vs_mangoldt_compare(
    const std::function<complexd(std::span<const uint64_t>)>& fn,
    const primes::PrimeTables& tables, uint64_t N, int k) {
  if (k < 1 || k > 2) throw invalid_argument("prime_vs_mangoldt_compare: k must be 1 or 2");
  if (tables.limit() < N) throw invalid_argument("prime_vs_mangoldt_compare: sieve too small");
  const auto ps = tables.primes_up_to(N);
  const double pi_n = static_cast<double>(ps.size());

  std::vector<double> lam(N + 1, 0.0);
  for (uint64_t n = 1; n <= N; ++n) lam[n] = primes::lambda_prime(tables, n);

  complexd prime_side{0.0, 0.0}, mangoldt_side{0.0, 0.0};
  if (k == 1) {
    std::vector<complexd> a(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
      const uint64_t arg[1] = {ps[i]};
      a[i] = fn(arg);
    }
    prime_side = parallel::pairwise_sum(std::span<const complexd>(a)) / pi_n;
    std::vector<complexd> b(N);
    for (uint64_t n = 1; n <= N; ++n) {
      const uint64_t arg[1] = {n};
      b[n - 1] = lam[n] == 0.0 ? complexd{0.0, 0.0} : lam[n] * fn(arg);
    }
    mangoldt_side = parallel::pairwise_sum(std::span<const complexd>(b)) / static_cast<double>(N);
  } else {
    std::vector<complexd> outer(ps.size());
    parallel::parallel_for(ps.size(), [&](size_t i) {
      std::vector<complexd> inner(ps.size());
      for (size_t j = 0; j < ps.size(); ++j) {
        const uint64_t arg[2] = {ps[i], ps[j]};
        inner[j] = fn(arg);
      }
      outer[i] = parallel::pairwise_sum(std::span<const complexd>(inner));
    });
    prime_side = parallel::pairwise_sum(std::span<const complexd>(outer)) / (pi_n * pi_n);
    std::vector<complexd> outer2(N);
    parallel::parallel_for(N, [&](size_t i0) {
      const uint64_t n1 = i0 + 1;
      std::vector<complexd> inner(N, complexd{0.0, 0.0});
      if (lam[n1] != 0.0) {
        for (uint64_t n2 = 1; n2 <= N; ++n2) {
          if (lam[n2] == 0.0) continue;
          const uint64_t arg[2] = {n1, n2};
          inner[n2 - 1] = lam[n1] * lam[n2] * fn(arg);
        }
      }
      outer2[i0] = parallel::pairwise_sum(std::span<const complexd>(inner));
    });
    mangoldt_side = parallel::pairwise_sum(std::span<const complexd>(outer2)) /
                    (static_cast<double>(N) * static_cast<double>(N));
  }
  return std::abs(prime_side - mangoldt_side);
}

std::vector<ProfilePoint> recurrence_sequence(const RotationSystem& system, const CircleSet& set,
                                              const BracketPattern& pattern,
                                              std::span<const uint64_t> n_list) {
  std::vector<ProfilePoint> out(n_list.size());
  parallel::parallel_for(n_list.size(), [&](size_t idx) {
    const uint64_t n = n_list[idx];
    std::vector<CircleSet> shifted;
    shifted.reserve(static_cast<size_t>(pattern.k));
    std::vector<const CircleSet*> ptrs{&set};
    for (int i = 1; i <= pattern.k; ++i)
      shifted.push_back(rotate_set(system, set, sequences::bracket_exponent(pattern, i, n)));
    for (const auto& s : shifted) ptrs.push_back(&s);
    out[idx] = {n, CircleSet::intersection_measure(ptrs), ""};
  });
  return out;
}

double recurrence_average(const RotationSystem& system, const CircleSet& set,
                          const BracketPattern& pattern, uint64_t N, const WeightSpec& weight,
                          const primes::PrimeTables* tables) {
  if (N < 1) throw invalid_argument("recurrence_average: N must be >= 1");
  AverageSpec wctx;  // carries tables/pattern for weight evaluation only
  wctx.pattern = pattern;
  wctx.tables = tables;
  std::vector<double> vals(N);
  parallel::parallel_for(N, [&](size_t idx) {
    const uint64_t n = idx + 1;
    const complexd w = weight_value(weight, wctx, n, n);
    if (w == complexd{0.0, 0.0}) {
      vals[idx] = 0.0;
      return;
    }
    std::vector<CircleSet> shifted;
    std::vector<const CircleSet*> ptrs{&set};
    for (int i = 1; i <= pattern.k; ++i)
      shifted.push_back(rotate_set(system, set, sequences::bracket_exponent(pattern, i, n)));
    for (const auto& s : shifted) ptrs.push_back(&s);
    vals[idx] = w.real() * CircleSet::intersection_measure(ptrs);
  });
  return parallel::pairwise_sum(std::span<const double>(vals)) / static_cast<double>(N);
}

std::vector<ProfilePoint> cauchy_profile(const AverageSpec& base,
                                         std::span<const uint64_t> n_list) {
  if (n_list.size() < 2 || n_list.size() > 12)
    throw invalid_argument("cauchy_profile: need 2..12 window sizes");
  for (size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw invalid_argument("cauchy_profile: sizes must increase");
  std::vector<ProfilePoint> out;
  AverageSpec spec = base;
  spec.N = n_list[0];
  GridFunction prev = multi_average(spec);
  for (size_t i = 1; i < n_list.size(); ++i) {
    spec.N = n_list[i];
    GridFunction cur = multi_average(spec);
    out.push_back({n_list[i], systems::grid_l2_distance(cur, prev), spec.weight.label()});
    prev = std::move(cur);
  }
  return out;
}

GridFunction cube_average(const CubeSpec& spec) {
  if (!spec.system) throw invalid_argument("cube_average: missing system");
  if (spec.k < 1 || spec.k > 3) throw invalid_argument("cube_average: k must lie in [1, 3]");
  const auto eps_count = (static_cast<size_t>(1) << spec.k) - 1;
  if (spec.observables.size() != eps_count)
    throw invalid_argument("cube_average: need 2^k - 1 observables");
  if (!spec.tables) throw invalid_argument("cube_average: needs prime tables");

  std::vector<uint64_t> idx;
  if (spec.shift == 0) {
    idx = spec.tables->primes_up_to(spec.N);
  } else {
    idx = primes::shifted_primes(*spec.tables, spec.shift, spec.N);
    while (!idx.empty() && idx.front() == 0) idx.erase(idx.begin());
  }
  if (idx.empty()) throw invalid_argument("cube_average: empty index set");

  const size_t base = idx.size();
  size_t tuples = 1;
  for (int i = 0; i < spec.k; ++i) tuples *= base;
  if (tuples > (1u << 24))
    throw resource_error("cube_average: " + std::to_string(tuples) + " tuples exceed the budget");

  std::vector<Term> terms(tuples);
  std::vector<int64_t> exps(tuples * eps_count);
  for (size_t t = 0; t < tuples; ++t) {
    size_t rest = t;
    uint64_t n_of[3] = {0, 0, 0};
    for (int i = spec.k - 1; i >= 0; --i) {
      n_of[i] = idx[rest % base];
      rest /= base;
    }
    terms[t] = {1, {1.0, 0.0}};
    for (size_t e = 1; e <= eps_count; ++e) {
      int64_t sum = 0;
      for (int i = 0; i < spec.k; ++i)
        if (e & (1u << i)) sum += static_cast<int64_t>(n_of[i]);
      exps[t * eps_count + (e - 1)] = sum * static_cast<int64_t>(spec.W_N);
    }
  }
  return run_engine(*spec.system, spec.observables, terms, exps, spec.grid,
                    std::pow(static_cast<double>(base), spec.k));
}

CubeBoundReport cube_bound_check(std::span<const SequenceWindow> b, const CubeSpec& spec, int j) {
  if (spec.k < 1 || spec.k > 2) throw invalid_argument("cube_bound_check: k must be 1 or 2");
  if (b.size() != static_cast<size_t>(spec.k))
    throw invalid_argument("cube_bound_check: need k weight windows");
  if (j < 1 || j > spec.k) throw invalid_argument("cube_bound_check: j out of range");
  const uint64_t N = spec.N;
  for (const auto& win : b)
    if (win.length() < N) throw invalid_argument("cube_bound_check: window shorter than N");
  const auto* rot = std::get_if<RotationSystem>(spec.system);
  if (!rot || rot->dim() != 1)
    throw invalid_argument("cube_bound_check: 1-dimensional rotation systems only");
  const auto eps_count = (static_cast<size_t>(1) << spec.k) - 1;
  if (spec.observables.size() != eps_count)
    throw invalid_argument("cube_bound_check: need 2^k - 1 observables");

  GridFunction avg;
  avg.grid = spec.grid;
  const uint64_t total = spec.grid.total();
  avg.values.assign(total, {0.0, 0.0});
  const auto& alpha = rot->alpha[0];

  if (spec.k == 1) {
    parallel::parallel_for(total, [&](size_t point) {
      const u128 x = fixed128::grid_point(point, spec.grid.points_per_dim);
      std::vector<complexd> buf(N);
      for (uint64_t n = 1; n <= N; ++n)
        buf[n - 1] = b[0].values[n - 1] * spec.observables[0].eval_circle(x + alpha.frac_bits(n));
      avg.values[point] =
          parallel::pairwise_sum(std::span<const complexd>(buf)) / static_cast<double>(N);
    });
  } else {
    // sum_{n1,n2} b1(n1) b2(n2) f10(x+n1 a) f01(x+n2 a) f11(x+(n1+n2) a)
    // via one linear convolution per grid point.
    size_t P = 1;
    while (P < 2 * N + 2) P <<= 1;
    parallel::parallel_for(total, [&](size_t point) {
      const u128 x = fixed128::grid_point(point, spec.grid.points_per_dim);
      std::vector<complexd> u(P, {0.0, 0.0}), v(P, {0.0, 0.0});
      for (uint64_t n = 1; n <= N; ++n) {
        const u128 sx = x + alpha.frac_bits(n);
        u[n] = b[0].values[n - 1] * spec.observables[0].eval_circle(sx);  // eps = 01 -> f for n1
        v[n] = b[1].values[n - 1] * spec.observables[1].eval_circle(sx);  // eps = 10 -> f for n2
      }
      fft::transform(u, false);
      fft::transform(v, false);
      for (size_t i = 0; i < P; ++i) u[i] *= v[i];
      fft::transform(u, true);
      std::vector<complexd> buf(2 * N - 1);
      for (uint64_t m = 2; m <= 2 * N; ++m)
        buf[m - 2] = u[m] * spec.observables[2].eval_circle(x + alpha.frac_bits(m));
      avg.values[point] = parallel::pairwise_sum(std::span<const complexd>(buf)) /
                          (static_cast<double>(N) * static_cast<double>(N));
    });
  }

  SequenceWindow bj;
  bj.values.assign(b[static_cast<size_t>(j - 1)].values.begin(),
                   b[static_cast<size_t>(j - 1)].values.begin() + static_cast<long>(N));
  const auto u2 = gowers::gowers_u2_spectral(gowers::embed_window(bj, 2));

  CubeBoundReport rep;
  rep.N = N;
  rep.lhs = systems::grid_l2_norm(avg);
  rep.rhs = u2.value;
  rep.ratio = rep.lhs / (rep.rhs + 1e-6);
  return rep;
}

GridFunction nilweighted_average(const DynamicalSystem& system,
                                 std::span<const Observable> observables,
                                 const SequenceWindow& weight, uint64_t N, bool prime_indexed,
                                 const GridSpec& grid, const primes::PrimeTables* tables) {
  if (N < 1) throw invalid_argument("nilweighted_average: N must be >= 1");
  if (weight.length() < N) throw invalid_argument("nilweighted_average: weight window too short");
  const int k = static_cast<int>(observables.size());
  if (k < 1) throw invalid_argument("nilweighted_average: need observables");
  const auto pattern = BracketPattern::linear(k);

  std::vector<Term> terms;
  double divisor;
  if (prime_indexed) {
    if (!tables) throw invalid_argument("nilweighted_average: prime indexing needs tables");
    const auto ps = tables->primes_up_to(N);
    if (ps.empty()) throw invalid_argument("nilweighted_average: no primes below N");
    terms.resize(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) terms[i] = {ps[i], weight.values[ps[i] - 1]};
    divisor = static_cast<double>(ps.size());
  } else {
    terms.resize(N);
    for (uint64_t n = 1; n <= N; ++n) terms[n - 1] = {n, weight.values[n - 1]};
    divisor = static_cast<double>(N);
  }
  std::vector<Observable> obs(observables.begin(), observables.end());
  const auto exps = pattern_exponents_for(pattern, terms, false);
  return run_engine(system, obs, terms, exps, grid, divisor);
}

VdcReport vdc_check(std::span<const std::vector<complexd>> vectors, double constant) {
  const size_t N = vectors.size();
  if (N < 2) throw invalid_argument("vdc_check: need N >= 2 vectors");
  const size_t dim = vectors[0].size();
  if (dim < 1 || dim > 64) throw invalid_argument("vdc_check: dimension must lie in [1, 64]");
  for (const auto& v : vectors)
    if (v.size() != dim) throw invalid_argument("vdc_check: ragged vector list");

  VdcReport rep;
  rep.constant = constant;

  // LHS: || (1/N) sum v(n) ||^2, componentwise pairwise means.
  double lhs = 0.0;
  std::vector<complexd> comp(N);
  for (size_t c = 0; c < dim; ++c) {
    for (size_t n = 0; n < N; ++n) comp[n] = vectors[n][c];
    lhs += std::norm(parallel::pairwise_mean(std::span<const complexd>(comp)));
  }
  rep.lhs = lhs;

  // RHS: (1/N^2) sum ||v||^2 + (1/N) sum_h | (1/N) sum_{n<=N-h} <v(n+h), v(n)> |.
  std::vector<double> norms(N);
  for (size_t n = 0; n < N; ++n) {
    double s = 0.0;
    for (size_t c = 0; c < dim; ++c) s += std::norm(vectors[n][c]);
    norms[n] = s;
  }
  const double first = parallel::pairwise_sum(std::span<const double>(norms)) /
                       (static_cast<double>(N) * static_cast<double>(N));
  std::vector<double> per_h(N, 0.0);
  parallel::parallel_for(N, [&](size_t hm1) {
    const size_t h = hm1 + 1;
    if (h >= N) {
      per_h[hm1] = 0.0;
      return;
    }
    std::vector<complexd> inner(N - h);
    for (size_t n = 0; n + h < N; ++n) {
      complexd ip{0.0, 0.0};
      for (size_t c = 0; c < dim; ++c) ip += vectors[n + h][c] * std::conj(vectors[n][c]);
      inner[n] = ip;
    }
    per_h[hm1] =
        std::abs(parallel::pairwise_sum(std::span<const complexd>(inner))) / static_cast<double>(N);
  });
  const double second =
      parallel::pairwise_sum(std::span<const double>(per_h)) / static_cast<double>(N);
  rep.rhs = first + second;
  rep.pass = rep.lhs <= constant * rep.rhs;
  return rep;
}

}  // namespace ulab::averages
