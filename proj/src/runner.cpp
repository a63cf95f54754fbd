#include "ulab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ulab/averages.hpp"
#include "ulab/errors.hpp"
#include "ulab/gowers.hpp"
#include "ulab/parallel.hpp"
#include "ulab/patterns.hpp"
#include "ulab/primes.hpp"
#include "ulab/report.hpp"
#include "ulab/sequences.hpp"
#include "ulab/systems.hpp"

namespace ulab::runner {

using config::ExperimentConfig;
using gowers::SequenceWindow;
using sequences::BracketPattern;
using sequences::Irrational;
using sequences::PatternKind;
using systems::CircleSet;
using systems::GridSpec;
using systems::Observable;

namespace {

struct Stage {
  std::string name;
  double wall_ms = 0.0;
};

struct RunContext {
  const ExperimentConfig* cfg = nullptr;
  RunResult* result = nullptr;
  std::vector<Stage> stages;
  uint64_t sieve_limit_used = 0;

  std::string out_path(const std::string& name) const {
    return cfg->out_dir + "/" + name;
  }
  void emit(const report::Csv& csv, const std::string& name) {
    const std::string path = out_path(name);
    csv.write(path);
    result->outputs.push_back(path);
  }
  void emit_text(const std::string& text, const std::string& name) {
    const std::string path = out_path(name);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path);
    f << text;
    if (!f) throw io_error("write failed for " + path);
    result->outputs.push_back(path);
  }
};

class StageTimer {
 public:
  StageTimer(RunContext& ctx, std::string name)
      : ctx_(ctx), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto t1 = std::chrono::steady_clock::now();
    ctx_.stages.push_back({name_, std::chrono::duration<double, std::milli>(t1 - t0_).count()});
  }

 private:
  RunContext& ctx_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
};

uint64_t primorial_below(uint32_t w) {
  uint64_t W = 1;
  for (uint32_t q = 2; q < w; ++q) {
    bool prime = q >= 2;
    for (uint32_t d = 2; d * d <= q; ++d)
      if (q % d == 0) prime = false;
    if (prime) W *= q;
  }
  return W;
}

primes::PrimeTables acquire_tables(uint64_t needed, RunContext& ctx) {
  StageTimer timer(ctx, "sieve");
  ctx.sieve_limit_used = std::max<uint64_t>(needed, 2);
  if (const char* cache = std::getenv("ULAB_SIEVE_CACHE")) {
    if (auto loaded = primes::load_cache(cache); loaded && loaded->limit() >= needed) {
      ctx.sieve_limit_used = loaded->limit();
      return std::move(*loaded);
    }
    auto built = primes::build_tables(std::max<uint64_t>(needed, 2));
    try {
      primes::save_cache(built, cache);
    } catch (const io_error&) {
      // cache is best-effort; the run proceeds with the in-memory tables
    }
    return built;
  }
  return primes::build_tables(std::max<uint64_t>(needed, 2));
}

// ---- shared parsing helpers -------------------------------------------------

const std::vector<std::string>& alpha_labels() {
  static const std::vector<std::string> labels = {"sqrt2", "sqrt3", "sqrt5",
                                                  "sqrt7", "golden", "inv2sqrt2"};
  return labels;
}

bool known_alpha(const std::string& label) {
  const auto& ls = alpha_labels();
  return std::find(ls.begin(), ls.end(), label) != ls.end();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Observable specs: "arc:lo,hi[;lo,hi...]" | "char:freq" | "bump".
Observable parse_observable(const std::string& spec) {
  if (spec == "bump") return Observable(systems::HeisenbergBump{});
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "arc") {
    std::vector<std::pair<double, double>> arcs;
    for (const auto& part : split(rest, ';')) {
      const auto nums = split(part, ',');
      if (nums.size() != 2) throw invalid_argument("observable arc needs lo,hi: " + spec);
      arcs.emplace_back(std::stod(nums[0]), std::stod(nums[1]));
    }
    if (arcs.empty()) throw invalid_argument("observable arc needs at least one arc");
    return Observable::indicator(CircleSet::from_arcs(arcs));
  }
  if (kind == "char") {
    if (rest.empty()) throw invalid_argument("observable char needs a frequency");
    return Observable::character(static_cast<int32_t>(std::stol(rest)));
  }
  throw invalid_argument("unknown observable spec: " + spec);
}

std::vector<Observable> parse_observables(const std::string& specs, size_t expected) {
  std::vector<Observable> out;
  for (const auto& s : split(specs, '|')) out.push_back(parse_observable(s));
  if (out.size() == 1 && expected > 1)
    while (out.size() < expected) out.push_back(out.front());
  if (out.size() != expected)
    throw invalid_argument("expected " + std::to_string(expected) + " observables, got " +
                           std::to_string(out.size()));
  return out;
}

CircleSet parse_arcs(const std::string& spec) {
  std::vector<std::pair<double, double>> arcs;
  for (const auto& part : split(spec, ';')) {
    const auto nums = split(part, ',');
    if (nums.size() != 2) throw invalid_argument("arc list needs lo,hi pairs: " + spec);
    arcs.emplace_back(std::stod(nums[0]), std::stod(nums[1]));
  }
  if (arcs.empty()) throw invalid_argument("empty arc list");
  return CircleSet::from_arcs(arcs);
}

PatternKind parse_kind(const std::string& s) {
  if (s == "scaled_floor") return PatternKind::ScaledFloor;
  if (s == "floor_scaled") return PatternKind::FloorScaled;
  if (s == "linear") return PatternKind::Linear;
  throw invalid_argument("unknown pattern kind: " + s);
}

BracketPattern parse_pattern(const ExperimentConfig& cfg) {
  const auto kind = parse_kind(cfg.get("pattern_kind", "floor_scaled"));
  const int k = static_cast<int>(cfg.get_int("k", 1));
  if (kind == PatternKind::Linear) return BracketPattern::linear(k);
  return BracketPattern::make(kind, k, Irrational::named(cfg.get("pattern_alpha", "sqrt2")));
}

averages::WeightSpec parse_weight(const ExperimentConfig& cfg, const primes::PrimeTables* tables,
                                  const BracketPattern& pattern) {
  const std::string kind = cfg.get("weight", "unit");
  averages::WeightSpec w;
  if (kind == "unit") {
    w = averages::WeightSpec::unit();
  } else if (kind == "vonmangoldt") {
    w = averages::WeightSpec::von_mangoldt();
  } else if (kind == "modified") {
    if (!tables) throw invalid_argument("modified weight needs prime tables");
    w = averages::WeightSpec::modified(primes::WTrickParams::make(
        static_cast<uint32_t>(cfg.get_int("weight_w", 3)),
        static_cast<uint64_t>(cfg.get_int("weight_r", 1)), *tables));
  } else {
    throw invalid_argument("unknown weight kind: " + kind);
  }
  const int64_t cell = cfg.get_int("weight_cell", 0);
  if (cell > 0)
    w.interval = sequences::IntervalWeight::cell(pattern.k, static_cast<uint64_t>(cell));
  return w;
}

SequenceWindow make_scan_weight(const ExperimentConfig& cfg, uint64_t length, std::string* label) {
  const std::string kind = cfg.get("scan_weight", "ones");
  *label = kind;
  if (kind == "ones") {
    SequenceWindow w;
    w.values.assign(length, {1.0, 0.0});
    return w;
  }
  if (kind == "polyphase") {
    systems::NilsequenceSpec spec;
    spec.kind = systems::NilsequenceKind::PolynomialPhase;
    spec.coeffs = cfg.get_double_list("coeffs");
    if (spec.coeffs.empty()) spec.coeffs = {0.0};
    return systems::nilsequence_sample(spec, length);
  }
  if (kind == "heisenberg") {
    systems::NilsequenceSpec spec;
    spec.kind = systems::NilsequenceKind::HeisenbergLipschitz;
    return systems::nilsequence_sample(spec, length);
  }
  if (kind == "arc") {
    const auto alpha = Irrational::named(cfg.get("scan_alpha", "sqrt2"));
    const auto set = parse_arcs(cfg.get("scan_arc", "0,0.5"));
    const auto stride = static_cast<uint64_t>(cfg.get_int("scan_stride", 1));
    return systems::rotation_indicator_window(alpha, set, 0, stride, length);
  }
  throw invalid_argument("unknown scan weight kind: " + kind);
}

// ---- validation -------------------------------------------------------------

void require(Validation& v, bool ok, const std::string& message) {
  if (!ok) v.errors.push_back(message);
}

void validate_weight(Validation& v, const ExperimentConfig& cfg, int k) {
  const std::string kind = cfg.get("weight", "unit");
  if (kind != "unit" && kind != "vonmangoldt" && kind != "modified")
    v.errors.push_back("weight must be unit|vonmangoldt|modified, got " + kind);
  if (kind == "modified") {
    const int64_t w = cfg.get_int("weight_w", 3);
    const int64_t r = cfg.get_int("weight_r", 1);
    require(v, w > 2, "weight_w must exceed 2 (W is a product of primes below w)");
    if (w > 2) {
      const uint64_t W = primorial_below(static_cast<uint32_t>(w));
      require(v, r >= 1 && static_cast<uint64_t>(r) <= W,
              "weight_r must lie in [1, W] with W = " + std::to_string(W));
      if (r >= 1 && static_cast<uint64_t>(r) <= W)
        require(v, std::gcd(static_cast<uint64_t>(r), W) == 1,
                "weight_r must be coprime to W = " + std::to_string(W));
      // A composite w produces the same W as the next prime down; accept it.
      bool w_prime = true;
      for (int64_t d = 2; d * d <= w; ++d)
        if (w % d == 0) w_prime = false;
      if (!w_prime)
        v.notes.push_back("w=" + std::to_string(w) + " normalizes to W=" + std::to_string(W) +
                          ", the same primorial as the nearest admissible w");
    }
  }
  const int64_t cell = cfg.get_int("weight_cell", 0);
  if (cell != 0) {
    const uint64_t cells = sequences::factorial(static_cast<unsigned>(k) + 1);
    require(v, cell >= 1 && static_cast<uint64_t>(cell) <= cells,
            "weight_cell must lie in [1, (k+1)!] = [1, " + std::to_string(cells) +
                "]; the support may not contain an internal partition point");
    require(v, cfg.get("pattern_kind", "floor_scaled") != "linear",
            "interval weights need a bracket pattern, not linear");
  }
}

void validate_observables(Validation& v, const ExperimentConfig& cfg, const std::string& key,
                          size_t expected) {
  if (!cfg.has(key)) {
    v.errors.push_back("missing " + key);
    return;
  }
  try {
    parse_observables(cfg.get(key), expected);
  } catch (const std::exception& e) {
    v.errors.push_back(e.what());
  }
}

void validate_alpha_key(Validation& v, const ExperimentConfig& cfg, const std::string& key,
                        const std::string& fallback) {
  const std::string label = cfg.get(key, fallback);
  require(v, known_alpha(label),
          key + " must be one of sqrt2|sqrt3|sqrt5|sqrt7|golden|inv2sqrt2, got " + label);
}

Validation validate_impl(const ExperimentConfig& cfg) {
  Validation v;
  const std::string& cmd = cfg.subcommand;
  const auto& known = config::known_subcommands();
  if (std::find(known.begin(), known.end(), cmd) == known.end()) {
    v.errors.push_back("unknown subcommand: " + cmd);
    return v;
  }

  if (cmd == "gowers") {
    const int64_t d = cfg.get_int("d", 2);
    const int64_t M = cfg.get_int("M", 64);
    require(v, d >= 1 && d <= 5, "d must lie in [1, 5]");
    require(v, M >= 1, "M must be >= 1");
    const std::string input = cfg.get("input", "ones");
    require(v, input == "ones" || input == "random" || input == "polyphase",
            "input must be ones|random|polyphase");
    for (const auto& ev : split(cfg.get("evaluators", "inductive"), ',')) {
      if (ev == "inductive") {
        require(v, std::pow(static_cast<double>(M), static_cast<double>(d)) <= 1e11,
                "inductive evaluator would exceed the work budget");
      } else if (ev == "box") {
        require(v, d <= 3 && M <= 256, "box evaluator is oracle-scale: d <= 3 and M <= 256");
      } else if (ev == "spectral") {
        require(v, d == 2, "spectral evaluator computes U^2 only");
      } else {
        v.errors.push_back("unknown evaluator: " + ev);
      }
    }
  } else if (cmd == "mangoldt-scan") {
    const auto w_list = cfg.get_int_list("w_list");
    const auto N_list = cfg.get_int_list("N_list");
    require(v, !w_list.empty(), "w_list must not be empty");
    require(v, !N_list.empty(), "N_list must not be empty");
    for (uint64_t w : w_list) require(v, w > 2, "every w must exceed 2");
    const int64_t d = cfg.get_int("d", 2);
    require(v, d >= 1 && d <= 3, "d must lie in [1, 3]");
    const int64_t padding = cfg.get_int("padding", 0);
    require(v, padding == 0 || padding >= 2, "padding must be 0 (use d) or >= 2");
    uint64_t worst = 0;
    for (uint64_t w : w_list)
      for (uint64_t N : N_list)
        worst = std::max(worst, primorial_below(static_cast<uint32_t>(w)) * (N + 1));
    if (worst > (1ull << 31))
      v.errors.push_back("sieve limit " + std::to_string(worst) + " exceeds the 2^31 cap");
    if (d != 2) {
      const int64_t pad = padding == 0 ? d : padding;
      for (uint64_t N : N_list)
        require(v,
                std::pow(static_cast<double>(N) * static_cast<double>(pad),
                         static_cast<double>(d)) <= 1e11,
                "U^" + std::to_string(d) + " at N=" + std::to_string(N) +
                    " would exceed the work budget");
    }
    const std::string wk = cfg.get("scan_weight", "ones");
    require(v, wk == "ones" || wk == "polyphase" || wk == "heisenberg" || wk == "arc",
            "scan_weight must be ones|polyphase|heisenberg|arc");
    if (wk == "arc") validate_alpha_key(v, cfg, "scan_alpha", "sqrt2");
  } else if (cmd == "average") {
    const int64_t k = cfg.get_int("k", 1);
    require(v, k >= 1 && k <= 6, "k must lie in [1, 6]");
    const std::string kind = cfg.get("pattern_kind", "floor_scaled");
    if (kind != "linear") validate_alpha_key(v, cfg, "pattern_alpha", "sqrt2");
    const std::string system = cfg.get("system", "rotation");
    require(v, system == "rotation" || system == "heisenberg" || system == "cyclic",
            "system must be rotation|heisenberg|cyclic");
    if (system == "rotation") validate_alpha_key(v, cfg, "alpha", "golden");
    validate_observables(v, cfg, "observables", static_cast<size_t>(std::max<int64_t>(k, 1)));
    validate_weight(v, cfg, static_cast<int>(k));
    auto N_list = cfg.get_int_list("N_list");
    if (N_list.empty() && cfg.has("N")) N_list.push_back(static_cast<uint64_t>(cfg.get_int("N", 0)));
    require(v, !N_list.empty(), "need N or N_list");
    for (uint64_t N : N_list) require(v, N >= 1, "window sizes must be >= 1");
    require(v, N_list.size() <= 12, "at most 12 window sizes");
    for (size_t i = 1; i < N_list.size(); ++i)
      require(v, N_list[i] > N_list[i - 1], "N_list must increase");
    const int64_t grid = cfg.get_int("grid", 4096);
    require(v, grid >= 2 && grid <= (1 << 20), "grid must lie in [2, 2^20]");
    const std::string indexing = cfg.get("indexing", "integers");
    require(v, indexing == "integers" || indexing == "primes", "indexing must be integers|primes");
    if (cfg.get("weight", "unit") == "vonmangoldt" || indexing == "primes" ||
        cfg.get("weight", "unit") == "modified") {
      // sieve requirements are derived at run time; here just bound them
      uint64_t maxN = 0;
      for (uint64_t N : N_list) maxN = std::max(maxN, N);
      const uint64_t stride = static_cast<uint64_t>(cfg.get_int("stride", 1));
      const uint64_t W = cfg.get("weight", "unit") == "modified"
                             ? primorial_below(static_cast<uint32_t>(cfg.get_int("weight_w", 3)))
                             : 1;
      const uint64_t need = std::max(stride * maxN + stride, W * maxN + W);
      if (need > (1ull << 31))
        v.errors.push_back("required sieve limit " + std::to_string(need) + " exceeds the 2^31 cap");
    }
  } else if (cmd == "recur") {
    const std::string mode = cfg.get("mode", "average");
    require(v, mode == "average" || mode == "sequence", "mode must be average|sequence");
    validate_alpha_key(v, cfg, "alpha", "sqrt5");
    const std::string kind = cfg.get("pattern_kind", "floor_scaled");
    require(v, kind == "floor_scaled" || kind == "scaled_floor",
            "recurrence patterns must be bracket kinds");
    validate_alpha_key(v, cfg, "pattern_alpha", "sqrt2");
    const int64_t k = cfg.get_int("k", 1);
    require(v, k >= 1 && k <= 8, "k must lie in [1, 8]");
    if (!cfg.has("set")) v.errors.push_back("missing set (arc list lo,hi[;lo,hi...])");
    else {
      try {
        parse_arcs(cfg.get("set"));
      } catch (const std::exception& e) {
        v.errors.push_back(e.what());
      }
    }
    if (mode == "average") {
      require(v, cfg.get_int("N", 0) >= 1, "need N >= 1");
      validate_weight(v, cfg, static_cast<int>(k));
    } else {
      require(v, !cfg.get_int_list("n_list").empty(), "need n_list");
    }
  } else if (cmd == "cube") {
    const std::string mode = cfg.get("mode", "average");
    require(v, mode == "average" || mode == "bound", "mode must be average|bound");
    validate_alpha_key(v, cfg, "alpha", "golden");
    if (mode == "average") {
      const int64_t k = cfg.get_int("k", 2);
      require(v, k >= 1 && k <= 3, "k must lie in [1, 3]");
      const int64_t N = cfg.get_int("N", 0);
      require(v, N >= 2, "need N >= 2");
      const int64_t shift = cfg.get_int("shift", 0);
      require(v, shift == 0 || shift == 1 || shift == -1, "shift must be -1, 0, or +1");
      require(v, cfg.get_int("W_N", 1) >= 1, "W_N must be >= 1");
      validate_observables(v, cfg, "observables",
                           (static_cast<size_t>(1) << std::clamp<int64_t>(k, 1, 3)) - 1);
      const double pn = static_cast<double>(N) / std::max(1.0, std::log(static_cast<double>(N)));
      require(v, std::pow(pn, static_cast<double>(k)) < 1.6e7,
              "prime tuple count exceeds the budget; lower N or k");
    } else {
      const int64_t k = cfg.get_int("k", 2);
      require(v, k >= 1 && k <= 2, "bound mode supports k in [1, 2]");
      require(v, !cfg.get_int_list("N_list").empty(), "need N_list");
      for (uint64_t N : cfg.get_int_list("N_list"))
        require(v, N >= 2 && N <= 4096, "bound-mode N must lie in [2, 4096]");
      const int64_t j = cfg.get_int("j", 1);
      require(v, j >= 1 && j <= k, "j must lie in [1, k]");
      const int64_t w = cfg.get_int("weight_w", 5);
      require(v, w > 2, "weight_w must exceed 2");
      validate_observables(v, cfg, "observables",
                           (static_cast<size_t>(1) << std::clamp<int64_t>(k, 1, 2)) - 1);
    }
    const int64_t grid = cfg.get_int("grid", 256);
    require(v, grid >= 2 && grid <= (1 << 16), "grid must lie in [2, 2^16]");
  } else if (cmd == "nilweight") {
    const int64_t k = cfg.get_int("k", 1);
    require(v, k >= 1 && k <= 6, "k must lie in [1, 6]");
    require(v, cfg.get_int("N", 0) >= 1, "need N >= 1");
    validate_alpha_key(v, cfg, "alpha", "golden");
    validate_observables(v, cfg, "observables", static_cast<size_t>(std::max<int64_t>(k, 1)));
    const std::string wk = cfg.get("nil_weight", "polyphase");
    require(v, wk == "ones" || wk == "polyphase" || wk == "heisenberg",
            "nil_weight must be ones|polyphase|heisenberg");
    if (wk == "polyphase")
      require(v, cfg.get_double_list("coeffs").size() <= 4, "polyphase degree must be <= 3");
  } else if (cmd == "vdc") {
    require(v, cfg.get_int("count", 100) >= 1, "count must be >= 1");
    const int64_t N = cfg.get_int("N_max", 256);
    require(v, N >= 2 && N <= 4096, "N_max must lie in [2, 4096]");
    const int64_t dim = cfg.get_int("dim_max", 8);
    require(v, dim >= 1 && dim <= 64, "dim_max must lie in [1, 64]");
    require(v, cfg.get_double("constant", 4.0) > 0, "constant must be positive");
  } else if (cmd == "identity") {
    validate_alpha_key(v, cfg, "pattern_alpha", "sqrt2");
    const std::string kind = cfg.get("pattern_kind", "floor_scaled");
    require(v, kind == "floor_scaled" || kind == "scaled_floor",
            "identity checks apply to bracket kinds only");
    const int64_t k = cfg.get_int("k", 1);
    require(v, k >= 1 && k <= 4, "k must lie in [1, 4]");
    require(v, cfg.get_int("n_max", 0) >= 1, "need n_max >= 1");
    require(v, cfg.get_int("h_max", 0) >= 1, "need h_max >= 1");
    const uint64_t cells_default = sequences::factorial(static_cast<unsigned>(k) + 1);
    const int64_t cells = cfg.get_int("cells", 0);
    require(v, cells == 0 || cells == 2 || cells == static_cast<int64_t>(cells_default),
            "cells must be 0 (default (k+1)!), 2 (coarse), or (k+1)!");
    const int64_t cell = cfg.get_int("cell", 0);
    const uint64_t cells_eff = cells == 0 ? cells_default : static_cast<uint64_t>(cells);
    require(v, cell >= 0 && static_cast<uint64_t>(cell) <= cells_eff,
            "cell must be 0 (all) or in [1, cells]");
    if (cfg.has("support_lo") || cfg.has("support_hi")) {
      const double lo = cfg.get_double("support_lo", 0.0);
      const double hi = cfg.get_double("support_hi", 1.0);
      const int64_t idx = cell == 0 ? 1 : cell;
      try {
        sequences::IntervalWeight::custom(static_cast<int>(k), static_cast<uint64_t>(idx), lo, hi,
                                          cells_eff);
      } catch (const std::exception& e) {
        v.errors.push_back(e.what());
      }
    }
  } else if (cmd == "pattern") {
    const std::string mode = cfg.get("mode", "find");
    require(v, mode == "find" || mode == "census", "mode must be find|census");
    const std::string set = cfg.get("set_kind", "bernoulli");
    require(v, set == "bernoulli" || set == "evens" || set == "full" || set == "file",
            "set_kind must be bernoulli|evens|full|file");
    if (set == "file") require(v, cfg.has("set_file"), "set_kind=file needs set_file");
    if (set == "bernoulli") {
      const double density = cfg.get_double("density", 0.2);
      require(v, density > 0.0 && density < 1.0, "density must lie in (0, 1)");
    }
    require(v, cfg.get_int("N", 0) >= 2, "need N >= 2");
    require(v, cfg.get_int("N", 0) <= (1ll << 31), "N exceeds the 2^31 cap");
    require(v, cfg.get_int("n_max", 0) >= 1, "need n_max >= 1");
    require(v, cfg.get_int("n_max", 0) <= (1ll << 31),
            "required sieve limit for n_max exceeds the 2^31 cap");
    const int64_t shift = cfg.get_int("shift", -1);
    require(v, shift == 1 || shift == -1, "shift must be +1 or -1");
    const std::string kind = cfg.get("pattern_kind", "floor_scaled");
    if (kind != "linear") validate_alpha_key(v, cfg, "pattern_alpha", "sqrt2");
    require(v, cfg.get_int("k", 1) >= 1 && cfg.get_int("k", 1) <= 8, "k must lie in [1, 8]");
  } else if (cmd == "counterexample") {
    require(v, cfg.get_int("n_max", 0) >= 1, "need n_max >= 1");
    require(v, cfg.get_int("n_max", 0) <= 10000000, "n_max must be <= 1e7");
    const double hw = cfg.get_double("half_width", 0.125);
    require(v, hw > 0.0 && hw < 0.5, "half_width must lie in (0, 0.5)");
  }
  return v;
}

// ---- subcommand runners -----------------------------------------------------

std::string fingerprint(const ExperimentConfig& cfg) {
  std::string fp = "ulab " + cfg.subcommand;
  for (const auto& [k, val] : cfg.params) {
    if (k == "out" || k == "subcommand") continue;
    fp += " " + k + "=" + val;
  }
  return fp;
}

void run_gowers(const ExperimentConfig& cfg, RunContext& ctx) {
  StageTimer timer(ctx, "gowers");
  const int d = static_cast<int>(cfg.get_int("d", 2));
  const auto M = static_cast<uint64_t>(cfg.get_int("M", 64));
  const std::string input = cfg.get("input", "ones");

  gowers::CyclicSequence seq;
  seq.values.assign(M, {1.0, 0.0});
  if (input == "random") {
    std::mt19937_64 rng(static_cast<uint64_t>(cfg.get_int("seed", 1)));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& z : seq.values) z = {u(rng), u(rng)};
  } else if (input == "polyphase") {
    systems::NilsequenceSpec nspec;
    nspec.kind = systems::NilsequenceKind::PolynomialPhase;
    nspec.coeffs = cfg.get_double_list("coeffs");
    if (nspec.coeffs.empty()) nspec.coeffs = {0.0};
    const auto win = systems::nilsequence_sample(nspec, M);
    seq.values = win.values;
  }

  report::Csv csv(fingerprint(cfg), {"evaluator", "d", "M", "value", "work"});
  for (const auto& ev : split(cfg.get("evaluators", "inductive"), ',')) {
    gowers::GowersResult res;
    if (ev == "inductive") res = gowers::gowers_norm(seq, d);
    else if (ev == "box") res = gowers::gowers_norm_boxproduct(seq, d);
    else res = gowers::gowers_u2_spectral(seq);
    csv.row({ev, report::Csv::num(static_cast<int64_t>(res.d)), report::Csv::num(M),
             report::Csv::num(res.value), report::Csv::num(res.work)});
  }
  ctx.emit(csv, "gowers.csv");
}

void run_mangoldt_scan(const ExperimentConfig& cfg, RunContext& ctx) {
  const auto w64 = cfg.get_int_list("w_list");
  std::vector<uint32_t> w_list(w64.begin(), w64.end());
  const auto N_list = cfg.get_int_list("N_list");
  const int d = static_cast<int>(cfg.get_int("d", 2));

  uint64_t need = 2, maxN = 0;
  for (uint32_t w : w_list)
    for (uint64_t N : N_list) need = std::max(need, primorial_below(w) * (N + 1));
  for (uint64_t N : N_list) maxN = std::max(maxN, N);
  const auto tables = acquire_tables(need, ctx);

  gowers::ScanOptions opt;
  opt.padding = static_cast<unsigned>(cfg.get_int("padding", 0));
  opt.record_timings = cfg.get_int("timings", 0) != 0;
  std::string weight_label;
  SequenceWindow weight = make_scan_weight(cfg, maxN, &weight_label);
  opt.weight = &weight;
  opt.weight_kind = weight_label;

  StageTimer timer(ctx, "scan");
  const auto rows = gowers::mangoldt_uniformity_scan(tables, w_list, N_list, d, opt);

  report::Csv csv(fingerprint(cfg),
                  {"w", "W", "N", "d", "weight_kind", "sup_r_norm", "argmax_r", "wall_time_ms"});
  for (const auto& r : rows)
    csv.row({report::Csv::num(static_cast<uint64_t>(r.w)), report::Csv::num(r.W),
             report::Csv::num(r.N), report::Csv::num(static_cast<int64_t>(r.d)), r.weight_kind,
             report::Csv::num(r.sup_norm), report::Csv::num(r.argmax_r),
             report::Csv::num(r.wall_ms)});
  ctx.emit(csv, "mangoldt_scan.csv");

  std::vector<report::Series> series;
  for (uint32_t w : w_list) {
    report::Series s;
    s.name = "w=" + std::to_string(w);
    for (const auto& r : rows)
      if (r.w == w) s.points.emplace_back(static_cast<double>(r.N), r.sup_norm);
    series.push_back(std::move(s));
  }
  ctx.emit_text(report::render_svg_chart("sup_r Gowers norm vs N", "N", "sup_r norm", series, true),
                "mangoldt_scan.svg");
}

void run_average(const ExperimentConfig& cfg, RunContext& ctx) {
  const auto pattern = parse_pattern(cfg);
  const auto k = static_cast<size_t>(pattern.k);
  auto N_list = cfg.get_int_list("N_list");
  if (N_list.empty()) N_list.push_back(static_cast<uint64_t>(cfg.get_int("N", 1)));
  uint64_t maxN = N_list.back();

  const std::string system_kind = cfg.get("system", "rotation");
  const std::string indexing = cfg.get("indexing", "integers");
  const std::string weight_kind = cfg.get("weight", "unit");
  const uint64_t stride = static_cast<uint64_t>(cfg.get_int("stride", 1));
  const uint64_t offset = static_cast<uint64_t>(cfg.get_int("offset", 0));

  std::optional<primes::PrimeTables> tables;
  if (weight_kind != "unit" || indexing == "primes") {
    uint64_t need = stride * maxN + stride + 1;
    if (weight_kind == "modified") {
      const uint64_t W = primorial_below(static_cast<uint32_t>(cfg.get_int("weight_w", 3)));
      need = std::max(need, W * maxN + W);
    }
    tables = acquire_tables(need, ctx);
  }

  systems::DynamicalSystem system;
  if (system_kind == "rotation")
    system = systems::RotationSystem::circle(Irrational::named(cfg.get("alpha", "golden")));
  else if (system_kind == "heisenberg")
    system = systems::HeisenbergSystem{{cfg.get_double("g_a", std::sqrt(2.0)),
                                        cfg.get_double("g_b", std::sqrt(3.0)),
                                        cfg.get_double("g_c", 0.0)}};
  else
    system = systems::CyclicShiftSystem{static_cast<uint32_t>(cfg.get_int("m", 64))};

  averages::AverageSpec spec;
  spec.system = &system;
  spec.observables = parse_observables(cfg.get("observables"), k);
  spec.pattern = pattern;
  spec.tables = tables ? &*tables : nullptr;
  spec.weight = parse_weight(cfg, spec.tables, pattern);
  spec.stride = stride;
  spec.offset = offset;
  spec.grid.dim = system_kind == "heisenberg" ? 3 : 1;
  spec.grid.points_per_dim = static_cast<uint64_t>(cfg.get_int("grid", 4096));

  StageTimer timer(ctx, "average");
  if (N_list.size() >= 2) {
    const auto profile = averages::cauchy_profile(spec, N_list);
    report::Csv csv(fingerprint(cfg), {"N", "l2_diff", "weight"});
    report::Series s;
    s.name = spec.weight.label();
    for (const auto& p : profile) {
      csv.row({report::Csv::num(p.N), report::Csv::num(p.value), p.meta});
      s.points.emplace_back(static_cast<double>(p.N), p.value);
    }
    ctx.emit(csv, "average_profile.csv");
    ctx.emit_text(
        report::render_svg_chart("consecutive-window L2 difference", "N", "||A(N_j+1)-A(N_j)||",
                                 {s}, true),
        "average_profile.svg");
    return;
  }

  spec.N = N_list[0];
  const auto grid = indexing == "primes" ? averages::prime_average(spec)
                                         : averages::multi_average(spec);
  report::Csv csv(fingerprint(cfg), {"N", "grid", "l2_norm", "sup_norm"});
  csv.row({report::Csv::num(spec.N), report::Csv::num(spec.grid.points_per_dim),
           report::Csv::num(systems::grid_l2_norm(grid)),
           report::Csv::num(systems::grid_sup_norm(grid))});
  ctx.emit(csv, "average.csv");
  if (cfg.get_int("dump_grid", 0) != 0) {
    systems::save_grid(grid, ctx.out_path("average_grid.bin"));
    ctx.result->outputs.push_back(ctx.out_path("average_grid.bin"));
  }
}

void run_recur(const ExperimentConfig& cfg, RunContext& ctx) {
  const auto system = systems::RotationSystem::circle(Irrational::named(cfg.get("alpha", "sqrt5")));
  const auto set = parse_arcs(cfg.get("set"));
  const auto pattern = parse_pattern(cfg);
  const std::string mode = cfg.get("mode", "average");

  report::Csv set_csv(fingerprint(cfg), {"lo", "hi"});
  for (const auto& [lo, hi] : set.arcs_double())
    set_csv.row({report::Csv::num(lo), report::Csv::num(hi)});
  ctx.emit(set_csv, "set_arcs.csv");

  if (mode == "sequence") {
    const auto n_list = cfg.get_int_list("n_list");
    StageTimer timer(ctx, "recurrence");
    const auto rows = averages::recurrence_sequence(system, set, pattern, n_list);
    report::Csv csv(fingerprint(cfg), {"n", "measure"});
    for (const auto& r : rows) csv.row({report::Csv::num(r.N), report::Csv::num(r.value)});
    ctx.emit(csv, "recurrence_sequence.csv");
    return;
  }

  const auto N = static_cast<uint64_t>(cfg.get_int("N", 1));
  std::optional<primes::PrimeTables> tables;
  averages::WeightSpec weight;
  if (cfg.get("weight", "unit") == "modified") {
    const uint64_t W = primorial_below(static_cast<uint32_t>(cfg.get_int("weight_w", 3)));
    tables = acquire_tables(W * N + W, ctx);
    weight = parse_weight(cfg, &*tables, pattern);
  } else {
    weight = parse_weight(cfg, nullptr, pattern);
  }
  StageTimer timer(ctx, "recurrence");
  const double value =
      averages::recurrence_average(system, set, pattern, N, weight, tables ? &*tables : nullptr);
  report::Csv csv(fingerprint(cfg), {"N", "weight", "value"});
  csv.row({report::Csv::num(N), weight.label(), report::Csv::num(value)});
  ctx.emit(csv, "recurrence_average.csv");
}

void run_cube(const ExperimentConfig& cfg, RunContext& ctx) {
  const std::string mode = cfg.get("mode", "average");
  auto system_holder = std::make_unique<systems::DynamicalSystem>(
      systems::RotationSystem::circle(Irrational::named(cfg.get("alpha", "golden"))));

  if (mode == "average") {
    averages::CubeSpec spec;
    spec.k = static_cast<int>(cfg.get_int("k", 2));
    spec.N = static_cast<uint64_t>(cfg.get_int("N", 100));
    spec.shift = static_cast<int>(cfg.get_int("shift", 0));
    spec.W_N = static_cast<uint64_t>(cfg.get_int("W_N", 1));
    spec.grid.points_per_dim = static_cast<uint64_t>(cfg.get_int("grid", 256));
    spec.system = system_holder.get();
    spec.observables =
        parse_observables(cfg.get("observables"), (static_cast<size_t>(1) << spec.k) - 1);
    const auto tables = acquire_tables(spec.N + 2, ctx);
    spec.tables = &tables;
    StageTimer timer(ctx, "cube");
    const auto grid = averages::cube_average(spec);
    report::Csv csv(fingerprint(cfg), {"k", "N", "shift", "W_N", "l2_norm", "sup_norm"});
    csv.row({report::Csv::num(static_cast<int64_t>(spec.k)), report::Csv::num(spec.N),
             report::Csv::num(static_cast<int64_t>(spec.shift)), report::Csv::num(spec.W_N),
             report::Csv::num(systems::grid_l2_norm(grid)),
             report::Csv::num(systems::grid_sup_norm(grid))});
    ctx.emit(csv, "cube_average.csv");
    return;
  }

  averages::CubeSpec spec;
  spec.k = static_cast<int>(cfg.get_int("k", 2));
  spec.grid.points_per_dim = static_cast<uint64_t>(cfg.get_int("grid", 256));
  spec.system = system_holder.get();
  spec.observables =
      parse_observables(cfg.get("observables"), (static_cast<size_t>(1) << spec.k) - 1);
  const auto N_list = cfg.get_int_list("N_list");
  const auto w = static_cast<uint32_t>(cfg.get_int("weight_w", 5));
  const auto r = static_cast<uint64_t>(cfg.get_int("weight_r", 1));
  const int j = static_cast<int>(cfg.get_int("j", 1));
  uint64_t maxN = 0;
  for (uint64_t N : N_list) maxN = std::max(maxN, N);
  const auto tables = acquire_tables(primorial_below(w) * (maxN + 1), ctx);
  spec.tables = &tables;
  const auto params = primes::WTrickParams::make(w, r, tables);

  StageTimer timer(ctx, "cube-bound");
  report::Csv csv(fingerprint(cfg), {"N", "lhs", "rhs", "ratio"});
  report::Series series;
  series.name = "lhs/(rhs+1e-6)";
  for (uint64_t N : N_list) {
    std::vector<SequenceWindow> b(static_cast<size_t>(spec.k));
    for (auto& win : b) {
      win.values.resize(N);
      for (uint64_t n = 1; n <= N; ++n)
        win.values[n - 1] = {primes::modified_mangoldt(tables, params, n) - 1.0, 0.0};
    }
    spec.N = N;
    const auto rep = averages::cube_bound_check(b, spec, j);
    csv.row({report::Csv::num(rep.N), report::Csv::num(rep.lhs), report::Csv::num(rep.rhs),
             report::Csv::num(rep.ratio)});
    series.points.emplace_back(static_cast<double>(N), rep.ratio);
  }
  ctx.emit(csv, "cube_bound.csv");
  ctx.emit_text(report::render_svg_chart("cube bound ratio vs N", "N", "ratio", {series}, true),
                "cube_bound.svg");
}

void run_nilweight(const ExperimentConfig& cfg, RunContext& ctx) {
  const auto k = static_cast<size_t>(cfg.get_int("k", 1));
  const auto N = static_cast<uint64_t>(cfg.get_int("N", 1024));
  const bool prime_indexed = cfg.get_int("prime_indexed", 0) != 0;

  systems::NilsequenceSpec nspec;
  const std::string wk = cfg.get("nil_weight", "polyphase");
  SequenceWindow weight;
  if (wk == "ones") {
    weight.values.assign(N, {1.0, 0.0});
  } else {
    nspec.kind = wk == "heisenberg" ? systems::NilsequenceKind::HeisenbergLipschitz
                                    : systems::NilsequenceKind::PolynomialPhase;
    if (wk == "polyphase") {
      nspec.coeffs = cfg.get_double_list("coeffs");
      if (nspec.coeffs.empty()) nspec.coeffs = {0.0};
    }
    weight = systems::nilsequence_sample(nspec, N);
  }

  std::optional<primes::PrimeTables> tables;
  if (prime_indexed) tables = acquire_tables(N + 2, ctx);

  const systems::DynamicalSystem system =
      systems::RotationSystem::circle(Irrational::named(cfg.get("alpha", "golden")));
  const auto observables = parse_observables(cfg.get("observables"), k);
  GridSpec grid;
  grid.points_per_dim = static_cast<uint64_t>(cfg.get_int("grid", 4096));

  StageTimer timer(ctx, "nilweight");
  const auto out = averages::nilweighted_average(system, observables, weight, N, prime_indexed,
                                                 grid, tables ? &*tables : nullptr);
  report::Csv csv(fingerprint(cfg), {"N", "prime_indexed", "weight", "l2_norm", "sup_norm"});
  csv.row({report::Csv::num(N), report::Csv::num(static_cast<int64_t>(prime_indexed ? 1 : 0)), wk,
           report::Csv::num(systems::grid_l2_norm(out)),
           report::Csv::num(systems::grid_sup_norm(out))});
  ctx.emit(csv, "nilweight.csv");
}

void run_vdc(const ExperimentConfig& cfg, RunContext& ctx) {
  StageTimer timer(ctx, "vdc");
  const auto count = static_cast<uint64_t>(cfg.get_int("count", 100));
  const auto N_max = static_cast<uint64_t>(cfg.get_int("N_max", 256));
  const auto dim_max = static_cast<uint64_t>(cfg.get_int("dim_max", 8));
  const double constant = cfg.get_double("constant", 4.0);
  std::mt19937_64 rng(static_cast<uint64_t>(cfg.get_int("seed", 1)));
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  report::Csv csv(fingerprint(cfg), {"instance", "N", "dim", "lhs", "rhs", "pass"});
  uint64_t passes = 0;
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t N = 2 + rng() % (N_max - 1);
    const uint64_t dim = 1 + rng() % dim_max;
    std::vector<std::vector<gowers::complexd>> vecs(N);
    for (auto& vec : vecs) {
      vec.resize(dim);
      for (auto& z : vec) z = {u(rng), u(rng)};
    }
    const auto rep = averages::vdc_check(vecs, constant);
    passes += rep.pass ? 1 : 0;
    csv.row({report::Csv::num(i), report::Csv::num(N), report::Csv::num(dim),
             report::Csv::num(rep.lhs), report::Csv::num(rep.rhs),
             report::Csv::num(static_cast<int64_t>(rep.pass ? 1 : 0))});
  }
  ctx.emit(csv, "vdc.csv");
  if (passes != count)
    ctx.result->notes.push_back(std::to_string(count - passes) + " vdc instances failed");
}

void run_identity(const ExperimentConfig& cfg, RunContext& ctx) {
  StageTimer timer(ctx, "identity");
  const auto pattern = BracketPattern::make(parse_kind(cfg.get("pattern_kind", "floor_scaled")),
                                            static_cast<int>(cfg.get_int("k", 1)),
                                            Irrational::named(cfg.get("pattern_alpha", "sqrt2")));
  const auto n_max = static_cast<uint64_t>(cfg.get_int("n_max", 10000));
  const auto h_max = static_cast<uint64_t>(cfg.get_int("h_max", 1000));
  const auto t2 = static_cast<uint64_t>(cfg.get_int("t2_h_max", 100));
  const uint64_t cells_default = sequences::factorial(static_cast<unsigned>(pattern.k) + 1);
  const uint64_t cells = cfg.get_int("cells", 0) == 0
                             ? cells_default
                             : static_cast<uint64_t>(cfg.get_int("cells", 0));
  const int64_t one_cell = cfg.get_int("cell", 0);

  std::vector<uint64_t> cell_list;
  if (one_cell > 0)
    cell_list.push_back(static_cast<uint64_t>(one_cell));
  else
    for (uint64_t i = 1; i <= cells; ++i) cell_list.push_back(i);

  report::Csv violations(fingerprint(cfg),
                         {"n", "h", "v", "expected", "actual", "frac_n", "frac_nh"});
  report::Csv t2_violations(fingerprint(cfg),
                            {"n", "h1", "h2", "v", "expected", "actual", "frac_n", "frac_nh"});
  report::Csv summary(fingerprint(cfg),
                      {"cell", "cells", "pairs_checked", "t2_tuples_checked", "violations"});
  for (uint64_t cell : cell_list) {
    sequences::IntervalWeight weight =
        cfg.has("support_lo")
            ? sequences::IntervalWeight::custom(pattern.k, cell, cfg.get_double("support_lo", 0.0),
                                                cfg.get_double("support_hi", 1.0), cells)
            : (cells == cells_default
                   ? sequences::IntervalWeight::cell(pattern.k, cell)
                   : sequences::IntervalWeight::custom(
                         pattern.k, cell, static_cast<double>(cell - 1) / static_cast<double>(cells),
                         static_cast<double>(cell) / static_cast<double>(cells), cells));
    const auto rep = sequences::identity_verifier(pattern, weight, n_max, h_max, t2);
    for (const auto& viol : rep.violations) {
      if (viol.h2 == 0)
        violations.row({report::Csv::num(viol.n), report::Csv::num(viol.h1),
                        report::Csv::num(static_cast<int64_t>(viol.v)),
                        report::Csv::num(viol.expected), report::Csv::num(viol.actual),
                        report::Csv::num(viol.frac_n), report::Csv::num(viol.frac_nh)});
      else
        t2_violations.row({report::Csv::num(viol.n), report::Csv::num(viol.h1),
                           report::Csv::num(viol.h2), report::Csv::num(static_cast<int64_t>(viol.v)),
                           report::Csv::num(viol.expected), report::Csv::num(viol.actual),
                           report::Csv::num(viol.frac_n), report::Csv::num(viol.frac_nh)});
    }
    summary.row({report::Csv::num(cell), report::Csv::num(cells), report::Csv::num(rep.pairs_checked),
                 report::Csv::num(rep.t2_tuples_checked),
                 report::Csv::num(static_cast<uint64_t>(rep.violations.size()))});
  }
  ctx.emit(violations, "identity_violations.csv");
  ctx.emit(t2_violations, "identity_t2_violations.csv");
  ctx.emit(summary, "identity_summary.csv");
}

void run_pattern(const ExperimentConfig& cfg, RunContext& ctx) {
  const auto N = static_cast<uint64_t>(cfg.get_int("N", 100000));
  const auto n_max = static_cast<uint64_t>(cfg.get_int("n_max", 100000));
  const int shift = static_cast<int>(cfg.get_int("shift", -1));
  const auto pattern = parse_pattern(cfg);

  patterns::IntegerSet set = [&] {
    const std::string kind = cfg.get("set_kind", "bernoulli");
    if (kind == "bernoulli")
      return patterns::IntegerSet::bernoulli(N, cfg.get_double("density", 0.2),
                                             static_cast<uint64_t>(cfg.get_int("seed", 1)));
    if (kind == "evens") return patterns::IntegerSet::evens(N);
    if (kind == "full") return patterns::IntegerSet::full(N);
    return patterns::IntegerSet::load(cfg.get("set_file"));
  }();

  const auto tables = acquire_tables(n_max + 2, ctx);
  StageTimer timer(ctx, "pattern");
  if (cfg.get("mode", "find") == "find") {
    const auto witness = patterns::find_pattern(set, pattern, shift, n_max, tables);
    report::Csv csv(fingerprint(cfg), {"found", "n", "p", "m", "positions"});
    if (witness) {
      std::string pos;
      for (uint64_t x : witness->positions) pos += (pos.empty() ? "" : ";") + std::to_string(x);
      csv.row({"1", report::Csv::num(witness->n), report::Csv::num(witness->p),
               report::Csv::num(witness->m), pos});
    } else {
      csv.row({"0", "0", "0", "0", "not found in range (absence in range is not a refutation)"});
    }
    ctx.emit(csv, "pattern_witness.csv");
    return;
  }
  const auto rows = patterns::pattern_census(set, pattern, shift, n_max, tables);
  report::Csv csv(fingerprint(cfg), {"n", "p", "count", "density_estimate"});
  for (const auto& r : rows)
    csv.row({report::Csv::num(r.n), report::Csv::num(r.p), report::Csv::num(r.count),
             report::Csv::num(r.density_estimate)});
  ctx.emit(csv, "pattern_census.csv");
}

void run_counterexample(const ExperimentConfig& cfg, RunContext& ctx) {
  StageTimer timer(ctx, "counterexample");
  const auto n_max = static_cast<uint64_t>(cfg.get_int("n_max", 10000));
  const double hw = cfg.get_double("half_width", 0.125);
  const auto rep = patterns::counterexample_scan(n_max, hw);
  report::Csv csv(fingerprint(cfg), {"n", "bracket", "measure"});
  for (const auto& row : rep.rows)
    csv.row({report::Csv::num(row.n), report::Csv::num(row.bracket), report::Csv::num(row.measure)});
  ctx.emit(csv, "counterexample.csv");
  report::Csv summary(fingerprint(cfg), {"n_max", "half_width", "odd_positive", "even_positive"});
  summary.row({report::Csv::num(n_max), report::Csv::num(hw),
               report::Csv::num(static_cast<uint64_t>(rep.odd_positive.size())),
               report::Csv::num(rep.even_positive)});
  ctx.emit(summary, "counterexample_summary.csv");
}

void write_manifest(RunContext& ctx, const ExperimentConfig& cfg, const std::string& status) {
  nlohmann::json j;
  j["tool"] = kToolVersion;
  j["subcommand"] = cfg.subcommand;
  j["status"] = status;
  j["precision_bits"] = 128;
  j["threads"] = parallel::max_threads();
  j["sieve_limit"] = ctx.sieve_limit_used;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : cfg.params) params[k] = v;
  j["config"] = params;
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : ctx.stages) stages.push_back({{"name", s.name}, {"wall_ms", s.wall_ms}});
  j["stages"] = stages;
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& path : ctx.result->outputs) {
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(report::fnv1a_file(path)));
    outputs.push_back({{"file", path}, {"fnv1a64", hash}});
  }
  j["outputs"] = outputs;
  if (!ctx.result->errors.empty()) j["errors"] = ctx.result->errors;
  if (!ctx.result->notes.empty()) j["notes"] = ctx.result->notes;

  const std::string path = ctx.out_path("manifest.json");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);
  f << j.dump(2) << "\n";
  ctx.result->manifest_path = path;
}

}  // namespace

Validation validate(const ExperimentConfig& cfg) { return validate_impl(cfg); }

RunResult run(const ExperimentConfig& cfg) {
  RunResult result;
  const Validation v = validate_impl(cfg);
  result.notes = v.notes;
  if (!v.ok()) {
    result.exit_code = 2;
    result.errors = v.errors;
    return result;
  }

  RunContext ctx;
  ctx.cfg = &cfg;
  ctx.result = &result;
  try {
    report::ensure_directory(cfg.out_dir);
    const std::string& cmd = cfg.subcommand;
    if (cmd == "gowers") run_gowers(cfg, ctx);
    else if (cmd == "mangoldt-scan") run_mangoldt_scan(cfg, ctx);
    else if (cmd == "average") run_average(cfg, ctx);
    else if (cmd == "recur") run_recur(cfg, ctx);
    else if (cmd == "cube") run_cube(cfg, ctx);
    else if (cmd == "nilweight") run_nilweight(cfg, ctx);
    else if (cmd == "vdc") run_vdc(cfg, ctx);
    else if (cmd == "identity") run_identity(cfg, ctx);
    else if (cmd == "pattern") run_pattern(cfg, ctx);
    else run_counterexample(cfg, ctx);
    write_manifest(ctx, cfg, "ok");
  } catch (const resource_error& e) {
    result.exit_code = 3;
    result.errors.push_back(e.what());
    try {
      write_manifest(ctx, cfg, "budget-exceeded");
    } catch (...) {
    }
  } catch (const io_error& e) {
    result.exit_code = 4;
    result.errors.push_back(e.what());
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.errors.push_back(e.what());
    try {
      write_manifest(ctx, cfg, "error");
    } catch (...) {
    }
  }
  return result;
}

}  // namespace ulab::runner
