#pragma once

// Monte Carlo experiments: replicas on disjoint streams, deterministic
// reduction in replica order, comparison against closed-form targets.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "microxi/errors.hpp"
#include "microxi/formulas.hpp"
#include "microxi/json_io.hpp"
#include "microxi/linstats.hpp"
#include "microxi/rng.hpp"
#include "microxi/sinekernel.hpp"
#include "microxi/spectral_chain.hpp"
#include "microxi/stats.hpp"
#include "microxi/xinf.hpp"

namespace microxi {

// Replica r draws from SeededStream(master_seed, r). Results land in slot r,
// so the output does not depend on the number of workers.
template <class Fn>
auto run_replicas(Fn&& fn, std::size_t replicas, std::uint64_t master_seed, std::size_t workers) {
  using Value = decltype(fn(std::declval<SeededStream&>()));
  std::vector<Value> out(replicas);
  workers = std::max<std::size_t>(1, std::min(workers, replicas));
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t err_replica = replicas;
  std::optional<Error> err;
  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= replicas) return;
      try {
        SeededStream stream(master_seed, r);
        out[r] = fn(stream);
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (r < err_replica) {
          err_replica = r;
          err = Error(e.kind(), "replica " + std::to_string(r) + ": " + e.what());
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (r < err_replica) {
          err_replica = r;
          err = Error(ErrorKind::InvalidArgument, "replica " + std::to_string(r) + ": " + e.what());
        }
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (err) throw *err;
  return out;
}

enum class Comparison { Equal, UpperBound, Diagnostic };

inline const char* to_string(Comparison c) {
  switch (c) {
    case Comparison::Equal: return "equal";
    case Comparison::UpperBound: return "upper_bound";
    case Comparison::Diagnostic: return "diagnostic";
  }
  return "equal";
}

struct EstimateReport {
  std::string kind;
  cplx estimate = 0.0;
  bool complex_valued = false;
  std::optional<double> standard_error;  // absent when a single replica was used
  std::size_t replicas_used = 0;
  cplx target = 0.0;
  std::string formula;
  Comparison comparison = Comparison::Equal;
  std::optional<double> z_score;
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json details = nlohmann::json::object();

  // Equality comparisons pass at |z| < 4; upper bounds when the estimate does
  // not exceed the target.
  std::optional<bool> passed() const {
    switch (comparison) {
      case Comparison::Equal:
        if (!z_score) return std::nullopt;
        return *z_score < 4.0;
      case Comparison::UpperBound: return estimate.real() <= target.real();
      case Comparison::Diagnostic: return std::nullopt;
    }
    return std::nullopt;
  }

  nlohmann::json to_json(bool with_runtime = true) const {
    nlohmann::json j;
    j["kind"] = kind;
    j["estimate"] = complex_valued ? complex_to_json(estimate) : nlohmann::json(estimate.real());
    j["standard_error"] = standard_error ? nlohmann::json(*standard_error) : nlohmann::json(nullptr);
    j["replicas_used"] = replicas_used;
    j["target"] = {{"value", complex_valued ? complex_to_json(target) : nlohmann::json(target.real())},
                   {"formula", formula}};
    j["comparison"] = to_string(comparison);
    j["z_score"] = z_score ? nlohmann::json(*z_score) : nlohmann::json(nullptr);
    const auto p = passed();
    j["passed"] = p ? nlohmann::json(*p) : nlohmann::json(nullptr);
    j["seed"] = seed;
    j["details"] = details;
    if (with_runtime) j["runtime_seconds"] = runtime_seconds;
    return j;
  }

  static EstimateReport from_json(const nlohmann::json& j) {
    try {
      EstimateReport r;
      r.kind = j.at("kind").get<std::string>();
      r.complex_valued = j.at("estimate").is_array();
      r.estimate = complex_from_json(j.at("estimate"));
      if (!j.at("standard_error").is_null()) r.standard_error = j.at("standard_error").get<double>();
      r.replicas_used = j.at("replicas_used").get<std::size_t>();
      r.target = complex_from_json(j.at("target").at("value"));
      r.formula = j.at("target").at("formula").get<std::string>();
      const auto c = j.at("comparison").get<std::string>();
      r.comparison = c == "upper_bound" ? Comparison::UpperBound
                     : c == "diagnostic" ? Comparison::Diagnostic
                                          : Comparison::Equal;
      if (!j.at("z_score").is_null()) r.z_score = j.at("z_score").get<double>();
      r.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("details")) r.details = j.at("details");
      if (j.contains("runtime_seconds")) r.runtime_seconds = j.at("runtime_seconds").get<double>();
      return r;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::ParseError, std::string("report: ") + e.what());
    }
  }

  static std::string csv_header() {
    return "kind,estimate_re,estimate_im,standard_error,replicas_used,target_re,target_im,formula,comparison,z_score,"
           "passed,runtime_seconds,seed";
  }

  std::string csv_row() const {
    auto num = [](std::optional<double> v) {
      if (!v) return std::string();
      char b[32];
      std::snprintf(b, sizeof b, "%.17g", *v);
      return std::string(b);
    };
    const auto p = passed();
    std::string row = kind;
    for (const auto& field :
         {num(estimate.real()), num(estimate.imag()), num(standard_error), std::to_string(replicas_used),
          num(target.real()), num(target.imag()), formula, std::string(to_string(comparison)), num(z_score),
          std::string(p ? (*p ? "true" : "false") : ""), num(runtime_seconds), std::to_string(seed)})
      row += "," + field;
    return row;
  }
};

// Mean of statistic(generator(stream)) over replicas, jackknife error; no target.
template <class Gen, class Stat>
EstimateReport mc_estimate(Gen&& generator, Stat&& statistic, std::size_t replicas, std::uint64_t master_seed,
                           std::size_t workers = 1) {
  if (replicas == 0) fail(ErrorKind::InvalidSpec, "mc_estimate: replicas must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const auto values = run_replicas([&](SeededStream& s) { return cplx(statistic(generator(s))); }, replicas,
                                   master_seed, workers);
  const auto est = mean_estimate(values);
  EstimateReport r;
  r.estimate = est.value;
  r.complex_valued = std::any_of(values.begin(), values.end(), [](cplx v) { return v.imag() != 0.0; });
  if (replicas > 1) r.standard_error = est.standard_error;
  r.replicas_used = replicas;
  r.seed = master_seed;
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline void attach_target(EstimateReport& r, cplx target, std::string formula, Comparison cmp = Comparison::Equal) {
  r.target = target;
  r.formula = std::move(formula);
  r.comparison = cmp;
  r.z_score.reset();
  if (cmp == Comparison::Equal && r.standard_error) {
    const double diff = std::abs(r.estimate - target);
    if (*r.standard_error > 0)
      r.z_score = diff / *r.standard_error;
    else
      r.z_score = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
}

// Every target identifier used by run_experiment, with the quantity it denotes.
inline const std::map<std::string, std::string>& formula_registry() {
  static const std::map<std::string, std::string> registry = {
      {"expected_ratio", "E[xi(z')/xi(z)] = 1 (Im z > 0) or exp(2 i pi (z' - z)) (Im z < 0)"},
      {"expected_joint_ratio_finite_n", "Cauchy-determinant ratio of finite-n expectations"},
      {"expected_abs_ratio_sq", "E|xi(z')/xi(z)|^2"},
      {"m1", "E[xi'/xi(z)] = 2 i pi 1_{Im z < 0}"},
      {"m2", "E[xi'/xi(z) xi'/xi(z')]"},
      {"m2_conj", "E[xi'/xi(z) conj(xi'/xi(z'))]"},
      {"exact_count_variance", "sine-process Var(X_I), |I| = L"},
      {"count_tail_bound", "exp(-min(t^2 / (4 Var), t / 2))"},
      {"sine_kernel_variance", "int min(1, |k|/2pi) |f^(k)|^2 dk"},
      {"coupling_limit", "y_k^(n) converges almost surely; the limit of increments is 0"},
      {"ks_tolerance", "tolerated Kolmogorov-Smirnov distance between samplers"},
  };
  return registry;
}

inline constexpr double kNearAxisGuard = 0.25;

struct ExperimentSpec {
  std::string kind;
  nlohmann::json parameters = nlohmann::json::object();
  std::size_t replicas = 1000;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;

  static const std::vector<std::string>& kinds() {
    static const std::vector<std::string> k = {"ratio",          "joint_ratio", "m1",        "m2",
                                               "abs_ratio_sq",   "count_variance", "count_tails", "blue_noise",
                                               "stieltjes",      "coupling_convergence", "sampler_equivalence"};
    return k;
  }

  nlohmann::json to_json() const {
    return {{"kind", kind}, {"parameters", parameters}, {"replicas", replicas}, {"master_seed", master_seed},
            {"workers", workers}};
  }

  static ExperimentSpec from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    try {
      s.kind = j.at("kind").get<std::string>();
      if (j.contains("parameters")) s.parameters = j.at("parameters");
      if (j.contains("replicas")) s.replicas = j.at("replicas").get<std::size_t>();
      if (j.contains("master_seed")) s.master_seed = j.at("master_seed").get<std::uint64_t>();
      if (j.contains("workers")) s.workers = j.at("workers").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::InvalidSpec, std::string("experiment spec: ") + e.what());
    }
    s.validate();
    return s;
  }

  void validate() const {
    if (std::find(kinds().begin(), kinds().end(), kind) == kinds().end())
      fail(ErrorKind::InvalidSpec, "unknown experiment kind '" + kind + "'");
    if (replicas == 0) fail(ErrorKind::InvalidSpec, "replicas must be positive");
    if (workers == 0) fail(ErrorKind::InvalidSpec, "workers must be positive");
    if (!parameters.is_object()) fail(ErrorKind::InvalidSpec, "parameters must be an object");
  }
};

namespace harness_detail {

inline cplx point(const ExperimentSpec& s, const char* key) {
  if (!s.parameters.contains(key)) fail(ErrorKind::InvalidSpec, std::string("missing parameter '") + key + "'");
  try {
    return complex_from_json(s.parameters.at(key));
  } catch (const Error& e) {
    fail(ErrorKind::InvalidSpec, std::string("parameter '") + key + "': " + e.what());
  }
}

inline std::vector<cplx> points(const ExperimentSpec& s, const char* key) {
  if (!s.parameters.contains(key) || !s.parameters.at(key).is_array())
    fail(ErrorKind::InvalidSpec, std::string("missing list parameter '") + key + "'");
  std::vector<cplx> out;
  for (const auto& v : s.parameters.at(key)) {
    try {
      out.push_back(complex_from_json(v));
    } catch (const Error& e) {
      fail(ErrorKind::InvalidSpec, std::string("parameter '") + key + "': " + e.what());
    }
  }
  return out;
}

template <class T>
T number(const ExperimentSpec& s, const char* key, T fallback) {
  if (!s.parameters.contains(key)) return fallback;
  const auto& v = s.parameters.at(key);
  if (!v.is_number()) fail(ErrorKind::InvalidSpec, std::string("parameter '") + key + "' must be a number");
  return v.get<T>();
}

inline bool flag(const ExperimentSpec& s, const char* key) {
  return s.parameters.contains(key) && s.parameters.at(key).is_boolean() && s.parameters.at(key).get<bool>();
}

// Ratio statistics blow up as points approach the real axis; keep them at
// |Im z| >= 0.25 unless the spec explicitly opts out.
inline void guard_axis(const ExperimentSpec& s, const std::vector<cplx>& zs) {
  for (auto z : zs) {
    if (z.imag() == 0.0) fail(ErrorKind::InvalidSpec, "points must lie off the real axis");
    if (std::abs(z.imag()) < kNearAxisGuard && !flag(s, "allow_near_axis"))
      fail(ErrorKind::InvalidSpec, "|Im z| < 0.25 requires allow_near_axis");
  }
}

inline std::size_t dimension(const ExperimentSpec& s, std::size_t fallback) {
  const auto n = number<long long>(s, "n", static_cast<long long>(fallback));
  if (n < 1) fail(ErrorKind::InvalidSpec, "n must be positive");
  return static_cast<std::size_t>(n);
}

inline VerblunskyXi haar_xi(std::size_t n, SeededStream& s) { return VerblunskyXi(cue_verblunsky(n, s)); }

inline double positive(const ExperimentSpec& s, const char* key, double fallback) {
  const double v = number<double>(s, key, fallback);
  if (!(v > 0)) fail(ErrorKind::InvalidSpec, std::string("parameter '") + key + "' must be positive");
  return v;
}

inline std::vector<double> to_doubles(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace harness_detail

inline EstimateReport run_experiment(const ExperimentSpec& spec) {
  using namespace harness_detail;
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto R = spec.replicas;
  const auto seed = spec.master_seed;
  const auto W = spec.workers;
  EstimateReport rep;
  nlohmann::json details = nlohmann::json::object();

  if (spec.kind == "ratio" || spec.kind == "abs_ratio_sq") {
    const cplx z = point(spec, "z"), zp = point(spec, "zp");
    guard_axis(spec, {z, zp});
    const auto n = dimension(spec, 64);
    details["n"] = n;
    const bool abs2 = spec.kind == "abs_ratio_sq";
    rep = mc_estimate([&](SeededStream& s) { return haar_xi(n, s); },
                      [&](const VerblunskyXi& xi) {
                        const cplx r = xi.xi(zp) / xi.xi(z);
                        return abs2 ? cplx(std::norm(r)) : r;
                      },
                      R, seed, W);
    rep.complex_valued = !abs2;
    if (abs2)
      attach_target(rep, expected_abs_ratio_sq(z, zp), "expected_abs_ratio_sq");
    else
      attach_target(rep, expected_ratio(z, zp), "expected_ratio");
  } else if (spec.kind == "joint_ratio") {
    RatioQuery q{points(spec, "zps"), points(spec, "zs")};
    auto all = q.numerator;
    all.insert(all.end(), q.denominator.begin(), q.denominator.end());
    guard_axis(spec, all);
    const auto n = dimension(spec, 64);
    details["n"] = n;
    const cplx target = expected_joint_ratio_finite_n(q, n);
    details["limit"] = complex_to_json(expected_joint_ratio(q));
    rep = mc_estimate([&](SeededStream& s) { return haar_xi(n, s); },
                      [&](const VerblunskyXi& xi) {
                        cplx r = 1.0;
                        for (std::size_t i = 0; i < q.size(); ++i) r *= xi.xi(q.numerator[i]) / xi.xi(q.denominator[i]);
                        return r;
                      },
                      R, seed, W);
    rep.complex_valued = true;
    attach_target(rep, target, "expected_joint_ratio_finite_n");
  } else if (spec.kind == "m1") {
    const cplx z = point(spec, "z");
    guard_axis(spec, {z});
    const auto n = dimension(spec, 128);
    details["n"] = n;
    rep = mc_estimate([&](SeededStream& s) { return haar_xi(n, s); },
                      [&](const VerblunskyXi& xi) { return xi.logderiv(z); }, R, seed, W);
    rep.complex_valued = true;
    attach_target(rep, m1(z), "m1");
  } else if (spec.kind == "m2") {
    const cplx z = point(spec, "z"), zp = point(spec, "zp");
    guard_axis(spec, {z, zp});
    const auto n = dimension(spec, 128);
    const bool conj = flag(spec, "conjugate");
    details["n"] = n;
    details["conjugate"] = conj;
    rep = mc_estimate([&](SeededStream& s) { return haar_xi(n, s); },
                      [&](const VerblunskyXi& xi) {
                        const cplx b = xi.logderiv(zp);
                        return xi.logderiv(z) * (conj ? std::conj(b) : b);
                      },
                      R, seed, W);
    rep.complex_valued = true;
    if (conj)
      attach_target(rep, m2_conj(z, zp), "m2_conj");
    else
      attach_target(rep, m2(z, zp), "m2");
  } else if (spec.kind == "count_variance" || spec.kind == "count_tails") {
    const double L = positive(spec, "L", 1.0);
    const auto mesh = static_cast<std::size_t>(number<long long>(spec, "mesh", 0));
    const DppSampler sampler(0.5 * L, mesh);
    details["L"] = L;
    details["mesh"] = sampler.mesh();
    const auto counts = run_replicas([&](SeededStream& s) { return sampler.sample(s).points.size(); }, R, seed, W);
    const auto xs = to_doubles(counts);
    const double exact = exact_count_variance(L);
    details["mean_count"] = mean_estimate(xs).value;
    if (spec.kind == "count_variance") {
      if (R < 3) fail(ErrorKind::InvalidSpec, "count_variance needs at least 3 replicas");
      const auto v = variance_estimate(xs);
      rep.estimate = v.value;
      rep.standard_error = v.standard_error;
      details["variance_bound"] = count_variance_bound(L);
      details["bernoulli_variance"] = sampler.count_variance();
      rep.replicas_used = R;
      rep.seed = seed;
      attach_target(rep, exact, "exact_count_variance");
    } else {
      const double t = number<double>(spec, "t", 2.0);
      std::vector<double> hit;
      for (double c : xs) hit.push_back(std::abs(c - L) >= t ? 1.0 : 0.0);
      const auto m = mean_estimate(hit);
      rep.estimate = m.value;
      if (R > 1) rep.standard_error = m.standard_error;
      rep.replicas_used = R;
      rep.seed = seed;
      details["t"] = t;
      attach_target(rep, count_tail_bound(t, exact), "count_tail_bound", Comparison::UpperBound);
    }
  } else if (spec.kind == "blue_noise") {
    const double sigma = positive(spec, "sigma", 1.0);
    const double L = positive(spec, "L", 1.0);
    const auto f = rescale(gaussian_bump(sigma), L);
    const double A = std::ceil(6.0 * sigma * L);
    const auto mesh = static_cast<std::size_t>(number<long long>(spec, "mesh", 0));
    const DppSampler sampler(A, mesh);
    details["sigma"] = sigma;
    details["L"] = L;
    details["window"] = A;
    const auto xs = run_replicas([&](SeededStream& s) { return linear_statistic(sampler.sample(s), f).real(); }, R,
                                 seed, W);
    if (R < 3) fail(ErrorKind::InvalidSpec, "blue_noise needs at least 3 replicas");
    const auto v = variance_estimate(xs);
    rep.estimate = v.value;
    rep.standard_error = v.standard_error;
    rep.replicas_used = R;
    rep.seed = seed;
    details["blue_noise_limit"] = blue_noise_cov(f, f).real();
    attach_target(rep, sine_kernel_variance(f), "sine_kernel_variance");
  } else if (spec.kind == "stieltjes") {
    const cplx z = point(spec, "z");
    guard_axis(spec, {z});
    const double A = positive(spec, "A", 20.0);
    const auto mesh = static_cast<std::size_t>(number<long long>(spec, "mesh", 0));
    const DppSampler sampler(A, mesh);
    const auto f = stieltjes_function(z);
    details["A"] = A;
    // xi'/xi(z) = i pi + int f_z + X_{f_z}, with X_{f_z} taken over the window.
    rep = mc_estimate([&](SeededStream& s) { return sampler.sample(s); },
                      [&](const PointSample& p) { return kI * kPi + f.integral + windowed_statistic(p, f).value; },
                      R, seed, W);
    rep.complex_valued = true;
    attach_target(rep, m1(z), "m1");
  } else if (spec.kind == "coupling_convergence") {
    const auto n = dimension(spec, 128);
    const auto K = static_cast<long long>(std::floor(std::pow(static_cast<double>(n), 0.25)));
    details["n"] = n;
    details["k_max"] = K;
    const auto xs = run_replicas(
        [&](SeededStream& s) {
          SpectralChain chain(s.master_seed(), s.stream_index());
          chain.extend_to(n);
          const auto a = chain.spectrum();
          chain.extend_to(2 * n);
          const auto b = chain.spectrum();
          double worst = 0.0;
          for (long long k = -K; k <= K; ++k) worst = std::max(worst, std::abs(b.y(k) - a.y(k)));
          return worst;
        },
        R, seed, W);
    const auto m = mean_estimate(xs);
    rep.estimate = m.value;
    if (R > 1) rep.standard_error = m.standard_error;
    rep.replicas_used = R;
    rep.seed = seed;
    details["median"] = quantile(xs, 0.5);
    attach_target(rep, 0.0, "coupling_limit", Comparison::Diagnostic);
  } else if (spec.kind == "sampler_equivalence") {
    const double L = positive(spec, "L", 5.0);
    const auto n = dimension(spec, 512);
    const auto mesh = static_cast<std::size_t>(number<long long>(spec, "mesh", 0));
    const double tol = positive(spec, "max_distance", 0.02);
    // Counts on [0, L]: coupling windows directly, dpp windows centred and
    // shifted (the sine process is translation invariant).
    const DppSampler sampler(0.5 * L, mesh);
    const auto dpp = run_replicas([&](SeededStream& s) { return sampler.sample(s).points.size(); }, R, seed, W);
    const auto cpl = run_replicas(
        [&](SeededStream& s) {
          auto sub = s.substream(1);
          return sample_via_coupling(n, L, sub).count(0.0, L);
        },
        R, seed, W);
    rep.estimate = ks_distance(to_doubles(dpp), to_doubles(cpl));
    rep.replicas_used = R;
    rep.seed = seed;
    details["n"] = n;
    details["L"] = L;
    details["dpp_mean"] = mean_estimate(to_doubles(dpp)).value;
    details["coupling_mean"] = mean_estimate(to_doubles(cpl)).value;
    attach_target(rep, tol, "ks_tolerance", Comparison::UpperBound);
  }
  rep.kind = spec.kind;
  rep.seed = seed;
  rep.details = details;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace microxi
