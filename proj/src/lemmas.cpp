#include "fbmhd/lemmas.hpp"

#include "fbmhd/elliptic.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace fbmhd {

namespace {

double bbar_rhs(const Grid& g, const VolumeField& f, double bbar1, double bbar2) {
  if (bbar2 == 0.0) throw std::invalid_argument("poincare: bbar2 must be nonzero");
  const double scale = std::max(1.0, f.abs().maxCoeff());
  if (bottom_row(f).abs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("poincare: f must vanish on the bottom");
  const VolumeField bf = bbar1 * ddx1(g, f) + bbar2 * ddx2(g, f);
  return l2_squared(g, bf) / (bbar2 * bbar2);
}

double vector_norm(const Grid& g, const VectorVolumeField& v, int m) {
  return std::hypot(volume_norm(g, v.c1, m), volume_norm(g, v.c2, m));
}

double chebyshev(int n, double x) { return std::cos(n * std::acos(std::clamp(x, -1.0, 1.0))); }

}  // namespace

InequalityCheck check_poincare_volume(const Grid& g, const VolumeField& f, double bbar1,
                                      double bbar2) {
  InequalityCheck c;
  c.rhs = bbar_rhs(g, f, bbar1, bbar2);
  c.lhs = l2_squared(g, f);
  c.pass = c.lhs <= c.rhs * (1.0 + 1e-6);
  return c;
}

InequalityCheck check_poincare_trace(const Grid& g, const VolumeField& f, double bbar1,
                                     double bbar2) {
  InequalityCheck c;
  c.rhs = bbar_rhs(g, f, bbar1, bbar2);
  c.lhs = integrate_surface(g, top_row(f).square());
  c.pass = c.lhs <= c.rhs * (1.0 + 1e-6);
  return c;
}

double check_normal_trace(const Grid& g, const Geometry& geo, const VectorVolumeField& v) {
  const NormalField n = normal(g, geo.h);
  const SurfaceField vn = top_row(v.c1) * n.n1 + top_row(v.c2) * n.n2;
  const double lhs = surface_norm(g, vn, -0.5);
  const double rhs = std::sqrt(l2_squared(g, v.c1) + l2_squared(g, v.c2)) +
                     std::sqrt(l2_squared(g, div_phi(g, geo, v)));
  if (rhs == 0.0) {
    if (lhs == 0.0) return 0.0;
    throw std::domain_error("normal trace: zero denominator");
  }
  return lhs / rhs;
}

double fractional_volume_norm(const Grid& g, const VolumeField& f, double s) {
  const double twice = 2.0 * s;
  if (s < 0.0 || std::abs(twice - std::round(twice)) > 1e-12)
    throw std::invalid_argument("fractional norm: s must be a nonnegative multiple of 1/2");
  const int lo = static_cast<int>(std::floor(s));
  if (static_cast<double>(lo) == s) return volume_norm(g, f, lo);
  return std::sqrt(volume_norm(g, f, lo) * volume_norm(g, f, lo + 1));
}

double check_extension(const Grid& g, const SurfaceField& h, double s) {
  if (s != 0.5 && s != 1.0 && s != 1.5 && s != 2.0)
    throw std::invalid_argument("extension: s must be 0.5, 1, 1.5 or 2");
  const double rhs = surface_norm(g, h, s - 0.5);
  if (rhs == 0.0) return 0.0;
  return fractional_volume_norm(g, poisson_extend(g, h), s) / rhs;
}

double check_hodge(const Grid& g, const VectorVolumeField& v, int r) {
  if (r != 1 && r != 2) throw std::invalid_argument("hodge: r must be 1 or 2");
  const double lhs = vector_norm(g, v, r);
  const double rhs = vector_norm(g, v, 0) + volume_norm(g, flat_curl(g, v), r - 1) +
                     volume_norm(g, flat_div(g, v), r - 1) +
                     surface_norm(g, top_row(v.c2), r - 0.5);
  if (rhs == 0.0) return 0.0;
  return lhs / rhs;
}

BandLimited::BandLimited(std::mt19937_64& rng, int max_mode, int max_degree)
    : max_mode_(max_mode), max_degree_(max_degree) {
  std::normal_distribution<double> nd;
  const size_t n = static_cast<size_t>(max_mode + 1) * (max_degree + 1);
  a_.resize(n);
  b_.resize(n);
  for (int m = 0; m <= max_mode; ++m)
    for (int d = 0; d <= max_degree; ++d) {
      const double w = 1.0 / (1.0 + m + d);
      const size_t k = static_cast<size_t>(m) * (max_degree + 1) + d;
      a_[k] = w * nd(rng);
      b_[k] = m == 0 ? 0.0 : w * nd(rng);
    }
}

double BandLimited::operator()(double x1, double x2) const {
  double acc = 0.0;
  for (int m = 0; m <= max_mode_; ++m) {
    const double c = std::cos(2.0 * EIGEN_PI * m * x1);
    const double s = std::sin(2.0 * EIGEN_PI * m * x1);
    for (int d = 0; d <= max_degree_; ++d) {
      const size_t k = static_cast<size_t>(m) * (max_degree_ + 1) + d;
      acc += (a_[k] * c + b_[k] * s) * chebyshev(d, 2.0 * x2 + 1.0);
    }
  }
  return acc;
}

std::vector<LemmaReport> run_lemma_suite(const LemmaSuiteOptions& o) {
  if (o.samples < 1) throw std::invalid_argument("lemma suite: samples must be positive");
  const Grid coarse(o.nx, o.nz);
  const Grid fine(2 * o.nx, 2 * o.nz - 1);
  std::mt19937_64 rng(o.seed);

  struct Sample {
    BandLimited f, u1, u2, surf;
  };
  std::vector<Sample> samples;
  samples.reserve(o.samples);
  for (int i = 0; i < o.samples; ++i)
    samples.push_back({BandLimited(rng, o.max_mode, o.max_degree),
                       BandLimited(rng, o.max_mode, o.max_degree),
                       BandLimited(rng, o.max_mode, o.max_degree),
                       BandLimited(rng, o.max_mode, 0)});

  std::vector<LemmaReport> out;

  // explicit constant: every sample must pass on both grids
  auto poincare = [&](const std::string& name, auto check) {
    LemmaReport r;
    r.name = name;
    r.samples = o.samples;
    for (int level = 0; level < 2; ++level) {
      const Grid& g = level == 0 ? coarse : fine;
      double worst = 0.0;
      for (const Sample& s : samples) {
        const VolumeField f = g.sample([&](double x1, double x2) { return (1.0 + x2) * s.f(x1, x2); });
        const InequalityCheck c = check(g, f, o.bbar1, o.bbar2);
        if (!c.pass) ++r.failures;
        if (c.rhs > 0.0) worst = std::max(worst, c.lhs / c.rhs);
      }
      (level == 0 ? r.max_ratio : r.max_ratio_fine) = worst;
    }
    r.refinement_ratio = r.max_ratio > 0.0 ? r.max_ratio_fine / r.max_ratio : 1.0;
    r.pass = r.failures == 0;
    out.push_back(r);
  };
  poincare("poincare_volume", check_poincare_volume);
  poincare("poincare_trace", check_poincare_trace);

  // implicit constants: worst-case ratio must be stable under refinement
  auto ratio = [&](const std::string& name, const std::function<double(const Grid&, const Sample&)>& f) {
    LemmaReport r;
    r.name = name;
    r.samples = o.samples;
    for (const Sample& s : samples) {
      r.max_ratio = std::max(r.max_ratio, f(coarse, s));
      r.max_ratio_fine = std::max(r.max_ratio_fine, f(fine, s));
    }
    r.refinement_ratio = r.max_ratio > 0.0 ? r.max_ratio_fine / r.max_ratio : 1.0;
    r.pass = std::abs(r.refinement_ratio - 1.0) <= o.stability_tol;
    if (!r.pass) r.failures = 1;
    out.push_back(r);
  };
  auto vec = [](const Grid& g, const Sample& s) {
    return VectorVolumeField{g.sample(std::cref(s.u1)), g.sample(std::cref(s.u2))};
  };

  ratio("normal_trace", [&](const Grid& g, const Sample& s) {
    const SurfaceField h = o.surface_amplitude * g.sample_surface([&](double x1) { return s.surf.surface(x1); });
    const Geometry geo = build_geometry(g, h - h.mean(), g.surface_zeros());
    return check_normal_trace(g, geo, vec(g, s));
  });
  for (double sv : {0.5, 1.0, 1.5, 2.0}) {
    char name[32];
    std::snprintf(name, sizeof name, "extension_s%g", sv);
    ratio(name, [&, sv](const Grid& g, const Sample& s) {
      return check_extension(g, g.sample_surface([&](double x1) { return s.surf.surface(x1); }), sv);
    });
  }
  for (int rv : {1, 2})
    ratio("hodge_r" + std::to_string(rv),
          [&, rv](const Grid& g, const Sample& s) { return check_hodge(g, vec(g, s), rv); });
  return out;
}

std::string lemma_report_json(const LemmaSuiteOptions& o, const std::vector<LemmaReport>& reports) {
  using nlohmann::json;
  json j;
  j["grid"] = {{"nx", o.nx}, {"nz", o.nz}};
  j["refined_grid"] = {{"nx", 2 * o.nx}, {"nz", 2 * o.nz - 1}};
  j["seed"] = o.seed;
  j["bbar"] = {o.bbar1, o.bbar2};
  j["stability_tol"] = o.stability_tol;
  bool all = true;
  for (const LemmaReport& r : reports) {
    j["lemmas"].push_back({{"name", r.name},
                           {"samples", r.samples},
                           {"max_ratio", r.max_ratio},
                           {"max_ratio_refined", r.max_ratio_fine},
                           {"refinement_ratio", r.refinement_ratio},
                           {"failures", r.failures},
                           {"pass", r.pass}});
    all = all && r.pass;
  }
  j["pass"] = all;
  return j.dump(2);
}

}  // namespace fbmhd
