// Deterministic synthetic HMD-format period life tables used as test
// fixtures. Two populations are generated: a female-like one whose year
// dynamics are linear in the alpha = 0.3544 transform space and a male-like
// one linear in the ilr (alpha = 0) space, each a two-factor surface
// (old-age mode shift + infant decline) with AR(1) score noise and small
// orthogonal curve noise.

#include "coda/composition.hpp"
#include "coda/lifetable.hpp"
#include "coda/metrics.hpp"
#include "coda/pca.hpp"
#include "coda/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

using namespace coda;

namespace {

constexpr int kYears = 100;
constexpr int kFirstYear = 1921;

struct SurfaceParams {
  double alpha0;          // transform space in which dynamics are linear
  double mode_start, mode_end;   // Gompertz modal age path
  double mode_shape;             // u^shape: mode shift accelerates late
  double clock_center = 0.55, clock_width = 0.16;  // logistic transition
  double clock_linear = 0.10;   // residual steady drift through the century
  double gompertz_c_start, gompertz_c_end;  // compression: slope rises
  double w_inf_start, w_inf_end; // infant share of deaths
  double infant_shape;           // 1-(1-u)^shape: infant decline is early
  double infant_decay;           // e^{-x/decay} infant spike
  double w_acc_start, w_acc_end; // accident-hump share
  double acc_mean, acc_sd;
  double w_bg_start, w_bg_end;   // broad adult background share
  double bg_mean, bg_sd;
  // noise, all in transform space
  double factor2_boost;  // amplifies the 2nd factor's deterministic path
  double taper_age = 92.0;  // logistic taper of the boosted factor's tail
  double noise_alpha = 0.0;  // space the fluctuations are applied in
  double noise_split = 0.5;  // variance share of the trend-space pass
  double score_noise_1, score_noise_2;  // AR(1) innovation sd on the factors
  double score_ar1;
  double ortho_noise;  // sd multiplier on components 3.. (decaying)
  double log_bend = 0.0;   // fraction of every age's log-residual bent away
  double bend_alpha = 0.17;  // space whose K=2 fit the bend targets
  unsigned seed;
};

Vector normalized(Vector v) { return v / v.sum(); }

Vector infant_spike(double decay) {
  Vector v(kAgeGridSize);
  for (int x = 0; x < kAgeGridSize; ++x) v[x] = std::exp(-x / decay);
  return normalized(v);
}

Vector gaussian_bump(double mean, double sd) {
  Vector v(kAgeGridSize);
  for (int x = 0; x < kAgeGridSize; ++x) {
    const double u = (x - mean) / sd;
    v[x] = std::exp(-0.5 * u * u);
  }
  return normalized(v);
}

// Gompertz age-at-death distribution with modal age `mode`, hazard
// decelerating toward a plateau at extreme ages (Kannisto-style), open
// 110+ group absorbing the survivors
Vector gompertz_density(double mode, double c) {
  const double b = c * std::exp(-c * mode);
  const double plateau = 0.5;
  Vector v(kAgeGridSize);
  double survivors = 1.0;
  for (int x = 0; x < kAgeGridSize; ++x) {
    const double hazard = b * std::exp(c * x);
    const double capped = hazard / (1.0 + hazard / plateau);
    const double q =
        (x == kMaxAge) ? 1.0 : capped / (1.0 + 0.5 * capped);
    v[x] = survivors * q;
    survivors *= (1.0 - q);
  }
  return normalized(v);
}

struct MixtureShapes {
  Vector spike, hump, background;
};

// one death-count curve given the positions of the two driver clocks
Vector surface_row(const SurfaceParams& sp, const MixtureShapes& shapes,
                   double mode_clock, double infant_clock) {
  const double mode = sp.mode_start + (sp.mode_end - sp.mode_start) * mode_clock;
  const double w_inf = std::exp(
      std::log(sp.w_inf_start) +
      (std::log(sp.w_inf_end) - std::log(sp.w_inf_start)) * infant_clock);
  const double w_acc = sp.w_acc_start + (sp.w_acc_end - sp.w_acc_start) * infant_clock;
  const double w_bg = sp.w_bg_start + (sp.w_bg_end - sp.w_bg_start) * infant_clock;
  const double w_old = 1.0 - w_inf - w_acc - w_bg;
  const double slope = sp.gompertz_c_start +
                       (sp.gompertz_c_end - sp.gompertz_c_start) * mode_clock;
  Vector d = w_inf * shapes.spike + w_acc * shapes.hump +
             w_bg * shapes.background + w_old * gompertz_density(mode, slope);
  return normalized(d);
}

// The two drivers move on different clocks: old-age compression accelerates
// late, the infant decline happened early. That difference is what
// separates the surface into two factors.
// S-shaped transition: plateau, sweep, plateau-with-drift. The plateaus let
// every swept age spend time near both extremes (that is where the sample
// variance of a bounded path lives); the residual drift keeps the recent
// trend alive.
double mode_clock_at(const SurfaceParams& sp, int t) {
  const double u = t / double(kYears - 1);
  auto logistic = [&](double v) {
    return 1.0 / (1.0 + std::exp(-(v - sp.clock_center) / sp.clock_width));
  };
  const double lo = logistic(0.0), hi = logistic(1.0);
  const double s = (logistic(u) - lo) / (hi - lo);
  const double base = std::pow(u, sp.mode_shape);
  const double blended = (1.0 - sp.clock_linear) * s + sp.clock_linear * base;
  return blended;
}
double infant_clock_at(const SurfaceParams& sp, int t) {
  return 1.0 - std::pow(1.0 - t / double(kYears - 1), sp.infant_shape);
}

// smooth deterministic death-count surface, rows on the simplex
Matrix deterministic_surface(const SurfaceParams& sp) {
  Matrix surface(kYears, kAgeGridSize);
  const MixtureShapes shapes{infant_spike(sp.infant_decay),
                             gaussian_bump(sp.acc_mean, sp.acc_sd),
                             gaussian_bump(sp.bg_mean, sp.bg_sd)};
  for (int t = 0; t < kYears; ++t) {
    surface.row(t) =
        surface_row(sp, shapes, mode_clock_at(sp, t), infant_clock_at(sp, t))
            .transpose();
  }
  return surface;
}

TransformSpec space_for(double alpha) {
  return alpha > 0.0 ? TransformSpec::make_alpha(alpha, kAgeGridSize)
                     : TransformSpec::make_ilr(kAgeGridSize);
}

// Stage 2: year-to-year fluctuations. The dominant fluctuation is noise in
// the PACE of improvement: AR(1) perturbations of the two driver clocks,
// which move each year's curve along the surface's own two-driver manifold.
// Every transform's two-factor plane is tangent to that manifold, so fits
// absorb this variation in any space, as they do for real mortality data.
// Small independent log-space noise on the higher components supplies the
// irreducible residual.
Matrix noised_surface(const SurfaceParams& sp) {
  const MixtureShapes shapes{infant_spike(sp.infant_decay),
                             gaussian_bump(sp.acc_mean, sp.acc_sd),
                             gaussian_bump(sp.bg_mean, sp.bg_sd)};

  // boost geometry from the clean surface, as in trend_surface
  const TransformSpec trend_spec = space_for(sp.alpha0);
  const Matrix z_det = transform_series(deterministic_surface(sp), trend_spec);
  const PCDecomposition pca = fit_pca(z_det);
  const Matrix h = helmert_submatrix(kAgeGridSize);
  Vector phi2_clr = h.transpose() * pca.components.row(1).transpose();
  for (int x = 0; x < kAgeGridSize; ++x) {
    phi2_clr[x] /= 1.0 + std::exp((x - sp.taper_age) / 3.0);
    phi2_clr[x] *= 1.0 - std::exp(-x / 2.5);
  }
  Vector shape = h * phi2_clr;
  const Vector phi1 = pca.components.row(0).transpose();
  shape -= shape.dot(phi1) * phi1;
  shape.normalize();
  const double score2_lo = pca.scores.col(1).minCoeff();
  const double score2_hi = pca.scores.col(1).maxCoeff();
  const double score2_pad = 0.15 * (score2_hi - score2_lo);

  std::mt19937_64 rng(sp.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto ar1_path = [&](double sd) {
    Vector path(kYears);
    const double stationary = sd / std::sqrt(1.0 - sp.score_ar1 * sp.score_ar1);
    double state = stationary * gauss(rng);
    for (int t = 0; t < kYears; ++t) {
      path[t] = state;
      state = sp.score_ar1 * state + sd * gauss(rng);
    }
    return path;
  };
  const Vector mode_jitter = ar1_path(sp.score_noise_1);
  const Vector infant_jitter = ar1_path(sp.score_noise_2);

  Matrix z(kYears, kAgeGridSize - 1);
  for (int t = 0; t < kYears; ++t) {
    const Vector row =
        surface_row(sp, shapes, mode_clock_at(sp, t) + mode_jitter[t],
                    infant_clock_at(sp, t) + infant_jitter[t]);
    Vector z_row = alpha_transform(row, trend_spec);
    // jitter excursions outside the deterministic score range would let the
    // amplified term clamp the inverse; clip the boosted score
    const double score2 =
        std::clamp<double>(pca.components.row(1) * (z_row - pca.mean),
                           score2_lo - score2_pad, score2_hi + score2_pad);
    z_row += (sp.factor2_boost - 1.0) * score2 * shape;
    z.row(t) = z_row.transpose();
  }
  int clamped = 0;
  Matrix d = inverse_transform_series(z, trend_spec, &clamped);
  if (clamped > 0) {
    std::fprintf(stderr, "fixture generator: %d clamped rows (reduce jitter)\n",
                 clamped);
    std::exit(1);
  }

  // The infant ages' log-paths are bent toward the span of the system's own
  // two factors (real infant mortality co-moved with the overall decline in
  // just this way); without this the infant cells alone dominate the
  // log-space truncation error.
  const TransformSpec log_spec = space_for(0.0);
  const TransformSpec bend_spec = space_for(sp.bend_alpha);
  for (int iteration = 0; iteration < 4; ++iteration) {
    const PCDecomposition k2 =
        truncate(fit_pca(transform_series(d, bend_spec)), 2);
    const Matrix fitted = inverse_transform_series(k2.reconstruct(), bend_spec);
    for (int t = 0; t < kYears; ++t) {
      for (int x = 0; x < kAgeGridSize; ++x) {
        const double infant = 1.0 / (1.0 + std::exp((x - 3.0) / 0.9));
        const double weight = std::max(infant, sp.log_bend);
        const double log_resid = std::log(d(t, x)) - std::log(fitted(t, x));
        d(t, x) *= std::exp(-weight * log_resid);
      }
      d.row(t) /= d.row(t).sum();
    }
  }

  // residual noise in log space
  Matrix zl = transform_series(d, log_spec);
  const PCDecomposition pca_log = fit_pca(zl);
  for (int j = 2; j < std::min(8, pca_log.K); ++j) {
    const double sd = sp.ortho_noise * std::pow(0.6, j - 2);
    for (int t = 0; t < kYears; ++t) {
      zl.row(t) += sd * gauss(rng) * pca_log.components.row(j);
    }
  }
  return inverse_transform_series(zl, log_spec);
}

// ----------------------------------------------------------- HMD writing --

struct LifeTableRow {
  double mx, qx, ax, lx, dx, Lx, Tx, ex;
};

void write_hmd_file(const std::string& path, const std::string& banner,
                    const Matrix& compositions) {
  std::ofstream out(path);
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", path.c_str());
    std::exit(1);
  }
  out << banner << "\n\n";
  out << "  Year          Age             mx              qx              ax"
         "              lx              dx              Lx              Tx"
         "              ex\n";

  char buf[256];
  for (int t = 0; t < compositions.rows(); ++t) {
    std::vector<LifeTableRow> rows(kAgeGridSize);
    double l = kDefaultRadix;
    for (int x = 0; x < kAgeGridSize; ++x) {
      const double d = compositions(t, x) * kDefaultRadix;
      double q = (l > 0.0) ? d / l : 1.0;
      if (x == kMaxAge) q = 1.0;
      q = std::min(q, 1.0);
      const double a = (x == 0) ? 0.30 : 0.5;
      rows[x].qx = q;
      rows[x].ax = a;
      rows[x].mx = q / (1.0 - (1.0 - a) * q);
      rows[x].lx = l;
      rows[x].dx = d;
      rows[x].Lx = l - (1.0 - a) * d;
      l -= d;
    }
    double cumulative = 0.0;
    for (int x = kAgeGridSize - 1; x >= 0; --x) {
      cumulative += rows[x].Lx;
      rows[x].Tx = cumulative;
      rows[x].ex = rows[x].lx > 0.0 ? cumulative / rows[x].lx : 0.0;
    }
    for (int x = 0; x < kAgeGridSize; ++x) {
      const char* age_label = nullptr;
      char age_buf[8];
      if (x == kMaxAge) {
        age_label = "110+";
      } else {
        std::snprintf(age_buf, sizeof(age_buf), "%d", x);
        age_label = age_buf;
      }
      std::snprintf(buf, sizeof(buf),
                    "  %4d        %5s        %8.5f        %7.5f        %4.2f"
                    "        %8.0f        %8.0f        %8.0f        %9.0f"
                    "        %6.2f\n",
                    kFirstYear + t, age_label, rows[x].mx, rows[x].qx,
                    rows[x].ax, std::round(rows[x].lx), std::round(rows[x].dx),
                    std::round(rows[x].Lx), std::round(rows[x].Tx), rows[x].ex);
      out << buf;
    }
  }
}

SurfaceParams female_params() {
  SurfaceParams sp;
  sp.alpha0 = 0.3544;
  sp.mode_start = 67.0;
  sp.mode_end = 92.0;
  sp.mode_shape = 1.9;
  sp.gompertz_c_start = 0.048;
  sp.gompertz_c_end = 0.155;
  sp.w_inf_start = 0.100;
  sp.w_inf_end = 0.004;
  sp.infant_shape = 2.6;
  sp.infant_decay = 1.3;
  sp.w_acc_start = 0.016;
  sp.w_acc_end = 0.006;
  sp.acc_mean = 21.0;
  sp.acc_sd = 9.0;
  sp.w_bg_start = 0.055;
  sp.w_bg_end = 0.018;
  sp.bg_mean = 52.0;
  sp.bg_sd = 17.0;
  sp.factor2_boost = 2.2;
  sp.score_noise_1 = 0.050;   // mode-clock jitter
  sp.score_noise_2 = 0.060;   // infant-clock jitter
  sp.score_ar1 = 0.35;
  sp.ortho_noise = 0.05;
  sp.log_bend = 0.8;
  sp.bend_alpha = 0.155;
  sp.clock_center = 0.55;
  sp.clock_width = 0.12;
  sp.clock_linear = 0.10;
  sp.seed = 20210321u;
  return sp;
}

SurfaceParams male_params() {
  SurfaceParams sp;
  sp.alpha0 = 0.0;
  sp.mode_start = 69.0;
  sp.mode_end = 84.0;
  sp.mode_shape = 1.9;
  sp.gompertz_c_start = 0.078;
  sp.gompertz_c_end = 0.108;
  sp.w_inf_start = 0.105;
  sp.w_inf_end = 0.0045;
  sp.infant_shape = 2.6;
  sp.infant_decay = 1.3;
  sp.w_acc_start = 0.030;
  sp.w_acc_end = 0.011;
  sp.acc_mean = 22.0;
  sp.acc_sd = 10.0;
  sp.w_bg_start = 0.065;
  sp.w_bg_end = 0.022;
  sp.bg_mean = 50.0;
  sp.bg_sd = 18.0;
  sp.factor2_boost = 3.5;
  sp.score_noise_1 = 0.040;
  sp.score_noise_2 = 0.045;
  sp.score_ar1 = 0.35;
  sp.ortho_noise = 0.10;
  sp.log_bend = 0.0;
  sp.bend_alpha = 0.0;   // infant bend targets the male data's own space
  sp.clock_center = 0.55;
  sp.clock_width = 0.14;
  sp.clock_linear = 0.12;
  sp.seed = 19450608u;
  return sp;
}

void report(const char* label, const Matrix& d, double alpha0) {
  // quick diagnostics used while calibrating the generator
  for (const bool use_alpha0 : {false, true}) {
    const TransformSpec spec =
        use_alpha0 && alpha0 > 0.0
            ? TransformSpec::make_alpha(alpha0, kAgeGridSize)
            : TransformSpec::make_ilr(kAgeGridSize);
    const Matrix z = transform_series(d, spec);
    const PCDecomposition pca = fit_pca(z);
    const int k = select_k(pca.eigenvalues, static_cast<int>(d.rows()));
    const PCDecomposition k2 = truncate(pca, 2);
    int clamps = 0;
    const Matrix fitted =
        inverse_transform_series(k2.reconstruct(), spec, &clamps);
    const auto gof = goodness_of_fit(d, fitted);
    std::printf(
        "%s %-14s K=%d lambda(1..4)=%.3g %.3g %.3g %.3g  R2(K2)=%.4f "
        "RMSE=%.5f\n",
        label, spec.name().c_str(), k, pca.eigenvalues[0], pca.eigenvalues[1],
        pca.eigenvalues[2], pca.eigenvalues[3], gof.r2, gof.rmse);
  }
  {
    const Vector age_means = d.colwise().mean();
    const Matrix centered = d.rowwise() - age_means.transpose();
    const Vector sst_by_age = centered.array().square().colwise().sum();
    Vector tmp = sst_by_age;
    std::printf("%s SST=%.3f hot:", label, sst_by_age.sum());
    for (int rank = 0; rank < 6; ++rank) {
      int arg = 0;
      tmp.maxCoeff(&arg);
      std::printf(" %d(%.0f%%)", arg, 100.0 * sst_by_age[arg] / sst_by_age.sum());
      tmp[arg] = -1.0;
    }
    std::printf("\n");
  }
  std::printf("%s zero cells: %d, min cell: %.3g\n", label,
              static_cast<int>((d.array() == 0.0).count()), d.minCoeff());
  {
    // where does the ilr K=2 fit miss? per-age SSE shares
    const TransformSpec spec = TransformSpec::make_ilr(kAgeGridSize);
    const PCDecomposition k2 =
        truncate(fit_pca(transform_series(d, spec)), 2);
    int clamps = 0;
    const Matrix fitted = inverse_transform_series(k2.reconstruct(), spec, &clamps);
    const Vector sse_by_age = (d - fitted).array().square().colwise().sum();
    const double total = sse_by_age.sum();
    std::printf("%s ilr-K2 SSE hot ages:", label);
    Vector tmp = sse_by_age;
    for (int rank = 0; rank < 8; ++rank) {
      int arg = 0;
      tmp.maxCoeff(&arg);
      std::printf(" %d(%.0f%%)", arg, 100.0 * sse_by_age[arg] / total);
      tmp[arg] = -1.0;
    }
    std::printf("\n");
  }
}

}  // namespace

bool apply_override(SurfaceParams& sp, const std::string& key, double value) {
  if (key == "mode_end") sp.mode_end = value;
  else if (key == "mode_shape") sp.mode_shape = value;
  else if (key == "boost") sp.factor2_boost = value;
  else if (key == "s1") sp.score_noise_1 = value;
  else if (key == "s2") sp.score_noise_2 = value;
  else if (key == "ortho") sp.ortho_noise = value;
  else if (key == "c0") sp.gompertz_c_start = value;
  else if (key == "c1") sp.gompertz_c_end = value;
  else if (key == "taper") sp.taper_age = value;
  else if (key == "mode0") sp.mode_start = value;
  else if (key == "noise_alpha") sp.noise_alpha = value;
  else if (key == "split") sp.noise_split = value;
  else if (key == "bend") sp.log_bend = value;
  else if (key == "bend_alpha") sp.bend_alpha = value;
  else if (key == "clock_center") sp.clock_center = value;
  else if (key == "clock_width") sp.clock_width = value;
  else if (key == "clock_linear") sp.clock_linear = value;
  else if (key == "winf0") sp.w_inf_start = value;
  else if (key == "winf1") sp.w_inf_end = value;
  else return false;
  return true;
}

int main(int argc, char** argv) {
  std::string out_dir = ".";
  bool diagnostics = false;
  SurfaceParams fp = female_params();
  SurfaceParams mp = male_params();
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out" && i + 1 < argc) {
      out_dir = argv[++i];
    } else if (arg == "--report") {
      diagnostics = true;
    } else if ((arg == "--female" || arg == "--male") && i + 1 < argc) {
      // calibration override: --female key=value
      const std::string kv = argv[++i];
      const auto eq = kv.find('=');
      SurfaceParams& sp = (arg == "--female") ? fp : mp;
      if (eq == std::string::npos ||
          !apply_override(sp, kv.substr(0, eq), std::stod(kv.substr(eq + 1)))) {
        std::fprintf(stderr, "bad override %s\n", kv.c_str());
        return 1;
      }
    } else {
      std::fprintf(stderr,
                   "usage: make_fixture [--out DIR] [--report] "
                   "[--female k=v] [--male k=v]\n");
      return 1;
    }
  }

  const Matrix female = noised_surface(fp);
  const Matrix male = noised_surface(mp);

  if (diagnostics) {
    report("F", female, fp.alpha0);
    report("M", male, mp.alpha0);
  }

  write_hmd_file(out_dir + "/AUS_female_lt.txt",
                 "Synthetica, Life tables (period 1x1), Females\tLast modified: "
                 "fixture generator; Methods Protocol: v6 (2017)",
                 female);
  write_hmd_file(out_dir + "/AUS_male_lt.txt",
                 "Synthetica, Life tables (period 1x1), Males\tLast modified: "
                 "fixture generator; Methods Protocol: v6 (2017)",
                 male);
  std::printf("fixtures written to %s\n", out_dir.c_str());
  return 0;
}
