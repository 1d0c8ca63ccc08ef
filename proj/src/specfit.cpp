#include "sns/specfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

namespace sns {

// Parameter layouts:
//   hole:              [center, w_broad, w_hole, amp_broad, amp_hole, offset]
//   two_lorentzians:   [center, separation, w, amp, offset]
//   single_lorentzian: [center, w, amp, offset]

const char* to_string(PeakModel m) {
  switch (m) {
    case PeakModel::hole:
      return "hole";
    case PeakModel::two_lorentzians:
      return "two_lorentzians";
    case PeakModel::single_lorentzian:
      return "single_lorentzian";
  }
  return "?";
}

PeakModel peak_model_from_string(const std::string& s) {
  if (s == "hole") return PeakModel::hole;
  if (s == "two_lorentzians") return PeakModel::two_lorentzians;
  if (s == "single_lorentzian") return PeakModel::single_lorentzian;
  throw DomainError("unknown peak model '" + s + "' (expected hole, two_lorentzians or single_lorentzian)");
}

double lorentzian(double f, double center, double fwhm) {
  const double u = 2.0 * (f - center) / fwhm;
  return 1.0 / (1.0 + u * u);
}

double evaluate_model(PeakModel m, std::span<const double> p, double f) {
  switch (m) {
    case PeakModel::hole:
      return p[3] * lorentzian(f, p[0], p[1]) - p[4] * lorentzian(f, p[0], p[2]) + p[5];
    case PeakModel::two_lorentzians:
      return p[3] * (lorentzian(f, p[0] - 0.5 * p[1], p[2]) + lorentzian(f, p[0] + 0.5 * p[1], p[2])) + p[4];
    case PeakModel::single_lorentzian:
      return p[2] * lorentzian(f, p[0], p[1]) + p[3];
  }
  return 0.0;
}

namespace {

std::size_t n_params(PeakModel m) {
  switch (m) {
    case PeakModel::hole:
      return 6;
    case PeakModel::two_lorentzians:
      return 5;
    case PeakModel::single_lorentzian:
      return 4;
  }
  return 0;
}

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct Problem {
  PeakModel model;
  std::vector<double> x;
  std::vector<double> y;

  VecX residuals(const VecX& p) const {
    VecX r(static_cast<Eigen::Index>(x.size()));
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    for (std::size_t i = 0; i < x.size(); ++i) r(static_cast<Eigen::Index>(i)) = y[i] - evaluate_model(model, ps, x[i]);
    return r;
  }

  // Jacobian of the model (not the residual), central differences.
  MatX jacobian(const VecX& p) const {
    MatX j(static_cast<Eigen::Index>(x.size()), p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double h = 1e-6 * std::max(std::abs(p(k)), 1e-3);
      VecX hi = p, lo = p;
      hi(k) += h;
      lo(k) -= h;
      j.col(k) = (residuals(lo) - residuals(hi)) / (2.0 * h);
    }
    return j;
  }
};

struct LmResult {
  VecX params;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

LmResult levenberg_marquardt(const Problem& prob, VecX p, const FitOptions& opt) {
  VecX r = prob.residuals(p);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  LmResult out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    const MatX j = prob.jacobian(p);
    const MatX jtj = j.transpose() * j;
    const VecX g = j.transpose() * r;
    bool accepted = false;
    while (!accepted) {
      MatX a = jtj;
      for (Eigen::Index k = 0; k < a.rows(); ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const VecX step = a.ldlt().solve(g);
      const VecX trial = p + step;
      const VecX rt = prob.residuals(trial);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct <= cost) {
        double rel = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
          rel = std::max(rel, std::abs(step(k)) / std::max(std::abs(trial(k)), 1e-12));
        }
        // cost reduction actually achieved and predicted by the linear model
        const double actual = cost - ct;
        const double predicted = 2.0 * step.dot(g) - step.dot(jtj * step);
        const bool flat = cost > 0.0 && actual <= opt.cost_tolerance * cost && predicted <= opt.cost_tolerance * cost;
        p = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (rel < opt.param_tolerance || flat) {
          out.params = p;
          out.cost = cost;
          out.converged = true;
          return out;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e14) {
          // No downhill step exists at any damping: the current point is the optimum.
          out.params = p;
          out.cost = cost;
          out.converged = true;
          return out;
        }
      }
    }
  }
  out.params = p;
  out.cost = cost;
  return out;
}

// All local maxima of the model over [lo, hi], ascending.
std::vector<double> model_maxima(PeakModel m, const VecX& p, double lo, double hi) {
  constexpr int kGrid = 4001;
  const std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
  const double dx = (hi - lo) / (kGrid - 1);
  std::vector<double> v(kGrid);
  for (int i = 0; i < kGrid; ++i) v[static_cast<std::size_t>(i)] = evaluate_model(m, ps, lo + dx * i);
  std::vector<double> out;
  for (int i = 1; i + 1 < kGrid; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (v[k] > v[k - 1] && v[k] >= v[k + 1]) {
      auto neg = [&](double f) { return -evaluate_model(m, ps, f); };
      const auto best = boost::math::tools::brent_find_minima(neg, lo + dx * (i - 1), lo + dx * (i + 1), 52);
      out.push_back(best.first);
    }
  }
  return out;
}

struct Maxima {
  std::vector<double> all;
  double splitting = 0.0;
  bool single = true;
};

Maxima split_from_maxima(PeakModel m, const VecX& p, double lo, double hi) {
  Maxima mx;
  mx.all = model_maxima(m, p, lo, hi);
  if (mx.all.size() >= 2) {
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    std::vector<double> sorted = mx.all;
    std::sort(sorted.begin(), sorted.end(), [&](double a, double b) {
      return evaluate_model(m, ps, a) > evaluate_model(m, ps, b);
    });
    mx.splitting = std::abs(sorted[0] - sorted[1]);
    mx.single = false;
  }
  return mx;
}

// Half-maximum extent of the structure above the baseline.
struct Extent {
  std::size_t peak = 0;
  double lo = 0.0, hi = 0.0;
  bool inside = false;
};

Extent half_max_extent(const std::vector<double>& x, const std::vector<double>& y, double base) {
  Extent e;
  e.peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = base + 0.5 * (y[e.peak] - base);
  std::size_t first = e.peak, last = e.peak;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] >= half) {
      first = i;
      break;
    }
  for (std::size_t i = y.size(); i-- > 0;)
    if (y[i] >= half) {
      last = i;
      break;
    }
  e.inside = first > 0 && last + 1 < y.size();
  e.lo = x[first];
  e.hi = x[last];
  return e;
}

// Two highest local maxima of lightly smoothed data, and the minimum between.
struct Landmarks {
  std::vector<std::size_t> maxima;  // by descending height, at most 2
  std::size_t dip = 0;
};

Landmarks landmarks(const std::vector<double>& y) {
  const std::size_t n = y.size();
  const std::size_t half = std::max<std::size_t>(2, n / 200);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0, hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += y[j];
    s[i] = acc / static_cast<double>(hi - lo + 1);
  }
  const double top = *std::max_element(s.begin(), s.end());
  const double floor = *std::min_element(s.begin(), s.end());
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] - floor > 0.3 * (top - floor)) cand.push_back(i);
  }
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  Landmarks l;
  if (cand.empty()) cand.push_back(static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin()));
  l.maxima.push_back(cand[0]);
  // the second maximum must be separated from the first by a real dip
  for (std::size_t k = 1; k < cand.size(); ++k) {
    const auto [a, b] = std::minmax(cand[0], cand[k]);
    const double low = *std::min_element(s.begin() + static_cast<std::ptrdiff_t>(a), s.begin() + static_cast<std::ptrdiff_t>(b) + 1);
    if (s[cand[k]] - low > 0.1 * (s[cand[k]] - floor)) {
      l.maxima.push_back(cand[k]);
      break;
    }
  }
  if (l.maxima.size() == 2) {
    const auto [a, b] = std::minmax(l.maxima[0], l.maxima[1]);
    l.dip = static_cast<std::size_t>(std::min_element(s.begin() + static_cast<std::ptrdiff_t>(a),
                                                      s.begin() + static_cast<std::ptrdiff_t>(b) + 1) -
                                     s.begin());
  } else {
    l.dip = l.maxima[0];
  }
  return l;
}

std::vector<VecX> initial_guesses(PeakModel m, const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double base = std::min(y.front(), y.back());
  const double ymin = *std::min_element(y.begin(), y.end());

  // centroid and second moment above the floor
  double w0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = y[i] - ymin;
    w0 += wi;
    m1 += wi * x[i];
  }
  const double centroid = w0 > 0.0 ? m1 / w0 : 0.5 * (x.front() + x.back());
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m2 += (y[i] - ymin) * (x[i] - centroid) * (x[i] - centroid);
  const double sigma = w0 > 0.0 ? std::sqrt(m2 / w0) : 0.25 * (x.back() - x.front());

  const Landmarks lm = landmarks(y);
  const double ymax = y[lm.maxima[0]];
  const Extent ext = half_max_extent(x, y, base);
  const double full_extent = std::max(ext.hi - ext.lo, 2.0 * (x[1] - x[0]));
  const bool dual = lm.maxima.size() == 2;
  const double sep = dual ? std::abs(x[lm.maxima[0]] - x[lm.maxima[1]]) : 0.0;
  const double center = dual ? 0.5 * (x[lm.maxima[0]] + x[lm.maxima[1]]) : x[lm.maxima[0]];
  const double peak_w = dual ? std::max(full_extent - sep, 0.2 * sep) : full_extent;

  std::vector<VecX> out;
  switch (m) {
    case PeakModel::single_lorentzian: {
      for (double w : {full_extent, 2.0 * sigma}) {
        VecX p(4);
        p << center, w, ymax - base, base;
        out.push_back(p);
      }
      break;
    }
    case PeakModel::two_lorentzians: {
      for (double w : {peak_w, std::max(2.0 * sigma - sep, 0.5 * peak_w)}) {
        VecX p(5);
        const double s = dual ? sep : 0.5 * w;
        const double overlap = lorentzian(s, 0.0, w);
        p << center, s, w, (ymax - base) / (1.0 + overlap), base;
        out.push_back(p);
      }
      break;
    }
    case PeakModel::hole: {
      const double dip = y[lm.dip];
      for (double scale : {1.0, 2.0}) {
        const double wh = dual ? sep : 0.5 * full_extent;
        const double wb = dual ? scale * (sep + peak_w) : scale * full_extent;
        // Solve A, B from the model value at the center and at the maxima.
        const double half_sep = 0.5 * (dual ? sep : 0.5 * wh);
        const double lb = lorentzian(half_sep, 0.0, wb), lh = lorentzian(half_sep, 0.0, wh);
        const double at_center = dual ? dip - base : 0.9 * (ymax - base);
        const double at_peak = ymax - base;
        // A - B = at_center ; A lb - B lh = at_peak
        const double det = -lh + lb;
        double a = (-at_center * lh + at_peak) / det;
        double b = a - at_center;
        if (!(a > 0.0) || !(b > 0.0) || !(b < a)) {
          a = 1.5 * (ymax - base);
          b = 0.6 * a;
        }
        VecX p(6);
        p << (dual ? center : centroid), wb, wh, a, b, base;
        out.push_back(p);
      }
      break;
    }
  }
  return out;
}

}  // namespace

FitResult fit_dual_peak(const Spectrum& s, PeakModel model, const FitOptions& opt) {
  s.validate();
  if (s.freqs_hz.size() < n_params(model) + 2) throw DomainError("fit_dual_peak: too few points");

  // Normalized coordinates keep the normal equations well conditioned.
  const double f_mid = 0.5 * (s.freqs_hz.front() + s.freqs_hz.back());
  const double f_scale = 0.5 * (s.freqs_hz.back() - s.freqs_hz.front());
  const double y_scale = *std::max_element(s.psd.begin(), s.psd.end());
  if (!(y_scale > 0.0)) throw DomainError("fit_dual_peak: spectrum is identically zero");

  Problem prob{model, {}, {}};
  for (std::size_t i = 0; i < s.freqs_hz.size(); ++i) {
    prob.x.push_back((s.freqs_hz[i] - f_mid) / f_scale);
    prob.y.push_back(s.psd[i] / y_scale);
  }

  const Extent ext = half_max_extent(prob.x, prob.y, std::min(prob.y.front(), prob.y.back()));
  if (!ext.inside || 3.0 * (ext.hi - ext.lo) > prob.x.back() - prob.x.front()) {
    throw DomainError("fit_dual_peak: spectrum must cover at least 3x the half-maximum extent of the structure");
  }

  LmResult best;
  best.cost = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const VecX& guess : initial_guesses(model, prob.x, prob.y)) {
    LmResult r = levenberg_marquardt(prob, guess, opt);
    if (r.converged && (!any_converged || r.cost < best.cost)) {
      best = r;
      any_converged = true;
    }
  }
  if (!any_converged) {
    throw FitError("fit_dual_peak: " + std::string(to_string(model)) + " fit did not converge within " +
                   std::to_string(opt.max_iterations) + " iterations");
  }

  VecX p = best.params;
  if (model == PeakModel::hole) {
    p(1) = std::abs(p(1));
    p(2) = std::abs(p(2));
    if (p(4) >= p(3)) {
      std::ostringstream os;
      os << "fit_dual_peak: unphysical hole fit, hole amplitude " << p(4) * y_scale << " >= broad amplitude "
         << p(3) * y_scale;
      throw FitError(os.str());
    }
  } else if (model == PeakModel::two_lorentzians) {
    p(1) = std::abs(p(1));
    p(2) = std::abs(p(2));
  } else {
    p(1) = std::abs(p(1));
  }

  const double lo = prob.x.front(), hi = prob.x.back();
  const Maxima mx = split_from_maxima(model, p, lo, hi);

  const auto n = static_cast<double>(prob.x.size());
  const auto k = static_cast<double>(p.size());
  const double dof = std::max(n - k, 1.0);
  const double s2 = best.cost / dof;

  FitResult out;
  out.model = model;
  out.iterations = best.iterations;
  out.residual_rms = std::sqrt(best.cost / n) * y_scale;
  out.single_peak = mx.single;
  out.splitting_hz = mx.splitting * f_scale;
  for (double m : mx.all) out.maxima_hz.push_back(f_mid + m * f_scale);

  // Covariance in normalized units, propagated through the maxima locator.
  if (!mx.single) {
    const MatX j = prob.jacobian(p);
    const MatX cov = s2 * (j.transpose() * j).ldlt().solve(MatX::Identity(p.size(), p.size()));
    VecX grad(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double h = std::max(1e-4 * std::sqrt(std::max(cov(i, i), 0.0)), 1e-9 * std::max(std::abs(p(i)), 1e-3));
      VecX up = p, dn = p;
      up(i) += h;
      dn(i) -= h;
      grad(i) = (split_from_maxima(model, up, lo, hi).splitting - split_from_maxima(model, dn, lo, hi).splitting) /
                (2.0 * h);
    }
    out.splitting_uncertainty_hz = std::sqrt(std::max(grad.dot(cov * grad), 0.0)) * f_scale;
  }

  out.center_hz = f_mid + p(0) * f_scale;
  switch (model) {
    case PeakModel::hole:
      out.width_broad_hz = p(1) * f_scale;
      out.width_hole_hz = p(2) * f_scale;
      out.amp_broad = p(3) * y_scale;
      out.amp_hole = p(4) * y_scale;
      out.offset = p(5) * y_scale;
      out.params = {out.center_hz, out.width_broad_hz, out.width_hole_hz, out.amp_broad, out.amp_hole, out.offset};
      break;
    case PeakModel::two_lorentzians:
      out.width_broad_hz = out.width_hole_hz = p(2) * f_scale;
      out.amp_broad = p(3) * y_scale;
      out.offset = p(4) * y_scale;
      out.params = {out.center_hz, p(1) * f_scale, out.width_broad_hz, out.amp_broad, out.offset};
      break;
    case PeakModel::single_lorentzian:
      out.width_broad_hz = out.width_hole_hz = p(1) * f_scale;
      out.amp_broad = p(2) * y_scale;
      out.offset = p(3) * y_scale;
      out.params = {out.center_hz, out.width_broad_hz, out.amp_broad, out.offset};
      break;
  }
  if (!(out.width_broad_hz > 0.0) || !(out.width_hole_hz > 0.0) || !std::isfinite(out.residual_rms)) {
    throw FitError("fit_dual_peak: degenerate fit (non-positive width or non-finite residual)");
  }
  return out;
}

}  // namespace sns
