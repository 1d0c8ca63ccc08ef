#include "sns/noise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <fftw3.h>

namespace sns {

const char* to_string(SpectrumMethod m) { return m == SpectrumMethod::resolvent ? "resolvent" : "stochastic"; }

SpectrumMethod spectrum_method_from_string(const std::string& s) {
  if (s == "resolvent") return SpectrumMethod::resolvent;
  if (s == "stochastic") return SpectrumMethod::stochastic;
  throw DomainError("unknown spectrum method '" + s + "' (expected resolvent or stochastic)");
}

const char* to_string(InjectionBasis b) { return b == InjectionBasis::z_population ? "z_population" : "random_axis"; }

InjectionBasis injection_basis_from_string(const std::string& s) {
  if (s == "z_population") return InjectionBasis::z_population;
  if (s == "random_axis") return InjectionBasis::random_axis;
  throw DomainError("unknown injection basis '" + s + "' (expected z_population or random_axis)");
}

void Spectrum::validate() const {
  if (freqs_hz.empty()) throw DomainError("spectrum is empty");
  if (freqs_hz.size() != psd.size()) throw DomainError("spectrum frequency and psd lengths differ");
  for (std::size_t k = 1; k < freqs_hz.size(); ++k) {
    if (!(freqs_hz[k] > freqs_hz[k - 1])) throw DomainError("spectrum frequencies are not strictly increasing");
  }
  for (double v : psd) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("spectrum psd must be finite and >= 0");
  }
  if (!(rbw_hz > 0.0)) throw DomainError("spectrum rbw_hz must be > 0");
}

double Spectrum::bin_width_hz() const {
  if (freqs_hz.size() < 2) return rbw_hz;
  return (freqs_hz.back() - freqs_hz.front()) / static_cast<double>(freqs_hz.size() - 1);
}

namespace {

const std::array<Eigen::Vector3d, 12>& icosahedron_vertices() {
  static const std::array<Eigen::Vector3d, 12> v = [] {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::array<Eigen::Vector3d, 12> out;
    std::size_t k = 0;
    for (double s1 : {-1.0, 1.0})
      for (double s2 : {-1.0, 1.0}) {
        out[k++] = Eigen::Vector3d(0.0, s1, s2 * phi).normalized();
        out[k++] = Eigen::Vector3d(s1, s2 * phi, 0.0).normalized();
        out[k++] = Eigen::Vector3d(s2 * phi, 0.0, s1).normalized();
      }
    return out;
  }();
  return v;
}

DensityMatrix injected_state(const Eigen::Vector3d& axis, int m, const OperatorSet& ops) {
  return embed_ground(ops.to_x(axis_projector(axis, m, ops)));
}

}  // namespace

InjectionEnsemble injection_ensemble(InjectionBasis basis, const OperatorSet& ops) {
  InjectionEnsemble e;
  if (basis == InjectionBasis::z_population) {
    for (int m : {1, 0, -1}) {
      e.weights.push_back(1.0 / 3.0);
      e.states.push_back(injected_state(Eigen::Vector3d::UnitZ(), m, ops));
    }
    return e;
  }
  const auto& dirs = icosahedron_vertices();
  for (const auto& n : dirs) {
    for (int m : {1, 0, -1}) {
      e.weights.push_back(1.0 / (3.0 * static_cast<double>(dirs.size())));
      e.states.push_back(injected_state(n, m, ops));
    }
  }
  return e;
}

Spectrum resolvent_spectrum(const SimParams& p, const Observable& a, std::span<const double> freqs_hz,
                            const ResolventOptions& opt) {
  p.validate();
  if (freqs_hz.empty()) throw DomainError("resolvent_spectrum: frequency grid is empty");
  if (!(opt.n_eff > 0.0)) throw DomainError("resolvent_spectrum: n_eff must be > 0");

  const OperatorSet ops = make_operator_set(opt.ket_phases);
  const Liouvillian l = build_liouvillian(p, ops);
  const DensityMatrix rho_ss = steady_state(l);
  const InjectionEnsemble ens = injection_ensemble(opt.injection, ops);

  std::vector<Vec16> kicks;
  for (const auto& s : ens.states) kicks.push_back(vec(s - rho_ss));
  const double event_scale = l.transit_rate / opt.n_eff;
  const Eigen::Matrix<cplx, 16, 1> r = (a.scale * a.row()).transpose();

  auto two_sided = [&](double f) {
    const Mat16 m = cplx(0.0, kTwoPi * f) * Mat16::Identity() - l.generator;
    Eigen::PartialPivLU<Mat16> lu(m.transpose());
    if (!(lu.rcond() > 1e-14)) {
      throw SingularError("resolvent_spectrum: resolvent is singular at f = " + std::to_string(f) + " Hz");
    }
    const Vec16 y = lu.solve(r);  // y^T = r^T (i w - L)^-1
    double acc = 0.0;
    for (std::size_t j = 0; j < kicks.size(); ++j) acc += ens.weights[j] * std::norm(y.cwiseProduct(kicks[j]).sum());
    return event_scale * acc;
  };

  Spectrum s;
  s.params = p;
  s.method = SpectrumMethod::resolvent;
  s.channel = a.label;
  s.n_averages = 1;
  s.freqs_hz.assign(freqs_hz.begin(), freqs_hz.end());
  s.psd.reserve(freqs_hz.size());
  for (double f : freqs_hz) s.psd.push_back(two_sided(f) + two_sided(-f));
  s.rbw_hz = freqs_hz.size() > 1 ? s.bin_width_hz() : 1.0;
  return s;
}

std::size_t welch_segment_length(const SimParams& p, const StochasticOptions& opt) {
  if (opt.segment_length > 0) return opt.segment_length;
  const double fs = 1.0 / p.time_step_s;
  const double target_bin = p.transit_hz / 5.0;
  std::size_t n = 16;
  while (fs / static_cast<double>(n) > target_bin) n *= 2;
  return n;
}

namespace {

struct FftwFree {
  void operator()(void* ptr) const { fftw_free(ptr); }
};

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }
  const fftw_complex* output() const { return out_.get(); }
  void execute() { fftw_execute(plan_); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_ = nullptr;
};

}  // namespace

WelchResult welch_psd(std::span<const double> x, double sample_rate_hz, std::size_t segment_length) {
  if (segment_length < 4 || segment_length % 2 != 0) {
    throw DomainError("welch_psd: segment length must be even and >= 4");
  }
  if (x.size() < segment_length) {
    throw DomainError("welch_psd: record of " + std::to_string(x.size()) + " samples is shorter than one segment (" +
                      std::to_string(segment_length) + ")");
  }
  const std::size_t n = segment_length;
  const std::size_t hop = n / 2;
  const std::size_t n_bins = n / 2 + 1;

  std::vector<double> window(n);
  double wsum2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    window[k] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n)));
    wsum2 += window[k] * window[k];
  }

  RealFft fft(n);
  WelchResult out;
  out.psd.assign(n_bins, 0.0);
  for (std::size_t start = 0; start + n <= x.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += x[start + k];
    mean /= static_cast<double>(n);
    double* in = fft.input();
    for (std::size_t k = 0; k < n; ++k) in[k] = (x[start + k] - mean) * window[k];
    fft.execute();
    const fftw_complex* spec = fft.output();
    for (std::size_t k = 0; k < n_bins; ++k) out.psd[k] += spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    ++out.n_segments;
  }

  const double norm = 1.0 / (sample_rate_hz * wsum2 * static_cast<double>(out.n_segments));
  out.freqs_hz.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const bool edge = (k == 0 || k == n_bins - 1);
    out.psd[k] *= norm * (edge ? 1.0 : 2.0);
    out.freqs_hz[k] = sample_rate_hz * static_cast<double>(k) / static_cast<double>(n);
  }
  return out;
}

namespace {

struct TrajectoryOutput {
  std::vector<double> psd;
  std::size_t n_segments = 0;
  double variance = 0.0;
};

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace

Spectrum stochastic_spectrum(const SimParams& p, const Observable& a, const StochasticOptions& opt) {
  p.validate();
  if (p.n_trajectories < 1) throw DomainError("stochastic_spectrum: n_trajectories must be >= 1");
  if (opt.substeps < 1) throw DomainError("stochastic_spectrum: substeps must be >= 1");
  const double gamma_t = kTwoPi * p.transit_hz;
  if (p.duration_s * gamma_t < 50.0) {
    std::ostringstream os;
    os << "stochastic_spectrum: duration " << p.duration_s << " s covers fewer than 50 correlation times (50/gamma_t = "
       << 50.0 / gamma_t << " s)";
    throw DomainError(os.str());
  }
  const double fs = 1.0 / p.time_step_s;
  const std::size_t n_samples = static_cast<std::size_t>(std::floor(p.duration_s / p.time_step_s));
  const std::size_t seg = welch_segment_length(p, opt);
  if (n_samples < seg) {
    throw DomainError("stochastic_spectrum: duration/time_step gives " + std::to_string(n_samples) +
                      " samples, fewer than one Welch segment of " + std::to_string(seg));
  }
  const std::size_t burn_in =
      static_cast<std::size_t>(std::ceil(opt.burn_in_correlation_times / gamma_t / p.time_step_s));

  const OperatorSet ops = make_operator_set();
  const Liouvillian full = build_liouvillian(p, ops, TransitTerm::affine);
  const Liouvillian inner = build_liouvillian(p, ops, TransitTerm::none);
  const Vec16 start = vec(steady_state(full));
  const double h = p.time_step_s / static_cast<double>(opt.substeps);
  const Mat16 step = propagator(inner, h);
  const double events_per_substep = gamma_t * p.n_eff * h;
  const double fraction = 1.0 / p.n_eff;
  const Eigen::Matrix<cplx, 1, 16> r = a.scale * a.row();

  std::vector<Vec16> z_states;
  for (int m : {1, 0, -1}) z_states.push_back(vec(injected_state(Eigen::Vector3d::UnitZ(), m, ops)));

  auto run_trajectory = [&](std::size_t index) {
    std::mt19937_64 rng = trajectory_rng(p.rng_seed, index);
    std::poisson_distribution<int> n_events(events_per_substep);
    std::uniform_int_distribution<int> pick_m(0, 2);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Vec16 v = start;
    Vec16 tmp;
    std::vector<double> x;
    x.reserve(n_samples);
    const std::size_t total = burn_in + n_samples;
    for (std::size_t s = 0; s < total; ++s) {
      for (std::size_t sub = 0; sub < opt.substeps; ++sub) {
        tmp.noalias() = step * v;
        v = tmp;
        const int k = n_events(rng);
        for (int e = 0; e < k; ++e) {
          const int m = pick_m(rng);
          if (opt.injection == InjectionBasis::z_population) {
            v = (1.0 - fraction) * v + fraction * z_states[static_cast<std::size_t>(m)];
          } else {
            Eigen::Vector3d n(gauss(rng), gauss(rng), gauss(rng));
            v = (1.0 - fraction) * v + fraction * vec(injected_state(n, 1 - m, ops));
          }
        }
      }
      if (s >= burn_in) x.push_back((r * v)(0).real());
    }

    TrajectoryOutput out;
    double mean = 0.0;
    for (double xi : x) mean += xi;
    mean /= static_cast<double>(x.size());
    for (double xi : x) out.variance += (xi - mean) * (xi - mean);
    out.variance /= static_cast<double>(x.size());
    WelchResult w = welch_psd(x, fs, seg);
    out.psd = std::move(w.psd);
    out.n_segments = w.n_segments;
    return out;
  };

  std::vector<TrajectoryOutput> results(p.n_trajectories);
  unsigned n_threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, p.n_trajectories));
  if (n_threads <= 1) {
    for (std::size_t k = 0; k < p.n_trajectories; ++k) results[k] = run_trajectory(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t k = next++; k < p.n_trajectories; k = next++) results[k] = run_trajectory(k);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Reduce in trajectory order so the sum is schedule independent.
  Spectrum spec;
  spec.params = p;
  spec.method = SpectrumMethod::stochastic;
  spec.channel = a.label;
  spec.psd.assign(seg / 2 + 1, 0.0);
  double variance = 0.0;
  std::size_t segments = 0;
  for (const auto& t : results) {
    for (std::size_t k = 0; k < spec.psd.size(); ++k) spec.psd[k] += t.psd[k];
    variance += t.variance;
    segments += t.n_segments;
  }
  const double inv = 1.0 / static_cast<double>(results.size());
  for (double& v : spec.psd) v *= inv;
  spec.signal_variance = variance * inv;
  spec.freqs_hz.resize(spec.psd.size());
  for (std::size_t k = 0; k < spec.psd.size(); ++k) spec.freqs_hz[k] = fs * static_cast<double>(k) / static_cast<double>(seg);
  spec.rbw_hz = fs / static_cast<double>(seg);
  spec.n_averages = segments;
  return spec;
}

Spectrum crop(const Spectrum& s, double fmin_hz, double fmax_hz) {
  Spectrum out = s;
  out.freqs_hz.clear();
  out.psd.clear();
  for (std::size_t k = 0; k < s.freqs_hz.size(); ++k) {
    if (s.freqs_hz[k] >= fmin_hz && s.freqs_hz[k] <= fmax_hz) {
      out.freqs_hz.push_back(s.freqs_hz[k]);
      out.psd.push_back(s.psd[k]);
    }
  }
  return out;
}

Spectrum smooth(const Spectrum& s, double width_hz) {
  Spectrum out = s;
  const double df = s.bin_width_hz();
  if (!(df > 0.0)) return out;
  const auto half = static_cast<std::ptrdiff_t>(std::floor(0.5 * width_hz / df));
  if (half <= 0) return out;
  const auto n = static_cast<std::ptrdiff_t>(s.psd.size());
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, k + half);
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += s.psd[static_cast<std::size_t>(j)];
    out.psd[static_cast<std::size_t>(k)] = acc / static_cast<double>(hi - lo + 1);
  }
  out.rbw_hz = std::max(s.rbw_hz, width_hz);
  return out;
}

std::vector<double> spectrum_peak_positions(const Spectrum& s, double prominence_fraction) {
  s.validate();
  const std::vector<double>& y = s.psd;
  const std::size_t n = y.size();
  const double global_max = *std::max_element(y.begin(), y.end());
  const double threshold = prominence_fraction * global_max;

  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    // Prominence: height above the higher of the two saddle minima that
    // separate this peak from higher terrain (or the spectrum edges).
    double left_min = y[i];
    for (std::size_t j = i; j-- > 0;) {
      if (y[j] > y[i]) break;
      left_min = std::min(left_min, y[j]);
    }
    double right_min = y[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (y[j] > y[i]) break;
      right_min = std::min(right_min, y[j]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence < threshold || prominence <= 0.0) continue;

    double pos = s.freqs_hz[i];
    if (y[i - 1] > 0.0 && y[i] > 0.0 && y[i + 1] > 0.0) {
      const double a = std::log(y[i - 1]), b = std::log(y[i]), c = std::log(y[i + 1]);
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) {
        const double offset = 0.5 * (a - c) / denom;
        const double step = 0.5 * (s.freqs_hz[i + 1] - s.freqs_hz[i - 1]);
        pos += std::clamp(offset, -0.5, 0.5) * step;
      }
    }
    peaks.push_back(pos);
  }
  if (peaks.empty()) throw NoPeakError("spectrum_peak_positions: no peak above the prominence threshold");
  return peaks;
}

double psd_at(const Spectrum& s, double f_hz) {
  const auto& f = s.freqs_hz;
  if (f.empty()) throw DomainError("psd_at: empty spectrum");
  if (f_hz <= f.front()) return s.psd.front();
  if (f_hz >= f.back()) return s.psd.back();
  const auto it = std::upper_bound(f.begin(), f.end(), f_hz);
  const std::size_t k = static_cast<std::size_t>(it - f.begin());
  const double t = (f_hz - f[k - 1]) / (f[k] - f[k - 1]);
  return (1.0 - t) * s.psd[k - 1] + t * s.psd[k];
}

double integrated_power(const Spectrum& s) {
  double acc = 0.0;
  for (std::size_t k = 1; k < s.freqs_hz.size(); ++k) {
    acc += 0.5 * (s.psd[k] + s.psd[k - 1]) * (s.freqs_hz[k] - s.freqs_hz[k - 1]);
  }
  return acc;
}

}  // namespace sns
