#include "pwclock/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pwclock/optics.hpp"
#include "pwclock/prepare.hpp"

namespace pwclock {

namespace {

constexpr std::uint64_t kTomographyStreamTag = 2;
constexpr int kProjectorCount = 16;
constexpr int kSystemDim = 16;  // vec(rho) length for the linear system

}  // namespace

void validate(const TomographyConfig& cfg) {
  if (cfg.counts_per_projection < 0) {
    throw std::invalid_argument("tomography counts_per_projection must be nonnegative");
  }
  if (!std::isfinite(cfg.mle_tolerance) || cfg.mle_tolerance <= 0.0) {
    throw std::invalid_argument("tomography mle_tolerance must be positive");
  }
  if (cfg.mle_max_iters < 1) {
    throw std::invalid_argument("tomography mle_max_iters must be at least 1");
  }
  if (!std::isfinite(cfg.erasure_visibility) || cfg.erasure_visibility < 0.0 ||
      cfg.erasure_visibility > 1.0) {
    throw std::invalid_argument("tomography erasure_visibility must lie in [0, 1]");
  }
  for (double t : cfg.external_times) {
    if (!std::isfinite(t)) {
      throw std::invalid_argument("tomography external_times must be finite");
    }
  }
}

PureState erased_global_state(double delta) {
  const OpticalUnitary plate = retarder_unitary(Retarder{delta, kQuarterTurn});
  return apply(tensor_product(plate, plate), singlet_state());
}

DensityMatrix erased_global_state_mixed(double delta, double erasure_visibility) {
  if (!std::isfinite(erasure_visibility) || erasure_visibility < 0.0 ||
      erasure_visibility > 1.0) {
    throw std::invalid_argument("erasure_visibility must lie in [0, 1]");
  }
  const PureState psi = singlet_state();
  CMat rho = outer(psi.vec(), psi.vec());
  // The clock photon is the second slot, so basis index bit 0 tags its path
  // behind the PBS; scale coherence between unequal paths.
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if ((i & 1) != (j & 1)) rho.at(i, j) *= erasure_visibility;
    }
  }
  const OpticalUnitary plate = retarder_unitary(Retarder{delta, kQuarterTurn});
  const CMat u = tensor(plate.mat(), plate.mat());
  return DensityMatrix(hermitize(u * rho * dagger(u)));
}

namespace {

CVec analyzer_ket(char label) {
  CVec v = CVec::zero(2);
  const double r = 1.0 / std::sqrt(2.0);
  switch (label) {
    case 'H': v[0] = 1.0; break;
    case 'V': v[1] = 1.0; break;
    case 'D': v[0] = r; v[1] = r; break;
    case 'R': v[0] = r; v[1] = cx(0.0, -r); break;
    default: throw std::invalid_argument("unknown analyzer label");
  }
  return v;
}

}  // namespace

ProjectorSet build_projector_set() {
  static constexpr char kSingles[4] = {'H', 'V', 'D', 'R'};
  ProjectorSet ps;
  ps.labels.reserve(kProjectorCount);
  ps.projectors.reserve(kProjectorCount);
  for (char first : kSingles) {
    for (char second : kSingles) {
      const CVec pair = tensor(analyzer_ket(first), analyzer_ket(second));
      ps.labels.push_back(std::string{first, second});
      ps.projectors.push_back(outer(pair, pair));
    }
  }
  return ps;
}

namespace {

// Row k holds (Pi_k)_{ji} at column 4*i+j, so the matrix maps row-major
// vec(rho) to the vector of Tr(rho Pi_k).
std::vector<cx> measurement_matrix(const ProjectorSet& ps) {
  if (ps.projectors.size() != kProjectorCount || ps.labels.size() != kProjectorCount) {
    throw std::invalid_argument("projector set must hold 16 labeled projectors");
  }
  std::vector<cx> m(kProjectorCount * kSystemDim);
  for (int k = 0; k < kProjectorCount; ++k) {
    const CMat& proj = ps.projectors[static_cast<std::size_t>(k)];
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        m[static_cast<std::size_t>(k * kSystemDim + 4 * i + j)] = proj.at(j, i);
      }
    }
  }
  return m;
}

// Gaussian elimination with partial pivoting on an n x n complex system.
std::vector<cx> solve_dense(std::vector<cx> m, std::vector<cx> b, int n) {
  double amax = 0.0;
  for (const cx& e : m) amax = std::max(amax, std::abs(e));
  const double tol = amax * 1e-13 * static_cast<double>(n);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[static_cast<std::size_t>(r * n + col)]) >
          std::abs(m[static_cast<std::size_t>(pivot * n + col)])) {
        pivot = r;
      }
    }
    if (std::abs(m[static_cast<std::size_t>(pivot * n + col)]) <= tol) {
      throw std::runtime_error("measurement system is singular");
    }
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(m[static_cast<std::size_t>(col * n + c)],
                  m[static_cast<std::size_t>(pivot * n + c)]);
      }
      std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
    }
    const cx diag = m[static_cast<std::size_t>(col * n + col)];
    for (int r = col + 1; r < n; ++r) {
      const cx f = m[static_cast<std::size_t>(r * n + col)] / diag;
      if (f == cx{}) continue;
      for (int c = col; c < n; ++c) {
        m[static_cast<std::size_t>(r * n + c)] -= f * m[static_cast<std::size_t>(col * n + c)];
      }
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<cx> x(static_cast<std::size_t>(n));
  for (int row = n - 1; row >= 0; --row) {
    cx acc = b[static_cast<std::size_t>(row)];
    for (int c = row + 1; c < n; ++c) {
      acc -= m[static_cast<std::size_t>(row * n + c)] * x[static_cast<std::size_t>(c)];
    }
    x[static_cast<std::size_t>(row)] = acc / m[static_cast<std::size_t>(row * n + row)];
  }
  return x;
}

// Eigenvalues of a Hermitian n x n matrix by cyclic complex Jacobi sweeps;
// same rotation convention as the 4x4 solver, eigenvalues only.
std::vector<double> hermitian_eigenvalues(std::vector<cx> a, int n) {
  const auto at = [n, &a](int i, int j) -> cx& { return a[static_cast<std::size_t>(i * n + j)]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double scale = 0.0;
    for (int p = 0; p < n; ++p) {
      scale = std::max(scale, std::abs(at(p, p)));
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(at(p, q)));
    }
    if (off <= 1e-15 * std::max(scale, 1e-300)) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cx apq = at(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-18 * std::max(scale, 1e-300)) continue;
        const cx phase = apq / mag;
        const double app = at(p, p).real();
        const double aqq = at(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cx jpp = c;
        const cx jpq = s * phase;
        const cx jqp = -s * std::conj(phase);
        const cx jqq = c;
        for (int i = 0; i < n; ++i) {
          const cx aip = at(i, p);
          const cx aiq = at(i, q);
          at(i, p) = aip * jpp + aiq * jqp;
          at(i, q) = aip * jpq + aiq * jqq;
        }
        for (int j = 0; j < n; ++j) {
          const cx apj = at(p, j);
          const cx aqj = at(q, j);
          at(p, j) = std::conj(jpp) * apj + std::conj(jqp) * aqj;
          at(q, j) = std::conj(jpq) * apj + std::conj(jqq) * aqj;
        }
      }
    }
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = at(i, i).real();
  return values;
}

}  // namespace

double measurement_condition_number(const ProjectorSet& ps) {
  const std::vector<cx> m = measurement_matrix(ps);
  const int n = kSystemDim;
  std::vector<cx> gram(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cx s = 0.0;
      for (int k = 0; k < kProjectorCount; ++k) {
        s += std::conj(m[static_cast<std::size_t>(k * n + i)]) *
             m[static_cast<std::size_t>(k * n + j)];
      }
      gram[static_cast<std::size_t>(i * n + j)] = s;
    }
  }
  const std::vector<double> ev = hermitian_eigenvalues(std::move(gram), n);
  double lmax = 0.0;
  double lmin = std::numeric_limits<double>::infinity();
  for (double v : ev) {
    lmax = std::max(lmax, v);
    lmin = std::min(lmin, v);
  }
  if (lmin <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(lmax / lmin);
}

ProjectionData simulate_tomography_counts(const DensityMatrix& rho, const ProjectorSet& ps,
                                          std::int64_t n, const Stream& stream) {
  if (n < 0) throw std::invalid_argument("counts per projection must be nonnegative");
  if (ps.projectors.size() != kProjectorCount) {
    throw std::invalid_argument("projector set must hold 16 projectors");
  }
  ProjectionData data;
  data.labels = ps.labels;
  data.values.reserve(ps.projectors.size());
  for (std::size_t k = 0; k < ps.projectors.size(); ++k) {
    cx tr = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) tr += rho.mat().at(i, j) * ps.projectors[k].at(j, i);
    }
    const double born = std::max(tr.real(), 0.0);
    double value;
    if (n == 0) {
      value = born;
    } else {
      Stream sub = make_stream(stream.key, static_cast<std::uint64_t>(k));
      value = static_cast<double>(sample_poisson(static_cast<double>(n) * born, sub));
    }
    data.values.push_back(value);
    data.total += value;
  }
  return data;
}

CMat linear_reconstruction(const ProjectionData& data, const ProjectorSet& ps) {
  if (data.values.size() != ps.projectors.size() || data.labels != ps.labels) {
    throw std::invalid_argument("projection data must align with the projector set");
  }
  std::vector<cx> rhs(data.values.size());
  for (std::size_t k = 0; k < data.values.size(); ++k) {
    if (!std::isfinite(data.values[k]) || data.values[k] < 0.0) {
      throw std::invalid_argument("projection values must be finite and nonnegative");
    }
    rhs[k] = data.values[k];
  }
  const std::vector<cx> x = solve_dense(measurement_matrix(ps), std::move(rhs), kSystemDim);
  CMat rho = CMat::zero(4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) rho.at(i, j) = x[static_cast<std::size_t>(4 * i + j)];
  }
  rho = hermitize(rho);
  const double tr = trace(rho).real();
  if (!(std::abs(tr) > 1e-12 * std::max(frobenius_norm(rho), 1.0))) {
    throw std::runtime_error("linear reconstruction has no normalizable trace");
  }
  return cx(1.0 / tr, 0.0) * rho;
}

namespace {

double trace_product_real(const CMat& a, const CMat& b) {
  cx s = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) s += a.at(i, j) * b.at(j, i);
  }
  return s.real();
}

// 16 ascent parameters <-> lower-triangular T: four real diagonal entries,
// then (re, im) pairs for the six sub-diagonal entries in row-major order.
CMat unpack_params(const double* th) {
  CMat t = CMat::zero(4);
  for (int i = 0; i < 4; ++i) t.at(i, i) = th[i];
  int idx = 4;
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      t.at(i, j) = cx(th[idx], th[idx + 1]);
      idx += 2;
    }
  }
  return t;
}

void pack_params(const CMat& t, double* th) {
  for (int i = 0; i < 4; ++i) th[i] = t.at(i, i).real();
  int idx = 4;
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      th[idx] = t.at(i, j).real();
      th[idx + 1] = t.at(i, j).imag();
      idx += 2;
    }
  }
}

// Profiled-rate Poisson log-likelihood of B = T^dag T, scale invariant in B:
// l = sum_k c_k ln Tr(B Pi_k) - N ln Tr(B W) with W the projector sum.
double loglik(const CMat& t, const std::vector<CMat>& projs, const std::vector<double>& values,
              double total, const CMat& sum_proj, std::vector<double>* probs) {
  const CMat b = dagger(t) * t;
  double l = 0.0;
  for (std::size_t k = 0; k < projs.size(); ++k) {
    const double p = std::max(trace_product_real(b, projs[k]), 0.0);
    if (probs) (*probs)[k] = p;
    if (values[k] > 0.0) {
      if (p < 1e-300) return -std::numeric_limits<double>::infinity();
      l += values[k] * std::log(p);
    }
  }
  const double s = std::max(trace_product_real(b, sum_proj), 0.0);
  if (s < 1e-300) return -std::numeric_limits<double>::infinity();
  l -= total * std::log(s);
  return l;
}

// d l / d(Re T_ab) = 2 Re (T G)_ab and d l / d(Im T_ab) = 2 Im (T G)_ab on
// the lower triangle, with G the likelihood gradient in rho-space.
void loglik_gradient(const CMat& t, const std::vector<CMat>& projs,
                     const std::vector<double>& values, double total, const CMat& sum_proj,
                     const std::vector<double>& probs, double* grad) {
  CMat g = CMat::zero(4);
  double s = 0.0;
  for (std::size_t k = 0; k < projs.size(); ++k) {
    s += probs[k];
    if (values[k] <= 0.0) continue;
    const double coeff = values[k] / std::max(probs[k], 1e-12);
    g = g + cx(coeff, 0.0) * projs[k];
  }
  g = g - cx(total / std::max(s, 1e-12), 0.0) * sum_proj;
  const CMat tg = t * g;
  for (int i = 0; i < 4; ++i) grad[i] = 2.0 * tg.at(i, i).real();
  int idx = 4;
  for (int i = 1; i < 4; ++i) {
    for (int j = 0; j < i; ++j) {
      grad[idx] = 2.0 * tg.at(i, j).real();
      grad[idx + 1] = 2.0 * tg.at(i, j).imag();
      idx += 2;
    }
  }
}

// Lower-triangular T with T^dag T = A for Hermitian positive-definite A,
// filled from the last row upward.
CMat reverse_cholesky(const CMat& a) {
  CMat t = CMat::zero(4);
  for (int i = 3; i >= 0; --i) {
    double d = a.at(i, i).real();
    for (int k = i + 1; k < 4; ++k) d -= std::norm(t.at(k, i));
    const double diag = std::sqrt(std::max(d, 1e-18));
    t.at(i, i) = diag;
    for (int j = 0; j < i; ++j) {
      cx v = a.at(i, j);
      for (int k = i + 1; k < 4; ++k) v -= std::conj(t.at(k, i)) * t.at(k, j);
      t.at(i, j) = v / diag;
    }
  }
  return t;
}

// Eigenvalue-clamped, trace-normalized linear estimate; the clamp floor
// keeps every projection probability strictly positive at the start.
CMat clamped_linear_estimate(const ProjectionData& data, const ProjectorSet& ps) {
  const CMat lin = linear_reconstruction(data, ps);
  const HermitianEigen eig = eig_hermitian(lin);
  CMat a = CMat::zero(4);
  for (int e = 0; e < 4; ++e) {
    const double lam = std::max(eig.values[static_cast<std::size_t>(e)], 1e-6);
    CVec v = CVec::zero(4);
    for (int i = 0; i < 4; ++i) v[i] = eig.vectors.at(i, e);
    a = a + cx(lam, 0.0) * outer(v, v);
  }
  const double tr = trace(a).real();
  return cx(1.0 / tr, 0.0) * a;
}

}  // namespace

MleResult mle_refine(const ProjectionData& data, const ProjectorSet& ps,
                     const TomographyConfig& cfg) {
  if (data.values.size() != ps.projectors.size() || data.labels != ps.labels) {
    throw std::invalid_argument("projection data must align with the projector set");
  }
  if (!std::isfinite(cfg.mle_tolerance) || cfg.mle_tolerance <= 0.0) {
    throw std::invalid_argument("mle_tolerance must be positive");
  }
  if (cfg.mle_max_iters < 1) {
    throw std::invalid_argument("mle_max_iters must be at least 1");
  }
  for (double v : data.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("projection values must be finite and nonnegative");
    }
  }

  const double total = std::accumulate(data.values.begin(), data.values.end(), 0.0);
  if (total <= 0.0) {
    // Zero counts everywhere: the profiled likelihood is flat, so return the
    // maximally mixed canonical representative.
    return MleResult{DensityMatrix(cx(0.25, 0.0) * CMat::identity(4)), true, 0, {0.0}};
  }

  CMat sum_proj = CMat::zero(4);
  for (const CMat& proj : ps.projectors) sum_proj = sum_proj + proj;

  CMat start;
  try {
    start = clamped_linear_estimate(data, ps);
  } catch (const std::exception&) {
    start = cx(0.25, 0.0) * CMat::identity(4);
  }

  double theta[16];
  pack_params(reverse_cholesky(start), theta);

  std::vector<double> probs(ps.projectors.size(), 0.0);
  CMat t = unpack_params(theta);
  double best = loglik(t, ps.projectors, data.values, total, sum_proj, &probs);
  double grad[16];
  loglik_gradient(t, ps.projectors, data.values, total, sum_proj, probs, grad);

  std::vector<double> history;
  history.reserve(64);
  history.push_back(best);

  double theta_norm = 0.0, grad_norm = 0.0;
  for (int i = 0; i < 16; ++i) {
    theta_norm += theta[i] * theta[i];
    grad_norm += grad[i] * grad[i];
  }
  double alpha = 1e-3 * (1.0 + std::sqrt(theta_norm)) / (1.0 + std::sqrt(grad_norm));

  bool converged = false;
  int iterations = 0;
  for (int iter = 1; iter <= cfg.mle_max_iters; ++iter) {
    iterations = iter;
    double step = alpha;
    double trial[16];
    double trial_l = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (int i = 0; i < 16; ++i) trial[i] = theta[i] + step * grad[i];
      const CMat tt = unpack_params(trial);
      trial_l = loglik(tt, ps.projectors, data.values, total, sum_proj, &probs);
      if (std::isfinite(trial_l) && trial_l >= best) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent possible along the gradient: improvement is zero, which is
      // below any positive tolerance.
      converged = true;
      break;
    }

    const CMat tt = unpack_params(trial);
    double new_grad[16];
    loglik_gradient(tt, ps.projectors, data.values, total, sum_proj, probs, new_grad);

    double dth_dth = 0.0, dth_dg = 0.0;
    for (int i = 0; i < 16; ++i) {
      const double dth = trial[i] - theta[i];
      const double dg = new_grad[i] - grad[i];
      dth_dth += dth * dth;
      dth_dg += dth * dg;
    }
    const double improvement = trial_l - best;
    for (int i = 0; i < 16; ++i) {
      theta[i] = trial[i];
      grad[i] = new_grad[i];
    }
    best = trial_l;
    history.push_back(best);

    // Barzilai-Borwein step for the next iteration, clamped to sane range.
    if (std::isfinite(dth_dg) && dth_dg != 0.0) {
      alpha = std::clamp(std::abs(dth_dth / dth_dg), 1e-12, 1e8);
    } else {
      alpha = step * 2.0;
    }

    // Relative threshold: the log-likelihood magnitude grows with the total
    // count, and near-boundary optima are approached through vanishing steps.
    if (improvement < cfg.mle_tolerance * (1.0 + std::abs(best))) {
      converged = true;
      break;
    }
  }

  const CMat t_final = unpack_params(theta);
  CMat b = dagger(t_final) * t_final;
  const double tr = trace(b).real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    return MleResult{DensityMatrix(cx(0.25, 0.0) * CMat::identity(4)), false, iterations,
                     std::move(history)};
  }
  b = hermitize(cx(1.0 / tr, 0.0) * b);
  return MleResult{DensityMatrix(b), converged, iterations, std::move(history)};
}

namespace {

SuperObserverReport run_superobserver_impl(const TomographyConfig& cfg, bool parallel) {
  validate(cfg);
  SuperObserverReport report;
  const int n = static_cast<int>(cfg.external_times.size());
  if (n == 0) return report;
  report.rows.resize(static_cast<std::size_t>(n));
  const ProjectorSet ps = build_projector_set();
  const DensityMatrix target = projector(singlet_state());

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    // external_times are in units of 1/omega, so the plate phase omega*t is
    // numerically the listed value.
    const double time = cfg.external_times[static_cast<std::size_t>(i)];
    const DensityMatrix state = erased_global_state_mixed(time, cfg.erasure_visibility);
    const Stream row_stream =
        make_stream(cfg.rng_seed, kTomographyStreamTag, static_cast<std::uint64_t>(i));
    const ProjectionData data =
        simulate_tomography_counts(state, ps, cfg.counts_per_projection, row_stream);
    const MleResult mle = mle_refine(data, ps, cfg);
    SuperObserverRow row;
    row.external_time = time;
    row.fidelity = fidelity(target, mle.rho);
    row.mle_converged = mle.converged;
    row.mle_iterations = mle.iterations;
    report.rows[static_cast<std::size_t>(i)] = row;
  }

  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const SuperObserverRow& a, const SuperObserverRow& b) {
                     return a.external_time < b.external_time;
                   });
  return report;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

SuperObserverReport run_superobserver(const TomographyConfig& cfg) {
  return run_superobserver_impl(cfg, true);
}

SuperObserverReport run_superobserver_serial(const TomographyConfig& cfg) {
  return run_superobserver_impl(cfg, false);
}

std::string superobserver_csv(const SuperObserverReport& report) {
  std::string out = "external_time_over_omega,fidelity\n";
  for (const auto& row : report.rows) {
    out += format_number(row.external_time);
    out += ',';
    out += format_number(row.fidelity);
    out += '\n';
  }
  return out;
}

void write_superobserver_csv(const SuperObserverReport& report, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << superobserver_csv(report);
  file.flush();
  if (!file) throw std::runtime_error("write failed: " + path);
}

std::string superobserver_table(const SuperObserverReport& report) {
  std::string out = "external time [1/omega]    fidelity\n";
  char buf[80];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%-26.10g %.6f\n", row.external_time, row.fidelity);
    out += buf;
  }
  return out;
}

}  // namespace pwclock
