#include "pwclock/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pwclock {

namespace {

void check_dim(int n, const char* who) {
  if (n != 2 && n != 4) {
    throw std::invalid_argument(std::string(who) + ": dimension must be 2 or 4, got " +
                                std::to_string(n));
  }
}

}  // namespace

CVec CVec::zero(int n) {
  check_dim(n, "CVec");
  CVec v;
  v.n = n;
  return v;
}

double CVec::norm_sq() const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::norm(a[static_cast<size_t>(i)]);
  return s;
}

CMat CMat::zero(int n) {
  check_dim(n, "CMat");
  CMat m;
  m.n = n;
  return m;
}

CMat CMat::identity(int n) {
  CMat m = zero(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

CVec operator*(const CMat& m, const CVec& v) {
  if (m.n != v.n) throw std::invalid_argument("matvec: dimension mismatch");
  CVec out = CVec::zero(v.n);
  for (int i = 0; i < m.n; ++i) {
    cx s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m.at(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

CMat operator*(const CMat& a, const CMat& b) {
  if (a.n != b.n) throw std::invalid_argument("matmul: dimension mismatch");
  CMat out = CMat::zero(a.n);
  for (int i = 0; i < a.n; ++i) {
    for (int k = 0; k < a.n; ++k) {
      const cx aik = a.at(i, k);
      if (aik == cx{}) continue;
      for (int j = 0; j < a.n; ++j) out.at(i, j) += aik * b.at(k, j);
    }
  }
  return out;
}

CMat operator+(const CMat& a, const CMat& b) {
  if (a.n != b.n) throw std::invalid_argument("matadd: dimension mismatch");
  CMat out = a;
  for (int i = 0; i < a.n * a.n; ++i) out.e[static_cast<size_t>(i)] += b.e[static_cast<size_t>(i)];
  return out;
}

CMat operator-(const CMat& a, const CMat& b) {
  if (a.n != b.n) throw std::invalid_argument("matsub: dimension mismatch");
  CMat out = a;
  for (int i = 0; i < a.n * a.n; ++i) out.e[static_cast<size_t>(i)] -= b.e[static_cast<size_t>(i)];
  return out;
}

CMat operator*(cx s, const CMat& m) {
  CMat out = m;
  for (int i = 0; i < m.n * m.n; ++i) out.e[static_cast<size_t>(i)] *= s;
  return out;
}

CVec operator*(cx s, const CVec& v) {
  CVec out = v;
  for (int i = 0; i < v.n; ++i) out[i] *= s;
  return out;
}

CVec operator+(const CVec& a, const CVec& b) {
  if (a.n != b.n) throw std::invalid_argument("vecadd: dimension mismatch");
  CVec out = a;
  for (int i = 0; i < a.n; ++i) out[i] += b[i];
  return out;
}

CVec operator-(const CVec& a, const CVec& b) {
  if (a.n != b.n) throw std::invalid_argument("vecsub: dimension mismatch");
  CVec out = a;
  for (int i = 0; i < a.n; ++i) out[i] -= b[i];
  return out;
}

CMat dagger(const CMat& m) {
  CMat out = CMat::zero(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out.at(i, j) = std::conj(m.at(j, i));
  return out;
}

cx trace(const CMat& m) {
  cx s = 0.0;
  for (int i = 0; i < m.n; ++i) s += m.at(i, i);
  return s;
}

cx inner(const CVec& a, const CVec& b) {
  if (a.n != b.n) throw std::invalid_argument("inner: dimension mismatch");
  cx s = 0.0;
  for (int i = 0; i < a.n; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

CMat outer(const CVec& a, const CVec& b) {
  if (a.n != b.n) throw std::invalid_argument("outer: dimension mismatch");
  CMat out = CMat::zero(a.n);
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) out.at(i, j) = a[i] * std::conj(b[j]);
  return out;
}

double max_abs(const CMat& m) {
  double s = 0.0;
  for (int i = 0; i < m.n * m.n; ++i) s = std::max(s, std::abs(m.e[static_cast<size_t>(i)]));
  return s;
}

double max_abs_diff(const CMat& a, const CMat& b) {
  if (a.n != b.n) throw std::invalid_argument("max_abs_diff: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < a.n * a.n; ++i)
    s = std::max(s, std::abs(a.e[static_cast<size_t>(i)] - b.e[static_cast<size_t>(i)]));
  return s;
}

double frobenius_norm(const CMat& m) {
  double s = 0.0;
  for (int i = 0; i < m.n * m.n; ++i) s += std::norm(m.e[static_cast<size_t>(i)]);
  return std::sqrt(s);
}

bool is_hermitian(const CMat& m, double tol) {
  for (int i = 0; i < m.n; ++i)
    for (int j = i; j < m.n; ++j)
      if (std::abs(m.at(i, j) - std::conj(m.at(j, i))) > tol) return false;
  return true;
}

CMat hermitize(const CMat& m) {
  CMat out = CMat::zero(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) out.at(i, j) = 0.5 * (m.at(i, j) + std::conj(m.at(j, i)));
  return out;
}

CVec tensor(const CVec& a, const CVec& b) {
  if (a.n != 2 || b.n != 2)
    throw std::invalid_argument("tensor: both operands must have dimension 2");
  CVec out = CVec::zero(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[2 * i + j] = a[i] * b[j];
  return out;
}

CMat tensor(const CMat& a, const CMat& b) {
  if (a.n != 2 || b.n != 2)
    throw std::invalid_argument("tensor: both operands must have dimension 2");
  CMat out = CMat::zero(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out.at(2 * i + k, 2 * j + l) = a.at(i, j) * b.at(k, l);
  return out;
}

// --- domain value types -----------------------------------------------------

PureState::PureState(CVec amplitudes) : v_(amplitudes) {
  check_dim(v_.n, "PureState");
  if (std::abs(v_.norm_sq() - 1.0) > kUnitTol)
    throw std::invalid_argument("PureState: squared norm must be 1 within 1e-12");
}

DensityMatrix::DensityMatrix(CMat entries) : m_(entries) {
  check_dim(m_.n, "DensityMatrix");
  if (!is_hermitian(m_, kUnitTol))
    throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-12");
  if (std::abs(trace(m_) - cx{1.0}) > kUnitTol)
    throw std::invalid_argument("DensityMatrix: trace must be 1 within 1e-12");
  HermitianEigen eig = eig_hermitian(m_);
  if (eig.values[static_cast<size_t>(m_.n - 1)] < -kPsdTol)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond 1e-10");
}

OpticalUnitary::OpticalUnitary(CMat entries) : m_(entries) {
  check_dim(m_.n, "OpticalUnitary");
  if (max_abs_diff(dagger(m_) * m_, CMat::identity(m_.n)) > kUnitTol)
    throw std::invalid_argument("OpticalUnitary: U^dag U must be identity within 1e-12");
}

PureState tensor_product(const PureState& a, const PureState& b) {
  return PureState(tensor(a.vec(), b.vec()));
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(tensor(a.mat(), b.mat()));
}

OpticalUnitary tensor_product(const OpticalUnitary& a, const OpticalUnitary& b) {
  return OpticalUnitary(tensor(a.mat(), b.mat()));
}

DensityMatrix projector(const PureState& s) { return DensityMatrix(outer(s.vec(), s.vec())); }

PureState apply(const OpticalUnitary& u, const PureState& s) {
  return PureState(u.mat() * s.vec());
}

DensityMatrix conjugate(const OpticalUnitary& u, const DensityMatrix& rho) {
  return DensityMatrix(u.mat() * rho.mat() * dagger(u.mat()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
  if (rho.dim() != 4) throw std::invalid_argument("partial_trace: input must have dimension 4");
  if (keep != 1 && keep != 2)
    throw std::invalid_argument("partial_trace: subsystem index must be 1 or 2");
  CMat out = CMat::zero(2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cx s = 0.0;
      for (int k = 0; k < 2; ++k) {
        // pair index = 2*photon1 + photon2
        if (keep == 1)
          s += rho.entry(2 * i + k, 2 * j + k);
        else
          s += rho.entry(2 * k + i, 2 * k + j);
      }
      out.at(i, j) = s;
    }
  }
  return DensityMatrix(out);
}

// --- eigendecomposition -----------------------------------------------------

namespace {

// One complex Jacobi rotation zeroing A(p,q); A <- J^dag A J, V <- V J.
void jacobi_rotate(CMat& A, CMat& V, int p, int q) {
  const cx apq = A.at(p, q);
  const double abs_apq = std::abs(apq);
  if (abs_apq == 0.0) return;
  const cx phase = apq / abs_apq;  // A(p,q) = |apq| * phase
  const double app = A.at(p, p).real();
  const double aqq = A.at(q, q).real();

  // Real Jacobi angle for the phase-stripped 2x2 block [[app,|apq|],[|apq|,aqq]].
  const double tau = (aqq - app) / (2.0 * abs_apq);
  const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  // Unitary J embedding [[c, s*phase], [-s*conj(phase), c]] on the (p,q) plane.
  const cx jpp = c;
  const cx jpq = s * phase;
  const cx jqp = -s * std::conj(phase);
  const cx jqq = c;
  // note: J columns mix p,q; J^dag J = I by construction.

  const int n = A.n;
  // A <- A J (columns), then A <- J^dag A (rows)
  for (int i = 0; i < n; ++i) {
    const cx aip = A.at(i, p);
    const cx aiq = A.at(i, q);
    A.at(i, p) = aip * jpp + aiq * jqp;
    A.at(i, q) = aip * jpq + aiq * jqq;
  }
  for (int j = 0; j < n; ++j) {
    const cx apj = A.at(p, j);
    const cx aqj = A.at(q, j);
    A.at(p, j) = std::conj(jpp) * apj + std::conj(jqp) * aqj;
    A.at(q, j) = std::conj(jpq) * apj + std::conj(jqq) * aqj;
  }
  for (int i = 0; i < n; ++i) {
    const cx vip = V.at(i, p);
    const cx viq = V.at(i, q);
    V.at(i, p) = vip * jpp + viq * jqp;
    V.at(i, q) = vip * jpq + viq * jqq;
  }
}

double off_diag_max(const CMat& A) {
  double s = 0.0;
  for (int i = 0; i < A.n; ++i)
    for (int j = i + 1; j < A.n; ++j) s = std::max(s, std::abs(A.at(i, j)));
  return s;
}

}  // namespace

HermitianEigen eig_hermitian(const CMat& m) {
  check_dim(m.n, "eig_hermitian");
  if (!is_hermitian(m, 1e-10))
    throw std::invalid_argument("eig_hermitian: input not Hermitian within 1e-10");

  CMat A = hermitize(m);
  CMat V = CMat::identity(m.n);
  const double scale = std::max(max_abs(A), 1.0);
  for (int sweep = 0; sweep < 64; ++sweep) {
    if (off_diag_max(A) <= 1e-16 * scale) break;
    for (int p = 0; p < A.n - 1; ++p)
      for (int q = p + 1; q < A.n; ++q) jacobi_rotate(A, V, p, q);
  }

  HermitianEigen out;
  out.n = m.n;
  out.vectors = CMat::zero(m.n);
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.begin() + m.n,
            [&](int a, int b) { return A.at(a, a).real() > A.at(b, b).real(); });
  for (int k = 0; k < m.n; ++k) {
    const int src = order[static_cast<size_t>(k)];
    out.values[static_cast<size_t>(k)] = A.at(src, src).real();
    // phase convention: largest-magnitude component real positive
    int imax = 0;
    double amax = 0.0;
    for (int i = 0; i < m.n; ++i) {
      const double mag = std::abs(V.at(i, src));
      if (mag > amax + 1e-14) {
        amax = mag;
        imax = i;
      }
    }
    cx u = V.at(imax, src);
    cx ph = (std::abs(u) > 0.0) ? std::conj(u) / std::abs(u) : cx{1.0};
    for (int i = 0; i < m.n; ++i) out.vectors.at(i, k) = V.at(i, src) * ph;
  }
  return out;
}

CMat sqrt_psd(const CMat& m) {
  HermitianEigen eig = eig_hermitian(m);
  CMat out = CMat::zero(m.n);
  for (int k = 0; k < m.n; ++k) {
    double lam = eig.values[static_cast<size_t>(k)];
    if (lam < -kPsdTol) throw std::domain_error("sqrt_psd: matrix not PSD (eigenvalue < -1e-10)");
    lam = std::max(lam, 0.0);
    const double r = std::sqrt(lam);
    for (int i = 0; i < m.n; ++i)
      for (int j = 0; j < m.n; ++j)
        out.at(i, j) += r * eig.vectors.at(i, k) * std::conj(eig.vectors.at(j, k));
  }
  return out;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const CMat r = sqrt_psd(rho.mat());
  const CMat inner_m = hermitize(r * sigma.mat() * r);
  HermitianEigen eig = eig_hermitian(inner_m);
  double s = 0.0;
  for (int k = 0; k < rho.dim(); ++k) s += std::sqrt(std::max(eig.values[static_cast<size_t>(k)], 0.0));
  const double f = s * s;
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace pwclock
