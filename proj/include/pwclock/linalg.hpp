// Dense complex linear algebra over polarization dimensions 2 and 4:
// value types for states/operators, tensor products, partial trace,
// Hermitian eigendecomposition, PSD square root and state fidelity.
#pragma once

#include <array>
#include <complex>
#include <cstddef>

namespace pwclock {

using cx = std::complex<double>;

// Basis ordering is fixed project-wide: (H, V) for one photon and
// (HH, HV, VH, VV) for a pair. Index = 2*first + second.
inline constexpr int kBasisH = 0;
inline constexpr int kBasisV = 1;

inline constexpr double kUnitTol = 1e-12;   // norm/trace/hermiticity checks
inline constexpr double kEigTol = 1e-10;    // eigensolver residual target
inline constexpr double kPsdTol = 1e-10;    // tolerated eigenvalue negativity

// Complex vector of dimension 2 or 4.
struct CVec {
  int n = 2;
  std::array<cx, 4> a{};

  static CVec zero(int n);
  cx& operator[](int i) { return a[static_cast<size_t>(i)]; }
  const cx& operator[](int i) const { return a[static_cast<size_t>(i)]; }
  double norm_sq() const;
};

// Complex square matrix of dimension 2 or 4, row-major.
struct CMat {
  int n = 2;
  std::array<cx, 16> e{};

  static CMat zero(int n);
  static CMat identity(int n);
  cx& at(int i, int j) { return e[static_cast<size_t>(i * n + j)]; }
  const cx& at(int i, int j) const { return e[static_cast<size_t>(i * n + j)]; }
};

CVec operator*(const CMat& m, const CVec& v);
CMat operator*(const CMat& a, const CMat& b);
CMat operator+(const CMat& a, const CMat& b);
CMat operator-(const CMat& a, const CMat& b);
CMat operator*(cx s, const CMat& m);
CVec operator*(cx s, const CVec& v);
CVec operator+(const CVec& a, const CVec& b);
CVec operator-(const CVec& a, const CVec& b);

CMat dagger(const CMat& m);
cx trace(const CMat& m);
cx inner(const CVec& a, const CVec& b);  // <a|b>, conjugate-linear in a
CMat outer(const CVec& a, const CVec& b);  // |a><b|
double max_abs(const CMat& m);
double max_abs_diff(const CMat& a, const CMat& b);
double frobenius_norm(const CMat& m);
bool is_hermitian(const CMat& m, double tol);
CMat hermitize(const CMat& m);  // (m + m^dag)/2

// Kronecker composition; operands must both be dimension 2.
CVec tensor(const CVec& a, const CVec& b);
CMat tensor(const CMat& a, const CMat& b);

// --- domain value types -----------------------------------------------------

// Normalized probability-amplitude vector.
class PureState {
 public:
  explicit PureState(CVec amplitudes);
  int dim() const { return v_.n; }
  const CVec& vec() const { return v_; }
  cx amplitude(int i) const { return v_[i]; }

 private:
  CVec v_;
};

// Trace-one positive-semidefinite Hermitian operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMat entries);
  int dim() const { return m_.n; }
  const CMat& mat() const { return m_; }
  cx entry(int i, int j) const { return m_.at(i, j); }

 private:
  CMat m_;
};

// Unitary polarization transformation of one photon or a pair.
class OpticalUnitary {
 public:
  explicit OpticalUnitary(CMat entries);
  int dim() const { return m_.n; }
  const CMat& mat() const { return m_; }

 private:
  CMat m_;
};

PureState tensor_product(const PureState& a, const PureState& b);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);
OpticalUnitary tensor_product(const OpticalUnitary& a, const OpticalUnitary& b);

DensityMatrix projector(const PureState& s);
PureState apply(const OpticalUnitary& u, const PureState& s);
DensityMatrix conjugate(const OpticalUnitary& u, const DensityMatrix& rho);  // U rho U^dag

// Reduce a two-photon density matrix onto photon `keep` (1 or 2).
DensityMatrix partial_trace(const DensityMatrix& rho, int keep);

struct HermitianEigen {
  int n = 0;
  std::array<double, 4> values{};  // descending
  CMat vectors;                    // orthonormal columns, matching order
};

// Cyclic Jacobi diagonalization of a Hermitian matrix. Eigenvalues sorted
// descending; each eigenvector's largest-magnitude component is made real
// positive so the decomposition is deterministic.
HermitianEigen eig_hermitian(const CMat& m);

// Principal square root of a PSD Hermitian matrix. Eigenvalues in
// [-kPsdTol, 0) are clamped to zero; below that is an error.
CMat sqrt_psd(const CMat& m);

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0,1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace pwclock
