#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "dtc/charge_basis.hpp"
#include "dtc/circuit.hpp"
#include "dtc/errors.hpp"

namespace dtc {

// State vector in the four-mode charge basis. Mode order (1,2,3,4), mode-4
// index fastest: flat index = ((k1 L + k2) L + k3) L + k4 with L = 2N+1.
using StateVector = Eigen::VectorXcd;

enum class FactorKind { identity, number, number_sq, cosine, sine };

// One Kronecker-product term: coeff * F1 x F2 x F3 x F4.
struct KronTerm {
  std::complex<double> coeff;  // rad/s
  std::array<FactorKind, 4> factors;
};

// Flux-independent part of the Hamiltonian, shared between actions at
// different flux values. Immutable after construction.
struct HamiltonianStructure {
  int cutoff = 0;
  Eigen::Index dim = 0;
  Eigen::Matrix4d W;
  std::array<double, 5> omega_J{};
  double omega_C34 = 0.0;
  // 4 n^T W n evaluated per basis index
  Eigen::VectorXd charge_diag;
  // sum_j (W_4j - W_3j) n_j per basis index; scaled by theta_dot/omega_C34
  Eigen::VectorXd drive_diag_unit;
  // row-sum upper bound on ||H||_2 at theta_dot = 0
  double norm_bound = 0.0;
};

// H/hbar at a fixed (Theta_ex, dTheta_ex/dt), applied matrix-free:
//
//   H = 4 n^T W n + (theta_dot/omega_C34) (0 0 -1 1) W n
//       - sum_i omega_Ji cos(phi_i)
//       - omega_J5 cos(phi_4 - phi_3 - Theta_ex)
//
// The coupler term couples modes 3 and 4 through a two-point stencil: writing
// cos(phi4 - phi3 - Theta) through e^{+-i phi}, the only nonzero transitions
// are (k3+1, k4-1) with weight e^{-i Theta}/2 and (k3-1, k4+1) with its
// conjugate, times -omega_J5.
class HamiltonianAction {
 public:
  HamiltonianAction(std::shared_ptr<const HamiltonianStructure> s, double theta_ex,
                    double theta_dot_ex)
      : s_(std::move(s)), theta_ex_(theta_ex), theta_dot_ex_(theta_dot_ex) {
    const double wj5 = s_->omega_J[4];
    hop_ = -0.5 * wj5 * std::exp(std::complex<double>(0.0, -theta_ex_));
    drive_scale_ = theta_dot_ex_ / s_->omega_C34;
  }

  Eigen::Index dim() const { return s_->dim; }
  int cutoff() const { return s_->cutoff; }
  double theta_ex() const { return theta_ex_; }
  double theta_dot_ex() const { return theta_dot_ex_; }
  const HamiltonianStructure& structure() const { return *s_; }

  // ||H||_2 upper bound (row sums), used to scale residual tolerances.
  double norm_bound() const {
    return s_->norm_bound + std::abs(drive_scale_) * s_->drive_diag_unit.cwiseAbs().maxCoeff();
  }

  void apply(const StateVector& in, StateVector& out) const {
    if (in.size() != s_->dim) throw DimensionError("apply: state dimension mismatch");
    out.resize(s_->dim);
    const int L = 2 * s_->cutoff + 1;
    const Eigen::Index s3 = L, s2 = static_cast<Eigen::Index>(L) * L, s1 = s2 * L;
    const std::complex<double>* pin = in.data();
    std::complex<double>* pout = out.data();
    const double* dq = s_->charge_diag.data();
    const double* dd = s_->drive_diag_unit.data();
    const double c1 = -0.5 * s_->omega_J[0];
    const double c2 = -0.5 * s_->omega_J[1];
    const double c3 = -0.5 * s_->omega_J[2];
    const double c4 = -0.5 * s_->omega_J[3];
    const std::complex<double> hop = hop_;
    const std::complex<double> hopc = std::conj(hop_);
    const double drv = drive_scale_;

#pragma omp parallel for collapse(2) schedule(static)
    for (int k1 = 0; k1 < L; ++k1) {
      for (int k2 = 0; k2 < L; ++k2) {
        const Eigen::Index base = (static_cast<Eigen::Index>(k1) * L + k2) * s2;
        for (int k3 = 0; k3 < L; ++k3) {
          for (int k4 = 0; k4 < L; ++k4) {
            const Eigen::Index i = base + static_cast<Eigen::Index>(k3) * L + k4;
            std::complex<double> acc = (dq[i] + drv * dd[i]) * pin[i];
            if (k1 > 0) acc += c1 * pin[i - s1];
            if (k1 < L - 1) acc += c1 * pin[i + s1];
            if (k2 > 0) acc += c2 * pin[i - s2];
            if (k2 < L - 1) acc += c2 * pin[i + s2];
            if (k3 > 0) acc += c3 * pin[i - s3];
            if (k3 < L - 1) acc += c3 * pin[i + s3];
            if (k4 > 0) acc += c4 * pin[i - 1];
            if (k4 < L - 1) acc += c4 * pin[i + 1];
            if (k3 < L - 1 && k4 > 0) acc += hop * pin[i + s3 - 1];
            if (k3 > 0 && k4 < L - 1) acc += hopc * pin[i - s3 + 1];
            pout[i] = acc;
          }
        }
      }
    }
  }

  StateVector apply(const StateVector& in) const {
    StateVector out;
    apply(in, out);
    return out;
  }

  // Complex multiply-add count of one apply() call (diagnostic; the kernel
  // performs one madd per gathered neighbor plus one for the diagonal).
  long long apply_cost_madds() const {
    const long long L = 2 * s_->cutoff + 1;
    const long long dim = s_->dim;
    const long long interior_per_mode = dim - dim / L;  // entries with a lower neighbor
    long long ops = dim;                                // diagonal
    ops += 8 * interior_per_mode;                       // four cosine stencils, both sides
    ops += 2 * (dim - 2 * (dim / L) + dim / (L * L));   // coupler stencil pair
    return ops;
  }

  // Term list with the flux scalars folded in; zero-coefficient terms omitted.
  std::vector<KronTerm> terms() const {
    std::vector<KronTerm> t;
    const auto& W = s_->W;
    auto add = [&t](std::complex<double> c, std::array<FactorKind, 4> f) {
      if (c != std::complex<double>(0.0, 0.0)) t.push_back({c, f});
    };
    constexpr FactorKind I = FactorKind::identity;
    for (int i = 0; i < 4; ++i) {
      std::array<FactorKind, 4> f{I, I, I, I};
      f[i] = FactorKind::number_sq;
      add(4.0 * W(i, i), f);
    }
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        std::array<FactorKind, 4> f{I, I, I, I};
        f[i] = FactorKind::number;
        f[j] = FactorKind::number;
        add(8.0 * W(i, j), f);
      }
    for (int j = 0; j < 4; ++j) {
      std::array<FactorKind, 4> f{I, I, I, I};
      f[j] = FactorKind::number;
      add(drive_scale_ * (W(3, j) - W(2, j)), f);
    }
    for (int i = 0; i < 4; ++i) {
      std::array<FactorKind, 4> f{I, I, I, I};
      f[i] = FactorKind::cosine;
      add(-s_->omega_J[i], f);
    }
    const double wj5 = s_->omega_J[4];
    const double ct = std::cos(theta_ex_), st = std::sin(theta_ex_);
    constexpr FactorKind C = FactorKind::cosine;
    constexpr FactorKind S = FactorKind::sine;
    add(-wj5 * ct, {I, I, C, C});
    add(-wj5 * ct, {I, I, S, S});
    add(-wj5 * st, {I, I, C, S});
    add(wj5 * st, {I, I, S, C});
    return t;
  }

  // Dense matrix built from the term list by explicit Kronecker products.
  // Guarded: intended for oracle-scale cutoffs only.
  Eigen::MatrixXcd densify() const {
    if (s_->dim > 10000)
      throw DimensionError("densify: dimension exceeds the 10^4 oracle guard");
    const int L = 2 * s_->cutoff + 1;
    const SingleModeOperators ops = build_single_mode_operators(s_->cutoff);
    auto factor = [&](FactorKind k) -> Eigen::MatrixXcd {
      switch (k) {
        case FactorKind::identity:
          return Eigen::MatrixXcd::Identity(L, L);
        case FactorKind::number:
          return ops.n_diag.asDiagonal().toDenseMatrix().cast<std::complex<double>>();
        case FactorKind::number_sq:
          return ops.n_diag.cwiseProduct(ops.n_diag)
              .asDiagonal()
              .toDenseMatrix()
              .cast<std::complex<double>>();
        case FactorKind::cosine:
          return ops.cos_op;
        case FactorKind::sine:
          return ops.sin_op;
      }
      throw Error("unreachable");
    };
    auto kron = [](const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
      Eigen::MatrixXcd out(A.rows() * B.rows(), A.cols() * B.cols());
      for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
          out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
      return out;
    };
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(s_->dim, s_->dim);
    for (const KronTerm& term : terms()) {
      Eigen::MatrixXcd m = factor(term.factors[0]);
      for (int i = 1; i < 4; ++i) m = kron(m, factor(term.factors[i]));
      H += term.coeff * m;
    }
    return H;
  }

 private:
  std::shared_ptr<const HamiltonianStructure> s_;
  double theta_ex_;
  double theta_dot_ex_;
  std::complex<double> hop_;
  double drive_scale_;
};

inline std::shared_ptr<const HamiltonianStructure> build_hamiltonian_structure(
    const DerivedParams& d, int N) {
  if (N < 1) throw ConfigError("charge cutoff N must be >= 1");
  auto s = std::make_shared<HamiltonianStructure>();
  s->cutoff = N;
  const int L = 2 * N + 1;
  s->dim = static_cast<Eigen::Index>(L) * L * L * L;
  s->W = d.W;
  s->omega_J = d.omega_J;
  s->omega_C34 = d.omega_C34;
  s->charge_diag.resize(s->dim);
  s->drive_diag_unit.resize(s->dim);
  Eigen::Index i = 0;
  for (int k1 = 0; k1 < L; ++k1)
    for (int k2 = 0; k2 < L; ++k2)
      for (int k3 = 0; k3 < L; ++k3)
        for (int k4 = 0; k4 < L; ++k4, ++i) {
          const Eigen::Vector4d n(k1 - N, k2 - N, k3 - N, k4 - N);
          s->charge_diag(i) = 4.0 * n.dot(d.W * n);
          s->drive_diag_unit(i) = (d.W.row(3) - d.W.row(2)).dot(n);
        }
  double offdiag_row_sum = 0.0;
  for (int m = 0; m < 4; ++m) offdiag_row_sum += d.omega_J[m];
  offdiag_row_sum += d.omega_J[4];
  s->norm_bound = s->charge_diag.cwiseAbs().maxCoeff() + offdiag_row_sum;
  return s;
}

// Generates actions at arbitrary flux values from one shared structure; this
// is the cheap path for time stepping where (theta, theta_dot) change every
// step.
class HamiltonianFamily {
 public:
  HamiltonianFamily(const DerivedParams& d, int N) : s_(build_hamiltonian_structure(d, N)) {}

  HamiltonianAction at(double theta_ex, double theta_dot_ex = 0.0) const {
    return HamiltonianAction(s_, theta_ex, theta_dot_ex);
  }

  Eigen::Index dim() const { return s_->dim; }
  int cutoff() const { return s_->cutoff; }
  const HamiltonianStructure& structure() const { return *s_; }

 private:
  std::shared_ptr<const HamiltonianStructure> s_;
};

inline HamiltonianAction assemble_hamiltonian(const DerivedParams& d, double theta_ex,
                                              double theta_dot_ex, int N) {
  return HamiltonianAction(build_hamiltonian_structure(d, N), theta_ex, theta_dot_ex);
}

}  // namespace dtc
