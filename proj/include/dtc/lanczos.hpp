#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <sstream>
#include <vector>

#include "dtc/errors.hpp"

namespace dtc {

struct LanczosOptions {
  int max_basis = 0;          // 0: max(2k+20, 60)
  int keep = 0;               // 0: k + 8
  int max_cycles = 600;
  double tol_abs = 0.0;       // required: absolute residual target, rad/s
  unsigned long long seed = 0x5eed5eedULL;
  Eigen::VectorXcd initial;   // optional warm start
};

struct Eigenpairs {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXcd vectors;   // column i pairs with values(i)
  Eigen::VectorXd residuals;  // ||A v - lambda v||
  long matvecs = 0;
};

// Thick-restart Lanczos for the lowest k eigenpairs of a Hermitian operator,
// matrix-free, with full reorthogonalization at every step. Kept Ritz vectors
// are soft-locked: they stay in the basis across restarts, so degenerate
// partners surface on later cycles once their cluster mates converge.
template <class Op>
Eigenpairs lanczos_lowest(const Op& op, int k, const LanczosOptions& opts) {
  using Cplx = std::complex<double>;
  using Vec = Eigen::VectorXcd;
  using Mat = Eigen::MatrixXcd;

  const Eigen::Index dim = op.dim();
  if (k < 1 || k > dim) throw ConfigError("lanczos: bad eigenpair count");
  if (!(opts.tol_abs > 0.0)) throw ConfigError("lanczos: tol_abs must be set");

  const int m = static_cast<int>(std::min<Eigen::Index>(
      dim, opts.max_basis > 0 ? opts.max_basis : std::max(2 * k + 20, 60)));
  const int keep_target = std::min(opts.keep > 0 ? opts.keep : k + 8, m - 2);
  if (m < k + 2 && m < dim) throw ConfigError("lanczos: basis too small for k");

  std::mt19937_64 rng(opts.seed + static_cast<unsigned long long>(dim) * 31ULL +
                      static_cast<unsigned long long>(k));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vec = [&]() {
    Vec v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Cplx(gauss(rng), gauss(rng));
    return v;
  };

  Mat V(dim, m + 1);
  std::vector<double> theta, bcoef;    // restarted Ritz values and couplings
  std::vector<double> alphas, betas;   // tridiagonal continuation
  Vec w(dim), tmp(dim);
  long matvecs = 0;

  // orthonormalize w against V[:, 0..p)
  auto reorthogonalize = [&](Vec& x, int p) {
    for (int pass = 0; pass < 2; ++pass) {
      if (p > 0) x.noalias() -= V.leftCols(p) * (V.leftCols(p).adjoint() * x);
    }
  };

  Vec v0 = opts.initial.size() == dim ? opts.initial : random_vec();
  if (v0.norm() == 0.0) v0 = random_vec();
  V.col(0) = v0 / v0.norm();
  int l = 0;  // kept Ritz count at cycle start
  int p = 1;  // current basis size

  Eigen::VectorXd ritz_vals;
  Eigen::MatrixXd ritz_S;
  double beta_out = 0.0;

  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    // expand basis to m vectors
    alphas.clear();
    betas.clear();
    while (p < m) {
      const int j = p - 1;  // index of the vector being expanded
      op.apply(V.col(j), w);
      ++matvecs;
      if (j == l && l > 0) {
        for (int i = 0; i < l; ++i) w.noalias() -= bcoef[i] * V.col(i);
      } else if (j > l) {
        w.noalias() -= betas[j - l - 1] * V.col(j - 1);
      }
      const double alpha = std::real(Cplx(V.col(j).dot(w)));
      w.noalias() -= alpha * V.col(j);
      reorthogonalize(w, p);
      alphas.push_back(alpha);
      double beta = w.norm();
      if (beta < 1e-13 * opts.tol_abs || !(beta > 0.0)) {
        // invariant subspace hit; continue in a fresh random direction
        w = random_vec();
        reorthogonalize(w, p);
        const double nw = w.norm();
        if (nw < 1e-12) break;  // space exhausted
        w /= nw;
        beta = 0.0;
      } else {
        w /= beta;
      }
      betas.push_back(beta);
      V.col(p) = w;
      ++p;
    }

    // projected matrix: arrowhead head (theta, bcoef) + tridiagonal tail
    const int nal = static_cast<int>(alphas.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < l; ++i) {
      T(i, i) = theta[i];
      T(i, l) = T(l, i) = bcoef[i];
    }
    for (int i = 0; i < nal; ++i) {
      T(l + i, l + i) = alphas[i];
      if (i + 1 < nal) T(l + i, l + i + 1) = T(l + i + 1, l + i) = betas[i];
    }
    // coupling of the last basis vector out of the subspace
    if (p < dim) {
      op.apply(V.col(p - 1), w);
      ++matvecs;
      tmp.noalias() = V.leftCols(p).adjoint() * w;
      // fold exact projections into the last column to keep T consistent
      for (int i = 0; i < p; ++i) T(i, p - 1) = T(p - 1, i) = std::real(Cplx(tmp(i)));
      w.noalias() -= V.leftCols(p) * tmp;
      beta_out = w.norm();
    } else {
      beta_out = 0.0;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    ritz_vals = es.eigenvalues();
    ritz_S = es.eigenvectors();

    const int nwant = std::min(k, p);
    bool converged = true;
    for (int i = 0; i < nwant; ++i)
      if (beta_out * std::abs(ritz_S(p - 1, i)) > opts.tol_abs) converged = false;

    if (converged || p >= dim) {
      // Rayleigh-Ritz refinement on the converged subspace: resolves
      // near-degenerate clusters to an orthonormal eigenbasis.
      Mat U = V.leftCols(p) * ritz_S.leftCols(nwant).cast<Cplx>();
      Eigen::HouseholderQR<Mat> qr(U);
      U = qr.householderQ() * Mat::Identity(dim, nwant);
      Mat AU(dim, nwant);
      for (int i = 0; i < nwant; ++i) {
        op.apply(U.col(i), w);
        AU.col(i) = w;
        ++matvecs;
      }
      Mat P = U.adjoint() * AU;
      P = 0.5 * (P + P.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Mat> esp(P);
      Eigenpairs out;
      out.values = esp.eigenvalues().head(nwant);
      out.vectors = U * esp.eigenvectors().leftCols(nwant);
      out.residuals.resize(nwant);
      bool ok = true;
      for (int i = 0; i < nwant; ++i) {
        op.apply(out.vectors.col(i), w);
        ++matvecs;
        out.residuals(i) = (w - out.values(i) * out.vectors.col(i)).norm();
        if (out.residuals(i) > opts.tol_abs) ok = false;
      }
      out.matvecs = matvecs;
      if (ok || p >= dim) return out;
      // estimates were optimistic; fall through and keep iterating
    }

    // thick restart: keep the lowest Ritz vectors plus the residual direction
    const int l_new = std::min(keep_target, p - 2);
    Mat U = V.leftCols(p) * ritz_S.leftCols(l_new).cast<Cplx>();
    Vec r;
    if (beta_out > 1e-300) {
      r = w / beta_out;
    } else {
      r = random_vec();
    }
    V.leftCols(l_new) = U;
    // re-orthonormalize the restart block against itself (drift control)
    for (int i = 0; i < l_new; ++i) {
      for (int pass = 0; pass < 2; ++pass)
        if (i > 0)
          V.col(i).noalias() -= V.leftCols(i) * (V.leftCols(i).adjoint() * V.col(i)).eval();
      const double nv = V.col(i).norm();
      if (nv > 0.0) V.col(i) /= nv;
    }
    theta.assign(ritz_vals.data(), ritz_vals.data() + l_new);
    bcoef.resize(l_new);
    for (int i = 0; i < l_new; ++i) bcoef[i] = beta_out * ritz_S(p - 1, i);
    for (int pass = 0; pass < 2; ++pass)
      r.noalias() -= V.leftCols(l_new) * (V.leftCols(l_new).adjoint() * r).eval();
    const double rn = r.norm();
    V.col(l_new) = rn > 1e-12 ? Vec(r / rn) : random_vec().normalized();
    l = l_new;
    p = l + 1;
  }

  std::ostringstream os;
  os << "lanczos did not converge: k=" << k << " dim=" << dim << " tol=" << opts.tol_abs
     << " after " << opts.max_cycles << " cycles (" << matvecs << " matvecs)";
  throw ConvergenceError(os.str());
}

}  // namespace dtc
