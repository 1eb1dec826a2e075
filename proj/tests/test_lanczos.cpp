#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "dtc/hamiltonian.hpp"
#include "dtc/lanczos.hpp"

using namespace dtc;
using Catch::Approx;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace {

// Diagonal test operator with known spectrum, including a degenerate cluster.
struct DiagOp {
  Eigen::VectorXd d;
  Eigen::Index dim() const { return d.size(); }
  void apply(const Vec& in, Vec& out) const {
    out = d.cast<std::complex<double>>().cwiseProduct(in);
  }
};

}  // namespace

TEST_CASE("diagonal operator with a degenerate cluster") {
  const Eigen::Index n = 400;
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = 10.0 + static_cast<double>(i);
  d(0) = 1.0;
  d(1) = 1.0;
  d(2) = 1.0;  // triple degeneracy at the bottom
  d(3) = 2.5;
  DiagOp op{d};
  LanczosOptions lo;
  lo.tol_abs = 1e-9 * d.maxCoeff();
  const Eigenpairs e = lanczos_lowest(op, 6, lo);
  CHECK(e.values(0) == Approx(1.0).margin(1e-8));
  CHECK(e.values(1) == Approx(1.0).margin(1e-8));
  CHECK(e.values(2) == Approx(1.0).margin(1e-8));
  CHECK(e.values(3) == Approx(2.5).margin(1e-8));
  CHECK(e.values(4) == Approx(14.0).margin(1e-8));
  CHECK(e.values(5) == Approx(15.0).margin(1e-8));
  // orthonormal cluster basis
  const Mat gram = e.vectors.adjoint() * e.vectors;
  CHECK((gram - Mat::Identity(6, 6)).norm() < 1e-8);
  for (int i = 0; i < 6; ++i) CHECK(e.residuals(i) <= lo.tol_abs);
}

TEST_CASE("matches dense diagonalization of the N=2 Hamiltonian") {
  const DerivedParams dp = derive_all(CircuitParams::reference_design());
  const HamiltonianAction h = assemble_hamiltonian(dp, 0.61 * M_PI, 0.0, 2);
  Eigen::SelfAdjointEigenSolver<Mat> es(h.densify());
  LanczosOptions lo;
  lo.tol_abs = 1e-8 * h.norm_bound();
  const int k = 12;
  const Eigenpairs e = lanczos_lowest(h, k, lo);
  for (int i = 0; i < k; ++i)
    CHECK(e.values(i) == Approx(es.eigenvalues()(i)).epsilon(1e-9));
  // residuals verified against the reported bound
  for (int i = 0; i < k; ++i) CHECK(e.residuals(i) <= lo.tol_abs);
}

TEST_CASE("k = 1 satisfies the Rayleigh identity") {
  const DerivedParams dp = derive_all(CircuitParams::reference_design());
  const HamiltonianAction h = assemble_hamiltonian(dp, 0.3, 0.0, 2);
  LanczosOptions lo;
  lo.tol_abs = 1e-8 * h.norm_bound();
  const Eigenpairs e = lanczos_lowest(h, 1, lo);
  const Vec v = e.vectors.col(0);
  const std::complex<double> rayleigh = v.dot(h.apply(v));
  CHECK(std::real(rayleigh) == Approx(e.values(0)).epsilon(1e-10));
  CHECK(std::abs(std::imag(rayleigh)) < 1e-10 * std::abs(e.values(0)));
}

TEST_CASE("warm start converges and stays deterministic") {
  const DerivedParams dp = derive_all(CircuitParams::reference_design());
  const HamiltonianAction h = assemble_hamiltonian(dp, 0.5, 0.0, 2);
  LanczosOptions lo;
  lo.tol_abs = 1e-8 * h.norm_bound();
  const Eigenpairs a = lanczos_lowest(h, 4, lo);
  const Eigenpairs b = lanczos_lowest(h, 4, lo);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);  // fixed seed, same path
  LanczosOptions warm = lo;
  warm.initial = a.vectors.col(0);
  const Eigenpairs c = lanczos_lowest(h, 4, warm);
  CHECK((a.values - c.values).cwiseAbs().maxCoeff() < 1e-9 * h.norm_bound());
  CHECK(c.matvecs <= a.matvecs);
}

TEST_CASE("full-space basis returns the exact spectrum of tiny operators") {
  Eigen::VectorXd d(8);
  d << 3, 1, 4, 1.5, 9, 2.6, 5, 3.5;
  DiagOp op{d};
  LanczosOptions lo;
  lo.tol_abs = 1e-12 * 9.0;
  const Eigenpairs e = lanczos_lowest(op, 8, lo);
  Eigen::VectorXd sorted = d;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  CHECK((e.values - sorted).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("option validation") {
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(16, 0.0, 15.0);
  DiagOp op{d};
  LanczosOptions lo;  // tol unset
  CHECK_THROWS_AS(lanczos_lowest(op, 2, lo), ConfigError);
  lo.tol_abs = 1e-10;
  CHECK_THROWS_AS(lanczos_lowest(op, 0, lo), ConfigError);
  CHECK_THROWS_AS(lanczos_lowest(op, 17, lo), ConfigError);
}
