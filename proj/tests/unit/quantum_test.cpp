#include "doctest.h"

#include "hydrolab/classical.hpp"
#include "hydrolab/oracles.hpp"
#include "hydrolab/quantum.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

using namespace hydrolab;

namespace {

DenseOperator dense(const Operator& A) { return DenseOperator(A); }

double max_abs(const DenseOperator& A) { return A.cwiseAbs().maxCoeff(); }

struct SepSystem {
  LatticeGeometry g;
  ClassicalModel model;
  FockSpace space;
  LindbladModel L;

  SepSystem(long N, double left, double right)
      : g(build_interval(N)),
        model(make_exclusion_model(g, two_sided_reservoir(left, right))),
        space(g.size(), Statistics::Fermion),
        L(assemble_lindblad(model, space, g)) {}
};

struct ZrpSystem {
  LatticeGeometry g;
  ClassicalModel model;
  FockSpace space;
  LindbladModel L;

  ZrpSystem(long N, int cap, double left, double right)
      : g(build_interval(N)),
        model(make_zero_range_model(g, two_sided_reservoir(left, right), constant_rate(), cap)),
        space(g.size(), Statistics::Boson, cap),
        L(assemble_lindblad(model, space, g)) {}
};

// One site with entry h and exit rate r.
LindbladModel single_site(double h, double r, FockSpace& space) {
  const LatticeGeometry g = build_interval(2);
  ClassicalModel m = make_exclusion_model(g, two_sided_reservoir(h, h));
  m.exits = {static_cast<int>(r)};
  return assemble_lindblad(m, space, g);
}

}  // namespace

TEST_CASE("Fock space dimensions and ordering") {
  const FockSpace f2(2, Statistics::Fermion);
  CHECK(f2.dimension() == 4);
  CHECK(f2.occupation(1).n == std::vector<std::uint8_t>{0, 1});
  CHECK(f2.occupation(2).n == std::vector<std::uint8_t>{1, 0});
  CHECK(FockSpace(2, Statistics::Boson, 2).dimension() == 9);

  const FockSpace f3(3, Statistics::Fermion);
  const DenseOperator n2 = dense(ladder_ops(f3).number[1]);
  for (Eigen::Index i = 0; i < f3.dimension(); ++i) CHECK(n2(i, i).real() == f3.occupation(i).n[1]);
  CHECK((n2 - DenseOperator(n2.diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("fermion ladder operators") {
  const FockSpace f(3, Statistics::Fermion);
  const LadderOps ops = ladder_ops(f);
  const Eigen::Index d = f.dimension();
  const DenseOperator I = DenseOperator::Identity(d, d);
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 3; ++y) {
      const DenseOperator ax = dense(ops.annihilate[x]), ay = dense(ops.annihilate[y]);
      const DenseOperator cy = dense(ops.create[y]);
      const DenseOperator anti = ax * cy + cy * ax;
      CHECK(max_abs(anti - (x == y ? I : DenseOperator::Zero(d, d))) < 1e-15);
      CHECK(max_abs(ax * ay + ay * ax) < 1e-15);
    }
    CHECK(max_abs(dense(ops.create[x]) * dense(ops.annihilate[x]) - dense(ops.number[x])) < 1e-15);
  }

  const FockSpace two(2, Statistics::Fermion);
  const LadderOps t = ladder_ops(two);
  Eigen::VectorXcd psi01 = Eigen::VectorXcd::Zero(4);
  psi01(two.index_of(Configuration{{0, 1}})) = 1.0;
  const Eigen::VectorXcd out = dense(t.create[0]) * (dense(t.annihilate[1]) * psi01);
  CHECK(out(two.index_of(Configuration{{1, 0}})) == Complex(1.0, 0.0));
  CHECK(out.norm() == doctest::Approx(1.0));
}

TEST_CASE("boson ladder operators below the cap") {
  const FockSpace f(2, Statistics::Boson, 4);
  const LadderOps ops = ladder_ops(f);
  const DenseOperator n0 = dense(ops.create[0]) * dense(ops.annihilate[0]);
  for (Eigen::Index i = 0; i < f.dimension(); ++i) CHECK(n0(i, i).real() == doctest::Approx(f.occupation(i).n[0]));
  const DenseOperator comm = dense(ops.annihilate[0]) * dense(ops.create[0]) - n0;
  for (Eigen::Index i = 0; i < f.dimension(); ++i) {
    if (f.occupation(i).n[0] < 4) CHECK(comm(i, i).real() == doctest::Approx(1.0));
  }
  CHECK(max_abs(dense(ops.annihilate[0]) * dense(ops.create[1]) - dense(ops.create[1]) * dense(ops.annihilate[0])) <
        1e-14);
}

TEST_CASE("bounded boson operators") {
  const FockSpace f(2, Statistics::Boson, 3);
  const BoundedBosonOps ops = bounded_boson_ops(f);
  for (Eigen::Index i = 0; i < f.dimension(); ++i) {
    const Configuration c = f.occupation(i);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(f.dimension());
    psi(i) = 1.0;
    const Eigen::VectorXcd lowered = dense(ops.lower[0]) * psi;
    const Eigen::VectorXcd raised = dense(ops.raise[0]) * psi;
    if (c.n[0] == 0) {
      CHECK(lowered.norm() == 0.0);
    } else {
      Configuration m = c;
      --m.n[0];
      CHECK(lowered(f.index_of(m)) == Complex(1.0, 0.0));
    }
    if (c.n[0] < 3) {
      Configuration p = c;
      ++p.n[0];
      CHECK(raised(f.index_of(p)) == Complex(1.0, 0.0));
    } else {
      CHECK(raised.norm() == 0.0);
    }
  }
  Eigen::JacobiSVD<DenseOperator> svd(dense(ops.lower[1]));
  CHECK(svd.singularValues()(0) == doctest::Approx(1.0));
}

TEST_CASE("gauge action") {
  const FockSpace f(3, Statistics::Fermion);
  const LadderOps ops = ladder_ops(f);
  const Eigen::Index d = f.dimension();
  CHECK(max_abs(dense(gauge_unitary(f, Eigen::VectorXd::Zero(3))) - DenseOperator::Identity(d, d)) == 0.0);
  const Eigen::VectorXd theta = Eigen::Vector3d(0.3, -1.1, 2.4);
  for (std::size_t x = 0; x < 3; ++x) {
    const DenseOperator a = dense(ops.annihilate[x]);
    const Complex phase = std::exp(Complex(0.0, -theta(static_cast<Eigen::Index>(x))));
    CHECK(max_abs(gauge_automorphism(f, theta, a) - phase * a) < 1e-14);
    const DenseOperator n = dense(ops.number[x]);
    CHECK(max_abs(gauge_automorphism(f, theta, n) - n) < 1e-14);
  }
  const DenseOperator A = DenseOperator::Random(d, d);
  const Eigen::VectorXcd lhs = gauge_superoperator(f, theta) * vectorize(A);
  CHECK((lhs - vectorize(gauge_automorphism(f, theta, A))).norm() < 1e-13);
}

TEST_CASE("Lindblad assembly") {
  SepSystem s(3, 0.5, 0.5);
  CHECK(s.L.jumps.size() == 6);
  CHECK(s.L.H.nonZeros() == 0);
  const FockSpace bosons(2, Statistics::Boson, 1);
  CHECK_THROWS_AS(assemble_lindblad(s.model, bosons, s.g), std::invalid_argument);

  // Jumps map diagonal states to diagonal states.
  const DenseOperator rho = lift_state(Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
  for (const auto& j : s.L.jumps) {
    const DenseOperator out = dense(j.V) * rho * dense(j.V).adjoint();
    CHECK(max_abs(out - DenseOperator(out.diagonal().asDiagonal())) == 0.0);
  }
}

TEST_CASE("closed system conserves the particle number") {
  SepSystem s(5, 0.5, 0.5);
  LindbladModel closed = s.L;
  std::erase_if(closed.jumps, [](const JumpOperator& j) { return j.label.rfind("hop", 0) != 0; });
  CHECK(closed.jumps.size() == 6);
  DenseOperator total = DenseOperator::Zero(s.space.dimension(), s.space.dimension());
  for (const auto& n : ladder_ops(s.space).number) total += dense(n);
  CHECK(max_abs(heisenberg_generator(closed, total)) < 1e-14);
}

TEST_CASE("generator identities") {
  SepSystem s(4, 0.7, 0.2);
  const Eigen::Index d = s.space.dimension();
  CHECK(max_abs(heisenberg_generator(s.L, DenseOperator(DenseOperator::Identity(d, d)))) < 1e-15);
  DenseOperator rho = DenseOperator::Random(d, d);
  rho = rho * rho.adjoint();
  CHECK(std::abs(schrodinger_generator(s.L, rho).trace()) < 1e-13);

  // Duality tr(G_*(rho) A) = tr(rho G(A)), and the superoperators agree.
  const DenseOperator A = DenseOperator::Random(d, d);
  CHECK(std::abs((schrodinger_generator(s.L, rho) * A).trace() - (rho * heisenberg_generator(s.L, A)).trace()) < 1e-12);
  CHECK((heisenberg_superoperator(s.L) * vectorize(A) - vectorize(heisenberg_generator(s.L, A))).norm() < 1e-12);
  CHECK((schrodinger_superoperator(s.L) * vectorize(rho) - vectorize(schrodinger_generator(s.L, rho))).norm() < 1e-12);
  CHECK(max_abs(dense(heisenberg_generator(s.L, Operator(A.sparseView()))) - heisenberg_generator(s.L, A)) < 1e-12);
}

TEST_CASE("single site generator on the number operator") {
  FockSpace f(1, Statistics::Fermion);
  const double h = 0.4, r = 1.0;
  const LindbladModel L = single_site(h, r, f);
  const DenseOperator n = dense(ladder_ops(f).number[0]);
  const DenseOperator I = DenseOperator::Identity(2, 2);
  CHECK(max_abs(heisenberg_generator(L, n) - (h * (I - n) - r * n)) < 1e-15);

  const StationaryState st = stationary_state(L);
  CHECK(st.certified_unique());
  CHECK(st.rho(0, 0).real() == doctest::Approx(r / (h + r)).epsilon(1e-12));
  CHECK(st.rho(1, 1).real() == doctest::Approx(h / (h + r)).epsilon(1e-12));
  CHECK(std::abs(st.rho(0, 1)) < 1e-14);
}

TEST_CASE("evolution") {
  SepSystem s(3, 0.6, 0.3);
  const Eigen::Index d = s.space.dimension();
  DenseOperator rho0 = DenseOperator::Zero(d, d);
  rho0(0, 0) = 0.5;
  rho0(3, 3) = 0.5;
  rho0(0, 3) = rho0(3, 0) = 0.5;  // pure superposition of empty and full
  CHECK(max_abs(evolve(s.L, rho0, 0.0) - rho0) == 0.0);

  const DenseOperator a = evolve(s.L, evolve(s.L, rho0, 0.4), 0.9);
  const DenseOperator b = evolve(s.L, rho0, 1.3);
  CHECK(max_abs(a - b) < 1e-10);

  // Matrix exponential of the dense superoperator as an independent oracle.
  const Eigen::MatrixXcd S = Eigen::MatrixXcd(schrodinger_superoperator(s.L));
  const Eigen::MatrixXcd E = (1.3 * S).exp();
  CHECK(max_abs(unvectorize(E * vectorize(rho0), d) - b) < 1e-10);

  DensityDiagnostics diag;
  evolve(s.L, rho0, 5.0, &diag);
  CHECK(diag.trace_error < 1e-12);
  CHECK(diag.min_eigenvalue > -1e-10);

  const StationaryState st = stationary_state(s.L);
  CHECK(max_abs(evolve(s.L, st.rho, 2.0) - st.rho) < 1e-9);
}

TEST_CASE("stationary states are unique and diagonal") {
  SepSystem sep(3, 0.5, 1.5);
  CHECK(commutant_dimension(sep.L) == 1);
  const StationaryState st = stationary_state(sep.L);
  CHECK(st.certified_unique());
  CHECK(st.residual < 1e-12);
  CHECK(max_abs(st.rho - DenseOperator(st.rho.diagonal().asDiagonal())) < 1e-12);

  // Without reservoirs the number sectors decouple: one scalar per sector,
  // plus the two maps between the one-dimensional empty and full sectors.
  LindbladModel closed = sep.L;
  std::erase_if(closed.jumps, [](const JumpOperator& j) { return j.label.rfind("hop", 0) != 0; });
  CHECK(commutant_dimension(closed) == 5);
  CHECK(null_space_dimension(schrodinger_superoperator(closed)) > 1);
}

TEST_CASE("gauge average") {
  const FockSpace f(2, Statistics::Fermion);
  const LadderOps ops = ladder_ops(f);
  CHECK(max_abs(gauge_average(dense(ops.annihilate[0]))) == 0.0);
  CHECK(max_abs(gauge_average(dense(ops.number[1])) - dense(ops.number[1])) == 0.0);
  CHECK(max_abs(gauge_average(dense(ops.create[1]) * dense(ops.annihilate[0]))) == 0.0);
}

TEST_CASE("restriction to diagonal observables") {
  SepSystem sep(4, 0.8, 0.2);
  CHECK(check_classical_restriction(sep.L, build_generator_matrix(sep.model, sep.g)) < 1e-12);
  ZrpSystem zrp(3, 3, 0.3, 0.1);
  CHECK(check_classical_restriction(zrp.L, build_generator_matrix(zrp.model, zrp.g)) < 1e-12);

  LindbladModel perturbed = sep.L;
  perturbed.jumps[0].V *= std::sqrt(1.1);
  CHECK(check_classical_restriction(perturbed, build_generator_matrix(sep.model, sep.g)) > 0.05);
}

TEST_CASE("gauge covariance") {
  SepSystem sep(3, 0.8, 0.2);
  Engine rng = make_stream(3, 0);
  CHECK(check_gauge_covariance(sep.L, sep.space, 1, rng) == 0.0);
  CHECK(check_gauge_covariance(sep.L, sep.space, 16, rng) < 1e-10);

  LindbladModel broken = sep.L;
  const LadderOps ops = ladder_ops(sep.space);
  broken.jumps.push_back({"field", Operator(ops.annihilate[0] + ops.create[0])});
  CHECK(check_gauge_covariance(broken, sep.space, 16, rng) > 0.1);
}

TEST_CASE("lifted classical states") {
  FockSpace f(1, Statistics::Fermion);
  const double h = 0.9;
  const LindbladModel L = single_site(h, 1.0, f);
  const DenseOperator lifted = lift_state(Eigen::Vector2d(1.0 / (1.0 + h), h / (1.0 + h)));
  CHECK(max_abs(lifted - stationary_state(L).rho) < 1e-12);

  ZrpSystem zrp(3, 16, 0.3, 0.1);
  const ZeroRangeProductMeasure pm = zrp_product_measure(zrp.model, zrp.g);
  const DenseOperator rho = lift_state(pm.as_vector(zrp.space.configurations()));
  // Stationary up to the truncation mass at the cap.
  CHECK(max_abs(schrodinger_generator(zrp.L, rho)) < 1e-8);
  const DensityDiagnostics diag = diagnose_density(rho);
  CHECK(diag.trace_error < 1e-14);
  CHECK(diag.hermiticity_error == 0.0);
  CHECK(diag.min_eigenvalue >= 0.0);
}

TEST_CASE("triplet output") {
  const FockSpace f(1, Statistics::Fermion);
  std::ostringstream os;
  write_triplets(os, ladder_ops(f).annihilate[0]);
  CHECK(os.str().find("0 1 1") != std::string::npos);
}
