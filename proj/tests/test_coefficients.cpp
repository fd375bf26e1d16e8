#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "hardylab/coefficients.hpp"

using namespace hardylab;
using namespace hardylab::coeff;
using expr::parse;
using geometry::Domain;
using geometry::Point;
using Catch::Approx;

namespace {

Point pt(double x, double y) { return {x, y, 2}; }

CoefficientModel interval_model(const char* r, const char* gamma, const char* a,
                                const char* beta) {
	CoefficientModel m;
	m.domain = Domain::interval(0.0, 1.0);
	m.r = parse(r);
	m.gamma = parse(gamma);
	m.a = parse(a);
	m.beta = parse(beta);
	m.nu0 = 0.25;
	return finalize(std::move(m));
}

// Degenerate radial structure of the two-dimensional model with alpha = 1 and
// no angular modulation: density (1-r)^(-1) r^(-1), radial diffusion 1/2,
// angular diffusion (1/2)(1-r)^2 r^2.
CoefficientModel ars_like_model() {
	CoefficientModel m;
	m.domain = Domain::disk(1.0);
	m.r = parse("1/r");
	m.gamma = parse("-1");
	m.a = parse("0.5");
	m.beta = parse("0");
	m.d12 = parse("0");
	m.d22 = parse("0.5*r^2*delta^2");
	m.nu0 = 0.3;
	return finalize(std::move(m));
}

}  // namespace

TEST_CASE("density evaluation: flat, power-law, and degenerate radial") {
	auto flat = interval_model("1", "0", "1", "0");
	auto [rho0, grad0] = rho_eval(flat, {0.37, 0.0, 1});
	CHECK(rho0 == 1.0);
	CHECK(grad0[0] == 0.0);

	auto inv = interval_model("1", "-1", "1", "0");
	auto [rho1, grad1] = rho_eval(inv, {0.1, 0.0, 1});
	CHECK(rho1 == Approx(10.0));
	// rho = delta^(-1) near the left endpoint: d(rho)/dx = -delta^(-2).
	CHECK(grad1[0] == Approx(-100.0));

	auto ars = ars_like_model();
	auto [rho2, grad2] = rho_eval(ars, pt(0.5, 0.0));
	CHECK(rho2 == Approx(4.0));
}

TEST_CASE("density must stay positive") {
	auto bad = interval_model("-1", "0", "1", "0");
	CHECK_THROWS_AS(rho_eval(bad, {0.2, 0.0, 1}), NonpositiveDensity);
}

TEST_CASE("diffusion matrix assembly in the distance frame") {
	auto iso = []() {
		CoefficientModel m;
		m.domain = Domain::disk(1.0);
		m.a = parse("1");
		m.beta = parse("0");
		m.nu0 = 0.3;
		return finalize(std::move(m));
	}();
	Eigen::MatrixXd D = diffusion_eval(iso, pt(0.4, 0.3));
	CHECK(D(0, 0) == Approx(1.0));
	CHECK(D(1, 1) == Approx(1.0));
	CHECK(D(0, 1) == Approx(0.0).margin(1e-15));

	// Frame-aligned point on the +x axis of the disk: the normal is the x
	// direction, so the frame blocks land on the diagonal.
	CoefficientModel m;
	m.domain = Domain::disk(1.0);
	m.a = parse("2");
	m.beta = parse("1");
	m.d12 = parse("0");
	m.d22 = parse("3");
	m.nu0 = 0.3;
	m = finalize(std::move(m));
	Eigen::MatrixXd Df = diffusion_eval(m, pt(0.75, 0.0));  // delta = 0.25
	CHECK(Df(0, 0) == Approx(0.5));
	CHECK(Df(1, 1) == Approx(3.0));
	CHECK(Df(0, 1) == Approx(0.0).margin(1e-14));

	Eigen::MatrixXd Da = diffusion_eval(ars_like_model(), pt(0.5, 0.0));
	CHECK(Da(0, 0) == Approx(0.5));
	CHECK(Da(1, 1) == Approx(0.03125));
	CHECK(Da(0, 1) == Approx(0.0).margin(1e-14));
}

TEST_CASE("one-dimensional diffusion is the scalar normal block") {
	auto m = interval_model("1", "0", "2", "1.5");
	Eigen::MatrixXd D = diffusion_eval(m, {0.09, 0.0, 1});
	REQUIRE(D.rows() == 1);
	CHECK(D(0, 0) == Approx(2.0 * std::pow(0.09, 1.5)));
}

TEST_CASE("Schur reduction: hand examples") {
	Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
	P(0, 0) = 1.0;

	Eigen::Matrix2d D1;
	D1 << 2, 0, 0, 3;
	SchurData s1 = schur_decompose(D1, P);
	CHECK(s1.d == Approx(2.0));
	CHECK(s1.q == Approx(0.0).margin(1e-15));
	CHECK(s1.d_tilde == Approx(0.5));

	Eigen::Matrix2d D2;
	D2 << 2, 1, 1, 1;
	SchurData s2 = schur_decompose(D2, P);
	CHECK(s2.d == Approx(2.0));
	CHECK(std::abs(s2.d12(0, 0)) == Approx(1.0));
	CHECK(s2.d22(0, 0) == Approx(1.0));
	CHECK(s2.q == Approx(0.5));
	CHECK(s2.d_tilde == Approx(1.0));
}

TEST_CASE("Schur reduction against brute-force inversion on random SPD matrices") {
	std::mt19937_64 rng(23);
	std::normal_distribution<double> gauss(0.0, 1.0);
	for (int trial = 0; trial < 1000; ++trial) {
		int n = 2 + trial % 4;  // sizes 2..5
		Eigen::MatrixXd A(n, n);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
		Eigen::MatrixXd D =
		    A.transpose() * A + 0.1 * n * Eigen::MatrixXd::Identity(n, n);
		Eigen::VectorXd v(n);
		for (int i = 0; i < n; ++i) v(i) = gauss(rng);
		v.normalize();
		Eigen::MatrixXd P = v * v.transpose();

		SchurData s = schur_decompose(D, P);
		REQUIRE(s.q >= 0.0);
		REQUIRE(s.q < 1.0);
		REQUIRE((D * s.D_inv - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-10);
		Eigen::MatrixXd direct = D.inverse();
		REQUIRE((s.D_inv - direct).norm() < 1e-10 * std::max(1.0, direct.norm()));
	}
}

TEST_CASE("Schur ratio is scale invariant") {
	std::mt19937_64 rng(31);
	std::normal_distribution<double> gauss(0.0, 1.0);
	Eigen::Matrix2d A;
	A << gauss(rng), gauss(rng), gauss(rng), gauss(rng);
	Eigen::Matrix2d D = A.transpose() * A + 0.2 * Eigen::Matrix2d::Identity();
	Eigen::Vector2d v(gauss(rng), gauss(rng));
	v.normalize();
	Eigen::Matrix2d P = v * v.transpose();
	double q1 = schur_decompose(D, P).q;
	for (double c : {0.5, 2.0, 17.0, 1e6}) {
		double qc = schur_decompose(c * D, P).q;
		CHECK(std::abs(qc - q1) < 1e-12);
	}
}

TEST_CASE("degenerate tangent block is rejected") {
	Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
	P(0, 0) = 1.0;
	Eigen::Matrix2d D;
	D << 1, 0, 0, 1e-14;
	CHECK_THROWS_AS(schur_decompose(D, P), DegenerateTangentBlock);
	Eigen::Matrix2d N;
	N << 1, 0, 0, -1;
	CHECK_THROWS_AS(schur_decompose(N, P), NotPositiveDefinite);
}

TEST_CASE("field gradients chain through the actual geometry") {
	// Finite differences through distance_bundle probe the full composite
	// field p -> e(delta(p), p), which the symbolic gradient must match.
	auto dom = Domain::disk(1.0);
	Expr e = parse("delta^2*r + sin(theta)*delta");
	std::mt19937_64 rng(5);
	std::uniform_real_distribution<double> u01(0.0, 1.0);
	int checked = 0;
	for (int i = 0; i < 200; ++i) {
		double rad = 0.55 + 0.4 * u01(rng);  // stay clear of the medial center
		double th = 2 * M_PI * u01(rng);
		Point p = pt(rad * std::cos(th), rad * std::sin(th));
		auto b = geometry::distance_bundle(dom, p);
		auto g = field_gradient(e, b, p);
		const double h = 1e-6;
		auto probe = [&](double dx, double dy) {
			Point q = pt(p.x + dx, p.y + dy);
			return field_eval(e, geometry::distance_bundle(dom, q), q);
		};
		CHECK((probe(h, 0) - probe(-h, 0)) / (2 * h) == Approx(g[0]).margin(1e-5));
		CHECK((probe(0, h) - probe(0, -h)) / (2 * h) == Approx(g[1]).margin(1e-5));
		++checked;
	}
	REQUIRE(checked == 200);
}

TEST_CASE("density and diffusion spectrum are frame independent") {
	auto m = ars_like_model();
	std::mt19937_64 rng(41);
	std::uniform_real_distribution<double> u01(0.0, 1.0);
	for (int i = 0; i < 100; ++i) {
		double rad = 0.4 + 0.5 * u01(rng);
		double th = 2 * M_PI * u01(rng);
		double phi = 2 * M_PI * u01(rng);
		Point p = pt(rad * std::cos(th), rad * std::sin(th));
		Point p_rot = pt(rad * std::cos(th + phi), rad * std::sin(th + phi));
		CHECK(std::abs(rho_eval(m, p).rho - rho_eval(m, p_rot).rho) < 1e-10);
		Eigen::Vector2d ev1 =
		    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(diffusion_eval(m, p))
		        .eigenvalues();
		Eigen::Vector2d ev2 =
		    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(diffusion_eval(m, p_rot))
		        .eigenvalues();
		CHECK((ev1 - ev2).norm() < 1e-10);
	}
}

TEST_CASE("assumption audit: constants are clean, rough fields are flagged") {
	auto flat = interval_model("1", "0", "1", "0");
	AuditReport rep = assumption_audit(flat, 2000, 0);
	CHECK_FALSE(rep.violated);
	CHECK(rep.summary == "no violation detected");
	for (const auto& q : rep.quantities) CHECK(q.sup == 0.0);

	// beta = 1 + delta^(1/2) with s_beta = 1/2: |grad beta| delta^(1/2) = 1/2.
	CoefficientModel mb;
	mb.domain = Domain::interval(0.0, 1.0);
	mb.beta = parse("1 + delta^0.5");
	mb.s = 0.5;
	mb.s_beta = 0.5;
	mb.nu0 = 0.25;
	mb = finalize(std::move(mb));
	AuditReport rb = assumption_audit(mb, 2000, 0);
	CHECK_FALSE(rb.violated);
	CHECK(rb.quantities[2].sup == Approx(0.5).epsilon(1e-6));

	// gamma = sin(1/delta): the gradient grows like delta^(-2) through the
	// shells, which the dyadic growth heuristic must flag.
	CoefficientModel mg;
	mg.domain = Domain::interval(0.0, 1.0);
	mg.gamma = parse("sin(1/delta)");
	mg.nu0 = 0.25;
	mg = finalize(std::move(mg));
	AuditReport rg = assumption_audit(mg, 2000, 0);
	CHECK(rg.violated);
	CHECK(rg.quantities[0].violated);
	CHECK_FALSE(rg.quantities[2].violated);
}

TEST_CASE("audit of the Schur ratio gradient") {
	// d12 proportional to the normal block keeps q constant: clean.
	CoefficientModel m;
	m.domain = Domain::disk(1.0);
	m.a = parse("1");
	m.beta = parse("1");
	m.d12 = parse("0.5*delta^0.5");
	m.d22 = parse("1");
	m.nu0 = 0.3;
	m = finalize(std::move(m));
	// q = d12^2/(a delta^beta d22) = 0.25 everywhere: the gradient vanishes
	// algebraically, leaving only rounding noise of order eps/delta.
	AuditReport rep = assumption_audit(m, 1000, 0);
	CHECK(rep.quantities[3].sup == Approx(0.0).margin(1e-6));
	CHECK_FALSE(rep.quantities[3].violated);
}

TEST_CASE("model validation rejects malformed layers and seams") {
	CoefficientModel m;
	m.domain = Domain::interval(0.0, 1.0);
	m.nu0 = 0.6;  // exceeds min{nu_Omega, 1/e}
	CHECK_THROWS_AS(finalize(std::move(m)), ValidationError);

	CoefficientModel ms;
	ms.domain = Domain::interval(0.0, 1.0);
	ms.s = 0.5;
	ms.s_beta = 0.7;  // violates s_beta <= s
	ms.nu0 = 0.25;
	CHECK_THROWS_AS(finalize(std::move(ms)), ValidationError);

	CoefficientModel md;
	md.domain = Domain::interval(0.0, 1.0);
	md.nu0 = 0.25;
	md.rho_bulk = parse("2");  // layer density is 1: discontinuous seam
	CHECK_THROWS_AS(finalize(std::move(md)), IncompatibleModel);

	CoefficientModel mc;
	mc.domain = Domain::interval(0.0, 1.0);
	mc.gamma = parse("-1");
	mc.nu0 = 0.25;
	mc.rho_bulk = parse("delta^(-1)");  // matches the layer form: fine
	CHECK_NOTHROW(finalize(std::move(mc)));
}

TEST_CASE("potential evaluation uses layer and bulk descriptors") {
	CoefficientModel m;
	m.domain = Domain::interval(0.0, 1.0);
	m.V = parse("delta^(-2)");
	m.nu0 = 0.25;
	m = finalize(std::move(m));
	CHECK(potential_eval(m, {0.1, 0.0, 1}) == Approx(100.0));
	CHECK(potential_eval(m, {0.4, 0.0, 1}) == Approx(6.25));  // delta = 0.4 bulk side
}
