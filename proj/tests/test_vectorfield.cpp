#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hardylab/barriers.hpp"
#include "hardylab/vectorfield.hpp"

using namespace hardylab;
using namespace hardylab::vf;
using expr::parse;
using geometry::Domain;
using geometry::Point;
using Catch::Approx;

namespace {

const double kE = std::exp(1.0);

coeff::CoefficientModel make_model(Domain dom, const char* beta, const char* gamma,
                                   const char* a = "1", const char* r = "1",
                                   double nu0 = 0.0) {
	coeff::CoefficientModel m;
	m.domain = dom;
	m.beta = parse(beta);
	m.gamma = parse(gamma);
	m.a = parse(a);
	m.r = parse(r);
	m.nu0 = nu0 > 0.0 ? nu0 : 0.9 * std::min(dom.nu_omega(), std::exp(-1.0));
	return coeff::finalize(std::move(m));
}

}  // namespace

TEST_CASE("cutoff: plateaus, monotonicity, and gradient bound") {
	CutoffPsi psi{0.2};
	CHECK(psi.value(0.05) == 1.0);
	CHECK(psi.value(0.1) == 1.0);
	CHECK(psi.value(0.15) == 0.0);
	CHECK(psi.value(0.19) == 0.0);
	double prev = 1.0;
	for (int i = 1; i <= 100; ++i) {
		double d = 0.1 + 0.05 * i / 100.0;
		double v = psi.value(d);
		CHECK(v <= prev + 1e-15);
		CHECK(v >= 0.0);
		CHECK(v <= 1.0);
		prev = v;
		CHECK(std::abs(psi.ddelta(d)) <= 8.0 / 0.2 + 1e-12);
		// C^1: the stated derivative matches finite differences. The margin
		// covers the one-sided O(h) error where the second derivative jumps.
		double h = 1e-7;
		double fd = (psi.value(d + h) - psi.value(d - h)) / (2 * h);
		CHECK(fd == Approx(psi.ddelta(d)).margin(1e-4));
	}
}

TEST_CASE("ansatz evaluation: hand values, cutoff zone, and normal direction") {
	auto m = make_model(Domain::interval(0.0, 1.0), "2", "0", "1", "1", 0.35);
	AnsatzField x0{Variant::X0, 1, 0.0, &m};

	// delta = e^-2 is inside the full-strength zone: X = (1/2) delta (1 + 1/2).
	double d = std::exp(-2.0);
	auto X = ansatz_eval(x0, {d, 0.0, 1});
	CHECK(X[0] == Approx(0.75 * d).epsilon(1e-12));

	// Outside three quarters of the layer the cutoff kills the field.
	auto Xout = ansatz_eval(x0, {0.28, 0.0, 1});
	CHECK(Xout[0] == 0.0);

	// The bracket's zero crossing: with beta = gamma = 0 the chain value 1 at
	// delta = 1/e cancels beta+gamma-1 = -1 exactly.
	auto flat = make_model(Domain::interval(0.0, 1.0), "0", "0");
	AnsatzField f0{Variant::X0, 1, 0.0, &flat};
	auto b = geometry::distance_bundle(flat.domain, {1.0 / kE, 0.0, 1});
	CHECK(layer_magnitude(f0, b, {1.0 / kE, 0.0, 1}) == Approx(0.0).margin(1e-12));

	// In two dimensions the field is parallel to grad delta.
	auto disk = make_model(Domain::disk(1.0), "1.5", "-0.5", "2");
	AnsatzField xd{Variant::X0, 1, 0.0, &disk};
	std::mt19937_64 rng(3);
	std::uniform_real_distribution<double> u01(0.0, 1.0);
	for (int i = 0; i < 200; ++i) {
		double rad = 0.75 + 0.2 * u01(rng);
		double th = 2 * M_PI * u01(rng);
		Point p{rad * std::cos(th), rad * std::sin(th), 2};
		auto Xp = ansatz_eval(xd, p);
		auto bp = geometry::distance_bundle(disk.domain, p);
		double cross = Xp[0] * bp.grad_delta[1] - Xp[1] * bp.grad_delta[0];
		CHECK(std::abs(cross) < 1e-12 * (1.0 + std::hypot(Xp[0], Xp[1])));
	}
}

TEST_CASE("certificate on the flat interval: numeric equals closed form") {
	auto m = make_model(Domain::interval(0.0, 1.0), "0", "0", "1", "1", 0.35);
	AnsatzField x0{Variant::X0, 1, 0.0, &m};
	double d = std::exp(-2.0);
	CertificateValue c = vf_certificate(x0, {d, 0.0, 1});
	// 1-D flat geometry: R0 = 0 and the bracket is (1/4)[(beta+gamma-1)^2 +
	// (ln 1/delta)^-2] = (1/4)(1 + 1/4) at delta = e^-2.
	CHECK(c.closed_R0 == Approx(0.0).margin(1e-15));
	CHECK(c.closed_form == Approx(0.3125 * std::exp(4.0)).epsilon(1e-12));
	CHECK(c.numeric == Approx(c.closed_form).epsilon(1e-4));
}

TEST_CASE("certificate vanishes where the cutoff does") {
	auto m = make_model(Domain::interval(0.0, 1.0), "0", "0", "1", "1", 0.35);
	AnsatzField x0{Variant::X0, 1, 0.0, &m};
	CertificateValue c = vf_certificate(x0, {0.30, 0.0, 1});  // past 3 nu0/4
	CHECK(c.numeric == 0.0);
}

TEST_CASE("certificate on the disk: curvature remainder") {
	auto m = make_model(Domain::disk(1.0), "0", "0", "1", "1", 0.3);
	AnsatzField x0{Variant::X0, 1, 0.0, &m};
	Point p{0.99, 0.0, 2};  // delta = 0.01
	CertificateValue c = vf_certificate(x0, p);
	double f = 1.0 / std::log(100.0);
	// R0 = ((beta+gamma-1+f)/2) delta Lap delta with Lap delta = -1/0.99.
	double expect_R0 = ((-1.0 + f) / 2.0) * 0.01 * (-1.0 / 0.99);
	CHECK(c.closed_R0 == Approx(expect_R0).epsilon(1e-10));
	CHECK(c.numeric == Approx(c.closed_form).epsilon(1e-4));
}

TEST_CASE("certificate guards its numerical domain") {
	auto m = make_model(Domain::interval(0.0, 1.0), "0", "0", "1", "1", 0.35);
	AnsatzField x0{Variant::X0, 1, 0.0, &m};
	CHECK_THROWS_AS(vf_certificate(x0, {1e-13, 0.0, 1}), StepUnderflow);
	CHECK_THROWS_AS(vf_certificate(x0, {0.4, 0.0, 1}), OutOfLayer);
}

TEST_CASE("finite-difference divergence converges at second order") {
	auto m = make_model(Domain::disk(1.0), "1", "0", "2", "1", 0.3);
	AnsatzField x0{Variant::X0, 1, 0.0, &m};
	Point p{0.95 * std::cos(0.7), 0.95 * std::sin(0.7), 2};
	double e1 = std::abs(vf_certificate(x0, p, 2e-4).numeric -
	                     vf_certificate(x0, p, 2e-4).closed_form);
	double e2 = std::abs(vf_certificate(x0, p, 1e-4).numeric -
	                     vf_certificate(x0, p, 1e-4).closed_form);
	double ratio = e1 / e2;
	CHECK(ratio > 3.0);
	CHECK(ratio < 5.0);
}

TEST_CASE("certificate per unit density is gauge invariant") {
	for (const char* r : {"7", "0.037"}) {
		auto m1 = make_model(Domain::disk(1.0), "1.5", "-0.5", "2", "1", 0.3);
		auto m2 = make_model(Domain::disk(1.0), "1.5", "-0.5", "2", r, 0.3);
		AnsatzField f1{Variant::X0, 1, 0.0, &m1}, f2{Variant::X0, 1, 0.0, &m2};
		Point p{0.93, 0.0, 2};
		double c1 = vf_certificate(f1, p).numeric;
		double c2 = vf_certificate(f2, p).numeric;
		CHECK(std::abs(c1 - c2) <= 1e-10 * std::abs(c1));
	}
}

TEST_CASE("hierarchy variant matches its chain closed form") {
	// 1-D constant exponents with beta+gamma-1 = 0: the certificate reduces
	// to (1/4) a delta^(beta-2) sum of M_k^2 over the depth-(N+1) chain.
	auto m = make_model(Domain::interval(0.0, 1.0), "1.5", "-0.5", "2", "1", 0.35);
	for (int N : {1, 2, 3}) {
		AnsatzField xn{Variant::XN, N, 0.0, &m};
		double d = 0.05;
		CertificateValue c = vf_certificate(xn, {d, 0.0, 1});
		auto chain = barrier::iterlog_chain(kE, N + 1, d);
		double sq = 0.0;
		for (double mv : chain.M) sq += mv * mv;
		double expect = 2.0 * std::pow(d, -0.5) * 0.25 * sq;
		CHECK(c.numeric == Approx(expect).epsilon(1e-4));
	}

	// Disk version picks up the curvature remainder with the chain value f.
	auto md = make_model(Domain::disk(1.0), "0", "0", "1", "1", 0.3);
	AnsatzField x2{Variant::XN, 2, 0.0, &md};
	Point p{0.98, 0.0, 2};
	auto b = geometry::distance_bundle(md.domain, p);
	auto chain = barrier::iterlog_chain(kE, 3, b.delta);
	double sq = 0.0;
	for (double mv : chain.M) sq += mv * mv;
	double R0 = vf::detail::remainder_R0(md, b, p, chain.f);
	double expect = std::pow(b.delta, -2.0) * (0.25 * 1.0 + 0.25 * sq + R0);
	CHECK(vf_certificate(x2, p).numeric == Approx(expect).epsilon(1e-4));
}

TEST_CASE("doubly logarithmic variant matches its bracket") {
	// The operator owns the log correction: the model declares the full
	// normal coefficient a = (ln 1/delta)^alpha. For constant exponents,
	// cert/rho = a0 delta^(beta-2) (ln 1/delta)^alpha
	// [ (1/4)(b - alpha L)^2 + ((1-2alpha-alpha^2)/4) L^2
	//   + (1/4) L^2 (K^2 - 2 alpha K) ], K = 1/lnln(1/delta).
	auto m = make_model(Domain::interval(0.0, 1.0), "0", "0",
	                    "log(1/delta)^(1/3)", "1", 0.35);
	double alpha = 1.0 / 3.0;
	AnsatzField xa{Variant::Xalpha, 1, alpha, &m};
	double d = 0.01;
	CertificateValue c = vf_certificate(xa, {d, 0.0, 1});
	double L = 1.0 / std::log(1.0 / d), K = 1.0 / std::log(std::log(1.0 / d));
	double bracket = 0.25 * (-1.0 - alpha * L) * (-1.0 - alpha * L) +
	                 0.25 * (1.0 - 2.0 * alpha - alpha * alpha) * L * L +
	                 0.25 * L * L * (K * K - 2.0 * alpha * K);
	double expect = std::pow(d, -2.0) * std::pow(std::log(1.0 / d), alpha) * bracket;
	CHECK(c.numeric == Approx(expect).epsilon(1e-3));

	// Its layer is narrower: the cutoff zeroes the field beyond 3/4 of
	// min(nu0, e^-e) even though nu0 is larger.
	double w = std::exp(-kE);
	auto X = ansatz_eval(xa, {0.9 * w, 0.0, 1});
	CHECK(X[0] == 0.0);
}

TEST_CASE("remainder audit: flat interval, curved disk, variable exponent") {
	auto flat = make_model(Domain::interval(0.0, 1.0), "1.5", "-0.5", "2", "3", 0.35);
	RemainderAudit ra = remainder_audit(flat, Variant::X0);
	CHECK(ra.scaled_sup == 0.0);
	CHECK(ra.nu1 == Approx(0.35 / 2.0));
	CHECK_FALSE(ra.no_valid_layer);

	auto disk = make_model(Domain::disk(1.0), "0", "0", "1", "1", 0.3);
	RemainderAudit rd = remainder_audit(disk, Variant::X0);
	CHECK(rd.scaled_sup > 0.0);
	CHECK(rd.nu1 > 1e-4);
	CHECK_FALSE(rd.no_valid_layer);

	// beta + gamma - 1 + f > 0 makes the disk's curvature remainder negative
	// near the rim: the validity layer shrinks but survives.
	auto hard = make_model(Domain::disk(1.0), "2", "0", "1", "1", 0.3);
	RemainderAudit rh = remainder_audit(hard, Variant::X0);
	CHECK(rh.nu1 > 1e-4);
	CHECK(rh.nu1 < 0.15);
	CHECK_FALSE(rh.no_valid_layer);

	coeff::CoefficientModel varm;
	varm.domain = Domain::interval(0.0, 1.0);
	varm.beta = parse("1 + delta^0.5");
	varm.s = 0.5;
	varm.s_beta = 0.5;
	varm.nu0 = 0.25;
	varm = coeff::finalize(std::move(varm));
	RemainderAudit rv = remainder_audit(varm, Variant::X0);
	CHECK(std::isfinite(rv.scaled_sup));
	CHECK(rv.scaled_sup > 0.0);
	CHECK_FALSE(rv.no_valid_layer);
}

TEST_CASE("certificate dominates the base barrier on the certified layer") {
	std::mt19937_64 rng(29);
	std::uniform_real_distribution<double> u01(0.0, 1.0);
	for (const char* beta : {"0", "1", "1.5"}) {
		for (const char* gamma : {"0", "-0.5"}) {
			for (int which : {0, 1}) {
				auto dom = which == 0 ? Domain::interval(0.0, 1.0) : Domain::disk(1.0);
				auto m = make_model(dom, beta, gamma);
				RemainderAudit ra = remainder_audit(m, Variant::X0);
				REQUIRE_FALSE(ra.no_valid_layer);
				AnsatzField x0{Variant::X0, 1, 0.0, &m};
				barrier::BarrierSpec base{barrier::Family::Base, 1, 0.0, &m};
				for (int i = 0; i < 100; ++i) {
					double d = ra.nu1 * std::pow(10.0, -4.0 * u01(rng));
					if (d < 2e-12) continue;
					int comp = static_cast<int>(u01(rng) * dom.components().size()) %
					           static_cast<int>(dom.components().size());
					Point p = geometry::point_at(dom, comp, d, 2 * M_PI * u01(rng));
					double cert = vf_certificate(x0, p).numeric;
					double bar = barrier::barrier_eval(base, p).value;
					CHECK(cert >= bar - std::max(1e-4 * std::abs(bar), 1e-8));
				}
			}
		}
	}
}
