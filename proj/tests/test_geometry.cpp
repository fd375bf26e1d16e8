#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hardylab/geometry.hpp"

using namespace hardylab;
using namespace hardylab::geometry;
using Catch::Approx;

namespace {

Point pt(double x, double y) { return {x, y, 2}; }
Point pt1(double x) { return {x, 0.0, 1}; }

// Random interior point of a catalog domain, biased toward the boundary.
Point random_interior(const Domain& dom, std::mt19937_64& rng) {
	std::uniform_real_distribution<double> u01(0.0, 1.0);
	switch (dom.kind()) {
		case Domain::Kind::Interval: {
			double lo = dom.param1(), hi = dom.param2();
			return pt1(lo + (hi - lo) * (0.001 + 0.998 * u01(rng)));
		}
		case Domain::Kind::Disk: {
			double r = dom.param1() * (0.001 + 0.998 * u01(rng));
			double th = 2 * 3.14159265358979324 * u01(rng);
			return pt(r * std::cos(th), r * std::sin(th));
		}
		case Domain::Kind::Annulus: {
			double r = dom.param1() + (dom.param2() - dom.param1()) * (0.001 + 0.998 * u01(rng));
			double th = 2 * 3.14159265358979324 * u01(rng);
			return pt(r * std::cos(th), r * std::sin(th));
		}
		case Domain::Kind::PuncturedDisk: {
			double r = dom.param1() * (0.001 + 0.998 * u01(rng));
			double th = 2 * 3.14159265358979324 * u01(rng);
			return pt(r * std::cos(th), r * std::sin(th));
		}
	}
	return pt(0, 0);
}

double delta_of(const Domain& dom, const Point& p) {
	return distance_bundle(dom, p).delta;
}

}  // namespace

TEST_CASE("disk bundle closed forms") {
	Domain disk = Domain::disk(1.0);
	auto b = distance_bundle(disk, pt(0.5, 0.0));
	CHECK(b.delta == Approx(0.5));
	CHECK(b.grad_delta[0] == Approx(-1.0));
	CHECK(b.grad_delta[1] == Approx(0.0));
	CHECK(b.laplacian_delta == Approx(-2.0));
	CHECK(b.nearest_component == 0);
	CHECK(b.component_dimension == 1);
	CHECK(disk.nu_omega() == Approx(0.5));
}

TEST_CASE("interval bundle and nearest endpoint") {
	Domain iv = Domain::interval(0.0, 1.0);
	auto b = distance_bundle(iv, pt1(0.25));
	CHECK(b.delta == Approx(0.25));
	CHECK(b.grad_delta[0] == Approx(1.0));  // delta = x near the left endpoint
	CHECK(b.laplacian_delta == 0.0);
	CHECK(b.nearest_component == 0);
	auto b2 = distance_bundle(iv, pt1(0.9));
	CHECK(b2.delta == Approx(0.1));
	CHECK(b2.grad_delta[0] == Approx(-1.0));
	CHECK(b2.nearest_component == 1);
	CHECK(iv.nu_omega() == Approx(0.5));
}

TEST_CASE("punctured disk center component") {
	Domain pd = Domain::punctured_disk(1.0);
	auto b = distance_bundle(pd, pt(0.1, 0.0));
	CHECK(b.delta == Approx(0.1));
	CHECK(b.nearest_component == 0);
	CHECK(b.component_dimension == 0);
	// Laplacian of |x| in 2-D equals (d-k-1)/delta = 1/delta exactly.
	CHECK(b.laplacian_delta == Approx(10.0));
	auto b2 = distance_bundle(pd, pt(0.9, 0.0));
	CHECK(b2.nearest_component == 1);
	CHECK(b2.delta == Approx(0.1));
	CHECK(b2.laplacian_delta == Approx(-1.0 / 0.9));
}

TEST_CASE("annulus walls") {
	Domain an = Domain::annulus(0.5, 1.0);
	auto inner = distance_bundle(an, pt(0.0, 0.55));
	CHECK(inner.delta == Approx(0.05));
	CHECK(inner.nearest_component == 0);
	CHECK(inner.grad_delta[1] == Approx(1.0));
	CHECK(inner.laplacian_delta == Approx(1.0 / 0.55));
	auto outer = distance_bundle(an, pt(0.0, -0.95));
	CHECK(outer.delta == Approx(0.05));
	CHECK(outer.nearest_component == 1);
	CHECK(outer.grad_delta[1] == Approx(1.0));
	CHECK(an.nu_omega() == Approx(0.25));
}

TEST_CASE("outside and ambiguous points error") {
	Domain disk = Domain::disk(1.0);
	CHECK_THROWS_AS(distance_bundle(disk, pt(1.0, 0.0)), PointOutsideDomain);
	CHECK_THROWS_AS(distance_bundle(disk, pt(2.0, 0.0)), PointOutsideDomain);
	CHECK_THROWS_AS(distance_bundle(disk, pt(0.0, 0.0)), AmbiguousNearest);

	Domain iv = Domain::interval(0.0, 1.0);
	CHECK_THROWS_AS(distance_bundle(iv, pt1(0.5)), AmbiguousNearest);
	CHECK_THROWS_AS(distance_bundle(iv, pt1(0.0)), PointOutsideDomain);
	CHECK_THROWS_AS(distance_bundle(iv, pt1(-1.0)), PointOutsideDomain);

	Domain pd = Domain::punctured_disk(1.0);
	CHECK_THROWS_AS(distance_bundle(pd, pt(0.5, 0.0)), AmbiguousNearest);
	CHECK_THROWS_AS(distance_bundle(pd, pt(0.0, 0.0)), PointOutsideDomain);
}

TEST_CASE("normal projector is symmetric idempotent rank one") {
	DistanceBundle b;
	b.grad_delta = {1.0, 0.0};
	auto P = normal_projection(b);
	CHECK(P[0][0] == 1.0);
	CHECK(P[0][1] == 0.0);
	CHECK(P[1][1] == 0.0);

	b.grad_delta = {0.0, -1.0};
	P = normal_projection(b);
	CHECK(P[0][0] == 0.0);
	CHECK(P[1][1] == 1.0);

	double s = 1.0 / std::sqrt(2.0);
	b.grad_delta = {s, s};
	P = normal_projection(b);
	CHECK(P[0][0] == Approx(0.5));
	CHECK(P[0][1] == Approx(0.5));
	CHECK(P[1][0] == Approx(0.5));
	CHECK(P[1][1] == Approx(0.5));
}

TEST_CASE("bundle invariants on random interior points") {
	std::mt19937_64 rng(42);
	Domain domains[] = {Domain::interval(0.0, 1.0), Domain::disk(1.0),
	                    Domain::annulus(0.5, 1.0), Domain::punctured_disk(1.0)};
	for (const auto& dom : domains) {
		int checked = 0;
		for (int i = 0; i < 10000; ++i) {
			Point p = random_interior(dom, rng);
			DistanceBundle b;
			try {
				b = distance_bundle(dom, p);
			} catch (const AmbiguousNearest&) {
				continue;  // medial-axis tie: skip, never reached by layers
			}
			if (b.delta >= dom.nu_omega()) continue;
			++checked;
			double g2 = b.grad_delta[0] * b.grad_delta[0] + b.grad_delta[1] * b.grad_delta[1];
			REQUIRE(std::abs(std::sqrt(g2) - 1.0) < 1e-12);
			auto P = normal_projection(b);
			// P^2 = P within 1e-12
			for (int r = 0; r < 2; ++r)
				for (int c = 0; c < 2; ++c) {
					double p2 = P[r][0] * P[0][c] + P[r][1] * P[1][c];
					REQUIRE(std::abs(p2 - P[r][c]) < 1e-12);
				}
		}
		REQUIRE(checked > 1000);
	}
}

TEST_CASE("finite differences confirm gradient and Laplacian") {
	std::mt19937_64 rng(11);
	Domain domains[] = {Domain::disk(1.0), Domain::annulus(0.5, 1.0),
	                    Domain::punctured_disk(1.0)};
	for (const auto& dom : domains) {
		for (int i = 0; i < 200; ++i) {
			Point p = random_interior(dom, rng);
			DistanceBundle b;
			try {
				b = distance_bundle(dom, p);
			} catch (const AmbiguousNearest&) {
				continue;
			}
			if (b.delta < 1e-3 || b.delta >= dom.nu_omega()) continue;
			// Skip stencils that straddle the medial axis: delta is only
			// piecewise smooth there, so finite differences see the kink.
			double H = std::max(1e-5, 1e-3 * b.delta);
			bool crosses = false;
			for (auto [dx, dy] : {std::pair{H, 0.0}, {-H, 0.0}, {0.0, H}, {0.0, -H}}) {
				try {
					if (distance_bundle(dom, pt(p.x + dx, p.y + dy)).nearest_component !=
					    b.nearest_component)
						crosses = true;
				} catch (const AmbiguousNearest&) {
					crosses = true;
				}
			}
			if (crosses) continue;
			double h = 1e-6 * b.delta;
			double dfdx = (delta_of(dom, pt(p.x + h, p.y)) - delta_of(dom, pt(p.x - h, p.y))) / (2 * h);
			double dfdy = (delta_of(dom, pt(p.x, p.y + h)) - delta_of(dom, pt(p.x, p.y - h))) / (2 * h);
			CHECK(dfdx == Approx(b.grad_delta[0]).margin(1e-5));
			CHECK(dfdy == Approx(b.grad_delta[1]).margin(1e-5));
			// Laplacian by 5-point stencil with a larger step for conditioning.
			double lap = (delta_of(dom, pt(p.x + H, p.y)) + delta_of(dom, pt(p.x - H, p.y)) +
			              delta_of(dom, pt(p.x, p.y + H)) + delta_of(dom, pt(p.x, p.y - H)) -
			              4 * b.delta) / (H * H);
			CHECK(lap == Approx(b.laplacian_delta).epsilon(1e-4).margin(1e-4));
		}
	}
}
