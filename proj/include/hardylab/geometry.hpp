// Exact distance-to-boundary geometry for a catalog of analytic model
// domains: the distance function, its gradient and Laplacian, boundary
// components with their dimensions, and the normal projector.
//
// Only domains with closed-form distance are supported, so the bundle
// invariants (unit gradient, Laplacian ~ (d-k-1)/delta near low-dimensional
// components) hold exactly rather than to mesh accuracy.
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hardylab/util.hpp"

namespace hardylab::geometry {

struct Point {
	double x = 0.0;
	double y = 0.0;
	int dim = 2;

	double norm() const { return dim == 1 ? std::abs(x) : std::hypot(x, y); }
};

struct BoundaryComponent {
	int id = 0;
	int dimension = 0;       // k: 0 = point, 1 = curve
	// Geometric descriptor: points use center as the location; circles use
	// center + radius.
	Point center;
	double radius = 0.0;     // 0 for point components
};

struct DistanceBundle {
	double delta = 0.0;
	std::array<double, 2> grad_delta{0.0, 0.0};
	double laplacian_delta = 0.0;
	int nearest_component = 0;
	int component_dimension = 0;
};

class Domain {
public:
	enum class Kind { Interval, Disk, Annulus, PuncturedDisk };

	static Domain interval(double lo, double hi) {
		if (!(lo < hi)) throw ValidationError("interval requires lo < hi");
		Domain d;
		d.kind_ = Kind::Interval;
		d.p1_ = lo;
		d.p2_ = hi;
		d.dim_ = 1;
		d.components_ = {{0, 0, {lo, 0.0, 1}, 0.0}, {1, 0, {hi, 0.0, 1}, 0.0}};
		d.nu_omega_ = (hi - lo) / 2.0;
		return d;
	}

	static Domain disk(double radius) {
		if (!(radius > 0)) throw ValidationError("disk requires radius > 0");
		Domain d;
		d.kind_ = Kind::Disk;
		d.p1_ = radius;
		d.dim_ = 2;
		d.components_ = {{0, 1, {0.0, 0.0, 2}, radius}};
		// Single component: the bundle stays smooth up to the medial point at
		// the center; half the radius keeps every layer well clear of it.
		d.nu_omega_ = radius / 2.0;
		return d;
	}

	static Domain annulus(double r_in, double r_out) {
		if (!(0 < r_in && r_in < r_out))
			throw ValidationError("annulus requires 0 < r_in < r_out");
		Domain d;
		d.kind_ = Kind::Annulus;
		d.p1_ = r_in;
		d.p2_ = r_out;
		d.dim_ = 2;
		d.components_ = {{0, 1, {0.0, 0.0, 2}, r_in}, {1, 1, {0.0, 0.0, 2}, r_out}};
		d.nu_omega_ = (r_out - r_in) / 2.0;
		return d;
	}

	static Domain punctured_disk(double radius) {
		if (!(radius > 0))
			throw ValidationError("punctured disk requires radius > 0");
		Domain d;
		d.kind_ = Kind::PuncturedDisk;
		d.p1_ = radius;
		d.dim_ = 2;
		d.components_ = {{0, 0, {0.0, 0.0, 2}, 0.0}, {1, 1, {0.0, 0.0, 2}, radius}};
		d.nu_omega_ = radius / 2.0;
		return d;
	}

	Kind kind() const { return kind_; }
	int dim() const { return dim_; }
	double nu_omega() const { return nu_omega_; }
	const std::vector<BoundaryComponent>& components() const { return components_; }

	const BoundaryComponent& component(int id) const {
		if (id < 0 || id >= static_cast<int>(components_.size()))
			throw UnknownKind("boundary component id " + std::to_string(id) +
			                  " out of range");
		return components_[static_cast<std::size_t>(id)];
	}

	// Interval bounds / radii accessors for grid construction.
	double param1() const { return p1_; }
	double param2() const { return p2_; }

	bool contains(const Point& p) const {
		switch (kind_) {
			case Kind::Interval: return p.x > p1_ && p.x < p2_;
			case Kind::Disk: return std::hypot(p.x, p.y) < p1_;
			case Kind::Annulus: {
				double r = std::hypot(p.x, p.y);
				return r > p1_ && r < p2_;
			}
			case Kind::PuncturedDisk: {
				double r = std::hypot(p.x, p.y);
				return r > 0.0 && r < p1_;
			}
		}
		return false;
	}

private:
	Kind kind_ = Kind::Interval;
	double p1_ = 0.0, p2_ = 0.0;
	int dim_ = 1;
	double nu_omega_ = 0.0;
	std::vector<BoundaryComponent> components_;
};

namespace detail {

// Distance to one component with gradient/Laplacian of that branch.
inline DistanceBundle component_branch(const Domain& dom,
                                       const BoundaryComponent& c,
                                       const Point& p) {
	DistanceBundle b;
	b.nearest_component = c.id;
	b.component_dimension = c.dimension;
	if (dom.dim() == 1) {
		// Point endpoints of an interval: delta = |x - c|, flat geometry.
		double diff = p.x - c.center.x;
		b.delta = std::abs(diff);
		b.grad_delta = {diff >= 0 ? 1.0 : -1.0, 0.0};
		b.laplacian_delta = 0.0;
		return b;
	}
	double rho = std::hypot(p.x, p.y);
	if (c.dimension == 0) {
		// Center point: delta = |x|; Laplacian of |x| in 2-D is 1/|x|.
		b.delta = rho;
		b.grad_delta = {p.x / rho, p.y / rho};
		b.laplacian_delta = 1.0 / rho;
	} else if (rho < c.radius) {
		// Inside a circle: delta = R - |x|.
		b.delta = c.radius - rho;
		b.grad_delta = {-p.x / rho, -p.y / rho};
		b.laplacian_delta = -1.0 / rho;
	} else {
		// Outside a circle (annulus inner wall): delta = |x| - R.
		b.delta = rho - c.radius;
		b.grad_delta = {p.x / rho, p.y / rho};
		b.laplacian_delta = 1.0 / rho;
	}
	return b;
}

}  // namespace detail

inline DistanceBundle distance_bundle(const Domain& dom, const Point& p) {
	if (p.dim != dom.dim())
		throw ValidationError("point dimension does not match domain");
	if (!dom.contains(p))
		throw PointOutsideDomain("point is on or outside the boundary");
	if (dom.dim() == 2 && dom.kind() == Domain::Kind::Disk &&
	    std::hypot(p.x, p.y) < 1e-14)
		throw AmbiguousNearest("disk center lies on the medial axis");

	const auto& comps = dom.components();
	DistanceBundle best = detail::component_branch(dom, comps[0], p);
	for (std::size_t i = 1; i < comps.size(); ++i) {
		DistanceBundle cand = detail::component_branch(dom, comps[i], p);
		if (std::abs(cand.delta - best.delta) <= 1e-14)
			throw AmbiguousNearest("equidistant to components " +
			                       std::to_string(best.nearest_component) + " and " +
			                       std::to_string(cand.nearest_component));
		if (cand.delta < best.delta) best = cand;
	}
	return best;
}

// P_x = (grad delta)(grad delta)^T: symmetric, idempotent, rank one.
inline std::array<std::array<double, 2>, 2> normal_projection(const DistanceBundle& b) {
	const auto& g = b.grad_delta;
	return {{{g[0] * g[0], g[0] * g[1]}, {g[1] * g[0], g[1] * g[1]}}};
}

// Deterministic tangent completion: rotate grad delta by +pi/2 (2-D only).
// Point at prescribed distance from one boundary component, on the interior
// side. `t` parametrizes the component: the polar angle for circles and rays
// from a point component; ignored for interval endpoints. Restricted to
// delta < nu_Omega so the named component is genuinely the nearest one.
inline Point point_at(const Domain& dom, int component, double delta, double t = 0.0) {
	if (!(delta > 0.0 && delta < dom.nu_omega()))
		throw OutOfLayer("point_at requires 0 < delta < nu_Omega");
	if (component < 0 || component >= static_cast<int>(dom.components().size()))
		throw UnknownKind("no boundary component with id " + std::to_string(component));
	double c = std::cos(t), s = std::sin(t);
	switch (dom.kind()) {
		case Domain::Kind::Interval:
			return {component == 0 ? dom.param1() + delta : dom.param2() - delta, 0.0, 1};
		case Domain::Kind::Disk:
			return {(dom.param1() - delta) * c, (dom.param1() - delta) * s, 2};
		case Domain::Kind::Annulus: {
			double rho = component == 0 ? dom.param1() + delta : dom.param2() - delta;
			return {rho * c, rho * s, 2};
		}
		case Domain::Kind::PuncturedDisk: {
			double rho = component == 0 ? delta : dom.param1() - delta;
			return {rho * c, rho * s, 2};
		}
	}
	throw UnknownKind("unreachable domain kind");
}

inline std::array<double, 2> tangent_direction(const DistanceBundle& b) {
	return {-b.grad_delta[1], b.grad_delta[0]};
}

}  // namespace hardylab::geometry
