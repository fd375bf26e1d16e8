// Quadrature-level verification of the Hardy inequalities: composite
// Gauss-Legendre grids graded into the boundary layer, smooth compactly
// supported test functions, the energy form h0[phi,phi] = int grad phi . D
// grad phi rho, the pointwise-barrier mass term, and a dense nodal
// eigenproblem that checks the inequality over a whole discrete subspace
// instead of one test function at a time.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hardylab/barriers.hpp"
#include "hardylab/coefficients.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/util.hpp"

namespace hardylab::quadform {

using coeff::CoefficientModel;
using geometry::Domain;
using geometry::Point;

namespace detail {

// 4-point Gauss-Legendre rule on [-1, 1]; composite over cells this is exact
// through degree 7, which keeps cell counts desk-scale on smooth integrands.
inline constexpr std::array<double, 4> kGlNode = {
    -0.86113631159405258, -0.33998104358485626,
    0.33998104358485626, 0.86113631159405258};
inline constexpr std::array<double, 4> kGlWeight = {
    0.34785484513745386, 0.65214515486254614,
    0.65214515486254614, 0.34785484513745386};

// Cell edges over a section of length span, measured from the wall at 0:
// cell widths grow geometrically from exactly 1e-6 at the wall to the far
// end, so the smallest cell pins the resolution at the coefficient
// singularity. The growth ratio solves deltamin (q^m - 1)/(q - 1) = span.
inline std::vector<double> graded_edges(double span, int cells) {
	constexpr double kDeltaMin = 1e-6;
	if (cells < 2) throw ValidationError("each graded section needs at least 2 cells");
	if (!(span > kDeltaMin * cells))
		throw ValidationError("graded section shorter than the smallest cells");
	auto total = [&](double q) {
		// Sum of the geometric widths without overflow for large q^m.
		return kDeltaMin * (std::pow(q, cells) - 1.0) / (q - 1.0);
	};
	double lo = 1.0 + 1e-12, hi = 2.0;
	while (total(hi) < span) hi *= 2.0;
	for (int it = 0; it < 200; ++it) {
		double mid = 0.5 * (lo + hi);
		(total(mid) < span ? lo : hi) = mid;
	}
	double q = 0.5 * (lo + hi);
	std::vector<double> e(static_cast<std::size_t>(cells) + 1);
	e[0] = 0.0;
	double w = kDeltaMin;
	for (int j = 1; j <= cells; ++j) {
		e[static_cast<std::size_t>(j)] = e[static_cast<std::size_t>(j - 1)] + w;
		w *= q;
	}
	e.back() = span;
	return e;
}

// Boundary distance as a function of the radial (or line) coordinate alone;
// grids never place cells across the medial set, so per-cell extrema of
// delta sit at cell edges.
inline double coordinate_delta(const Domain& dom, double c) {
	switch (dom.kind()) {
		case Domain::Kind::Interval:
			return std::min(c - dom.param1(), dom.param2() - c);
		case Domain::Kind::Disk:
			return dom.param1() - c;
		case Domain::Kind::Annulus:
			return std::min(c - dom.param1(), dom.param2() - c);
		case Domain::Kind::PuncturedDisk:
			return std::min(c, dom.param1() - c);
	}
	throw UnknownKind("domain kind");
}

// Uniform double in [0, 1) from the raw generator output; spelled out so the
// seed-to-function mapping does not depend on a library distribution.
inline double unit_double(std::mt19937_64& rng) {
	return static_cast<double>(rng() >> 11) * 0x1p-53;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grids.

struct QuadNode {
	Point p;
	double weight = 0.0;  // includes the volume element
	double delta = 0.0;
	std::array<double, 2> grad_delta{0.0, 0.0};
};

// Composite quadrature grid: a line grid on intervals, or a polar tensor
// grid on the radial two-dimensional domains. Radial/line cells are
// log-graded toward every boundary component down to a smallest cell of
// 1e-6 so the delta-power singularities are resolved without ever placing a
// quadrature node at delta = 0 (Gauss nodes are interior to their cells).
class Grid {
public:
	enum class Kind { Line, Polar };

	static Grid line(const Domain& dom, int cells) {
		if (dom.dim() != 1) throw ValidationError("line grids require an interval domain");
		if (cells < 4) throw ValidationError("line grids need at least 4 cells");
		Grid g;
		g.kind_ = Kind::Line;
		g.domain_ = dom;
		double lo = dom.param1(), hi = dom.param2(), mid = 0.5 * (lo + hi);
		auto left = detail::graded_edges(mid - lo, cells / 2);
		auto right = detail::graded_edges(hi - mid, cells - cells / 2);
		for (double d : left) g.coord_edges_.push_back(lo + d);
		for (std::size_t j = right.size() - 1; j-- > 0;)
			g.coord_edges_.push_back(hi - right[j]);
		g.build_nodes();
		return g;
	}

	static Grid polar(const Domain& dom, int radial_cells, int angular_cells) {
		if (dom.dim() != 2) throw ValidationError("polar grids require a two-dimensional domain");
		if (radial_cells < 4 || angular_cells < 4)
			throw ValidationError("polar grids need at least 4 cells per direction");
		Grid g;
		g.kind_ = Kind::Polar;
		g.domain_ = dom;
		g.angular_cells_ = angular_cells;
		switch (dom.kind()) {
			case Domain::Kind::Disk: {
				// Single wall at r = R; the far end of the section is the
				// (interior) center.
				auto e = detail::graded_edges(dom.param1(), radial_cells);
				for (std::size_t j = e.size(); j-- > 0;)
					g.coord_edges_.push_back(dom.param1() - e[j]);
				break;
			}
			case Domain::Kind::Annulus: {
				double mid = 0.5 * (dom.param1() + dom.param2());
				auto inner = detail::graded_edges(mid - dom.param1(), radial_cells / 2);
				auto outer = detail::graded_edges(dom.param2() - mid,
				                                  radial_cells - radial_cells / 2);
				for (double d : inner) g.coord_edges_.push_back(dom.param1() + d);
				for (std::size_t j = outer.size() - 1; j-- > 0;)
					g.coord_edges_.push_back(dom.param2() - outer[j]);
				break;
			}
			case Domain::Kind::PuncturedDisk: {
				double mid = 0.5 * dom.param1();
				auto center = detail::graded_edges(mid, radial_cells / 2);
				auto rim = detail::graded_edges(dom.param1() - mid,
				                                radial_cells - radial_cells / 2);
				for (double d : center) g.coord_edges_.push_back(d);
				for (std::size_t j = rim.size() - 1; j-- > 0;)
					g.coord_edges_.push_back(dom.param1() - rim[j]);
				break;
			}
			default:
				throw ValidationError("polar grids require a disk, annulus, or punctured disk");
		}
		g.build_nodes();
		return g;
	}

	Kind kind() const { return kind_; }
	const Domain& domain() const { return domain_; }
	// Line/radial cell edges in the line or radial coordinate.
	const std::vector<double>& coordinate_edges() const { return coord_edges_; }
	int radial_cells() const { return static_cast<int>(coord_edges_.size()) - 1; }
	int angular_cells() const { return angular_cells_; }
	int cell_count() const {
		return kind_ == Kind::Line ? radial_cells() : radial_cells() * angular_cells_;
	}
	int nodes_per_cell() const { return kind_ == Kind::Line ? 4 : 16; }
	const std::vector<QuadNode>& nodes() const { return nodes_; }

	double total_measure() const {
		double s = 0.0;
		for (const QuadNode& n : nodes_) s += n.weight;
		return s;
	}

	double smallest_cell() const {
		double w = std::numeric_limits<double>::infinity();
		for (std::size_t j = 0; j + 1 < coord_edges_.size(); ++j)
			w = std::min(w, coord_edges_[j + 1] - coord_edges_[j]);
		return w;
	}

	std::string describe() const {
		if (kind_ == Kind::Line) return "line(" + std::to_string(radial_cells()) + ")";
		return "polar(" + std::to_string(radial_cells()) + "x" +
		       std::to_string(angular_cells_) + ")";
	}

private:
	void build_nodes() {
		if (kind_ == Kind::Line) {
			nodes_.reserve(static_cast<std::size_t>(radial_cells()) * 4);
			for (std::size_t j = 0; j + 1 < coord_edges_.size(); ++j) {
				double a = coord_edges_[j], b = coord_edges_[j + 1];
				for (int q = 0; q < 4; ++q) {
					QuadNode n;
					double x = 0.5 * (a + b) + 0.5 * (b - a) * detail::kGlNode[q];
					n.p = Point{x, 0.0, 1};
					n.weight = 0.5 * (b - a) * detail::kGlWeight[q];
					auto bun = geometry::distance_bundle(domain_, n.p);
					n.delta = bun.delta;
					n.grad_delta = bun.grad_delta;
					nodes_.push_back(n);
				}
			}
			return;
		}
		double dtheta = 2.0 * kPi / angular_cells_;
		nodes_.reserve(static_cast<std::size_t>(cell_count()) * 16);
		for (std::size_t j = 0; j + 1 < coord_edges_.size(); ++j) {
			double ra = coord_edges_[j], rb = coord_edges_[j + 1];
			for (int t = 0; t < angular_cells_; ++t) {
				double ta = t * dtheta, tb = (t + 1) * dtheta;
				for (int qr = 0; qr < 4; ++qr) {
					double r = 0.5 * (ra + rb) + 0.5 * (rb - ra) * detail::kGlNode[qr];
					double wr = 0.5 * (rb - ra) * detail::kGlWeight[qr];
					for (int qt = 0; qt < 4; ++qt) {
						double th = 0.5 * (ta + tb) + 0.5 * (tb - ta) * detail::kGlNode[qt];
						double wt = 0.5 * (tb - ta) * detail::kGlWeight[qt];
						QuadNode n;
						n.p = Point{r * std::cos(th), r * std::sin(th), 2};
						n.weight = wr * wt * r;  // polar volume element
						auto bun = geometry::distance_bundle(domain_, n.p);
						n.delta = bun.delta;
						n.grad_delta = bun.grad_delta;
						nodes_.push_back(n);
					}
				}
			}
		}
	}

	static constexpr double kPi = 3.14159265358979323846;
	Kind kind_ = Kind::Line;
	Domain domain_ = Domain::interval(0.0, 1.0);
	std::vector<double> coord_edges_;
	int angular_cells_ = 0;
	std::vector<QuadNode> nodes_;
};

// ---------------------------------------------------------------------------
// Test functions.

struct BumpTerm {
	double amplitude = 0.0;
	double center = 0.0;
	double halfwidth = 0.0;
};

// Superposition of smooth bumps exp(-1/(1-t^2)) in the boundary-distance
// variable, with every term supported inside the shell [nu/4, 3 nu/4]; the
// function is C-infinity, vanishes identically outside the shell, and its
// gradient is amplitude/width-exact (no differencing).
class TestFunction {
public:
	TestFunction(std::vector<BumpTerm> terms, double nu)
	    : terms_(std::move(terms)), nu_(nu) {
		if (!(nu > 0.0)) throw ValidationError("test function layer nu must be positive");
		if (terms_.empty()) throw ValidationError("test function needs at least one bump");
		for (const BumpTerm& t : terms_) {
			if (!(t.halfwidth > 0.0))
				throw SupportViolation("bump halfwidth must be positive");
			if (t.center - t.halfwidth < 0.25 * nu - 1e-15 ||
			    t.center + t.halfwidth > 0.75 * nu + 1e-15)
				throw SupportViolation("bump support leaves the shell [nu/4, 3nu/4]");
		}
	}

	double nu() const { return nu_; }
	const std::vector<BumpTerm>& terms() const { return terms_; }
	double support_lo() const {
		double lo = std::numeric_limits<double>::infinity();
		for (const BumpTerm& t : terms_) lo = std::min(lo, t.center - t.halfwidth);
		return lo;
	}
	double support_hi() const {
		double hi = 0.0;
		for (const BumpTerm& t : terms_) hi = std::max(hi, t.center + t.halfwidth);
		return hi;
	}

	double value(double delta) const {
		double v = 0.0;
		for (const BumpTerm& b : terms_) {
			double t = (delta - b.center) / b.halfwidth;
			if (std::abs(t) < 1.0) v += b.amplitude * std::exp(-1.0 / (1.0 - t * t));
		}
		return v;
	}

	// d/d(delta); the spatial gradient is slope * grad delta.
	double slope(double delta) const {
		double s = 0.0;
		for (const BumpTerm& b : terms_) {
			double t = (delta - b.center) / b.halfwidth;
			if (std::abs(t) < 1.0) {
				double one = 1.0 - t * t;
				s += b.amplitude * std::exp(-1.0 / one) * (-2.0 * t / (one * one)) /
				     b.halfwidth;
			}
		}
		return s;
	}

private:
	std::vector<BumpTerm> terms_;
	double nu_;
};

// Deterministic test-function generator: the seed fixes every draw through a
// raw-integer mapping, so the same seed reproduces the same function on any
// platform. Amplitudes are bounded away from zero and widths away from the
// grid scale so the result is never degenerate.
inline TestFunction random_bump(std::uint64_t seed, double nu, int n_terms = 3) {
	if (n_terms < 1) throw ValidationError("random bump needs at least one term");
	std::mt19937_64 rng(seed);
	std::vector<BumpTerm> terms;
	terms.reserve(static_cast<std::size_t>(n_terms));
	for (int i = 0; i < n_terms; ++i) {
		BumpTerm t;
		double u = detail::unit_double(rng);
		t.center = 0.25 * nu + (0.05 + 0.9 * u) * 0.5 * nu;
		double avail = std::min(t.center - 0.25 * nu, 0.75 * nu - t.center);
		t.halfwidth = (0.1 + 0.85 * detail::unit_double(rng)) * avail;
		double sgn = detail::unit_double(rng) < 0.5 ? -1.0 : 1.0;
		t.amplitude = sgn * (0.1 + 0.9 * detail::unit_double(rng));
		terms.push_back(t);
	}
	return TestFunction(std::move(terms), nu);
}

// ---------------------------------------------------------------------------
// Form assembly.

// Caches density, diffusion, and potential at every quadrature node once,
// then evaluates h[phi,phi] (and the symmetric bilinear extension) by pure
// summation. Node data is computed in parallel over cells; the reduction is
// a fixed-order serial sum so results are deterministic under any schedule.
class FormEvaluator {
public:
	FormEvaluator(const CoefficientModel& m, Grid grid, bool include_V)
	    : grid_(std::move(grid)), include_V_(include_V) {
		const auto& nodes = grid_.nodes();
		rho_.resize(nodes.size());
		dxx_.resize(nodes.size());
		dxy_.assign(nodes.size(), 0.0);
		dyy_.assign(nodes.size(), 0.0);
		v_.assign(nodes.size(), 0.0);
		int per_cell = grid_.nodes_per_cell();
		std::vector<std::exception_ptr> errs(static_cast<std::size_t>(grid_.cell_count()));
		parallel_for(static_cast<std::size_t>(grid_.cell_count()), [&](std::size_t c) {
			try {
				for (int q = 0; q < per_cell; ++q) {
					std::size_t i = c * static_cast<std::size_t>(per_cell) +
					                static_cast<std::size_t>(q);
					const QuadNode& n = nodes[i];
					rho_[i] = coeff::rho_eval(m, n.p).rho;
					Eigen::MatrixXd D = coeff::diffusion_eval(m, n.p);
					dxx_[i] = D(0, 0);
					if (m.domain.dim() == 2) {
						dxy_[i] = D(0, 1);
						dyy_[i] = D(1, 1);
					}
					v_[i] = include_V_ ? coeff::potential_eval(m, n.p) : 0.0;
					if (std::abs(rho_[i]) > 1e300 || std::abs(dxx_[i]) > 1e300 ||
					    std::abs(dyy_[i]) > 1e300 || std::abs(v_[i]) > 1e300)
						throw SingularQuadraturePoint(
						    "coefficient exceeds 1e300 at delta = " +
						    format_double(n.delta));
				}
			} catch (...) {
				errs[c] = std::current_exception();
			}
		});
		for (const auto& e : errs)
			if (e) std::rethrow_exception(e);
	}

	const Grid& grid() const { return grid_; }

	// Energy of a general function given by value and Cartesian gradient.
	double energy(const std::function<double(const Point&)>& value,
	              const std::function<std::array<double, 2>(const Point&)>& gradient) const {
		const auto& nodes = grid_.nodes();
		double s = 0.0;
		for (std::size_t i = 0; i < nodes.size(); ++i) {
			auto g = gradient(nodes[i].p);
			double gdg = g[0] * (dxx_[i] * g[0] + dxy_[i] * g[1]) +
			             g[1] * (dxy_[i] * g[0] + dyy_[i] * g[1]);
			s += nodes[i].weight * rho_[i] * gdg;
			if (include_V_) {
				double v = value(nodes[i].p);
				s += nodes[i].weight * rho_[i] * v_[i] * v * v;
			}
		}
		return s;
	}

	// Radial test functions have gradient slope * grad delta, so only the
	// normal-normal component of D enters; terms vanish identically outside
	// the bump support and are skipped there.
	double bilinear(const TestFunction& phi, const TestFunction& psi) const {
		double lo = std::min(phi.support_lo(), psi.support_lo());
		double hi = std::max(phi.support_hi(), psi.support_hi());
		const auto& nodes = grid_.nodes();
		double s = 0.0;
		for (std::size_t i = 0; i < nodes.size(); ++i) {
			double d = nodes[i].delta;
			if (d <= lo || d >= hi) continue;
			const auto& n = nodes[i].grad_delta;
			double ndn = n[0] * (dxx_[i] * n[0] + dxy_[i] * n[1]) +
			             n[1] * (dxy_[i] * n[0] + dyy_[i] * n[1]);
			s += nodes[i].weight * rho_[i] * ndn * phi.slope(d) * psi.slope(d);
			if (include_V_)
				s += nodes[i].weight * rho_[i] * v_[i] * phi.value(d) * psi.value(d);
		}
		return s;
	}

	double operator()(const TestFunction& phi) const { return bilinear(phi, phi); }

	// Weighted mass sum(w rho weight(i) f(delta)^2) for a node-indexed weight.
	double weighted_mass(const TestFunction& phi, const std::vector<double>& weight) const {
		const auto& nodes = grid_.nodes();
		double lo = phi.support_lo(), hi = phi.support_hi();
		double s = 0.0;
		for (std::size_t i = 0; i < nodes.size(); ++i) {
			double d = nodes[i].delta;
			if (d <= lo || d >= hi) continue;
			double v = phi.value(d);
			s += nodes[i].weight * rho_[i] * weight[i] * v * v;
		}
		return s;
	}

	double rho_at(std::size_t i) const { return rho_[i]; }
	double dxx_at(std::size_t i) const { return dxx_[i]; }
	double dxy_at(std::size_t i) const { return dxy_[i]; }
	double dyy_at(std::size_t i) const { return dyy_[i]; }

private:
	Grid grid_;
	bool include_V_;
	std::vector<double> rho_, dxx_, dxy_, dyy_, v_;
};

inline FormEvaluator assemble_h(const CoefficientModel& m, Grid grid, bool include_V) {
	return FormEvaluator(m, std::move(grid), include_V);
}

// ---------------------------------------------------------------------------
// Hardy gap verification.

// Which barrier multiplies |phi|^2 rho in the mass term. scale = 0 is the
// zero barrier; leading_only drops the logarithmic correction (the classical
// quarter-constant barrier on the unit interval model).
struct ScaledBarrier {
	barrier::Family family = barrier::Family::Base;
	int depth = 1;
	double alpha = 0.0;
	double scale = 1.0;
	bool leading_only = false;
};

struct GapResult {
	double h0 = 0.0;
	double barrier_mass = 0.0;
	double gap = 0.0;
	double relative_gap = 0.0;
};

// Grid plus cached coefficient and barrier data for one (model, barrier, nu)
// triple, so sweeps over many test functions pay the assembly cost once.
class HardyVerifier {
public:
	HardyVerifier(const CoefficientModel& m, const ScaledBarrier& sb, double nu)
	    : HardyVerifier(m, sb, nu, default_grid(m.domain)) {}

	HardyVerifier(const CoefficientModel& m, const ScaledBarrier& sb, double nu, Grid grid)
	    : form_(m, std::move(grid), /*include_V=*/false), nu_(nu) {
		if (!(nu > 0.0) || nu > m.nu0 || !(nu < m.domain.nu_omega()))
			throw ValidationError("layer nu must lie in (0, min{nu0, nu_Omega})");
		cache_barrier(m, sb);
	}

	const FormEvaluator& form() const { return form_; }
	const Grid& grid() const { return form_.grid(); }
	double nu() const { return nu_; }

	GapResult gap(const TestFunction& phi) const {
		if (phi.support_hi() >= nu_)
			throw SupportViolation("test function support leaves the layer of width nu");
		GapResult r;
		r.h0 = form_(phi);
		r.barrier_mass = form_.weighted_mass(phi, barrier_weight_);
		r.gap = r.h0 - r.barrier_mass;
		r.relative_gap = r.h0 > 0.0 ? r.gap / r.h0 : 0.0;
		return r;
	}

	// Informational only: the layer bound stops at delta = nu, and the full-
	// domain statement compensates the bulk with an existential constant; we
	// report the barrier's scale just outside the layer as a sampled stand-in.
	double sampled_c1() const {
		double sup = 0.0;
		const auto& nodes = grid().nodes();
		for (std::size_t i = 0; i < nodes.size(); ++i)
			if (nodes[i].delta >= nu_ && nodes[i].delta < 2.0 * nu_ &&
			    seam_weight_[i] > sup)
				sup = seam_weight_[i];
		return sup;
	}

private:
	static Grid default_grid(const Domain& dom) {
		return dom.dim() == 1 ? Grid::line(dom, 1200) : Grid::polar(dom, 80, 48);
	}

	void cache_barrier(const CoefficientModel& m, const ScaledBarrier& sb) {
		const auto& nodes = grid().nodes();
		barrier_weight_.assign(nodes.size(), 0.0);
		seam_weight_.assign(nodes.size(), 0.0);
		if (sb.scale == 0.0) return;
		barrier::BarrierSpec spec;
		spec.family = sb.family;
		spec.depth = sb.depth;
		spec.alpha = sb.alpha;
		spec.model = &m;
		double seam_top = std::min(2.0 * nu_, std::min(m.nu0, 1.0));
		int per_cell = grid().nodes_per_cell();
		std::vector<std::exception_ptr> errs(
		    static_cast<std::size_t>(grid().cell_count()));
		parallel_for(static_cast<std::size_t>(grid().cell_count()), [&](std::size_t c) {
			try {
				for (int q = 0; q < per_cell; ++q) {
					std::size_t i = c * static_cast<std::size_t>(per_cell) +
					                static_cast<std::size_t>(q);
					double d = nodes[i].delta;
					if (d >= seam_top) continue;
					auto bv = barrier::barrier_eval(spec, nodes[i].p);
					double w = sb.scale *
					           (sb.leading_only ? bv.leading_term : bv.value);
					if (std::abs(w) > 1e300)
						throw SingularQuadraturePoint(
						    "barrier exceeds 1e300 at delta = " + format_double(d));
					if (d < nu_) barrier_weight_[i] = w;
					else seam_weight_[i] = std::max(w, 0.0);
				}
			} catch (...) {
				errs[c] = std::current_exception();
			}
		});
		for (const auto& e : errs)
			if (e) std::rethrow_exception(e);
	}

	FormEvaluator form_;
	double nu_;
	std::vector<double> barrier_weight_;
	std::vector<double> seam_weight_;
};

inline GapResult hardy_gap(const CoefficientModel& m, const ScaledBarrier& sb,
                           const TestFunction& phi, double nu) {
	return HardyVerifier(m, sb, nu).gap(phi);
}

// ---------------------------------------------------------------------------
// Dense nodal eigenproblem.

namespace detail {

// Whether the closed cell [a, b] in the line/radial coordinate lies inside
// the open layer {0 < delta < nu}. Cells never straddle the medial set, so
// checking both edges suffices.
inline bool cell_in_layer(const Domain& dom, double a, double b, double nu) {
	return std::max(coordinate_delta(dom, a), coordinate_delta(dom, b)) < nu;
}

}  // namespace detail

// Smallest eigenvalue of A - B over nodal functions supported in the layer:
// A is the discretized energy form in the piecewise-linear (bilinear on
// polar cells) nodal basis, B the mass weighted by barrier * rho. A node
// enters the subspace when it sits strictly off the boundary and every cell
// touching it lies inside the layer, so its basis function is supported in
// Gamma_nu. lambda_min >= -tol certifies the inequality over the whole
// discrete subspace, a much stronger check than any finite bump family.
inline double min_gap_eigen(const CoefficientModel& m, const ScaledBarrier& sb,
                            const Grid& grid, double nu) {
	if (grid.kind() == Grid::Kind::Line) {
		if (grid.coordinate_edges().size() > 2000)
			throw GridTooLarge("line eigenproblems are capped at 2000 nodes");
	} else {
		if (grid.radial_cells() > 60 || grid.angular_cells() > 64)
			throw GridTooLarge("polar eigenproblems are capped at 60x64 cells");
	}
	if (!(nu > 0.0) || nu > m.nu0 || !(nu < m.domain.nu_omega()))
		throw ValidationError("layer nu must lie in (0, min{nu0, nu_Omega})");

	FormEvaluator form(m, grid, /*include_V=*/false);
	const auto& nodes = grid.nodes();
	const auto& edges = grid.coordinate_edges();
	const Domain& dom = grid.domain();

	// Barrier weight at quadrature nodes inside the layer.
	std::vector<double> bw(nodes.size(), 0.0);
	if (sb.scale != 0.0) {
		barrier::BarrierSpec spec;
		spec.family = sb.family;
		spec.depth = sb.depth;
		spec.alpha = sb.alpha;
		spec.model = &m;
		for (std::size_t i = 0; i < nodes.size(); ++i)
			if (nodes[i].delta < nu) {
				auto bv = barrier::barrier_eval(spec, nodes[i].p);
				bw[i] = sb.scale * (sb.leading_only ? bv.leading_term : bv.value);
			}
	}

	// Radial mask: which radial/line nodes have all adjacent cells in the
	// layer and positive boundary distance.
	std::size_t nr = edges.size();
	std::vector<bool> cell_in(nr - 1);
	for (std::size_t j = 0; j + 1 < nr; ++j)
		cell_in[j] = detail::cell_in_layer(dom, edges[j], edges[j + 1], nu);
	std::vector<bool> node_in(nr);
	for (std::size_t j = 0; j < nr; ++j) {
		bool in = detail::coordinate_delta(dom, edges[j]) > 0.0;
		if (j > 0) in = in && cell_in[j - 1];
		if (j + 1 < nr) in = in && cell_in[j];
		node_in[j] = in;
	}

	if (grid.kind() == Grid::Kind::Line) {
		std::vector<int> idx(nr, -1);
		int nm = 0;
		for (std::size_t j = 0; j < nr; ++j)
			if (node_in[j]) idx[j] = nm++;
		if (nm == 0) throw ValidationError("no nodal functions supported in the layer");
		Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nm, nm);
		for (std::size_t c = 0; c + 1 < nr; ++c) {
			if (!cell_in[c]) continue;
			double h = edges[c + 1] - edges[c];
			double grad[2] = {-1.0 / h, 1.0 / h};
			int gi[2] = {idx[c], idx[c + 1]};
			for (int q = 0; q < 4; ++q) {
				std::size_t i = c * 4 + static_cast<std::size_t>(q);
				double x = nodes[i].p.x;
				double shp[2] = {(edges[c + 1] - x) / h, (x - edges[c]) / h};
				double wr = nodes[i].weight * form.rho_at(i);
				for (int a = 0; a < 2; ++a) {
					if (gi[a] < 0) continue;
					for (int b = 0; b < 2; ++b) {
						if (gi[b] < 0) continue;
						K(gi[a], gi[b]) +=
						    wr * form.dxx_at(i) * grad[a] * grad[b] -
						    wr * bw[i] * shp[a] * shp[b];
					}
				}
			}
		}
		Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
		return es.eigenvalues()(0);
	}

	// Polar: bilinear basis on (r, theta) cells, node (jr, jt) -> jr*nt + jt
	// with periodic wrap in theta.
	int nt = grid.angular_cells();
	std::vector<int> idx(nr * static_cast<std::size_t>(nt), -1);
	int nm = 0;
	for (std::size_t jr = 0; jr < nr; ++jr)
		if (node_in[jr])
			for (int jt = 0; jt < nt; ++jt)
				idx[jr * static_cast<std::size_t>(nt) + static_cast<std::size_t>(jt)] =
				    nm++;
	if (nm == 0) throw ValidationError("no nodal functions supported in the layer");
	Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nm, nm);
	double dtheta = 2.0 * 3.14159265358979323846 / nt;
	for (std::size_t cr = 0; cr + 1 < nr; ++cr) {
		if (!cell_in[cr]) continue;
		double ra = edges[cr], rb = edges[cr + 1], hr = rb - ra;
		for (int ct = 0; ct < nt; ++ct) {
			double ta = ct * dtheta;
			int corner[4];
			corner[0] = idx[cr * static_cast<std::size_t>(nt) + static_cast<std::size_t>(ct)];
			corner[1] = idx[(cr + 1) * static_cast<std::size_t>(nt) +
			                static_cast<std::size_t>(ct)];
			corner[2] = idx[cr * static_cast<std::size_t>(nt) +
			                static_cast<std::size_t>((ct + 1) % nt)];
			corner[3] = idx[(cr + 1) * static_cast<std::size_t>(nt) +
			                static_cast<std::size_t>((ct + 1) % nt)];
			std::size_t base =
			    (cr * static_cast<std::size_t>(nt) + static_cast<std::size_t>(ct)) * 16;
			for (int q = 0; q < 16; ++q) {
				std::size_t i = base + static_cast<std::size_t>(q);
				const QuadNode& n = nodes[i];
				double r = std::hypot(n.p.x, n.p.y);
				double th = std::atan2(n.p.y, n.p.x);
				if (th < ta - 0.5 * dtheta) th += 2.0 * 3.14159265358979323846;
				double ur = (r - ra) / hr;          // in [0,1]
				double ut = (th - ta) / dtheta;
				double shp[4] = {(1 - ur) * (1 - ut), ur * (1 - ut),
				                 (1 - ur) * ut, ur * ut};
				double dshp_dr[4] = {-(1 - ut) / hr, (1 - ut) / hr, -ut / hr, ut / hr};
				double dshp_dt[4] = {-(1 - ur) / dtheta, -ur / dtheta,
				                     (1 - ur) / dtheta, ur / dtheta};
				double cth = n.p.x / r, sth = n.p.y / r;
				double wr = n.weight * form.rho_at(i);
				double Dxx = form.dxx_at(i), Dxy = form.dxy_at(i),
				       Dyy = form.dyy_at(i);
				for (int a = 0; a < 4; ++a) {
					if (corner[a] < 0) continue;
					double gax = dshp_dr[a] * cth - dshp_dt[a] * sth / r;
					double gay = dshp_dr[a] * sth + dshp_dt[a] * cth / r;
					for (int b = 0; b < 4; ++b) {
						if (corner[b] < 0) continue;
						double gbx = dshp_dr[b] * cth - dshp_dt[b] * sth / r;
						double gby = dshp_dr[b] * sth + dshp_dt[b] * cth / r;
						double gdg = gax * (Dxx * gbx + Dxy * gby) +
						             gay * (Dxy * gbx + Dyy * gby);
						K(corner[a], corner[b]) +=
						    wr * gdg - wr * bw[i] * shp[a] * shp[b];
					}
				}
			}
		}
	}
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
	return es.eigenvalues()(0);
}

}  // namespace hardylab::quadform
