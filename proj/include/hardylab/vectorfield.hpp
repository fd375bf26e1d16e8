// Vector-field certificates for the Hardy inequalities: the normal-field
// ansätze built from the chain functions, a smooth boundary-layer cutoff,
// finite-difference verification of the pointwise certificate
// div X - X.(rho D)^{-1} X, and the dyadic audit of its remainder term.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "hardylab/barriers.hpp"
#include "hardylab/coefficients.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/util.hpp"

namespace hardylab::vf {

using coeff::CoefficientModel;
using geometry::DistanceBundle;
using geometry::Point;

// Cubic-smoothstep cutoff: 1 on delta <= nu0/2, 0 on delta >= 3 nu0/4,
// C^1 monotone in between with |d/d delta| <= 6/nu0.
struct CutoffPsi {
	double nu0 = 0.0;

	double value(double delta) const {
		double u = (delta - nu0 / 2.0) / (nu0 / 4.0);
		if (u <= 0.0) return 1.0;
		if (u >= 1.0) return 0.0;
		return 1.0 - u * u * (3.0 - 2.0 * u);
	}

	double ddelta(double delta) const {
		double u = (delta - nu0 / 2.0) / (nu0 / 4.0);
		if (u <= 0.0 || u >= 1.0) return 0.0;
		return -6.0 * u * (1.0 - u) * (4.0 / nu0);
	}
};

enum class Variant { X0, XN, Xalpha };

// A normal vector field: scalar layer magnitude times grad delta, cut off
// smoothly before the layer ends. The Xalpha variant needs the doubly
// logarithmic chain, so its layer shrinks to min(nu0, e^-e).
struct AnsatzField {
	Variant variant = Variant::X0;
	int depth = 1;        // XN: hierarchy index N, chain depth N+1
	double alpha = 0.0;   // Xalpha
	const CoefficientModel* model = nullptr;

	double layer_width() const {
		double w = model->nu0;
		if (variant == Variant::Xalpha) w = std::min(w, std::exp(-std::exp(1.0)));
		return w;
	}
};

namespace detail {

// Chain function entering the ansatz bracket: f(delta), f_{e,depth+1}(delta),
// or f_{1,2}(delta) = L(1 + 1/lnln(1/delta)).
inline double chain_value(const AnsatzField& field, double delta) {
	double L = 1.0 / std::log(1.0 / delta);
	switch (field.variant) {
		case Variant::X0: return L;
		case Variant::XN:
			return barrier::iterlog_chain(std::exp(1.0), field.depth + 1, delta).f;
		case Variant::Xalpha: {
			double ll = std::log(std::log(1.0 / delta));
			if (!(ll > 0.0))
				throw OutOfLayer("doubly logarithmic chain needs delta < 1/e");
			return L * (1.0 + 1.0 / ll);
		}
	}
	return 0.0;
}

}  // namespace detail

// Scalar magnitude of the uncut field: (1/2)(1-q) a r delta^(beta+gamma-1)
// [beta+gamma-1+f(delta)]. For the doubly logarithmic variant the model's
// `a` must itself carry the (ln 1/delta)^alpha factor (the operator owns the
// log correction), so the formula in model fields is the same; only the chain
// function and the layer width change. Exposed so the bracket's zero crossing
// can be probed directly.
inline double layer_magnitude(const AnsatzField& field, const DistanceBundle& b,
                              const Point& p) {
	const CoefficientModel& m = *field.model;
	double beta = coeff::field_eval(m.beta, b, p);
	double gamma = coeff::field_eval(m.gamma, b, p);
	double a_val = coeff::field_eval(m.a, b, p);
	double r_val = coeff::field_eval(m.r, b, p);
	double q = 0.0;
	if (!m.q_is_zero) {
		double d12 = coeff::field_eval(m.d12, b, p);
		double d22 = coeff::field_eval(m.d22, b, p);
		q = d12 * d12 / (a_val * std::pow(b.delta, beta) * d22);
	}
	double lead = beta + gamma - 1.0;
	double f = detail::chain_value(field, b.delta);
	return 0.5 * (1.0 - q) * a_val * r_val *
	       std::pow(b.delta, beta + gamma - 1.0) * (lead + f);
}

inline std::array<double, 2> ansatz_eval(const AnsatzField& field, const Point& p) {
	if (field.model == nullptr)
		throw ValidationError("ansatz field carries no coefficient model");
	if (field.variant == Variant::XN && field.depth < 1)
		throw ValidationError("hierarchy depth must be >= 1");
	const CoefficientModel& m = *field.model;
	DistanceBundle b = geometry::distance_bundle(m.domain, p);
	CutoffPsi psi{field.layer_width()};
	double w = psi.value(b.delta);
	if (w == 0.0) return {0.0, 0.0};
	double mag = layer_magnitude(field, b, p) * w;
	return {mag * b.grad_delta[0], mag * b.grad_delta[1]};
}

// Pointwise certificate c(x) = div X - X.(rho D)^{-1} X, reported per unit
// density so it compares directly to the barriers. The divergence is central
// finite differences with step h = max(1e-7, 1e-4 delta) (overridable for
// convergence studies); the closed form is filled in for the X0 variant and
// describes the uncut field, so it is meaningful where the cutoff is 1.
struct CertificateValue {
	double numeric = 0.0;
	double closed_form = std::numeric_limits<double>::quiet_NaN();
	double closed_R0 = std::numeric_limits<double>::quiet_NaN();
	double delta = 0.0;
};

namespace detail {

// Remainder of the certificate expansion for chain value f:
//   R0 = (delta/2){[1+(b+f)ln delta](grad beta + grad gamma)
//        + (b+f) grad ln((1-q) a r)} . grad delta + ((b+f)/2) delta Lap delta.
inline double remainder_R0(const CoefficientModel& m, const DistanceBundle& b,
                           const Point& p, double f) {
	double beta = coeff::field_eval(m.beta, b, p);
	double gamma = coeff::field_eval(m.gamma, b, p);
	double a_val = coeff::field_eval(m.a, b, p);
	double r_val = coeff::field_eval(m.r, b, p);
	double bf = beta + gamma - 1.0 + f;

	auto gb = coeff::field_gradient(m.beta, b, p);
	auto gg = coeff::field_gradient(m.gamma, b, p);
	auto ga = coeff::field_gradient(m.a, b, p);
	auto gr = coeff::field_gradient(m.r, b, p);
	std::array<double, 2> glog{ga[0] / a_val + gr[0] / r_val,
	                           ga[1] / a_val + gr[1] / r_val};
	if (!m.q_is_zero) {
		auto gq = coeff::field_gradient(m.log1mq_expr, b, p);
		glog[0] += gq[0];
		glog[1] += gq[1];
	}

	double lnd = std::log(b.delta);
	double dot = 0.0;
	for (int i = 0; i < 2; ++i)
		dot += ((1.0 + bf * lnd) * (gb[i] + gg[i]) + bf * glog[i]) * b.grad_delta[i];
	return (b.delta / 2.0) * dot + (bf / 2.0) * b.delta * b.laplacian_delta;
}

}  // namespace detail

inline CertificateValue vf_certificate(const AnsatzField& field, const Point& p,
                                       double h_override = 0.0) {
	if (field.model == nullptr)
		throw ValidationError("ansatz field carries no coefficient model");
	const CoefficientModel& m = *field.model;
	DistanceBundle b = geometry::distance_bundle(m.domain, p);
	if (b.delta < 1e-12)
		throw StepUnderflow("certificate step underflows at delta < 1e-12");
	if (!(b.delta < m.nu0))
		throw OutOfLayer("certificate is evaluated inside the layer only");

	double h = h_override > 0.0 ? h_override : std::max(1e-7, 1e-4 * b.delta);
	int dim = m.domain.dim();
	double div = 0.0;
	for (int i = 0; i < dim; ++i) {
		Point pp = p, pm = p;
		(i == 0 ? pp.x : pp.y) += h;
		(i == 0 ? pm.x : pm.y) -= h;
		div += (ansatz_eval(field, pp)[i] - ansatz_eval(field, pm)[i]) / (2.0 * h);
	}

	auto X = ansatz_eval(field, p);
	double rho = coeff::rho_eval(m, p).rho;
	Eigen::MatrixXd D = coeff::diffusion_eval(m, p);
	double quad;
	if (dim == 1) {
		quad = X[0] * X[0] / D(0, 0);
	} else {
		Eigen::Vector2d xv(X[0], X[1]);
		quad = xv.dot(D.ldlt().solve(xv));
	}
	quad /= rho;

	CertificateValue out;
	out.delta = b.delta;
	out.numeric = (div - quad) / rho;

	if (field.variant == Variant::X0) {
		double beta = coeff::field_eval(m.beta, b, p);
		double gamma = coeff::field_eval(m.gamma, b, p);
		double a_val = coeff::field_eval(m.a, b, p);
		double q = 0.0;
		if (!m.q_is_zero) {
			double d12 = coeff::field_eval(m.d12, b, p);
			double d22 = coeff::field_eval(m.d22, b, p);
			q = d12 * d12 / (a_val * std::pow(b.delta, beta) * d22);
		}
		double L = 1.0 / std::log(1.0 / b.delta);
		double lead = beta + gamma - 1.0;
		out.closed_R0 = detail::remainder_R0(m, b, p, L);
		out.closed_form = (1.0 - q) * a_val * std::pow(b.delta, beta - 2.0) *
		                  (0.25 * lead * lead + 0.25 * L * L + out.closed_R0);
	}
	return out;
}

// Dyadic audit of the remainder: the scaled supremum sup |R0| delta^((s-1)/2)
// over shells down to 1e-8, the per-shell minima of the layer-validity margin
// (1/8)(ln 1/delta)^{-2} + R0, and the largest dyadic nu1 <= nu0/2 whose whole
// layer sampled clean. A model can fail everywhere; that is reported through
// no_valid_layer rather than an exception.
struct RemainderAudit {
	double scaled_sup = 0.0;
	double nu1 = 0.0;
	bool no_valid_layer = false;
	Point worst_point{0.0, 0.0, 2};
	// One entry per dyadic shell, outermost first: (shell upper delta,
	// minimum of the margin over the shell's samples).
	std::vector<std::pair<double, double>> margin_profile;
};

inline RemainderAudit remainder_audit(const CoefficientModel& m, Variant variant,
                                      int depth = 1, double alpha = 0.0,
                                      std::uint64_t rng_seed = 0) {
	AnsatzField probe{variant, depth, alpha, &m};
	double top = (variant == Variant::Xalpha
	                  ? std::min(m.nu0, std::exp(-std::exp(1.0)))
	                  : m.nu0) /
	             2.0;
	int n_shells = 0;
	while (top * std::pow(0.5, n_shells) > 1e-8) ++n_shells;

	RemainderAudit rep;
	rep.margin_profile.assign(n_shells, {0.0, 0.0});
	std::vector<double> shell_sup(n_shells, 0.0);
	std::vector<Point> shell_worst(n_shells, Point{0.0, 0.0, m.domain.dim()});
	const auto& comps = m.domain.components();

	parallel_for(n_shells, [&](int k) {
		std::mt19937_64 rng(rng_seed + 0x9e3779b97f4a7c15ull * (k + 1));
		std::uniform_real_distribution<double> unit(0.0, 1.0);
		double hi = top * std::pow(0.5, k), lo = hi / 2.0;
		double min_margin = std::numeric_limits<double>::infinity();
		for (int i = 0; i < 256; ++i) {
			double delta = lo * std::pow(hi / lo, unit(rng));
			int comp = comps[static_cast<std::size_t>(unit(rng) * comps.size()) %
			                 comps.size()]
			               .id;
			Point p = geometry::point_at(m.domain, comp, delta, 2.0 * M_PI * unit(rng));
			DistanceBundle b = geometry::distance_bundle(m.domain, p);
			double f = detail::chain_value(probe, delta);
			double R0 = detail::remainder_R0(m, b, p, f);
			double L = 1.0 / std::log(1.0 / delta);
			min_margin = std::min(min_margin, 0.125 * L * L + R0);
			double scaled = std::abs(R0) * std::pow(delta, (m.s - 1.0) / 2.0);
			if (scaled > shell_sup[k]) {
				shell_sup[k] = scaled;
				shell_worst[k] = p;
			}
		}
		rep.margin_profile[k] = {hi, min_margin};
	});

	for (int k = 0; k < n_shells; ++k) {
		if (shell_sup[k] >= rep.scaled_sup) {
			rep.scaled_sup = shell_sup[k];
			rep.worst_point = shell_worst[k];
		}
	}

	// nu1 candidates top, top/2, ...: valid if every shell inside is clean.
	int first_clean = n_shells;  // index of outermost shell of an all-clean tail
	for (int k = n_shells - 1; k >= 0; --k) {
		if (rep.margin_profile[k].second >= 0.0)
			first_clean = k;
		else
			break;
	}
	if (first_clean == n_shells) {
		rep.no_valid_layer = true;
		rep.nu1 = 0.0;
	} else {
		rep.nu1 = top * std::pow(0.5, first_clean);
	}
	return rep;
}

}  // namespace hardylab::vf
