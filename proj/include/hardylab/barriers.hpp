// Hardy barrier families on the boundary layer and the iterated-logarithm
// machinery behind the refined ones: thresholds t_{a,p}, the chains L, M, f,
// their exact differential identity, and pointwise barrier evaluation.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "hardylab/coefficients.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/util.hpp"

namespace hardylab::barrier {

using coeff::CoefficientModel;
using geometry::Point;

// Threshold of validity t_{a,p}: t_{a,1} = a/e, then t_{a,p} = a e^{-1/t_{a,p-1}}.
// Values past 1e300 are reported as +infinity; deep chains with small bases
// underflow to 0 (an empty validity interval), which callers must tolerate.
inline double t_threshold(double a, int p) {
	if (!(a > 0.0)) throw ValidationError("iterated-log base must be positive");
	if (p < 1) throw ValidationError("iterated-log depth must be >= 1");
	double t = a / std::exp(1.0);
	for (int k = 2; k <= p; ++k) {
		if (t > 1e300) return std::numeric_limits<double>::infinity();
		t = a * std::exp(-1.0 / t);
	}
	return t > 1e300 ? std::numeric_limits<double>::infinity() : t;
}

// The iterated-logarithm chain at a query point t: L_1 = 1/ln(a/t),
// L_p = L_1 applied to L_{p-1}, M_p = prod of L up to p, f = sum of M.
struct IterLogChain {
	double a = 0.0;
	int N = 0;
	double threshold = 0.0;  // t_{a,N}
	std::vector<double> L, M;
	double f = 0.0;
};

inline IterLogChain iterlog_chain(double a, int N, double t) {
	IterLogChain c;
	c.a = a;
	c.N = N;
	c.threshold = t_threshold(a, N);
	if (!(t > 0.0) || !(t < c.threshold))
		throw OutOfDomain("iterated-log chain needs 0 < t < t_{a,N} = " +
		                  format_double(c.threshold));
	c.L.resize(N);
	c.M.resize(N);
	double arg = t;
	for (int p = 0; p < N; ++p) {
		double lg = std::log(a / arg);
		if (!(lg > 0.0))
			throw OutOfDomain("iterated-log chain left its domain at depth " +
			                  std::to_string(p + 1));
		c.L[p] = 1.0 / lg;
		c.M[p] = p == 0 ? c.L[0] : c.M[p - 1] * c.L[p];
		c.f += c.M[p];
		arg = c.L[p];
	}
	return c;
}

// Residual of the differential identity t f' - f^2/2 = (1/2) sum M^2, with f'
// from the exact recursion M_p' = (1/t) M_p f_p (f_p the partial sums). The
// identity is what turns each chain into a Hardy barrier correction.
inline double magic_identity_residual(double a, int N, double t) {
	IterLogChain c = iterlog_chain(a, N, t);
	double fp_sum = 0.0;   // sum over p of M_p f_p
	double partial = 0.0;  // f_p
	double sq = 0.0;       // sum of M^2
	for (int p = 0; p < N; ++p) {
		partial += c.M[p];
		fp_sum += c.M[p] * partial;
		sq += c.M[p] * c.M[p];
	}
	double fprime = fp_sum / t;
	return std::abs(t * fprime - 0.5 * c.f * c.f - 0.5 * sq);
}

enum class Family { Base, Hierarchy, LogCorrected, MultiComponent };

struct BarrierSpec {
	Family family = Family::Base;
	int depth = 1;        // Hierarchy only
	double alpha = 0.0;   // LogCorrected only
	const CoefficientModel* model = nullptr;
};

// Barrier value split into the leading square and the logarithmic correction
// (the CSV profile reports both), plus where it was evaluated.
struct BarrierValue {
	double value = 0.0;
	double leading_term = 0.0;
	double log_term = 0.0;
	double delta = 0.0;
	int component_id = -1;
};

inline BarrierValue barrier_eval(const BarrierSpec& spec, const Point& p) {
	if (spec.model == nullptr)
		throw ValidationError("barrier spec carries no coefficient model");
	if (spec.family == Family::Hierarchy && spec.depth < 1)
		throw ValidationError("hierarchy depth must be >= 1");
	const CoefficientModel& m = *spec.model;
	auto b = geometry::distance_bundle(m.domain, p);
	// The theorems assert the bound on thin layers only; refuse to extrapolate.
	if (!(b.delta < std::min(m.nu0, 1.0)))
		throw OutOfLayer("barrier is only defined for delta < min(nu0, 1)");

	double beta = coeff::field_eval(m.beta, b, p);
	double gamma = coeff::field_eval(m.gamma, b, p);
	double a_val = coeff::field_eval(m.a, b, p);
	double q = 0.0;
	if (!m.q_is_zero) {
		double d12 = coeff::field_eval(m.d12, b, p);
		double d22 = coeff::field_eval(m.d22, b, p);
		q = d12 * d12 / (a_val * std::pow(b.delta, beta) * d22);
		if (!(q >= 0.0) || !(q < 1.0))
			throw NotPositiveDefinite("anisotropy ratio q outside [0,1)");
	}

	double L = 1.0 / std::log(1.0 / b.delta);
	double pre = 0.25 * (1.0 - q) * a_val * std::pow(b.delta, beta - 2.0);
	double lead = beta + gamma - 1.0;

	BarrierValue out;
	out.delta = b.delta;
	out.component_id = b.nearest_component;
	switch (spec.family) {
		case Family::Base:
			out.leading_term = pre * lead * lead;
			out.log_term = pre * 0.5 * L * L;
			break;
		case Family::Hierarchy: {
			IterLogChain c = iterlog_chain(std::exp(1.0), spec.depth, b.delta);
			double sq = 0.0;
			for (double mv : c.M) sq += mv * mv;
			out.leading_term = pre * lead * lead;
			out.log_term = pre * sq;
			break;
		}
		case Family::LogCorrected: {
			double al = spec.alpha;
			double shifted = lead - al * L;
			out.leading_term = pre * shifted * shifted;
			out.log_term = pre * (1.0 - 2.0 * al - al * al) * L * L;
			break;
		}
		case Family::MultiComponent: {
			double lead_j = beta + gamma + m.domain.dim() - b.component_dimension - 2.0;
			out.leading_term = pre * lead_j * lead_j;
			out.log_term = pre * 0.5 * L * L;
			break;
		}
	}
	out.value = out.leading_term + out.log_term;
	return out;
}

}  // namespace hardylab::barrier
