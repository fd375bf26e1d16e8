// Weighted-operator coefficient model on a boundary layer: density
// rho = r delta^gamma, normal diffusion a delta^beta, anisotropic diffusion
// matrix assembled blockwise in the (grad delta, tangent) frame, Schur
// reduction of the normal direction, and sampling audits of the sup-bound
// hypotheses the certification layer relies on.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hardylab/expr.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/util.hpp"

namespace hardylab::coeff {

using expr::EvalCtx;
using expr::Expr;
using geometry::DistanceBundle;
using geometry::Domain;
using geometry::Point;

// Full spatial gradient of a closed-form field at a point: symbolic partials
// chained through the distance function (via the bundle) and the polar
// coordinates. No finite differences are involved.
inline std::array<double, 2> field_gradient(const Expr& e, const DistanceBundle& b,
                                            const Point& p) {
	EvalCtx c{b.delta, p.x, p.y, p.dim};
	auto g = expr::coord_partials(e, c);
	if (expr::depends_on(e, expr::Var::Delta)) {
		double ed = expr::eval(expr::diff(e, expr::Var::Delta), c);
		g[0] += ed * b.grad_delta[0];
		g[1] += ed * b.grad_delta[1];
	}
	return g;
}

inline double field_eval(const Expr& e, const DistanceBundle& b, const Point& p) {
	return expr::eval(e, EvalCtx{b.delta, p.x, p.y, p.dim});
}

// The coefficient model. Layer fields are closed-form descriptors in delta
// and position; the same closed forms extend to the bulk unless an explicit
// bulk override is supplied (in which case the seam at delta = nu0 must be
// continuous).
struct CoefficientModel {
	Domain domain = Domain::interval(0.0, 1.0);

	// Layer scalar fields (delta < nu0): density factors and normal diffusion.
	Expr r, gamma, a, beta;
	// Off-diagonal and tangent diffusion blocks in the (grad delta, tangent)
	// frame; scalars in two dimensions, unused on an interval.
	Expr d12, d22;
	// Potential, and its layer lower-bound model V >= delta^(beta-2) *
	// (v - w_mu delta^((1-s)/2)) on the inner layer of width mu.
	Expr V, v;
	double w_mu = 0.0;
	double mu = 0.0;

	double s = 0.0;
	double s_beta = 0.0;
	double nu0 = 0.0;

	// Optional bulk overrides for delta >= nu0 (empty: layer forms extend).
	Expr rho_bulk, V_bulk;

	// Cached composites, built by finalize().
	Expr rho_expr;     // r * delta^gamma
	Expr log1mq_expr;  // log(1 - q) with q = d12^2 / (a delta^beta d22); 2-D only
	bool q_is_zero = true;
};

namespace detail {

inline Expr default_expr(const Expr& e, double value) {
	return e ? e : expr::make_const(value);
}

}  // namespace detail

// Fill defaults, build cached composites, and validate the static invariants
// (exponent ordering, layer width, seam continuity when a bulk override is
// present). Returns the finalized model; throws IncompatibleModel or
// ValidationError on a malformed one.
inline CoefficientModel finalize(CoefficientModel m) {
	m.r = detail::default_expr(m.r, 1.0);
	m.gamma = detail::default_expr(m.gamma, 0.0);
	m.a = detail::default_expr(m.a, 1.0);
	m.beta = detail::default_expr(m.beta, 0.0);
	m.d12 = detail::default_expr(m.d12, 0.0);
	m.d22 = detail::default_expr(m.d22, 1.0);
	m.V = detail::default_expr(m.V, 0.0);
	m.v = detail::default_expr(m.v, 0.0);

	if (!(m.s < 1.0) || !(m.s_beta <= m.s))
		throw ValidationError("exponents must satisfy s_beta <= s < 1");
	double nu_cap = std::min(m.domain.nu_omega(), std::exp(-1.0));
	if (!(m.nu0 > 0.0 && m.nu0 < nu_cap))
		throw ValidationError("layer width nu0 must lie in (0, min{nu_Omega, 1/e})");
	if (m.mu <= 0.0) m.mu = m.nu0 / 4.0;
	if (m.mu > m.nu0) throw ValidationError("inner layer width mu exceeds nu0");
	if (m.w_mu < 0.0) throw ValidationError("potential modulus w_mu must be >= 0");

	Expr dvar = expr::make_var(expr::Var::Delta);
	m.rho_expr = expr::make_bin(expr::BinOp::Mul, m.r,
	                            expr::make_bin(expr::BinOp::Pow, dvar, m.gamma));
	m.q_is_zero = m.domain.dim() == 1 ||
	              (expr::is_constant(m.d12) && expr::eval(m.d12, EvalCtx{}) == 0.0);
	if (!m.q_is_zero) {
		Expr d_norm = expr::make_bin(expr::BinOp::Mul, m.a,
		                             expr::make_bin(expr::BinOp::Pow, dvar, m.beta));
		Expr q = expr::make_bin(
		    expr::BinOp::Div, expr::make_bin(expr::BinOp::Mul, m.d12, m.d12),
		    expr::make_bin(expr::BinOp::Mul, d_norm, m.d22));
		m.log1mq_expr = expr::make_fn(
		    expr::Fn::Log, expr::make_bin(expr::BinOp::Sub, expr::make_const(1.0), q));
	}

	// Seam continuity: an explicit bulk override has to meet the layer form
	// at delta = nu0 within relative 1e-6, checked at 64 layer points.
	if (m.rho_bulk || m.V_bulk) {
		for (const auto& comp : m.domain.components()) {
			for (int i = 0; i < 64; ++i) {
				double t = 2.0 * M_PI * (i + 0.5) / 64.0;
				Point p = geometry::point_at(m.domain, comp.id, m.nu0 * (1.0 - 1e-12), t);
				DistanceBundle b = geometry::distance_bundle(m.domain, p);
				if (m.rho_bulk) {
					double layer = field_eval(m.rho_expr, b, p);
					double bulk = field_eval(m.rho_bulk, b, p);
					if (std::abs(layer - bulk) > 1e-6 * std::max(1.0, std::abs(layer)))
						throw IncompatibleModel("density seam discontinuous at delta = nu0");
				}
				if (m.V_bulk) {
					double layer = field_eval(m.V, b, p);
					double bulk = field_eval(m.V_bulk, b, p);
					if (std::abs(layer - bulk) > 1e-6 * std::max(1.0, std::abs(layer)))
						throw IncompatibleModel("potential seam discontinuous at delta = nu0");
				}
			}
		}
	}
	return m;
}

// Density with gradient. Uses the layer closed form (or the bulk override
// outside the layer); the gradient is symbolic through delta and position.
struct RhoValue {
	double rho;
	std::array<double, 2> grad;
};

inline RhoValue rho_eval(const CoefficientModel& m, const Point& p) {
	DistanceBundle b = geometry::distance_bundle(m.domain, p);
	const Expr& e = (m.rho_bulk && b.delta >= m.nu0) ? m.rho_bulk : m.rho_expr;
	double rho = field_eval(e, b, p);
	if (!(rho > 0.0))
		throw NonpositiveDensity("density evaluates to " + format_double(rho));
	return {rho, field_gradient(e, b, p)};
}

inline double potential_eval(const CoefficientModel& m, const Point& p) {
	DistanceBundle b = geometry::distance_bundle(m.domain, p);
	const Expr& e = (m.V_bulk && b.delta >= m.nu0) ? m.V_bulk : m.V;
	return field_eval(e, b, p);
}

// Diffusion matrix in ambient coordinates, assembled blockwise in the
// (grad delta, tangent) frame and rotated out. One-dimensional domains get
// the 1x1 normal block.
inline Eigen::MatrixXd diffusion_eval(const CoefficientModel& m, const Point& p) {
	DistanceBundle b = geometry::distance_bundle(m.domain, p);
	double a_val = field_eval(m.a, b, p);
	double beta_val = field_eval(m.beta, b, p);
	if (!(a_val > 0.0))
		throw NotPositiveDefinite("normal diffusion coefficient a <= 0");
	double d_norm = a_val * std::pow(b.delta, beta_val);
	if (m.domain.dim() == 1) {
		Eigen::MatrixXd D(1, 1);
		D(0, 0) = d_norm;
		return D;
	}
	double d12_val = field_eval(m.d12, b, p);
	double d22_val = field_eval(m.d22, b, p);
	Eigen::Matrix2d F;  // frame-block matrix
	F << d_norm, d12_val, d12_val, d22_val;
	Eigen::Vector2d n(b.grad_delta[0], b.grad_delta[1]);
	auto t = geometry::tangent_direction(b);
	Eigen::Matrix2d R;
	R.col(0) = n;
	R.col(1) = Eigen::Vector2d(t[0], t[1]);
	Eigen::Matrix2d D = R * F * R.transpose();
	Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(D);
	if (!(es.eigenvalues().minCoeff() > 0.0))
		throw NotPositiveDefinite("diffusion matrix has a nonpositive eigenvalue");
	return D;
}

// Schur reduction of a symmetric positive-definite matrix against a rank-one
// projector: normal block d, off-diagonal blocks, tangent block, the
// dimensionless ratio q in [0,1), the reduced scalar d_tilde = 1/(d(1-q)),
// and the full inverse assembled from the block formula.
struct SchurData {
	double d = 0.0;
	Eigen::MatrixXd d12, d21, d22;
	double q = 0.0;
	Eigen::MatrixXd D_inv;
	double d_tilde = 0.0;
};

inline SchurData schur_decompose(const Eigen::MatrixXd& D, const Eigen::MatrixXd& P) {
	const auto n = D.rows();
	if (D.cols() != n || P.rows() != n || P.cols() != n)
		throw ValidationError("schur_decompose requires square D and P of equal size");
	if ((P * P - P).norm() > 1e-10 || std::abs(P.trace() - 1.0) > 1e-10)
		throw ValidationError("P is not a rank-one orthogonal projector");
	if ((D - D.transpose()).norm() > 1e-10 * std::max(1.0, D.norm()))
		throw NotPositiveDefinite("D is not symmetric");

	// Unit normal: the largest column of P = n n^T is proportional to n.
	Eigen::Index jmax = 0;
	P.colwise().norm().maxCoeff(&jmax);
	Eigen::VectorXd nvec = P.col(jmax).normalized();

	// Orthonormal frame with nvec first. In 2-D complete by rotating the
	// normal a quarter turn; in general via Householder QR.
	Eigen::MatrixXd B(n, n);
	if (n == 2) {
		B.col(0) = nvec;
		B.col(1) = Eigen::Vector2d(-nvec(1), nvec(0));
	} else {
		Eigen::MatrixXd col = nvec;
		Eigen::HouseholderQR<Eigen::MatrixXd> qr(col);
		B = qr.householderQ();
		if (B.col(0).dot(nvec) < 0.0) B = -B;
	}

	Eigen::MatrixXd F = B.transpose() * D * B;
	SchurData out;
	out.d = F(0, 0);
	out.d12 = F.block(0, 1, 1, n - 1);
	out.d21 = F.block(1, 0, n - 1, 1);
	out.d22 = F.block(1, 1, n - 1, n - 1);

	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
	if (!(es.eigenvalues().minCoeff() > 0.0))
		throw NotPositiveDefinite("D has a nonpositive eigenvalue");
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es22(out.d22);
	if (!(es22.eigenvalues().minCoeff() > 1e-12))
		throw DegenerateTangentBlock("tangent block is singular");

	Eigen::MatrixXd d22_inv = out.d22.inverse();
	out.q = (out.d12 * d22_inv * out.d21)(0, 0) / out.d;
	out.q = std::max(out.q, 0.0);
	if (!(out.q < 1.0))
		throw NotPositiveDefinite("Schur ratio q >= 1 contradicts positivity");
	out.d_tilde = 1.0 / (out.d * (1.0 - out.q));

	// Block inverse in the frame, rotated back, then verified directly.
	Eigen::MatrixXd Finv(n, n);
	Finv(0, 0) = out.d_tilde;
	Finv.block(0, 1, 1, n - 1) = -out.d_tilde * (out.d12 * d22_inv);
	Finv.block(1, 0, n - 1, 1) = -(d22_inv * out.d21) * out.d_tilde;
	Finv.block(1, 1, n - 1, n - 1) =
	    d22_inv + (d22_inv * out.d21) * out.d_tilde * (out.d12 * d22_inv);
	out.D_inv = B * Finv * B.transpose();
	if ((D * out.D_inv - Eigen::MatrixXd::Identity(n, n)).norm() > 1e-10)
		throw NotPositiveDefinite(
		    "block inverse fails to reproduce the identity (ill-conditioned D)");
	return out;
}

// Schur data of the model's diffusion matrix at a point, reduced against the
// normal projector of the distance bundle there.
inline SchurData schur_at(const CoefficientModel& m, const Point& p) {
	Eigen::MatrixXd D = diffusion_eval(m, p);
	if (m.domain.dim() == 1) {
		SchurData out;
		out.d = D(0, 0);
		out.q = 0.0;
		out.d_tilde = 1.0 / out.d;
		out.D_inv = D.cwiseInverse();
		out.d12 = out.d21 = out.d22 = Eigen::MatrixXd(0, 0);
		return out;
	}
	DistanceBundle b = geometry::distance_bundle(m.domain, p);
	Eigen::Vector2d n(b.grad_delta[0], b.grad_delta[1]);
	return schur_decompose(D, n * n.transpose());
}

// Sampling audit of the sup-bound hypotheses. Each audited quantity gets the
// running supremum, per-dyadic-shell suprema (outermost shell first), and a
// violation flag. The audit can only falsify a sup-bound; a clean run means
// "no violation detected", not a proof of boundedness.
struct AuditQuantity {
	std::string name;
	double sup = 0.0;
	std::vector<double> shell_sup;
	bool violated = false;
};

struct AuditReport {
	std::vector<AuditQuantity> quantities;
	bool violated = false;
	std::string summary;
};

namespace detail {

// Violation heuristic: the per-shell suprema grow monotonically by more than
// a factor of two across each of the last six shells.
inline bool grows_unbounded(const std::vector<double>& shell_sup) {
	if (shell_sup.size() < 7) return false;
	for (std::size_t i = shell_sup.size() - 6; i < shell_sup.size(); ++i) {
		double prev = shell_sup[i - 1], cur = shell_sup[i];
		if (!(prev > 0.0) || !(cur > 2.0 * prev)) return false;
	}
	return true;
}

inline double norm2(const std::array<double, 2>& g) { return std::hypot(g[0], g[1]); }

}  // namespace detail

inline AuditReport assumption_audit(const CoefficientModel& m, int n_samples,
                                    std::uint64_t rng_seed) {
	std::mt19937_64 rng(rng_seed);
	std::uniform_real_distribution<double> unit(0.0, 1.0);

	int n_shells = 0;
	while (m.nu0 * std::pow(0.5, n_shells) > 1e-8) ++n_shells;
	int per_shell = std::max(16, n_samples / std::max(1, n_shells));

	AuditReport rep;
	rep.quantities = {{"(|grad ln r| + |grad gamma|) delta^s"},
	                  {"|grad ln a| delta^s"},
	                  {"|grad beta| delta^s_beta"},
	                  {"|grad ln(1-q)| delta^s"}};
	for (auto& qq : rep.quantities) qq.shell_sup.assign(n_shells, 0.0);

	const auto& comps = m.domain.components();
	for (int k = 0; k < n_shells; ++k) {
		double hi = m.nu0 * std::pow(0.5, k);
		double lo = hi / 2.0;
		for (int i = 0; i < per_shell; ++i) {
			double delta = lo * std::pow(hi / lo, unit(rng));
			int comp = comps[static_cast<std::size_t>(unit(rng) * comps.size()) %
			                 comps.size()]
			               .id;
			double t = 2.0 * M_PI * unit(rng);
			Point p = geometry::point_at(m.domain, comp, delta, t);
			DistanceBundle b = geometry::distance_bundle(m.domain, p);

			double r_val = field_eval(m.r, b, p);
			double a_val = field_eval(m.a, b, p);
			if (!(r_val > 0.0))
				throw NonpositiveDensity("r <= 0 at an audit sample");
			if (!(a_val > 0.0))
				throw NotPositiveDefinite("a <= 0 at an audit sample");
			if (m.domain.dim() == 2 && !(field_eval(m.d22, b, p) > 0.0))
				throw DegenerateTangentBlock("d22 <= 0 at an audit sample");

			double ds = std::pow(delta, m.s);
			double vals[4];
			vals[0] = (detail::norm2(field_gradient(m.r, b, p)) / r_val +
			           detail::norm2(field_gradient(m.gamma, b, p))) *
			          ds;
			vals[1] = detail::norm2(field_gradient(m.a, b, p)) / a_val * ds;
			vals[2] = detail::norm2(field_gradient(m.beta, b, p)) *
			          std::pow(delta, m.s_beta);
			vals[3] = m.q_is_zero
			              ? 0.0
			              : detail::norm2(field_gradient(m.log1mq_expr, b, p)) * ds;
			for (int j = 0; j < 4; ++j) {
				rep.quantities[j].shell_sup[k] =
				    std::max(rep.quantities[j].shell_sup[k], vals[j]);
				rep.quantities[j].sup = std::max(rep.quantities[j].sup, vals[j]);
			}
		}
	}

	std::string bad;
	for (auto& qq : rep.quantities) {
		qq.violated = detail::grows_unbounded(qq.shell_sup);
		if (qq.violated) {
			rep.violated = true;
			if (!bad.empty()) bad += ", ";
			bad += qq.name;
		}
	}
	rep.summary = rep.violated ? "violation detected: " + bad : "no violation detected";
	return rep;
}

}  // namespace hardylab::coeff
