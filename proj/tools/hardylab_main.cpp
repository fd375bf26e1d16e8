// Batch front end: parses problem configurations, dispatches the analysis
// commands, and emits deterministic JSON reports (and CSV profiles). Exit
// codes: 0 success / Certified, 2 NotCertified or inequality violated,
// 3 HypothesisViolated, 1 operational error. Identical invocations produce
// byte-identical reports; wall time is only emitted under --timing.
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hardylab/barriers.hpp"
#include "hardylab/config.hpp"
#include "hardylab/criteria.hpp"
#include "hardylab/quadform.hpp"
#include "hardylab/report.hpp"
#include "hardylab/util.hpp"
#include "hardylab/vectorfield.hpp"
#include "hardylab/weyl.hpp"

namespace {

using hardylab::Error;
using hardylab::ValidationError;
using hardylab::format_double;
using hardylab::config::ProblemConfig;
using json = hardylab::report::json;
using Clock = std::chrono::steady_clock;

constexpr double kGapTolerance = -1e-6;    // relative Hardy-gap floor
constexpr double kEigenTolerance = -1e-8;  // discrete eigenvalue floor

// Flags shared by every subcommand.
struct CommonOut {
	std::string out_path;
	bool timing = false;
};

void add_common(CLI::App* cmd, CommonOut& c) {
	cmd->add_option("--out", c.out_path, "Also write the JSON report to this file");
	cmd->add_flag("--timing", c.timing,
	              "Append wall-clock milliseconds to the report (report bytes then "
	              "differ between runs)");
}

// Emits the finished report to stdout (and --out), appending wall time only
// on request so the default output is byte-identical across runs.
int finish(json& rep, const CommonOut& c, Clock::time_point t0, int code) {
	if (c.timing)
		rep["wall_time_ms"] =
		    std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
	std::string bytes = hardylab::report::to_string(rep);
	std::fputs(bytes.c_str(), stdout);
	if (!c.out_path.empty()) hardylab::report::write_file(c.out_path, bytes);
	return code;
}

int emit_error(const std::string& command, const CommonOut& c, Clock::time_point t0,
               const std::string& kind, const std::string& message) {
	json rep;
	rep["command"] = command;
	rep["error"] = json{{"kind", kind}, {"message", message}};
	rep["seed"] = std::uint64_t{0};
	rep["versions"] = json{{"hardylab", "1.0.0"}, {"report_format", 1}};
	std::fprintf(stderr, "%s\n", message.c_str());
	finish(rep, c, t0, 1);
	return 1;
}

// Runs a command body, mapping every library error to an error report and
// exit code 1; no exception escapes to the shell.
template <typename Fn>
int guarded(const std::string& command, const CommonOut& c, Fn&& fn) {
	Clock::time_point t0 = Clock::now();
	try {
		return fn(t0);
	} catch (const Error& e) {
		return emit_error(command, c, t0, e.kind, e.what());
	} catch (const std::exception& e) {
		return emit_error(command, c, t0, "InternalError", e.what());
	}
}

// Barrier descriptors on the command line: base | hierarchy:N | log:ALPHA.
struct BarrierDescriptor {
	hardylab::barrier::Family family = hardylab::barrier::Family::Base;
	int depth = 1;
	double alpha = 0.0;
	std::string text = "base";
};

BarrierDescriptor parse_barrier_descriptor(const std::string& text) {
	BarrierDescriptor out;
	out.text = text;
	auto tail_number = [&text](std::size_t prefix_len) {
		std::string tail = text.substr(prefix_len);
		std::size_t used = 0;
		double val = 0.0;
		try {
			val = std::stod(tail, &used);
		} catch (const std::exception&) {
			used = 0;
		}
		if (used != tail.size() || tail.empty())
			throw ValidationError("barrier descriptor '" + text +
			                      "' has a malformed numeric suffix");
		return val;
	};
	if (text == "base") return out;
	if (text.rfind("hierarchy:", 0) == 0) {
		double d = tail_number(10);
		if (d < 1.0 || d != std::floor(d))
			throw ValidationError("hierarchy depth must be a positive integer");
		out.family = hardylab::barrier::Family::Hierarchy;
		out.depth = static_cast<int>(d);
		return out;
	}
	if (text.rfind("log:", 0) == 0) {
		out.family = hardylab::barrier::Family::LogCorrected;
		out.alpha = tail_number(4);
		return out;
	}
	throw ValidationError("barrier must be base, hierarchy:N, or log:ALPHA (got '" +
	                      text + "')");
}

json point_json(const hardylab::geometry::Point& p) {
	return json{{"x", p.x}, {"y", p.y}};
}

json verdict_json(const hardylab::criteria::EsaVerdict& v) {
	json out;
	out["status"] = hardylab::criteria::status_name(v.status);
	out["criterion"] = hardylab::criteria::criterion_name(v.kind);
	out["margin"] = v.margin;
	out["mu"] = v.mu;
	out["witness"] = point_json(v.witness);
	json audit = json::array();
	for (const auto& h : v.audit)
		audit.push_back(json{{"name", h.name},
		                     {"passed", h.passed},
		                     {"value", h.value},
		                     {"note", h.note}});
	out["audit"] = audit;
	if (v.status == hardylab::criteria::EsaVerdict::Status::HypothesisViolated)
		out["violated_hypothesis"] = v.violated_hypothesis;
	return out;
}

int verdict_exit(const hardylab::criteria::EsaVerdict& v) {
	switch (v.status) {
		case hardylab::criteria::EsaVerdict::Status::Certified: return 0;
		case hardylab::criteria::EsaVerdict::Status::NotCertified: return 2;
		case hardylab::criteria::EsaVerdict::Status::HypothesisViolated: return 3;
	}
	return 1;
}

// ---------------------------------------------------------------------------
// barrier-profile

struct BarrierProfileArgs {
	CommonOut common;
	std::string config_path;
	std::string barrier = "base";
	std::string csv_path = "-";
	int points = 200;
	double delta_min = 1e-8;
	int component = -1;
};

int run_barrier_profile(const BarrierProfileArgs& a) {
	return guarded("barrier-profile", a.common, [&](Clock::time_point t0) {
		ProblemConfig cfg = hardylab::config::parse_config(a.config_path);
		const auto& m = cfg.model;
		BarrierDescriptor bd = parse_barrier_descriptor(a.barrier);
		hardylab::barrier::BarrierSpec spec{bd.family, bd.depth, bd.alpha, &m};

		if (a.points < 2) throw ValidationError("--points must be at least 2");
		double delta_max = std::min(m.nu0, 1.0) * (1.0 - 1e-9);
		if (!(a.delta_min > 0.0 && a.delta_min < delta_max))
			throw ValidationError("--delta-min must lie in (0, nu0)");

		std::vector<int> component_ids;
		for (const auto& comp : m.domain.components())
			if (a.component < 0 || comp.id == a.component) component_ids.push_back(comp.id);
		if (component_ids.empty())
			throw ValidationError("component " + std::to_string(a.component) +
			                      " does not exist on this domain");

		hardylab::report::Csv csv;
		csv.header = {"delta", "barrier", "leading_term", "log_term", "component_id"};
		double log_lo = std::log(a.delta_min), log_hi = std::log(delta_max);
		for (int comp : component_ids) {
			for (int i = 0; i < a.points; ++i) {
				double delta =
				    std::exp(log_lo + (log_hi - log_lo) * i / double(a.points - 1));
				hardylab::geometry::Point p =
				    hardylab::geometry::point_at(m.domain, comp, delta);
				hardylab::barrier::BarrierValue bv = hardylab::barrier::barrier_eval(spec, p);
				csv.rows.push_back({format_double(bv.delta), format_double(bv.value),
				                    format_double(bv.leading_term),
				                    format_double(bv.log_term),
				                    std::to_string(bv.component_id)});
			}
		}
		std::string csv_bytes = csv.to_string();

		json rep = hardylab::report::make_report(
		    "barrier-profile", json{{"config", cfg.echo},
		                            {"barrier", bd.text},
		                            {"points", a.points},
		                            {"delta_min", a.delta_min},
		                            {"delta_max", delta_max}});
		rep["results"] = json{{"rows", csv.rows.size()},
		                      {"components", component_ids},
		                      {"csv", a.csv_path}};

		// The CSV is the command's payload: it goes to stdout unless routed
		// to a file, in which case stdout carries the JSON report.
		if (a.csv_path == "-") {
			std::fputs(csv_bytes.c_str(), stdout);
			if (!a.common.out_path.empty()) {
				if (a.common.timing)
					rep["wall_time_ms"] =
					    std::chrono::duration<double, std::milli>(Clock::now() - t0)
					        .count();
				hardylab::report::write_file(a.common.out_path,
				                             hardylab::report::to_string(rep));
			}
			return 0;
		}
		hardylab::report::write_file(a.csv_path, csv_bytes);
		return finish(rep, a.common, t0, 0);
	});
}

// ---------------------------------------------------------------------------
// check-esa

struct CheckEsaArgs {
	CommonOut common;
	std::string config_path;
	std::string criterion;
	double mu = 0.0;
	double alpha = std::numeric_limits<double>::quiet_NaN();
	double c = std::numeric_limits<double>::quiet_NaN();
};

int run_check_esa(const CheckEsaArgs& a) {
	return guarded("check-esa", a.common, [&](Clock::time_point t0) {
		std::optional<ProblemConfig> cfg;
		if (!a.config_path.empty()) cfg = hardylab::config::parse_config(a.config_path);

		std::string criterion = a.criterion;
		if (criterion.empty() && cfg && cfg->options.criterion)
			criterion = *cfg->options.criterion;
		if (criterion.empty())
			throw ValidationError(
			    "check-esa needs --criterion (or an options.criterion entry in the "
			    "config)");
		double alpha = a.alpha;
		if (std::isnan(alpha) && cfg && cfg->options.alpha) alpha = *cfg->options.alpha;

		json inputs;
		if (cfg) inputs["config"] = cfg->echo;
		inputs["criterion"] = criterion;
		if (!std::isnan(alpha)) inputs["alpha"] = alpha;
		if (a.mu > 0.0) inputs["mu"] = a.mu;

		// The almost-Riemannian benchmark constructs its own model, so it is
		// reachable without a config file.
		if (criterion == "ars2") {
			double c_val = a.c;
			if (std::isnan(c_val) && cfg && cfg->options.c) c_val = *cfg->options.c;
			if (std::isnan(alpha) || std::isnan(c_val))
				throw ValidationError("criterion ars2 needs --alpha and --c");
			inputs["c"] = c_val;
			hardylab::criteria::Ars2Result res =
			    hardylab::criteria::ars2_model(alpha, c_val);
			json rep = hardylab::report::make_report("check-esa", inputs);
			rep["results"] = verdict_json(res.verdict);
			rep["results"]["criterion"] = "ars2";
			rep["results"]["criterion_value"] = res.criterion_value;
			return finish(rep, a.common, t0, verdict_exit(res.verdict));
		}

		if (!cfg) throw ValidationError("check-esa requires --config");
		hardylab::criteria::Criterion kind =
		    hardylab::criteria::criterion_from_name(criterion);
		hardylab::criteria::CriterionOptions opt;
		opt.mu = a.mu;
		opt.alpha = alpha;
		hardylab::criteria::EsaVerdict verdict =
		    hardylab::criteria::check_criterion(kind, cfg->model, opt);
		json rep = hardylab::report::make_report("check-esa", inputs);
		rep["results"] = verdict_json(verdict);
		return finish(rep, a.common, t0, verdict_exit(verdict));
	});
}

// ---------------------------------------------------------------------------
// verify-hardy

struct VerifyHardyArgs {
	CommonOut common;
	std::string config_path;
	std::string barrier;
	double nu = 0.0;
	double scale = 1.0;
	int bumps = -1;
	bool eigen = false;
	std::uint64_t seed = 0;
	bool seed_given = false;
};

int run_verify_hardy(const VerifyHardyArgs& a) {
	return guarded("verify-hardy", a.common, [&](Clock::time_point t0) {
		ProblemConfig cfg = hardylab::config::parse_config(a.config_path);
		const auto& m = cfg.model;
		const auto& opts = cfg.options;

		std::string barrier_text =
		    !a.barrier.empty() ? a.barrier : opts.barrier.value_or("base");
		BarrierDescriptor bd = parse_barrier_descriptor(barrier_text);
		hardylab::quadform::ScaledBarrier sb{bd.family, bd.depth, bd.alpha, a.scale};
		double nu = a.nu > 0.0 ? a.nu : opts.nu.value_or(m.nu0 / 2.0);
		int bumps = a.bumps >= 0 ? a.bumps : opts.bumps.value_or(200);
		bool eigen = a.eigen || opts.eigen.value_or(false);
		std::uint64_t seed = a.seed_given ? a.seed : opts.seed.value_or(0);

		hardylab::quadform::HardyVerifier verifier(m, sb, nu);

		double min_relative_gap = 0.0;
		std::uint64_t worst_seed = seed;
		bool first = true;
		for (int i = 0; i < bumps; ++i) {
			auto phi = hardylab::quadform::random_bump(seed + i, nu);
			auto gap = verifier.gap(phi);
			if (first || gap.relative_gap < min_relative_gap) {
				min_relative_gap = gap.relative_gap;
				worst_seed = seed + i;
				first = false;
			}
		}

		json eigen_lambda = nullptr;
		if (eigen) {
			hardylab::quadform::Grid eigen_grid =
			    m.domain.dim() == 1 ? hardylab::quadform::Grid::line(m.domain, 1999)
			                        : hardylab::quadform::Grid::polar(m.domain, 40, 24);
			eigen_lambda = hardylab::quadform::min_gap_eigen(m, sb, eigen_grid, nu);
		}

		json inputs{{"config", cfg.echo}, {"barrier", bd.text}, {"nu", nu},
		            {"bumps", bumps},     {"eigen", eigen},     {"scale", a.scale}};
		json rep = hardylab::report::make_report("verify-hardy", inputs);
		rep["results"] = json{{"min_relative_gap", min_relative_gap},
		                      {"eigen_lambda_min", eigen_lambda},
		                      {"grid", verifier.grid().describe()},
		                      {"nu", nu},
		                      {"bumps", bumps},
		                      {"worst_seed", worst_seed}};
		rep["seed"] = seed;

		bool gap_ok = bumps == 0 || min_relative_gap >= kGapTolerance;
		bool eigen_ok = !eigen || eigen_lambda.get<double>() >= kEigenTolerance;
		return finish(rep, a.common, t0, gap_ok && eigen_ok ? 0 : 2);
	});
}

// ---------------------------------------------------------------------------
// vf-audit

struct VfAuditArgs {
	CommonOut common;
	std::string config_path;
	std::string variant = "x0";
	int depth = 1;
	double alpha = 0.0;
	std::uint64_t seed = 0;
};

int run_vf_audit(const VfAuditArgs& a) {
	return guarded("vf-audit", a.common, [&](Clock::time_point t0) {
		ProblemConfig cfg = hardylab::config::parse_config(a.config_path);
		hardylab::vf::Variant variant;
		if (a.variant == "x0")
			variant = hardylab::vf::Variant::X0;
		else if (a.variant == "xn")
			variant = hardylab::vf::Variant::XN;
		else if (a.variant == "xalpha")
			variant = hardylab::vf::Variant::Xalpha;
		else
			throw ValidationError("--variant must be x0, xn, or xalpha (got '" +
			                      a.variant + "')");
		std::uint64_t seed = a.seed != 0 ? a.seed : cfg.options.seed.value_or(0);

		hardylab::vf::RemainderAudit audit = hardylab::vf::remainder_audit(
		    cfg.model, variant, a.depth, a.alpha, seed);

		json profile = json::array();
		for (const auto& [hi, margin] : audit.margin_profile)
			profile.push_back(json{{"delta_hi", hi}, {"min_margin", margin}});
		json rep = hardylab::report::make_report(
		    "vf-audit", json{{"config", cfg.echo},
		                     {"variant", a.variant},
		                     {"depth", a.depth},
		                     {"alpha", a.alpha}});
		rep["results"] = json{{"scaled_sup_R0", audit.scaled_sup},
		                      {"nu1", audit.nu1},
		                      {"worst_point", point_json(audit.worst_point)},
		                      {"margin_profile", profile}};
		rep["seed"] = seed;
		return finish(rep, a.common, t0, audit.no_valid_layer ? 2 : 0);
	});
}

// ---------------------------------------------------------------------------
// oracle-1d

struct Oracle1dArgs {
	CommonOut common;
	double beta = 0.0;
	double gamma = 0.0;
	double log_alpha = 0.0;
	bool log_family = false;
	bool beta_given = false;
	bool gamma_given = false;
	bool numeric = false;
	double energy = -1.0;
};

json endpoint_json(const hardylab::weyl::EndpointClass& e) {
	return json{{"class", hardylab::weyl::endpoint_name(e.cls)},
	            {"growth1", e.growth1},
	            {"growth2", e.growth2},
	            {"evidence", e.evidence}};
}

int run_oracle_1d(const Oracle1dArgs& a) {
	return guarded("oracle-1d", a.common, [&](Clock::time_point t0) {
		if (!a.log_family && !(a.beta_given && a.gamma_given))
			throw ValidationError("oracle-1d needs --beta and --gamma (or --log-alpha)");
		if (!(a.energy < 0.0))
			throw ValidationError("--energy must be negative (below the spectrum)");

		hardylab::weyl::EndpointClass exact;
		hardylab::weyl::SturmLiouville1D problem;
		json inputs;
		if (a.log_family) {
			inputs["family"] = "log-euler";
			inputs["log_alpha"] = a.log_alpha;
			exact = hardylab::weyl::log_euler_classify(a.log_alpha);
			problem = hardylab::weyl::log_euler_problem(a.log_alpha, a.energy);
		} else {
			inputs["family"] = "euler";
			inputs["beta"] = a.beta;
			inputs["gamma"] = a.gamma;
			exact = hardylab::weyl::euler_classify(a.beta, a.gamma);
			problem = hardylab::weyl::euler_problem(a.beta, a.gamma, a.energy);
		}
		inputs["energy"] = a.energy;
		inputs["numeric"] = a.numeric;

		json rep = hardylab::report::make_report("oracle-1d", inputs);
		rep["results"] = endpoint_json(exact);
		if (a.numeric)
			rep["results"]["numeric"] =
			    endpoint_json(hardylab::weyl::numeric_classify(problem));
		return finish(rep, a.common, t0, 0);
	});
}

// ---------------------------------------------------------------------------
// ars2

struct Ars2Args {
	CommonOut common;
	double alpha = 0.0;
	double c = 0.0;
	std::string phi = "0";
};

int run_ars2(const Ars2Args& a) {
	return guarded("ars2", a.common, [&](Clock::time_point t0) {
		hardylab::criteria::Ars2Result res =
		    hardylab::criteria::ars2_model(a.alpha, a.c, a.phi);
		json rep = hardylab::report::make_report(
		    "ars2", json{{"alpha", a.alpha}, {"c", a.c}, {"phi", a.phi}});
		rep["results"] = verdict_json(res.verdict);
		rep["results"]["criterion"] = "ars2";
		rep["results"]["criterion_value"] = res.criterion_value;
		return finish(rep, a.common, t0, verdict_exit(res.verdict));
	});
}

}  // namespace

int main(int argc, char** argv) {
	CLI::App app{
	    "hardylab: Hardy barriers, essential-self-adjointness criteria, and "
	    "limit-point/limit-circle oracles for weighted drift-diffusion operators"};
	app.require_subcommand(1);
	int code = 0;

	BarrierProfileArgs bp;
	auto* cmd_bp = app.add_subcommand(
	    "barrier-profile", "Tabulate a Hardy barrier along the boundary layer as CSV");
	cmd_bp->add_option("--config", bp.config_path, "Problem configuration (JSON)")
	    ->required();
	cmd_bp->add_option("--barrier", bp.barrier, "base | hierarchy:N | log:ALPHA");
	cmd_bp->add_option("--csv", bp.csv_path, "CSV output path ('-' for stdout)");
	cmd_bp->add_option("--points", bp.points, "Samples per boundary component");
	cmd_bp->add_option("--delta-min", bp.delta_min, "Smallest boundary distance");
	cmd_bp->add_option("--component", bp.component,
	                   "Restrict to one boundary component id");
	add_common(cmd_bp, bp.common);
	cmd_bp->callback([&] { code = run_barrier_profile(bp); });

	CheckEsaArgs ce;
	auto* cmd_ce = app.add_subcommand(
	    "check-esa", "Decide an essential-self-adjointness criterion on a model");
	cmd_ce->add_option("--config", ce.config_path, "Problem configuration (JSON)");
	cmd_ce->add_option(
	    "--criterion", ce.criterion,
	    "const-beta-i | const-beta-ii | variable-beta | strong | iso-critical | "
	    "log-critical | ars2");
	cmd_ce->add_option("--mu", ce.mu, "Inner layer width (default: the model's)");
	cmd_ce->add_option("--alpha", ce.alpha,
	                   "Exponent for log-critical or the ars2 benchmark");
	cmd_ce->add_option("--c", ce.c, "Curvature coupling for the ars2 benchmark");
	add_common(cmd_ce, ce.common);
	cmd_ce->callback([&] { code = run_check_esa(ce); });

	VerifyHardyArgs vh;
	auto* cmd_vh = app.add_subcommand(
	    "verify-hardy",
	    "Check the boundary-layer Hardy inequality on random bumps (and optionally "
	    "over the full discrete layer subspace)");
	cmd_vh->add_option("--config", vh.config_path, "Problem configuration (JSON)")
	    ->required();
	cmd_vh->add_option("--barrier", vh.barrier, "base | hierarchy:N | log:ALPHA");
	cmd_vh->add_option("--nu", vh.nu, "Layer width (default nu0/2)");
	cmd_vh->add_option("--bumps", vh.bumps, "Number of random test functions");
	cmd_vh->add_option("--scale", vh.scale, "Barrier scaling factor");
	cmd_vh->add_flag("--eigen", vh.eigen,
	                 "Also solve the discrete eigenproblem over the layer subspace");
	auto* opt_seed = cmd_vh->add_option("--seed", vh.seed, "Base seed for the bump sampler");
	add_common(cmd_vh, vh.common);
	cmd_vh->callback([&] {
		vh.seed_given = opt_seed->count() > 0;
		code = run_verify_hardy(vh);
	});

	VfAuditArgs va;
	auto* cmd_va = app.add_subcommand(
	    "vf-audit", "Audit the vector-field certificate remainder over dyadic shells");
	cmd_va->add_option("--config", va.config_path, "Problem configuration (JSON)")
	    ->required();
	cmd_va->add_option("--variant", va.variant, "x0 | xn | xalpha");
	cmd_va->add_option("--depth", va.depth, "Hierarchy depth (variant xn)");
	cmd_va->add_option("--alpha", va.alpha, "Log exponent (variant xalpha)");
	cmd_va->add_option("--seed", va.seed, "Seed for the shell sampler");
	add_common(cmd_va, va.common);
	cmd_va->callback([&] { code = run_vf_audit(va); });

	Oracle1dArgs o1;
	auto* cmd_o1 = app.add_subcommand(
	    "oracle-1d", "Classify the singular endpoint of a 1-D model problem "
	                 "(limit point / limit circle)");
	auto* opt_beta = cmd_o1->add_option("--beta", o1.beta, "Euler family: p = t^(beta+gamma)");
	auto* opt_gamma = cmd_o1->add_option("--gamma", o1.gamma, "Euler family: w = t^gamma");
	auto* opt_la = cmd_o1->add_option("--log-alpha", o1.log_alpha,
	                                  "Log family instead: p = t^(3/2) (ln 1/t)^alpha");
	opt_la->excludes(opt_beta)->excludes(opt_gamma);
	cmd_o1->add_flag("--numeric", o1.numeric,
	                 "Also run the shell-growth integrator alongside the exact test");
	cmd_o1->add_option("--energy", o1.energy, "Spectral parameter E < 0");
	add_common(cmd_o1, o1.common);
	cmd_o1->callback([&] {
		o1.beta_given = opt_beta->count() > 0;
		o1.gamma_given = opt_gamma->count() > 0;
		o1.log_family = opt_la->count() > 0;
		code = run_oracle_1d(o1);
	});

	Ars2Args a2;
	auto* cmd_a2 = app.add_subcommand(
	    "ars2", "Run the almost-Riemannian benchmark generator through the "
	            "small-anisotropy criterion");
	cmd_a2->add_option("--alpha", a2.alpha, "Boundary degeneracy exponent")->required();
	cmd_a2->add_option("--c", a2.c, "Curvature coupling")->required();
	cmd_a2->add_option("--phi", a2.phi, "Conformal factor expression in r");
	add_common(cmd_a2, a2.common);
	cmd_a2->callback([&] { code = run_ars2(a2); });

	try {
		app.parse(argc, argv);
	} catch (const CLI::CallForHelp& e) {
		return app.exit(e);
	} catch (const CLI::ParseError& e) {
		app.exit(e);
		return 1;
	}
	return code;
}
