// Problem configuration files: JSON documents with a domain block,
// expression-string coefficient fields, scalar exponents, and an optional
// command-options block. Parsing is strict (unknown keys rejected, every
// numeric field finite) and collects *all* schema and expression errors
// before throwing, so a bad config reports every problem in one pass.
#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardylab/coefficients.hpp"
#include "hardylab/expr.hpp"
#include "hardylab/geometry.hpp"
#include "hardylab/util.hpp"

namespace hardylab::config {

using expr::Expr;
using json = nlohmann::ordered_json;

// Command options that may be fixed in the config file; command-line flags
// override any of them. Absent fields keep the command's own default.
struct CommandOptions {
	std::optional<std::string> criterion;  // check-esa
	std::optional<double> alpha;           // log-critical threshold / ars2
	std::optional<double> c;               // ars2 curvature coupling
	std::optional<std::string> barrier;    // verify-hardy family descriptor
	std::optional<double> nu;              // verify-hardy layer width
	std::optional<int> bumps;              // verify-hardy sample count
	std::optional<bool> eigen;             // verify-hardy eigen stage
	std::optional<std::uint64_t> seed;     // base seed for sampled stages
};

struct ProblemConfig {
	coeff::CoefficientModel model;  // finalized
	CommandOptions options;
	// Normalized echo of the inputs (fixed key order, defaults filled) for
	// embedding into reports; re-serializing it is byte-stable.
	json echo;
};

namespace detail {

// Accumulates "field: reason" items; parse-class failures (malformed JSON
// or expression text) are tracked separately so the final exception type
// matches the first failure class.
struct ErrorList {
	std::vector<std::string> items;
	bool any_parse = false;

	void add(const std::string& field, const std::string& reason, bool parse = false) {
		items.push_back(field + ": " + reason);
		any_parse |= parse;
	}

	void raise_if_any() const {
		if (items.empty()) return;
		std::string msg = std::to_string(items.size()) + " error(s) in configuration";
		for (const auto& it : items) msg += "\n  - " + it;
		if (any_parse) throw ParseError(msg);
		throw ValidationError(msg);
	}
};

inline bool finite_number(const json& v, double& out) {
	if (!v.is_number()) return false;
	out = v.get<double>();
	return std::isfinite(out);
}

// Reads a required finite number from obj[key]; records an error otherwise.
inline std::optional<double> take_number(const json& obj, const std::string& key,
                                         const std::string& where, ErrorList& errs) {
	if (!obj.contains(key)) {
		errs.add(where + "." + key, "required field is missing");
		return std::nullopt;
	}
	double val = 0.0;
	if (!finite_number(obj.at(key), val)) {
		errs.add(where + "." + key, "must be a finite number");
		return std::nullopt;
	}
	return val;
}

inline void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                                const std::string& where, ErrorList& errs) {
	for (const auto& [key, value] : obj.items()) {
		(void)value;
		if (std::find(known.begin(), known.end(), key) == known.end())
			errs.add(where.empty() ? key : where + "." + key, "unknown key");
	}
}

inline std::optional<geometry::Domain> parse_domain(const json& spec, ErrorList& errs) {
	if (!spec.is_object()) {
		errs.add("domain", "must be an object with a \"kind\" field");
		return std::nullopt;
	}
	if (!spec.contains("kind") || !spec.at("kind").is_string()) {
		errs.add("domain.kind", "required string field is missing");
		return std::nullopt;
	}
	std::string kind = spec.at("kind").get<std::string>();
	std::vector<std::string> known{"kind"};
	std::vector<std::optional<double>> vals;
	if (kind == "interval") {
		known.insert(known.end(), {"lo", "hi"});
		vals = {take_number(spec, "lo", "domain", errs),
		        take_number(spec, "hi", "domain", errs)};
	} else if (kind == "disk" || kind == "punctured_disk") {
		known.push_back("radius");
		vals = {take_number(spec, "radius", "domain", errs)};
	} else if (kind == "annulus") {
		known.insert(known.end(), {"r_in", "r_out"});
		vals = {take_number(spec, "r_in", "domain", errs),
		        take_number(spec, "r_out", "domain", errs)};
	} else {
		errs.add("domain.kind",
		         "unknown kind '" + kind +
		             "' (expected interval, disk, annulus, or punctured_disk)");
		return std::nullopt;
	}
	reject_unknown_keys(spec, known, "domain", errs);
	for (const auto& v : vals)
		if (!v) return std::nullopt;
	try {
		if (kind == "interval") return geometry::Domain::interval(*vals[0], *vals[1]);
		if (kind == "disk") return geometry::Domain::disk(*vals[0]);
		if (kind == "annulus") return geometry::Domain::annulus(*vals[0], *vals[1]);
		return geometry::Domain::punctured_disk(*vals[0]);
	} catch (const Error& e) {
		errs.add("domain", e.what());
		return std::nullopt;
	}
}

// Parses obj[key] as an expression string; empty Expr when absent or bad.
inline Expr take_expr(const json& obj, const std::string& key, ErrorList& errs) {
	if (!obj.contains(key)) return Expr{};
	const json& v = obj.at(key);
	if (!v.is_string()) {
		errs.add(key, "coefficient must be an expression string, e.g. \"1.5\"");
		return Expr{};
	}
	try {
		return expr::parse(v.get<std::string>());
	} catch (const ParseError& e) {
		errs.add(key, e.what(), /*parse=*/true);
		return Expr{};
	}
}

inline CommandOptions parse_options(const json& spec, ErrorList& errs) {
	CommandOptions out;
	if (!spec.is_object()) {
		errs.add("options", "must be an object");
		return out;
	}
	reject_unknown_keys(
	    spec, {"criterion", "alpha", "c", "barrier", "nu", "bumps", "eigen", "seed"},
	    "options", errs);
	auto number = [&](const char* key) -> std::optional<double> {
		if (!spec.contains(key)) return std::nullopt;
		double val = 0.0;
		if (!finite_number(spec.at(key), val)) {
			errs.add(std::string("options.") + key, "must be a finite number");
			return std::nullopt;
		}
		return val;
	};
	auto string = [&](const char* key) -> std::optional<std::string> {
		if (!spec.contains(key)) return std::nullopt;
		if (!spec.at(key).is_string()) {
			errs.add(std::string("options.") + key, "must be a string");
			return std::nullopt;
		}
		return spec.at(key).get<std::string>();
	};
	out.criterion = string("criterion");
	out.alpha = number("alpha");
	out.c = number("c");
	out.barrier = string("barrier");
	out.nu = number("nu");
	if (spec.contains("bumps")) {
		if (!spec.at("bumps").is_number_integer() || spec.at("bumps").get<long>() < 0)
			errs.add("options.bumps", "must be a non-negative integer");
		else
			out.bumps = spec.at("bumps").get<int>();
	}
	if (spec.contains("eigen")) {
		if (!spec.at("eigen").is_boolean())
			errs.add("options.eigen", "must be a boolean");
		else
			out.eigen = spec.at("eigen").get<bool>();
	}
	if (spec.contains("seed")) {
		if (!spec.at("seed").is_number_unsigned())
			errs.add("options.seed", "must be a non-negative integer");
		else
			out.seed = spec.at("seed").get<std::uint64_t>();
	}
	return out;
}

// Normalized echo of the domain spec in fixed key order.
inline json domain_echo(const geometry::Domain& dom) {
	json out;
	switch (dom.kind()) {
		case geometry::Domain::Kind::Interval:
			out["kind"] = "interval";
			out["lo"] = dom.param1();
			out["hi"] = dom.param2();
			break;
		case geometry::Domain::Kind::Disk:
			out["kind"] = "disk";
			out["radius"] = dom.param1();
			break;
		case geometry::Domain::Kind::Annulus:
			out["kind"] = "annulus";
			out["r_in"] = dom.param1();
			out["r_out"] = dom.param2();
			break;
		case geometry::Domain::Kind::PuncturedDisk:
			out["kind"] = "punctured_disk";
			out["radius"] = dom.param1();
			break;
	}
	return out;
}

}  // namespace detail

// Parses and validates a configuration document (text form). Collects every
// schema, expression, and constraint error before throwing: ParseError when
// any failure is a malformed document or expression, else ValidationError.
// `source` names the document in error messages.
inline ProblemConfig parse_config_text(const std::string& text,
                                       const std::string& source = "<config>") {
	json doc;
	try {
		doc = json::parse(text);
	} catch (const json::exception& e) {
		throw ParseError(source + ": " + e.what());
	}
	if (!doc.is_object()) throw ParseError(source + ": top level must be a JSON object");

	detail::ErrorList errs;
	const std::vector<std::string> known{
	    "domain", "nu0",  "r",  "gamma",  "a",        "beta",   "d12",
	    "d22",    "V",    "v",  "w_mu",   "mu",       "s",      "s_beta",
	    "rho_bulk", "V_bulk", "options"};
	detail::reject_unknown_keys(doc, known, "", errs);

	ProblemConfig out;
	coeff::CoefficientModel& m = out.model;

	std::optional<geometry::Domain> dom;
	if (doc.contains("domain"))
		dom = detail::parse_domain(doc.at("domain"), errs);
	else
		errs.add("domain", "required field is missing");

	auto nu0 = detail::take_number(doc, "nu0", "", errs);
	if (nu0) m.nu0 = *nu0;

	m.r = detail::take_expr(doc, "r", errs);
	m.gamma = detail::take_expr(doc, "gamma", errs);
	m.a = detail::take_expr(doc, "a", errs);
	m.beta = detail::take_expr(doc, "beta", errs);
	m.d12 = detail::take_expr(doc, "d12", errs);
	m.d22 = detail::take_expr(doc, "d22", errs);
	m.V = detail::take_expr(doc, "V", errs);
	m.v = detail::take_expr(doc, "v", errs);
	m.rho_bulk = detail::take_expr(doc, "rho_bulk", errs);
	m.V_bulk = detail::take_expr(doc, "V_bulk", errs);

	auto scalar = [&](const char* key, double& target) {
		if (!doc.contains(key)) return;
		double val = 0.0;
		if (detail::finite_number(doc.at(key), val))
			target = val;
		else
			errs.add(key, "must be a finite number");
	};
	scalar("w_mu", m.w_mu);
	scalar("mu", m.mu);
	scalar("s", m.s);
	scalar("s_beta", m.s_beta);

	// Mirror the model's own constraints here so they all land in one list
	// (finalize stops at the first violation).
	if (!(m.s < 1.0) || !(m.s_beta <= m.s))
		errs.add("s_beta", "exponents must satisfy s_beta <= s < 1 (got s_beta = " +
		                       format_double(m.s_beta) + ", s = " + format_double(m.s) + ")");
	if (nu0 && !(*nu0 > 0.0)) errs.add("nu0", "layer width must be positive");
	if (m.w_mu < 0.0) errs.add("w_mu", "potential modulus must be >= 0");
	if (doc.contains("mu") && !(m.mu > 0.0))
		errs.add("mu", "inner layer width must be positive");

	if (dom) m.domain = *dom;
	if (errs.items.empty()) {
		try {
			m = coeff::finalize(m);
		} catch (const Error& e) {
			errs.add("model", e.what());
		}
	}
	if (doc.contains("options")) out.options = detail::parse_options(doc.at("options"), errs);
	errs.raise_if_any();

	// Echo with fixed key order and defaults filled; expression fields are
	// echoed as the original source strings when present.
	json& echo = out.echo;
	echo["domain"] = detail::domain_echo(m.domain);
	echo["nu0"] = m.nu0;
	for (const char* key : {"r", "gamma", "a", "beta", "d12", "d22", "V", "v"})
		echo[key] = doc.contains(key) ? doc.at(key).get<std::string>()
		                              : (std::string(key) == "r" || std::string(key) == "a" ||
		                                         std::string(key) == "d22"
		                                     ? "1"
		                                     : "0");
	echo["w_mu"] = m.w_mu;
	echo["mu"] = m.mu;
	echo["s"] = m.s;
	echo["s_beta"] = m.s_beta;
	if (doc.contains("rho_bulk")) echo["rho_bulk"] = doc.at("rho_bulk").get<std::string>();
	if (doc.contains("V_bulk")) echo["V_bulk"] = doc.at("V_bulk").get<std::string>();
	if (doc.contains("options")) {
		json opts;
		for (const char* key : {"criterion", "alpha", "c", "barrier", "nu", "bumps",
		                        "eigen", "seed"})
			if (doc.at("options").contains(key)) opts[key] = doc.at("options").at(key);
		echo["options"] = opts;
	}
	return out;
}

inline ProblemConfig parse_config(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw ValidationError("config file '" + path + "' cannot be opened");
	std::ostringstream buf;
	buf << in.rdbuf();
	return parse_config_text(buf.str(), path);
}

}  // namespace hardylab::config
