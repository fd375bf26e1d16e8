// Deterministic machine-readable output: JSON reports with a fixed key
// order and every float printed with 17 significant digits (round-trip
// exact), plus CSV profile emission. Re-running the same command with the
// same inputs and seed produces byte-identical bytes; anything inherently
// nondeterministic (wall time) is only emitted on request.
#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardylab/util.hpp"

namespace hardylab::report {

using json = nlohmann::ordered_json;

namespace detail {

// nlohmann's dump() prints floats with shortest-round-trip formatting; the
// report contract instead fixes %.17g, so serialization is done here. Key
// order is the ordered_json insertion order. Non-finite floats have no JSON
// literal and are emitted as null.
inline void write_value(std::ostream& os, const json& v) {
	switch (v.type()) {
		case json::value_t::object: {
			os << '{';
			bool first = true;
			for (const auto& [key, val] : v.items()) {
				if (!first) os << ',';
				first = false;
				os << json(key).dump() << ':';
				write_value(os, val);
			}
			os << '}';
			return;
		}
		case json::value_t::array: {
			os << '[';
			for (std::size_t i = 0; i < v.size(); ++i) {
				if (i) os << ',';
				write_value(os, v[i]);
			}
			os << ']';
			return;
		}
		case json::value_t::number_float: {
			double d = v.get<double>();
			if (!std::isfinite(d))
				os << "null";
			else
				os << format_double(d);
			return;
		}
		default: os << v.dump(); return;
	}
}

}  // namespace detail

inline std::string to_string(const json& v) {
	std::ostringstream os;
	detail::write_value(os, v);
	os << '\n';
	return os.str();
}

// Report skeleton in the contract's key order: command, inputs, results,
// seed, versions, then optional wall time. Results are filled by the caller.
inline json make_report(const std::string& command, json inputs) {
	json rep;
	rep["command"] = command;
	rep["inputs"] = std::move(inputs);
	rep["results"] = json::object();
	rep["seed"] = std::uint64_t{0};
	rep["versions"] = json{{"hardylab", "1.0.0"}, {"report_format", 1}};
	return rep;
}

inline void write_file(const std::string& path, const std::string& bytes) {
	std::ofstream out(path, std::ios::binary);
	if (!out) throw ValidationError("cannot open output file '" + path + "'");
	out << bytes;
	if (!out) throw ValidationError("failed writing output file '" + path + "'");
}

// CSV with a fixed header; all cells already formatted by the caller.
struct Csv {
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;

	std::string to_string() const {
		std::ostringstream os;
		for (std::size_t i = 0; i < header.size(); ++i) {
			if (i) os << ',';
			os << header[i];
		}
		os << '\n';
		for (const auto& row : rows) {
			for (std::size_t i = 0; i < row.size(); ++i) {
				if (i) os << ',';
				os << row[i];
			}
			os << '\n';
		}
		return os.str();
	}
};

}  // namespace hardylab::report
