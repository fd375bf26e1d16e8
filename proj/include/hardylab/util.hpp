// Shared small utilities: error types, deterministic float formatting,
// and a slot-based deterministic parallel_for.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hardylab {

// Every library failure is a typed exception deriving from Error; the CLI
// maps them to exit code 1 with the type name in the report.
struct Error : std::runtime_error {
	Error(std::string kind, const std::string& msg)
	    : std::runtime_error(kind + ": " + msg), kind(std::move(kind)) {}
	std::string kind;
};

#define HARDYLAB_ERROR(NAME)                                        \
	struct NAME : Error {                                           \
		explicit NAME(const std::string& msg) : Error(#NAME, msg) {} \
	}

HARDYLAB_ERROR(PointOutsideDomain);
HARDYLAB_ERROR(AmbiguousNearest);
HARDYLAB_ERROR(OutOfLayer);
HARDYLAB_ERROR(OutOfDomain);
HARDYLAB_ERROR(StepUnderflow);
HARDYLAB_ERROR(NonpositiveDensity);
HARDYLAB_ERROR(NotPositiveDefinite);
HARDYLAB_ERROR(DegenerateTangentBlock);
HARDYLAB_ERROR(UnknownKind);
HARDYLAB_ERROR(IncompatibleModel);
HARDYLAB_ERROR(SingularQuadraturePoint);
HARDYLAB_ERROR(SupportViolation);
HARDYLAB_ERROR(GridTooLarge);
HARDYLAB_ERROR(StiffnessFailure);
HARDYLAB_ERROR(NotReducible);
HARDYLAB_ERROR(ParseError);
HARDYLAB_ERROR(ValidationError);

#undef HARDYLAB_ERROR

// 17 significant digits round-trip doubles exactly; fixed format keeps
// reports byte-identical across runs.
inline std::string format_double(double v) {
	char buf[40];
	std::snprintf(buf, sizeof(buf), "%.17g", v);
	return buf;
}

inline unsigned thread_cap() {
	if (const char* env = std::getenv("HARDY_THREADS")) {
		long n = std::strtol(env, nullptr, 10);
		if (n >= 1) return static_cast<unsigned>(n);
	}
	return 1;  // deterministic-by-construction default
}

// Runs fn(i) for i in [0, n). Results must be written to preallocated
// per-index slots by the caller; the schedule never affects outputs.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
	unsigned nthreads = thread_cap();
	if (nthreads <= 1 || n < 2) {
		for (std::size_t i = 0; i < n; ++i) fn(i);
		return;
	}
	nthreads = std::min<std::size_t>(nthreads, n);
	std::vector<std::thread> pool;
	pool.reserve(nthreads);
	for (unsigned t = 0; t < nthreads; ++t) {
		pool.emplace_back([&, t] {
			for (std::size_t i = t; i < n; i += nthreads) fn(i);
		});
	}
	for (auto& th : pool) th.join();
}

}  // namespace hardylab
