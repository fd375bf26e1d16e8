// Closed-form scalar fields as small expression trees: parsing, evaluation,
// and exact symbolic differentiation. Coefficient descriptors are written in
// terms of the distance function and coordinates, so their gradients can be
// audited without finite-difference noise.
//
// Grammar (expression strings in configuration files):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | primary ('^' factor)?   // -x^2 == -(x^2)
//   primary:= number | var | func '(' expr ')' | '(' expr ')'
//   var    := delta | x | y | r | theta
//   func   := log | sin | cos | exp | sqrt
#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "hardylab/util.hpp"

namespace hardylab::expr {

enum class Var { Delta, X, Y, R, Theta };
enum class Fn { Log, Sin, Cos, Exp, Sqrt };
enum class BinOp { Add, Sub, Mul, Div, Pow };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
	enum class Kind { Const, Variable, Unary, Binary } kind;
	double value = 0.0;      // Const
	Var var = Var::Delta;    // Variable
	Fn fn = Fn::Log;         // Unary
	BinOp op = BinOp::Add;   // Binary
	Expr a, b;               // children (Unary uses a)
};

inline Expr make_const(double v) {
	auto n = std::make_shared<Node>();
	n->kind = Node::Kind::Const;
	n->value = v;
	return n;
}

inline Expr make_var(Var v) {
	auto n = std::make_shared<Node>();
	n->kind = Node::Kind::Variable;
	n->var = v;
	return n;
}

inline Expr make_fn(Fn f, Expr a) {
	auto n = std::make_shared<Node>();
	n->kind = Node::Kind::Unary;
	n->fn = f;
	n->a = std::move(a);
	return n;
}

inline bool is_const(const Expr& e, double v) {
	return e->kind == Node::Kind::Const && e->value == v;
}

inline Expr make_bin(BinOp op, Expr a, Expr b) {
	// Constant folding and unit identities keep derivative trees small.
	if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const) {
		switch (op) {
			case BinOp::Add: return make_const(a->value + b->value);
			case BinOp::Sub: return make_const(a->value - b->value);
			case BinOp::Mul: return make_const(a->value * b->value);
			case BinOp::Div: return make_const(a->value / b->value);
			case BinOp::Pow: return make_const(std::pow(a->value, b->value));
		}
	}
	switch (op) {
		case BinOp::Add:
			if (is_const(a, 0)) return b;
			if (is_const(b, 0)) return a;
			break;
		case BinOp::Sub:
			if (is_const(b, 0)) return a;
			break;
		case BinOp::Mul:
			if (is_const(a, 0) || is_const(b, 0)) return make_const(0);
			if (is_const(a, 1)) return b;
			if (is_const(b, 1)) return a;
			break;
		case BinOp::Div:
			if (is_const(a, 0)) return make_const(0);
			if (is_const(b, 1)) return a;
			break;
		case BinOp::Pow:
			if (is_const(b, 1)) return a;
			if (is_const(b, 0)) return make_const(1);
			break;
	}
	auto n = std::make_shared<Node>();
	n->kind = Node::Kind::Binary;
	n->op = op;
	n->a = std::move(a);
	n->b = std::move(b);
	return n;
}

// Evaluation context: delta and ambient coordinates; r/theta are derived
// from (x, y) lazily so 1-D callers never touch them.
struct EvalCtx {
	double delta = 0.0;
	double x = 0.0;
	double y = 0.0;
	int dim = 2;

	double radius() const { return std::hypot(x, y); }
	double angle() const { return std::atan2(y, x); }
};

inline double eval(const Expr& e, const EvalCtx& c) {
	switch (e->kind) {
		case Node::Kind::Const: return e->value;
		case Node::Kind::Variable:
			switch (e->var) {
				case Var::Delta: return c.delta;
				case Var::X: return c.x;
				case Var::Y: return c.y;
				case Var::R: return c.radius();
				case Var::Theta: return c.angle();
			}
			break;
		case Node::Kind::Unary: {
			double a = eval(e->a, c);
			switch (e->fn) {
				case Fn::Log: return std::log(a);
				case Fn::Sin: return std::sin(a);
				case Fn::Cos: return std::cos(a);
				case Fn::Exp: return std::exp(a);
				case Fn::Sqrt: return std::sqrt(a);
			}
			break;
		}
		case Node::Kind::Binary: {
			double a = eval(e->a, c), b = eval(e->b, c);
			switch (e->op) {
				case BinOp::Add: return a + b;
				case BinOp::Sub: return a - b;
				case BinOp::Mul: return a * b;
				case BinOp::Div: return a / b;
				case BinOp::Pow: return std::pow(a, b);
			}
			break;
		}
	}
	return 0.0;  // unreachable
}

// Exact partial derivative with respect to one tree variable (delta and the
// coordinates are treated as independent; chaining through the geometry,
// e.g. nabla delta, is the caller's concern).
inline Expr diff(const Expr& e, Var v) {
	using K = Node::Kind;
	switch (e->kind) {
		case K::Const: return make_const(0);
		case K::Variable: return make_const(e->var == v ? 1.0 : 0.0);
		case K::Unary: {
			Expr da = diff(e->a, v);
			switch (e->fn) {
				case Fn::Log: return make_bin(BinOp::Div, da, e->a);
				case Fn::Sin: return make_bin(BinOp::Mul, make_fn(Fn::Cos, e->a), da);
				case Fn::Cos:
					return make_bin(BinOp::Mul, make_const(-1),
					                make_bin(BinOp::Mul, make_fn(Fn::Sin, e->a), da));
				case Fn::Exp: return make_bin(BinOp::Mul, make_fn(Fn::Exp, e->a), da);
				case Fn::Sqrt:
					return make_bin(BinOp::Div, da,
					                make_bin(BinOp::Mul, make_const(2), make_fn(Fn::Sqrt, e->a)));
			}
			break;
		}
		case K::Binary: {
			const Expr &a = e->a, &b = e->b;
			Expr da = diff(a, v), db = diff(b, v);
			switch (e->op) {
				case BinOp::Add: return make_bin(BinOp::Add, da, db);
				case BinOp::Sub: return make_bin(BinOp::Sub, da, db);
				case BinOp::Mul:
					return make_bin(BinOp::Add, make_bin(BinOp::Mul, da, b),
					                make_bin(BinOp::Mul, a, db));
				case BinOp::Div:
					return make_bin(
					    BinOp::Div,
					    make_bin(BinOp::Sub, make_bin(BinOp::Mul, da, b),
					             make_bin(BinOp::Mul, a, db)),
					    make_bin(BinOp::Pow, b, make_const(2)));
				case BinOp::Pow: {
					if (b->kind == K::Const) {
						// d(a^c) = c a^(c-1) a'
						return make_bin(
						    BinOp::Mul, make_const(b->value),
						    make_bin(BinOp::Mul,
						             make_bin(BinOp::Pow, a, make_const(b->value - 1)), da));
					}
					// a^b (b' ln a + b a'/a)
					Expr term = make_bin(
					    BinOp::Add, make_bin(BinOp::Mul, db, make_fn(Fn::Log, a)),
					    make_bin(BinOp::Mul, b, make_bin(BinOp::Div, da, a)));
					return make_bin(BinOp::Mul, e, term);
				}
			}
			break;
		}
	}
	return make_const(0);  // unreachable
}

inline bool depends_on(const Expr& e, Var v) {
	switch (e->kind) {
		case Node::Kind::Const: return false;
		case Node::Kind::Variable: return e->var == v;
		case Node::Kind::Unary: return depends_on(e->a, v);
		case Node::Kind::Binary: return depends_on(e->a, v) || depends_on(e->b, v);
	}
	return false;
}

// A field is spatially constant iff it references no variable at all.
inline bool is_constant(const Expr& e) {
	return !depends_on(e, Var::Delta) && !depends_on(e, Var::X) &&
	       !depends_on(e, Var::Y) && !depends_on(e, Var::R) &&
	       !depends_on(e, Var::Theta);
}

// True spatial partials d/dx, d/dy at a point with delta held fixed: chains
// the polar tree variables through r(x,y) and theta(x,y).  The delta channel
// is chained separately by callers that know nabla delta.
inline std::array<double, 2> coord_partials(const Expr& e, const EvalCtx& c) {
	std::array<double, 2> g{eval(diff(e, Var::X), c), eval(diff(e, Var::Y), c)};
	bool uses_r = depends_on(e, Var::R), uses_theta = depends_on(e, Var::Theta);
	if (!uses_r && !uses_theta) return g;
	double r = c.radius();
	if (r == 0.0)
		throw SingularQuadraturePoint("polar field differentiated at the origin");
	if (uses_r) {
		double er = eval(diff(e, Var::R), c);
		g[0] += er * (c.x / r);
		g[1] += er * (c.y / r);
	}
	if (uses_theta) {
		double et = eval(diff(e, Var::Theta), c);
		g[0] += et * (-c.y / (r * r));
		g[1] += et * (c.x / (r * r));
	}
	return g;
}

namespace detail {

struct Parser {
	const std::string& s;
	std::size_t pos = 0;

	explicit Parser(const std::string& text) : s(text) {}

	[[noreturn]] void fail(const std::string& msg) const {
		throw ParseError("at position " + std::to_string(pos) + " in \"" + s +
		                 "\": " + msg);
	}

	void skip_ws() {
		while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
	}

	bool eat(char c) {
		skip_ws();
		if (pos < s.size() && s[pos] == c) {
			++pos;
			return true;
		}
		return false;
	}

	char peek() {
		skip_ws();
		return pos < s.size() ? s[pos] : '\0';
	}

	Expr parse_expr() {
		Expr e = parse_term();
		for (;;) {
			if (eat('+')) e = make_bin(BinOp::Add, e, parse_term());
			else if (eat('-')) e = make_bin(BinOp::Sub, e, parse_term());
			else return e;
		}
	}

	Expr parse_term() {
		Expr e = parse_factor();
		for (;;) {
			if (eat('*')) e = make_bin(BinOp::Mul, e, parse_factor());
			else if (eat('/')) e = make_bin(BinOp::Div, e, parse_factor());
			else return e;
		}
	}

	// Unary minus binds looser than '^', so -delta^2 means -(delta^2).
	Expr parse_factor() {
		if (eat('-'))
			return make_bin(BinOp::Sub, make_const(0), parse_factor());
		Expr base = parse_primary();
		if (eat('^')) return make_bin(BinOp::Pow, base, parse_factor());
		return base;
	}

	Expr parse_primary() {
		skip_ws();
		if (pos >= s.size()) fail("unexpected end of expression");
		char c = s[pos];
		if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
		if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
		if (eat('(')) {
			Expr e = parse_expr();
			if (!eat(')')) fail("expected ')'");
			return e;
		}
		fail(std::string("unexpected character '") + c + "'");
	}

	Expr parse_number() {
		const char* begin = s.c_str() + pos;
		char* end = nullptr;
		double v = std::strtod(begin, &end);
		if (end == begin) fail("malformed number");
		pos += static_cast<std::size_t>(end - begin);
		// Reject digit-letter runs like "2x": force explicit '*'.
		if (pos < s.size() && (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
			fail("number directly followed by identifier (write an explicit '*')");
		return make_const(v);
	}

	Expr parse_ident() {
		std::size_t start = pos;
		while (pos < s.size() &&
		       (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
			++pos;
		std::string name = s.substr(start, pos - start);
		if (name == "pi") return make_const(3.14159265358979323846);
		if (name == "e") return make_const(2.71828182845904523536);
		if (name == "delta") return make_var(Var::Delta);
		if (name == "x") return make_var(Var::X);
		if (name == "y") return make_var(Var::Y);
		if (name == "r") return make_var(Var::R);
		if (name == "theta") return make_var(Var::Theta);
		static const std::pair<const char*, Fn> fns[] = {
		    {"log", Fn::Log}, {"sin", Fn::Sin}, {"cos", Fn::Cos},
		    {"exp", Fn::Exp}, {"sqrt", Fn::Sqrt}};
		for (auto& [fname, fv] : fns) {
			if (name == fname) {
				if (!eat('(')) fail("function '" + name + "' needs '('");
				Expr arg = parse_expr();
				if (!eat(')')) fail("expected ')'");
				return make_fn(fv, arg);
			}
		}
		pos = start;
		fail("unknown identifier '" + name + "'");
	}
};

}  // namespace detail

inline Expr parse(const std::string& text) {
	detail::Parser p(text);
	Expr e = p.parse_expr();
	p.skip_ws();
	if (p.pos != text.size()) p.fail("trailing characters");
	return e;
}

}  // namespace hardylab::expr
