#pragma once

/**
 * Self-maps of the simplex given at run time.
 *
 *     map       ::= component (';' component)* [';']
 *     component ::= 'g' INDEX '=' expr
 *     expr      ::= term (('+' | '-') term)*
 *     term      ::= unary (('*' | '/') unary)*
 *     unary     ::= ('-' | '+') unary | power
 *     power     ::= primary ['^' ['-' | '+'] INTEGER]
 *     primary   ::= NUMBER | 'x' INDEX | ('min' | 'max') '(' expr (',' expr)+ ')' | '(' expr ')'
 *
 * or one of the builtins `identity`, `rotate [s=<int>]`, `pull t=<num>` and
 * `constructed file=<labeling.json> [tau=<p/q>]`.
 *
 * Evaluation clamps every component at zero and divides by the sum, which
 * is what turns an arbitrary formula into a map of the simplex into itself.
 * Formulas whose components already lie on the simplex are unchanged.
 */

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fixsim/construction.hpp"
#include "fixsim/errors.hpp"
#include "fixsim/json_io.hpp"
#include "fixsim/simplex_core.hpp"

namespace fixsim {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr
{
    enum class Kind
    {
        number,
        variable,
        negate,
        add,
        subtract,
        multiply,
        divide,
        power,
        min,
        max,
    };

    Kind kind = Kind::number;
    double value = 0;    // number
    int index = 0;       // variable
    int exponent = 0;    // power
    std::vector<ExprPtr> args;

    static ExprPtr number(double v) { return std::make_shared<Expr>(Expr{Kind::number, v, 0, 0, {}}); }
    static ExprPtr variable(int i) { return std::make_shared<Expr>(Expr{Kind::variable, 0, i, 0, {}}); }
    static ExprPtr unary(Kind k, ExprPtr a) { return std::make_shared<Expr>(Expr{k, 0, 0, 0, {std::move(a)}}); }
    static ExprPtr binary(Kind k, ExprPtr a, ExprPtr b)
    {
        return std::make_shared<Expr>(Expr{k, 0, 0, 0, {std::move(a), std::move(b)}});
    }
    static ExprPtr power(ExprPtr base, int e) { return std::make_shared<Expr>(Expr{Kind::power, 0, 0, e, {std::move(base)}}); }
    static ExprPtr call(Kind k, std::vector<ExprPtr> a) { return std::make_shared<Expr>(Expr{k, 0, 0, 0, std::move(a)}); }

    double eval(std::span<const double> x) const
    {
        switch (kind)
        {
            case Kind::number: return value;
            case Kind::variable: return x[index];
            case Kind::negate: return -args[0]->eval(x);
            case Kind::add: return args[0]->eval(x) + args[1]->eval(x);
            case Kind::subtract: return args[0]->eval(x) - args[1]->eval(x);
            case Kind::multiply: return args[0]->eval(x) * args[1]->eval(x);
            case Kind::divide: return args[0]->eval(x) / args[1]->eval(x);
            case Kind::power: return std::pow(args[0]->eval(x), exponent);
            case Kind::min:
            case Kind::max:
            {
                double best = args[0]->eval(x);
                for (std::size_t i = 1; i < args.size(); ++i)
                {
                    const double v = args[i]->eval(x);
                    best = kind == Kind::min ? std::min(best, v) : std::max(best, v);
                }
                return best;
            }
        }
        return 0;
    }

    /** Fully parenthesized text that parses back to the same tree. */
    std::string str() const
    {
        switch (kind)
        {
            case Kind::number:
            {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", std::abs(value));
                return std::signbit(value) ? "(-" + std::string(buf) + ")" : std::string(buf);
            }
            case Kind::variable: return "x" + std::to_string(index);
            case Kind::negate: return "(-" + args[0]->str() + ")";
            case Kind::add: return "(" + args[0]->str() + " + " + args[1]->str() + ")";
            case Kind::subtract: return "(" + args[0]->str() + " - " + args[1]->str() + ")";
            case Kind::multiply: return "(" + args[0]->str() + " * " + args[1]->str() + ")";
            case Kind::divide: return "(" + args[0]->str() + " / " + args[1]->str() + ")";
            case Kind::power: return "(" + args[0]->str() + "^" + std::to_string(exponent) + ")";
            case Kind::min:
            case Kind::max:
            {
                std::string s = kind == Kind::min ? "min(" : "max(";
                for (std::size_t i = 0; i < args.size(); ++i)
                    s += (i ? ", " : "") + args[i]->str();
                return s + ")";
            }
        }
        return {};
    }
};

/** A self-map of the n-simplex: builtin family, parsed expression or constructed perturbation map. */
class MapSpec
{
    public:
        enum class Kind
        {
            builtin,
            expression,
            constructed,
        };

        static MapSpec identity(int n) { return MapSpec(Kind::builtin, "identity", n, 1.0); }

        /** g_i = x_{(i - shift) mod (n+1)}; shift 1 sends (x0, x1, x2) to (x2, x0, x1). */
        static MapSpec rotate(int n, int shift = 1)
        {
            MapSpec s(Kind::builtin, "rotate", n, 1.0);
            s.shift_ = ((shift % (n + 1)) + (n + 1)) % (n + 1);
            return s;
        }

        /** (1 - t) x + t b with b the barycenter. Declared Lipschitz constant 1. */
        static MapSpec pull(int n, double t)
        {
            if (!(t >= 0 && t <= 1))
                throw InvalidInput("pull parameter t must lie in [0, 1]");
            MapSpec s(Kind::builtin, "pull", n, 1.0);
            s.t_ = t;
            return s;
        }

        static MapSpec expression(int n, std::vector<ExprPtr> components)
        {
            if (components.size() != static_cast<std::size_t>(n) + 1)
                throw ArityError("map has " + std::to_string(components.size()) + " components, need "
                                 + std::to_string(n + 1));
            MapSpec s(Kind::expression, "expression", n, std::nullopt);
            s.components_ = std::move(components);
            return s;
        }

        static MapSpec constructed(std::shared_ptr<const VertexMap> vm, std::string source = {})
        {
            const ConstructedMap cm{vm};
            MapSpec s(Kind::constructed, "constructed", vm->dimension(), cm.lipschitz());
            s.vm_ = std::move(vm);
            s.source_ = std::move(source);
            return s;
        }

        int dimension() const { return n_; }
        Kind kind() const { return kind_; }
        const std::string& name() const { return name_; }
        std::optional<double> declared_lipschitz() const { return lipschitz_; }
        std::span<const ExprPtr> components() const { return components_; }
        std::shared_ptr<const VertexMap> vertex_map() const { return vm_; }

        /** Components before clamping and normalization. */
        std::vector<double> raw(std::span<const double> x) const
        {
            if (x.size() != static_cast<std::size_t>(n_) + 1)
                throw WrongArity("map of dimension " + std::to_string(n_) + " applied to "
                                 + std::to_string(x.size()) + " coordinates");
            std::vector<double> out(n_ + 1);
            switch (kind_)
            {
                case Kind::expression:
                    for (int i = 0; i <= n_; ++i)
                        out[i] = components_[i]->eval(x);
                    break;
                case Kind::constructed: out = ConstructedMap{vm_}(x); break;
                case Kind::builtin:
                    if (name_ == "identity")
                        out.assign(x.begin(), x.end());
                    else if (name_ == "rotate")
                        for (int i = 0; i <= n_; ++i)
                            out[i] = x[(i - shift_ + n_ + 1) % (n_ + 1)];
                    else
                        for (int i = 0; i <= n_; ++i)
                            out[i] = (1 - t_) * x[i] + t_ / (n_ + 1);
                    break;
            }
            return out;
        }

        /** Clamped and normalized image. */
        std::vector<double> operator()(std::span<const double> x) const
        {
            std::vector<double> out = raw(x);
            double sum = 0;
            for (double& c : out)
            {
                if (!std::isfinite(c))
                    throw MapRangeError("map component is not finite");
                c = std::max(c, 0.0);
                sum += c;
            }
            if (sum <= 1e-12)
                throw DegenerateOutput("clamped components sum to " + std::to_string(sum));
            for (double& c : out)
                c /= sum;
            return out;
        }

        /** Text accepted by parse_map for the same dimension. */
        std::string str() const
        {
            switch (kind_)
            {
                case Kind::expression:
                {
                    std::string s;
                    for (int i = 0; i <= n_; ++i)
                        s += (i ? "; g" : "g") + std::to_string(i) + " = " + components_[i]->str();
                    return s;
                }
                case Kind::constructed:
                    return "constructed file=" + source_ + " tau=" + to_fraction_string(vm_->tau);
                case Kind::builtin:
                    if (name_ == "rotate")
                        return "rotate s=" + std::to_string(shift_);
                    if (name_ == "pull")
                    {
                        char buf[40];
                        std::snprintf(buf, sizeof buf, "%.17g", t_);
                        return std::string("pull t=") + buf;
                    }
                    return name_;
            }
            return {};
        }

    private:
        MapSpec(Kind kind, std::string name, int n, std::optional<double> lipschitz)
            : kind_(kind), name_(std::move(name)), n_(n), lipschitz_(lipschitz)
        {
            if (n < 1)
                throw InvalidInput("map dimension must be >= 1");
        }

        Kind kind_;
        std::string name_;
        int n_;
        std::optional<double> lipschitz_;
        int shift_ = 1;
        double t_ = 0;
        std::vector<ExprPtr> components_;
        std::shared_ptr<const VertexMap> vm_;
        std::string source_;
};

inline BarycentricPoint<double> eval_map(const MapSpec& spec, const BarycentricPoint<double>& p)
{
    return BarycentricPoint<double>(spec(p.coords()));
}

namespace detail {

class MapParser
{
    public:
        MapParser(std::string_view text, int n) : text_(text), n_(n) {}

        std::vector<ExprPtr> parse_components()
        {
            std::vector<ExprPtr> comps(n_ + 1);
            std::size_t count = 0;
            skip_space();
            while (true)
            {
                skip_space();
                if (at_end())
                    break;
                const auto [line, col] = position();
                if (peek() != 'g')
                    fail("expected a component 'g<index> = ...'");
                ++pos_;
                const int idx = parse_index("component");
                skip_space();
                expect('=');
                ExprPtr e = parse_expr();
                if (idx > n_)
                    throw ArityError("component g" + std::to_string(idx) + " exceeds dimension "
                                     + std::to_string(n_));
                if (comps[idx])
                    throw SyntaxError("duplicate component g" + std::to_string(idx), line, col);
                comps[idx] = std::move(e);
                ++count;
                skip_space();
                if (at_end())
                    break;
                expect(';');
            }
            if (count != static_cast<std::size_t>(n_) + 1)
                throw ArityError("map has " + std::to_string(count) + " components, need "
                                 + std::to_string(n_ + 1));
            return comps;
        }

    private:
        bool at_end() const { return pos_ >= text_.size(); }
        char peek() const { return at_end() ? '\0' : text_[pos_]; }

        std::pair<std::size_t, std::size_t> position() const
        {
            std::size_t line = 1, col = 1;
            for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i)
            {
                if (text_[i] == '\n')
                {
                    ++line;
                    col = 1;
                }
                else
                {
                    ++col;
                }
            }
            return {line, col};
        }

        [[noreturn]] void fail(const std::string& what) const
        {
            const auto [line, col] = position();
            throw SyntaxError(what, line, col);
        }

        void skip_space()
        {
            while (!at_end() && std::isspace(static_cast<unsigned char>(peek())))
                ++pos_;
        }

        void expect(char c)
        {
            skip_space();
            if (peek() != c)
                fail(std::string("expected '") + c + "'");
            ++pos_;
        }

        int parse_index(const char* what)
        {
            const std::size_t start = pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
                ++pos_;
            if (start == pos_)
            {
                pos_ = start;
                fail(std::string("expected ") + what + " index");
            }
            int idx = 0;
            const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, idx);
            if (res.ec != std::errc())
                fail("index out of range");
            return idx;
        }

        ExprPtr parse_expr()
        {
            ExprPtr lhs = parse_term();
            while (true)
            {
                skip_space();
                const char c = peek();
                if (c != '+' && c != '-')
                    return lhs;
                ++pos_;
                ExprPtr rhs = parse_term();
                lhs = Expr::binary(c == '+' ? Expr::Kind::add : Expr::Kind::subtract, lhs, rhs);
            }
        }

        ExprPtr parse_term()
        {
            ExprPtr lhs = parse_unary();
            while (true)
            {
                skip_space();
                const char c = peek();
                if (c != '*' && c != '/')
                    return lhs;
                ++pos_;
                ExprPtr rhs = parse_unary();
                lhs = Expr::binary(c == '*' ? Expr::Kind::multiply : Expr::Kind::divide, lhs, rhs);
            }
        }

        ExprPtr parse_unary()
        {
            skip_space();
            if (peek() == '-')
            {
                ++pos_;
                return Expr::unary(Expr::Kind::negate, parse_unary());
            }
            if (peek() == '+')
            {
                ++pos_;
                return parse_unary();
            }
            return parse_power();
        }

        ExprPtr parse_power()
        {
            ExprPtr base = parse_primary();
            skip_space();
            if (peek() != '^')
                return base;
            ++pos_;
            skip_space();
            int sign = 1;
            if (peek() == '-' || peek() == '+')
            {
                sign = peek() == '-' ? -1 : 1;
                ++pos_;
            }
            if (!std::isdigit(static_cast<unsigned char>(peek())))
                fail("exponent must be an integer literal");
            return Expr::power(base, sign * parse_index("exponent"));
        }

        ExprPtr parse_primary()
        {
            skip_space();
            const char c = peek();
            if (c == '(')
            {
                ++pos_;
                ExprPtr e = parse_expr();
                expect(')');
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return parse_number();
            if (c == 'x')
            {
                ++pos_;
                const int idx = parse_index("variable");
                if (idx > n_)
                    throw ArityError("variable x" + std::to_string(idx) + " exceeds dimension "
                                     + std::to_string(n_));
                return Expr::variable(idx);
            }
            if (text_.substr(pos_, 3) == "min" || text_.substr(pos_, 3) == "max")
            {
                const auto kind = text_.substr(pos_, 3) == "min" ? Expr::Kind::min : Expr::Kind::max;
                pos_ += 3;
                expect('(');
                std::vector<ExprPtr> args{parse_expr()};
                skip_space();
                while (peek() == ',')
                {
                    ++pos_;
                    args.push_back(parse_expr());
                    skip_space();
                }
                expect(')');
                if (args.size() < 2)
                    fail("min/max need at least two arguments");
                return Expr::call(kind, std::move(args));
            }
            if (at_end())
                fail("unexpected end of input");
            fail(std::string("unexpected character '") + c + "'");
        }

        ExprPtr parse_number()
        {
            const std::size_t start = pos_;
            while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.'))
                ++pos_;
            if (!at_end() && (peek() == 'e' || peek() == 'E'))
            {
                std::size_t save = pos_++;
                if (peek() == '+' || peek() == '-')
                    ++pos_;
                if (!std::isdigit(static_cast<unsigned char>(peek())))
                    pos_ = save;
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
                    ++pos_;
            }
            double v = 0;
            const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
            if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
            {
                pos_ = start;
                fail("malformed number");
            }
            return Expr::number(v);
        }

        std::string_view text_;
        int n_;
        std::size_t pos_ = 0;
};

inline std::vector<std::string> split_words(std::string_view text)
{
    std::vector<std::string> words;
    std::istringstream in{std::string(text)};
    for (std::string w; in >> w;)
        words.push_back(w);
    return words;
}

}   // namespace detail

/** Parses a map definition for dimension n (see the grammar at the top of this header). */
inline MapSpec parse_map(std::string_view text, int n)
{
    if (n < 1)
        throw InvalidInput("map dimension must be >= 1");
    const auto words = detail::split_words(text);
    if (words.empty())
        throw SyntaxError("empty map definition", 1, 1);

    const std::string& head = words.front();
    const bool component = head.size() > 1 && head[0] == 'g'
                           && (std::isdigit(static_cast<unsigned char>(head[1])) || head[1] == '=');
    if (component || head == "g")
        return MapSpec::expression(n, detail::MapParser(text, n).parse_components());

    std::vector<std::pair<std::string, std::string>> params;
    for (std::size_t i = 1; i < words.size(); ++i)
    {
        const auto eq = words[i].find('=');
        if (eq == std::string::npos || eq == 0)
            throw InvalidInput("builtin parameter '" + words[i] + "' is not key=value");
        params.emplace_back(words[i].substr(0, eq), words[i].substr(eq + 1));
    }
    auto param = [&](const std::string& key) -> std::optional<std::string> {
        for (const auto& [k, v] : params)
            if (k == key)
                return v;
        return std::nullopt;
    };
    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [k, v] : params)
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })
                == allowed.end())
                throw InvalidInput("builtin '" + head + "' has no parameter '" + k + "'");
    };
    auto number = [&](const std::string& v) {
        double out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw InvalidInput("parameter value '" + v + "' is not a number");
        return out;
    };

    if (head == "identity")
    {
        reject_unknown({});
        return MapSpec::identity(n);
    }
    if (head == "rotate")
    {
        reject_unknown({"s"});
        const auto s = param("s");
        return MapSpec::rotate(n, s ? static_cast<int>(number(*s)) : 1);
    }
    if (head == "pull")
    {
        reject_unknown({"t"});
        const auto t = param("t");
        if (!t)
            throw InvalidInput("pull needs t=<number>");
        return MapSpec::pull(n, number(*t));
    }
    if (head == "constructed")
    {
        reject_unknown({"file", "tau"});
        const auto file = param("file");
        if (!file)
            throw InvalidInput("constructed needs file=<labeling.json>");
        const Labeling lab = read_labeling_file(*file);
        if (lab.dimension() != n)
            throw ArityError("labeling file has dimension " + std::to_string(lab.dimension()) + ", map needs "
                             + std::to_string(n));
        auto grid = std::make_shared<const SubdivisionGrid>(lab.dimension(), lab.subdivisions());
        std::optional<Rational> tau;
        if (const auto t = param("tau"))
            tau = parse_rational(*t);
        return MapSpec::constructed(std::make_shared<const VertexMap>(build_vertex_map(grid, lab, tau)), *file);
    }
    throw UnknownBuiltin("unknown builtin map '" + head + "'");
}

inline MapSpec read_map_file(const std::string& path, int n)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot read map file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_map(buf.str(), n);
}

}   // namespace fixsim
