#pragma once

// Reverse-mode autodiff over flat real vectors. Complex quantities are
// handled as re/im pairs of real nodes; the DFT/IDFT are primitive ops
// whose adjoints are themselves Fourier transforms.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "unidyg/complex.hpp"
#include "unidyg/fft.hpp"

namespace unidyg {

struct Parameter {
    std::string name;
    Vec value;
    Vec grad;

    Parameter() = default;
    Parameter(std::string n, Vec v)
        : name(std::move(n)), value(std::move(v)), grad(value.size(), 0.0) {}

    void zero_grad() { grad.assign(value.size(), 0.0); }
};

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

enum class Op : std::uint8_t {
    Leaf,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    MulConst,
    Concat,
    Slice,
    Sum,
    Exp,
    Sigmoid,
    Relu,
    Softplus,
    Magnitude,
    MatVec,
    Dft,
    Idft,
    MulScalarVar,
    DivScalarVar,
};

class Tape {
  public:
    Var leaf(Vec v) {
        Node n;
        n.op = Op::Leaf;
        n.value = std::move(v);
        return push(std::move(n));
    }

    Var zeros(std::size_t len) { return leaf(Vec(len, 0.0)); }

    // Leaf bound to a Parameter; backward() accumulates into p.grad.
    // Repeated requests for the same parameter reuse one node, so large
    // weight matrices are materialized once per tape no matter how many
    // graph fragments read them.
    Var param(Parameter& p) {
        auto it = param_nodes_.find(&p);
        if (it != param_nodes_.end()) return Var{it->second};
        Node n;
        n.op = Op::Leaf;
        n.value = p.value;
        n.param = &p;
        Var v = push(std::move(n));
        param_nodes_.emplace(&p, v.id);
        return v;
    }

    Var add(Var a, Var b) { return binary(Op::Add, a, b); }
    Var sub(Var a, Var b) { return binary(Op::Sub, a, b); }
    Var mul(Var a, Var b) { return binary(Op::Mul, a, b); }

    Var scale(Var a, double c) {
        Node n = unary(Op::Scale, a);
        n.scalar = c;
        auto& v = val(a);
        n.value.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) n.value[i] = c * v[i];
        return push(std::move(n));
    }

    Var add_scalar(Var a, double c) {
        Node n = unary(Op::AddScalar, a);
        n.scalar = c;
        auto& v = val(a);
        n.value.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) n.value[i] = v[i] + c;
        return push(std::move(n));
    }

    // Element-wise product with a non-differentiated constant (masks).
    Var mul_const(Var a, Vec c) {
        auto& v = val(a);
        if (v.size() != c.size()) throw std::invalid_argument("mul_const: length mismatch");
        Node n = unary(Op::MulConst, a);
        n.value.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) n.value[i] = v[i] * c[i];
        n.cvec = std::move(c);
        return push(std::move(n));
    }

    Var concat(const std::vector<Var>& parts) {
        if (parts.empty()) throw std::invalid_argument("concat: no inputs");
        Node n;
        n.op = Op::Concat;
        for (Var p : parts) {
            n.many.push_back(p.id);
            const Vec& v = val(p);
            n.value.insert(n.value.end(), v.begin(), v.end());
        }
        return push(std::move(n));
    }

    Var slice(Var a, std::size_t off, std::size_t len) {
        auto& v = val(a);
        if (off + len > v.size()) throw std::invalid_argument("slice: out of range");
        Node n = unary(Op::Slice, a);
        n.off = off;
        n.value.assign(v.begin() + long(off), v.begin() + long(off + len));
        return push(std::move(n));
    }

    Var sum(Var a) {
        Node n = unary(Op::Sum, a);
        double s = 0.0;
        for (double x : val(a)) s += x;
        n.value = {s};
        return push(std::move(n));
    }

    Var dot(Var a, Var b) { return sum(mul(a, b)); }

    Var exp(Var a) { return elementwise(Op::Exp, a, [](double x) { return std::exp(x); }); }

    Var sigmoid(Var a) {
        return elementwise(Op::Sigmoid, a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    }

    Var relu(Var a) {
        return elementwise(Op::Relu, a, [](double x) { return x > 0.0 ? x : 0.0; });
    }

    // log(1 + e^x) in overflow-safe form; gradient is sigmoid(x).
    Var softplus(Var a) {
        return elementwise(Op::Softplus, a, [](double x) {
            return std::log1p(std::exp(-std::abs(x))) + (x > 0.0 ? x : 0.0);
        });
    }

    // Per-element sqrt(re^2 + im^2); gradient clamped to zero near the origin.
    Var magnitude(Var re, Var im) {
        auto& r = val(re);
        auto& i = val(im);
        if (r.size() != i.size()) throw std::invalid_argument("magnitude: length mismatch");
        Node n;
        n.op = Op::Magnitude;
        n.a = re.id;
        n.b = im.id;
        n.value.resize(r.size());
        // plain sqrt form: inputs are O(1), so hypot's over/underflow
        // guards are unnecessary and it is several times slower
        for (std::size_t k = 0; k < r.size(); ++k)
            n.value[k] = std::sqrt(r[k] * r[k] + i[k] * i[k]);
        return push(std::move(n));
    }

    // W (rows x cols, row-major) times x.
    Var matvec(Var w, Var x, std::size_t rows, std::size_t cols) {
        auto& wv = val(w);
        auto& xv = val(x);
        if (wv.size() != rows * cols || xv.size() != cols)
            throw std::invalid_argument("matvec: shape mismatch");
        Node n;
        n.op = Op::MatVec;
        n.a = w.id;
        n.b = x.id;
        n.off = rows;
        n.len = cols;
        n.value.assign(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double s = 0.0;
            const double* row = wv.data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) s += row[c] * xv[c];
            n.value[r] = s;
        }
        return push(std::move(n));
    }

    // Forward DFT of a complex pair; output is [Re || Im], length 2n.
    // im may be invalid for a purely real input. Transforms are pure, so
    // repeated requests on the same operand nodes share one output node.
    Var dft_pair(Var re, Var im) { return memo_transform(Op::Dft, re, im); }
    Var idft_pair(Var re, Var im) { return memo_transform(Op::Idft, re, im); }

    Var mul_scalar_var(Var a, Var s) {
        if (val(s).size() != 1) throw std::invalid_argument("mul_scalar_var: scalar expected");
        Node n;
        n.op = Op::MulScalarVar;
        n.a = a.id;
        n.b = s.id;
        const double sv = val(s)[0];
        auto& av = val(a);
        n.value.resize(av.size());
        for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * sv;
        return push(std::move(n));
    }

    Var div_scalar_var(Var a, Var s) {
        if (val(s).size() != 1) throw std::invalid_argument("div_scalar_var: scalar expected");
        Node n;
        n.op = Op::DivScalarVar;
        n.a = a.id;
        n.b = s.id;
        const double sv = val(s)[0];
        auto& av = val(a);
        n.value.resize(av.size());
        for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] / sv;
        return push(std::move(n));
    }

    const Vec& val(Var v) const { return nodes_.at(std::size_t(v.id)).value; }
    const Vec& grad_of(Var v) const { return nodes_.at(std::size_t(v.id)).grad; }
    std::size_t size() const { return nodes_.size(); }
    void clear() {
        nodes_.clear();
        param_nodes_.clear();
        transform_memo_.clear();
    }

    // Reverse sweep from a scalar loss; accumulates into bound Parameters.
    void backward(Var loss) {
        if (!loss.valid() || val(loss).size() != 1)
            throw std::invalid_argument("backward: loss must be a scalar node");
        for (auto& n : nodes_) n.grad.assign(n.value.size(), 0.0);
        nodes_[std::size_t(loss.id)].grad[0] = 1.0;

        for (int id = loss.id; id >= 0; --id) {
            Node& n = nodes_[std::size_t(id)];
            bool any = false;
            for (double g : n.grad)
                if (g != 0.0) { any = true; break; }
            if (!any) continue;
            propagate(n);
        }
        for (auto& n : nodes_) {
            if (n.param) {
                for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
            }
        }
    }

  private:
    struct Node {
        Op op = Op::Leaf;
        int a = -1;
        int b = -1;
        double scalar = 0.0;
        std::size_t off = 0;  // Slice offset / MatVec rows
        std::size_t len = 0;  // MatVec cols
        Vec value;
        Vec grad;
        Vec cvec;
        std::vector<int> many;
        Parameter* param = nullptr;
    };

    std::vector<Node> nodes_;
    std::unordered_map<const Parameter*, int> param_nodes_;
    std::map<std::tuple<Op, int, int>, int> transform_memo_;

    Var memo_transform(Op op, Var re, Var im) {
        const auto key = std::make_tuple(op, re.id, im.id);
        auto it = transform_memo_.find(key);
        if (it != transform_memo_.end()) return Var{it->second};
        Var v = transform_node(op, re, im);
        transform_memo_.emplace(key, v.id);
        return v;
    }

    Var push(Node n) {
        nodes_.push_back(std::move(n));
        return Var{int(nodes_.size()) - 1};
    }

    Node unary(Op op, Var a) {
        Node n;
        n.op = op;
        n.a = a.id;
        return n;
    }

    Var binary(Op op, Var a, Var b) {
        auto& av = val(a);
        auto& bv = val(b);
        if (av.size() != bv.size())
            throw std::invalid_argument("elementwise op: length mismatch");
        Node n;
        n.op = op;
        n.a = a.id;
        n.b = b.id;
        n.value.resize(av.size());
        switch (op) {
            case Op::Add:
                for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + bv[i];
                break;
            case Op::Sub:
                for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] - bv[i];
                break;
            case Op::Mul:
                for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] * bv[i];
                break;
            default:
                throw std::logic_error("binary: bad op");
        }
        return push(std::move(n));
    }

    template <typename F>
    Var elementwise(Op op, Var a, F f) {
        Node n = unary(op, a);
        auto& v = val(a);
        n.value.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) n.value[i] = f(v[i]);
        return push(std::move(n));
    }

    Var transform_node(Op op, Var re, Var im) {
        const Vec& r = val(re);
        ComplexVector x(r, im.valid() ? val(im) : Vec(r.size(), 0.0));
        ComplexVector X = (op == Op::Dft) ? dft(x) : idft(x);
        Node n;
        n.op = op;
        n.a = re.id;
        n.b = im.valid() ? im.id : -1;
        n.value.resize(2 * X.size());
        for (std::size_t i = 0; i < X.size(); ++i) {
            n.value[i] = X.re[i];
            n.value[X.size() + i] = X.im[i];
        }
        return push(std::move(n));
    }

    Vec& g(int id) { return nodes_[std::size_t(id)].grad; }
    const Vec& v(int id) const { return nodes_[std::size_t(id)].value; }

    void propagate(Node& n) {
        const Vec& go = n.grad;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Add: {
                Vec& ga = g(n.a);
                Vec& gb = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i];
                    gb[i] += go[i];
                }
                break;
            }
            case Op::Sub: {
                Vec& ga = g(n.a);
                Vec& gb = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i];
                    gb[i] -= go[i];
                }
                break;
            }
            case Op::Mul: {
                const Vec& av = v(n.a);
                const Vec& bv = v(n.b);
                Vec& ga = g(n.a);
                Vec& gb = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i] * bv[i];
                    gb[i] += go[i] * av[i];
                }
                break;
            }
            case Op::Scale: {
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += n.scalar * go[i];
                break;
            }
            case Op::AddScalar: {
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
                break;
            }
            case Op::MulConst: {
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * n.cvec[i];
                break;
            }
            case Op::Concat: {
                std::size_t off = 0;
                for (int in : n.many) {
                    Vec& gi = g(in);
                    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go[off + i];
                    off += gi.size();
                }
                break;
            }
            case Op::Slice: {
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[n.off + i] += go[i];
                break;
            }
            case Op::Sum: {
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[0];
                break;
            }
            case Op::Exp: {
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * n.value[i];
                break;
            }
            case Op::Sigmoid: {
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i)
                    ga[i] += go[i] * n.value[i] * (1.0 - n.value[i]);
                break;
            }
            case Op::Relu: {
                const Vec& av = v(n.a);
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i)
                    if (av[i] > 0.0) ga[i] += go[i];
                break;
            }
            case Op::Softplus: {
                const Vec& av = v(n.a);
                Vec& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i)
                    ga[i] += go[i] / (1.0 + std::exp(-av[i]));
                break;
            }
            case Op::Magnitude: {
                const Vec& rv = v(n.a);
                const Vec& iv = v(n.b);
                Vec& gr = g(n.a);
                Vec& gi = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    if (n.value[i] > 1e-12) {
                        gr[i] += go[i] * rv[i] / n.value[i];
                        gi[i] += go[i] * iv[i] / n.value[i];
                    }
                }
                break;
            }
            case Op::MatVec: {
                const std::size_t rows = n.off, cols = n.len;
                const Vec& wv = v(n.a);
                const Vec& xv = v(n.b);
                Vec& gw = g(n.a);
                Vec& gx = g(n.b);
                for (std::size_t r = 0; r < rows; ++r) {
                    const double gr = go[r];
                    if (gr == 0.0) continue;
                    double* gwrow = gw.data() + r * cols;
                    const double* wrow = wv.data() + r * cols;
                    for (std::size_t c = 0; c < cols; ++c) {
                        gwrow[c] += gr * xv[c];
                        gx[c] += wrow[c] * gr;
                    }
                }
                break;
            }
            case Op::Dft:
            case Op::Idft: {
                const std::size_t m = go.size() / 2;
                ComplexVector gc(Vec(go.begin(), go.begin() + long(m)),
                                 Vec(go.begin() + long(m), go.end()));
                // Adjoint of the forward DFT is the unnormalized inverse
                // transform; adjoint of the IDFT is (1/n) * forward.
                ComplexVector gin = detail::transform(gc, n.op == Op::Dft);
                if (n.op == Op::Idft) {
                    const double inv = 1.0 / double(m);
                    for (std::size_t i = 0; i < m; ++i) {
                        gin.re[i] *= inv;
                        gin.im[i] *= inv;
                    }
                }
                Vec& gr = g(n.a);
                for (std::size_t i = 0; i < m; ++i) gr[i] += gin.re[i];
                if (n.b >= 0) {
                    Vec& gi = g(n.b);
                    for (std::size_t i = 0; i < m; ++i) gi[i] += gin.im[i];
                }
                break;
            }
            case Op::MulScalarVar: {
                const Vec& av = v(n.a);
                const double sv = v(n.b)[0];
                Vec& ga = g(n.a);
                Vec& gs = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i] * sv;
                    gs[0] += go[i] * av[i];
                }
                break;
            }
            case Op::DivScalarVar: {
                const Vec& av = v(n.a);
                const double sv = v(n.b)[0];
                Vec& ga = g(n.a);
                Vec& gs = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i] / sv;
                    gs[0] -= go[i] * av[i] / (sv * sv);
                }
                break;
            }
        }
    }
};

// Central finite-difference check. `build` constructs the forward graph
// on a fresh tape and returns the scalar loss node. Returns the max over
// all parameter coordinates of |analytic - fd| / max(1, |analytic|).
inline double grad_check(const std::vector<Parameter*>& params,
                         const std::function<Var(Tape&)>& build, double eps = 1e-5) {
    if (eps < 1e-7 || eps > 1e-3) throw std::invalid_argument("grad_check: eps out of range");
    for (auto* p : params) p->zero_grad();
    {
        Tape t;
        Var loss = build(t);
        if (!std::isfinite(t.val(loss)[0]))
            throw std::runtime_error("grad_check: non-finite forward value");
        t.backward(loss);
    }
    auto eval = [&]() {
        Tape t;
        Var loss = build(t);
        return t.val(loss)[0];
    };
    double max_rel = 0.0;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + eps;
            const double fp = eval();
            p->value[i] = orig - eps;
            const double fm = eval();
            p->value[i] = orig;
            const double fd = (fp - fm) / (2.0 * eps);
            const double an = p->grad[i];
            const double rel = std::abs(an - fd) / std::max(1.0, std::abs(an));
            if (rel > max_rel) max_rel = rel;
        }
    }
    return max_rel;
}

}  // namespace unidyg
