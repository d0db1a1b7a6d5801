#include "qgraph/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qgraph {

EdgePotential::EdgePotential() = default;

EdgePotential EdgePotential::zero() { return EdgePotential(); }

EdgePotential EdgePotential::constant(double value) {
    EdgePotential q;
    if (value == 0.0) return q;
    q.rep_ = Rep::Constant;
    q.values_ = {value};
    return q;
}

EdgePotential EdgePotential::piecewise(std::vector<double> breaks, std::vector<double> values) {
    if (values.size() != breaks.size() + 1)
        throw std::invalid_argument("piecewise potential needs breaks.size()+1 values");
    for (size_t i = 0; i < breaks.size(); ++i) {
        if (!(breaks[i] > 0.0)) throw std::invalid_argument("piecewise breakpoints must be positive");
        if (i > 0 && !(breaks[i] > breaks[i - 1]))
            throw std::invalid_argument("piecewise breakpoints must be strictly increasing");
    }
    EdgePotential q;
    q.rep_ = Rep::Piecewise;
    q.breaks_ = std::move(breaks);
    q.values_ = std::move(values);
    return q;
}

EdgePotential EdgePotential::sampled(int order, std::vector<double> values) {
    if (order != 0 && order != 1) throw std::invalid_argument("sample order must be 0 or 1");
    size_t min_size = order == 0 ? 1 : 2;
    if (values.size() < min_size) throw std::invalid_argument("too few samples");
    EdgePotential q;
    q.rep_ = Rep::Sampled;
    q.order_ = order;
    q.values_ = std::move(values);
    return q;
}

double EdgePotential::eval(double x, double length) const {
    switch (rep_) {
        case Rep::Zero:
            return 0.0;
        case Rep::Constant:
            return values_[0];
        case Rep::Piecewise: {
            auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
            return values_[static_cast<size_t>(it - breaks_.begin())];
        }
        case Rep::Sampled: {
            if (order_ == 0) {
                const size_t n = values_.size();
                double t = x / length * static_cast<double>(n);
                auto cell = static_cast<long>(t);
                cell = std::clamp<long>(cell, 0, static_cast<long>(n) - 1);
                return values_[static_cast<size_t>(cell)];
            }
            const size_t n = values_.size() - 1;  // cells
            double t = x / length * static_cast<double>(n);
            auto cell = static_cast<long>(t);
            cell = std::clamp<long>(cell, 0, static_cast<long>(n) - 1);
            double frac = t - static_cast<double>(cell);
            return values_[static_cast<size_t>(cell)] * (1.0 - frac) +
                   values_[static_cast<size_t>(cell) + 1] * frac;
        }
    }
    return 0.0;
}

double EdgePotential::sup_norm() const {
    if (rep_ == Rep::Zero) return 0.0;
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double EdgePotential::integral(double length) const {
    switch (rep_) {
        case Rep::Zero:
            return 0.0;
        case Rep::Constant:
            return values_[0] * length;
        case Rep::Piecewise: {
            double acc = 0.0, prev = 0.0;
            for (size_t i = 0; i < breaks_.size(); ++i) {
                acc += values_[i] * (breaks_[i] - prev);
                prev = breaks_[i];
            }
            acc += values_.back() * (length - prev);
            return acc;
        }
        case Rep::Sampled: {
            if (order_ == 0) {
                double h = length / static_cast<double>(values_.size());
                double acc = 0.0;
                for (double v : values_) acc += v * h;
                return acc;
            }
            double h = length / static_cast<double>(values_.size() - 1);
            double acc = 0.0;
            for (size_t i = 0; i + 1 < values_.size(); ++i)
                acc += 0.5 * (values_[i] + values_[i + 1]) * h;
            return acc;
        }
    }
    return 0.0;
}

EdgePotential EdgePotential::scaled(double factor) const {
    EdgePotential q = *this;
    for (double& v : q.values_) v *= factor;
    if (q.rep_ == Rep::Constant && q.values_[0] == 0.0) q = EdgePotential();
    return q;
}

bool EdgePotential::exact_pieces() const {
    return rep_ != Rep::Sampled || order_ == 0;
}

std::vector<std::pair<double, double>> EdgePotential::pieces(double length) const {
    std::vector<std::pair<double, double>> out;
    switch (rep_) {
        case Rep::Zero:
            out.emplace_back(length, 0.0);
            break;
        case Rep::Constant:
            out.emplace_back(length, values_[0]);
            break;
        case Rep::Piecewise:
            for (size_t i = 0; i < breaks_.size(); ++i) {
                if (breaks_[i] >= length)
                    throw std::invalid_argument("piecewise breakpoint beyond edge length");
                out.emplace_back(breaks_[i], values_[i]);
            }
            out.emplace_back(length, values_.back());
            break;
        case Rep::Sampled: {
            if (order_ != 0)
                throw std::logic_error("linear samples have no exact piece decomposition");
            const size_t n = values_.size();
            for (size_t i = 0; i < n; ++i)
                out.emplace_back(length * static_cast<double>(i + 1) / static_cast<double>(n),
                                 values_[i]);
            break;
        }
    }
    return out;
}

EdgePotential EdgePotential::restricted(double a, double b, double length) const {
    if (!(a >= 0.0 && b <= length && a < b))
        throw std::invalid_argument("bad restriction interval");
    if (!exact_pieces())
        throw std::logic_error("cannot restrict linearly interpolated samples exactly");
    if (rep_ == Rep::Zero) return EdgePotential();
    if (rep_ == Rep::Constant) return EdgePotential::constant(values_[0]);
    std::vector<double> new_breaks, new_values;
    double prev = 0.0;
    for (const auto& [end, value] : pieces(length)) {
        double lo = std::max(prev, a), hi = std::min(end, b);
        prev = end;
        if (!(hi > lo)) continue;
        if (!new_values.empty()) new_breaks.push_back(lo - a);
        new_values.push_back(value);
    }
    if (new_values.empty()) return EdgePotential();
    if (new_values.size() == 1) return EdgePotential::constant(new_values[0]);
    return EdgePotential::piecewise(std::move(new_breaks), std::move(new_values));
}

bool EdgePotential::is_zero() const { return rep_ == Rep::Zero; }

int EdgePotential::sample_cells() const {
    if (rep_ != Rep::Sampled) return 0;
    if (order_ == 0) return static_cast<int>(values_.size());
    return static_cast<int>(values_.size()) - 1;
}

Potential Potential::zero(const MetricGraph& g) {
    return Potential(g, std::vector<EdgePotential>(static_cast<size_t>(g.num_edges()),
                                                   EdgePotential::zero()));
}

Potential Potential::constant(const MetricGraph& g, double value) {
    return Potential(g, std::vector<EdgePotential>(static_cast<size_t>(g.num_edges()),
                                                   EdgePotential::constant(value)));
}

Potential::Potential(const MetricGraph& g, std::vector<EdgePotential> per_edge)
    : per_edge_(std::move(per_edge)) {
    if (static_cast<int>(per_edge_.size()) != g.num_edges())
        throw std::invalid_argument("potential needs one entry per edge");
    lengths_.reserve(per_edge_.size());
    for (const Edge& e : g.edges()) lengths_.push_back(e.length);
}

double Potential::eval(GraphPoint p) const {
    return per_edge_.at(p.edge).eval(p.x, lengths_.at(p.edge));
}

double Potential::sup_norm() const {
    double m = 0.0;
    for (const EdgePotential& q : per_edge_) m = std::max(m, q.sup_norm());
    return m;
}

double Potential::integral() const {
    double acc = 0.0;
    for (size_t e = 0; e < per_edge_.size(); ++e) acc += per_edge_[e].integral(lengths_[e]);
    return acc;
}

Potential Potential::scaled(double factor) const {
    Potential q = *this;
    for (EdgePotential& ep : q.per_edge_) ep = ep.scaled(factor);
    return q;
}

bool Potential::is_zero() const {
    return std::all_of(per_edge_.begin(), per_edge_.end(),
                       [](const EdgePotential& q) { return q.is_zero(); });
}

bool Potential::exact_pieces() const {
    return std::all_of(per_edge_.begin(), per_edge_.end(),
                       [](const EdgePotential& q) { return q.exact_pieces(); });
}

std::pair<Potential, Potential> Potential::bracket(const MetricGraph& g) const {
    double s = sup_norm();
    return {Potential::constant(g, -s), Potential::constant(g, s)};
}

Potential Potential::split_edge(const MetricGraph& g, GraphPoint p) const {
    if (static_cast<int>(per_edge_.size()) != g.num_edges())
        throw std::invalid_argument("potential does not match graph");
    const double ell = lengths_.at(p.edge);
    const EdgePotential& q = per_edge_.at(p.edge);
    MetricGraph split = g.with_dummy_vertex(p).first;
    std::vector<EdgePotential> per_edge = per_edge_;
    per_edge[static_cast<size_t>(p.edge)] = q.restricted(0.0, p.x, ell);
    per_edge.push_back(q.restricted(p.x, ell, ell));
    return Potential(split, std::move(per_edge));
}

}  // namespace qgraph
