#include "qgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace qgraph {

MetricGraph::MetricGraph(int num_vertices, std::vector<Edge> edges)
    : num_vertices_(num_vertices), edges_(std::move(edges)) {
    if (num_vertices_ <= 0)
        throw std::invalid_argument("metric graph needs at least one vertex");
    if (edges_.empty())
        throw std::invalid_argument("metric graph needs at least one edge");
    incidence_.assign(num_vertices_, {});
    total_length_ = 0.0;
    min_edge_length_ = std::numeric_limits<double>::infinity();
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        const Edge& ed = edges_[e];
        if (ed.from < 0 || ed.from >= num_vertices_ || ed.to < 0 || ed.to >= num_vertices_)
            throw std::invalid_argument("edge " + std::to_string(e) + " references unknown vertex");
        if (!(ed.length > 0.0) || !std::isfinite(ed.length))
            throw std::invalid_argument("edge " + std::to_string(e) + " must have positive finite length");
        incidence_[ed.from].push_back({e, EdgeEnd::Zero});
        incidence_[ed.to].push_back({e, EdgeEnd::Ell});
        total_length_ += ed.length;
        min_edge_length_ = std::min(min_edge_length_, ed.length);
    }
    for (auto& inc : incidence_) {
        std::sort(inc.begin(), inc.end(), [](const Incidence& a, const Incidence& b) {
            if (a.edge != b.edge) return a.edge < b.edge;
            return a.end == EdgeEnd::Zero && b.end == EdgeEnd::Ell;
        });
    }
    for (int v = 0; v < num_vertices_; ++v)
        if (incidence_[v].empty())
            throw std::invalid_argument("vertex " + std::to_string(v) + " is isolated");
}

int MetricGraph::degree(int v) const { return static_cast<int>(incidences(v).size()); }

const std::vector<Incidence>& MetricGraph::incidences(int v) const {
    if (v < 0 || v >= num_vertices_)
        throw std::out_of_range("vertex id out of range");
    return incidence_[v];
}

int MetricGraph::endpoint(int e, EdgeEnd end) const {
    const Edge& ed = edge(e);
    return end == EdgeEnd::Zero ? ed.from : ed.to;
}

int MetricGraph::num_components() const {
    std::vector<int> comp(num_vertices_, -1);
    int n_comp = 0;
    for (int s = 0; s < num_vertices_; ++s) {
        if (comp[s] != -1) continue;
        std::queue<int> bfs;
        bfs.push(s);
        comp[s] = n_comp;
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop();
            for (const Incidence& inc : incidence_[v]) {
                int w = endpoint(inc.edge, inc.end == EdgeEnd::Zero ? EdgeEnd::Ell : EdgeEnd::Zero);
                if (comp[w] == -1) {
                    comp[w] = n_comp;
                    bfs.push(w);
                }
            }
        }
        ++n_comp;
    }
    return n_comp;
}

int MetricGraph::betti_number() const {
    return num_edges() - num_vertices() + num_components();
}

std::optional<std::pair<std::vector<int>, std::vector<int>>> MetricGraph::bipartition() const {
    std::vector<int> color(num_vertices_, -1);
    for (int s = 0; s < num_vertices_; ++s) {
        if (color[s] != -1) continue;
        color[s] = 0;
        std::queue<int> bfs;
        bfs.push(s);
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop();
            for (const Incidence& inc : incidence_[v]) {
                int w = endpoint(inc.edge, inc.end == EdgeEnd::Zero ? EdgeEnd::Ell : EdgeEnd::Zero);
                if (w == v) return std::nullopt;  // loop
                if (color[w] == -1) {
                    color[w] = 1 - color[v];
                    bfs.push(w);
                } else if (color[w] == color[v]) {
                    return std::nullopt;
                }
            }
        }
    }
    std::vector<int> side0, side1;
    for (int v = 0; v < num_vertices_; ++v)
        (color[v] == 0 ? side0 : side1).push_back(v);
    return std::make_pair(side0, side1);
}

std::pair<MetricGraph, int> MetricGraph::with_dummy_vertex(GraphPoint p) const {
    if (p.edge < 0 || p.edge >= num_edges())
        throw std::invalid_argument("split point references unknown edge");
    const Edge& ed = edge(p.edge);
    if (!(p.x > 0.0) || !(p.x < ed.length))
        throw std::invalid_argument("split point must be interior to the edge");
    int new_vertex = num_vertices_;
    std::vector<Edge> new_edges = edges_;
    new_edges[p.edge] = Edge{ed.from, new_vertex, p.x};
    new_edges.push_back(Edge{new_vertex, ed.to, ed.length - p.x});
    return {MetricGraph(num_vertices_ + 1, std::move(new_edges)), new_vertex};
}

MetricGraph make_interval(double ell) {
    return MetricGraph(2, {Edge{0, 1, ell}});
}

MetricGraph make_star(int arms, double arm_length) {
    return make_star(std::vector<double>(static_cast<size_t>(arms), arm_length));
}

MetricGraph make_star(const std::vector<double>& arm_lengths) {
    int arms = static_cast<int>(arm_lengths.size());
    if (arms < 1) throw std::invalid_argument("star needs at least one arm");
    std::vector<Edge> edges;
    for (int a = 0; a < arms; ++a)
        edges.push_back(Edge{0, a + 1, arm_lengths[a]});
    return MetricGraph(arms + 1, std::move(edges));
}

MetricGraph make_cycle(int m, const std::vector<double>& lengths) {
    if (m < 1) throw std::invalid_argument("cycle needs at least one vertex");
    if (lengths.size() != 1 && static_cast<int>(lengths.size()) != m)
        throw std::invalid_argument("cycle expects 1 or m edge lengths");
    auto len = [&](int e) { return lengths.size() == 1 ? lengths[0] : lengths[e]; };
    std::vector<Edge> edges;
    for (int e = 0; e < m; ++e)
        edges.push_back(Edge{e, (e + 1) % m, len(e)});
    return MetricGraph(m, std::move(edges));
}

MetricGraph make_lasso(double loop_length, double tail_length) {
    return MetricGraph(2, {Edge{0, 0, loop_length}, Edge{0, 1, tail_length}});
}

MetricGraph make_figure1(const std::vector<double>& lengths) {
    if (lengths.size() != 1 && lengths.size() != 7)
        throw std::invalid_argument("bipartite example expects 1 or 7 edge lengths");
    auto len = [&](int e) { return lengths.size() == 1 ? lengths[0] : lengths[e]; };
    // Sides {0,1,2,3} and {4,5,6}; one independent cycle 0-4-1-5-0.
    std::vector<Edge> edges = {
        Edge{0, 4, len(0)}, Edge{0, 5, len(1)}, Edge{1, 4, len(2)}, Edge{1, 6, len(3)},
        Edge{2, 4, len(4)}, Edge{2, 5, len(5)}, Edge{3, 5, len(6)},
    };
    return MetricGraph(7, std::move(edges));
}

namespace {

[[noreturn]] void parse_fail(const std::string& origin, int line_no, const std::string& what) {
    throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

MetricGraph parse_graph_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<int> vertex_ids;
    struct RawEdge {
        int id, from, to;
        double length;
        int line_no;
    };
    std::vector<RawEdge> raw_edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string keyword;
        if (!(ls >> keyword)) continue;
        if (keyword == "vertex") {
            int id;
            if (!(ls >> id)) parse_fail(origin, line_no, "expected: vertex <id>");
            vertex_ids.push_back(id);
        } else if (keyword == "edge") {
            RawEdge e{};
            if (!(ls >> e.id >> e.from >> e.to >> e.length))
                parse_fail(origin, line_no, "expected: edge <id> <v_from> <v_to> <length>");
            e.line_no = line_no;
            raw_edges.push_back(e);
        } else {
            parse_fail(origin, line_no, "unknown keyword '" + keyword + "'");
        }
        std::string extra;
        if (ls >> extra) parse_fail(origin, line_no, "trailing tokens after '" + keyword + "' entry");
    }
    if (vertex_ids.empty()) throw std::runtime_error(origin + ": no vertices declared");
    std::sort(vertex_ids.begin(), vertex_ids.end());
    for (int i = 0; i < static_cast<int>(vertex_ids.size()); ++i)
        if (vertex_ids[i] != i)
            throw std::runtime_error(origin + ": vertex ids must be consecutive from 0");
    std::sort(raw_edges.begin(), raw_edges.end(),
              [](const RawEdge& a, const RawEdge& b) { return a.id < b.id; });
    std::vector<Edge> edges;
    for (int i = 0; i < static_cast<int>(raw_edges.size()); ++i) {
        const RawEdge& e = raw_edges[i];
        if (e.id != i) parse_fail(origin, e.line_no, "edge ids must be consecutive from 0");
        if (e.from < 0 || e.from >= static_cast<int>(vertex_ids.size()) || e.to < 0 ||
            e.to >= static_cast<int>(vertex_ids.size()))
            parse_fail(origin, e.line_no, "edge endpoint references undeclared vertex");
        if (!(e.length > 0.0))
            parse_fail(origin, e.line_no, "edge length must be positive");
        edges.push_back(Edge{e.from, e.to, e.length});
    }
    try {
        return MetricGraph(static_cast<int>(vertex_ids.size()), std::move(edges));
    } catch (const std::invalid_argument& err) {
        throw std::runtime_error(origin + ": " + err.what());
    }
}

MetricGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open graph file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph_text(buf.str(), path);
}

}  // namespace qgraph
