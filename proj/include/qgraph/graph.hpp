#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qgraph {

/// One edge of a metric graph.  The edge carries a coordinate x in
/// [0, length]; x = 0 sits at vertex `from`, x = length at vertex `to`.
/// Loops (from == to) are allowed.
struct Edge {
    int from = -1;
    int to = -1;
    double length = 0.0;
};

/// Which endpoint of an edge an incidence refers to.
enum class EdgeEnd { Zero, Ell };

/// One edge endpoint attached to a vertex.
struct Incidence {
    int edge = -1;
    EdgeEnd end = EdgeEnd::Zero;
};

/// A point on a metric graph: coordinate x along edge `edge`.
struct GraphPoint {
    int edge = 0;
    double x = 0.0;
};

/// Immutable compact metric graph: finitely many vertices joined by
/// edges of finite positive length.  Incidence lists are ordered by
/// (edge id, end) so that every traversal of the structure is
/// deterministic.
class MetricGraph {
  public:
    MetricGraph(int num_vertices, std::vector<Edge> edges);

    int num_vertices() const { return num_vertices_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_.at(e); }

    /// Number of edge endpoints meeting v (a loop counts twice).
    int degree(int v) const;
    const std::vector<Incidence>& incidences(int v) const;

    /// Vertex sitting at the given end of edge e.
    int endpoint(int e, EdgeEnd end) const;

    double total_length() const { return total_length_; }
    double min_edge_length() const { return min_edge_length_; }

    /// First Betti number |E| - |V| + #components.
    int betti_number() const;
    int num_components() const;

    /// Two-coloring of the vertices if one exists (loops make a graph
    /// non-bipartite; multi-edges do not).
    std::optional<std::pair<std::vector<int>, std::vector<int>>> bipartition() const;
    bool is_bipartite() const { return bipartition().has_value(); }

    /// Split edge p.edge at interior coordinate p.x by inserting a new
    /// degree-two vertex.  The old edge keeps its id and covers
    /// [0, p.x]; the complementary segment is appended as a new edge
    /// with id num_edges().  Returns the new graph and the id of the
    /// inserted vertex.
    std::pair<MetricGraph, int> with_dummy_vertex(GraphPoint p) const;

  private:
    int num_vertices_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> incidence_;
    double total_length_ = 0.0;
    double min_edge_length_ = 0.0;
};

/// Single edge of length ell between two vertices.
MetricGraph make_interval(double ell);

/// Star with `arms` edges joined at vertex 0; outer vertices 1..arms.
/// `arm_length` applies to every edge, or pass per-edge lengths.
MetricGraph make_star(int arms, double arm_length);
MetricGraph make_star(const std::vector<double>& arm_lengths);

/// Cycle on m >= 1 vertices (m = 1 is a single loop).  `lengths` has
/// either one entry (all edges equal) or m entries.
MetricGraph make_cycle(int m, const std::vector<double>& lengths);

/// Loop of length `loop_length` at vertex 0 plus a pendant edge of
/// length `tail_length` to vertex 1.
MetricGraph make_lasso(double loop_length, double tail_length);

/// Bipartite benchmark graph on 4 + 3 vertices with 7 edges and first
/// Betti number 1.  `lengths` has either one entry or 7 entries.
MetricGraph make_figure1(const std::vector<double>& lengths);

/// Parse the plain-text graph description format:
///   vertex <id>
///   edge <id> <v_from> <v_to> <length>
/// Edge ids must be consecutive starting at 0.  '#' starts a comment.
/// Throws std::runtime_error with a line-anchored message on bad input.
MetricGraph read_graph_file(const std::string& path);
MetricGraph parse_graph_text(const std::string& text, const std::string& origin);

}  // namespace qgraph
