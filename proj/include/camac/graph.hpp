#ifndef CAMAC_GRAPH_HPP
#define CAMAC_GRAPH_HPP

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "camac/errors.hpp"
#include "camac/numerics.hpp"
#include "camac/rng.hpp"
#include "camac/state.hpp"

namespace camac {

enum class NodeType { ev, charger, transformer, op };

enum class Relation : int { plugged_into = 0, feeds = 1, operated_by = 2, near = 3 };
constexpr int kRelationCount = 4;

inline const char* relation_name(Relation r) {
    switch (r) {
        case Relation::plugged_into: return "plugged_into";
        case Relation::feeds: return "feeds";
        case Relation::operated_by: return "operated_by";
        case Relation::near: return "near";
    }
    return "?";
}

// Heterogeneous graph over typed nodes with typed relations. Edges are
// stored once as (relation, src, dst); message passing treats them as
// undirected so information flows both ways across layers.
struct HeteroGraph {
    struct Node {
        int id = 0;
        NodeType type = NodeType::ev;
        Vec features;
    };
    struct Edge {
        Relation relation;
        int src;
        int dst;
        bool operator==(const Edge& o) const {
            return relation == o.relation && src == o.src && dst == o.dst;
        }
    };

    std::vector<Node> nodes;
    std::vector<Edge> edges;

    void add_node(NodeType type, Vec features) {
        nodes.push_back(Node{static_cast<int>(nodes.size()), type, std::move(features)});
        adjacency_.emplace_back();
    }

    void add_edge(Relation r, int src, int dst) {
        if (src < 0 || src >= static_cast<int>(nodes.size()) || dst < 0 || dst >= static_cast<int>(nodes.size()))
            throw ArgumentError("add_edge: endpoint does not exist");
        for (const Edge& e : edges)
            if (e == Edge{r, src, dst}) throw InvariantError("duplicate (relation, src, dst) edge");
        edges.push_back(Edge{r, src, dst});
        adjacency_[src][static_cast<int>(r)].push_back(dst);
        adjacency_[dst][static_cast<int>(r)].push_back(src);
    }

    int node_count() const { return static_cast<int>(nodes.size()); }

    const std::vector<int>& neighbors(int v, Relation r) const {
        check_node(v);
        return adjacency_[v][static_cast<int>(r)];
    }

    std::vector<int> neighbors(int v) const {
        check_node(v);
        std::vector<int> all;
        for (const auto& per_rel : adjacency_[v]) all.insert(all.end(), per_rel.begin(), per_rel.end());
        return all;
    }

    int edge_count(Relation r) const {
        int n = 0;
        for (const Edge& e : edges) n += (e.relation == r) ? 1 : 0;
        return n;
    }

private:
    void check_node(int v) const {
        if (v < 0 || v >= static_cast<int>(nodes.size())) throw ArgumentError("unknown node id");
    }
    std::vector<std::array<std::vector<int>, kRelationCount>> adjacency_;
};

using NodeEmbeddings = std::vector<Vec>;

// One GNN layer's parameters. W/b/W_edge drive the homogeneous message
// passing form; W_rel/W_self drive the heterogeneous extension. Activation
// is the rectifier throughout.
struct GnnLayerParams {
    Matrix W;       // d_h x d_h
    Vec b;          // d_h
    Matrix W_edge;  // d_h x d_h
    std::map<Relation, Matrix> W_rel;
    Matrix W_self;

    static GnnLayerParams init(int d_h, Rng& rng) {
        GnnLayerParams p;
        auto mat = [&](void) {
            Matrix m(d_h, d_h);
            const double bound = std::sqrt(6.0 / (2.0 * d_h));
            for (double& v : m.data) v = rng.uniform(-bound, bound);
            return m;
        };
        p.W = mat();
        p.W_edge = mat();
        p.W_self = mat();
        p.b = Vec(d_h, 0.0);
        for (int r = 0; r < kRelationCount; ++r) p.W_rel[static_cast<Relation>(r)] = mat();
        return p;
    }
};

struct GnnParams {
    std::vector<GnnLayerParams> layers;
    int d_h = 32;

    static GnnParams init(int d_h, int n_layers, Rng& rng) {
        GnnParams p;
        p.d_h = d_h;
        for (int l = 0; l < n_layers; ++l) p.layers.push_back(GnnLayerParams::init(d_h, rng));
        return p;
    }
};

// Mean of W_edge * h_u over all neighbors of `node` with relations merged.
// An empty neighborhood yields the zero vector, so isolated nodes fall back
// to the layer's bias/self terms.
inline Vec aggregate_neighbors(const HeteroGraph& graph, int node, const NodeEmbeddings& embeddings,
                               const Matrix& W_edge) {
    const std::vector<int> nbrs = graph.neighbors(node);
    Vec agg(W_edge.rows, 0.0);
    if (nbrs.empty()) return agg;
    for (int u : nbrs) axpy(agg, 1.0, matvec(W_edge, embeddings[u]));
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (double& v : agg) v *= inv;
    return agg;
}

// h_v' = relu(W * AGGREGATE(N(v)) + b) per node.
inline NodeEmbeddings gnn_layer(const HeteroGraph& graph, const NodeEmbeddings& embeddings,
                                const GnnLayerParams& params) {
    if (static_cast<int>(embeddings.size()) != graph.node_count())
        throw ShapeError("gnn_layer: embedding count != node count");
    for (const Vec& e : embeddings)
        if (static_cast<int>(e.size()) != params.W.cols) throw ShapeError("gnn_layer: embedding width mismatch");
    NodeEmbeddings out(embeddings.size());
    for (int v = 0; v < graph.node_count(); ++v) {
        Vec pre = matvec(params.W, aggregate_neighbors(graph, v, embeddings, params.W_edge));
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += params.b[i];
        out[v] = relu(pre);
    }
    return out;
}

// h_v' = relu(sum_r sum_{u in N_r(v)} (1/c_{v,r}) W_r h_u + W_self h_v)
// with c_{v,r} = |N_r(v)|.
inline Vec hetero_pre_activation(const HeteroGraph& graph, int v, const NodeEmbeddings& embeddings,
                                 const GnnLayerParams& params) {
    Vec pre = matvec(params.W_self, embeddings[v]);
    for (int ri = 0; ri < kRelationCount; ++ri) {
        const Relation r = static_cast<Relation>(ri);
        const std::vector<int>& nbrs = graph.neighbors(v, r);
        if (nbrs.empty()) continue;
        auto it = params.W_rel.find(r);
        if (it == params.W_rel.end())
            throw ConfigError(std::string("missing relation weight for ") + relation_name(r));
        Vec sum(pre.size(), 0.0);
        for (int u : nbrs) axpy(sum, 1.0, matvec(it->second, embeddings[u]));
        axpy(pre, 1.0 / static_cast<double>(nbrs.size()), sum);
    }
    return pre;
}

inline NodeEmbeddings hetero_gnn_layer(const HeteroGraph& graph, const NodeEmbeddings& embeddings,
                                       const GnnLayerParams& params) {
    if (static_cast<int>(embeddings.size()) != graph.node_count())
        throw ShapeError("hetero_gnn_layer: embedding count != node count");
    for (const Vec& e : embeddings)
        if (static_cast<int>(e.size()) != params.W_self.cols)
            throw ShapeError("hetero_gnn_layer: embedding width mismatch");
    NodeEmbeddings out(embeddings.size());
    for (int v = 0; v < graph.node_count(); ++v) out[v] = relu(hetero_pre_activation(graph, v, embeddings, params));
    return out;
}

// Forward pass of a hetero layer retaining what backward needs.
struct HeteroLayerCache {
    NodeEmbeddings input;
    NodeEmbeddings pre;  // pre-activation per node
};

inline NodeEmbeddings hetero_gnn_forward(const HeteroGraph& graph, const NodeEmbeddings& embeddings,
                                         const GnnLayerParams& params, HeteroLayerCache& cache) {
    cache.input = embeddings;
    cache.pre.resize(embeddings.size());
    NodeEmbeddings out(embeddings.size());
    for (int v = 0; v < graph.node_count(); ++v) {
        cache.pre[v] = hetero_pre_activation(graph, v, embeddings, params);
        out[v] = relu(cache.pre[v]);
    }
    return out;
}

struct GnnLayerGrads {
    std::map<Relation, Matrix> dW_rel;
    Matrix dW_self;

    static GnnLayerGrads zeros_like(const GnnLayerParams& p) {
        GnnLayerGrads g;
        g.dW_self = Matrix(p.W_self.rows, p.W_self.cols);
        for (const auto& [r, m] : p.W_rel) g.dW_rel[r] = Matrix(m.rows, m.cols);
        return g;
    }
};

// Accumulates parameter gradients and returns gradients w.r.t. the layer's
// input embeddings.
inline NodeEmbeddings hetero_gnn_backward(const HeteroGraph& graph, const GnnLayerParams& params,
                                          const HeteroLayerCache& cache, const NodeEmbeddings& upstream,
                                          GnnLayerGrads& grads) {
    const int n = graph.node_count();
    NodeEmbeddings dinput(n, Vec(params.W_self.cols, 0.0));
    for (int v = 0; v < n; ++v) {
        const Vec ev = relu_backward(cache.pre[v], upstream[v]);
        add_outer(grads.dW_self, ev, cache.input[v]);
        axpy(dinput[v], 1.0, matvec_transposed(params.W_self, ev));
        for (int ri = 0; ri < kRelationCount; ++ri) {
            const Relation r = static_cast<Relation>(ri);
            const std::vector<int>& nbrs = graph.neighbors(v, r);
            if (nbrs.empty()) continue;
            const Matrix& Wr = params.W_rel.at(r);
            Matrix& dWr = grads.dW_rel.at(r);
            const double inv = 1.0 / static_cast<double>(nbrs.size());
            const Vec back = matvec_transposed(Wr, ev);
            for (int u : nbrs) {
                add_outer(dWr, ev, cache.input[u], inv);
                axpy(dinput[u], inv, back);
            }
        }
    }
    return dinput;
}

// Builds the infrastructure graph from an observation plus static wiring:
// one node per EV / charger / transformer plus a single operator node,
// with plugged_into, feeds, operated_by and proximity edges.
inline HeteroGraph build_graph(const ContextState& state, const Topology& topo) {
    HeteroGraph g;
    const int E = state.n_evs;
    const int S = state.n_stations;
    if (static_cast<int>(topo.stations.size()) != S) throw ArgumentError("build_graph: topology/state mismatch");

    for (int i = 0; i < E; ++i) {
        Vec f(state.base.begin() + static_cast<std::size_t>(i) * ContextState::kEvFeatures,
              state.base.begin() + static_cast<std::size_t>(i + 1) * ContextState::kEvFeatures);
        g.add_node(NodeType::ev, std::move(f));
    }
    double free_sum = 0.0;
    for (int s = 0; s < S; ++s) {
        const auto& st = topo.stations[s];
        free_sum += state.station_free_frac(s);
        Vec f{state.station_free_frac(s), state.station_queue_norm(s), state.station_price_norm(s),
              st.power_kw / 350.0, st.x_km / topo.area_km, st.y_km / topo.area_km};
        g.add_node(NodeType::charger, std::move(f));
    }
    for (const auto& tr : topo.transformers) {
        Vec f{tr.capacity_kw / 1000.0, state.grid[0], state.grid[1], state.grid[2]};
        g.add_node(NodeType::transformer, std::move(f));
    }
    const double renew_share = state.weather.size() == 7 ? state.weather[6] : 0.0;
    const double tariff = state.temporal.empty() ? 0.0 : state.temporal[0];
    g.add_node(NodeType::op, Vec{renew_share, tariff, S > 0 ? free_sum / S : 0.0});

    const int charger0 = E;
    const int transformer0 = E + S;
    const int operator_id = E + S + static_cast<int>(topo.transformers.size());

    for (int i = 0; i < E; ++i) {
        const int sid = state.ev_plugged_station(i);
        if (sid >= 0) g.add_edge(Relation::plugged_into, i, charger0 + sid);
    }
    for (int s = 0; s < S; ++s) {
        g.add_edge(Relation::feeds, charger0 + s, transformer0 + topo.stations[s].transformer_id);
        g.add_edge(Relation::operated_by, charger0 + s, operator_id);
    }
    for (int i = 0; i < E; ++i) {
        const double ex = state.ev_x(i) * topo.area_km;
        const double ey = state.ev_y(i) * topo.area_km;
        for (int s = 0; s < S; ++s) {
            const double dx = ex - topo.stations[s].x_km;
            const double dy = ey - topo.stations[s].y_km;
            if (std::sqrt(dx * dx + dy * dy) <= topo.near_radius_km && topo.near_radius_km > 0.0)
                g.add_edge(Relation::near, i, charger0 + s);
        }
    }
    return g;
}

// Raw node features zero-padded (or rejected if too wide) to the GNN width.
inline NodeEmbeddings lift_node_features(const HeteroGraph& graph, int d_h) {
    NodeEmbeddings out(graph.nodes.size());
    for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
        const Vec& f = graph.nodes[v].features;
        if (static_cast<int>(f.size()) > d_h)
            throw ConfigError("node feature width exceeds GNN hidden width");
        out[v] = f;
        out[v].resize(d_h, 0.0);
    }
    return out;
}

inline Vec mean_pool(const NodeEmbeddings& embeddings) {
    if (embeddings.empty()) throw ShapeError("mean_pool: no embeddings");
    Vec out(embeddings[0].size(), 0.0);
    for (const Vec& e : embeddings) axpy(out, 1.0, e);
    const double inv = 1.0 / static_cast<double>(embeddings.size());
    for (double& v : out) v *= inv;
    return out;
}

// Edge-list dump, one `relation,src,dst` line per edge.
inline std::string dump_edges(const HeteroGraph& g) {
    std::string out;
    for (const auto& e : g.edges) {
        out += relation_name(e.relation);
        out += ',';
        out += std::to_string(e.src);
        out += ',';
        out += std::to_string(e.dst);
        out += '\n';
    }
    return out;
}

}  // namespace camac

#endif
