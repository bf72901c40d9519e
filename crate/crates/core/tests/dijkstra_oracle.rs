//! Shortest-path machinery against a brute-force path-enumeration oracle
//! on random small graphs, including loops and multi-edges, with both
//! arclength weights and tunneling weights.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use graphscape::agmon::agmon_weight;
use graphscape::graph::{EdgeId, GraphBuilder, GraphPoint, MetricGraph, VertexId};
use graphscape::metric::{shortest_path, DistanceField, EdgeWeight, UnitWeight};
use graphscape::potential::{EdgePotential, PotentialField};

fn random_graph(rng: &mut ChaCha8Rng) -> (MetricGraph, PotentialField) {
    let nv = rng.gen_range(2..=5usize);
    let extra = rng.gen_range(0..=(8 - (nv - 1)).min(4));
    let mut b = GraphBuilder::new();
    let vs: Vec<VertexId> = (0..nv).map(|i| b.add_vertex(&format!("v{i}"))).collect();
    let mut lengths = Vec::new();
    // random spanning tree keeps it connected
    for i in 1..nv {
        let parent = rng.gen_range(0..i);
        let len = rng.gen_range(0.5..3.0);
        b.add_edge(vs[parent], vs[i], len);
        lengths.push(len);
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..nv);
        let v = rng.gen_range(0..nv); // loops and multi-edges allowed
        let len = rng.gen_range(0.5..3.0);
        b.add_edge(vs[u], vs[v], len);
        lengths.push(len);
    }
    let g = b.build().unwrap();
    let pots = (0..g.n_edges())
        .map(|_| {
            if rng.gen_bool(0.5) {
                EdgePotential::Constant(rng.gen_range(0.0..4.0))
            } else {
                let amp = rng.gen_range(0.0..2.0);
                EdgePotential::Cosine {
                    a: rng.gen_range(amp..amp + 3.0),
                    b: amp,
                    omega: rng.gen_range(0.5..3.0),
                    phi: rng.gen_range(0.0..6.28),
                }
            }
        })
        .collect();
    let field = PotentialField::new(&g, pots).unwrap();
    (g, field)
}

/// Minimal weight over simple vertex paths by exhaustive DFS. Loop edges
/// never appear on a minimal path (weights are nonnegative), so they are
/// skipped.
fn enumerate_min<W: EdgeWeight>(g: &MetricGraph, w: &W, from: VertexId, to: VertexId) -> f64 {
    fn dfs<W: EdgeWeight>(
        g: &MetricGraph,
        w: &W,
        cur: VertexId,
        to: VertexId,
        visited: &mut Vec<bool>,
        acc: f64,
        best: &mut f64,
    ) {
        if cur == to {
            *best = best.min(acc);
            return;
        }
        for &(eid, _) in g.incident(cur) {
            let other = g.edge(eid).other_end(cur);
            if other == cur || visited[other.0] {
                continue;
            }
            visited[other.0] = true;
            dfs(g, w, other, to, visited, acc + w.total(eid), best);
            visited[other.0] = false;
        }
    }
    let mut visited = vec![false; g.n_vertices()];
    visited[from.0] = true;
    let mut best = if from == to { 0.0 } else { f64::INFINITY };
    if from != to {
        dfs(g, w, from, to, &mut visited, 0.0, &mut best);
    }
    best
}

fn vertex_point(g: &MetricGraph, v: VertexId) -> GraphPoint {
    let &(eid, end) = &g.incident(v)[0];
    GraphPoint::new(eid, g.edge(eid).coord_at(end))
}

#[test]
fn agmon_distance_matches_enumeration_on_20_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..20 {
        let (g, pot) = random_graph(&mut rng);
        let energy = rng.gen_range(0.0..3.0);
        let weight = agmon_weight(&g, &pot, energy);
        for _ in 0..4 {
            let a = VertexId(rng.gen_range(0..g.n_vertices()));
            let b = VertexId(rng.gen_range(0..g.n_vertices()));
            let oracle = enumerate_min(&g, &weight, a, b);
            let (dij, path) =
                shortest_path(&g, &weight, &[vertex_point(&g, a)], vertex_point(&g, b)).unwrap();
            assert!(
                (dij - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()),
                "case {case}: dijkstra {dij} vs enumeration {oracle}"
            );
            // path integral equals the reported distance
            let along: f64 = path
                .segments
                .iter()
                .map(|seg| weight.partial(seg.edge, seg.enter, seg.exit))
                .sum();
            assert!((along - dij).abs() <= 1e-9 * (1.0 + dij.abs()));
            assert!(path.is_consistent(&g));
        }
    }
}

#[test]
fn arclength_distance_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (g, _) = random_graph(&mut rng);
        let w = UnitWeight::new(&g);
        for _ in 0..4 {
            let a = VertexId(rng.gen_range(0..g.n_vertices()));
            let b = VertexId(rng.gen_range(0..g.n_vertices()));
            let oracle = enumerate_min(&g, &w, a, b);
            let (dij, _) =
                shortest_path(&g, &w, &[vertex_point(&g, a)], vertex_point(&g, b)).unwrap();
            assert!((dij - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()));
        }
    }
}

#[test]
fn distance_is_a_pseudometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..12 {
        let (g, _) = random_graph(&mut rng);
        let w = UnitWeight::new(&g);
        let random_point = |rng: &mut ChaCha8Rng| {
            let e = EdgeId(rng.gen_range(0..g.n_edges()));
            let s = rng.gen_range(0.0..g.edge(e).length);
            GraphPoint::new(e, s)
        };
        let a = random_point(&mut rng);
        let b = random_point(&mut rng);
        let c = random_point(&mut rng);
        let d = |x: GraphPoint, y: GraphPoint| {
            DistanceField::new(&g, UnitWeight::new(&g), &[x]).eval(&g, y)
        };
        // identity
        assert!(d(a, a).abs() < 1e-12);
        // symmetry
        assert!((d(a, b) - d(b, a)).abs() < 1e-9);
        // triangle inequality
        assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        let _ = w;
    }
}

#[test]
fn midedge_sources_split_edges_exactly() {
    // hand-checkable: triangle with a chord, source mid-edge
    let mut b = GraphBuilder::new();
    let u = b.add_vertex("u");
    let v = b.add_vertex("v");
    let w = b.add_vertex("w");
    let e_uv = b.add_edge(u, v, 2.0);
    let _e_vw = b.add_edge(v, w, 1.0);
    let e_uw = b.add_edge(u, w, 1.5);
    let g = b.build().unwrap();
    let unit = UnitWeight::new(&g);
    // from the midpoint of uv to w: via v costs 1 + 1 = 2;
    // via u costs 1 + 1.5 = 2.5
    let (d, path) = shortest_path(
        &g,
        &unit,
        &[GraphPoint::new(e_uv, 1.0)],
        GraphPoint::new(e_uw, 1.5),
    )
    .unwrap();
    assert!((d - 2.0).abs() < 1e-12);
    assert_eq!(path.segments.len(), 2);
}
