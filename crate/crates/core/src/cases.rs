//! Built-in model problems with closed-form reference data where it
//! exists: secular-equation roots and explicitly constructed
//! eigenfunctions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphBuilder, MetricGraph};
use crate::ode;
use crate::potential::{EdgePotential, PotentialField};
use crate::roots::brent;
use crate::spectral::{assemble, Eigenpair};

/// A built case study: graph, potential, and whatever closed-form
/// reference data the model admits.
#[derive(Debug, Clone)]
pub struct CaseStudyData {
    pub name: String,
    pub graph: MetricGraph,
    pub potential: PotentialField,
    /// Closed-form reference eigenvalues (secular roots or exact spectra).
    pub reference_eigenvalues: Vec<f64>,
    /// Free-form provenance notes (shifts applied, derived constants).
    pub notes: Vec<(String, String)>,
}

impl CaseStudyData {
    fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }
}

/// Dispatch by name with `key=value` parameters. Known names:
/// `circle-free`, `flower`, `lasso-truncated`, `sine-circle`,
/// `square-well-star` (n, m), `mathieu-circle` (q), `tetrahedron` (q, e).
pub fn build_case_study(name: &str, params: &BTreeMap<String, f64>) -> Result<CaseStudyData> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name {
        "circle-free" => circle_free(get("length", 2.0 * std::f64::consts::PI)),
        "flower" => flower(
            get("k", 1.0),
            get("circles", 2.0) as usize,
            get("connector", 1.0),
        ),
        "lasso-truncated" => lasso_truncated(
            get("stem", 0.1),
            get("circle", 0.2),
            get("barrier", 1.02),
            get("truncation", 25.0),
        ),
        "sine-circle" => sine_circle(),
        "square-well-star" => square_well_star(get("n", 1.0) as usize, get("m", 25.0), get("truncation", 8.0)),
        "mathieu-circle" => mathieu_circle(get("q", 10.0)),
        "tetrahedron" => tetrahedron(get("q", 10.0), get("e", 72.0)),
        _ => Err(Error::BadParameters {
            name: name.to_string(),
            reason: "unknown case study".to_string(),
        }),
    }
}

/// Free circle, built as two arcs so every eigenfunction restriction
/// lives on a genuine edge. Spectrum: 0 and (2 pi n / L)^2 twice each.
pub fn circle_free(length: f64) -> Result<CaseStudyData> {
    if length <= 0.0 {
        return Err(Error::BadParameters {
            name: "circle-free".into(),
            reason: "length must be positive".into(),
        });
    }
    let mut b = GraphBuilder::new();
    let a = b.add_vertex("a");
    let c = b.add_vertex("b");
    b.add_edge_labeled(a, c, length / 2.0, "arc0");
    b.add_edge_labeled(c, a, length / 2.0, "arc1");
    let graph = b.build()?;
    let potential = PotentialField::zero(&graph);
    let mut reference = vec![0.0];
    for n in 1..=8 {
        let e = (2.0 * std::f64::consts::PI * n as f64 / length).powi(2);
        reference.push(e);
        reference.push(e);
    }
    Ok(CaseStudyData {
        name: "circle-free".into(),
        graph,
        potential,
        reference_eigenvalues: reference,
        notes: vec![],
    })
}

/// Circles of length 2 pi / k joined in a chain by connector edges at the
/// nodal points of sin(k x). Each circle is two arcs of length pi / k.
/// V = 0; E = k^2 admits eigenfunctions with arbitrary per-circle
/// amplitudes, vanishing on the connectors.
pub fn flower(k: f64, circles: usize, connector: f64) -> Result<CaseStudyData> {
    if k <= 0.0 || circles < 1 || connector <= 0.0 {
        return Err(Error::BadParameters {
            name: "flower".into(),
            reason: "need k > 0, circles >= 1, connector > 0".into(),
        });
    }
    let arc = std::f64::consts::PI / k;
    let mut b = GraphBuilder::new();
    let mut prev_b = None;
    for j in 0..circles {
        let aj = b.add_vertex(&format!("a{j}"));
        let bj = b.add_vertex(&format!("b{j}"));
        b.add_edge_labeled(aj, bj, arc, &format!("c{j}arc0"));
        b.add_edge_labeled(bj, aj, arc, &format!("c{j}arc1"));
        if let Some(p) = prev_b {
            b.add_edge_labeled(p, aj, connector, &format!("link{j}"));
        }
        prev_b = Some(bj);
    }
    let graph = b.build()?;
    let potential = PotentialField::zero(&graph);
    Ok(CaseStudyData {
        name: "flower".into(),
        graph,
        potential,
        reference_eigenvalues: vec![k * k],
        notes: vec![("k".into(), format!("{k}"))],
    })
}

/// Explicit flower eigenfunction at E = k^2 with the given per-circle
/// amplitudes (normalized afterwards); zero on connectors.
pub fn flower_eigenpair(
    data: &CaseStudyData,
    k: f64,
    amplitudes: &[f64],
    nodes_per_edge: usize,
) -> Eigenpair {
    let g = &data.graph;
    let energy = k * k;
    let mut values = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let n = nodes_per_edge;
        let h = e.length / (n + 1) as f64;
        let vals: Vec<f64> = (0..n + 2)
            .map(|i| {
                let s = i as f64 * h;
                if let Some(stripped) = e.label.strip_prefix('c') {
                    let mut it = stripped.split("arc");
                    let j: usize = it.next().unwrap().parse().unwrap();
                    let which: usize = it.next().unwrap().parse().unwrap();
                    let sign = if which == 0 { 1.0 } else { -1.0 };
                    sign * amplitudes[j] * (k * s).sin()
                } else {
                    0.0
                }
            })
            .collect();
        values.push(vals);
    }
    // residual from the discrete operator at matching resolution
    let h_target = g.min_edge_length() / (nodes_per_edge + 1) as f64;
    let residual = constructed_residual(g, &data.potential, energy, h_target, |eid, s| {
        let e = g.edge(eid);
        if let Some(stripped) = e.label.strip_prefix('c') {
            let mut it = stripped.split("arc");
            let j: usize = it.next().unwrap().parse().unwrap();
            let which: usize = it.next().unwrap().parse().unwrap();
            let sign = if which == 0 { 1.0 } else { -1.0 };
            sign * amplitudes[j] * (k * s).sin()
        } else {
            0.0
        }
    });
    let mut pair = Eigenpair::from_samples(g, energy, values, residual, "constructed:flower");
    pair.provenance = format!("constructed:flower:amplitudes={amplitudes:?}");
    pair
}

/// Truncated lasso: a small circle attached to a stem with a long
/// constant barrier, tuned so the eigenfunction is constant on the circle
/// (the circle potential equals the eigenvalue). Almost all of the L2 mass
/// sits in the barrier.
pub fn lasso_truncated(stem: f64, circle: f64, barrier: f64, truncation: f64) -> Result<CaseStudyData> {
    if stem <= 0.0 || circle <= 0.0 || barrier <= 0.0 || truncation <= 0.0 {
        return Err(Error::BadParameters {
            name: "lasso-truncated".into(),
            reason: "all lengths and the barrier must be positive".into(),
        });
    }
    // secular equation for the Neumann-truncated barrier:
    // sqrt(E) tan(sqrt(E) a) = kappa tanh(kappa T), kappa = sqrt(M - E)
    let a = stem;
    let m = barrier;
    let t = truncation;
    let f = |e: f64| {
        let kappa = (m - e).max(0.0).sqrt();
        e.sqrt() * (e.sqrt() * a).tan() - kappa * (kappa * t).tanh()
    };
    let e_hi = m.min((std::f64::consts::PI / (2.0 * a)).powi(2)) - 1e-12;
    let root = brent(&f, 1e-12, e_hi, 1e-14);
    let mut b = GraphBuilder::new();
    let j = b.add_vertex("junction");
    let top = b.add_vertex("top");
    let far = b.add_vertex("far");
    let outer_end = b.add_vertex("outer-end");
    b.add_edge_labeled(j, top, circle / 2.0, "arc0");
    b.add_edge_labeled(top, j, circle / 2.0, "arc1");
    b.add_edge_labeled(j, far, stem, "stem");
    b.add_edge_labeled(far, outer_end, truncation, "outer");
    let graph = b.build()?;
    let potential = PotentialField::new(
        &graph,
        vec![
            EdgePotential::Constant(root),
            EdgePotential::Constant(root),
            EdgePotential::Constant(0.0),
            EdgePotential::Constant(barrier),
        ],
    )?;
    let mut data = CaseStudyData {
        name: "lasso-truncated".into(),
        graph,
        potential,
        reference_eigenvalues: vec![root],
        notes: vec![],
    };
    data.note("circle_potential", root);
    data.note("kappa", (m - root).sqrt());
    data.note("truncation", t);
    Ok(data)
}

/// Oscillatory circle of circumference pi: the original potential
/// sin(2x) is shifted up by 1 to stay nonnegative (eigenvalues shift by
/// the same amount). Vertices sit at a potential minimum and maximum.
pub fn sine_circle() -> Result<CaseStudyData> {
    let half = std::f64::consts::PI / 2.0;
    let mut b = GraphBuilder::new();
    let lo = b.add_vertex("min");
    let hi = b.add_vertex("max");
    b.add_edge_labeled(lo, hi, half, "arc0");
    b.add_edge_labeled(hi, lo, half, "arc1");
    let graph = b.build()?;
    // V(s) = 1 - cos 2s on arc0, 1 + cos 2s on arc1 (continuous around)
    let potential = PotentialField::new(
        &graph,
        vec![
            EdgePotential::Cosine {
                a: 1.0,
                b: -1.0,
                omega: 2.0,
                phi: 0.0,
            },
            EdgePotential::Cosine {
                a: 1.0,
                b: 1.0,
                omega: 2.0,
                phi: 0.0,
            },
        ],
    )?;
    let mut data = CaseStudyData {
        name: "sine-circle".into(),
        graph,
        potential,
        reference_eigenvalues: vec![],
        notes: vec![],
    };
    data.note("shift", "V = sin(2x) + 1, energies shifted by +1");
    data.note("coordinate", "x = s - pi/4 on arc0, x = s + pi/4 on arc1");
    Ok(data)
}

/// n parallel wells of length 2 (V = 0) between two junctions, with
/// constant barriers M on truncated outer stubs. Reference: the lowest
/// root of `tan(sqrt(E)) = (1/n) sqrt(M/E - 1)`, which lies in
/// (0, pi^2/4).
pub fn square_well_star(n: usize, m: f64, truncation: f64) -> Result<CaseStudyData> {
    if n < 1 || m <= 0.0 || truncation <= 0.0 {
        return Err(Error::BadParameters {
            name: "square-well-star".into(),
            reason: "need n >= 1, m > 0, truncation > 0".into(),
        });
    }
    let root = square_well_lowest_root(n, m);
    let mut b = GraphBuilder::new();
    let l = b.add_vertex("left");
    let r = b.add_vertex("right");
    let lo = b.add_vertex("left-out");
    let ro = b.add_vertex("right-out");
    let mut pots = Vec::new();
    for i in 0..n {
        b.add_edge_labeled(l, r, 2.0, &format!("well{i}"));
        pots.push(EdgePotential::Constant(0.0));
    }
    b.add_edge_labeled(l, lo, truncation, "outer-left");
    pots.push(EdgePotential::Constant(m));
    b.add_edge_labeled(r, ro, truncation, "outer-right");
    pots.push(EdgePotential::Constant(m));
    let graph = b.build()?;
    let potential = PotentialField::new(&graph, pots)?;
    let mut data = CaseStudyData {
        name: "square-well-star".into(),
        graph,
        potential,
        reference_eigenvalues: vec![root],
        notes: vec![],
    };
    data.note("n", n);
    data.note("barrier", m);
    data.note("secular", "tan(sqrt(E)) = (1/n) sqrt(M/E - 1)");
    Ok(data)
}

/// Lowest root of `tan(sqrt(E)) = (1/n) sqrt(M/E - 1)` in (0, pi^2/4),
/// found by Brent's method on a safe bracket.
pub fn square_well_lowest_root(n: usize, m: f64) -> f64 {
    let quarter_pi2 = (std::f64::consts::PI / 2.0).powi(2);
    let f = |e: f64| (e.sqrt()).tan() - (m / e - 1.0).max(0.0).sqrt() / n as f64;
    let hi = m.min(quarter_pi2) - 1e-12;
    brent(&f, 1e-12, hi, 1e-15)
}

/// Symmetric square-well eigenfunction on the star at the truncated
/// secular root: cos(sqrt(E)(s-1)) on the wells, matched cosh decay on the
/// outer stubs.
pub fn square_well_eigenpair(data: &CaseStudyData, nodes_per_unit: usize) -> Eigenpair {
    let g = &data.graph;
    let m: f64 = data
        .notes
        .iter()
        .find(|(k, _)| k == "barrier")
        .unwrap()
        .1
        .parse()
        .unwrap();
    // with the truncated Neumann end: tan(sqrt E) = kappa tanh(kappa T)/(n sqrt E)
    let nwells = g.n_edges() - 2;
    let t = g.edge(EdgeId(nwells)).length;
    let f = |e: f64| {
        let kappa = (m - e).max(0.0).sqrt();
        (e.sqrt()).tan() - kappa * (kappa * t).tanh() / (nwells as f64 * e.sqrt())
    };
    let hi = m.min((std::f64::consts::PI / 2.0).powi(2)) - 1e-12;
    let energy = brent(&f, 1e-12, hi, 1e-15);
    let kappa = (m - energy).sqrt();
    let amp_outer = (energy.sqrt()).cos() / (kappa * t).cosh();
    let sampler = move |eid: EdgeId, s: f64, label: &str| -> f64 {
        if label.starts_with("well") {
            (energy.sqrt() * (s - 1.0)).cos()
        } else {
            let _ = eid;
            amp_outer * (kappa * (t - s)).cosh()
        }
    };
    let mut values = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let n = (e.length * nodes_per_unit as f64).ceil() as usize;
        let h = e.length / (n + 1) as f64;
        let vals: Vec<f64> = (0..n + 2)
            .map(|i| sampler(e.id, i as f64 * h, &e.label))
            .collect();
        values.push(vals);
    }
    let gref = g.clone();
    let residual = constructed_residual(
        g,
        &data.potential,
        energy,
        1.0 / nodes_per_unit as f64,
        move |eid, s| {
            let label = gref.edge(eid).label.clone();
            sampler(eid, s, &label)
        },
    );
    Eigenpair::from_samples(g, energy, values, residual, "constructed:square-well")
}

/// Circle of length 2 pi with the shifted cosine potential
/// `2q (1 + cos 2x)`, split into two arcs with vertices at the potential
/// maxima x = 0 and x = pi.
pub fn mathieu_circle(q: f64) -> Result<CaseStudyData> {
    if q <= 0.0 {
        return Err(Error::BadParameters {
            name: "mathieu-circle".into(),
            reason: "need q > 0".into(),
        });
    }
    let pi = std::f64::consts::PI;
    let mut b = GraphBuilder::new();
    let v0 = b.add_vertex("x0");
    let v1 = b.add_vertex("xpi");
    b.add_edge_labeled(v0, v1, pi, "arc0");
    b.add_edge_labeled(v1, v0, pi, "arc1");
    let graph = b.build()?;
    let desc = EdgePotential::Cosine {
        a: 2.0 * q,
        b: 2.0 * q,
        omega: 2.0,
        phi: 0.0,
    };
    let potential = PotentialField::new(&graph, vec![desc.clone(), desc])?;
    let mut data = CaseStudyData {
        name: "mathieu-circle".into(),
        graph,
        potential,
        reference_eigenvalues: vec![],
        notes: vec![],
    };
    data.note("q", q);
    Ok(data)
}

/// Regular tetrahedron with edges of length 2 pi: the three edges at the
/// top vertex carry a constant barrier, the bottom triangle carries the
/// shifted cosine potential centered mid-edge. For a given (q, E) with an
/// even oscillatory solution whose log-derivative allows a hyperbolic
/// match, the barrier height is solved for so that E is an exact
/// eigenvalue; the symmetric eigenfunction is cosh on the top edges.
pub fn tetrahedron(q: f64, energy: f64) -> Result<CaseStudyData> {
    if q <= 0.0 || energy <= 0.0 {
        return Err(Error::BadParameters {
            name: "tetrahedron".into(),
            reason: "need q > 0 and e > 0".into(),
        });
    }
    let pi = std::f64::consts::PI;
    // even solution of -m'' + 2q(1+cos 2u) m = E m from the well center
    let vfun = move |u: f64| 2.0 * q * (1.0 + (2.0 * u).cos());
    let (m_pi, dm_pi) = ode::integrate_schrodinger(&vfun, energy, 0.0, pi, 1.0, 0.0, 200_000);
    let ratio = -2.0 * dm_pi / m_pi;
    if ratio <= 0.0 || !ratio.is_finite() {
        return Err(Error::BadParameters {
            name: "tetrahedron".into(),
            reason: format!(
                "no hyperbolic match at q={q}, e={energy}: log-derivative ratio {ratio:.6}"
            ),
        });
    }
    // kappa tanh(2 pi kappa) = ratio has a unique positive root
    let gk = |k: f64| k * (2.0 * pi * k).tanh() - ratio;
    let mut hi = 1.0;
    while gk(hi) < 0.0 {
        hi *= 2.0;
    }
    let kappa = brent(&gk, 1e-12, hi, 1e-14);
    let barrier = energy + kappa * kappa;

    let mut b = GraphBuilder::new();
    let top = b.add_vertex("top");
    let bs: Vec<_> = (0..3).map(|i| b.add_vertex(&format!("b{i}"))).collect();
    let mut pots = Vec::new();
    for (i, &bv) in bs.iter().enumerate() {
        b.add_edge_labeled(top, bv, 2.0 * pi, &format!("top{i}"));
        pots.push(EdgePotential::Constant(barrier));
    }
    let bottom_pairs = [(0, 1), (1, 2), (2, 0)];
    for (i, &(x, y)) in bottom_pairs.iter().enumerate() {
        b.add_edge_labeled(bs[x], bs[y], 2.0 * pi, &format!("bottom{i}"));
        pots.push(EdgePotential::Cosine {
            a: 2.0 * q,
            b: 2.0 * q,
            omega: 2.0,
            phi: 0.0,
        });
    }
    let graph = b.build()?;
    let potential = PotentialField::new(&graph, pots)?;
    let mut data = CaseStudyData {
        name: "tetrahedron".into(),
        graph,
        potential,
        reference_eigenvalues: vec![energy],
        notes: vec![],
    };
    data.note("q", q);
    data.note("energy", energy);
    data.note("barrier", barrier);
    data.note("kappa", kappa);
    data.note("match_ratio", ratio);
    Ok(data)
}

/// The symmetric tetrahedron eigenfunction for data built by
/// [`tetrahedron`]: even oscillatory profile on the bottom edges, matched
/// hyperbolic cosines on the top edges.
pub fn tetrahedron_eigenpair(data: &CaseStudyData, nodes_per_edge: usize) -> Eigenpair {
    let g = &data.graph;
    let pi = std::f64::consts::PI;
    let get = |key: &str| -> f64 {
        data.notes
            .iter()
            .find(|(k, _)| k == key)
            .unwrap()
            .1
            .parse()
            .unwrap()
    };
    let q = get("q");
    let energy = get("energy");
    let kappa = get("kappa");
    let vfun = move |u: f64| 2.0 * q * (1.0 + (2.0 * u).cos());
    // sample the even solution on [0, pi]
    let half = nodes_per_edge / 2 + 1;
    let msamples = ode::sample_schrodinger(&vfun, energy, 0.0, pi, 1.0, 0.0, half, 4096);
    let m_at = |u: f64| -> f64 {
        let ua = u.abs().min(pi);
        let t = ua / pi * half as f64;
        let i = (t.floor() as usize).min(half - 1);
        let frac = t - i as f64;
        msamples[i].0 * (1.0 - frac) + msamples[i + 1].0 * frac
    };
    let m_pi = msamples[half].0;
    // continuity at a bottom vertex: A cosh(2 pi kappa) = m(pi)
    let amp_top = m_pi / (2.0 * pi * kappa).cosh();
    let mut values = Vec::with_capacity(g.n_edges());
    for e in g.edges() {
        let n = nodes_per_edge;
        let h = e.length / (n + 1) as f64;
        let vals: Vec<f64> = (0..n + 2)
            .map(|i| {
                let s = i as f64 * h;
                if e.label.starts_with("top") {
                    amp_top * (kappa * s).cosh()
                } else {
                    m_at(s - pi)
                }
            })
            .collect();
        values.push(vals);
    }
    // residual on a matching discretization, with the ODE sampled exactly
    let gref = g.clone();
    let q2 = q;
    let e2 = energy;
    let k2 = kappa;
    let a2 = amp_top;
    let residual = constructed_residual(
        g,
        &data.potential,
        energy,
        2.0 * pi / (nodes_per_edge + 1) as f64,
        move |eid, s| {
            let label = &gref.edge(eid).label;
            if label.starts_with("top") {
                a2 * (k2 * s).cosh()
            } else {
                let vf = move |u: f64| 2.0 * q2 * (1.0 + (2.0 * u).cos());
                let u = (s - pi).abs();
                ode::integrate_schrodinger(&vf, e2, 0.0, u, 1.0, 0.0, (u * 2000.0) as usize + 16).0
            }
        },
    );
    Eigenpair::from_samples(g, energy, values, residual, "constructed:tetrahedron")
}

/// Torsion cover for the cosine circle: Gaussian pieces on the wells
/// (centers mid-arc) joined by flat caps of half-width `cap` at the two
/// barrier-top vertices.
pub fn mathieu_torsion_pieces(
    data: &CaseStudyData,
    cap: f64,
) -> Result<Vec<crate::torsion::TorsionPiece>> {
    use crate::torsion;
    let g = &data.graph;
    let pi = std::f64::consts::PI;
    assert!(cap > 0.0 && cap < pi / 2.0);
    let mut pieces = Vec::new();
    for e in g.edges() {
        let pot = data.potential.clone();
        let gr = g.clone();
        let eid = e.id;
        let vf = move |s: f64| pot.eval(&gr, eid, s);
        let m = torsion::fit_minorant(&vf, cap, pi - cap, pi / 2.0);
        pieces.push(torsion::gaussian_interval_piece(e.id, &m)?);
    }
    for v in g.vertices() {
        let v1 = g
            .incident(v)
            .iter()
            .map(|&(eid, end)| {
                let el = g.edge(eid);
                let (a, b) = match end {
                    crate::graph::EdgeEnd::Start => (0.0, cap),
                    crate::graph::EdgeEnd::End => (el.length - cap, el.length),
                };
                data.potential.min_on_edge(eid, a, b, el.length)
            })
            .fold(f64::INFINITY, f64::min);
        pieces.push(torsion::flat_star_piece(v, cap, v1)?);
    }
    Ok(pieces)
}

/// Square-well torsion landscape in the shifted gauge `V -> V + E`,
/// reproducing the explicit choice `b = sqrt(E)`, `v1 = 0` on each well.
/// Returns the landscape together with the shifted energy to use with the
/// maximum principle.
pub fn square_well_torsion(
    data: &CaseStudyData,
) -> Result<(crate::torsion::LandscapeFunction, f64)> {
    use crate::torsion;
    let g = &data.graph;
    let energy = data.reference_eigenvalues[0];
    let shifted = data.potential.shifted(energy);
    let b = energy.sqrt();
    let mut pieces = Vec::new();
    for e in g.edges() {
        if e.label.starts_with("well") {
            let m = torsion::QuadraticMinorant {
                lo: 0.0,
                hi: 2.0,
                y: 1.0,
                v1: 0.0,
                b,
            };
            pieces.push(torsion::gaussian_interval_piece(e.id, &m)?);
        }
    }
    let land = torsion::assemble_landscape(g, &shifted, &pieces)?;
    Ok((land, 2.0 * energy))
}

/// Discrete residual of a sampled closed-form eigenfunction on an
/// assembled grid of target step `h`.
pub fn constructed_residual(
    g: &MetricGraph,
    potential: &PotentialField,
    energy: f64,
    h: f64,
    sampler: impl Fn(EdgeId, f64) -> f64,
) -> f64 {
    let ham = match assemble(g, potential, h) {
        Ok(h) => h,
        Err(_) => return f64::NAN,
    };
    let mut x = vec![0.0; ham.ndof()];
    for v in g.vertices() {
        let &(eid, end) = &g.incident(v)[0];
        let e = g.edge(eid);
        x[v.0] = sampler(eid, e.coord_at(end));
    }
    for (e, grid) in g.edges().iter().zip(ham.grids().iter()) {
        for i in 0..grid.n {
            x[grid.dof0 + i] = sampler(e.id, (i + 1) as f64 * grid.h);
        }
    }
    ham.residual(&x, energy)
}
