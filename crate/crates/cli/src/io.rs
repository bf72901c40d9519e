//! CSV and manifest emission with atomic writes and deterministic
//! formatting, plus readers for the verify command.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use graphscape::{Eigenpair, Envelope, MetricGraph};

/// Shortest round-trip decimal formatting; reruns are byte-identical.
pub fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// FNV-1a 64-bit content hash for the manifest.
pub fn content_hash(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn eigenvalues_csv(pairs: &[Eigenpair], extrapolated: Option<&[f64]>) -> String {
    let mut out = String::from("index,energy,residual");
    if extrapolated.is_some() {
        out.push_str(",extrapolated");
    }
    out.push('\n');
    for (i, p) in pairs.iter().enumerate() {
        out.push_str(&format!("{i},{},{}", fmt(p.energy), fmt(p.residual)));
        if let Some(ex) = extrapolated {
            out.push_str(&format!(",{}", fmt(ex[i])));
        }
        out.push('\n');
    }
    out
}

pub fn eigenfunctions_csv(g: &MetricGraph, pairs: &[Eigenpair]) -> String {
    let mut out = String::from("index,edge,s,value,derivative\n");
    for (i, p) in pairs.iter().enumerate() {
        for e in g.edges() {
            let n = p.n_nodes(e.id);
            for j in 0..n {
                let s = p.node_coord(e.id, j);
                out.push_str(&format!(
                    "{i},{},{},{},{}\n",
                    e.label,
                    fmt(s),
                    fmt(p.values[e.id.0][j]),
                    fmt(p.derivs[e.id.0][j]),
                ));
            }
        }
    }
    out
}

pub fn envelope_csv(g: &MetricGraph, env: &Envelope, samples_per_edge: usize) -> String {
    let mut out = String::from("edge,s,value,method\n");
    for (eid, s, v) in env.sample(g, samples_per_edge) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            g.edge(eid).label,
            fmt(s),
            fmt(v),
            env.method.name()
        ));
    }
    out
}

/// Flat `key = value` manifest, keys emitted in insertion order.
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(tool: &str) -> Self {
        let mut m = Manifest {
            entries: Vec::new(),
        };
        m.push("tool", tool);
        m.push("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Eigenfunction archive read back from CSV: per index, per edge label,
/// the (s, value) samples in file order.
pub type EigenArchive = BTreeMap<usize, BTreeMap<String, Vec<(f64, f64)>>>;

pub fn read_eigen_csv(path: &Path) -> Result<EigenArchive, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if !header.starts_with("index,edge,s,value") {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut archive: EigenArchive = BTreeMap::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 4 {
            return Err(format!("line {}: expected >= 4 columns", ln + 2));
        }
        let idx: usize = cols[0].parse().map_err(|_| format!("line {}: bad index", ln + 2))?;
        let s: f64 = cols[2].parse().map_err(|_| format!("line {}: bad s", ln + 2))?;
        let v: f64 = cols[3].parse().map_err(|_| format!("line {}: bad value", ln + 2))?;
        archive
            .entry(idx)
            .or_default()
            .entry(cols[1].to_string())
            .or_default()
            .push((s, v));
    }
    Ok(archive)
}

/// Envelope samples read back from CSV: per edge label, (s, value, method).
pub type EnvelopeTable = BTreeMap<String, Vec<(f64, f64, String)>>;

pub fn read_envelope_csv(path: &Path) -> Result<EnvelopeTable, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if !header.starts_with("edge,s,value") {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut table: EnvelopeTable = BTreeMap::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            return Err(format!("line {}: expected >= 3 columns", ln + 2));
        }
        let s: f64 = cols[1].parse().map_err(|_| format!("line {}: bad s", ln + 2))?;
        let v: f64 = cols[2].parse().map_err(|_| format!("line {}: bad value", ln + 2))?;
        let method = cols.get(3).unwrap_or(&"").to_string();
        table.entry(cols[0].to_string()).or_default().push((s, v, method));
    }
    Ok(table)
}

/// Split sampled values into contiguous runs: a jump in the coordinate
/// spacing larger than 1.5x the median step marks a validity gap.
pub fn split_runs(samples: &[(f64, f64)]) -> Vec<Vec<(f64, f64)>> {
    if samples.len() < 2 {
        return vec![samples.to_vec()];
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut deltas: Vec<f64> = sorted.windows(2).map(|w| w[1].0 - w[0].0).collect();
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = deltas[deltas.len() / 2].max(1e-300);
    let mut runs = vec![vec![sorted[0]]];
    for w in sorted.windows(2) {
        if w[1].0 - w[0].0 > 1.5 * median {
            runs.push(Vec::new());
        }
        runs.last_mut().unwrap().push(w[1]);
    }
    runs
}

/// Interpolation across a gapped table: linear within runs, None in gaps.
pub fn interp_gapped(runs: &[Vec<(f64, f64)>], s: f64) -> Option<f64> {
    for run in runs {
        if let Some(v) = interp_sorted(run, s) {
            return Some(v);
        }
    }
    None
}

/// Linear interpolation in a sorted (s, value) table; None outside range.
pub fn interp_sorted(samples: &[(f64, f64)], s: f64) -> Option<f64> {
    if samples.is_empty() || s < samples[0].0 - 1e-12 || s > samples.last().unwrap().0 + 1e-12 {
        return None;
    }
    let i = samples.partition_point(|&(x, _)| x <= s);
    if i == 0 {
        return Some(samples[0].1);
    }
    if i >= samples.len() {
        return Some(samples.last().unwrap().1);
    }
    let (x0, y0) = samples[i - 1];
    let (x1, y1) = samples[i];
    if x1 - x0 <= 0.0 {
        return Some(y0);
    }
    let t = (s - x0) / (x1 - x0);
    Some(y0 * (1.0 - t) + y1 * t)
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
