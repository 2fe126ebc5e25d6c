use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::stream::{Stream, Update};

use super::{brute_force_triangles, edge_dim, Edge, TriangleError};

/// How the final graph is reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphMode {
    /// Binary churn: each final edge is toggled up to `churn` extra times and
    /// decoy edges come and go, keeping every prefix at max degree `d` and at
    /// most `m` edges.
    BoundedDegree { churn: u32 },
    /// Strict multigraph churn using at most `length` updates in total.
    BoundedLength { length: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub d: usize,
    pub triangles: u64,
    pub mode: GraphMode,
}

#[derive(Clone, Debug)]
pub struct GraphStream {
    pub n: usize,
    pub stream: Stream<i64>,
    pub edges: Vec<Edge>,
    /// Exact triangle count of the final graph.
    pub triangles: u64,
}

impl GraphStream {
    pub fn m(&self) -> u64 {
        self.edges.len() as u64
    }

    /// Number of distinct edges each vertex sees over the stream.
    pub fn stream_degrees(&self) -> Vec<u64> {
        let touched: HashSet<usize> = self.stream.iter().map(|u| u.index).collect();
        let mut deg = vec![0; self.n];
        for i in touched {
            let e = Edge::from_index(i);
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// Largest vertex degree over all prefixes, treating positive entries as edges.
    pub fn max_prefix_degree(&self) -> usize {
        let mut x = std::collections::HashMap::new();
        let mut deg = vec![0usize; self.n];
        let mut peak = 0;
        for u in &self.stream {
            let e = Edge::from_index(u.index);
            let v = x.entry(u.index).or_insert(0i64);
            let was = *v > 0;
            *v += u.delta;
            match (was, *v > 0) {
                (false, true) => {
                    deg[e.u] += 1;
                    deg[e.v] += 1;
                    peak = peak.max(deg[e.u]).max(deg[e.v]);
                }
                (true, false) => {
                    deg[e.u] -= 1;
                    deg[e.v] -= 1;
                }
                _ => {}
            }
        }
        peak
    }
}

/// A final graph with exactly `spec.triangles` triangles and max degree
/// `spec.d`: planted `K_4`s (when `d >= 3`) and triangles on shuffled
/// vertices, padded with triangle-free paths.
pub fn plant_graph<R: Rng + ?Sized>(spec: &GraphSpec, rng: &mut R) -> Result<Vec<Edge>, TriangleError> {
    let t = spec.triangles as usize;
    if spec.d < 2 && t > 0 {
        return Err(TriangleError::Infeasible("triangles need max degree 2".into()));
    }
    let (k4, k3) = if spec.d >= 3 { (t / 4, t % 4) } else { (0, t) };
    let used = 4 * k4 + 3 * k3;
    if used > spec.n {
        return Err(TriangleError::Infeasible(format!(
            "{t} triangles need {used} vertices, only {} available",
            spec.n
        )));
    }
    let mut order: Vec<usize> = (0..spec.n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    let mut next = 0;
    for size in std::iter::repeat_n(4, k4).chain(std::iter::repeat_n(3, k3)) {
        let block = &order[next..next + size];
        for i in 0..size {
            for j in 0..i {
                edges.push(Edge::new(block[i], block[j]));
            }
        }
        next += size;
    }
    if spec.d >= 2 {
        // Triangle-free padding: paths of 2..=6 vertices.
        while spec.n - next >= 2 {
            let len = rng.gen_range(2..=6).min(spec.n - next);
            for w in order[next..next + len].windows(2) {
                edges.push(Edge::new(w[0], w[1]));
            }
            next += len;
        }
    }
    edges.shuffle(rng);
    Ok(edges)
}

fn pick_decoys<R: Rng + ?Sized>(
    n: usize,
    edges: &[Edge],
    spare: Option<&mut Vec<usize>>,
    count: usize,
    rng: &mut R,
) -> Vec<Edge> {
    let taken: HashSet<Edge> = edges.iter().copied().collect();
    let mut chosen = HashSet::new();
    let mut out = Vec::new();
    let mut spare = spare;
    let mut candidates: Vec<usize> = match &spare {
        Some(s) => (0..n).filter(|&v| s[v] > 0).collect(),
        None => (0..n).collect(),
    };
    let mut attempts = 0;
    while out.len() < count && candidates.len() >= 2 && attempts < 20 * count + 100 {
        attempts += 1;
        let a = candidates[rng.gen_range(0..candidates.len())];
        let b = candidates[rng.gen_range(0..candidates.len())];
        if a == b {
            continue;
        }
        let e = Edge::new(a, b);
        if taken.contains(&e) || !chosen.insert(e) {
            continue;
        }
        out.push(e);
        if let Some(s) = spare.as_deref_mut() {
            s[a] -= 1;
            s[b] -= 1;
            candidates.retain(|&v| s[v] > 0);
        }
    }
    out
}

/// Interleaves per-edge update paths, keeping at most `limit` positive edges
/// at any time. Paths of edges that cannot start are dropped; they are
/// always decoys, since a final edge's pending insertion implies a present
/// decoy or a final edge awaiting deletion.
fn interleave<R: Rng + ?Sized>(paths: Vec<(Edge, Vec<i64>)>, limit: usize, rng: &mut R) -> Vec<Update<i64>> {
    let mut pos = vec![0usize; paths.len()];
    let mut value = vec![0i64; paths.len()];
    let mut ready_up: Vec<usize> = Vec::new();
    let mut ready_down: Vec<usize> = Vec::new();
    for (i, (_, p)) in paths.iter().enumerate() {
        if !p.is_empty() {
            ready_up.push(i);
        }
    }
    let mut present = 0usize;
    let mut out = Vec::new();
    loop {
        let total = if present < limit { ready_up.len() + ready_down.len() } else { ready_down.len() };
        if total == 0 {
            break;
        }
        let k = rng.gen_range(0..total);
        let i = if k < ready_down.len() {
            ready_down.swap_remove(k)
        } else {
            ready_up.swap_remove(k - ready_down.len())
        };
        let (e, path) = &paths[i];
        let delta = path[pos[i]];
        let was = value[i] > 0;
        value[i] += delta;
        match (was, value[i] > 0) {
            (false, true) => present += 1,
            (true, false) => present -= 1,
            _ => {}
        }
        out.push(Update::new(e.index(), delta));
        pos[i] += 1;
        if pos[i] < path.len() {
            // Only a step that turns the edge on can hit the limit.
            if value[i] == 0 && path[pos[i]] > 0 {
                ready_up.push(i);
            } else {
                ready_down.push(i);
            }
        }
    }
    out
}

/// Draws a final graph with exactly the planted triangle count and a stream
/// reaching it under the mode's constraint.
pub fn gen_graph_stream<R: Rng + ?Sized>(spec: &GraphSpec, rng: &mut R) -> Result<GraphStream, TriangleError> {
    let edges = plant_graph(spec, rng)?;
    let triangles = brute_force_triangles(&edges);
    if triangles != spec.triangles {
        return Err(TriangleError::Infeasible(format!(
            "planted {} triangles, found {triangles}",
            spec.triangles
        )));
    }
    churn_to(spec, edges, rng)
}

/// A stream under `spec.mode` whose final graph is `edges`.
pub fn churn_to<R: Rng + ?Sized>(spec: &GraphSpec, edges: Vec<Edge>, rng: &mut R) -> Result<GraphStream, TriangleError> {
    let triangles = brute_force_triangles(&edges);
    let m = edges.len();
    let mut deg = vec![0usize; spec.n];
    for e in &edges {
        if e.v >= spec.n {
            return Err(TriangleError::Infeasible(format!("edge {e:?} outside {} vertices", spec.n)));
        }
        deg[e.u] += 1;
        deg[e.v] += 1;
    }
    if deg.iter().any(|&k| k > spec.d) {
        return Err(TriangleError::Infeasible(format!("final graph exceeds degree {}", spec.d)));
    }
    let mut paths: Vec<(Edge, Vec<i64>)> = Vec::new();
    match spec.mode {
        GraphMode::BoundedDegree { churn } => {
            let mut spare = vec![spec.d; spec.n];
            for e in &edges {
                spare[e.u] -= 1;
                spare[e.v] -= 1;
            }
            for e in &edges {
                let extra = rng.gen_range(0..=churn);
                let mut p = Vec::new();
                for _ in 0..extra {
                    p.extend([1, -1]);
                }
                p.push(1);
                paths.push((*e, p));
            }
            for e in pick_decoys(spec.n, &edges, Some(&mut spare), m / 2, rng) {
                paths.push((e, vec![1, -1]));
            }
        }
        GraphMode::BoundedLength { length } => {
            if (length as usize) < m {
                return Err(TriangleError::Infeasible(format!("length {length} below edge count {m}")));
            }
            let pairs = (length as usize - m) / 2;
            let decoys = pick_decoys(spec.n, &edges, None, pairs / 2, rng);
            let mut extra = vec![0usize; m];
            for _ in 0..pairs - decoys.len() {
                extra[rng.gen_range(0..m.max(1))] += 1;
            }
            for (e, k) in edges.iter().zip(extra) {
                // Random walk from 1 back to 1 with k steps each way, never
                // below zero; counts above 1 make parallel edges.
                let mut p = vec![1];
                let (mut v, mut ups, mut downs) = (1i64, k, k);
                while ups + downs > 0 {
                    let up = v == 0 || (ups > 0 && rng.gen_range(0..ups + downs) < ups);
                    if up {
                        ups -= 1;
                        v += 1;
                        p.push(1);
                    } else {
                        downs -= 1;
                        v -= 1;
                        p.push(-1);
                    }
                }
                paths.push((*e, p));
            }
            for e in decoys {
                paths.push((e, vec![1, -1]));
            }
        }
    }
    let limit = match spec.mode {
        GraphMode::BoundedDegree { .. } => m,
        GraphMode::BoundedLength { .. } => usize::MAX,
    };
    let updates = interleave(paths, limit, rng);
    let mut fin = std::collections::HashMap::new();
    for u in &updates {
        *fin.entry(u.index).or_insert(0i64) += u.delta;
    }
    fin.retain(|_, v| *v != 0);
    assert!(
        fin.len() == m && edges.iter().all(|e| fin.get(&e.index()) == Some(&1)),
        "stream does not reach the planted graph"
    );
    let stream = Stream::new(edge_dim(spec.n), updates).expect("indices below dim");
    Ok(GraphStream {
        n: spec.n,
        stream,
        edges,
        triangles,
    })
}
