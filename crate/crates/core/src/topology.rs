//! Benchmark topology generators and the weight-proportional graph builder.
//!
//! The builder pipeline scales a weight vector into an integer degree
//! sequence, realizes it greedily (Havel–Hakimi), repairs connectivity with
//! degree-preserving edge swaps, and falls back to a ring-based construction
//! when no exact connected realization is found within the trial budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DegreeSequence, Graph};
use crate::rng::SeededRng;
use crate::weights::WeightVector;

/// Topology family with its family-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Ring,
    Grid {
        rows: usize,
        cols: usize,
        periodic: bool,
    },
    StaticExponential,
    ErdosRenyi {
        p: f64,
    },
    RandomGeometric {
        radius: f64,
    },
    FromWeights {
        dbar: f64,
        trials: usize,
    },
}

/// A reproducible topology request: family, node count, and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub n: usize,
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
}

impl TopologySpec {
    /// Builds the graph. `weights` is required only for `FromWeights`.
    pub fn build(&self, weights: Option<&WeightVector>) -> Result<Graph> {
        match &self.family {
            Family::Ring => ring(self.n),
            Family::Grid {
                rows,
                cols,
                periodic,
            } => {
                if rows * cols != self.n {
                    return Err(Error::BadDimensions(format!(
                        "{rows}x{cols} grid does not cover n = {}",
                        self.n
                    )));
                }
                grid(*rows, *cols, *periodic)
            }
            Family::StaticExponential => static_exponential(self.n),
            Family::ErdosRenyi { p } => erdos_renyi(self.n, *p, self.seed),
            Family::RandomGeometric { radius } => random_geometric(self.n, *radius, self.seed),
            Family::FromWeights { dbar, trials } => {
                let w = weights.ok_or_else(|| {
                    Error::BadRange("from-weights topology needs a weight vector".into())
                })?;
                if w.n() != self.n {
                    return Err(Error::DimensionMismatch {
                        left: w.n(),
                        right: self.n,
                    });
                }
                build_graph_from_weights(w, *dbar, *trials, self.seed)
            }
        }
    }
}

/// Cycle on `n ≥ 3` nodes; every degree is 2.
pub fn ring(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::TooFewNodes { n, required: 3 });
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// 2-d lattice; with `periodic` the boundary wraps (degenerate wraps on a
/// 2-wide torus collapse into single edges).
pub fn grid(rows: usize, cols: usize, periodic: bool) -> Result<Graph> {
    if rows < 2 || cols < 2 {
        return Err(Error::BadDimensions(format!(
            "grid needs rows, cols >= 2, got {rows}x{cols}"
        )));
    }
    let idx = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if r + 1 < rows {
                edges.push((idx(r, c), idx(r + 1, c)));
            } else if periodic {
                edges.push((idx(r, c), idx(0, c)));
            }
            if c + 1 < cols {
                edges.push((idx(r, c), idx(r, c + 1)));
            } else if periodic {
                edges.push((idx(r, c), idx(r, 0)));
            }
        }
    }
    Graph::from_edges(rows * cols, edges)
}

/// Each node links at offsets `±2^p (mod n)` for `p = 0 .. floor(log2(n/2))`.
pub fn static_exponential(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::TooFewNodes { n, required: 3 });
    }
    let max_p = (n as f64 / 2.0).log2().floor() as u32;
    let mut edges = Vec::new();
    for i in 0..n {
        for p in 0..=max_p {
            let offset = 1usize << p;
            edges.push((i, (i + offset) % n));
        }
    }
    Graph::from_edges(n, edges)
}

/// Each of the `n(n-1)/2` pairs is included independently with probability
/// `p`, scanning pairs in lexicographic order with one uniform per pair.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadProbability(p));
    }
    let mut rng = SeededRng::from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Drops `n` points uniformly on the unit square (two uniforms per point, in
/// node order) and connects pairs within Euclidean distance `radius`.
/// Connectivity is not guaranteed; callers should check `is_connected`.
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Result<Graph> {
    if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(Error::BadRadius(radius));
    }
    let mut rng = SeededRng::from_seed(seed);
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.next_f64(), rng.next_f64())).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            if (dx * dx + dy * dy).sqrt() <= radius {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Scales weights into an integer degree sequence with even total.
///
/// The total `S` is the nearest even integer to `n·dbar`; each degree is
/// `round(S/Σλ · λ_i)` (half away from zero) clipped to `[1, n-1]`; an odd
/// total is repaired by incrementing the lowest-indexed entry below `n-1`.
pub fn scale_to_degrees(weights: &WeightVector, dbar: f64) -> Result<DegreeSequence> {
    let n = weights.n();
    if !(dbar >= 1.0 && dbar <= (n - 1) as f64) {
        return Err(Error::InfeasibleAverageDegree { dbar, n });
    }
    let total = 2.0 * (n as f64 * dbar / 2.0).round();
    let scale = total / weights.values().iter().sum::<f64>();
    let mut degrees: Vec<usize> = weights
        .values()
        .iter()
        .map(|&w| ((scale * w).round() as i64).clamp(1, (n - 1) as i64) as usize)
        .collect();
    if degrees.iter().sum::<usize>() % 2 != 0 {
        match degrees.iter().position(|&d| d < n - 1) {
            Some(k) => degrees[k] += 1,
            None => return Err(Error::InfeasibleAverageDegree { dbar, n }),
        }
    }
    DegreeSequence::new(degrees)
}

/// Greedy degree-sequence realization.
///
/// Repeatedly takes the vertex with the largest residual degree `r` and
/// connects it to the `r` remaining vertices with the largest residuals that
/// it is not yet adjacent to (ties broken by lower node index). Fails exactly
/// when the sequence is not graphical.
pub fn havel_hakimi(d: &DegreeSequence) -> Result<Graph> {
    let n = d.n();
    let mut rem: Vec<(usize, usize)> = d.as_slice().iter().copied().zip(0..n).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let adjacent = |edges: &[(usize, usize)], a: usize, b: usize| {
        let key = if a < b { (a, b) } else { (b, a) };
        edges.contains(&key)
    };
    while rem.iter().any(|&(r, _)| r > 0) {
        rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let (r, u) = rem.remove(0);
        if r > rem.len() {
            return Err(Error::GraphicalityFailure);
        }
        let targets: Vec<usize> = (0..rem.len())
            .filter(|&k| !adjacent(&edges, u, rem[k].1))
            .take(r)
            .collect();
        if targets.len() < r {
            return Err(Error::GraphicalityFailure);
        }
        for k in targets {
            let (res, v) = rem[k];
            if res == 0 {
                return Err(Error::GraphicalityFailure);
            }
            edges.push(if u < v { (u, v) } else { (v, u) });
            rem[k].0 -= 1;
        }
    }
    Graph::from_edges(n, edges)
}

/// Merges components by degree-preserving edge swaps.
///
/// Each round removes one internal edge from each of the two largest
/// components that have edges and rewires the four endpoints across the
/// component boundary; a successful swap always reduces the component count.
/// May return a still-disconnected graph if the budget runs out or no swap
/// is available.
pub fn make_connected(g: &Graph, budget: usize, seed: u64) -> Graph {
    let mut rng = SeededRng::from_seed(seed);
    let mut current = g.clone();
    for _ in 0..budget {
        let comps = current.components();
        if comps.len() <= 1 {
            return current;
        }
        let internal_edges = |comp: &[usize]| -> Vec<(usize, usize)> {
            current
                .edges()
                .iter()
                .copied()
                .filter(|&(i, j)| comp.binary_search(&i).is_ok() && comp.binary_search(&j).is_ok())
                .collect()
        };
        let with_edges: Vec<&Vec<usize>> = comps
            .iter()
            .filter(|c| !internal_edges(c).is_empty())
            .collect();
        if with_edges.len() < 2 {
            return current; // isolated leftovers cannot be fixed by swaps
        }
        let edges_1 = internal_edges(with_edges[0]);
        let edges_2 = internal_edges(with_edges[1]);
        let (a, b) = edges_1[rng.index(edges_1.len())];
        let (c, d) = edges_2[rng.index(edges_2.len())];
        for (e1, e2) in [((a, c), (b, d)), ((a, d), (b, c))] {
            let valid = |&(x, y): &(usize, usize)| x != y && !current.has_edge(x, y);
            if valid(&e1) && valid(&e2) {
                let mut edges: Vec<(usize, usize)> = current
                    .edges()
                    .iter()
                    .copied()
                    .filter(|&e| e != (a, b) && e != (c, d))
                    .collect();
                edges.push(e1);
                edges.push(e2);
                current = Graph::from_edges(current.n(), edges).expect("swap keeps graph simple");
                break;
            }
        }
    }
    current
}

/// Ring-based fallback: starts from the cycle, then greedily joins the two
/// highest-residual non-adjacent vertices until no positive-residual pair
/// remains. Always connected; degrees only approximate the target.
pub fn fallback_connected(d: &DegreeSequence) -> Result<Graph> {
    let n = d.n();
    if n < 3 {
        return Err(Error::TooFewNodes { n, required: 3 });
    }
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let mut need: Vec<i64> = d.as_slice().iter().map(|&di| di as i64 - 2).collect();
    let has = |edges: &[(usize, usize)], a: usize, b: usize| {
        let key = if a < b { (a, b) } else { (b, a) };
        edges.contains(&key)
    };
    for _ in 0..n * (n - 1) / 2 {
        let mut order: Vec<usize> = (0..n).filter(|&i| need[i] > 0).collect();
        order.sort_by(|&a, &b| need[b].cmp(&need[a]).then(a.cmp(&b)));
        let mut added = false;
        for &u in &order {
            let v = order
                .iter()
                .copied()
                .filter(|&v| v != u && !has(&edges, u, v))
                .max_by(|&x, &y| need[x].cmp(&need[y]).then(y.cmp(&x)));
            if let Some(v) = v {
                edges.push(if u < v { (u, v) } else { (v, u) });
                need[u] -= 1;
                need[v] -= 1;
                added = true;
                break;
            }
        }
        if !added {
            break;
        }
    }
    Graph::from_edges(n, edges)
}

/// Full builder: scale the weights to degrees, then try up to `trials` rounds
/// of realization plus swap-repair, returning the first connected graph with
/// exact degrees; otherwise fall back to the ring-based construction.
pub fn build_graph_from_weights(
    weights: &WeightVector,
    dbar: f64,
    trials: usize,
    seed: u64,
) -> Result<Graph> {
    Ok(build_graph_from_weights_traced(weights, dbar, trials, seed)?.0)
}

/// Same as [`build_graph_from_weights`], also reporting whether the exact
/// degree sequence was realized (false means the fallback fired).
pub fn build_graph_from_weights_traced(
    weights: &WeightVector,
    dbar: f64,
    trials: usize,
    seed: u64,
) -> Result<(Graph, bool)> {
    let d = scale_to_degrees(weights, dbar)?;
    let mut rng = SeededRng::from_seed(seed);
    if let Ok(realized) = havel_hakimi(&d) {
        for _ in 0..trials.max(1) {
            let trial_seed = rng.next_u64();
            let candidate = make_connected(&realized, trials.max(1), trial_seed);
            if candidate.is_connected() && candidate.degrees() == d.as_slice() {
                return Ok((candidate, true));
            }
        }
    }
    Ok((fallback_connected(&d)?, false))
}
