//! Random graph time series: Erdős–Rényi nulls, kidney-egg alternatives and
//! the random dot product construction under deterministic latent vectors.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded with
//! `seed_from_u64(master_seed)` and switched to stream `stream_id` via
//! `set_stream`. Each replicate owns one stream, so results do not depend on
//! how replicates are scheduled across threads. Each unordered pair consumes
//! exactly one uniform `f64` per graph, visited as `u = 0..n`, `v = 0..u`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSeries};

/// Parameters of a kidney-egg change-point series.
///
/// The egg is the first `m` vertices. Graphs before `t_star` are `ER(n, p)`;
/// from `t_star` on, egg-internal pairs connect with probability `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaParams {
    pub n: usize,
    pub p: f64,
    pub m: usize,
    pub q: f64,
    pub t_star: usize,
    pub t_max: usize,
}

impl Default for KappaParams {
    fn default() -> Self {
        Self {
            n: 50,
            p: 0.01,
            m: 6,
            q: 0.3,
            t_star: 12,
            t_max: 12,
        }
    }
}

impl KappaParams {
    /// `t_star` may exceed `t_max`, which gives a pure null series.
    pub fn validate(&self) -> Result<()> {
        let prob = |x: f64| (0.0..=1.0).contains(&x);
        if !prob(self.p) || !prob(self.q) {
            return Err(Error::invalid(format!(
                "probabilities must lie in [0, 1] (p = {}, q = {})",
                self.p, self.q
            )));
        }
        if self.p > self.q {
            return Err(Error::invalid(format!(
                "egg probability q = {} is below kidney probability p = {}",
                self.q, self.p
            )));
        }
        if self.m > self.n {
            return Err(Error::invalid(format!(
                "egg size m = {} exceeds n = {}",
                self.m, self.n
            )));
        }
        if self.t_star == 0 || self.t_max == 0 {
            return Err(Error::invalid("time indices start at 1"));
        }
        Ok(())
    }

    pub fn with_q(self, q: f64) -> Self {
        Self { q, ..self }
    }

    fn in_egg(&self, v: usize) -> bool {
        v < self.m
    }
}

/// Sub-probability latent vectors for the null and the egg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentVectors {
    pub pi_bar_0: Vec<f64>,
    pub pi_bar_a: Vec<f64>,
}

impl LatentVectors {
    pub fn dim(&self) -> usize {
        self.pi_bar_0.len()
    }
}

/// Two-dimensional latent vectors with `<pi0, pi0> = <pi0, piA> = p` and
/// `<piA, piA> = q`: `pi0 = (sqrt p, 0)`, `piA = (sqrt p, sqrt(q - p))`.
pub fn make_latent(p: f64, q: f64) -> Result<LatentVectors> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!(
            "probabilities must lie in [0, 1] (p = {p}, q = {q})"
        )));
    }
    if p > q {
        return Err(Error::invalid(format!("p = {p} exceeds q = {q}")));
    }
    let a = p.sqrt();
    let b = (q - p).sqrt();
    if a + b > 1.0 + 1e-12 {
        return Err(Error::invalid(format!(
            "no two-dimensional sub-probability vector reaches q = {q} from p = {p}"
        )));
    }
    Ok(LatentVectors {
        pi_bar_0: vec![a, 0.0],
        pi_bar_a: vec![a, b],
    })
}

/// A reproducible random stream keyed by `(master_seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

fn sample_independent_edges(
    n: usize,
    rng: &mut SeededRng,
    mut prob: impl FnMut(usize, usize) -> f64,
) -> Graph {
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in 0..u {
            if rng.bernoulli(prob(u, v)) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    Graph::from_sorted_adjacency(adj)
}

/// Random dot product series with caller-supplied latent vectors.
///
/// `vectors(t)` returns one vector per vertex for 1-based time `t`; each pair
/// connects independently with probability equal to the dot product of its
/// endpoints' vectors.
pub fn sample_rdpg_with<F>(
    n: usize,
    t_max: usize,
    mut vectors: F,
    rng: &mut SeededRng,
) -> Result<GraphSeries>
where
    F: FnMut(usize) -> Vec<Vec<f64>>,
{
    let mut graphs = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let vp = vectors(t);
        if vp.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: vp.len(),
            });
        }
        let dot = |u: usize, v: usize| -> f64 { vp[u].iter().zip(&vp[v]).map(|(a, b)| a * b).sum() };
        graphs.push(sample_independent_edges(n, rng, dot));
    }
    GraphSeries::new(n, graphs)
}

/// Random dot product series under fixed latent vectors: every vertex uses
/// `pi_bar_0`, except egg vertices from `t_star` on, which use `pi_bar_a`.
pub fn sample_rdpg_series(
    params: &KappaParams,
    latent: &LatentVectors,
    rng: &mut SeededRng,
) -> Result<GraphSeries> {
    params.validate()?;
    if latent.pi_bar_a.len() != latent.dim() {
        return Err(Error::DimensionMismatch {
            expected: latent.dim(),
            actual: latent.pi_bar_a.len(),
        });
    }
    sample_rdpg_with(
        params.n,
        params.t_max,
        |t| {
            (0..params.n)
                .map(|v| {
                    if t >= params.t_star && params.in_egg(v) {
                        latent.pi_bar_a.clone()
                    } else {
                        latent.pi_bar_0.clone()
                    }
                })
                .collect()
        },
        rng,
    )
}

/// One kidney-egg graph: egg-internal pairs with probability `q`, all others
/// with probability `p`.
pub fn sample_kappa(params: &KappaParams, rng: &mut SeededRng) -> Graph {
    sample_independent_edges(params.n, rng, |u, v| {
        if params.in_egg(u) && params.in_egg(v) {
            params.q
        } else {
            params.p
        }
    })
}

pub fn sample_er(n: usize, p: f64, rng: &mut SeededRng) -> Graph {
    sample_independent_edges(n, rng, |_, _| p)
}

/// `ER(n, p)` before `t_star`, `kappa(n, p, m, q)` from `t_star` on, with
/// independent time steps.
pub fn sample_series(params: &KappaParams, rng: &mut SeededRng) -> Result<GraphSeries> {
    params.validate()?;
    let graphs = (1..=params.t_max)
        .map(|t| {
            if t < params.t_star {
                sample_er(params.n, params.p, rng)
            } else {
                sample_kappa(params, rng)
            }
        })
        .collect();
    GraphSeries::new(params.n, graphs)
}
