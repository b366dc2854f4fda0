//! The nine graph invariants used as detection features.
//!
//! Every feature is oriented so that a large value is evidence of excessive
//! interconnection; average path length therefore enters negated.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSeries};

pub const NUM_FEATURES: usize = 9;

/// Feature identities in their fixed order. `id()` is the 1-based index used
/// for subsets on the command line and in result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Size,
    MaxDegree,
    MadEig,
    Scan1,
    Scan2,
    Scan3,
    Triangles,
    Clustering,
    NegApl,
}

impl Feature {
    pub const ALL: [Feature; NUM_FEATURES] = [
        Feature::Size,
        Feature::MaxDegree,
        Feature::MadEig,
        Feature::Scan1,
        Feature::Scan2,
        Feature::Scan3,
        Feature::Triangles,
        Feature::Clustering,
        Feature::NegApl,
    ];

    /// 0-based position in a [`FeatureVector`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// 1-based feature number.
    pub fn id(self) -> usize {
        self.index() + 1
    }

    pub fn from_id(id: usize) -> Option<Feature> {
        id.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Size => "size",
            Feature::MaxDegree => "maxdeg",
            Feature::MadEig => "mad",
            Feature::Scan1 => "scan1",
            Feature::Scan2 => "scan2",
            Feature::Scan3 => "scan3",
            Feature::Triangles => "triangles",
            Feature::Clustering => "cc",
            Feature::NegApl => "neg_apl",
        }
    }

    /// Features that have a natural per-vertex locality statistic.
    pub fn is_localized(self) -> bool {
        matches!(
            self,
            Feature::MaxDegree | Feature::Scan1 | Feature::Scan2 | Feature::Scan3
        )
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(id) = s.parse::<usize>() {
            return Feature::from_id(id)
                .ok_or_else(|| Error::invalid(format!("feature id {id} not in 1..=9")));
        }
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown feature {s:?}")))
    }
}

/// The nine feature values of one graph, in [`Feature::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }

    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }
}

impl Index<Feature> for FeatureVector {
    type Output = f64;

    fn index(&self, f: Feature) -> &f64 {
        &self.0[f.index()]
    }
}

/// Knobs for the invariant computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantConfig {
    /// Residual tolerance for the eigenvalue iteration.
    pub eig_tol: f64,
    pub eig_max_iter: usize,
    /// Use closed/open triplets (`ct / max(ot, 1)`) instead of transitivity.
    pub cc_literal: bool,
}

impl Default for InvariantConfig {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            eig_max_iter: 10_000,
            cc_literal: false,
        }
    }
}

pub fn size(g: &Graph) -> f64 {
    g.size() as f64
}

pub fn max_degree(g: &Graph) -> f64 {
    (0..g.order()).map(|v| g.degree(v)).max().unwrap_or(0) as f64
}

/// Largest adjacency eigenvalue, an upper bound on maximum average degree.
///
/// Runs power iteration on `A + I` separately on each connected component
/// (the shift keeps bipartite components from oscillating) and stops once the
/// Rayleigh residual `||Bx - rho x||` drops below `tol`, which bounds the
/// eigenvalue error by `tol`.
pub fn mad_eig(g: &Graph, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("eigenvalue tolerance must be positive"));
    }
    let mut best: f64 = 0.0;
    let mut local = vec![usize::MAX; g.order()];
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let lambda = component_eig(g, &comp, &local, tol, max_iter)?;
        best = best.max(lambda);
    }
    Ok(best)
}

fn component_eig(
    g: &Graph,
    comp: &[usize],
    local: &[usize],
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let k = comp.len();
    let mut x = vec![1.0 / (k as f64).sqrt(); k];
    let mut y = vec![0.0; k];
    let mut rho = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        for (i, &v) in comp.iter().enumerate() {
            y[i] = x[i] + g.neighbors(v).iter().map(|&w| x[local[w]]).sum::<f64>();
        }
        rho = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        residual = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - rho * a).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            return Ok(rho - 1.0);
        }
        let norm = y.iter().map(|b| b * b).sum::<f64>().sqrt();
        for (a, b) in x.iter_mut().zip(&y) {
            *a = b / norm;
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        estimate: rho - 1.0,
        residual,
    })
}

/// Per-vertex induced edge counts of the closed `k`-hop neighborhoods for
/// `k = 1..=max_k`; `out[k-1][v] = |E(Omega(N_k[v]))|`.
///
/// One depth-limited BFS per vertex: an edge whose endpoints sit at depths
/// `a` and `b` belongs to every region with `k >= max(a, b)`.
pub fn local_scan_counts(g: &Graph, max_k: usize) -> Vec<Vec<usize>> {
    let n = g.order();
    let mut out = vec![vec![0usize; n]; max_k];
    let mut depth = vec![usize::MAX; n];
    let mut visited = Vec::with_capacity(n);
    let mut tally = vec![0usize; max_k + 1];
    for v in 0..n {
        visited.clear();
        visited.push(v);
        depth[v] = 0;
        let mut head = 0;
        while head < visited.len() {
            let u = visited[head];
            head += 1;
            if depth[u] == max_k {
                continue;
            }
            for &w in g.neighbors(u) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    visited.push(w);
                }
            }
        }
        tally.iter_mut().for_each(|c| *c = 0);
        for &a in &visited {
            for &b in g.neighbors(a) {
                if a < b && depth[b] != usize::MAX {
                    tally[depth[a].max(depth[b])] += 1;
                }
            }
        }
        let mut running = tally[0];
        for k in 1..=max_k {
            running += tally[k];
            out[k - 1][v] = running;
        }
        for &a in &visited {
            depth[a] = usize::MAX;
        }
    }
    out
}

/// Scan statistic: the largest induced edge count over closed `k`-hop
/// neighborhoods.
pub fn scan(g: &Graph, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    local_scan_counts(g, k)[k - 1].iter().copied().max().unwrap_or(0) as f64
}

/// Number of triangles, by sorted-list intersection over edges `u < v`
/// counting common neighbors `w > v`.
pub fn triangle_count(g: &Graph) -> usize {
    let mut count = 0;
    for (u, v) in g.edges() {
        let a = g.neighbors(u);
        let b = g.neighbors(v);
        let (mut i, mut j) = (a.partition_point(|&w| w <= v), b.partition_point(|&w| w <= v));
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    count
}

pub fn triangles(g: &Graph) -> f64 {
    triangle_count(g) as f64
}

fn connected_triples(g: &Graph) -> usize {
    (0..g.order())
        .map(|v| {
            let d = g.degree(v);
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

/// Global clustering coefficient.
///
/// Default is transitivity `ct / (ct + ot)` with `ct = 3 * triangles` and
/// `ct + ot` the number of connected triples; 0 when there are no triples.
/// With `literal` set, returns `ct / max(ot, 1)`.
pub fn clustering_coeff(g: &Graph, literal: bool) -> f64 {
    let closed = 3 * triangle_count(g);
    let triples = connected_triples(g);
    if literal {
        let open = triples - closed;
        closed as f64 / open.max(1) as f64
    } else if triples == 0 {
        0.0
    } else {
        closed as f64 / triples as f64
    }
}

/// Negated average path length over ordered pairs.
///
/// Disconnected pairs are charged twice the largest finite distance; an
/// edgeless graph has no finite distance and yields 0.
pub fn neg_apl(g: &Graph) -> f64 {
    let n = g.order();
    if g.size() == 0 || n < 2 {
        return 0.0;
    }
    let mut finite_sum = 0usize;
    let mut unreachable = 0usize;
    let mut max_finite = 0usize;
    for s in 0..n {
        for (v, d) in g.bfs_distances(s).into_iter().enumerate() {
            if v == s {
                continue;
            }
            match d {
                Some(d) => {
                    finite_sum += d;
                    max_finite = max_finite.max(d);
                }
                None => unreachable += 1,
            }
        }
    }
    let total = finite_sum as f64 + (unreachable * 2 * max_finite) as f64;
    -total / (n * (n - 1)) as f64
}

/// All nine features of `g`, in [`Feature::ALL`] order.
pub fn all_features(g: &Graph, cfg: &InvariantConfig) -> Result<FeatureVector> {
    let scans = local_scan_counts(g, 3);
    let scan_max = |k: usize| scans[k - 1].iter().copied().max().unwrap_or(0) as f64;
    Ok(FeatureVector([
        size(g),
        max_degree(g),
        mad_eig(g, cfg.eig_tol, cfg.eig_max_iter)?,
        scan_max(1),
        scan_max(2),
        scan_max(3),
        triangles(g),
        clustering_coeff(g, cfg.cc_literal),
        neg_apl(g),
    ]))
}

/// Per-vertex locality statistics backing the localized features:
/// degree (max degree) and induced neighborhood counts (scan 1..3).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalStats {
    pub degree: Vec<f64>,
    pub scan: [Vec<f64>; 3],
}

impl LocalStats {
    pub fn of(g: &Graph) -> Self {
        let as_f = |v: Vec<usize>| v.into_iter().map(|x| x as f64).collect::<Vec<_>>();
        let mut scans = local_scan_counts(g, 3).into_iter().map(as_f);
        Self {
            degree: g.degrees().into_iter().map(|d| d as f64).collect(),
            scan: [
                scans.next().unwrap_or_default(),
                scans.next().unwrap_or_default(),
                scans.next().unwrap_or_default(),
            ],
        }
    }

    /// The per-vertex statistic behind a localized feature.
    pub fn for_feature(&self, f: Feature) -> Option<&[f64]> {
        match f {
            Feature::MaxDegree => Some(&self.degree),
            Feature::Scan1 => Some(&self.scan[0]),
            Feature::Scan2 => Some(&self.scan[1]),
            Feature::Scan3 => Some(&self.scan[2]),
            _ => None,
        }
    }
}

/// Raw feature values indexed by (replicate, time, feature).
///
/// Times are 1-based and dense from `first_t`. The feature axis normally has
/// width 9 in [`Feature::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    reps: usize,
    times: usize,
    width: usize,
    first_t: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(reps: usize, times: usize, width: usize, first_t: usize) -> Self {
        Self {
            reps,
            times,
            width,
            first_t,
            data: vec![0.0; reps * times * width],
        }
    }

    /// Stacks per-replicate series of feature rows; every replicate must have
    /// the same length and row width.
    pub fn from_rows(first_t: usize, replicates: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let reps = replicates.len();
        let times = replicates.first().map_or(0, Vec::len);
        let width = replicates
            .first()
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        let mut data = Vec::with_capacity(reps * times * width);
        for rep in replicates {
            if rep.len() != times {
                return Err(Error::DimensionMismatch {
                    expected: times,
                    actual: rep.len(),
                });
            }
            for row in rep {
                if row.len() != width {
                    return Err(Error::DimensionMismatch {
                        expected: width,
                        actual: row.len(),
                    });
                }
                data.extend_from_slice(&row);
            }
        }
        Ok(Self {
            reps,
            times,
            width,
            first_t,
            data,
        })
    }

    /// Single-replicate matrix holding all nine features of every graph.
    pub fn from_series(series: &GraphSeries, cfg: &InvariantConfig) -> Result<Self> {
        let rows = series
            .graphs()
            .iter()
            .map(|g| all_features(g, cfg).map(|f| f.0.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let mut m = Self::from_rows(series.first_t(), vec![rows])?;
        m.width = NUM_FEATURES;
        Ok(m)
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn times(&self) -> usize {
        self.times
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn first_t(&self) -> usize {
        self.first_t
    }

    pub fn last_t(&self) -> usize {
        self.first_t + self.times - 1
    }

    fn offset(&self, rep: usize, t: usize) -> usize {
        assert!(
            rep < self.reps && t >= self.first_t && t <= self.last_t(),
            "index (rep {rep}, t {t}) outside {}x[{}..={}]",
            self.reps,
            self.first_t,
            self.last_t()
        );
        (rep * self.times + (t - self.first_t)) * self.width
    }

    pub fn get(&self, rep: usize, t: usize, i: usize) -> f64 {
        self.data[self.offset(rep, t) + i]
    }

    pub fn set(&mut self, rep: usize, t: usize, i: usize, value: f64) {
        let o = self.offset(rep, t);
        self.data[o + i] = value;
    }

    /// The feature row of replicate `rep` at time `t`.
    pub fn row(&self, rep: usize, t: usize) -> &[f64] {
        let o = self.offset(rep, t);
        &self.data[o..o + self.width]
    }

    /// Time series of feature `i` for replicate `rep`.
    pub fn column(&self, rep: usize, i: usize) -> Vec<f64> {
        (self.first_t..=self.last_t())
            .map(|t| self.get(rep, t, i))
            .collect()
    }

    /// Rows of every replicate at time `t`, flattened row-major (`reps x width`).
    pub fn slice_at(&self, t: usize) -> Vec<f64> {
        (0..self.reps)
            .flat_map(|r| self.row(r, t).iter().copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((u, v));
            }
        }
        Graph::from_edge_list(n, &pairs).unwrap()
    }

    fn path(n: usize) -> Graph {
        let pairs: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edge_list(n, &pairs).unwrap()
    }

    fn star(k: usize) -> Graph {
        let pairs: Vec<_> = (1..=k).map(|v| (0, v)).collect();
        Graph::from_edge_list(k + 1, &pairs).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn size_and_max_degree() {
        assert_eq!(size(&complete(3)), 3.0);
        assert_eq!(size(&Graph::empty(5)), 0.0);
        assert_eq!(max_degree(&star(5)), 5.0);
        assert_eq!(max_degree(&complete(4)), 3.0);
        assert_eq!(max_degree(&Graph::empty(4)), 0.0);
    }

    #[test]
    fn eigenvalue_known_spectra() {
        for n in 2..8 {
            let l = mad_eig(&complete(n), 1e-10, 10_000).unwrap();
            assert!(close(l, (n - 1) as f64, 1e-9), "K{n}: {l}");
        }
        for k in 1..8 {
            let l = mad_eig(&star(k), 1e-10, 10_000).unwrap();
            assert!(close(l, (k as f64).sqrt(), 1e-9), "star {k}: {l}");
        }
        assert_eq!(mad_eig(&Graph::empty(3), 1e-10, 10).unwrap(), 0.0);
    }

    #[test]
    fn eigenvalue_reports_non_convergence() {
        let err = mad_eig(&path(30), 1e-14, 3).unwrap_err();
        match err {
            Error::NotConverged {
                iterations,
                estimate,
                residual,
            } => {
                assert_eq!(iterations, 3);
                assert!(estimate > 0.0 && residual > 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(mad_eig(&path(3), 0.0, 10).is_err());
    }

    #[test]
    fn scan_examples() {
        assert_eq!(scan(&complete(4), 1), 6.0);
        assert_eq!(scan(&path(5), 1), 2.0);
        assert_eq!(scan(&path(5), 2), 4.0);
    }

    #[test]
    fn triangle_examples() {
        assert_eq!(triangles(&complete(4)), 4.0);
        let c5 = Graph::from_edge_list(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(triangles(&c5), 0.0);
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(clustering_coeff(&complete(4), false), 1.0);
        assert_eq!(clustering_coeff(&path(3), false), 0.0);
        let mut pairs = complete(4).to_edge_list();
        pairs.retain(|&e| e != (2, 3));
        let k4e = Graph::from_edge_list(4, &pairs).unwrap();
        assert_eq!(clustering_coeff(&k4e, false), 0.75);
        // literal: ct = 6, ot = 8 - 6 = 2
        assert_eq!(clustering_coeff(&k4e, true), 3.0);
        // literal with no open triples falls back to ct
        assert_eq!(clustering_coeff(&complete(3), true), 3.0);
        assert_eq!(clustering_coeff(&Graph::empty(3), true), 0.0);
    }

    #[test]
    fn apl_examples() {
        assert!(close(neg_apl(&complete(3)), -1.0, 1e-15));
        assert!(close(neg_apl(&path(3)), -4.0 / 3.0, 1e-15));
        let g = Graph::from_edge_list(3, &[(0, 1)]).unwrap();
        assert!(close(neg_apl(&g), -5.0 / 3.0, 1e-15));
        assert_eq!(neg_apl(&Graph::empty(4)), 0.0);
    }

    #[test]
    fn all_features_examples() {
        let cfg = InvariantConfig::default();
        assert_eq!(all_features(&Graph::empty(5), &cfg).unwrap().0, [0.0; 9]);

        let expect_k3 = [3.0, 2.0, 2.0, 3.0, 3.0, 3.0, 1.0, 1.0, -1.0];
        let expect_k4 = [6.0, 3.0, 3.0, 6.0, 6.0, 6.0, 4.0, 1.0, -1.0];
        for (g, expect) in [(complete(3), expect_k3), (complete(4), expect_k4)] {
            let f = all_features(&g, &cfg).unwrap();
            for (a, b) in f.0.iter().zip(expect) {
                assert!(close(*a, b, 1e-9), "{:?} vs {:?}", f.0, expect);
            }
        }
    }

    #[test]
    fn feature_ids_round_trip() {
        for f in Feature::ALL {
            assert_eq!(Feature::from_id(f.id()), Some(f));
            assert_eq!(f.name().parse::<Feature>().unwrap(), f);
            assert_eq!(f.id().to_string().parse::<Feature>().unwrap(), f);
        }
        assert!("0".parse::<Feature>().is_err());
        assert!("10".parse::<Feature>().is_err());
    }

    #[test]
    fn local_stats_line_up_with_features() {
        let g = path(5);
        let s = LocalStats::of(&g);
        assert_eq!(s.degree, vec![1.0, 2.0, 2.0, 2.0, 1.0]);
        assert_eq!(s.scan[0], vec![1.0, 2.0, 2.0, 2.0, 1.0]);
        assert_eq!(s.scan[2], vec![3.0, 4.0, 4.0, 4.0, 3.0]);
        assert!(s.for_feature(Feature::Size).is_none());
    }
}
