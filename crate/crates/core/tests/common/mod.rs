//! Brute-force reference implementations. Nothing here calls into the
//! library's algorithms; graphs are read only through `has_edge`/`order`.

#![allow(dead_code)]

use graphfuse::Graph;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn adjacency(g: &Graph) -> Vec<Vec<u64>> {
    let n = g.order();
    (0..n)
        .map(|u| (0..n).map(|v| u64::from(g.has_edge(u, v))).collect())
        .collect()
}

pub fn edge_count(g: &Graph) -> usize {
    let n = g.order();
    let mut c = 0;
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) {
                c += 1;
            }
        }
    }
    c
}

pub fn pair_scan(g: &Graph, set: &[usize]) -> usize {
    let mut c = 0;
    for (i, &u) in set.iter().enumerate() {
        for &v in &set[i + 1..] {
            if g.has_edge(u, v) {
                c += 1;
            }
        }
    }
    c
}

/// All-pairs hop distances; `None` when disconnected.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.order();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for u in 0..n {
        d[u][u] = 0;
        for v in 0..n {
            if g.has_edge(u, v) {
                d[u][v] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|x| (x < inf).then_some(x)).collect())
        .collect()
}

pub fn max_degree(g: &Graph) -> usize {
    let n = g.order();
    (0..n)
        .map(|u| (0..n).filter(|&v| g.has_edge(u, v)).count())
        .max()
        .unwrap_or(0)
}

/// Largest eigenvalue from a dense symmetric eigensolver.
pub fn dense_lambda_max(g: &Graph) -> f64 {
    let n = g.order();
    if n == 0 {
        return 0.0;
    }
    let a = DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 });
    a.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn scan(g: &Graph, k: usize) -> usize {
    let d = floyd_warshall(g);
    (0..g.order())
        .map(|v| {
            let set: Vec<usize> = (0..g.order())
                .filter(|&u| d[v][u].is_some_and(|x| x <= k))
                .collect();
            pair_scan(g, &set)
        })
        .max()
        .unwrap_or(0)
}

/// `trace(A^3) / 6` by explicit matrix multiplication.
pub fn triangles_by_cube(g: &Graph) -> u64 {
    let a = adjacency(g);
    let n = a.len();
    let mul = |x: &Vec<Vec<u64>>, y: &Vec<Vec<u64>>| {
        let mut z = vec![vec![0u64; n]; n];
        for i in 0..n {
            for k in 0..n {
                if x[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    z[i][j] += x[i][k] * y[k][j];
                }
            }
        }
        z
    };
    let a3 = mul(&mul(&a, &a), &a);
    (0..n).map(|i| a3[i][i]).sum::<u64>() / 6
}

/// Transitivity by enumerating (center, {a, b}) triples.
pub fn transitivity(g: &Graph) -> f64 {
    let n = g.order();
    let (mut closed, mut total) = (0usize, 0usize);
    for c in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if a != c && b != c && g.has_edge(c, a) && g.has_edge(c, b) {
                    total += 1;
                    if g.has_edge(a, b) {
                        closed += 1;
                    }
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        closed as f64 / total as f64
    }
}

/// Negated APL from Floyd–Warshall, charging disconnected pairs twice the
/// largest finite distance.
pub fn neg_apl(g: &Graph) -> f64 {
    let n = g.order();
    let d = floyd_warshall(g);
    let max_finite = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .filter_map(|(u, v)| d[u][v])
        .max();
    let Some(m) = max_finite else { return 0.0 };
    if n < 2 {
        return 0.0;
    }
    let mut total = 0usize;
    for u in 0..n {
        for v in 0..n {
            if u != v {
                total += d[u][v].unwrap_or(2 * m);
            }
        }
    }
    -(total as f64) / (n * (n - 1)) as f64
}

/// All nine features by brute force.
pub fn features(g: &Graph) -> [f64; 9] {
    [
        edge_count(g) as f64,
        max_degree(g) as f64,
        dense_lambda_max(g),
        scan(g, 1) as f64,
        scan(g, 2) as f64,
        scan(g, 3) as f64,
        triangles_by_cube(g) as f64,
        transitivity(g),
        neg_apl(g),
    ]
}

pub fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((u, v));
            }
        }
    }
    Graph::from_edge_list(n, &pairs).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every labelled graph on `n` vertices.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u32..1 << pairs.len())
        .map(|mask| {
            let chosen: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            Graph::from_edge_list(n, &chosen).unwrap()
        })
        .collect()
}
