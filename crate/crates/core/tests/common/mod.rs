//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use gvflow::{Adjacency, GridDomain, LatLong};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const WELL_TABLE: &str = "station_id,lat,long,value,time_index
w1,36.62074879,-76.10938540,4.65,0
w2,36.92515020,-77.17746768,75.37,0
w3,36.69104276,-76.00948530,6.00,0
w4,36.78431615,-76.64328700,175.80,0
w5,36.80403855,-76.73495750,168.33,0
w6,36.85931567,-76.58634110,157.71,0
w7,36.68320624,-76.91329390,208.26,0
w8,36.78737704,-76.05153760,7.26,0
";

pub const WELL_VALUES: [f64; 8] = [4.65, 75.37, 6.00, 175.80, 168.33, 157.71, 208.26, 7.26];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn unit_grid(rows: usize, cols: usize) -> GridDomain {
    GridDomain::build(
        LatLong::new(0.0, 0.0),
        LatLong::new(1.0, 1.0),
        rows,
        cols,
        Adjacency::Four,
    )
    .unwrap()
}

pub fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i - 1, i)).collect()
}

/// 4-neighbor grid edges written out by hand.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let n = i * cols + j;
            if j + 1 < cols {
                edges.push((n, n + 1));
            }
            if i + 1 < rows {
                edges.push((n, n + cols));
            }
        }
    }
    edges
}

/// Random connected graph: a random tree plus `extra` random edges.
pub fn random_connected_edges(rng: &mut StdRng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    if n > 1 {
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// All-pairs shortest hop counts by Floyd-Warshall.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u32>> {
    const INF: u32 = u32::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Every assignment of levels `1..=n` to the nodes in which each edge
/// joins levels at most one apart.
pub fn enumerate_gv(nodes: usize, n_levels: i64, edges: &[(usize, usize)]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = vec![1i64; nodes];
    loop {
        if edges
            .iter()
            .all(|&(a, b)| (current[a] - current[b]).abs() <= 1)
        {
            out.push(current.clone());
        }
        let mut i = 0;
        loop {
            if i == nodes {
                return out;
            }
            current[i] += 1;
            if current[i] <= n_levels {
                break;
            }
            current[i] = 1;
            i += 1;
        }
    }
}

/// Dense direct solve of
/// `(1 + 4a) h - a * sum(free neighbors) = h1 - G + a * sum(fixed neighbors)`
/// over the interior cells that are not pinned; all other cells keep `h2`.
pub fn dense_flow_solve(
    rows: usize,
    cols: usize,
    h1: &[f64],
    h2: &[f64],
    alpha: f64,
    source: &[f64],
    pinned: &[usize],
) -> Vec<f64> {
    let interior = |n: usize| {
        let (i, j) = (n / cols, n % cols);
        i > 0 && i + 1 < rows && j > 0 && j + 1 < cols
    };
    let free: Vec<usize> = (0..rows * cols)
        .filter(|&n| interior(n) && !pinned.contains(&n))
        .collect();
    let index = |n: usize| free.iter().position(|&f| f == n);
    let m = free.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (row, &n) in free.iter().enumerate() {
        a[(row, row)] = 1.0 + 4.0 * alpha;
        b[row] = h1[n] - source[n];
        for nb in [n - cols, n + cols, n - 1, n + 1] {
            match index(nb) {
                Some(col) => a[(row, col)] -= alpha,
                None => b[row] += alpha * h2[nb],
            }
        }
    }
    let x = a.lu().solve(&b).expect("diagonally dominant system");
    let mut out = h2.to_vec();
    for (row, &n) in free.iter().enumerate() {
        out[n] = x[row];
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
