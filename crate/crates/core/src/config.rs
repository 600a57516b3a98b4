//! Point configurations on the unit sphere `S^{m-1}`, their Gram matrices,
//! direct pair-sum energies, and the reference configurations used throughout
//! the crate.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Maximum deviation from unit norm that construction silently repairs.
pub const RENORMALIZE_BAND: f64 = 1e-9;
/// Unit-norm tolerance guaranteed for stored points.
pub const UNIT_TOL: f64 = 1e-12;
/// Two points closer than this are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// `n` unit vectors in `R^m`, stored row-major (the rows of the matrix `X`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ConfigFile", try_from = "ConfigFile")]
pub struct Configuration {
    n: usize,
    m: usize,
    coords: Vec<f64>,
}

impl Configuration {
    /// Builds a configuration from explicit rows.
    ///
    /// Rows whose norm is within [`RENORMALIZE_BAND`] of one are rescaled onto
    /// the sphere; anything further off is rejected.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(Error::Empty);
        }
        let mut coords = Vec::with_capacity(n * m);
        for (index, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: m,
                    found: row.len(),
                });
            }
            coords.extend(row);
        }
        Self::from_flat(n, m, coords)
    }

    /// Builds a configuration from `n * m` row-major coordinates.
    pub fn from_flat(n: usize, m: usize, mut coords: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Empty);
        }
        if coords.len() != n * m {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates for n={n}, m={m}, got {}",
                n * m,
                coords.len()
            )));
        }
        for (index, row) in coords.chunks_exact_mut(m).enumerate() {
            let norm = norm(row);
            if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE_BAND {
                return Err(Error::NonUnitPoint { index, norm });
            }
            if (norm - 1.0).abs() > 1e-15 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        Ok(Configuration { n, m, coords })
    }

    /// Projects arbitrary nonzero rows onto the sphere.
    pub(crate) fn from_directions(n: usize, m: usize, mut coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), n * m);
        for row in coords.chunks_exact_mut(m) {
            let norm = norm(row);
            row.iter_mut().for_each(|x| *x /= norm);
        }
        Configuration { n, m, coords }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.m..(i + 1) * self.m]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.m)
    }

    /// Row-major coordinates, `n * m` entries.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// `sum_i p_i`.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.m];
        for p in self.points() {
            for (ck, pk) in c.iter_mut().zip(p) {
                *ck += pk;
            }
        }
        c
    }

    /// Applies `p -> p U` to every point (`U` row-major `m x m`).
    pub fn rotate(&self, u: &[f64]) -> Configuration {
        let m = self.m;
        assert_eq!(u.len(), m * m, "rotation must be m x m");
        let mut coords = vec![0.0; self.n * m];
        for (dst, p) in coords.chunks_exact_mut(m).zip(self.points()) {
            for (l, d) in dst.iter_mut().enumerate() {
                *d = (0..m).map(|k| p[k] * u[k * m + l]).sum();
            }
        }
        Configuration::from_directions(self.n, m, coords)
    }

    pub fn gram(&self) -> GramMatrix {
        gram(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ConfigFile::from(self.clone())).expect("configuration serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text)?;
        Configuration::try_from(file)
    }


    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// On-disk JSON layout of a configuration.
#[derive(Debug, Serialize, Deserialize)]
struct ConfigFile {
    n: usize,
    m: usize,
    points: Vec<Vec<f64>>,
}

impl From<Configuration> for ConfigFile {
    fn from(c: Configuration) -> Self {
        ConfigFile {
            n: c.n,
            m: c.m,
            points: c.rows(),
        }
    }
}

impl TryFrom<ConfigFile> for Configuration {
    type Error = Error;

    fn try_from(file: ConfigFile) -> Result<Self> {
        if file.points.len() != file.n {
            return Err(Error::InvalidParameter(format!(
                "declared n={} but {} points given",
                file.n,
                file.points.len()
            )));
        }
        for (index, row) in file.points.iter().enumerate() {
            if row.len() != file.m {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: file.m,
                    found: row.len(),
                });
            }
        }
        Configuration::new(file.points)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric matrix of pairwise inner products `b_ij = p_i·p_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Off-diagonal entries, one per unordered pair, sorted ascending.
    pub fn multiset(&self) -> InnerProductMultiset {
        let mut values = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                values.push(self.get(i, j));
            }
        }
        InnerProductMultiset::from_values(values)
    }

    /// `sum_{i<j} b_ij`, the energy for `h(t) = t`.
    pub fn pair_sum(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .sum()
    }
}

/// Computes `B = X X^T`, with the diagonal pinned to one.
pub fn gram(config: &Configuration) -> GramMatrix {
    let n = config.n();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in i + 1..n {
            let b = dot(config.point(i), config.point(j));
            entries[i * n + j] = b;
            entries[j * n + i] = b;
        }
    }
    GramMatrix { n, entries }
}

/// Sorted multiset of the `n(n-1)/2` pairwise inner products; a
/// rotation-invariant fingerprint of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerProductMultiset(Vec<f64>);

impl InnerProductMultiset {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        InnerProductMultiset(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Entrywise max distance between two sorted multisets; infinite if the
    /// lengths differ.
    pub fn linf_distance(&self, other: &InnerProductMultiset) -> f64 {
        if self.0.len() != other.0.len() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `E_h(P) = sum_{i<j} h(p_i·p_j)`.
pub fn energy(config: &Configuration, pot: &Potential) -> Result<f64> {
    let singular = pot.singular_at_coincidence();
    let n = config.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (p, q) = (config.point(i), config.point(j));
            if singular && coincide(p, q) {
                return Err(Error::DegeneratePair(i, j));
            }
            total += pot.h(dot(p, q));
        }
    }
    Ok(total)
}

pub(crate) fn coincide(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= COINCIDENCE_TOL
}

/// Triangular bipyramid: both poles plus an equilateral triangle on the equator.
pub fn tbp() -> Configuration {
    let mut rows = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]];
    for k in 0..3 {
        let a = 2.0 * PI * k as f64 / 3.0;
        rows.push(vec![a.cos(), a.sin(), 0.0]);
    }
    Configuration::new(rows).expect("unit rows")
}

/// Square pyramid with apex `(1,0,0)` and base at height `r`.
pub fn fp(r: f64) -> Result<Configuration> {
    if !(r.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("fp requires |r| < 1, got {r}")));
    }
    let s = (1.0 - r * r).sqrt();
    Configuration::new(vec![
        vec![1.0, 0.0, 0.0],
        vec![r, s, 0.0],
        vec![r, -s, 0.0],
        vec![r, 0.0, s],
        vec![r, 0.0, -s],
    ])
}

/// Regular tetrahedron; every pair has inner product `-1/3`.
pub fn tetrahedron() -> Configuration {
    let c = 1.0 / 3f64.sqrt();
    Configuration::new(vec![
        vec![c, c, c],
        vec![c, -c, -c],
        vec![-c, c, -c],
        vec![-c, -c, c],
    ])
    .expect("unit rows")
}

/// Regular octahedron `{±e_1, ±e_2, ±e_3}`.
pub fn octahedron() -> Configuration {
    let mut rows = Vec::with_capacity(6);
    for k in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; 3];
            v[k] = s;
            rows.push(v);
        }
    }
    Configuration::new(rows).expect("unit rows")
}

/// `n` independent direction-uniform points on `S^{m-1}`, deterministic in `seed`.
pub fn random_config(n: usize, m: usize, seed: u64) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_config_from(&mut rng, n, m)
}

/// Same as [`random_config`] but drawing from a caller-supplied generator.
pub fn random_config_from<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Configuration {
    assert!(n >= 1 && m >= 1, "random_config needs n, m >= 1");
    let mut coords = Vec::with_capacity(n * m);
    for _ in 0..n {
        loop {
            let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            if norm(&v) > 0.0 {
                coords.extend(v);
                break;
            }
        }
    }
    Configuration::from_directions(n, m, coords)
}

/// Uniformly random orthogonal `m x m` matrix (row-major), via Gram-Schmidt
/// on Gaussian columns.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut ok = true;
        for _ in 0..m {
            let mut v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            for _ in 0..2 {
                for c in &cols {
                    let d = dot(&v, c);
                    v.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
                }
            }
            let nv = norm(&v);
            if nv < 1e-8 {
                ok = false;
                break;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            cols.push(v);
        }
        if ok {
            let mut u = vec![0.0; m * m];
            for (l, c) in cols.iter().enumerate() {
                for k in 0..m {
                    u[k * m + l] = c[k];
                }
            }
            return u;
        }
    }
}
