//! Seeded multistart descent over point configurations, and classification
//! of the critical points it reaches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::{centroid_obstruction, CentroidObstruction};
use crate::config::{dot, energy, fp, octahedron, random_config_from, tbp, Configuration, InnerProductMultiset};
use crate::equilibrium::residual_general;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::special_case::fp_height;
use crate::spectral::{classify_case, normalize, DEFAULT_CASE_TOL};

/// L∞ distance between sorted fingerprints below which two points are the
/// same class.
pub const FINGERPRINT_TOL: f64 = 1e-4;
/// `b_ij` above `1 − REPEATED_TOL` counts as a repeated point.
pub const REPEATED_TOL: f64 = 1e-8;
/// Eigenvalues of `XᵀX` at or below this count as missing dimensions.
pub const RANK_TOL: f64 = 1e-8;
/// Thresholds of the centroid/eigenvalue-spread audit.
pub const DEGENERATE_SPECTRUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchParams {
    pub n: usize,
    pub m: usize,
    pub starts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub backtrack_factor: f64,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    pub residual_tol: f64,
    pub max_iters: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            n: 5,
            m: 3,
            starts: 10_000,
            seed: 1,
            initial_step: 0.1,
            backtrack_factor: 0.5,
            armijo: 1e-4,
            residual_tol: 1e-10,
            max_iters: 20_000,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.starts == 0 {
            return bad("starts must be at least 1".into());
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::Empty);
        }
        if !(self.residual_tol >= 1e-10) {
            return bad(format!("residual_tol must be at least 1e-10, got {}", self.residual_tol));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad(format!("backtrack_factor must lie in (0, 1), got {}", self.backtrack_factor));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad(format!("initial_step must be positive, got {}", self.initial_step));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad(format!("armijo constant must lie in (0, 1), got {}", self.armijo));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Tbp,
    Fp,
    Planar,
    Repeated,
    LowRank,
    Unknown,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Tbp => "TBP",
            Label::Fp => "FP",
            Label::Planar => "PLANAR",
            Label::Repeated => "REPEATED",
            Label::LowRank => "LOWRANK",
            Label::Unknown => "UNKNOWN",
        }
    }

    /// Repeated points and configurations spanning a proper subspace.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Label::Planar | Label::Repeated | Label::LowRank)
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub config: Configuration,
    pub energy: f64,
    pub residual_norm: f64,
    pub label: Label,
    pub fingerprint: InnerProductMultiset,
    pub iterations: usize,
    pub converged: bool,
    /// Energy after each accepted step, starting with the initial energy.
    #[serde(skip)]
    pub energy_trace: Vec<f64>,
}

/// `|p|² − 1` with error-free products and sums, accurate far below one ulp.
fn norm_defect(p: &[f64]) -> f64 {
    let (mut s, mut c) = (-1.0f64, 0.0f64);
    for &v in p {
        let sq = v * v;
        let sq_err = v.mul_add(v, -sq);
        let t = s + sq;
        let bb = t - s;
        c += (s - (t - bb)) + (sq - bb) + sq_err;
        s = t;
    }
    s + c
}

/// Flat-array state used inside the descent loop.
struct Work<'a> {
    n: usize,
    m: usize,
    pot: &'a Potential,
}

impl Work<'_> {
    fn row<'b>(&self, x: &'b [f64], i: usize) -> &'b [f64] {
        &x[i * self.m..(i + 1) * self.m]
    }

    /// Tangential gradient (row-major) and its squared Frobenius norm and
    /// largest row norm.
    fn gradient(&self, x: &[f64], out: &mut [f64]) -> (f64, f64) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (p, q) = (self.row(x, i), self.row(x, j));
                let b = dot(p, q);
                let w = self.pot.dh(b);
                for k in 0..self.m {
                    out[i * self.m + k] += w * (q[k] - b * p[k]);
                    out[j * self.m + k] += w * (p[k] - b * q[k]);
                }
            }
        }
        let mut total = 0.0;
        let mut max = 0.0f64;
        for row in out.chunks_exact(self.m) {
            let s: f64 = row.iter().map(|v| v * v).sum();
            total += s;
            max = max.max(s.sqrt());
        }
        (total, max)
    }

    /// `E(y) − E(x)` for the energy of the normalized rows, evaluated
    /// pairwise from exact coordinate differences and compensated norm
    /// defects. Decreases far below the resolution of `E` itself, and below
    /// the rounding of the rows onto the sphere, are still resolved.
    fn energy_change(&self, x: &[f64], y: &[f64]) -> f64 {
        let dx: Vec<f64> = x.chunks_exact(self.m).map(norm_defect).collect();
        let dy: Vec<f64> = y.chunks_exact(self.m).map(norm_defect).collect();
        let mut total = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (p, q) = (self.row(x, i), self.row(x, j));
                let (p2, q2) = (self.row(y, i), self.row(y, j));
                let mut raw_change = 0.0;
                for k in 0..self.m {
                    raw_change += (p2[k] - p[k]) * q2[k] + p[k] * (q2[k] - q[k]);
                }
                let b = dot(p, q);
                let b2 = dot(p2, q2);
                // p·q / (|p||q|) to first order in the norm defects
                let db = raw_change - 0.5 * (b2 * (dy[i] + dy[j]) - b * (dx[i] + dx[j]));
                let b = b * (1.0 - 0.5 * (dx[i] + dx[j]));
                total += if db.abs() < 1e-4 {
                    // midpoint rule; exact when h is quadratic
                    db * self.pot.dh(b + 0.5 * db)
                } else {
                    self.pot.h(b + db) - self.pot.h(b)
                };
            }
        }
        total
    }

    fn retract(&self, x: &[f64], g: &[f64], step: f64, out: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in 0..self.m {
                let v = x[i * self.m + k] - step * g[i * self.m + k];
                out[i * self.m + k] = v;
                s += v * v;
            }
            let norm = s.sqrt();
            for k in 0..self.m {
                out[i * self.m + k] /= norm;
            }
        }
    }
}

/// Projected gradient descent with sphere renormalization and Armijo
/// backtracking. Stops once the largest tangential residual is at most
/// `params.residual_tol`; otherwise the point comes back labelled
/// [`Label::Unknown`] with `converged = false`.
pub fn descend(start: &Configuration, pot: &Potential, params: &SearchParams) -> Result<CriticalPoint> {
    params.validate()?;
    pot.validate()?;
    let (n, m) = (start.n(), start.m());
    let work = Work { n, m, pot };
    let mut x = start.coords().to_vec();
    let mut g = vec![0.0; n * m];
    let mut trial = vec![0.0; n * m];
    let mut e = energy(start, pot)?;
    let mut trace = vec![e];
    let (mut g2, mut gmax) = work.gradient(&x, &mut g);
    let mut step = params.initial_step;
    let max_step = 10.0 * params.initial_step;
    let mut iterations = 0;
    let mut stalled = false;
    while gmax > params.residual_tol && iterations < params.max_iters {
        let mut accepted = false;
        while step > 1e-20 {
            work.retract(&x, &g, step, &mut trial);
            let de = work.energy_change(&x, &trial);
            if de <= -params.armijo * step * g2 {
                std::mem::swap(&mut x, &mut trial);
                // ΔE ≤ 0, so the stored trace is non-increasing
                e = (e + de).min(e);
                trace.push(e);
                accepted = true;
                break;
            }
            step *= params.backtrack_factor;
        }
        if !accepted {
            stalled = true;
            break;
        }
        iterations += 1;
        (g2, gmax) = work.gradient(&x, &mut g);
        step = (step / params.backtrack_factor).min(max_step);
    }
    let config = Configuration::from_flat(n, m, x)?;
    let residual_norm = residual_general(&config, pot)?.max_norm;
    let converged = !stalled && gmax <= params.residual_tol;
    let energy = energy(&config, pot)?;
    let fingerprint = config.gram().multiset();
    let label = if converged { classify(&config) } else { Label::Unknown };
    Ok(CriticalPoint {
        config,
        energy,
        residual_norm,
        label,
        fingerprint,
        iterations,
        converged,
        energy_trace: trace,
    })
}

fn reference_fingerprints() -> &'static [(Label, InnerProductMultiset)] {
    use std::sync::OnceLock;
    static CELL: OnceLock<Vec<(Label, InnerProductMultiset)>> = OnceLock::new();
    CELL.get_or_init(|| {
        vec![
            (Label::Tbp, tbp().gram().multiset()),
            (Label::Fp, fp(fp_height()).expect("|r*| < 1").gram().multiset()),
        ]
    })
}

/// Names a converged configuration: TBP or FP by fingerprint, then the
/// structural degeneracies, then [`Label::Unknown`].
pub fn classify(config: &Configuration) -> Label {
    let fingerprint = config.gram().multiset();
    if config.n() == 5 && config.m() == 3 {
        for (label, reference) in reference_fingerprints() {
            if fingerprint.linf_distance(reference) <= FINGERPRINT_TOL {
                return *label;
            }
        }
    }
    if fingerprint.values().iter().any(|&b| b > 1.0 - REPEATED_TOL) {
        return Label::Repeated;
    }
    let (_, sd) = normalize(config);
    let missing = sd.lambdas.iter().filter(|&&l| l <= RANK_TOL).count();
    match missing {
        0 => Label::Unknown,
        1 => Label::Planar,
        _ => Label::LowRank,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogClass {
    pub label: Label,
    pub energy: f64,
    /// Largest residual among the members.
    pub residual_norm: f64,
    pub count: usize,
    pub fingerprint: InnerProductMultiset,
    /// Member reached from the lowest start index.
    pub representative: Configuration,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Catalog {
    pub params: SearchParams,
    pub potential: Potential,
    pub classes: Vec<CatalogClass>,
    /// Starts that hit `max_iters` or stalled before reaching the tolerance.
    pub unconverged: usize,
    /// Largest residual among the unconverged starts.
    pub worst_unconverged_residual: f64,
    pub global_min: f64,
    pub best: Option<Configuration>,
}

impl Catalog {
    /// Classes other than repeated-point or rank-deficient ones.
    pub fn nontrivial(&self) -> impl Iterator<Item = &CatalogClass> {
        self.classes.iter().filter(|c| !c.label.is_degenerate())
    }

    pub fn class(&self, label: Label) -> Option<&CatalogClass> {
        self.classes.iter().find(|c| c.label == label)
    }
}

fn start_config(params: &SearchParams, index: usize) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    random_config_from(&mut rng, params.n, params.m)
}

/// Runs `params.starts` independent descents from direction-uniform random
/// starts and clusters the converged points by fingerprint. The result does
/// not depend on thread scheduling.
pub fn multistart(pot: &Potential, params: &SearchParams) -> Result<Catalog> {
    params.validate()?;
    pot.validate()?;
    let mut points: Vec<(usize, CriticalPoint)> = (0..params.starts)
        .into_par_iter()
        .map(|k| descend(&start_config(params, k), pot, params).map(|cp| (k, cp)))
        .collect::<Result<_>>()?;
    points.sort_by_key(|(k, _)| *k);

    let mut classes: Vec<CatalogClass> = Vec::new();
    let mut unconverged = 0;
    let mut worst_unconverged_residual = 0.0f64;
    let mut best: Option<(f64, Configuration)> = None;
    for (_, cp) in points {
        if !cp.converged {
            unconverged += 1;
            worst_unconverged_residual = worst_unconverged_residual.max(cp.residual_norm);
            continue;
        }
        if best.as_ref().is_none_or(|(e, _)| cp.energy < *e) {
            best = Some((cp.energy, cp.config.clone()));
        }
        match classes
            .iter_mut()
            .find(|c| c.fingerprint.linf_distance(&cp.fingerprint) <= FINGERPRINT_TOL)
        {
            Some(class) => {
                class.count += 1;
                class.residual_norm = class.residual_norm.max(cp.residual_norm);
            }
            None => classes.push(CatalogClass {
                label: cp.label,
                energy: cp.energy,
                residual_norm: cp.residual_norm,
                count: 1,
                fingerprint: cp.fingerprint,
                representative: cp.config,
            }),
        }
    }
    classes.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let (global_min, best) = match best {
        Some((e, c)) => (e, Some(c)),
        None => (f64::NAN, None),
    };
    Ok(Catalog {
        params: params.clone(),
        potential: pot.clone(),
        classes,
        unconverged,
        worst_unconverged_residual,
        global_min,
        best,
    })
}

/// Whether some pair of points is mirror-symmetric across the plane through
/// the origin containing the other three (five points in `R³` only).
pub fn in_main_special_case(config: &Configuration, tol: f64) -> bool {
    if config.n() != 5 || config.m() != 3 {
        return false;
    }
    for a in 0..5 {
        for b in a + 1..5 {
            let rest: Vec<&[f64]> = (0..5).filter(|&i| i != a && i != b).map(|i| config.point(i)).collect();
            let (pa, pb) = (config.point(a), config.point(b));
            // mirror normal along p_a − p_b, or any plane if they coincide
            let d: Vec<f64> = pa.iter().zip(pb).map(|(u, v)| u - v).collect();
            let dn = dot(&d, &d).sqrt();
            if dn <= tol {
                continue;
            }
            let normal: Vec<f64> = d.iter().map(|v| v / dn).collect();
            let on_plane = rest.iter().all(|p| dot(p, &normal).abs() <= tol);
            // p_b must be the reflection of p_a: the midpoint lies on the plane
            let mid: Vec<f64> = pa.iter().zip(pb).map(|(u, v)| 0.5 * (u + v)).collect();
            if on_plane && dot(&mid, &normal).abs() <= tol {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditViolation {
    pub label: Label,
    pub energy: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecialCaseAudit {
    pub checked: usize,
    pub violations: Vec<AuditViolation>,
    pub warning: Option<String>,
}

impl SpecialCaseAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every nontrivial class must be TBP or FP and must have the
/// three-on-a-circle, mirrored-pair shape.
pub fn special_case_audit(classes: &[CatalogClass]) -> SpecialCaseAudit {
    let mut violations = Vec::new();
    let mut checked = 0;
    for class in classes.iter().filter(|c| !c.label.is_degenerate()) {
        checked += 1;
        if !matches!(class.label, Label::Tbp | Label::Fp) {
            violations.push(AuditViolation {
                label: class.label,
                energy: class.energy,
                reason: "class is neither TBP nor FP".into(),
            });
        } else if !in_main_special_case(&class.representative, 1e-6) {
            violations.push(AuditViolation {
                label: class.label,
                energy: class.energy,
                reason: "no mirror-symmetric pair across the plane of the other three".into(),
            });
        }
    }
    let warning = (checked == 0).then(|| "no nontrivial classes to audit; passing vacuously".to_string());
    SpecialCaseAudit {
        checked,
        violations,
        warning,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassStructure {
    pub label: Label,
    pub energy: f64,
    pub lambdas: Vec<f64>,
    pub centroid_norm: f64,
    /// `None` when a centroid component falls in the ambiguity band.
    pub zero_count: Option<usize>,
    /// Present for classes with no vanishing centroid component.
    pub obstruction: Option<CentroidObstruction>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructuralAudit {
    pub classes: Vec<ClassStructure>,
    pub case_zero: Vec<Label>,
    pub ambiguous: Vec<Label>,
    pub degenerate_spectrum: Vec<Label>,
    /// The octahedron is critical with zero centroid and equal eigenvalues.
    pub octahedron_witness: bool,
}

impl StructuralAudit {
    pub fn passed(&self) -> bool {
        self.case_zero.is_empty()
            && self.ambiguous.is_empty()
            && self.degenerate_spectrum.is_empty()
            && self.octahedron_witness
    }
}

fn octahedron_witness() -> bool {
    let o = octahedron();
    let Ok(rep) = residual_general(&o, &Potential::biquadratic()) else {
        return false;
    };
    let (_, sd) = normalize(&o);
    rep.max_norm <= 1e-12 && sd.centroid_norm() <= 1e-12 && sd.lambda_spread() <= 1e-12
}

/// Checks the nontrivial classes against the centroid-case structure: none
/// may have every centroid component nonzero, and none may combine a
/// vanishing centroid with equal eigenvalues. The `n = 6` octahedron shows
/// the latter combination is possible in general.
pub fn structural_audit(classes: &[CatalogClass]) -> StructuralAudit {
    let mut out = StructuralAudit {
        classes: Vec::new(),
        case_zero: Vec::new(),
        ambiguous: Vec::new(),
        degenerate_spectrum: Vec::new(),
        octahedron_witness: octahedron_witness(),
    };
    for class in classes.iter().filter(|c| !c.label.is_degenerate()) {
        let (_, sd) = normalize(&class.representative);
        let zero_count = classify_case(&sd, DEFAULT_CASE_TOL).ok().map(|c| c.zero_count);
        let obstruction = match zero_count {
            Some(0) => {
                out.case_zero.push(class.label);
                Some(centroid_obstruction(&class.representative))
            }
            None => {
                out.ambiguous.push(class.label);
                None
            }
            Some(_) => None,
        };
        if sd.centroid_norm() <= DEGENERATE_SPECTRUM_TOL && sd.lambda_spread() <= DEGENERATE_SPECTRUM_TOL {
            out.degenerate_spectrum.push(class.label);
        }
        out.classes.push(ClassStructure {
            label: class.label,
            energy: class.energy,
            centroid_norm: sd.centroid_norm(),
            lambdas: sd.lambdas,
            zero_count,
            obstruction,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::config::random_config;
    use crate::special_case::{embed, energy_sc, solve_symmetric_branch};

    fn params() -> SearchParams {
        SearchParams {
            starts: 50,
            ..SearchParams::default()
        }
    }

    #[test]
    fn perturbed_tbp_returns_to_tbp() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = tbp()
            .rows()
            .into_iter()
            .map(|p| p.iter().map(|v| v + rng.random_range(-1e-3..1e-3)).collect())
            .collect();
        let start = Configuration::from_flat(
            5,
            3,
            rows.iter()
                .flat_map(|r| {
                    let n = dot(r, r).sqrt();
                    r.iter().map(move |v| v / n)
                })
                .collect(),
        )
        .unwrap();
        let cp = descend(&start, &Potential::biquadratic(), &params()).unwrap();
        assert!(cp.converged);
        assert_eq!(cp.label, Label::Tbp);
        assert!((cp.energy - 6.75).abs() <= 1e-9);
        assert!(cp.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn symmetric_start_reaches_fp() {
        let start = fp(-0.25).unwrap();
        let cp = descend(&start, &Potential::biquadratic(), &params()).unwrap();
        assert!(cp.converged, "residual {}", cp.residual_norm);
        assert_eq!(cp.label, Label::Fp);
        let branch = solve_symmetric_branch().unwrap();
        let oracle = energy_sc(&branch.solutions[1].state);
        assert!((cp.energy - oracle).abs() <= 1e-8);
        assert!(cp.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exact_tbp_needs_no_steps() {
        let cp = descend(&tbp(), &Potential::biquadratic(), &params()).unwrap();
        assert_eq!(cp.iterations, 0);
        assert!(cp.residual_norm <= 1e-10);
        assert_eq!(cp.label, Label::Tbp);
    }

    #[test]
    fn classify_reference_shapes() {
        assert_eq!(classify(&tbp()), Label::Tbp);
        assert_eq!(classify(&fp(fp_height()).unwrap()), Label::Fp);
        let mut rows = random_config(5, 3, 3).rows();
        rows[1] = rows[0].clone();
        assert_eq!(classify(&Configuration::new(rows).unwrap()), Label::Repeated);
        // five points on a great circle
        let planar: Vec<Vec<f64>> = (0..5)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 5.0;
                vec![a.cos(), a.sin(), 0.0]
            })
            .collect();
        assert_eq!(classify(&Configuration::new(planar).unwrap()), Label::Planar);
        let line = vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]];
        assert_eq!(classify(&Configuration::new(line).unwrap()), Label::Repeated);
        let antipodal = vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]];
        assert_eq!(classify(&Configuration::new(antipodal).unwrap()), Label::LowRank);
    }

    #[test]
    fn planar_regular_pentagon_energy() {
        // the regular pentagon on a great circle is critical within its plane
        let planar: Vec<Vec<f64>> = (0..5)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 5.0;
                vec![a.cos(), a.sin(), 0.0]
            })
            .collect();
        let c = Configuration::new(planar).unwrap();
        let cp = descend(&c, &Potential::biquadratic(), &params()).unwrap();
        assert_eq!(cp.label, Label::Planar);
        assert!(cp.energy >= 35.0 / 4.0 - 1e-6);
    }

    #[test]
    fn small_multistart_is_deterministic() {
        let p = SearchParams {
            starts: 40,
            seed: 9,
            ..SearchParams::default()
        };
        let a = multistart(&Potential::biquadratic(), &p).unwrap();
        let b = multistart(&Potential::biquadratic(), &p).unwrap();
        assert_eq!(a.classes.len(), b.classes.len());
        for (x, y) in a.classes.iter().zip(&b.classes) {
            assert_eq!(x.count, y.count);
            assert_eq!(x.energy.to_bits(), y.energy.to_bits());
        }
        assert!((a.global_min - 6.75).abs() <= 1e-8);
        assert!(a.nontrivial().all(|c| matches!(c.label, Label::Tbp | Label::Fp)));
    }

    #[test]
    fn audits_on_reference_classes() {
        let class = |label, c: Configuration| CatalogClass {
            label,
            energy: energy(&c, &Potential::biquadratic()).unwrap(),
            residual_norm: 0.0,
            count: 1,
            fingerprint: c.gram().multiset(),
            representative: c,
        };
        let classes = vec![class(Label::Tbp, tbp()), class(Label::Fp, fp(fp_height()).unwrap())];
        let audit = special_case_audit(&classes);
        assert!(audit.passed() && audit.warning.is_none());
        assert_eq!(audit.checked, 2);

        let mut injected = classes.clone();
        injected.push(class(Label::Unknown, random_config(5, 3, 1)));
        let audit = special_case_audit(&injected);
        assert_eq!(audit.violations.len(), 1);
        assert_eq!(audit.violations[0].label, Label::Unknown);

        let empty = special_case_audit(&[]);
        assert!(empty.passed() && empty.warning.is_some());

        let s = structural_audit(&classes);
        assert!(s.passed(), "{s:?}");
        assert!(s.octahedron_witness);
    }

    #[test]
    fn main_special_case_shape() {
        assert!(in_main_special_case(&tbp(), 1e-9));
        assert!(in_main_special_case(&fp(-0.3).unwrap(), 1e-9));
        let branch = solve_symmetric_branch().unwrap();
        assert!(in_main_special_case(&embed(&branch.solutions[1].state), 1e-9));
        assert!(!in_main_special_case(&random_config(5, 3, 2), 1e-6));
    }

    #[test]
    fn invalid_params_rejected() {
        let p = SearchParams {
            residual_tol: 1e-12,
            ..SearchParams::default()
        };
        assert!(descend(&tbp(), &Potential::biquadratic(), &p).is_err());
        let p = SearchParams {
            backtrack_factor: 1.0,
            ..SearchParams::default()
        };
        assert!(multistart(&Potential::biquadratic(), &p).is_err());
    }
}
