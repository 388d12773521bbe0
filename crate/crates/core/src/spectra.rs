//! Eigensolvers and truncation-convergence control.
//!
//! Two paths sit behind [`diagonalize`]: a dense self-adjoint
//! eigendecomposition for small problems and a Lanczos iteration with full
//! reorthogonalization for large ones. Both are deterministic — the dense
//! solver runs sequentially and the Lanczos start vector is the normalized
//! all-ones vector — so repeated runs are bit-identical.
//!
//! Near-degenerate eigenpairs (the superradiant parity doublet in
//! particular) come back from any solver in an arbitrary rotation within
//! their subspace; [`SolveOptions::symmetry`] accepts a conserved operator
//! that is diagonalized inside each near-degenerate group to pin the basis
//! down.

use crate::error::Error;
use crate::hilbert::{HilbertSpace, SparseOperator};
use crate::Result;
use faer::{Mat, Side};
use num_complex::Complex64;
use std::sync::Once;

/// Which solver produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Dense,
    Lanczos,
}

impl SolverPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverPath::Dense => "dense",
            SolverPath::Lanczos => "lanczos",
        }
    }
}

/// Solver configuration. All limits are configuration, not constants.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Dense eigendecomposition is used for dimensions up to this value.
    pub dense_threshold: usize,
    /// Residual target, relative to `max(1, |lambda|)`.
    pub rtol: f64,
    /// Cap on the Krylov subspace dimension.
    pub max_krylov: usize,
    /// Conserved Hermitian operator used to disambiguate near-degenerate
    /// subspaces (typically the parity operator).
    pub symmetry: Option<SparseOperator>,
    /// Two eigenvalues within `degeneracy_window * max(1, |lambda0|)` of
    /// each other are treated as one subspace for disambiguation. This is
    /// a solver-resolution window: rotating a genuinely split pair would
    /// trade residual accuracy for symmetry purity, and split pairs are
    /// symmetry-definite on their own because the operator commutes with
    /// the Hamiltonian.
    pub degeneracy_window: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 4096,
            rtol: 1e-9,
            max_krylov: 1600,
            symmetry: None,
            degeneracy_window: 1e-9,
        }
    }
}

/// Ordered lowest eigenpairs of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending eigenvalues (length `k`).
    pub eigenvalues: Vec<f64>,
    /// Unit-norm eigenvectors matching `eigenvalues`.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Boson cutoffs behind the matrix, when known.
    pub truncation_dims: Vec<usize>,
    /// `eigenvalues[1] - eigenvalues[0]` (NaN when only one state).
    pub gap: f64,
    /// Set by [`converge_truncation`]; single diagonalizations report true.
    pub converged: bool,
    /// Last relative change of the monitored observable (0 for single runs).
    pub convergence_metric: f64,
    /// Which solver ran.
    pub solver_path: SolverPath,
    /// Largest explicit residual `||H v - lambda v||` over reported pairs.
    pub max_residual: f64,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &[Complex64] {
        &self.eigenvectors[0]
    }
}

fn ensure_sequential_faer() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        faer::set_global_parallelism(faer::Par::Seq);
    });
}

/// Lowest `k` eigenpairs of a Hermitian sparse operator.
pub fn diagonalize(h: &SparseOperator, k: usize, opts: &SolveOptions) -> Result<SpectrumResult> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian { max_dev: h.hermiticity_deviation() });
    }
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::ShapeError(format!(
            "requested {k} eigenpairs of a {dim}-dimensional operator"
        )));
    }
    let (eigenvalues, mut eigenvectors, path) = if dim <= opts.dense_threshold {
        let (vals, vecs) = dense_lowest(h, k)?;
        (vals, vecs, SolverPath::Dense)
    } else {
        let (vals, vecs) = lanczos_lowest(h, k, opts)?;
        (vals, vecs, SolverPath::Lanczos)
    };

    if let Some(symmetry) = &opts.symmetry {
        resolve_degenerate_subspaces(&eigenvalues, &mut eigenvectors, symmetry, opts.degeneracy_window)?;
    }
    for v in &mut eigenvectors {
        canonicalize_phase(v);
    }

    let mut max_residual = 0.0f64;
    for (lambda, v) in eigenvalues.iter().zip(&eigenvectors) {
        let r = residual_norm(h, *lambda, v);
        max_residual = max_residual.max(r / lambda.abs().max(1.0));
    }
    if max_residual > 1e-8 {
        return Err(Error::ConvergenceFailure { residual: max_residual, iterations: 0 });
    }

    let gap = if k >= 2 { eigenvalues[1] - eigenvalues[0] } else { f64::NAN };
    Ok(SpectrumResult {
        eigenvalues,
        eigenvectors,
        truncation_dims: Vec::new(),
        gap,
        converged: true,
        convergence_metric: 0.0,
        solver_path: path,
        max_residual,
    })
}

/// [`diagonalize`], recording the cutoffs of the space in the result.
pub fn diagonalize_in_space(
    h: &SparseOperator,
    space: &HilbertSpace,
    k: usize,
    opts: &SolveOptions,
) -> Result<SpectrumResult> {
    let mut res = diagonalize(h, k, opts)?;
    res.truncation_dims = space.boson_dims().to_vec();
    Ok(res)
}

fn residual_norm(h: &SparseOperator, lambda: f64, v: &[Complex64]) -> f64 {
    let hv = h.apply(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dense_lowest(h: &SparseOperator, k: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    ensure_sequential_faer();
    let dim = h.dim();
    let all_real = h.entries().iter().all(|&(_, _, v)| v.im == 0.0);
    if all_real {
        let mut a = Mat::<f64>::zeros(dim, dim);
        for &(r, c, v) in h.entries() {
            a[(r, c)] = v.re;
        }
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::Config(format!("dense eigensolver failed on dim {dim}")))?;
        let s = evd.S();
        let u = evd.U();
        let vals: Vec<f64> = (0..k).map(|i| s[i]).collect();
        let vecs: Vec<Vec<Complex64>> = (0..k)
            .map(|i| (0..dim).map(|j| Complex64::new(u[(j, i)], 0.0)).collect())
            .collect();
        Ok((vals, vecs))
    } else {
        let mut a = Mat::<faer::c64>::zeros(dim, dim);
        for &(r, c, v) in h.entries() {
            a[(r, c)] = v;
        }
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::Config(format!("dense eigensolver failed on dim {dim}")))?;
        let s = evd.S();
        let u = evd.U();
        let vals: Vec<f64> = (0..k).map(|i| s[i].re).collect();
        let vecs: Vec<Vec<Complex64>> = (0..k)
            .map(|i| (0..dim).map(|j| u[(j, i)]).collect())
            .collect();
        Ok((vals, vecs))
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic fill-in vector used after a Krylov breakdown.
fn breakdown_vector(dim: usize, seed: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|j| Complex64::new((((j + 1) * (seed + 3)) as f64).sin(), 0.0))
        .collect()
}

fn lanczos_lowest(
    h: &SparseOperator,
    k: usize,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    ensure_sequential_faer();
    let dim = h.dim();
    let max_m = opts.max_krylov.min(dim);

    // Fixed start: normalized all-ones.
    let init = vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim];
    let mut basis: Vec<Vec<Complex64>> = vec![init];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut next_check = (4 * k + 36).min(max_m);
    let mut breakdowns = 0usize;
    loop {
        let m = basis.len();
        let v = &basis[m - 1];
        let mut w = h.apply(v);
        let alpha = dot(v, &w).re;
        alphas.push(alpha);
        for (wi, vi) in w.iter_mut().zip(v.iter()) {
            *wi -= vi * alpha;
        }
        if m >= 2 {
            let beta_prev = betas[m - 2];
            for (wi, vi) in w.iter_mut().zip(basis[m - 2].iter()) {
                *wi -= vi * beta_prev;
            }
        }
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            for b in &basis {
                let overlap = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b.iter()) {
                    *wi -= bi * overlap;
                }
            }
        }
        let beta = norm(&w);

        let at_capacity = m >= max_m;
        let degenerate_breakdown = beta < 1e-13;
        if m >= next_check || at_capacity || degenerate_breakdown {
            if let Some((vals, coeffs)) = ritz_converged(&alphas, &betas, beta, k, opts.rtol) {
                let vecs = assemble_ritz_vectors(&basis, &coeffs);
                return Ok((vals, vecs));
            }
            if at_capacity {
                let worst = ritz_worst_residual(&alphas, &betas, beta, k);
                return Err(Error::ConvergenceFailure { residual: worst, iterations: m });
            }
            next_check = ((next_check as f64 * 1.4) as usize).max(next_check + 8).min(max_m);
        }

        if degenerate_breakdown {
            // Krylov space closed before k pairs converged: inject a new
            // deterministic direction orthogonal to the basis.
            breakdowns += 1;
            if breakdowns > k + 4 {
                return Err(Error::ConvergenceFailure { residual: beta, iterations: m });
            }
            let mut fresh = breakdown_vector(dim, breakdowns);
            for _ in 0..2 {
                for b in &basis {
                    let overlap = dot(b, &fresh);
                    for (fi, bi) in fresh.iter_mut().zip(b.iter()) {
                        *fi -= bi * overlap;
                    }
                }
            }
            let n = norm(&fresh);
            if n < 1e-12 {
                return Err(Error::ConvergenceFailure { residual: beta, iterations: m });
            }
            for f in &mut fresh {
                *f /= n;
            }
            betas.push(0.0);
            basis.push(fresh);
        } else {
            for wi in &mut w {
                *wi /= beta;
            }
            betas.push(beta);
            basis.push(w);
        }
    }
}

/// Eigen-decompose the Lanczos tridiagonal; return the `k` lowest Ritz
/// values and coefficient vectors once every residual estimate
/// `beta_m |s_mi|` meets the tolerance.
fn ritz_converged(
    alphas: &[f64],
    betas: &[f64],
    beta_last: f64,
    k: usize,
    rtol: f64,
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = alphas.len();
    if m < k {
        return None;
    }
    let (vals, vecs) = tridiag_eigen(alphas, betas);
    for i in 0..k {
        let est = beta_last * vecs[i][m - 1].abs();
        if est > rtol * vals[i].abs().max(1.0) {
            return None;
        }
    }
    Some((vals[..k].to_vec(), vecs[..k].to_vec()))
}

fn ritz_worst_residual(alphas: &[f64], betas: &[f64], beta_last: f64, k: usize) -> f64 {
    let m = alphas.len();
    if m < k {
        return f64::INFINITY;
    }
    let (_, vecs) = tridiag_eigen(alphas, betas);
    (0..k)
        .map(|i| beta_last * vecs[i][m - 1].abs())
        .fold(0.0, f64::max)
}

/// Full eigendecomposition of the symmetric tridiagonal (alphas, betas),
/// ascending. Returns (values, rows of eigenvector coefficients).
fn tridiag_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    ensure_sequential_faer();
    let m = alphas.len();
    let mut t = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i + 1, i)] = betas[i];
            t[(i, i + 1)] = betas[i];
        }
    }
    let evd = t.self_adjoint_eigen(Side::Lower).expect("tridiagonal eigen");
    let s = evd.S();
    let u = evd.U();
    let vals: Vec<f64> = (0..m).map(|i| s[i]).collect();
    let vecs: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| u[(j, i)]).collect())
        .collect();
    (vals, vecs)
}

fn assemble_ritz_vectors(basis: &[Vec<Complex64>], coeffs: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let dim = basis[0].len();
    coeffs
        .iter()
        .map(|c| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            for (b, &w) in basis.iter().zip(c.iter()) {
                if w != 0.0 {
                    for (vi, bi) in v.iter_mut().zip(b.iter()) {
                        *vi += bi * w;
                    }
                }
            }
            let n = norm(&v);
            for vi in &mut v {
                *vi /= n;
            }
            v
        })
        .collect()
}

/// Rotate near-degenerate groups into eigenvectors of the conserved
/// `symmetry` operator, making them deterministic and symmetry-definite.
fn resolve_degenerate_subspaces(
    eigenvalues: &[f64],
    eigenvectors: &mut [Vec<Complex64>],
    symmetry: &SparseOperator,
    window: f64,
) -> Result<()> {
    if eigenvectors.is_empty() {
        return Ok(());
    }
    if symmetry.dim() != eigenvectors[0].len() {
        return Err(Error::ShapeError(format!(
            "symmetry operator dim {} vs state dim {}",
            symmetry.dim(),
            eigenvectors[0].len()
        )));
    }
    let k = eigenvalues.len();
    let scale = eigenvalues[0].abs().max(1.0);
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && (eigenvalues[end] - eigenvalues[end - 1]).abs() <= window * scale {
            end += 1;
        }
        if end - start >= 2 {
            rotate_group(&mut eigenvectors[start..end], symmetry);
        }
        start = end;
    }
    Ok(())
}

fn rotate_group(group: &mut [Vec<Complex64>], symmetry: &SparseOperator) {
    ensure_sequential_faer();
    let g = group.len();
    let applied: Vec<Vec<Complex64>> = group.iter().map(|v| symmetry.apply(v)).collect();
    let mut s = Mat::<faer::c64>::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            s[(i, j)] = dot(&group[i], &applied[j]);
        }
    }
    let evd = s.self_adjoint_eigen(Side::Lower).expect("small group eigen");
    let u = evd.U();
    let dim = group[0].len();
    let mut rotated: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; g];
    for (col, row_out) in rotated.iter_mut().enumerate() {
        for (i, src) in group.iter().enumerate() {
            let w = u[(i, col)];
            for (o, s_val) in row_out.iter_mut().zip(src.iter()) {
                *o += s_val * w;
            }
        }
        let n = norm(row_out);
        for o in row_out.iter_mut() {
            *o /= n;
        }
    }
    for (dst, src) in group.iter_mut().zip(rotated) {
        *dst = src;
    }
}

/// Fix the global phase: the largest-magnitude component becomes real
/// positive (ties resolved by lowest index).
fn canonicalize_phase(v: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag * (1.0 + 1e-12) {
            best_mag = m;
            best = i;
        }
    }
    let z = v[best];
    let mag = z.norm();
    if mag > 0.0 {
        let phase = z.conj() / mag;
        for vi in v.iter_mut() {
            *vi *= phase;
        }
    }
}

/// Count of eigenvalues within `rel_tol * energy_scale` of the ground
/// level; 2 flags the superradiant parity doublet.
pub fn detect_degeneracy(result: &SpectrumResult, rel_tol: f64, energy_scale: f64) -> usize {
    let floor = result.eigenvalues[0];
    result
        .eigenvalues
        .iter()
        .take_while(|&&e| (e - floor).abs() <= rel_tol * energy_scale)
        .count()
}

/// Options for [`converge_truncation`].
#[derive(Debug, Clone)]
pub struct ConvergenceOptions {
    /// Relative change of the observable that counts as converged.
    pub tol: f64,
    /// Cutoff growth factor between steps (rounded up).
    pub growth: f64,
    /// Hard ceiling on any single boson cutoff.
    pub ceiling: usize,
    /// Number of eigenpairs per step.
    pub k: usize,
    /// Solver configuration for each step.
    pub solve: SolveOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { tol: 1e-6, growth: 1.5, ceiling: 16384, k: 2, solve: SolveOptions::default() }
    }
}

/// One evaluation in a truncation study.
#[derive(Debug, Clone)]
pub struct ConvergenceStep {
    pub cutoffs: Vec<usize>,
    pub observable: f64,
    pub ground_energy: f64,
    /// Relative change versus the previous step (NaN on the first).
    pub rel_change: f64,
}

/// Result of growing the cutoffs until an observable stabilizes.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub spectrum: SpectrumResult,
    pub history: Vec<ConvergenceStep>,
    /// Ground energy never rose by more than solver slack along the way.
    pub monotone: bool,
}

/// Grow boson cutoffs geometrically until `observable` changes by less
/// than `opts.tol` between consecutive steps. Never silent: if the ceiling
/// is hit first, the final result is returned with `converged = false` and
/// the last relative change in `convergence_metric`.
pub fn converge_truncation<B, O>(
    builder: B,
    observable: O,
    start: &[usize],
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport>
where
    B: Fn(&[usize]) -> Result<(SparseOperator, HilbertSpace, Option<SparseOperator>)>,
    O: Fn(&SpectrumResult, &HilbertSpace) -> Result<f64>,
{
    let mut cutoffs: Vec<usize> = start.to_vec();
    let mut history: Vec<ConvergenceStep> = Vec::new();
    let mut monotone = true;
    let mut previous: Option<(f64, SpectrumResult)> = None;

    loop {
        let (h, space, symmetry) = builder(&cutoffs)?;
        let mut solve = opts.solve.clone();
        solve.symmetry = symmetry;
        let mut spec = diagonalize_in_space(&h, &space, opts.k, &solve)?;
        let obs = observable(&spec, &space)?;

        let rel_change = match &previous {
            None => f64::NAN,
            Some((prev_obs, prev_spec)) => {
                let slack = 1e-8 * prev_spec.ground_energy().abs().max(1.0);
                if spec.ground_energy() > prev_spec.ground_energy() + slack {
                    monotone = false;
                }
                let denom = obs.abs().max(prev_obs.abs());
                if denom == 0.0 { 0.0 } else { (obs - prev_obs).abs() / denom }
            }
        };
        history.push(ConvergenceStep {
            cutoffs: cutoffs.clone(),
            observable: obs,
            ground_energy: spec.ground_energy(),
            rel_change,
        });

        if !rel_change.is_nan() && rel_change < opts.tol {
            spec.converged = true;
            spec.convergence_metric = rel_change;
            return Ok(ConvergenceReport { spectrum: spec, history, monotone });
        }

        let next: Vec<usize> = cutoffs
            .iter()
            .map(|&c| ((c as f64) * opts.growth).ceil() as usize)
            .collect();
        if next.iter().any(|&c| c > opts.ceiling) {
            spec.converged = false;
            spec.convergence_metric = if rel_change.is_nan() { f64::INFINITY } else { rel_change };
            return Ok(ConvergenceReport { spectrum: spec, history, monotone });
        }
        previous = Some((obs, spec));
        cutoffs = next;
    }
}
