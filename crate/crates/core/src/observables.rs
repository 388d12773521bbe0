//! Order parameters and statistics extracted from eigenvectors.
//!
//! Everything here is matrix-free where it matters: moments are computed
//! by repeated sparse matrix-vector application, so cutoffs in the
//! thousands stay cheap. A `ModeView` bundles the bosonic slot under
//! inspection with an optional real displacement so states obtained from
//! pre-displaced Hamiltonians can be analyzed with the same code paths.

use crate::analytic::{bch_moment_expansion, coherent_threshold};
use crate::error::Error;
use crate::hilbert::{annihilation, embed, parity_operator, HilbertSpace, SparseOperator};
use crate::model::squeeze_generator;
use crate::Result;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Occupation below which `g²(0)` is reported as undefined instead of a
/// meaningless ratio.
pub const DEFAULT_OCCUPATION_FLOOR: f64 = 1e-6;

/// A bosonic mode of a space, optionally shifted by a real displacement
/// (`b -> b + displacement`), as produced by pre-displaced Hamiltonians.
#[derive(Debug, Clone, Copy)]
pub struct ModeView {
    pub mode: usize,
    pub displacement: f64,
}

impl ModeView {
    pub fn plain(mode: usize) -> Self {
        Self { mode, displacement: 0.0 }
    }

    pub fn displaced(mode: usize, displacement: f64) -> Self {
        Self { mode, displacement }
    }
}

/// `<state|op|state>` via sparse matrix-vector product. States within
/// 1e-6 of unit norm are renormalized on the fly; anything further off is
/// an error.
pub fn expectation(state: &[Complex64], op: &SparseOperator) -> Result<Complex64> {
    if state.len() != op.dim() {
        return Err(Error::ShapeError(format!(
            "state length {} vs operator dimension {}",
            state.len(),
            op.dim()
        )));
    }
    let norm_sq: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    let norm = norm_sq.sqrt();
    if (norm - 1.0).abs() >= 1e-6 {
        return Err(Error::NotNormalized(norm));
    }
    let applied = op.apply(state);
    let raw: Complex64 = state.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum();
    Ok(raw / norm_sq)
}

/// Fock-number probability distribution of one bosonic mode (amplitudes
/// of all other factors traced out).
pub fn number_distribution(
    state: &[Complex64],
    space: &HilbertSpace,
    mode: usize,
) -> Result<Vec<f64>> {
    if state.len() != space.total_dim() {
        return Err(Error::ShapeError(format!(
            "state length {} vs space dimension {}",
            state.len(),
            space.total_dim()
        )));
    }
    let dims = space.factor_dims();
    let slot = space.boson_slot(mode);
    if slot >= dims.len() {
        return Err(Error::ShapeError(format!("mode {mode} out of range")));
    }
    let inner: usize = dims[slot + 1..].iter().product();
    let d = dims[slot];
    let mut probs = vec![0.0f64; d];
    for (idx, amp) in state.iter().enumerate() {
        let n = (idx / inner) % d;
        probs[n] += amp.norm_sqr();
    }
    Ok(probs)
}

/// Phase classification attached to a correlation report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseLabel {
    Np,
    Sp,
    Undefined,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Np => "NP",
            PhaseLabel::Sp => "SP",
            PhaseLabel::Undefined => "UNDEFINED",
        }
    }
}

/// Phonon-statistics order parameters of one state.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    /// `<b†b>`.
    pub n_mean: f64,
    /// `<b†b†bb>`.
    pub n2_mean: f64,
    /// `g²(0) = <b†b†bb>/<b†b>²`; `None` when the occupation guard fired.
    pub g2: Option<f64>,
    /// `<b>` including any displacement offset of the view.
    pub coherence: Complex64,
    /// `<parity>` of the full state.
    pub parity: f64,
    /// Analytic phase label; filled by [`classify_phase`].
    pub phase_label: PhaseLabel,
    /// Occupation fell below the floor, so `g2` is undefined.
    pub occupation_guard_triggered: bool,
}

/// Compute the phonon correlation report for a mode of the state.
pub fn g2_numeric(
    state: &[Complex64],
    space: &HilbertSpace,
    view: ModeView,
    occupation_floor: f64,
) -> Result<CorrelationReport> {
    let d = *space
        .boson_dims()
        .get(view.mode)
        .ok_or_else(|| Error::ShapeError(format!("mode {} out of range", view.mode)))?;
    let slot = space.boson_slot(view.mode);
    let mut b = embed(space, slot, &annihilation(d)?)?;
    if view.displacement != 0.0 {
        b = b.add(
            &SparseOperator::identity(space.total_dim())
                .scale(Complex64::new(view.displacement, 0.0)),
        )?;
    }
    // <b†b> = ||b psi||², <b†b†bb> = ||b² psi||².
    let norm_check = expectation(state, &SparseOperator::identity(space.total_dim()))?;
    debug_assert!((norm_check.re - 1.0).abs() < 1e-6);
    let bv = b.apply(state);
    let n_mean: f64 = bv.iter().map(|z| z.norm_sqr()).sum();
    let bbv = b.apply(&bv);
    let n2_mean: f64 = bbv.iter().map(|z| z.norm_sqr()).sum();
    let coherence: Complex64 = state.iter().zip(&bv).map(|(a, w)| a.conj() * w).sum();
    let parity_op = parity_operator(space)?;
    let parity = expectation(state, &parity_op)?.re;

    let guarded = n_mean < occupation_floor;
    Ok(CorrelationReport {
        n_mean,
        n2_mean,
        g2: if guarded { None } else { Some(n2_mean / (n_mean * n_mean)) },
        coherence,
        parity,
        phase_label: PhaseLabel::Undefined,
        occupation_guard_triggered: guarded,
    })
}

/// Analytic phase label from the squeezed-frame coupling, demoted to
/// `UNDEFINED` when the occupation guard fired (so the statistical
/// evidence and the analytic label stay separately visible).
pub fn classify_phase(gtilde_c_s: f64, report: &CorrelationReport) -> PhaseLabel {
    if report.occupation_guard_triggered {
        return PhaseLabel::Undefined;
    }
    if gtilde_c_s < 1.0 {
        PhaseLabel::Np
    } else if gtilde_c_s > 1.0 {
        PhaseLabel::Sp
    } else {
        PhaseLabel::Undefined
    }
}

/// The two symmetry-broken combinations of a parity doublet.
#[derive(Debug, Clone)]
pub struct SymmetryBrokenPair {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
    /// `<b>` on `plus` (non-negative real part by construction).
    pub coherence_plus: Complex64,
    /// `<b>` on `minus`.
    pub coherence_minus: Complex64,
}

/// Combine two orthonormal, opposite-parity eigenvectors into the
/// symmetry-broken states `(v0 ± v1)/sqrt(2)`, fixing the relative phase
/// so that `<plus|(b + b†)|plus> >= 0`.
pub fn symmetry_broken_pair(
    v0: &[Complex64],
    v1: &[Complex64],
    space: &HilbertSpace,
    view: ModeView,
) -> Result<SymmetryBrokenPair> {
    if v0.len() != space.total_dim() || v1.len() != space.total_dim() {
        return Err(Error::ShapeError("doublet states must live on the given space".into()));
    }
    let overlap: Complex64 = v0.iter().zip(v1).map(|(a, b)| a.conj() * b).sum();
    if overlap.norm() > 1e-8 {
        return Err(Error::SymmetryError(format!(
            "inputs are not orthogonal (|<v0|v1>| = {:.3e})",
            overlap.norm()
        )));
    }
    let parity_op = parity_operator(space)?;
    let p0 = expectation(v0, &parity_op)?.re;
    let p1 = expectation(v1, &parity_op)?.re;
    if p0 * p1 >= 0.0 {
        return Err(Error::SymmetryError(format!(
            "inputs carry the same parity (<P> = {p0:.6}, {p1:.6})"
        )));
    }

    let d = space.boson_dims()[view.mode];
    let slot = space.boson_slot(view.mode);
    let b = embed(space, slot, &annihilation(d)?)?;
    let x = b.add(&b.dagger())?;
    // <v0|X|v1> fixes the relative phase that maximizes the coherence.
    let xv1 = x.apply(v1);
    let cross: Complex64 = v0.iter().zip(&xv1).map(|(a, w)| a.conj() * w).sum();
    let phase = if cross.norm() > 0.0 {
        cross.conj() / cross.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = Vec::with_capacity(v0.len());
    let mut minus = Vec::with_capacity(v0.len());
    for (a, b_amp) in v0.iter().zip(v1) {
        let rotated = b_amp * phase;
        plus.push((a + rotated) * s);
        minus.push((a - rotated) * s);
    }

    let offset = Complex64::new(view.displacement, 0.0);
    let coherence_plus = expectation(&plus, &b)? + offset;
    let coherence_minus = expectation(&minus, &b)? + offset;
    Ok(SymmetryBrokenPair { plus, minus, coherence_plus, coherence_minus })
}

/// Quadrature frame for moment evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureFrame {
    /// The mode as diagonalized (default).
    Squeezed,
    /// Conjugate the state by the truncated squeeze `S(frame_r)` first.
    Lab,
}

impl QuadratureFrame {
    pub fn as_str(&self) -> &'static str {
        match self {
            QuadratureFrame::Squeezed => "squeezed",
            QuadratureFrame::Lab => "lab",
        }
    }
}

/// One row of a higher-order squeezing report.
#[derive(Debug, Clone)]
pub struct MomentRow {
    pub order: usize,
    /// `<(ΔP)^N>` by direct matrix-power application.
    pub moment: f64,
    /// Coherent-state reference for this order.
    pub threshold: f64,
    /// `moment < threshold`.
    pub squeezed: bool,
    /// |direct - BCH reconstruction|, available for orders ≤ 8.
    pub bch_deviation: Option<f64>,
}

/// Higher-order quadrature moments of one state.
#[derive(Debug, Clone)]
pub struct QuadratureMoments {
    pub frame: QuadratureFrame,
    pub p_mean: f64,
    /// `<P²> - <P>²`, computed independently of the moment pipeline.
    pub variance_direct: f64,
    pub rows: Vec<MomentRow>,
}

/// Moments `<(ΔP)^N>` of `P = (b - b†)/(2i)` for the requested even
/// orders. In the lab frame the state is first pushed through the
/// truncated squeeze `S(frame_r) = exp[frame_r (b² - b†²)/2]`; leave
/// cutoff headroom for that. The mean `<P>` is subtracted numerically, so
/// symmetry-broken states are handled uniformly. Orders up to 8 carry a
/// built-in cross-check against the commutator-ordered reconstruction.
pub fn quadrature_moments(
    state: &[Complex64],
    space: &HilbertSpace,
    view: ModeView,
    orders: &[usize],
    frame: QuadratureFrame,
    frame_r: f64,
) -> Result<QuadratureMoments> {
    if state.len() != space.total_dim() {
        return Err(Error::ShapeError(format!(
            "state length {} vs space dimension {}",
            state.len(),
            space.total_dim()
        )));
    }
    for &n in orders {
        if n < 2 || n % 2 != 0 || n > crate::analytic::MAX_MOMENT_ORDER {
            return Err(Error::InvalidOrder(n as i64));
        }
    }
    let d = space.boson_dims()[view.mode];
    let slot = space.boson_slot(view.mode);

    let working: Vec<Complex64> = match frame {
        QuadratureFrame::Squeezed => state.to_vec(),
        QuadratureFrame::Lab => {
            let gen = embed(space, slot, &squeeze_generator(d, frame_r)?)?;
            let mut mapped = gen.expm_apply(state, 1e-14);
            let n: f64 = mapped.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            // The truncated squeeze is not exactly unitary at the boundary.
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::NotNormalized(n));
            }
            for z in &mut mapped {
                *z /= n;
            }
            mapped
        }
    };

    let b = embed(space, slot, &annihilation(d)?)?;
    let p = b
        .sub(&b.dagger())?
        .scale(Complex64::new(0.0, -0.5));
    let p_mean = expectation(&working, &p)?.re;

    let max_order = orders.iter().copied().max().unwrap_or(2);
    let mut cur = working.clone();
    let mut direct: BTreeMap<usize, f64> = BTreeMap::new();
    for k in 1..=max_order {
        let pv = p.apply(&cur);
        for (c, t) in cur.iter_mut().zip(pv) {
            *c = t - *c * p_mean;
        }
        if k % 2 == 0 {
            let val: Complex64 = working.iter().zip(&cur).map(|(a, w)| a.conj() * w).sum();
            direct.insert(k, val.re);
        }
    }

    // Independent variance route.
    let p2v = p.apply(&p.apply(&working));
    let p2: Complex64 = working.iter().zip(&p2v).map(|(a, w)| a.conj() * w).sum();
    let variance_direct = p2.re - p_mean * p_mean;

    // Normal-ordered centered moments for the reconstruction check.
    let bch_max = max_order.min(8);
    let b_mean = expectation(&working, &b)?;
    let mut powers: Vec<Vec<Complex64>> = Vec::with_capacity(bch_max + 1);
    powers.push(working.clone());
    for j in 1..=bch_max {
        let prev = &powers[j - 1];
        let bv = b.apply(prev);
        let next: Vec<Complex64> = bv
            .iter()
            .zip(prev)
            .map(|(t, c)| t - c * b_mean)
            .collect();
        powers.push(next);
    }
    let mut normal_ordered: BTreeMap<usize, f64> = BTreeMap::new();
    for m in (2..=bch_max).step_by(2) {
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..=m {
            let inner: Complex64 = powers[j]
                .iter()
                .zip(&powers[m - j])
                .map(|(a, w)| a.conj() * w)
                .sum();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += inner * (sign * binomial(m, j));
        }
        // (2i)^{-m} for even m is (-4)^{-m/2}, real.
        let scale = (-4.0f64).powi(-((m / 2) as i32));
        normal_ordered.insert(m, (total * scale).re);
    }

    let mut rows = Vec::with_capacity(orders.len());
    for &order in orders {
        let moment = direct[&order];
        let threshold = coherent_threshold(order)?;
        let bch_deviation = if order <= 8 {
            Some((bch_moment_expansion(&normal_ordered, order)? - moment).abs())
        } else {
            None
        };
        rows.push(MomentRow {
            order,
            moment,
            threshold,
            squeezed: moment < threshold,
            bch_deviation,
        });
    }
    Ok(QuadratureMoments { frame, p_mean, variance_direct, rows })
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc as f64
}
