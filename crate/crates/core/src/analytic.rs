//! Closed-form phase solutions and Gaussian-state oracles.
//!
//! The normal-phase (NP) and superradiant-phase (SP) effective Hamiltonians
//! are quadratic, so their excitation energies, ground energies,
//! squeezing parameters and displacement amplitudes have closed forms in
//! the dimensionless coupling `x = g̃_c^s`. This module implements them,
//! together with a Wick-theorem oracle for `g²(0)` of displaced squeezed
//! states and the moment machinery for higher-order quadrature squeezing.
//!
//! The Wick oracle is normative for `g²(0)`. Two published final
//! expressions disagree with their own intermediate lines (`coth²` in NP,
//! and an SP numerator whose large-displacement limit is 2 instead of 1);
//! both are still computed and surfaced in a `printed` field so the
//! discrepancy stays visible instead of silently resolved.
//!
//! Squeezing sign convention throughout: `S(t) = exp[t(b†² - b²)/2]`, under
//! which `t > 0` squeezes the `P = (b - b†)/2i` quadrature. The main-text
//! frame transformation `S(r) = exp[r(b² - b†²)/2]` maps onto this as
//! `t = -r`.

use crate::error::Error;
use crate::Result;
use std::collections::BTreeMap;

/// Commutator constant of the quadrature pair: `[X, P] = 2iC`, `C = 1/4`.
pub const QUADRATURE_C: f64 = 0.25;

/// Largest moment order with exact double-factorial arithmetic.
pub const MAX_MOMENT_ORDER: usize = 20;

/// NP excitation energy `omega_s * sqrt(1 - x^2)`; valid for `x <= 1`.
pub fn np_excitation_energy(x: f64, omega_s: f64) -> f64 {
    omega_s * (1.0 - x * x).sqrt()
}

/// NP ground energy `(eps_np - omega_s)/2 - Omega/2`.
pub fn np_ground_energy(x: f64, omega_s: f64, big_omega: f64) -> f64 {
    (np_excitation_energy(x, omega_s) - omega_s) / 2.0 - big_omega / 2.0
}

/// SP excitation energy `omega_s * sqrt(1 - x^-4)`; valid for `x >= 1`.
pub fn sp_excitation_energy(x: f64, omega_s: f64) -> f64 {
    omega_s * (1.0 - x.powi(-4)).sqrt()
}

/// SP ground energy
/// `(omega_s/2) [sqrt(1 - x^-4) - 1] - (Omega/4) [x^2 + x^-2]`.
pub fn sp_ground_energy(x: f64, omega_s: f64, big_omega: f64) -> f64 {
    0.5 * omega_s * ((1.0 - x.powi(-4)).sqrt() - 1.0)
        - 0.25 * big_omega * (x * x + x.powi(-2))
}

/// Closed-form diagonalization of the NP effective Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct NpSolution {
    /// Excitation energy `eps_np = omega_s sqrt(1 - x^2)`.
    pub epsilon: f64,
    /// Ground energy `(eps_np - omega_s)/2 - Omega/2`.
    pub ground_energy: f64,
    /// Squeezing parameter `ln(1 - x^2)/4` (non-positive).
    pub r_np: f64,
}

/// Diagonalize the NP phase at dimensionless coupling `x = g̃_c^s < 1`.
pub fn np_solution(x: f64, omega_s: f64, big_omega: f64) -> Result<NpSolution> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::PhaseDomainError(format!(
            "np_solution requires 0 <= x < 1, got {x}"
        )));
    }
    Ok(NpSolution {
        epsilon: np_excitation_energy(x, omega_s),
        ground_energy: np_ground_energy(x, omega_s, big_omega),
        r_np: 0.25 * (1.0 - x * x).ln(),
    })
}

/// Closed-form diagonalization of the SP effective Hamiltonian, including
/// the symmetry-broken displacement and the lab-frame coherence.
#[derive(Debug, Clone, Copy)]
pub struct SpSolution {
    /// Excitation energy `eps_sp = omega_s sqrt(1 - x^-4)`.
    pub epsilon: f64,
    /// Ground energy `(omega_s/2)[sqrt(1-x^-4)-1] - (Omega/4)[x^2+x^-2]`.
    pub ground_energy: f64,
    /// SP-frame squeezing parameter `ln(1 - x^-4)/4`.
    pub r_sp: f64,
    /// Displacement amplitude of the squeezed-frame mode,
    /// `sqrt((Omega/4 omega_s)(x^2 - x^-2))`.
    pub beta_g: f64,
    /// Total squeezing of the lab-frame fluctuations, `t̃ = r + r_sp`
    /// (in the `S(r) = exp[r(b²-b†²)/2]` convention of the frame map).
    pub t_tilde: f64,
    /// Lab-frame coherence magnitude `e^{-r} beta_g`; the ground doublet
    /// carries `<b> = ±` this value. Verified against exact diagonalization
    /// and the classical displacement of the effective potential.
    pub coherence_lab: f64,
    /// The published coherence expression `e^{+r} beta_g`, kept for
    /// comparison; it disagrees with numerics whenever `r != 0`.
    pub coherence_printed: f64,
    /// Qubit rotation angle of the displaced frame,
    /// `tan(2 theta) = 4 g_s beta_g / Omega`.
    pub theta: f64,
    /// Rotated qubit splitting `Omega * x^2`.
    pub omega_bar: f64,
}

/// Diagonalize the SP phase at `x = g̃_c^s > 1`. `r` is the lab-frame
/// squeezing parameter of the model frame (zero for the standard model).
pub fn sp_solution(x: f64, omega_s: f64, big_omega: f64, r: f64) -> Result<SpSolution> {
    if x <= 1.0 {
        return Err(Error::PhaseDomainError(format!(
            "sp_solution requires x > 1, got {x}"
        )));
    }
    let beta_g = (big_omega / (4.0 * omega_s) * (x * x - x.powi(-2))).sqrt();
    let r_sp = 0.25 * (1.0 - x.powi(-4)).ln();
    let g_s = x * (omega_s * big_omega).sqrt() / 2.0;
    Ok(SpSolution {
        epsilon: sp_excitation_energy(x, omega_s),
        ground_energy: sp_ground_energy(x, omega_s, big_omega),
        r_sp,
        beta_g,
        t_tilde: r + r_sp,
        coherence_lab: (-r).exp() * beta_g,
        coherence_printed: r.exp() * beta_g,
        theta: 0.5 * (4.0 * g_s * beta_g / big_omega).atan(),
        omega_bar: big_omega * x * x,
    })
}

/// Pure displaced squeezed state, parameterized by a real displacement and
/// a total squeezing `t_total` in the `S(t) = exp[t(b†² - b²)/2]`
/// convention. Centered second moments follow as
/// `n_c = sinh² t`, `m_c = sinh t cosh t`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianState {
    pub beta: f64,
    pub t_total: f64,
}

impl GaussianState {
    pub fn new(beta: f64, t_total: f64) -> Self {
        Self { beta, t_total }
    }

    /// Centered occupation `<b†b> - beta²`.
    pub fn n_c(&self) -> f64 {
        self.t_total.sinh().powi(2)
    }

    /// Centered anomalous moment `<bb> - beta²` (real, sign carries the
    /// squeezing direction).
    pub fn m_c(&self) -> f64 {
        self.t_total.sinh() * self.t_total.cosh()
    }

    /// Total occupation `<b†b>`.
    pub fn occupation(&self) -> f64 {
        self.n_c() + self.beta * self.beta
    }
}

/// Wick-theorem `g²(0)` for a displaced squeezed state:
///
/// `g² = [2 n_c² + m_c² + 4 n_c β² + 2 β² m_c + β⁴] / (n_c + β²)²`.
pub fn g2_gaussian(state: &GaussianState) -> Result<f64> {
    let n_c = state.n_c();
    let m_c = state.m_c();
    let b2 = state.beta * state.beta;
    let occupation = n_c + b2;
    if occupation <= 0.0 {
        return Err(Error::UndefinedCorrelation(occupation));
    }
    let numerator = 2.0 * n_c * n_c + m_c * m_c + 4.0 * n_c * b2 + 2.0 * b2 * m_c + b2 * b2;
    Ok(numerator / (occupation * occupation))
}

/// An analytic `g²(0)` value: the Wick-oracle result next to the published
/// final expression it corrects.
#[derive(Debug, Clone, Copy)]
pub struct G2Analytic {
    /// Normative oracle value.
    pub oracle: f64,
    /// Published final formula, for transparency.
    pub printed: f64,
}

/// Asymptotic NP correlation at coupling `x`: the oracle gives
/// `3 + 1/sinh²(r_np)`; the published form is `coth²(r_np)`.
pub fn g2_np_analytic(x: f64) -> Result<G2Analytic> {
    if x <= 0.0 || x >= 1.0 {
        return Err(Error::PhaseDomainError(format!(
            "g2_np_analytic requires 0 < x < 1, got {x}"
        )));
    }
    let r_np = 0.25 * (1.0 - x * x).ln();
    let oracle = g2_gaussian(&GaussianState::new(0.0, r_np))?;
    let printed = (r_np.cosh() / r_np.sinh()).powi(2);
    Ok(G2Analytic { oracle, printed })
}

/// Asymptotic SP correlation at coupling `x > 1`: oracle evaluated on the
/// displaced squeezed state `(beta_g, t̃ = r + r_sp)`. The published
/// numerator carries `2β⁴` and no `2β²m_c` cross term; its `β → ∞` limit
/// is 2, contradicting the stated limit of 1, so it is only reported.
pub fn g2_sp_analytic(x: f64, omega_s: f64, big_omega: f64, r: f64) -> Result<G2Analytic> {
    let sp = sp_solution(x, omega_s, big_omega, r)?;
    let state = GaussianState::new(sp.beta_g, sp.t_tilde);
    let oracle = g2_gaussian(&state)?;
    let t = sp.t_tilde;
    let b2 = sp.beta_g * sp.beta_g;
    let printed_num =
        0.5 * t.sinh().powi(2) * (3.0 * (2.0 * t).cosh() + 8.0 * b2 - 1.0) + 2.0 * b2 * b2;
    let printed_den = (t.sinh().powi(2) + b2).powi(2);
    Ok(G2Analytic { oracle, printed: printed_num / printed_den })
}

/// Exact double factorial `n!!` for `n <= 19` (integer arithmetic, then
/// converted once).
pub fn double_factorial(n: usize) -> Result<f64> {
    if n >= MAX_MOMENT_ORDER {
        return Err(Error::InvalidOrder(n as i64));
    }
    let mut acc: u64 = 1;
    let mut k = n as u64;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    Ok(acc as f64)
}

fn check_even_order(order: usize) -> Result<()> {
    if order < 2 || order % 2 != 0 || order > MAX_MOMENT_ORDER {
        return Err(Error::InvalidOrder(order as i64));
    }
    Ok(())
}

/// Coherent-state reference for the `N`th quadrature moment:
/// `C^{N/2} (N-1)!!` with `C = 1/4`.
pub fn coherent_threshold(order: usize) -> Result<f64> {
    check_even_order(order)?;
    Ok(QUADRATURE_C.powi((order / 2) as i32) * double_factorial(order - 1)?)
}

/// Even moment of a zero-mean Gaussian quadrature with variance `sigma2`:
/// `(N-1)!! sigma2^{N/2}`.
pub fn gaussian_moment(sigma2: f64, order: usize) -> Result<f64> {
    check_even_order(order)?;
    if sigma2 <= 0.0 {
        return Err(Error::InvalidOrder(order as i64));
    }
    Ok(double_factorial(order - 1)? * sigma2.powi((order / 2) as i32))
}

/// Moment reconstruction from normal-ordered centered moments:
///
/// `<(ΔP)^N> = Σ_{k=0}^{N/2-1} [N!/(N-2k)!/k!] (C/2)^k <:(ΔP)^{N-2k}:>
///            + C^{N/2} (N-1)!!`
///
/// The combinatorial factor is the falling factorial `N!/(N-2k)!` — the
/// boundary term `C^{N/2}(N-1)!!` is exactly its `k = N/2` continuation,
/// which fixes the reading. Keys of `normal_ordered` are moment orders
/// `N, N-2, ..., 2`; a missing key is an error.
pub fn bch_moment_expansion(normal_ordered: &BTreeMap<usize, f64>, order: usize) -> Result<f64> {
    check_even_order(order)?;
    let mut total = 0.0;
    for k in 0..order / 2 {
        let m_order = order - 2 * k;
        let moment = *normal_ordered
            .get(&m_order)
            .ok_or(Error::IncompleteInput(m_order))?;
        total += falling_over_kfact(order, k) * (QUADRATURE_C / 2.0).powi(k as i32) * moment;
    }
    Ok(total + QUADRATURE_C.powi((order / 2) as i32) * double_factorial(order - 1)?)
}

/// `N!/(N-2k)!/k!` with exact integer arithmetic.
fn falling_over_kfact(n: usize, k: usize) -> f64 {
    let mut num: u128 = 1;
    for j in (n - 2 * k + 1)..=n {
        num *= j as u128;
    }
    let mut den: u128 = 1;
    for j in 2..=k {
        den *= j as u128;
    }
    num as f64 / den as f64
}
