//! Physical parameter sets, derived frames and Hamiltonian builders.
//!
//! The model is a qubit coupled to a mechanical mode (a Rabi model with a
//! quadratic `alpha (g²/Ω) (b+b†)²` field term), plus an auxiliary cavity
//! that, after linearization and dispersive elimination, contributes a
//! counteracting quadratic term `-xi (b+b†)²`. A squeezing transformation
//! `S(r) = exp[r(b² - b†²)/2]` with `r = ln(1 + alpha g̃_c² - 4 xi/omega_b)/4`
//! removes the quadratic terms and leaves a standard Rabi model with
//! rescaled frequency `omega_s = omega_b e^{2r}` and coupling
//! `g_s = g e^{-r}`. All energies are in units of the mechanical frequency
//! unless stated otherwise; `omega_b` stays an explicit field so formulas
//! remain literal.

use crate::error::Error;
use crate::hilbert::{annihilation, embed, number, pauli, position_sum, HilbertSpace, PauliAxis, SparseOperator};
use crate::Result;
use num_complex::Complex64;

/// Default ceiling on `G/|delta_a_tilde - omega_b|` for the dispersive
/// elimination to be trusted.
pub const DEFAULT_DISPERSIVE_THRESHOLD: f64 = 0.1;

/// Relative guard against `delta_a_tilde = ±omega_b` resonances.
const RESONANCE_GUARD: f64 = 1e-9;

/// How the induced quadratic coefficient `xi` is supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiSpec {
    /// `xi` given directly (the sweep figures work in `xi/omega_b`).
    Direct { xi: f64 },
    /// Derived from the enhanced optomechanical coupling and effective
    /// detuning, `xi = (G²/2)(1/Delta_+ + 1/Delta_-)`.
    Optomech { g_enh: f64, delta_a_tilde: f64 },
}

/// Physical inputs of the hybrid model.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    /// Mechanical frequency (sets the energy scale).
    pub omega_b: f64,
    /// Qubit transition frequency.
    pub big_omega: f64,
    /// Dimensionless quadratic-term coefficient, `alpha >= 0`.
    pub alpha: f64,
    /// Qubit-mechanical coupling.
    pub g: f64,
    /// Source of the induced quadratic coefficient.
    pub xi_spec: XiSpec,
}

impl ModelParams {
    /// Validate and build a parameter set. For the `(G, delta)` entry path
    /// the resonance and dispersive guards run here; supplying `xi`
    /// directly bypasses them (the user is working in the effective model).
    pub fn new(
        omega_b: f64,
        big_omega: f64,
        alpha: f64,
        g: f64,
        xi_spec: XiSpec,
    ) -> Result<Self> {
        if !(omega_b > 0.0) {
            return Err(Error::Config(format!("omega_b must be positive, got {omega_b}")));
        }
        if !(big_omega > 0.0) {
            return Err(Error::Config(format!("Omega must be positive, got {big_omega}")));
        }
        if alpha < 0.0 {
            return Err(Error::Config(format!("alpha must be non-negative, got {alpha}")));
        }
        if g < 0.0 {
            return Err(Error::Config(format!("g must be non-negative, got {g}")));
        }
        if let XiSpec::Optomech { g_enh, delta_a_tilde } = xi_spec {
            compute_xi(g_enh, delta_a_tilde, omega_b)?;
            let ratio = g_enh / (delta_a_tilde - omega_b).abs();
            if ratio >= DEFAULT_DISPERSIVE_THRESHOLD {
                return Err(Error::DispersiveRegime {
                    ratio,
                    threshold: DEFAULT_DISPERSIVE_THRESHOLD,
                });
            }
        }
        Ok(Self { omega_b, big_omega, alpha, g, xi_spec })
    }

    /// Induced quadratic coefficient, whichever way it was supplied.
    pub fn xi(&self) -> Result<f64> {
        match self.xi_spec {
            XiSpec::Direct { xi } => Ok(xi),
            XiSpec::Optomech { g_enh, delta_a_tilde } => {
                Ok(compute_xi(g_enh, delta_a_tilde, self.omega_b)?.xi)
            }
        }
    }

    /// Bare critical coupling `g_c = sqrt(omega_b Omega)/2`.
    pub fn g_c(&self) -> f64 {
        (self.omega_b * self.big_omega).sqrt() / 2.0
    }

    /// Rescaled coupling `g̃_c = g/g_c`.
    pub fn gtilde_c(&self) -> f64 {
        self.g / self.g_c()
    }
}

/// Output of the dispersive elimination of the cavity.
#[derive(Debug, Clone, Copy)]
pub struct LinearizedParams {
    /// `mu = G/Delta_+`.
    pub mu: f64,
    /// `nu = -G/Delta_-`.
    pub nu: f64,
    /// `Delta_+ = delta_a_tilde + omega_b`.
    pub delta_plus: f64,
    /// `Delta_- = delta_a_tilde - omega_b`.
    pub delta_minus: f64,
    /// Induced quadratic coefficient `(G²/2)(1/Delta_+ + 1/Delta_-)`.
    pub xi: f64,
}

/// Eliminate the cavity: compute `mu`, `nu` and the induced `xi`.
pub fn compute_xi(g_enh: f64, delta_a_tilde: f64, omega_b: f64) -> Result<LinearizedParams> {
    let delta_plus = delta_a_tilde + omega_b;
    let delta_minus = delta_a_tilde - omega_b;
    for (d, sign) in [(delta_plus, '+'), (delta_minus, '-')] {
        if d.abs() < RESONANCE_GUARD * omega_b {
            return Err(Error::ResonanceError { sign, magnitude: d.abs() });
        }
    }
    Ok(LinearizedParams {
        mu: g_enh / delta_plus,
        nu: -g_enh / delta_minus,
        delta_plus,
        delta_minus,
        xi: 0.5 * g_enh * g_enh * (1.0 / delta_plus + 1.0 / delta_minus),
    })
}

/// The squeezed frame in which the model takes standard Rabi form.
#[derive(Debug, Clone, Copy)]
pub struct SqueezedFrame {
    /// Squeezing parameter; negative in the enhancement regime.
    pub r: f64,
    /// Squeezed mechanical frequency `omega_b e^{2r}`.
    pub omega_s: f64,
    /// Enhanced coupling `g e^{-r}`.
    pub g_s: f64,
    /// Bare critical coupling `sqrt(omega_b Omega)/2`.
    pub g_c: f64,
    /// `g / g_c`.
    pub gtilde_c: f64,
    /// Squeezed-frame critical coupling `g_c e^{r}`.
    pub g_c_s: f64,
    /// Dimensionless squeezed-frame coupling `g̃_c e^{-2r}`; the phase
    /// transition sits at 1.
    pub gtilde_c_s: f64,
    /// Qubit frequency, carried along for the builders.
    pub big_omega: f64,
}

/// Derive the squeezing frame from physical parameters.
/// Fails with `MechanicalInstability` when
/// `1 + alpha g̃_c² - 4 xi/omega_b <= 0`.
pub fn derive_squeezed_frame(params: &ModelParams) -> Result<SqueezedFrame> {
    let gtilde_c = params.gtilde_c();
    let argument = 1.0 + params.alpha * gtilde_c * gtilde_c - 4.0 * params.xi()? / params.omega_b;
    if argument <= 0.0 {
        return Err(Error::MechanicalInstability { argument });
    }
    let r = 0.25 * argument.ln();
    let g_c = params.g_c();
    Ok(SqueezedFrame {
        r,
        omega_s: params.omega_b * (2.0 * r).exp(),
        g_s: params.g * (-r).exp(),
        g_c,
        gtilde_c,
        g_c_s: g_c * r.exp(),
        gtilde_c_s: gtilde_c * (-2.0 * r).exp(),
        big_omega: params.big_omega,
    })
}

/// Build the frame directly from a target squeezed-frame coupling
/// `x = g̃_c^s`. Self-consistency gives
/// `e^{4r} = (1 - 4 xi/omega_b)/(1 - alpha x²)`, which is closed-form; the
/// corresponding lab coupling is `g̃_c = x e^{2r}`.
pub fn frame_from_x(
    omega_b: f64,
    big_omega: f64,
    alpha: f64,
    xi_ratio: f64,
    x: f64,
) -> Result<SqueezedFrame> {
    let denom = 1.0 - alpha * x * x;
    let argument = (1.0 - 4.0 * xi_ratio) / denom;
    if !(argument > 0.0) || !argument.is_finite() {
        return Err(Error::MechanicalInstability { argument });
    }
    let r = 0.25 * argument.ln();
    let gtilde_c = x * (2.0 * r).exp();
    let g_c = (omega_b * big_omega).sqrt() / 2.0;
    Ok(SqueezedFrame {
        r,
        omega_s: omega_b * (2.0 * r).exp(),
        g_s: gtilde_c * g_c * (-r).exp(),
        g_c,
        gtilde_c,
        g_c_s: g_c * r.exp(),
        gtilde_c_s: x,
        big_omega,
    })
}

/// Outcome of the critical-coupling formula
/// `g̃_c = sqrt[(1 - 4 xi/omega_b)/(1 - alpha)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalCoupling {
    /// A transition exists at this lab-frame rescaled coupling.
    Transition(f64),
    /// No transition for these parameters.
    NoTransition(NoTransitionReason),
}

/// Why the critical-coupling formula has no solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoTransitionReason {
    /// `alpha = 1`: the formula diverges (no finite critical coupling).
    AlphaUnity,
    /// The radicand is zero or negative.
    NonPositiveRadicand,
}

/// Critical rescaled coupling for given `alpha` and `xi/omega_b`.
pub fn critical_coupling(alpha: f64, xi_ratio: f64) -> CriticalCoupling {
    if alpha == 1.0 {
        return CriticalCoupling::NoTransition(NoTransitionReason::AlphaUnity);
    }
    let radicand = (1.0 - 4.0 * xi_ratio) / (1.0 - alpha);
    if radicand <= 0.0 || !radicand.is_finite() {
        return CriticalCoupling::NoTransition(NoTransitionReason::NonPositiveRadicand);
    }
    CriticalCoupling::Transition(radicand.sqrt())
}

fn require_qubit_boson(space: &HilbertSpace) -> Result<usize> {
    if !space.has_qubit() || space.boson_dims().len() != 1 {
        return Err(Error::ShapeError(
            "expected a qubit (x) single-boson space".into(),
        ));
    }
    Ok(space.boson_dims()[0])
}

fn require_single_boson(space: &HilbertSpace) -> Result<usize> {
    if space.has_qubit() || space.boson_dims().len() != 1 {
        return Err(Error::ShapeError("expected a single-boson space".into()));
    }
    Ok(space.boson_dims()[0])
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Standard-form Rabi Hamiltonian in the squeezed frame:
/// `H = omega_s b†b + (Omega/2) sigma_z + g_s (b + b†) sigma_x`.
pub fn build_h_squeezed(frame: &SqueezedFrame, space: &HilbertSpace) -> Result<SparseOperator> {
    build_h_squeezed_displaced(frame, space, 0.0)
}

/// Squeezed-frame Hamiltonian conjugated by a real displacement `D(beta)`
/// (`b -> b + beta`). `beta = 0` recovers [`build_h_squeezed`]. Used to
/// shrink the cutoff needed deep in the superradiant phase.
pub fn build_h_squeezed_displaced(
    frame: &SqueezedFrame,
    space: &HilbertSpace,
    beta: f64,
) -> Result<SparseOperator> {
    let cutoff = require_qubit_boson(space)?;
    let n = embed(space, 1, &number(cutoff)?)?;
    let x = embed(space, 1, &position_sum(cutoff)?)?;
    let sz = embed(space, 0, &pauli(PauliAxis::Z))?;
    let sx = embed(space, 0, &pauli(PauliAxis::X))?;
    let ident = SparseOperator::identity(space.total_dim());

    let mut h = n.scale(re(frame.omega_s));
    h = h.add(&sz.scale(re(0.5 * frame.big_omega)))?;
    h = h.add(&x.matmul(&sx)?.scale(re(frame.g_s)))?;
    if beta != 0.0 {
        h = h.add(&x.scale(re(frame.omega_s * beta)))?;
        h = h.add(&sx.scale(re(2.0 * frame.g_s * beta)))?;
        h = h.add(&ident.scale(re(frame.omega_s * beta * beta)))?;
    }
    Ok(h)
}

/// Effective lab-frame Hamiltonian after cavity elimination:
/// `H = omega_b b†b + (Omega/2) sigma_z + g (b+b†) sigma_x
///      + [alpha g²/Omega - xi] (b+b†)²`.
pub fn build_h_effective(params: &ModelParams, space: &HilbertSpace) -> Result<SparseOperator> {
    build_h_effective_displaced(params, space, 0.0)
}

/// Lab-frame effective Hamiltonian conjugated by a real displacement.
pub fn build_h_effective_displaced(
    params: &ModelParams,
    space: &HilbertSpace,
    beta: f64,
) -> Result<SparseOperator> {
    let cutoff = require_qubit_boson(space)?;
    let n = embed(space, 1, &number(cutoff)?)?;
    let x = embed(space, 1, &position_sum(cutoff)?)?;
    let x2 = x.matmul(&x)?;
    let sz = embed(space, 0, &pauli(PauliAxis::Z))?;
    let sx = embed(space, 0, &pauli(PauliAxis::X))?;
    let ident = SparseOperator::identity(space.total_dim());
    let quad = params.alpha * params.g * params.g / params.big_omega - params.xi()?;

    let mut h = n.scale(re(params.omega_b));
    h = h.add(&sz.scale(re(0.5 * params.big_omega)))?;
    h = h.add(&x.matmul(&sx)?.scale(re(params.g)))?;
    h = h.add(&x2.scale(re(quad)))?;
    if beta != 0.0 {
        // (X + 2 beta)^2 and (b† + beta)(b + beta) expansions.
        h = h.add(&x.scale(re(params.omega_b * beta + 4.0 * quad * beta)))?;
        h = h.add(&sx.scale(re(2.0 * params.g * beta)))?;
        h = h.add(&ident.scale(re(params.omega_b * beta * beta + 4.0 * quad * beta * beta)))?;
    }
    Ok(h)
}

/// Two-mode linearized Hamiltonian before the cavity is eliminated:
/// `H = (Omega/2) sigma_z + g (b+b†) sigma_x + alpha (g²/Omega)(b+b†)²
///      + delta_a_tilde a†a + omega_b b†b + G (a+a†)(b+b†)`.
/// Factor layout: qubit, cavity `a`, mechanical mode `b`.
pub fn build_h_linearized(params: &ModelParams, space: &HilbertSpace) -> Result<SparseOperator> {
    if !space.has_qubit() || space.boson_dims().len() != 2 {
        return Err(Error::ShapeError(
            "expected a qubit (x) cavity (x) mechanical-mode space".into(),
        ));
    }
    let XiSpec::Optomech { g_enh, delta_a_tilde } = params.xi_spec else {
        return Err(Error::Config(
            "the linearized model needs the (G, delta_a_tilde) parameter entry".into(),
        ));
    };
    let (dim_a, dim_b) = (space.boson_dims()[0], space.boson_dims()[1]);
    let n_a = embed(space, 1, &number(dim_a)?)?;
    let x_a = embed(space, 1, &position_sum(dim_a)?)?;
    let n_b = embed(space, 2, &number(dim_b)?)?;
    let x_b = embed(space, 2, &position_sum(dim_b)?)?;
    let sz = embed(space, 0, &pauli(PauliAxis::Z))?;
    let sx = embed(space, 0, &pauli(PauliAxis::X))?;

    let mut h = sz.scale(re(0.5 * params.big_omega));
    h = h.add(&x_b.matmul(&sx)?.scale(re(params.g)))?;
    h = h.add(
        &x_b.matmul(&x_b)?
            .scale(re(params.alpha * params.g * params.g / params.big_omega)),
    )?;
    h = h.add(&n_a.scale(re(delta_a_tilde)))?;
    h = h.add(&n_b.scale(re(params.omega_b)))?;
    h = h.add(&x_a.matmul(&x_b)?.scale(re(g_enh)))?;
    Ok(h)
}

/// Effective NP Hamiltonian (qubit projected out), valid for `x < 1`:
/// `H = omega_s b†b - (x² omega_s/4)(b†+b)² - Omega/2`.
pub fn build_h_np(frame: &SqueezedFrame, space: &HilbertSpace) -> Result<SparseOperator> {
    let x = frame.gtilde_c_s;
    if x >= 1.0 {
        return Err(Error::PhaseDomainError(format!(
            "NP Hamiltonian requires g̃_c^s < 1, got {x}"
        )));
    }
    let cutoff = require_single_boson(space)?;
    let n = number(cutoff)?;
    let pos = position_sum(cutoff)?;
    let mut h = n.scale(re(frame.omega_s));
    h = h.add(&pos.matmul(&pos)?.scale(re(-x * x * frame.omega_s / 4.0)))?;
    h = h.add(&SparseOperator::identity(cutoff).scale(re(-0.5 * frame.big_omega)))?;
    Ok(h)
}

/// Effective SP Hamiltonian, valid for `x > 1`:
/// `H = omega_s b†b - (omega_s/(4x⁴))(b†+b)² - (Omega/4)(x² + x^{-2})`.
///
/// The constant includes the rotated-qubit ground energy `-Omega x²/2`, so
/// diagonalization reproduces the closed-form SP ground energy directly.
pub fn build_h_sp(frame: &SqueezedFrame, space: &HilbertSpace) -> Result<SparseOperator> {
    let x = frame.gtilde_c_s;
    if x <= 1.0 {
        return Err(Error::PhaseDomainError(format!(
            "SP Hamiltonian requires g̃_c^s > 1, got {x}"
        )));
    }
    let cutoff = require_single_boson(space)?;
    let n = number(cutoff)?;
    let pos = position_sum(cutoff)?;
    let mut h = n.scale(re(frame.omega_s));
    h = h.add(&pos.matmul(&pos)?.scale(re(-frame.omega_s / (4.0 * x.powi(4)))))?;
    let constant = -0.25 * frame.big_omega * (x * x + x.powi(-2));
    h = h.add(&SparseOperator::identity(cutoff).scale(re(constant)))?;
    Ok(h)
}

/// Generator `r (b² - b†²)/2` of the frame squeeze `S(r)`; exponentiate
/// with [`SparseOperator::expm_apply`] to move states between frames.
pub fn squeeze_generator(cutoff: usize, r: f64) -> Result<SparseOperator> {
    let b = annihilation(cutoff)?;
    let b2 = b.matmul(&b)?;
    b2.sub(&b2.dagger()).map(|op| op.scale(re(0.5 * r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::parity_operator;

    fn direct(xi: f64) -> XiSpec {
        XiSpec::Direct { xi }
    }

    #[test]
    fn xi_printed_example() {
        let lp = compute_xi(0.1, 10.0, 1.0).unwrap();
        assert!((lp.xi - 0.005 * (1.0 / 11.0 + 1.0 / 9.0)).abs() < 1e-15);
        assert!((lp.xi - 0.001_010_101_010_101_010_2).abs() < 1e-15);
    }

    #[test]
    fn xi_vanishes_with_coupling() {
        let lp = compute_xi(0.0, 10.0, 1.0).unwrap();
        assert_eq!(lp.xi, 0.0);
        assert_eq!(lp.mu, 0.0);
        assert_eq!(lp.nu, 0.0);
    }

    #[test]
    fn xi_dispersive_limit() {
        // Exact two-term sum vs the far-detuned approximation G^2/delta.
        let lp = compute_xi(0.1, 100.0, 1.0).unwrap();
        let approx = 0.1 * 0.1 / 100.0;
        // exact deviation is omega_b^2/(delta^2 - omega_b^2) ~ 1.0001e-4
        assert!((lp.xi - approx).abs() / lp.xi < 2e-4);
    }

    #[test]
    fn xi_resonance_guard() {
        assert!(matches!(
            compute_xi(0.1, 1.0, 1.0),
            Err(Error::ResonanceError { sign: '-', .. })
        ));
        assert!(matches!(
            compute_xi(0.1, -1.0, 1.0),
            Err(Error::ResonanceError { sign: '+', .. })
        ));
    }

    #[test]
    fn params_guard_dispersive_regime() {
        let spec = XiSpec::Optomech { g_enh: 3.0, delta_a_tilde: 20.0 };
        assert!(matches!(
            ModelParams::new(1.0, 10.0, 0.0, 0.1, spec),
            Err(Error::DispersiveRegime { .. })
        ));
    }

    #[test]
    fn frame_identity_without_quadratic_terms() {
        let p = ModelParams::new(1.0, 100.0, 0.0, 2.0, direct(0.0)).unwrap();
        let f = derive_squeezed_frame(&p).unwrap();
        assert_eq!(f.r, 0.0);
        assert_eq!(f.omega_s, 1.0);
        assert_eq!(f.g_s, 2.0);
        assert!((f.gtilde_c_s - f.gtilde_c).abs() < 1e-15);
    }

    #[test]
    fn frame_deep_squeezing_value() {
        let p = ModelParams::new(1.0, 100.0, 0.0, 1.0, direct(0.245)).unwrap();
        let f = derive_squeezed_frame(&p).unwrap();
        assert!((f.r - 0.25 * 0.02f64.ln()).abs() < 1e-15);
        assert!((f.r + 0.978_00).abs() < 1e-5);
    }

    #[test]
    fn frame_instability_boundary() {
        let p = ModelParams::new(1.0, 100.0, 0.0, 1.0, direct(0.25)).unwrap();
        assert!(matches!(
            derive_squeezed_frame(&p),
            Err(Error::MechanicalInstability { .. })
        ));
    }

    #[test]
    fn frame_internal_consistency() {
        let p = ModelParams::new(1.0, 400.0, 1.5, 3.0, direct(0.26)).unwrap();
        let f = derive_squeezed_frame(&p).unwrap();
        assert!((f.omega_s - p.omega_b * (2.0 * f.r).exp()).abs() <= 1e-12 * f.omega_s);
        assert!((f.g_s - p.g * (-f.r).exp()).abs() <= 1e-12 * f.g_s);
        assert!((f.gtilde_c_s - f.g_s / f.g_c_s).abs() <= 1e-12 * f.gtilde_c_s);
    }

    #[test]
    fn critical_coupling_reference_points() {
        match critical_coupling(0.0, 0.245) {
            CriticalCoupling::Transition(g) => assert!((g - 0.02f64.sqrt()).abs() < 1e-15),
            other => panic!("expected transition, got {other:?}"),
        }
        match critical_coupling(1.5, 0.26) {
            CriticalCoupling::Transition(g) => assert!((g - 0.08f64.sqrt()).abs() < 1e-15),
            other => panic!("expected transition, got {other:?}"),
        }
        match critical_coupling(0.0, 0.0) {
            CriticalCoupling::Transition(g) => assert_eq!(g, 1.0),
            other => panic!("expected transition, got {other:?}"),
        }
    }

    #[test]
    fn critical_coupling_no_transition_cases() {
        assert_eq!(
            critical_coupling(1.0, 0.1),
            CriticalCoupling::NoTransition(NoTransitionReason::AlphaUnity)
        );
        assert_eq!(
            critical_coupling(0.5, 0.3),
            CriticalCoupling::NoTransition(NoTransitionReason::NonPositiveRadicand)
        );
        assert_eq!(
            critical_coupling(1.5, 0.1),
            CriticalCoupling::NoTransition(NoTransitionReason::NonPositiveRadicand)
        );
    }

    #[test]
    fn critical_point_maps_to_unit_squeezed_coupling() {
        for &(alpha, xi_ratio) in &[(0.0, 0.245), (1.5, 0.26), (0.0, 0.0), (0.3, 0.1)] {
            let CriticalCoupling::Transition(gtc) = critical_coupling(alpha, xi_ratio) else {
                panic!("expected a transition");
            };
            let p = ModelParams::new(1.0, 1000.0, alpha, gtc * (1000.0f64).sqrt() / 2.0, direct(xi_ratio))
                .unwrap();
            let f = derive_squeezed_frame(&p).unwrap();
            assert!(
                (f.gtilde_c_s - 1.0).abs() < 1e-10,
                "gtilde_c_s = {} at alpha={alpha}, xi={xi_ratio}",
                f.gtilde_c_s
            );
        }
    }

    #[test]
    fn frame_from_x_round_trips() {
        let f = frame_from_x(1.0, 1000.0, 1.5, 0.26, 1.2).unwrap();
        assert!((f.gtilde_c_s - 1.2).abs() < 1e-12);
        // Rebuild from physical parameters and compare.
        let p = ModelParams::new(1.0, 1000.0, 1.5, f.gtilde_c * f.g_c, direct(0.26)).unwrap();
        let f2 = derive_squeezed_frame(&p).unwrap();
        assert!((f2.gtilde_c_s - 1.2).abs() < 1e-10);
        assert!((f2.r - f.r).abs() < 1e-12);
    }

    #[test]
    fn frame_from_x_rejects_unreachable() {
        assert!(frame_from_x(1.0, 1e3, 1.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn h_squeezed_decoupled_is_diagonal() {
        let p = ModelParams::new(1.0, 30.0, 0.0, 0.0, direct(0.0)).unwrap();
        let f = derive_squeezed_frame(&p).unwrap();
        let space = HilbertSpace::qubit_boson(4).unwrap();
        let h = build_h_squeezed(&f, &space).unwrap();
        // Spectrum {n omega_s ± Omega/2} sits on the diagonal.
        for n in 0..4 {
            assert_eq!(h.get(n, n).re, n as f64 + 15.0);
            assert_eq!(h.get(4 + n, 4 + n).re, n as f64 - 15.0);
        }
        assert!(h.is_hermitian());
    }

    #[test]
    fn identity_frame_reproduces_effective_model() {
        let p = ModelParams::new(1.0, 50.0, 0.0, 1.3, direct(0.0)).unwrap();
        let f = derive_squeezed_frame(&p).unwrap();
        let space = HilbertSpace::qubit_boson(12).unwrap();
        let hs = build_h_squeezed(&f, &space).unwrap();
        let he = build_h_effective(&p, &space).unwrap();
        assert_eq!(hs.sub(&he).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn quadratic_terms_cancel_exactly() {
        // alpha g^2/Omega = xi makes the effective model match the bare one.
        let g = 1.7;
        let big_omega = 40.0;
        let alpha = 0.8;
        let xi = alpha * g * g / big_omega;
        let with_terms = ModelParams::new(1.0, big_omega, alpha, g, direct(xi)).unwrap();
        let bare = ModelParams::new(1.0, big_omega, 0.0, g, direct(0.0)).unwrap();
        let space = HilbertSpace::qubit_boson(10).unwrap();
        let h1 = build_h_effective(&with_terms, &space).unwrap();
        let h0 = build_h_effective(&bare, &space).unwrap();
        assert_eq!(h1.sub(&h0).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn builders_are_hermitian() {
        let p = ModelParams::new(1.0, 100.0, 1.5, 2.0, direct(0.26)).unwrap();
        let f = derive_squeezed_frame(&p).unwrap();
        let qb = HilbertSpace::qubit_boson(8).unwrap();
        assert!(build_h_squeezed(&f, &qb).unwrap().is_hermitian());
        assert!(build_h_effective(&p, &qb).unwrap().is_hermitian());
        assert!(build_h_squeezed_displaced(&f, &qb, 1.2).unwrap().is_hermitian());

        let lin = ModelParams::new(
            1.0,
            20.0,
            1.0,
            1.0,
            XiSpec::Optomech { g_enh: 0.4, delta_a_tilde: 20.0 },
        )
        .unwrap();
        let three = HilbertSpace::new(true, &[4, 6]).unwrap();
        assert!(build_h_linearized(&lin, &three).unwrap().is_hermitian());

        let single = HilbertSpace::single_boson(8).unwrap();
        let np_frame = frame_from_x(1.0, 100.0, 0.0, 0.0, 0.5).unwrap();
        assert!(build_h_np(&np_frame, &single).unwrap().is_hermitian());
        let sp_frame = frame_from_x(1.0, 100.0, 0.0, 0.0, 1.5).unwrap();
        assert!(build_h_sp(&sp_frame, &single).unwrap().is_hermitian());
    }

    #[test]
    fn parity_commutes_exactly() {
        let p = ModelParams::new(1.0, 100.0, 0.7, 1.4, direct(0.1)).unwrap();
        let f = derive_squeezed_frame(&p).unwrap();
        let space = HilbertSpace::qubit_boson(9).unwrap();
        let parity = parity_operator(&space).unwrap();
        for h in [build_h_squeezed(&f, &space).unwrap(), build_h_effective(&p, &space).unwrap()] {
            let comm = h.matmul(&parity).unwrap().sub(&parity.matmul(&h).unwrap()).unwrap();
            assert_eq!(comm.frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn phase_hamiltonians_enforce_domain() {
        let single = HilbertSpace::single_boson(6).unwrap();
        let np_frame = frame_from_x(1.0, 100.0, 0.0, 0.0, 1.4).unwrap();
        assert!(matches!(
            build_h_np(&np_frame, &single),
            Err(Error::PhaseDomainError(_))
        ));
        let sp_frame = frame_from_x(1.0, 100.0, 0.0, 0.0, 0.4).unwrap();
        assert!(matches!(
            build_h_sp(&sp_frame, &single),
            Err(Error::PhaseDomainError(_))
        ));
    }

    #[test]
    fn h_np_free_limit() {
        let single = HilbertSpace::single_boson(5).unwrap();
        let f = frame_from_x(1.0, 80.0, 0.0, 0.0, 0.0).unwrap();
        let h = build_h_np(&f, &single).unwrap();
        for n in 0..5 {
            assert_eq!(h.get(n, n).re, n as f64 - 40.0);
        }
    }

    #[test]
    fn linearized_requires_optomech_entry() {
        let p = ModelParams::new(1.0, 20.0, 0.0, 1.0, direct(0.01)).unwrap();
        let three = HilbertSpace::new(true, &[4, 6]).unwrap();
        assert!(build_h_linearized(&p, &three).is_err());
    }
}
