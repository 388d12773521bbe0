//! Independent brute-force Fock-space oracles for the integration suites.
//!
//! Everything here works directly on amplitude vectors with hand-written
//! ladder recursions — deliberately independent of the crate's sparse
//! operator machinery, so agreement between the two is evidence, not
//! tautology.

#![allow(dead_code)]

use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    for z in v.iter_mut() {
        *z /= n;
    }
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `b |v>` on Fock amplitudes: `(b v)[n] = sqrt(n+1) v[n+1]`.
pub fn apply_lower(v: &[Complex64]) -> Vec<Complex64> {
    let d = v.len();
    (0..d)
        .map(|n| if n + 1 < d { v[n + 1] * ((n + 1) as f64).sqrt() } else { c(0.0, 0.0) })
        .collect()
}

/// `b† |v>`: `(b† v)[n] = sqrt(n) v[n-1]`.
pub fn apply_raise(v: &[Complex64]) -> Vec<Complex64> {
    let d = v.len();
    (0..d)
        .map(|n| if n > 0 { v[n - 1] * (n as f64).sqrt() } else { c(0.0, 0.0) })
        .collect()
}

/// `P |v>` with `P = (b - b†)/(2i)`.
pub fn apply_p(v: &[Complex64]) -> Vec<Complex64> {
    let lower = apply_lower(v);
    let raise = apply_raise(v);
    lower
        .iter()
        .zip(&raise)
        .map(|(lo, hi)| (lo - hi) * c(0.0, -0.5))
        .collect()
}

/// Coherent state `|beta>` from the exact amplitude recursion
/// `c_n = c_{n-1} beta / sqrt(n)`.
pub fn coherent(beta: f64, cutoff: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); cutoff];
    v[0] = c(1.0, 0.0);
    for n in 1..cutoff {
        v[n] = v[n - 1] * (beta / (n as f64).sqrt());
    }
    normalize(&mut v);
    v
}

/// Squeezed vacuum `S(t)|0>` with `S(t) = exp[t(b†² - b²)/2]`, from the
/// two-term recursion implied by `(b cosh t - b† sinh t) S(t)|0> = 0`:
/// `c_{2m} = tanh(t) sqrt((2m-1)/(2m)) c_{2m-2}`.
pub fn squeezed_vacuum(t: f64, cutoff: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); cutoff];
    v[0] = c(1.0, 0.0);
    let th = t.tanh();
    let mut m = 2usize;
    while m < cutoff {
        let f = th * ((m - 1) as f64 / m as f64).sqrt();
        v[m] = v[m - 2] * f;
        m += 2;
    }
    normalize(&mut v);
    v
}

/// Displace a state: `exp[beta(b† - b)] |v>` via a scaled Taylor series.
pub fn displace(v: &[Complex64], beta: f64) -> Vec<Complex64> {
    let d = v.len();
    // ||beta (b† - b)|| <= 2 |beta| sqrt(d); scale so each factor is tame.
    let bound = 2.0 * beta.abs() * (d as f64).sqrt();
    let steps = bound.ceil().max(1.0) as usize;
    let step = beta / steps as f64;
    let mut out = v.to_vec();
    for _ in 0..steps {
        let mut acc = out.clone();
        let mut term = out.clone();
        for k in 1..200 {
            let raised = apply_raise(&term);
            let lowered = apply_lower(&term);
            let f = step / k as f64;
            for i in 0..d {
                term[i] = (raised[i] - lowered[i]) * f;
            }
            let mut tn = 0.0;
            for i in 0..d {
                acc[i] += term[i];
                tn += term[i].norm_sqr();
            }
            if tn.sqrt() < 1e-16 {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Displaced squeezed state `D(beta) S(t) |0>`.
pub fn displaced_squeezed(beta: f64, t: f64, cutoff: usize) -> Vec<Complex64> {
    let mut v = displace(&squeezed_vacuum(t, cutoff), beta);
    normalize(&mut v);
    v
}

/// `g²(0)` from the Fock distribution: `sum n(n-1) p_n / (sum n p_n)²`.
pub fn g2_from_amplitudes(v: &[Complex64]) -> f64 {
    let mut n_mean = 0.0;
    let mut n2 = 0.0;
    for (n, z) in v.iter().enumerate() {
        let p = z.norm_sqr();
        n_mean += n as f64 * p;
        n2 += (n * (n.saturating_sub(1))) as f64 * p;
    }
    n2 / (n_mean * n_mean)
}

/// Mean occupation from amplitudes.
pub fn occupation(v: &[Complex64]) -> f64 {
    v.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()
}

/// `<(ΔP)^order>` by repeated application of `P - <P>`.
pub fn p_central_moment(v: &[Complex64], order: usize) -> f64 {
    let pv = apply_p(v);
    let p_mean = inner(v, &pv).re;
    let mut cur = v.to_vec();
    for _ in 0..order {
        let pc = apply_p(&cur);
        for i in 0..cur.len() {
            cur[i] = pc[i] - cur[i] * p_mean;
        }
    }
    inner(v, &cur).re
}

/// Normal-ordered centered moments `<:(ΔP)^m:>` for even m up to `max`,
/// from `<(δb†)^j (δb)^k>` inner products.
pub fn normal_ordered_p_moments(
    v: &[Complex64],
    max: usize,
) -> std::collections::BTreeMap<usize, f64> {
    let lowered = apply_lower(v);
    let b_mean = inner(v, &lowered);
    let mut powers: Vec<Vec<Complex64>> = vec![v.to_vec()];
    for j in 1..=max {
        let prev = &powers[j - 1];
        let low = apply_lower(prev);
        let next: Vec<Complex64> =
            low.iter().zip(prev).map(|(l, p)| l - p * b_mean).collect();
        powers.push(next);
    }
    let mut result = std::collections::BTreeMap::new();
    for m in (2..=max).step_by(2) {
        let mut total = Complex64::new(0.0, 0.0);
        let mut binom = 1.0f64;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total += inner(&powers[j], &powers[m - j]) * (sign * binom);
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
        let scale = (-4.0f64).powi(-((m / 2) as i32));
        result.insert(m, (total * scale).re);
    }
    result
}

/// Least-squares slope of ln(y) vs ln(x); duplicated here so the
/// acceptance fit does not depend on the implementation being checked.
pub fn slope_loglog(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}
