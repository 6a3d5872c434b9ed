//! Rational and quadrature constants of the fixed-point pairing, and the
//! resolvent-average identity used by the projector entries.

use num_complex::Complex64;
use num_rational::Ratio;

use crate::manifold::gauss_legendre;
use crate::Result;

const PI: f64 = std::f64::consts::PI;

/// The constants attached to a degree-`2q` pairing.
#[derive(Debug, Clone)]
pub struct PairingConstants {
    pub q: usize,
    /// `α_q = q!/(2q+1)!` exactly.
    pub alpha_exact: Ratio<i64>,
    /// `β_q = ∫_1^2 … ∫_1^2 (1+s_1+…+s_q)^{-q} ds` by quadrature.
    pub beta: f64,
    /// `δ_q = β_q - ((q+2)/2) α_q`.
    pub delta: f64,
    /// `c(q,n) = 2 (-1)^q q! / ((2πi)^q (2q)!)` as a complex number.
    pub c_qn: Complex64,
    /// Exact description of `c(q,n)`: the rational `2 (-1)^q q!/(2q)!` and
    /// the power of `(2πi)` it divides by.
    pub c_qn_rational: Ratio<i64>,
    pub c_qn_pi_power: usize,
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product::<i64>().max(1)
}

/// Integrals over `[1,2]^q` of functions of the sum `σ = Σ s_i` reduce to a
/// one-dimensional integral against the Irwin-Hall density of `σ - q`:
/// `f(x) = (1/(q-1)!) Σ_k (-1)^k C(q,k) (x-k)_+^{q-1}` on `[0, q]`.
fn irwin_hall_pdf(q: usize, x: f64) -> f64 {
    if q == 0 {
        return 0.0;
    }
    let mut fact = 1.0;
    for i in 1..q {
        fact *= i as f64;
    }
    let mut acc = 0.0;
    let mut binom = 1.0f64;
    for k in 0..=(x.floor() as usize).min(q) {
        if k > 0 {
            binom *= (q - k + 1) as f64 / k as f64;
        }
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += s * binom * (x - k as f64).max(0.0).powi(q as i32 - 1);
    }
    acc / fact
}

/// Integral of `g(Σ s_i)` over `[1,2]^q` via the Irwin-Hall reduction, with
/// per-unit-interval Gauss-Legendre of the given order.
pub fn sum_integral<G: Fn(f64) -> f64>(q: usize, order: usize, g: G) -> f64 {
    if q == 0 {
        return g(0.0);
    }
    let (xs, ws) = gauss_legendre(order);
    let mut total = 0.0;
    for piece in 0..q {
        let (a, b) = (piece as f64, piece as f64 + 1.0);
        for (x, w) in xs.iter().zip(&ws) {
            let u = 0.5 * (b - a) * x + 0.5 * (a + b);
            total += 0.5 * (b - a) * w * irwin_hall_pdf(q, u) * g(q as f64 + u);
        }
    }
    total
}

/// `∫_{[1,2]^q} (1 + Σ s_i)^p ds`.
pub fn iterated_integral(q: usize, p: i32, order: usize) -> f64 {
    if q == 0 {
        return 1.0;
    }
    sum_integral(q, order, |s| (1.0 + s).powi(p))
}

/// `∫_{[1,2]^q} (Σ s_i - q/2)(1 + Σ s_i)^{-q-1} ds`, used to recompute `δ_q`
/// independently of the printed relation.
pub fn delta_integral(q: usize, order: usize) -> f64 {
    if q == 0 {
        return -1.0; // degree 0 has no s-variables; unused
    }
    sum_integral(q, order, |s| (s - q as f64 / 2.0) * (1.0 + s).powi(-(q as i32) - 1))
}

/// All pairing constants for degree `2q` on an even-dimensional model.
pub fn constants(q: usize, n: usize) -> Result<PairingConstants> {
    if n % 2 != 0 {
        return Err(crate::Error::Config("pairing constants require even dimension".into()));
    }
    let alpha_exact = Ratio::new(factorial(q), factorial(2 * q + 1));
    let beta = iterated_integral(q, -(q as i32), 32);
    let alpha = *alpha_exact.numer() as f64 / *alpha_exact.denom() as f64;
    let delta = beta - (q as f64 + 2.0) / 2.0 * alpha;
    let c_qn_rational = Ratio::new(2 * sign(q) * factorial(q), factorial(2 * q));
    // (2πi)^{-q} = (2π)^{-q} · i^{-q}
    let inv_i_pow = match q % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    let c_qn = Complex64::new(
        *c_qn_rational.numer() as f64 / *c_qn_rational.denom() as f64 * (2.0 * PI).powi(-(q as i32)),
        0.0,
    ) * inv_i_pow;
    Ok(PairingConstants { q, alpha_exact, beta, delta, c_qn, c_qn_rational, c_qn_pi_power: q })
}

fn sign(q: usize) -> i64 {
    if q % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Both sides of the resolvent-average identity
/// `((1-e^{-tx})/(tx)) e^{-tx/2} = ∫_{1/2}^{3/2} e^{-stx} ds`,
/// the right side by adaptive Gauss-Legendre.
pub fn cm_h_identity(x: f64, t: f64) -> (f64, f64) {
    let tx = t * x;
    let lhs = if tx.abs() < 1e-8 {
        // series: (1-e^{-u})/u · e^{-u/2} = 1 - u²/24 + O(u³) around u=0
        1.0 - tx * tx / 24.0
    } else {
        (1.0 - (-tx).exp()) / tx * (-tx / 2.0).exp()
    };
    let rhs = adaptive_exp_integral(tx, 0.5, 1.5, 1e-14, 0);
    (lhs, rhs)
}

fn adaptive_exp_integral(u: f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let coarse = gl_exp(u, a, b, 8);
    let mid = 0.5 * (a + b);
    let fine = gl_exp(u, a, mid, 8) + gl_exp(u, mid, b, 8);
    if (fine - coarse).abs() <= tol * fine.abs().max(1e-300) || depth >= 24 {
        fine
    } else {
        adaptive_exp_integral(u, a, mid, tol / 2.0, depth + 1)
            + adaptive_exp_integral(u, mid, b, tol / 2.0, depth + 1)
    }
}

fn gl_exp(u: f64, a: f64, b: f64, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let s = 0.5 * (b - a) * x + 0.5 * (a + b);
        acc += 0.5 * (b - a) * w * (-s * u).exp();
    }
    acc
}
