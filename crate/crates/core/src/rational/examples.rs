//! A one-letter family of rational distributions that no probabilistic
//! automaton computes when `α/π` is irrational, plus printed reference data.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use super::LinearRep;
use crate::error::{Error, Result};

/// `ι = (λ, 0, √2λ)`, `M = ρ [[cos α, −sin α, 0], [sin α, cos α, 0], [0, 0, 1]]`,
/// `τ = (1, 1, 1)`, with `λ` chosen so the series sums to 1. Then
/// `r(aⁿ) = ρⁿ √2 λ [cos(nα + π/4) + 1] ≥ 0`.
pub fn one_letter_example(rho: f64, cos_alpha: f64, sin_alpha: f64) -> Result<LinearRep> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidInput(format!("ρ must lie in (0, 1), got {rho}")));
    }
    if (cos_alpha * cos_alpha + sin_alpha * sin_alpha - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("cos²α + sin²α must equal 1".into()));
    }
    // √2 ρ cos(α − π/4) = ρ (cos α + sin α).
    let rotational = (1.0 - rho * (cos_alpha + sin_alpha)) / (1.0 + rho * rho - 2.0 * rho * cos_alpha);
    let lambda = 1.0 / (rotational + SQRT_2 / (1.0 - rho));
    let m =
        DMatrix::from_row_slice(3, 3, &[cos_alpha, -sin_alpha, 0.0, sin_alpha, cos_alpha, 0.0, 0.0, 0.0, 1.0]) * rho;
    LinearRep::one_letter(DVector::from_vec(vec![lambda, 0.0, SQRT_2 * lambda]), m, DVector::from_element(3, 1.0))
}

/// A six-state representation of the `ρ = 0.75`, `cos α = 3/5` member whose
/// coefficient-wise absolute values give a convergent series (four decimals).
pub fn abs_convergent_fixture() -> LinearRep {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(6, 6, &[
        0.0,    0.5675,  0.0,    0.0,    0.0,    0.0,
        0.0,    0.0,     0.7125, 0.0,    0.0,    0.0,
        0.0,    0.0,     0.0,    0.9566, 0.0,    0.0,
        0.0,    0.0,     0.0,    0.0,    0.9753, 0.0,
        0.0,    0.0,     0.0,    0.0,    0.0,    0.8334,
        0.5662, -0.1571, 0.0,    0.0,    0.0,    0.2750,
    ]);
    let mut iota = DVector::zeros(6);
    iota[0] = 1.0;
    let tau = DVector::from_vec(vec![0.4325, 0.2875, 0.0434, 0.0247, 0.1666, 0.3159]);
    LinearRep::one_letter(iota, m, tau).expect("fixture shapes agree")
}

/// The positive-part automaton of the `ρ = 0.5` member, three decimals.
pub fn printed_pa_plus() -> LinearRep {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(5, 5, &[
        0.300, 0.0, 0.0, 0.0, 0.173,
        0.302, 0.3, 0.0, 0.0, 0.0,
        0.0,   0.0, 0.5, 0.0, 0.0,
        0.0,   0.7, 0.0, 0.3, 0.0,
        0.0,   0.0, 0.0, 0.7, 0.300,
    ]);
    LinearRep::one_letter(
        DVector::from_vec(vec![0.4015, 0.0, 0.5985, 0.0, 0.0]),
        m,
        DVector::from_vec(vec![0.527, 0.398, 0.5, 0.0, 0.0]),
    )
    .expect("fixture shapes agree")
}

/// The negative-part automaton of the `ρ = 0.5` member, three decimals.
pub fn printed_pa_minus() -> LinearRep {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        0.300, 0.0, 0.0, 0.173,
        0.302, 0.3, 0.0, 0.0,
        0.0,   0.7, 0.3, 0.0,
        0.0,   0.0, 0.7, 0.300,
    ]);
    LinearRep::one_letter(
        DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]),
        m,
        DVector::from_vec(vec![0.527, 0.398, 0.0, 0.0]),
    )
    .expect("fixture shapes agree")
}
