//! Closed-form bound for a strongly damped scalar inclusion
//! `N⁻ ≤ x' + λx ≤ N⁺`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// `[N_l⁻, N_l⁺]` per tail coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipativeBounds {
    pub n: Vec<Interval>,
}

/// `[x₀⁻e^{-λh} + (N⁻/λ)(1-e^{-λh}), x₀⁺e^{-λh} + (N⁺/λ)(1-e^{-λh})]`
/// with `λ = inf |A_ll|`.
///
/// `n` must already contain `(A_ll + λ)x` over the enclosure, so that only
/// the point rate `λ` remains on the left.
pub fn dissipative_step(a_ll: Interval, n: Interval, x0: Interval, step: Interval) -> Result<Interval> {
    if !(a_ll.hi() < 0.0) {
        return Err(Error::Config(format!("A_ll = {a_ll} is not strictly negative")));
    }
    let lambda = Interval::point(-a_ll.hi());
    let y = -(lambda * step);
    let e = y.exp();
    // (1 - e^{-λh})/λ = h φ(-λh)
    let phi = step * y.exprel();
    let lo = Interval::point(x0.lo()) * e + Interval::point(n.lo()) * phi;
    let hi = Interval::point(x0.hi()) * e + Interval::point(n.hi()) * phi;
    Interval::new(lo.lo(), hi.hi()).map_err(Into::into)
}
