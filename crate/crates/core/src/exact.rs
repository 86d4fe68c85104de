//! Exact comparisons of weighted ratios.
//!
//! A finite positive `f64` is exactly `mantissa * 2^exponent`; together with
//! integer numerators and denominators this lets tie and threshold rules be
//! decided without rounding.

use std::cmp::Ordering;

use num_bigint::BigUint;

/// `x == mantissa * 2^exponent` for finite `x >= 0`.
fn decompose(x: f64) -> (u64, i32) {
    debug_assert!(x.is_finite() && x >= 0.0);
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    }
}

/// A non-negative value `factor * integer` held as an exact big integer
/// shifted by a power of two.
struct Scaled {
    value: BigUint,
    exponent: i32,
}

impl Scaled {
    fn new(factor: f64, integer: u128) -> Self {
        let (m, e) = decompose(factor);
        Scaled {
            value: BigUint::from(m) * BigUint::from(integer),
            exponent: e,
        }
    }

    fn aligned(&self, exponent: i32) -> BigUint {
        &self.value << (self.exponent - exponent) as usize
    }
}

fn cmp_scaled_values(a: &Scaled, b: &Scaled) -> Ordering {
    let e = a.exponent.min(b.exponent);
    a.aligned(e).cmp(&b.aligned(e))
}

/// Compares `a * x` with `b * y` exactly. `a`, `b` may be `+inf`.
pub(crate) fn cmp_products(a: f64, x: u128, b: f64, y: u128) -> Ordering {
    match (a.is_infinite() && x > 0, b.is_infinite() && y > 0) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => cmp_scaled_values(&Scaled::new(a, x), &Scaled::new(b, y)),
    }
}

/// Compares the exact sums of two sets of finite non-negative floats.
pub(crate) fn cmp_sums(left: &[f64], right: &[f64]) -> Ordering {
    let all = left.iter().chain(right);
    let exponent = all.map(|&w| decompose(w).1).min().unwrap_or(0);
    let total = |ws: &[f64]| -> BigUint {
        ws.iter()
            .map(|&w| Scaled::new(w, 1).aligned(exponent))
            .sum()
    };
    total(left).cmp(&total(right))
}
