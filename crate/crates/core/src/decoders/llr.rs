//! Scalar LLR rules used by every recursive decoder.

use crate::error::{check_len, Result};
use crate::eval::opcount::{OpCounter, Ops};

/// `LSE(a, b) = log((1 + e^{a+b}) / (e^a + e^b))`, the LLR of the XOR of two
/// independent bits. Evaluated as
/// `sign(a)·sign(b)·min(|a|,|b|) + ln(1+e^{−|a+b|}) − ln(1+e^{−|a−b|})`.
#[inline]
pub fn lse(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// Partial derivatives of [`lse`]: ∂/∂a = σ(a+b) − σ(a−b), ∂/∂b = σ(a+b) − σ(b−a).
#[inline]
pub fn lse_grad(a: f64, b: f64) -> (f64, f64) {
    let s = sigmoid(a + b);
    (s - sigmoid(a - b), s - sigmoid(b - a))
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sign-domain expectation of a bit with LLR `l`: P(0) − P(1) = tanh(l/2).
#[inline]
pub fn soft_sign(l: f64) -> f64 {
    (0.5 * l).tanh()
}

/// Hard decision: 1 iff the LLR is negative.
#[inline]
pub fn hard_bit(l: f64) -> u8 {
    u8::from(l < 0.0)
}

/// Element-wise LSE of two halves.
pub fn lse_halves(l1: &[f64], l2: &[f64], ops: &mut impl Ops) -> Vec<f64> {
    ops.lse(l1.len());
    l1.iter().zip(l2).map(|(&a, &b)| lse(a, b)).collect()
}

/// `L1 ⊕_v L2 = L1 + (−1)^v L2`, with the parity given in the sign domain
/// (s = (−1)^v for hard bits, s ∈ [−1, 1] for soft estimates).
pub fn parity_adjusted_add(l1: &[f64], l2: &[f64], signs: &[f64]) -> Result<Vec<f64>> {
    check_len(l1.len(), l2.len())?;
    check_len(l1.len(), signs.len())?;
    Ok(parity_add_unchecked(l1, l2, signs, &mut ()))
}

pub(crate) fn parity_add_unchecked(l1: &[f64], l2: &[f64], signs: &[f64], ops: &mut impl Ops) -> Vec<f64> {
    ops.add(l1.len());
    ops.mul(l1.len());
    l1.iter().zip(l2).zip(signs).map(|((&a, &b), &s)| a + s * b).collect()
}

/// Same rule with hard parity bits.
pub fn parity_adjusted_add_bits(l1: &[f64], l2: &[f64], v: &[u8]) -> Result<Vec<f64>> {
    let signs: Vec<f64> = v.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect();
    parity_adjusted_add(l1, l2, &signs)
}

/// Majority (= MAP) decision for a repetition code: 1 iff ΣL < 0.
pub fn majority_decode_repetition(l: &[f64]) -> u8 {
    majority_counted(l, &mut ())
}

pub(crate) fn majority_counted(l: &[f64], ops: &mut impl Ops) -> u8 {
    ops.add(l.len().saturating_sub(1));
    ops.cmp(1);
    hard_bit(l.iter().sum())
}

/// Counts for a single decode call can also be taken with a concrete counter.
pub fn majority_ops(len: usize) -> OpCounter {
    let mut c = OpCounter::default();
    majority_counted(&vec![0.0; len], &mut c);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lse_direct(a: f64, b: f64) -> f64 {
        ((1.0 + (a + b).exp()) / (a.exp() + b.exp())).ln()
    }

    #[test]
    fn lse_examples() {
        assert_eq!(lse(0.0, 0.0), 0.0);
        assert!((lse(1.0, 1.0) - 0.433_781).abs() < 1e-6);
        assert!((lse(1.0, 1.0) - ((1.0 + 1f64.exp().powi(2)) / (2.0 * 1f64.exp())).ln()).abs() < 1e-15);
        let v = lse(10.0, -3.0);
        assert!(v < 0.0 && v.abs() < 3.0 && v < -2.99);
        assert!((v - lse_direct(10.0, -3.0)).abs() < 1e-12);
        // stable far beyond where the direct ratio overflows
        assert!((lse(700.0, 650.0) - 650.0).abs() < 1e-9);
        assert!((lse(-900.0, 800.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn lse_gradient_closed_form() {
        let (da, db) = lse_grad(1.0, 1.0);
        assert!((da - 0.380_797_077_977_882_3).abs() < 1e-12);
        assert_eq!(da, db);
        let h = 1e-6;
        let fd = (lse(1.0 + h, 1.0) - lse(1.0 - h, 1.0)) / (2.0 * h);
        assert!((fd - da).abs() < 1e-6);
    }

    #[test]
    fn parity_rule() {
        let l1 = [1.0, 2.0];
        let l2 = [3.0, 4.0];
        assert_eq!(parity_adjusted_add_bits(&l1, &l2, &[0, 0]).unwrap(), vec![4.0, 6.0]);
        assert_eq!(parity_adjusted_add_bits(&l1, &l2, &[1, 1]).unwrap(), vec![-2.0, -2.0]);
        assert_eq!(parity_adjusted_add_bits(&l1, &l2, &[0, 1]).unwrap(), vec![4.0, -2.0]);
        assert!(parity_adjusted_add(&l1, &l2, &[1.0]).is_err());
    }

    #[test]
    fn majority() {
        assert_eq!(majority_decode_repetition(&[2.0, -1.0, 0.5, 0.5]), 0);
        assert_eq!(majority_decode_repetition(&[-1.0; 4]), 1);
        assert_eq!(majority_decode_repetition(&[1.0, -1.0]), 0);
        let c = majority_ops(4);
        assert_eq!((c.add, c.cmp), (3, 1));
    }

    proptest! {
        #[test]
        fn lse_properties(a in -30.0f64..30.0, b in -30.0f64..30.0) {
            let v = lse(a, b);
            prop_assert!((v - lse(b, a)).abs() < 1e-12);
            prop_assert!(v.abs() <= a.abs().min(b.abs()) + 1e-12);
            prop_assert!((v - lse_direct(a, b)).abs() < 1e-9);
            prop_assert_eq!(lse(0.0, a), 0.0);
            if a.abs() > 1e-9 && b.abs() > 1e-9 {
                prop_assert_eq!(v < 0.0, (a < 0.0) != (b < 0.0));
            }
        }
    }
}
