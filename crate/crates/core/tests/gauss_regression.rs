//! Truncated Gauss operator at `s = 1`, depth 2: leading data pinned against a
//! dense eigensolve of the matrix built directly from canonical points.

use std::sync::Arc;

use nalgebra::DMatrix;
use ruelle_core::transfer::{leading_eigendata, GibbsScan};
use ruelle_core::{DepthPotential, EigenOptions, TruncatedShift};

const GOLDEN_TAIL: f64 = 0.618_033_988_749_894_9;

/// `A[t, e] = (e + x_t)^{-2}` with `x_t = [0; t, 1, 1, ...]`, sorted moduli.
fn dense_moduli(m: usize) -> Vec<f64> {
    let a = DMatrix::from_fn(m, m, |t, e| {
        let x = 1.0 / ((t + 1) as f64 + GOLDEN_TAIL);
        ((e + 1) as f64 + x).powi(-2)
    });
    let mut moduli: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

fn eigendata(m: usize) -> (f64, f64) {
    let shift = Arc::new(TruncatedShift::full(m).unwrap());
    let u = DepthPotential::gauss(shift, 1.0, 2).unwrap();
    let opts = EigenOptions {
        gibbs: GibbsScan::Off,
        ..EigenOptions::default()
    };
    let spec = leading_eigendata(&u, &opts).unwrap();
    (spec.lambda, spec.gap.dense.unwrap() * spec.lambda)
}

#[test]
fn matches_dense_oracle() {
    for m in [10, 50, 200] {
        let (lambda, second) = eigendata(m);
        let dense = dense_moduli(m);
        assert!((lambda - dense[0]).abs() < 1e-10, "M = {m}: {lambda} vs {}", dense[0]);
        assert!((second - dense[1]).abs() < 1e-10, "M = {m}: {second} vs {}", dense[1]);
    }
}

#[test]
fn pinned_values() {
    let pins = [
        (10, 0.905484, 0.079641),
        (50, 1.011369, 0.112823),
        (200, 1.033435, 0.120660),
        (1000, 1.039449, 0.122854),
    ];
    let mut prev = 0.0;
    for (m, lambda, second) in pins {
        let (l, s) = eigendata(m);
        assert!((l - lambda).abs() < 1e-6, "M = {m}: λ₁ {l}");
        assert!((s - second).abs() < 1e-6, "M = {m}: |λ₂| {s}");
        assert!(l > prev);
        prev = l;
    }
}
