//! Fourth-order finite differences on uniform grids.

use std::ops::{Add, Mul, Sub};

use crate::scalar::Real;

const D1_CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2_CENTRAL: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
// one-sided stencils for the first two points, over f[0..6]
const D1_EDGE: [[f64; 6]; 2] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0, 0.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0, 0.0],
];
const D2_EDGE: [[f64; 6]; 2] = [
    [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
    [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
];

fn dot<T, V>(w: &[f64], f: &[V]) -> V
where
    T: Real,
    V: Copy + Add<Output = V> + Mul<T, Output = V> + Default,
{
    w.iter().zip(f).fold(V::default(), |acc, (w, v)| acc + *v * T::lit(*w))
}

/// First and second derivatives of uniformly spaced samples, 4th order
/// everywhere (one-sided near the edges). Needs at least 6 samples.
pub fn derivatives<T, V>(f: &[V], h: T) -> (Vec<V>, Vec<V>)
where
    T: Real,
    V: Copy + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V> + Default,
{
    let n = f.len();
    assert!(n >= 6, "stencil needs at least 6 samples");
    let s1 = T::one() / (T::lit(12.0) * h);
    let s2 = T::one() / (T::lit(12.0) * h * h);
    let mut d1 = vec![V::default(); n];
    let mut d2 = vec![V::default(); n];
    for i in 2..n - 2 {
        d1[i] = dot::<T, V>(&D1_CENTRAL, &f[i - 2..i + 3]) * s1;
        d2[i] = dot::<T, V>(&D2_CENTRAL, &f[i - 2..i + 3]) * s2;
    }
    let rev: Vec<V> = f[n - 6..].iter().rev().copied().collect();
    for k in 0..2 {
        d1[k] = dot::<T, V>(&D1_EDGE[k], &f[..6]) * s1;
        d2[k] = dot::<T, V>(&D2_EDGE[k], &f[..6]) * s2;
        // mirrored: the first derivative changes sign
        d1[n - 1 - k] = V::default() - dot::<T, V>(&D1_EDGE[k], &rev) * s1;
        d2[n - 1 - k] = dot::<T, V>(&D2_EDGE[k], &rev) * s2;
    }
    (d1, d2)
}
