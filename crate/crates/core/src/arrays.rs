//! Uniform linear and planar array responses.
//!
//! Responses are unnormalized: every entry has unit modulus and the phase
//! reference is the array centre.

use crate::linalg::kron_vec;
use crate::scalar::{cis, Cx, Real};
use crate::scenario::{ArrayGeometry, ArrayPlane};

/// Steering vector of a uniform linear array along one axis.
///
/// Entry `m` is `exp(j·2π·(spacing/λ)·(m − (count−1)/2)·direction_cosine)`.
pub fn steer_axis<T: Real>(count: usize, spacing: T, wavelength: T, direction_cosine: T) -> Vec<Cx<T>> {
    let step = T::TAU() * spacing / wavelength * direction_cosine;
    let centre = T::from_usize_lossy(count.saturating_sub(1)) * T::lit(0.5);
    (0..count)
        .map(|m| cis(step * (T::from_usize_lossy(m) - centre)))
        .collect()
}

/// Direction cosines along the geometry's two axes `(a, b)`.
pub fn axis_cosines<T: Real>(plane: ArrayPlane, azimuth: T, elevation: T) -> (T, T) {
    let (sa, ca) = azimuth.sin_cos();
    let (se, ce) = elevation.sin_cos();
    match plane {
        ArrayPlane::Xy => (ca * se, sa * se),
        ArrayPlane::Yz => (sa * se, ce),
    }
}

/// Planar array response `α_a ⊗ α_b`; element `(i_a, i_b)` sits at index
/// `i_a·count_b + i_b`.
pub fn upa_response<T: Real>(geometry: &ArrayGeometry, wavelength: T, azimuth: T, elevation: T) -> Vec<Cx<T>> {
    let (ua, ub) = axis_cosines(geometry.plane, azimuth, elevation);
    let a = steer_axis(geometry.count_a, T::lit(geometry.spacing_a), wavelength, ua);
    let b = steer_axis(geometry.count_b, T::lit(geometry.spacing_b), wavelength, ub);
    kron_vec(&a, &b)
}

/// Element coordinates relative to the array centre, in the same order as
/// [`upa_response`].
pub fn element_offsets(geometry: &ArrayGeometry) -> Vec<[f64; 3]> {
    let ca = (geometry.count_a as f64 - 1.0) / 2.0;
    let cb = (geometry.count_b as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(geometry.len());
    for ia in 0..geometry.count_a {
        for ib in 0..geometry.count_b {
            let pa = (ia as f64 - ca) * geometry.spacing_a;
            let pb = (ib as f64 - cb) * geometry.spacing_b;
            out.push(match geometry.plane {
                ArrayPlane::Xy => [pa, pb, 0.0],
                ArrayPlane::Yz => [0.0, pa, pb],
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(plane: ArrayPlane, a: usize, b: usize, d: f64) -> ArrayGeometry {
        ArrayGeometry {
            count_a: a,
            count_b: b,
            spacing_a: d,
            spacing_b: d,
            plane,
        }
    }

    #[test]
    fn two_elements_endfire() {
        let v = steer_axis(2, 0.5f64, 1.0, 1.0);
        assert!((v[0] - Cx::new(0.0, -1.0)).norm() < 1e-15);
        assert!((v[1] - Cx::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn single_element_and_broadside() {
        assert_eq!(steer_axis(1, 0.3f64, 0.01, 0.7), vec![Cx::new(1.0, 0.0)]);
        for z in steer_axis(9, 0.5f64, 1.0, 0.0) {
            assert_eq!(z, Cx::new(1.0, 0.0));
        }
        let g = geom(ArrayPlane::Xy, 2, 2, 0.5);
        // Straight up: both xy direction cosines vanish.
        for z in upa_response(&g, 1.0f64, 0.3, 0.0) {
            assert!((z - Cx::new(1.0, 0.0)).norm() < 1e-15);
        }
        assert_eq!(upa_response(&geom(ArrayPlane::Yz, 1, 1, 0.5), 1.0f64, 1.0, 1.0).len(), 1);
    }

    #[test]
    fn matches_explicit_double_loop() {
        let lambda = 0.0107f64;
        for plane in [ArrayPlane::Xy, ArrayPlane::Yz] {
            for (a, b) in [(1, 4), (3, 2), (4, 4)] {
                let g = geom(plane, a, b, lambda / 2.0);
                let (az, el) = (0.7f64, 2.1f64);
                let dir = [az.cos() * el.sin(), az.sin() * el.sin(), el.cos()];
                let got = upa_response(&g, lambda, az, el);
                let offsets = element_offsets(&g);
                for (idx, p) in offsets.iter().enumerate() {
                    let phase = std::f64::consts::TAU / lambda * (p[0] * dir[0] + p[1] * dir[1] + p[2] * dir[2]);
                    assert!((got[idx] - cis(phase)).norm() < 1e-12, "{plane:?} {a}x{b} idx {idx}");
                }
            }
        }
    }

    #[test]
    fn single_precision() {
        let v = steer_axis(4, 0.5f32, 1.0, 0.3);
        assert!(v.iter().all(|z| (z.norm() - 1.0).abs() < 1e-6));
    }

    proptest! {
        #[test]
        fn unit_modulus_and_conjugate_symmetry(n in 1usize..40, d in 0.1..2.0f64, u in -1.0..1.0f64) {
            let v = steer_axis(n, d, 1.0, u);
            for m in 0..n {
                prop_assert!((v[m].norm() - 1.0).abs() < 1e-14);
                prop_assert!((v[m] - v[n - 1 - m].conj()).norm() < 1e-12);
            }
        }

        #[test]
        fn upa_norm(a in 1usize..8, b in 1usize..8, az in -3.2..3.2f64, el in 0.0..3.15f64) {
            let g = geom(ArrayPlane::Xy, a, b, 0.5);
            let v = upa_response(&g, 1.0, az, el);
            let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((n2 - (a * b) as f64).abs() < 1e-10);
        }
    }
}
