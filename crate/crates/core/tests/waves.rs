use std::f64::consts::PI;

use layered_gsm::specfun::{angular_functions, legendre_table};
use layered_gsm::waves::*;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn norm(v: &Vec3) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &Vec3, b: &Vec3) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn idx(tau: Polarization, parity: Parity, m: usize, l: usize) -> SvwfIndex {
    SvwfIndex::new(tau, parity, m, l).unwrap()
}

#[test]
fn basis_size_and_positions() {
    let b = SvwfBasis::new(17).unwrap();
    assert_eq!(b.len(), 646);
    assert_eq!(basis_size(17), 646);
    for (p, n) in b.indices().iter().enumerate() {
        assert_eq!(b.position(n), Some(p));
        assert_eq!(b.get(p), Some(*n));
    }
    assert!(SvwfIndex::new(Polarization::Te, Parity::Odd, 0, 1).is_err());
    assert!(SvwfIndex::new(Polarization::Te, Parity::Even, 3, 2).is_err());
}

#[test]
fn b_coefficient_selection() {
    let u = c(0.3, 0.0);
    let t = angular_functions(&legendre_table(u, 5).unwrap());
    let n = idx(Polarization::Te, Parity::Even, 0, 1);
    assert_eq!(b_coefficient(&n, Polarization::Tm, &t, false), c(0.0, 0.0));
    for l in 1..=5 {
        for m in 0..=l {
            let n = idx(Polarization::Te, Parity::Even, m, l);
            let jl1 = c(0.0, 1.0).powu(l as u32 + 1);
            let b = b_coefficient(&n, Polarization::Te, &t, false);
            assert!((b - jl1 * t.delta(l, m)).norm() < 1e-14);
        }
    }
}

#[test]
fn dagger_is_conjugate_for_real_u() {
    for k in 0..=40 {
        let u = c(-1.0 + 0.05 * k as f64, 0.0);
        let t = angular_functions(&legendre_table(u, 5).unwrap());
        for n in SvwfBasis::new(5).unwrap().indices() {
            for i in [Polarization::Te, Polarization::Tm] {
                let b = b_coefficient(n, i, &t, false);
                let bd = b_coefficient(n, i, &t, true);
                assert!((bd - b.conj()).norm() <= 1e-13 * (1.0 + b.norm()), "{n} u={u}");
            }
        }
    }
}

#[test]
fn azimuthal_integral_examples() {
    let a = idx(Polarization::Te, Parity::Even, 0, 1);
    assert!((azimuthal_integral(&a, &a, Polarization::Te) - 2.0 * PI).abs() < 1e-15);
    let b = idx(Polarization::Te, Parity::Even, 2, 2);
    assert!((azimuthal_integral(&b, &b, Polarization::Te) - PI).abs() < 1e-15);
    let d = idx(Polarization::Te, Parity::Even, 1, 2);
    assert_eq!(azimuthal_integral(&b, &d, Polarization::Te), 0.0);
}

#[test]
fn azimuthal_integral_matches_trapezoid() {
    let basis = SvwfBasis::new(4).unwrap();
    let n_pts = 10_000;
    let h = 2.0 * PI / n_pts as f64;
    for n in basis.indices() {
        for n2 in basis.indices() {
            for i in [Polarization::Te, Polarization::Tm] {
                let q: f64 = (0..n_pts)
                    .map(|s| {
                        let beta = s as f64 * h;
                        azimuthal_factor(n, i, beta) * azimuthal_factor(n2, i, beta)
                    })
                    .sum::<f64>()
                    * h;
                assert!((q - azimuthal_integral(n, n2, i)).abs() < 1e-8, "{n} {n2} i={i:?}: {q}");
            }
        }
    }
}

#[test]
fn plane_waves_at_origin_and_transversality() {
    let dir = PlaneWaveDirection::from_angles(0.7, 1.9);
    let phi1 = eval_pvwf(Polarization::Te, &dir, 10.0, [0.0; 3]);
    let bh = dir.beta_hat();
    for cpt in 0..3 {
        assert!((phi1[cpt] - c(0.0, 1.0) / (4.0 * PI) * bh[cpt]).norm() < 1e-15);
    }
    for dir in [dir, PlaneWaveDirection::new(c(0.0, 0.8), 0.4), PlaneWaveDirection::new(c(-0.3, 0.0), 5.0)] {
        let g = dir.gamma_hat();
        for i in [Polarization::Te, Polarization::Tm] {
            let f = eval_pvwf(i, &dir, 10.0, [0.01, -0.02, 0.03]);
            assert!(dot(&g, &f).norm() < 1e-14 * norm(&f));
        }
    }
}

fn curl(f: impl Fn([f64; 3]) -> Vec3, r: [f64; 3], h: f64) -> Vec3 {
    let d = |axis: usize, comp: usize| {
        let (mut a, mut b) = (r, r);
        a[axis] += h;
        b[axis] -= h;
        (f(a)[comp] - f(b)[comp]) / (2.0 * h)
    };
    [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
}

#[test]
fn te_plane_wave_curl_is_tm_wave() {
    let k = 12.0;
    let dir = PlaneWaveDirection::from_angles(2.2, 0.6);
    let r = [0.03, 0.05, -0.02];
    let cf = curl(|p| eval_pvwf(Polarization::Te, &dir, k, p), r, 1e-5);
    let phi2 = eval_pvwf(Polarization::Tm, &dir, k, r);
    let want: Vec3 = phi2.map(|x| k * x);
    let err = norm(&[cf[0] - want[0], cf[1] - want[1], cf[2] - want[2]]);
    assert!(err <= 1e-6 * norm(&want), "{err}");
}

#[test]
fn spherical_waves_at_origin() {
    for n in SvwfBasis::new(4).unwrap().indices() {
        let v = eval_svwf(WaveKind::Regular, n, 5.0, [0.0; 3]).unwrap();
        if n.l >= 2 || n.tau == Polarization::Te {
            assert_eq!(norm(&v), 0.0, "{n}");
        }
        assert!(eval_svwf(WaveKind::Outgoing, n, 5.0, [0.0; 3]).is_err());
    }
}

#[test]
fn outgoing_te_waves_are_transverse_far_out() {
    let k = 10.0;
    let r_len = 50.0 / k;
    for n in SvwfBasis::new(4).unwrap().indices().iter().filter(|n| n.tau == Polarization::Te) {
        for &(th, ph) in &[(0.4f64, 0.3f64), (1.3, 2.0), (2.5, 4.1)] {
            let rhat = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let v = eval_svwf(WaveKind::Outgoing, n, k, rhat.map(|x| x * r_len)).unwrap();
            let radial: Complex64 = v.iter().zip(&rhat).map(|(a, b)| a * b).sum();
            assert!(radial.norm() <= 1e-2 * norm(&v), "{n}");
        }
    }
}

#[test]
fn tm_wave_is_curl_of_te_wave() {
    let k = 7.0;
    let r = [0.11, -0.07, 0.19];
    for n in SvwfBasis::new(3).unwrap().indices().iter().filter(|n| n.tau == Polarization::Te) {
        let tm = SvwfIndex { tau: Polarization::Tm, ..*n };
        for kind in [WaveKind::Regular, WaveKind::Outgoing] {
            let cf = curl(|p| eval_svwf(kind, n, k, p).unwrap(), r, 1e-5);
            let want = eval_svwf(kind, &tm, k, r).unwrap().map(|x| k * x);
            let err = norm(&[cf[0] - want[0], cf[1] - want[1], cf[2] - want[2]]);
            assert!(err <= 1e-6 * norm(&want), "{n} {kind:?}: {err}");
        }
    }
}
