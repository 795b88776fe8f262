use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use supergeom::grassmann::Parity;
use supergeom::linalg::CMat;
use supergeom::quadrature::{haar_mc, herm_param};
use supergeom::sampling::{random_big_cell, random_borel, random_complex, random_grassmann};
use supergeom::supermatrix::chi_m;
use supergeom::{Complex64, Format, Grassmann, GroupElement, MultiIndex, SMatrix, SuperMatrix};

const TOL: f64 = 1e-9;

fn close(a: &Grassmann, b: &Grassmann, tol: f64) -> bool {
    let scale = 1.0f64.max(a.norm_inf()).max(b.norm_inf());
    a.max_abs_diff(b).unwrap() <= tol * scale
}

fn close_m(a: &SMatrix, b: &SMatrix, tol: f64) -> bool {
    a.entries()
        .iter()
        .zip(b.entries())
        .all(|(x, y)| close(x, y, tol))
}

fn formats() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![
        Just((1, 1)),
        Just((2, 1)),
        Just((1, 2)),
        Just((2, 2)),
        Just((0, 2)),
        Just((3, 0))
    ]
}

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

/// `χ_m(h⁻¹)`; the diagonal of a triangular inverse is the inverse diagonal.
fn chi_inv(h: &GroupElement<f64>, m: &MultiIndex) -> Grassmann {
    let k = h.a.nrows();
    let a: Vec<_> = (0..k).map(|i| h.a.get(i, i).clone()).collect();
    let d: Vec<_> = (0..k).map(|i| h.d.get(i, i).clone()).collect();
    chi_m(&d, &a, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graded_commutativity(seed in any::<u64>(), n in 1usize..6, pa in parity(), pb in parity()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_grassmann(&mut rng, n, Some(pa), 1.0);
        let b = random_grassmann(&mut rng, n, Some(pb), 1.0);
        let ab = a.try_mul(&b).unwrap();
        let ba = b.try_mul(&a).unwrap();
        let expected = if pa == Parity::Odd && pb == Parity::Odd { -ba } else { ba };
        prop_assert!(close(&ab, &expected, TOL));
    }

    #[test]
    fn product_is_associative(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_grassmann(&mut rng, n, None, 1.0);
        let b = random_grassmann(&mut rng, n, None, 1.0);
        let c = random_grassmann(&mut rng, n, None, 1.0);
        let l = a.try_mul(&b).unwrap().try_mul(&c).unwrap();
        let r = a.try_mul(&b.try_mul(&c).unwrap()).unwrap();
        prop_assert!(close(&l, &r, TOL));
    }

    #[test]
    fn berezinian_is_multiplicative(seed in any::<u64>(), (p, q) in formats(), n in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_big_cell(&mut rng, p, q, n).unwrap();
        let y = random_big_cell(&mut rng, p, q, n).unwrap();
        let lhs = x.try_mul(&y).unwrap().ber().unwrap();
        let rhs = x.ber().unwrap().try_mul(&y.ber().unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-8));
    }

    #[test]
    fn supertrace_is_cyclic(seed in any::<u64>(), (p, q) in formats(), n in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_big_cell(&mut rng, p, q, n).unwrap();
        let y = random_big_cell(&mut rng, p, q, n).unwrap();
        let xy = x.try_mul(&y).unwrap().supertrace().unwrap();
        let yx = y.try_mul(&x).unwrap().supertrace().unwrap();
        prop_assert!(close(&xy, &yx, TOL));
    }

    #[test]
    fn ldu_reconstructs(seed in any::<u64>(), (p, q) in formats(), n in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_big_cell(&mut rng, p, q, n).unwrap();
        let (l, d, u) = z.ldu().unwrap();
        let fmt = z.rows();
        let back = l.try_mul(&SuperMatrix::diagonal(fmt, d).unwrap()).unwrap().try_mul(&u).unwrap();
        prop_assert!(close_m(&back, &z, 1e-9));
    }

    #[test]
    fn vrho_expressions_agree(seed in any::<u64>(), (p, q) in formats(), n in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_big_cell(&mut rng, p, q, n).unwrap();
        prop_assert!(close(&z.vrho().unwrap(), &z.vrho_via_ber().unwrap(), 1e-8));
    }

    #[test]
    fn conical_under_borel(
        seed in any::<u64>(),
        (p, q) in formats(),
        n in 0usize..4,
        soul in any::<bool>(),
        ms in proptest::collection::vec(-2i32..4, 4),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fmt = Format::new(p, q);
        let z = random_big_cell(&mut rng, p, q, n).unwrap();
        let h = random_borel(&mut rng, fmt, n, soul);
        prop_assert!(h.is_borel());
        let m = MultiIndex::new(p, q, ms[..p + q].iter().map(|v| *v as f64).collect()).unwrap();
        let lhs = h.act(&z).unwrap().delta_m(&m).unwrap();
        let rhs = chi_inv(&h, &m).try_mul(&z.delta_m(&m).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-8));
    }

    #[test]
    fn herm_param_round_trip(diag in proptest::collection::vec(0.2f64..3.0, 1..4), seed in any::<u64>()) {
        let p = diag.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let off: Vec<Complex64> = (0..p * (p - 1) / 2).map(|_| random_complex(&mut rng, 1.0)).collect();
        let z = herm_param(&diag, &off);
        // z = R*R with R upper, so the lower Cholesky factor is R*.
        let l = z.cholesky().unwrap();
        let mut idx = 0;
        for j in 0..p {
            prop_assert!((l.at(j, j).re - diag[j]).abs() < 1e-9 * (1.0 + diag[j]));
            for k in j + 1..p {
                prop_assert!((l.at(k, j).conj() - off[idx]).norm() < 1e-8 * (1.0 + off[idx].norm()));
                idx += 1;
            }
        }
    }
}

/// `Berezin ∫ D(ζ,ω) ϱ(y) e^{−str(x⁻¹y)} Δ_m(y)` at `y = (z, ζ; ω, w)`, for
/// `(p|q) = (2|1)` with the odd blocks on four fresh generators.
fn berint(x: &SMatrix, z: &CMat<f64>, w: Complex64, m: &MultiIndex) -> Grassmann {
    let n = 4;
    let fmt = Format::new(2, 1);
    let mut y = SuperMatrix::zeros(fmt, fmt, n);
    for i in 0..2 {
        for j in 0..2 {
            y.set(i, j, Grassmann::scalar(n, z.at(i, j)));
        }
        y.set(i, 2, Grassmann::generator(n, i).unwrap());
        y.set(2, i, Grassmann::generator(n, 2 + i).unwrap());
    }
    y.set(2, 2, Grassmann::scalar(n, w));
    let s = x
        .embed(n)
        .unwrap()
        .inverse()
        .unwrap()
        .try_mul(&y)
        .unwrap()
        .supertrace()
        .unwrap();
    let integrand = y
        .vrho()
        .unwrap()
        .try_mul(&(-s).exp())
        .unwrap()
        .try_mul(&y.delta_m(m).unwrap())
        .unwrap();
    integrand
        .berezin(&[2, 0, 3, 1])
        .unwrap()
        .restrict(0)
        .unwrap()
}

#[test]
fn berezin_integral_is_borel_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let fmt = Format::new(2, 1);
    let m = MultiIndex::new(2, 1, vec![3.0, 1.0, 2.0]).unwrap();
    for _ in 0..8 {
        let x = random_big_cell(&mut rng, 2, 1, 0).unwrap();
        let h = random_borel(&mut rng, fmt, 0, false);
        let hinv = h.inverse().unwrap();
        let mut zw = SuperMatrix::zeros(fmt, fmt, 0);
        for i in 0..3 {
            for j in 0..3 {
                if (i < 2) == (j < 2) {
                    let mut g = Grassmann::zero(0);
                    g.set_coeff(
                        0,
                        random_complex(&mut rng, 0.5) + if i == j { 2.0 } else { 0.0 },
                    );
                    zw.set(i, j, g);
                }
            }
        }
        let moved = hinv.act(&zw).unwrap();
        let lhs = berint(
            &h.act(&x).unwrap(),
            &zw.a_block().body(),
            zw.get(2, 2).body(),
            &m,
        );
        let rhs = berint(&x, &moved.a_block().body(), moved.get(2, 2).body(), &m)
            .try_mul(&chi_inv(&h, &m))
            .unwrap();
        assert!(close(&lhs, &rhs, 1e-9), "{lhs:?} vs {rhs:?}");
    }
}

#[test]
fn haar_measure_is_invariant() {
    // Fourth moment of a matrix entry is 2/(q(q+1)), before and after a fixed left translation.
    for q in [1usize, 2, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
        let v = supergeom::quadrature::haar_unitary(q, &mut rng);
        let expect = 2.0 / (q * (q + 1)) as f64;
        let plain = haar_mc(q, 40_000, 5, |u| {
            Ok(Grassmann::real(0, u.at(0, 0).norm_sqr().powi(2)))
        })
        .unwrap();
        let moved = haar_mc(q, 40_000, 6, |u| {
            Ok(Grassmann::real(0, v.mul(u).at(0, 0).norm_sqr().powi(2)))
        })
        .unwrap();
        for est in [plain, moved] {
            let err = (est.value.body().re - expect).abs();
            assert!(
                err < 5.0 * est.stderr_at(0) + 1e-12,
                "q={q}: {err} vs {}",
                est.stderr_at(0)
            );
        }
    }
}
