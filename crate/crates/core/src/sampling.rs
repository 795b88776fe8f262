//! Random Grassmann numbers, supermatrices, group elements and nilpotent
//! shifts for fuzzing and the randomised checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::grassmann::Parity;
use crate::riesz::{family_element, Family};
use crate::supermatrix::{Format, GroupElement, SuperMatrix};
use crate::{Complex64, Grassmann, SMatrix};

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * scale
}

/// Random element with coefficients `N(0, scale²)` on the monomials of the
/// given parity (all monomials for `None`), body included when even.
pub fn random_grassmann<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    parity: Option<Parity>,
    scale: f64,
) -> Grassmann {
    let mut g = Grassmann::zero(n);
    for mask in 0..1usize << n {
        let odd = mask.count_ones() % 2 == 1;
        let keep = match parity {
            None => true,
            Some(Parity::Even) => !odd,
            Some(Parity::Odd) => odd,
        };
        if keep {
            g.set_coeff(mask, random_complex(rng, scale));
        }
    }
    g
}

/// Even nilpotent element: random even soul, zero body.
pub fn random_even_nilpotent<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Grassmann {
    let mut g = random_grassmann(rng, n, Some(Parity::Even), scale);
    g.set_coeff(0, Complex64::new(0.0, 0.0));
    g
}

/// Even supermatrix of format `(p|q)`: random bodies `body_shift·1 + N(0, ½)`
/// on the diagonal blocks, random souls of size `soul` everywhere.
pub fn random_even_supermatrix<R: Rng + ?Sized>(
    rng: &mut R,
    p: usize,
    q: usize,
    n: usize,
    body_shift: f64,
    soul: f64,
) -> Result<SMatrix> {
    let f = Format::new(p, q);
    let d = p + q;
    let mut data = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let odd = f.index_is_odd(i) != f.index_is_odd(j);
            let g = if odd {
                random_grassmann(rng, n, Some(Parity::Odd), soul)
            } else {
                let mut g = random_grassmann(rng, n, Some(Parity::Even), soul);
                let mut b = random_complex(rng, 0.5);
                if i == j {
                    b += body_shift;
                }
                g.set_coeff(0, b);
                g
            };
            data.push(g);
        }
    }
    SuperMatrix::new(f, f, data)
}

/// Even supermatrix whose body is diagonally dominant, hence in the big cell.
pub fn random_big_cell<R: Rng + ?Sized>(
    rng: &mut R,
    p: usize,
    q: usize,
    n: usize,
) -> Result<SMatrix> {
    let shift = 2.0 * (p + q) as f64;
    random_even_supermatrix(rng, p, q, n, shift, 0.7)
}

/// Borel element: `A` lower and `D` upper triangular with diagonal bodies of
/// modulus in `[0.6, 1.6)`. With `soul` the even entries get random souls
/// and the odd entries are filled; otherwise the element is body-only.
pub fn random_borel<R: Rng + ?Sized>(
    rng: &mut R,
    fmt: Format,
    n: usize,
    soul: bool,
) -> GroupElement<f64> {
    let k = fmt.dim();
    let mut a = SuperMatrix::zeros(fmt, fmt, n);
    let mut d = SuperMatrix::zeros(fmt, fmt, n);
    let entry = |rng: &mut R, odd: bool, diag: bool| -> Grassmann {
        if odd {
            return random_grassmann(rng, n, Some(Parity::Odd), 0.5);
        }
        let mut g = if soul {
            random_grassmann(rng, n, Some(Parity::Even), 0.3)
        } else {
            Grassmann::zero(n)
        };
        let body = if diag {
            Complex64::from_polar(rng.gen_range(0.6..1.6), rng.gen_range(-3.0..3.0))
        } else {
            random_complex(rng, 0.5)
        };
        g.set_coeff(0, body);
        g
    };
    for i in 0..k {
        for j in 0..k {
            let odd = fmt.index_is_odd(i) != fmt.index_is_odd(j);
            if odd && !soul {
                continue;
            }
            if j <= i {
                a.set(i, j, entry(rng, odd, i == j));
            }
            if j >= i {
                d.set(i, j, entry(rng, odd, i == j));
            }
        }
    }
    GroupElement::block_diagonal(a, d).expect("square blocks of one format")
}

/// Random element of one of the three invariance families at `p = q = 1`,
/// with odd parameters drawn from `n` external generators.
pub fn random_family_element<R: Rng + ?Sized>(
    rng: &mut R,
    family: Family,
    n: usize,
) -> Result<GroupElement<f64>> {
    match family {
        Family::OddLower | Family::OddUpper => {
            let a = random_grassmann(rng, n, Some(Parity::Odd), 0.6);
            let d = random_grassmann(rng, n, Some(Parity::Odd), 0.6);
            family_element(family, n, Some((a, d)), None)
        }
        Family::BlockDiagonal => {
            let r = rng.gen_range(0.6..1.6);
            let a = Complex64::from_polar(r, rng.gen_range(-3.0..3.0));
            let d = Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0));
            let d2 = Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0));
            family_element(family, n, None, Some((a, d, d2)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parities_and_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_grassmann(&mut rng, 3, Some(Parity::Odd), 1.0);
        assert!(g.is_odd());
        let n = random_even_nilpotent(&mut rng, 4, 1.0);
        assert!(n.is_even() && n.body().norm() == 0.0 && !n.is_zero());
        for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            assert!(random_big_cell(&mut rng, p, q, 3).unwrap().in_big_cell());
        }
        let h = random_borel(&mut rng, Format::new(2, 1), 2, true);
        assert!(h.is_borel());
        for fam in [Family::OddLower, Family::OddUpper, Family::BlockDiagonal] {
            assert!(random_family_element(&mut rng, fam, 2).is_ok());
        }
    }
}
