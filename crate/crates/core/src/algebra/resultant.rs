//! Resultants with respect to `w` by fraction-free elimination.

use super::bipoly::BiPoly;
use super::unipoly::UniPoly;
use crate::scalar::GaussRat;

type Entry = UniPoly<GaussRat>;

/// Sylvester matrix of `p` and `q` viewed as polynomials in `w` over `Q(i)[z]`.
pub fn sylvester_w(p: &BiPoly<GaussRat>, q: &BiPoly<GaussRat>) -> Vec<Vec<Entry>> {
    let pc = p.coeffs_in_w();
    let qc = q.coeffs_in_w();
    let m = pc.len().saturating_sub(1);
    let n = qc.len().saturating_sub(1);
    let size = m + n;
    let mut rows = vec![vec![UniPoly::zero(); size]; size];
    for k in 0..n {
        for j in 0..=m {
            rows[k][k + j] = pc[m - j].clone();
        }
    }
    for k in 0..m {
        for j in 0..=n {
            rows[n + k][k + j] = qc[n - j].clone();
        }
    }
    rows
}

/// Determinant by Bareiss elimination; every division is exact.
pub fn bareiss_det(mut a: Vec<Vec<Entry>>) -> Entry {
    let n = a.len();
    if n == 0 {
        return UniPoly::constant(GaussRat::one());
    }
    let mut sign = false;
    let mut prev = UniPoly::constant(GaussRat::one());
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(sw) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return UniPoly::zero();
            };
            a.swap(k, sw);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = UniPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

/// `Res_w(p, q)` as a polynomial in `z`.
pub fn resultant_w(p: &BiPoly<GaussRat>, q: &BiPoly<GaussRat>) -> Entry {
    bareiss_det(sylvester_w(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_exact;

    fn res(a: &str, b: &str) -> Entry {
        resultant_w(&parse_exact(a).unwrap(), &parse_exact(b).unwrap())
    }

    fn z_poly(v: &[i64]) -> Entry {
        UniPoly::new(v.iter().map(|&n| GaussRat::from_int(n)).collect())
    }

    #[test]
    fn linear_pair() {
        assert_eq!(res("w - z", "w - 2*z"), z_poly(&[0, -1]));
    }

    #[test]
    fn constant_in_w() {
        assert_eq!(res("w", "z"), z_poly(&[0, 1]));
    }

    #[test]
    fn matches_cofactor_expansion() {
        // Res_w(w^2 + z, w - z) = p(z) evaluated at w = z: z^2 + z
        assert_eq!(res("w^2 + z", "w - z"), z_poly(&[0, 1, 1]));
    }

    #[test]
    fn example_one_degree() {
        let r = res("z^2*(w - z)^2 - 1", "w^2 + z^3 - 2");
        assert_eq!(r.degree(), Some(10));
    }
}
