use nalgebra::{DMatrix, DVector};

use crate::expr::Polynomial;

/// `f(x) = c + βᵀx + xᵀQx` with symmetric `Q`.
#[derive(Clone, Debug)]
pub(crate) struct Quadratic {
    pub c: f64,
    pub beta: DVector<f64>,
    pub q: DMatrix<f64>,
}

impl Quadratic {
    /// `None` when the polynomial has total degree above two.
    pub fn from_polynomial(p: &Polynomial) -> Option<Self> {
        if p.degree() > 2 {
            return None;
        }
        let d = p.players();
        let mut out = Quadratic { c: 0.0, beta: DVector::zeros(d), q: DMatrix::zeros(d, d) };
        for (coef, e) in p.terms() {
            let vars: Vec<usize> = e.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i, k as usize)).collect();
            match vars.as_slice() {
                [] => out.c += coef,
                [i] => out.beta[*i] += coef,
                [i, j] if i == j => out.q[(*i, *i)] += coef,
                [i, j] => {
                    out.q[(*i, *j)] += coef / 2.0;
                    out.q[(*j, *i)] += coef / 2.0;
                }
                _ => unreachable!("degree checked above"),
            }
        }
        Some(out)
    }

    /// `E[f(X)]` for `X ~ N(m, C)`.
    pub fn expectation(&self, m: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
        self.c + self.beta.dot(m) + m.dot(&(&self.q * m)) + (&self.q * cov).trace()
    }
}

/// `Var(bᵀz + zᵀMz)` for `z ~ N(μ, Σ)` and symmetric `M`.
pub(crate) fn quadratic_variance(b: &DVector<f64>, m: &DMatrix<f64>, mu: &DVector<f64>, sigma: &DMatrix<f64>) -> f64 {
    let lin = b + 2.0 * (m * mu);
    let ms = m * sigma;
    lin.dot(&(sigma * &lin)) + 2.0 * (&ms * &ms).trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{monomials, parse};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn coefficients() {
        let p = monomials(&parse("3 + 2*x1 - x2 + x1*x2 + 4*x2^2", 2).unwrap()).unwrap();
        let q = Quadratic::from_polynomial(&p).unwrap();
        assert_eq!(q.c, 3.0);
        assert_eq!(q.beta.as_slice(), &[2.0, -1.0]);
        assert_eq!(q.q, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 4.0]));
        let x = [0.7, -1.3];
        let xv = DVector::from_row_slice(&x);
        assert!((q.c + q.beta.dot(&xv) + xv.dot(&(&q.q * &xv)) - p.eval(&x)).abs() < 1e-12);
        let cubic = monomials(&parse("x1^3", 1).unwrap()).unwrap();
        assert!(Quadratic::from_polynomial(&cubic).is_none());
    }

    #[test]
    fn variance_matches_sampling() {
        // z ~ N(μ, Σ) by hand-rolled Cholesky, f = 1 + z1 - 2 z2 + z1 z2 + 0.5 z1²
        let mu = DVector::from_row_slice(&[0.5, -1.0]);
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.4, 0.8]);
        let sigma = &l * l.transpose();
        let b = DVector::from_row_slice(&[1.0, -2.0]);
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.0]);
        let exact = quadratic_variance(&b, &m, &mu, &sigma);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let e = DVector::from_fn(2, |_, _| StandardNormal.sample(&mut rng));
            let z = &mu + &l * e;
            let f = 1.0 + b.dot(&z) + z.dot(&(&m * &z));
            s += f;
            s2 += f * f;
        }
        let n = n as f64;
        let var = s2 / n - (s / n).powi(2);
        assert!((var - exact).abs() < 0.03 * exact, "{var} vs {exact}");
    }
}
