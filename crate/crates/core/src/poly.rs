//! Monomial bases and matrix-valued polynomials in the state variables.
//!
//! Both the metric parameterisation `W(x)` and the gain parameterisation
//! `L(x)` are linear combinations of state monomials with constant matrix
//! coefficients. The basis ordering (total degree, then lexicographic in
//! exponents) is part of the certificate file format and must not change.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Monomial basis of all exponent tuples with total degree `<= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    n_vars: usize,
    exponents: Vec<Vec<u32>>,
}

impl MonomialBasis {
    /// Basis for `n_vars` variables, total degree at most `degree`.
    /// Index 0 is always the constant monomial.
    pub fn total_degree(n_vars: usize, degree: u32) -> Self {
        let mut exponents = Vec::new();
        let mut current = vec![0u32; n_vars];
        // Enumerate by total degree, lexicographic within a degree.
        for d in 0..=degree {
            enumerate_degree(n_vars, d, 0, d, &mut current, &mut exponents);
        }
        MonomialBasis { n_vars, exponents }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Evaluate every monomial at `x`.
    pub fn eval(&self, x: &DVector<f64>) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_vars);
        self.exponents
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .fold(1.0, |acc, (i, &p)| acc * x[i].powi(p as i32))
            })
            .collect()
    }

    /// Partial derivative of every monomial with respect to variable `var`.
    pub fn eval_partial(&self, x: &DVector<f64>, var: usize) -> Vec<f64> {
        debug_assert!(var < self.n_vars);
        self.exponents
            .iter()
            .map(|e| {
                if e[var] == 0 {
                    return 0.0;
                }
                let mut v = e[var] as f64;
                for (i, &p) in e.iter().enumerate() {
                    let p = if i == var { p - 1 } else { p };
                    v *= x[i].powi(p as i32);
                }
                v
            })
            .collect()
    }
}

fn enumerate_degree(
    n_vars: usize,
    total: u32,
    var: usize,
    remaining: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if var == n_vars {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    // Highest power first in the leading variable gives degree-then-lex order.
    let _ = total;
    for p in (0..=remaining).rev() {
        current[var] = p;
        enumerate_degree(n_vars, total, var + 1, remaining - p, current, out);
    }
    current[var] = 0;
}

/// A matrix-valued polynomial `P(x) = sum_c coeffs[c] * phi_c(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    basis: MonomialBasis,
    coeffs: Vec<DMatrix<f64>>,
    rows: usize,
    cols: usize,
}

impl MatrixPolynomial {
    pub fn new(basis: MonomialBasis, coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::contract(format!(
                "expected {} coefficient matrices, got {}",
                basis.len(),
                coeffs.len()
            )));
        }
        let (rows, cols) = if let Some(first) = coeffs.first() {
            (first.nrows(), first.ncols())
        } else {
            return Err(Error::contract("empty coefficient list"));
        };
        for c in &coeffs {
            if c.nrows() != rows || c.ncols() != cols {
                return Err(Error::contract("inconsistent coefficient shapes"));
            }
        }
        Ok(MatrixPolynomial {
            basis,
            coeffs,
            rows,
            cols,
        })
    }

    /// Zero polynomial of the given shape over `basis`.
    pub fn zeros(basis: MonomialBasis, rows: usize, cols: usize) -> Self {
        let coeffs = (0..basis.len()).map(|_| DMatrix::zeros(rows, cols)).collect();
        MatrixPolynomial {
            basis,
            coeffs,
            rows,
            cols,
        }
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.coeffs
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let phi = self.basis.eval(x);
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (p, c) in phi.iter().zip(&self.coeffs) {
            out += c * *p;
        }
        out
    }

    /// Partial derivative with respect to state variable `var`, evaluated at `x`.
    pub fn eval_partial(&self, x: &DVector<f64>, var: usize) -> DMatrix<f64> {
        let dphi = self.basis.eval_partial(x, var);
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for (p, c) in dphi.iter().zip(&self.coeffs) {
            if *p != 0.0 {
                out += c * *p;
            }
        }
        out
    }
}

/// A scalar polynomial in the state variables, stored as sparse monomial terms.
/// Used for config-defined drift functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPolynomial {
    n_vars: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl ScalarPolynomial {
    pub fn new(n_vars: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        for (_, e) in &terms {
            if e.len() != n_vars {
                return Err(Error::contract("exponent tuple length mismatch"));
            }
        }
        Ok(ScalarPolynomial { n_vars, terms })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c * e
                    .iter()
                    .enumerate()
                    .fold(1.0, |acc, (i, &p)| acc * x[i].powi(p as i32))
            })
            .sum()
    }

    pub fn eval_partial(&self, x: &DVector<f64>, var: usize) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                if e[var] == 0 {
                    return 0.0;
                }
                let mut v = c * e[var] as f64;
                for (i, &p) in e.iter().enumerate() {
                    let p = if i == var { p - 1 } else { p };
                    v *= x[i].powi(p as i32);
                }
                v
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_counts_and_order() {
        let b = MonomialBasis::total_degree(2, 2);
        assert_eq!(b.len(), 6);
        assert_eq!(b.exponents()[0], vec![0, 0]);
        // Degree-1 block precedes degree-2 block.
        let degs: Vec<u32> = b.exponents().iter().map(|e| e.iter().sum()).collect();
        assert_eq!(degs, vec![0, 1, 1, 2, 2, 2]);
        let b1 = MonomialBasis::total_degree(3, 1);
        assert_eq!(b1.len(), 4);
        let b0 = MonomialBasis::total_degree(2, 0);
        assert_eq!(b0.len(), 1);
    }

    #[test]
    fn partials_match_finite_differences() {
        let b = MonomialBasis::total_degree(2, 3);
        let x = DVector::from_vec(vec![1.3, -0.7]);
        let h = 1e-6;
        for var in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[var] += h;
            xm[var] -= h;
            let fp = b.eval(&xp);
            let fm = b.eval(&xm);
            let an = b.eval_partial(&x, var);
            for i in 0..b.len() {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - an[i]).abs() < 1e-7 * (1.0 + an[i].abs()));
            }
        }
    }

    #[test]
    fn matrix_polynomial_eval() {
        let b = MonomialBasis::total_degree(1, 1);
        // P(x) = I + x * [[0,1],[1,0]]
        let coeffs = vec![
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        ];
        let p = MatrixPolynomial::new(b, coeffs).unwrap();
        let x = DVector::from_vec(vec![0.5]);
        let m = p.eval(&x);
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(0, 1)], 0.5);
        let d = p.eval_partial(&x, 0);
        assert_eq!(d[(0, 1)], 1.0);
        assert_eq!(d[(0, 0)], 0.0);
    }

    #[test]
    fn scalar_polynomial_eval_and_partial() {
        // f = 1.1 x1 - 0.1 x1 x2
        let f = ScalarPolynomial::new(
            2,
            vec![(1.1, vec![1, 0]), (-0.1, vec![1, 1])],
        )
        .unwrap();
        let x = DVector::from_vec(vec![2.0, 3.0]);
        assert!((f.eval(&x) - (2.2 - 0.6)).abs() < 1e-15);
        assert!((f.eval_partial(&x, 0) - (1.1 - 0.3)).abs() < 1e-15);
        assert!((f.eval_partial(&x, 1) - (-0.2)).abs() < 1e-15);
    }
}
