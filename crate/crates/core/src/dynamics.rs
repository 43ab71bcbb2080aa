//! Discrete-time control-affine process models with exogenous inputs.
//!
//! A model is `x_{k+1} = f(x_k) + B_u u_k + B_nu v_k` with polynomial drift
//! `f`, constant input matrix `B_u`, constant exogenous-input matrix `B_nu`,
//! and box constraint sets on states, inputs and exogenous inputs. The
//! differential (tangent) dynamics share the same matrices with `A(x)` the
//! drift Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::ScalarPolynomial;

/// Per-coordinate closed interval set.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl IntervalBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::contract("box bound dimensions differ"));
        }
        for i in 0..lower.len() {
            if !(lower[i] <= upper[i]) {
                return Err(Error::contract(format!(
                    "empty box: lower[{i}]={} > upper[{i}]={}",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(IntervalBox { lower, upper })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let lower = DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.0));
        let upper = DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.1));
        IntervalBox::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn center(&self) -> DVector<f64> {
        (&self.lower + &self.upper) * 0.5
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        (0..self.dim()).all(|i| self.lower[i] <= x[i] && x[i] <= self.upper[i])
    }

    pub fn clamp(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| x[i].clamp(self.lower[i], self.upper[i]))
    }

    /// Box grown about its centre by `factor` (1.1 grows each half-width by 10%).
    pub fn inflate(&self, factor: f64) -> IntervalBox {
        let c = self.center();
        let h = (&self.upper - &self.lower) * 0.5;
        IntervalBox {
            lower: &c - &h * factor,
            upper: &c + &h * factor,
        }
    }

    /// All corner points of the box plus the centre. For a zero-dimensional
    /// box this is the single empty vector.
    pub fn vertices_and_center(&self) -> Vec<DVector<f64>> {
        let d = self.dim();
        if d == 0 {
            return vec![DVector::zeros(0)];
        }
        let mut out = Vec::with_capacity((1 << d) + 1);
        for mask in 0..(1u32 << d) {
            let v = DVector::from_fn(d, |i, _| {
                if mask & (1 << i) != 0 {
                    self.upper[i]
                } else {
                    self.lower[i]
                }
            });
            out.push(v);
        }
        out.push(self.center());
        out.dedup();
        out
    }

    /// Uniform grid with `points` samples per coordinate (`points >= 2`).
    pub fn grid(&self, points: usize) -> Vec<DVector<f64>> {
        assert!(points >= 2, "grid needs at least 2 points per dimension");
        let d = self.dim();
        let mut out = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let x = DVector::from_fn(d, |i, _| {
                self.lower[i]
                    + (self.upper[i] - self.lower[i]) * idx[i] as f64 / (points - 1) as f64
            });
            out.push(x);
            let mut carry = d;
            for i in (0..d).rev() {
                idx[i] += 1;
                if idx[i] < points {
                    carry = i;
                    break;
                }
                idx[i] = 0;
            }
            if carry == d {
                break;
            }
        }
        out
    }
}

/// Parameters of the discrete-time Lotka-Volterra benchmark model.
/// `alpha_lv`/`beta_lv` are growth/decay rates, distinct from the
/// contraction rate; `tau` is the sampling period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotkaVolterraParams {
    pub alpha_lv: f64,
    pub beta_lv: f64,
    pub tau: f64,
}

impl Default for LotkaVolterraParams {
    fn default() -> Self {
        LotkaVolterraParams {
            alpha_lv: 1.0,
            beta_lv: 0.001,
            tau: 0.1,
        }
    }
}

/// A differential state: a base point and a tangent direction at it.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialState {
    pub base_state: DVector<f64>,
    pub delta: DVector<f64>,
}

impl DifferentialState {
    pub fn new(base_state: DVector<f64>, delta: DVector<f64>) -> Result<Self> {
        if base_state.len() != delta.len() {
            return Err(Error::contract("tangent dimension mismatch"));
        }
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("tangent must be finite"));
        }
        Ok(DifferentialState { base_state, delta })
    }
}

/// Discrete-time control-affine model with exogenous input.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    name: String,
    drift: Vec<ScalarPolynomial>,
    input_matrix: DMatrix<f64>,
    dist_matrix: DMatrix<f64>,
    state_box: IntervalBox,
    input_box: IntervalBox,
    dist_box: IntervalBox,
}

impl SystemModel {
    pub fn new(
        name: impl Into<String>,
        drift: Vec<ScalarPolynomial>,
        input_matrix: DMatrix<f64>,
        dist_matrix: DMatrix<f64>,
        state_box: IntervalBox,
        input_box: IntervalBox,
        dist_box: IntervalBox,
    ) -> Result<Self> {
        let n = drift.len();
        if n == 0 {
            return Err(Error::contract("state dimension must be positive"));
        }
        for f in &drift {
            if f.n_vars() != n {
                return Err(Error::contract("drift polynomial arity mismatch"));
            }
        }
        if input_matrix.nrows() != n || dist_matrix.nrows() != n {
            return Err(Error::contract("input/disturbance matrix row count mismatch"));
        }
        if state_box.dim() != n {
            return Err(Error::contract("state box dimension mismatch"));
        }
        if input_box.dim() != input_matrix.ncols() {
            return Err(Error::contract("input box dimension mismatch"));
        }
        if dist_box.dim() != dist_matrix.ncols() {
            return Err(Error::contract("disturbance box dimension mismatch"));
        }
        Ok(SystemModel {
            name: name.into(),
            drift,
            input_matrix,
            dist_matrix,
            state_box,
            input_box,
            dist_box,
        })
    }

    /// The two-state predator-prey benchmark. Control and exogenous input
    /// both act on the first state.
    pub fn lotka_volterra(
        params: LotkaVolterraParams,
        state_box: IntervalBox,
        input_box: IntervalBox,
        dist_box: IntervalBox,
    ) -> Result<Self> {
        if params.tau <= 0.0 {
            return Err(Error::contract("sampling period tau must be positive"));
        }
        let LotkaVolterraParams { alpha_lv, beta_lv, tau } = params;
        let f1 = ScalarPolynomial::new(
            2,
            vec![
                (1.0 + tau * alpha_lv + tau * beta_lv, vec![1, 0]),
                (-tau * alpha_lv, vec![1, 1]),
            ],
        )?;
        let f2 = ScalarPolynomial::new(
            2,
            vec![
                (1.0 - tau * alpha_lv + tau * beta_lv, vec![0, 1]),
                (tau * alpha_lv, vec![1, 1]),
            ],
        )?;
        SystemModel::new(
            "lotka_volterra",
            vec![f1, f2],
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            state_box,
            input_box,
            dist_box,
        )
    }

    /// Scalar test system `x+ = a x + u` (or uncontrolled `x+ = a x`).
    pub fn scalar_linear(
        a: f64,
        controlled: bool,
        state_box: IntervalBox,
        input_box: IntervalBox,
    ) -> Result<Self> {
        let f = ScalarPolynomial::new(1, vec![(a, vec![1])])?;
        let m = if controlled { 1 } else { 0 };
        if input_box.dim() != m {
            return Err(Error::contract("input box dimension mismatch"));
        }
        SystemModel::new(
            "scalar_linear",
            vec![f],
            if controlled {
                DMatrix::from_element(1, 1, 1.0)
            } else {
                DMatrix::zeros(1, 0)
            },
            DMatrix::zeros(1, 0),
            state_box,
            input_box,
            IntervalBox::new(DVector::zeros(0), DVector::zeros(0))?,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.drift.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_matrix.ncols()
    }

    pub fn dist_dim(&self) -> usize {
        self.dist_matrix.ncols()
    }

    pub fn input_matrix(&self) -> &DMatrix<f64> {
        &self.input_matrix
    }

    pub fn dist_matrix(&self) -> &DMatrix<f64> {
        &self.dist_matrix
    }

    pub fn state_box(&self) -> &IntervalBox {
        &self.state_box
    }

    pub fn input_box(&self) -> &IntervalBox {
        &self.input_box
    }

    pub fn dist_box(&self) -> &IntervalBox {
        &self.dist_box
    }

    pub fn drift_polynomials(&self) -> &[ScalarPolynomial] {
        &self.drift
    }

    /// Drift map `f(x)`.
    pub fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.state_dim(), self.drift.iter().map(|f| f.eval(x)))
    }

    fn check_state(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(Error::contract(format!(
                "state dimension {} does not match model dimension {}",
                x.len(),
                self.state_dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("state must be finite"));
        }
        Ok(())
    }

    /// One step of the process model. Does not clamp to any box; the
    /// simulator owns constraint handling.
    pub fn step(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_state(x)?;
        if u.len() != self.input_dim() {
            return Err(Error::contract("input dimension mismatch"));
        }
        if v.len() != self.dist_dim() {
            return Err(Error::contract("disturbance dimension mismatch"));
        }
        if u.iter().chain(v.iter()).any(|t| !t.is_finite()) {
            return Err(Error::contract("inputs must be finite"));
        }
        Ok(self.drift(x) + &self.input_matrix * u + &self.dist_matrix * v)
    }

    /// Drift Jacobian `A(x)`.
    pub fn jacobian_a(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_state(x)?;
        let n = self.state_dim();
        Ok(DMatrix::from_fn(n, n, |i, j| self.drift[i].eval_partial(x, j)))
    }

    /// Tangent dynamics `A(x) dx + B_u du + B_nu dv`.
    pub fn differential_step(
        &self,
        x: &DVector<f64>,
        dx: &DVector<f64>,
        du: &DVector<f64>,
        dv: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        if dx.len() != self.state_dim()
            || du.len() != self.input_dim()
            || dv.len() != self.dist_dim()
        {
            return Err(Error::contract("tangent dimension mismatch"));
        }
        let a = self.jacobian_a(x)?;
        Ok(a * dx + &self.input_matrix * du + &self.dist_matrix * dv)
    }

    /// Central finite-difference Jacobian with the step scaled per coordinate,
    /// used to validate the analytic Jacobian.
    pub fn jacobian_fd(&self, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>> {
        self.check_state(x)?;
        let n = self.state_dim();
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            let hj = h * (1.0 + x[j].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += hj;
            xm[j] -= hj;
            let col = (self.drift(&xp) - self.drift(&xm)) / (2.0 * hj);
            out.set_column(j, &col);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv_model() -> SystemModel {
        SystemModel::lotka_volterra(
            LotkaVolterraParams::default(),
            IntervalBox::from_pairs(&[(0.1, 2.0), (0.1, 2.0)]).unwrap(),
            IntervalBox::from_pairs(&[(-1.0, 1.0)]).unwrap(),
            IntervalBox::from_pairs(&[(-0.2, 0.2)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn lv_step_from_unit_point() {
        let m = lv_model();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let next = m
            .step(&x, &DVector::zeros(1), &DVector::zeros(1))
            .unwrap();
        assert!((next[0] - 1.0001).abs() < 1e-12);
        assert!((next[1] - 1.0001).abs() < 1e-12);
    }

    #[test]
    fn zero_input_step_is_drift() {
        let m = lv_model();
        let x = DVector::from_vec(vec![0.7, 1.3]);
        let next = m.step(&x, &DVector::zeros(1), &DVector::zeros(1)).unwrap();
        assert_eq!(next, m.drift(&x));
    }

    #[test]
    fn scalar_linear_step() {
        let m = SystemModel::scalar_linear(
            0.5,
            true,
            IntervalBox::from_pairs(&[(-5.0, 5.0)]).unwrap(),
            IntervalBox::from_pairs(&[(-1.0, 1.0)]).unwrap(),
        )
        .unwrap();
        let next = m
            .step(
                &DVector::from_vec(vec![2.0]),
                &DVector::from_vec(vec![1.0]),
                &DVector::zeros(0),
            )
            .unwrap();
        assert!((next[0] - 2.0).abs() < 1e-15);
        // Constant Jacobian.
        for x in [-2.0, 0.0, 3.0] {
            let a = m.jacobian_a(&DVector::from_vec(vec![x])).unwrap();
            assert!((a[(0, 0)] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn lv_jacobian_frozen_points() {
        let m = lv_model();
        let a = m.jacobian_a(&DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0001, -0.1, 0.1, 1.0001]);
        assert!((a - expect).abs().max() < 1e-12);
        let a0 = m.jacobian_a(&DVector::from_vec(vec![0.0, 0.0])).unwrap();
        let expect0 = DMatrix::from_row_slice(2, 2, &[1.1001, 0.0, 0.0, 0.9001]);
        assert!((a0 - expect0).abs().max() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_difference_on_sampled_states() {
        let m = lv_model();
        let grid = m.state_box().grid(10);
        assert_eq!(grid.len(), 100);
        for x in grid {
            let a = m.jacobian_a(&x).unwrap();
            let fd = m.jacobian_fd(&x, 1e-6).unwrap();
            let scale = 1.0 + a.abs().max();
            assert!((a - fd).abs().max() / scale <= 1e-6);
        }
    }

    #[test]
    fn differential_step_cases() {
        let m = lv_model();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let zero = m
            .differential_step(&x, &DVector::zeros(2), &DVector::zeros(1), &DVector::zeros(1))
            .unwrap();
        assert_eq!(zero, DVector::zeros(2));
        let first_col = m
            .differential_step(
                &x,
                &DVector::from_vec(vec![1.0, 0.0]),
                &DVector::zeros(1),
                &DVector::zeros(1),
            )
            .unwrap();
        assert!((first_col[0] - 1.0001).abs() < 1e-12);
        assert!((first_col[1] - 0.1).abs() < 1e-12);
        let du_only = m
            .differential_step(
                &x,
                &DVector::zeros(2),
                &DVector::from_vec(vec![1.0]),
                &DVector::zeros(1),
            )
            .unwrap();
        assert!((du_only[0] - 1.0).abs() < 1e-15);
        assert!(du_only[1].abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let m = lv_model();
        let bad = m.step(
            &DVector::from_vec(vec![1.0]),
            &DVector::zeros(1),
            &DVector::zeros(1),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn disturbance_entry_is_affine() {
        let m = lv_model();
        let x = DVector::from_vec(vec![0.9, 1.4]);
        let u = DVector::from_vec(vec![0.3]);
        let v = DVector::from_vec(vec![0.17]);
        let with = m.step(&x, &u, &v).unwrap();
        let without = m.step(&x, &u, &DVector::zeros(1)).unwrap();
        let diff = with - without;
        let expect = m.dist_matrix() * &v;
        assert_eq!(diff, expect);
    }

    #[test]
    fn empty_box_rejected() {
        assert!(IntervalBox::from_pairs(&[(1.0, 0.0)]).is_err());
    }

    proptest! {
        #[test]
        fn differential_step_superposition(
            x1 in 0.1f64..2.0, x2 in 0.1f64..2.0,
            a1 in -1.0f64..1.0, a2 in -1.0f64..1.0,
            b1 in -1.0f64..1.0, b2 in -1.0f64..1.0,
            du in -1.0f64..1.0, dv in -0.2f64..0.2,
        ) {
            let m = lv_model();
            let x = DVector::from_vec(vec![x1, x2]);
            let da = DVector::from_vec(vec![a1, a2]);
            let db = DVector::from_vec(vec![b1, b2]);
            let duv = DVector::from_vec(vec![du]);
            let dvv = DVector::from_vec(vec![dv]);
            let lhs = m.differential_step(&x, &(&da + &db), &duv, &dvv).unwrap();
            let rhs = m.differential_step(&x, &da, &duv, &dvv).unwrap()
                + m.differential_step(&x, &db, &DVector::zeros(1), &DVector::zeros(1)).unwrap();
            prop_assert!((lhs - rhs).abs().max() < 1e-12);
        }
    }
}
