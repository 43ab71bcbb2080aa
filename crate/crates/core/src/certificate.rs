//! Metric certificates: the synthesised pair `(W(x), L(x))` with its
//! contraction rate, uniform metric bounds, and verification margin.
//!
//! The on-disk format is a versioned line-oriented text file with a trailing
//! FNV-1a checksum. Floats are printed with 17 significant digits so files
//! round-trip bit-exactly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{fnv1a64, spd_inverse};
use crate::poly::{MatrixPolynomial, MonomialBasis};

/// Condition-number limit above which `W(x)` is treated as singular.
pub const METRIC_CONDITION_LIMIT: f64 = 1e12;

/// Which matrix inequality the certificate was synthesised against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateMode {
    /// Plain contraction condition (strict block LMI).
    Contraction,
    /// Dissipativity condition with an `L2` gain bound from the exogenous
    /// input prediction error to the state error.
    Dissipative,
}

impl CertificateMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateMode::Contraction => "contraction",
            CertificateMode::Dissipative => "dissipative",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "contraction" => Ok(CertificateMode::Contraction),
            "dissipative" => Ok(CertificateMode::Dissipative),
            other => Err(Error::Data(format!("unknown certificate mode `{other}`"))),
        }
    }
}

/// A polynomially parameterised contraction metric certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCertificate {
    mode: CertificateMode,
    beta: f64,
    w_poly: MatrixPolynomial,
    l_poly: MatrixPolynomial,
    m_lower: f64,
    m_upper: f64,
    margin: f64,
    alpha_gain: Option<f64>,
}

impl MetricCertificate {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mode: CertificateMode,
        beta: f64,
        w_poly: MatrixPolynomial,
        l_poly: MatrixPolynomial,
        m_lower: f64,
        m_upper: f64,
        margin: f64,
        alpha_gain: Option<f64>,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::contract("contraction rate beta must lie in (0, 1]"));
        }
        let (wr, wc) = w_poly.shape();
        if wr != wc {
            return Err(Error::contract("W(x) coefficients must be square"));
        }
        for c in w_poly.coeffs() {
            if (c - c.transpose()).abs().max() > 1e-12 {
                return Err(Error::contract("W(x) coefficients must be symmetric"));
            }
        }
        let (_, lc) = l_poly.shape();
        if lc != wr {
            return Err(Error::contract("L(x) column count must equal the state dimension"));
        }
        if w_poly.basis().n_vars() != wr || l_poly.basis().n_vars() != wr {
            return Err(Error::contract("basis arity must equal the state dimension"));
        }
        if mode == CertificateMode::Dissipative && alpha_gain.is_none() {
            return Err(Error::Config(
                "dissipative certificates require alpha_gain".into(),
            ));
        }
        Ok(MetricCertificate {
            mode,
            beta,
            w_poly,
            l_poly,
            m_lower,
            m_upper,
            margin,
            alpha_gain,
        })
    }

    /// Constant-coefficient certificate, mostly used by tests and examples.
    pub fn constant(
        beta: f64,
        w: DMatrix<f64>,
        l: DMatrix<f64>,
        m_lower: f64,
        m_upper: f64,
    ) -> Result<Self> {
        let n = w.nrows();
        let basis = MonomialBasis::total_degree(n, 0);
        let w_poly = MatrixPolynomial::new(basis.clone(), vec![w])?;
        let l_poly = MatrixPolynomial::new(basis, vec![l])?;
        MetricCertificate::new(
            CertificateMode::Contraction,
            beta,
            w_poly,
            l_poly,
            m_lower,
            m_upper,
            0.0,
            None,
        )
    }

    pub fn mode(&self) -> CertificateMode {
        self.mode
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn state_dim(&self) -> usize {
        self.w_poly.shape().0
    }

    pub fn input_dim(&self) -> usize {
        self.l_poly.shape().0
    }

    pub fn m_lower(&self) -> f64 {
        self.m_lower
    }

    pub fn m_upper(&self) -> f64 {
        self.m_upper
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn alpha_gain(&self) -> Option<f64> {
        self.alpha_gain
    }

    pub fn w_poly(&self) -> &MatrixPolynomial {
        &self.w_poly
    }

    pub fn l_poly(&self) -> &MatrixPolynomial {
        &self.l_poly
    }

    pub fn w_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.w_poly.eval(x)
    }

    pub fn l_at(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.l_poly.eval(x)
    }

    /// Metric `M(x) = W(x)^{-1}` via a symmetric positive-definite solve.
    pub fn metric_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        spd_inverse(&self.w_at(x), METRIC_CONDITION_LIMIT)
    }

    /// Feedback gain `K(x) = L(x) W(x)^{-1}`.
    pub fn gain_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.l_at(x) * self.metric_at(x)?)
    }

    /// Metric and its partial derivatives `dM/dx_l = -M (dW/dx_l) M`.
    pub fn metric_with_partials(
        &self,
        x: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>)> {
        let m = self.metric_at(x)?;
        let n = self.state_dim();
        let partials = (0..n)
            .map(|l| {
                let dw = self.w_poly.eval_partial(x, l);
                -(&m * dw * &m)
            })
            .collect();
        Ok((m, partials))
    }

    /// Stable identifier of the serialised certificate.
    pub fn id(&self) -> u64 {
        fnv1a64(self.to_text().as_bytes())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("ccmpc certificate v1\n");
        s.push_str(&format!("mode {}\n", self.mode.as_str()));
        s.push_str(&format!("state_dim {}\n", self.state_dim()));
        s.push_str(&format!("input_dim {}\n", self.input_dim()));
        s.push_str(&format!("beta {}\n", fmt_f64(self.beta)));
        s.push_str(&format!("m_lower {}\n", fmt_f64(self.m_lower)));
        s.push_str(&format!("m_upper {}\n", fmt_f64(self.m_upper)));
        s.push_str(&format!("margin {}\n", fmt_f64(self.margin)));
        match self.alpha_gain {
            Some(a) => s.push_str(&format!("alpha {}\n", fmt_f64(a))),
            None => s.push_str("alpha none\n"),
        }
        write_poly(&mut s, "w", &self.w_poly);
        write_poly(&mut s, "l", &self.l_poly);
        let sum = fnv1a64(s.as_bytes());
        s.push_str(&format!("checksum {sum:016x}\n"));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let body_end = text
            .rfind("checksum ")
            .ok_or_else(|| Error::Data("missing checksum line".into()))?;
        let (body, sum_line) = text.split_at(body_end);
        let sum_hex = sum_line
            .trim_end()
            .strip_prefix("checksum ")
            .ok_or_else(|| Error::Data("malformed checksum line".into()))?;
        let expect = u64::from_str_radix(sum_hex, 16)
            .map_err(|_| Error::Data("malformed checksum value".into()))?;
        let got = fnv1a64(body.as_bytes());
        if got != expect {
            return Err(Error::Data(format!(
                "checksum mismatch: file says {expect:016x}, content hashes to {got:016x}"
            )));
        }

        let mut lines = body.lines();
        expect_line(&mut lines, "ccmpc certificate v1")?;
        let mode = CertificateMode::parse(&field(&mut lines, "mode")?)?;
        let state_dim: usize = parse_field(&mut lines, "state_dim")?;
        let input_dim: usize = parse_field(&mut lines, "input_dim")?;
        let beta: f64 = parse_field(&mut lines, "beta")?;
        let m_lower: f64 = parse_field(&mut lines, "m_lower")?;
        let m_upper: f64 = parse_field(&mut lines, "m_upper")?;
        let margin: f64 = parse_field(&mut lines, "margin")?;
        let alpha_raw = field(&mut lines, "alpha")?;
        let alpha_gain = if alpha_raw == "none" {
            None
        } else {
            Some(alpha_raw.parse::<f64>().map_err(|_| Error::Data("bad alpha".into()))?)
        };
        let w_poly = read_poly(&mut lines, "w", state_dim, state_dim, state_dim)?;
        let l_poly = read_poly(&mut lines, "l", input_dim, state_dim, state_dim)?;
        MetricCertificate::new(
            mode, beta, w_poly, l_poly, m_lower, m_upper, margin, alpha_gain,
        )
        .map_err(|e| Error::Data(format!("invalid certificate: {e}")))
    }

    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read certificate {path:?}: {e}")))?;
        Self::from_text(&text)
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_poly(s: &mut String, tag: &str, poly: &MatrixPolynomial) {
    let basis = poly.basis();
    s.push_str(&format!("{tag}_basis {}\n", basis.len()));
    for e in basis.exponents() {
        let joined: Vec<String> = e.iter().map(|p| p.to_string()).collect();
        s.push_str(&format!("{tag}_exponent {}\n", joined.join(" ")));
    }
    for (i, c) in poly.coeffs().iter().enumerate() {
        let mut vals = Vec::with_capacity(c.len());
        for r in 0..c.nrows() {
            for cc in 0..c.ncols() {
                vals.push(fmt_f64(c[(r, cc)]));
            }
        }
        s.push_str(&format!("{tag} {i} {}\n", vals.join(" ")));
    }
}

fn read_poly<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    tag: &str,
    rows: usize,
    cols: usize,
    n_vars: usize,
) -> Result<MatrixPolynomial> {
    let count: usize = field(lines, &format!("{tag}_basis"))?
        .parse()
        .map_err(|_| Error::Data("bad basis count".into()))?;
    let mut exponents = Vec::with_capacity(count);
    for _ in 0..count {
        let raw = field(lines, &format!("{tag}_exponent"))?;
        let e: Vec<u32> = raw
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|_| Error::Data("bad exponent".into())))
            .collect::<Result<_>>()?;
        if e.len() != n_vars {
            return Err(Error::Data("exponent arity mismatch".into()));
        }
        exponents.push(e);
    }
    // Reconstruct through the public constructor by matching the canonical
    // basis of the recorded degree; reject re-ordered files.
    let degree = exponents
        .iter()
        .map(|e| e.iter().sum::<u32>())
        .max()
        .unwrap_or(0);
    let basis = MonomialBasis::total_degree(n_vars, degree);
    if basis.exponents() != exponents.as_slice() {
        return Err(Error::Data(format!("{tag} basis is not in canonical order")));
    }
    let mut coeffs = Vec::with_capacity(count);
    for i in 0..count {
        let raw = field(lines, &format!("{tag} {i}"))?;
        let vals: Vec<f64> = raw
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Data("bad coefficient".into())))
            .collect::<Result<_>>()?;
        if vals.len() != rows * cols {
            return Err(Error::Data(format!(
                "coefficient {i} of {tag} has {} entries, expected {}",
                vals.len(),
                rows * cols
            )));
        }
        coeffs.push(DMatrix::from_row_slice(rows, cols, &vals));
    }
    MatrixPolynomial::new(basis, coeffs)
        .map_err(|e| Error::Data(format!("invalid {tag} polynomial: {e}")))
}

fn expect_line<'a>(lines: &mut impl Iterator<Item = &'a str>, expect: &str) -> Result<()> {
    match lines.next() {
        Some(l) if l == expect => Ok(()),
        Some(l) => Err(Error::Data(format!("expected `{expect}`, found `{l}`"))),
        None => Err(Error::Data(format!("expected `{expect}`, found end of file"))),
    }
}

fn field<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<String> {
    match lines.next() {
        Some(l) => l
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(|s| s.to_string())
            .ok_or_else(|| Error::Data(format!("expected field `{key}`, found `{l}`"))),
        None => Err(Error::Data(format!("expected field `{key}`, found end of file"))),
    }
}

fn parse_field<'a, T: std::str::FromStr>(
    lines: &mut impl Iterator<Item = &'a str>,
    key: &str,
) -> Result<T> {
    field(lines, key)?
        .parse::<T>()
        .map_err(|_| Error::Data(format!("cannot parse field `{key}`")))
}
