use nalgebra::{DMatrix, DVector};

use super::innovation::Innovation;
use super::spec::ModelSpec;
use crate::error::{Error, Result};

/// Random-coefficient state form `Z_t = (A + B e_t) Z_{t-1} + c e_t + d e_t^2`
/// with observation `X_t = h' Z_{t-1} + c0 e_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovForm {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub d: DVector<f64>,
    pub h: DVector<f64>,
    pub c0: f64,
    /// Number of leading state entries holding `X_t, ..., X_{t-lags+1}`.
    pub lags: usize,
}

impl MarkovForm {
    /// Markov representation of the subdiagonal bilinear model.
    ///
    /// The state holds `P' = max(P, 1)` observation lags followed by
    /// `W_1..W_s`, `s = max(p, q, Q, 1)`, where `W_1(t-1)` is the part of
    /// `X_t` known at time `t - 1` and `W_i(t) = g_i(t) + W_{i+1}(t-1)` with
    /// `g_i(t) = a_i X_t + c_i e_t + e_t sum_l b_{li} X_{t-l}`.
    /// Because `Z_t[0] = X_t`, the form doubles as an `rc_ar` spec.
    pub fn from_bilinear(spec: &ModelSpec) -> Result<Self> {
        let ModelSpec::Bilinear { a, c, b, .. } = spec else {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name(),
                operation: "bilinear Markov representation",
            });
        };
        spec.validate()?;
        let big_p = b.len().saturating_sub(1);
        let big_q = b.iter().map(Vec::len).max().unwrap_or(0);
        let s = a.len().max(c.len() - 1).max(big_q).max(1);
        let lags = big_p.max(1);
        let dim = lags + s;
        let w = |i: usize| lags + i - 1;
        let coef = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let bij = |l: usize, i: usize| b.get(l).and_then(|row| row.get(i - 1)).copied().unwrap_or(0.0);
        let c0 = c[0];

        let mut am = DMatrix::zeros(dim, dim);
        let mut bm = DMatrix::zeros(dim, dim);
        let mut cv = DVector::zeros(dim);
        let mut dv = DVector::zeros(dim);
        let mut h = DVector::zeros(dim);
        h[w(1)] = 1.0;

        am[(0, w(1))] = 1.0;
        cv[0] = c0;
        for l in 1..lags {
            am[(l, l - 1)] = 1.0;
        }
        for i in 1..=s {
            let ai = coef(a, i - 1);
            am[(w(i), w(1))] += ai;
            if i < s {
                am[(w(i), w(i + 1))] += 1.0;
            }
            cv[w(i)] = ai * c0 + coef(c, i);
            dv[w(i)] = bij(0, i) * c0;
            bm[(w(i), w(1))] += bij(0, i);
            for l in 1..=big_p {
                bm[(w(i), l - 1)] += bij(l, i);
            }
        }
        Ok(MarkovForm {
            a: am,
            b: bm,
            c: cv,
            d: dv,
            h,
            c0,
            lags,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// The equivalent random-coefficient spec, observed through `Z_t[0]`.
    pub fn to_rc_ar(&self, innovation: Innovation) -> ModelSpec {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        ModelSpec::RcAr {
            a: rows(&self.a),
            b: rows(&self.b),
            c: self.c.iter().copied().collect(),
            d: self.d.iter().copied().collect(),
            innovation,
        }
    }
}
