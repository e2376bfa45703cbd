use std::collections::VecDeque;

use rand::Rng;

use super::innovation::Innovation;
use super::spec::{ArmaDriver, ModelSpec};
use crate::error::{Error, Result};
use crate::rng::{child_seed, stream_rng, StreamRng};
use crate::series::TimeSeries;
use crate::DEFAULT_BURN_IN;

/// Values beyond this magnitude abort a simulation.
pub const EXPLOSION_BOUND: f64 = 1e12;

/// Fixed-capacity history; `get(1)` is the most recent value.
#[derive(Debug, Clone)]
struct Lags(VecDeque<f64>);

impl Lags {
    fn zeros(len: usize) -> Self {
        Lags(std::iter::repeat_n(0.0, len).collect())
    }

    #[inline]
    fn get(&self, lag: usize) -> f64 {
        self.0.get(lag - 1).copied().unwrap_or(0.0)
    }

    #[inline]
    fn push(&mut self, x: f64) {
        if self.0.is_empty() {
            return;
        }
        self.0.pop_back();
        self.0.push_front(x);
    }
}

#[derive(Debug, Clone)]
enum State {
    Iid,
    Lagged(Lags),
    Arma {
        driver: Box<Simulator>,
        x: Lags,
        eta: Lags,
    },
    Bilinear {
        x: Lags,
        eps: Lags,
    },
    Garch {
        /// `(|X| - gamma X)^power`
        y: Lags,
        /// `h^{power/2}`
        hp: Lags,
    },
    SignedVol {
        s: f64,
        eps_prev: f64,
    },
    RcAr {
        z: Vec<f64>,
        next: Vec<f64>,
    },
}

/// Deterministic one-step transition `X_t = R(state; e_t)` of a model.
///
/// Two simulators in the same state fed the same innovations produce the
/// same output.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: ModelSpec,
    state: State,
}

impl Simulator {
    /// Start from the zero state. The spec must already be valid.
    pub fn new(spec: &ModelSpec) -> Self {
        let state = match spec {
            ModelSpec::Iid { .. } => State::Iid,
            ModelSpec::Ar { coeffs, .. } => State::Lagged(Lags::zeros(coeffs.len())),
            ModelSpec::Expar { .. } => State::Lagged(Lags::zeros(1)),
            ModelSpec::ArArch { .. } => State::Lagged(Lags::zeros(2)),
            ModelSpec::Arma { ar, ma, driver } => {
                let driver = match driver {
                    ArmaDriver::Innovation(i) => ModelSpec::iid(*i),
                    ArmaDriver::Model(m) => (**m).clone(),
                };
                State::Arma {
                    driver: Box::new(Simulator::new(&driver)),
                    x: Lags::zeros(ar.len()),
                    eta: Lags::zeros(ma.len()),
                }
            }
            ModelSpec::Bilinear { a, c, b, .. } => {
                let big_p = b.len().saturating_sub(1);
                let big_q = b.iter().map(Vec::len).max().unwrap_or(0);
                State::Bilinear {
                    x: Lags::zeros(a.len().max(big_p + big_q)),
                    eps: Lags::zeros(c.len().saturating_sub(1).max(big_q)),
                }
            }
            ModelSpec::AsymGarch { alpha, beta, .. } => State::Garch {
                y: Lags::zeros(alpha.len()),
                hp: Lags::zeros(beta.len()),
            },
            ModelSpec::SignedVol { .. } => State::SignedVol {
                s: 0.0,
                eps_prev: 0.0,
            },
            ModelSpec::RcAr { a, .. } => State::RcAr {
                z: vec![0.0; a.len()],
                next: vec![0.0; a.len()],
            },
        };
        Simulator {
            spec: spec.clone(),
            state,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn innovation(&self) -> Innovation {
        self.spec.innovation()
    }

    /// Advance one step with innovation `e` and return the new observation.
    pub fn step(&mut self, e: f64) -> f64 {
        match (&self.spec, &mut self.state) {
            (ModelSpec::Iid { .. }, State::Iid) => e,
            (ModelSpec::Ar { coeffs, .. }, State::Lagged(x)) => {
                let v = coeffs
                    .iter()
                    .enumerate()
                    .fold(e, |acc, (j, phi)| acc + phi * x.get(j + 1));
                x.push(v);
                v
            }
            (
                ModelSpec::Expar {
                    alpha1, beta1, a, ..
                },
                State::Lagged(x),
            ) => {
                let prev = x.get(1);
                let v = (alpha1 + beta1 * (-a * prev * prev).exp()) * prev + e;
                x.push(v);
                v
            }
            (ModelSpec::ArArch { theta, .. }, State::Lagged(x)) => {
                let (x1, x2) = (x.get(1), x.get(2));
                let scale = (theta[2] * theta[2]
                    + theta[3] * theta[3] * x1 * x1
                    + theta[4] * theta[4] * x2 * x2)
                    .sqrt();
                let v = theta[0] * x1 + theta[1] * x2 + e * scale;
                x.push(v);
                v
            }
            (ModelSpec::Arma { ar, ma, .. }, State::Arma { driver, x, eta }) => {
                let input = driver.step(e);
                let mut v = input;
                for (k, th) in ar.iter().enumerate() {
                    v += th * x.get(k + 1);
                }
                for (k, ph) in ma.iter().enumerate() {
                    v -= ph * eta.get(k + 1);
                }
                x.push(v);
                eta.push(input);
                v
            }
            (ModelSpec::Bilinear { a, c, b, .. }, State::Bilinear { x, eps }) => {
                let mut v = c[0] * e;
                for (j, aj) in a.iter().enumerate() {
                    v += aj * x.get(j + 1);
                }
                for (j, cj) in c.iter().enumerate().skip(1) {
                    v += cj * eps.get(j);
                }
                for (j, row) in b.iter().enumerate() {
                    for (k0, bjk) in row.iter().enumerate() {
                        let k = k0 + 1;
                        v += bjk * x.get(j + k) * eps.get(k);
                    }
                }
                x.push(v);
                eps.push(e);
                v
            }
            (
                ModelSpec::AsymGarch {
                    alpha0,
                    alpha,
                    beta,
                    power,
                    gamma,
                    ..
                },
                State::Garch { y, hp },
            ) => {
                let mut h = *alpha0;
                for (j, aj) in alpha.iter().enumerate() {
                    h += aj * y.get(j + 1);
                }
                for (j, bj) in beta.iter().enumerate() {
                    h += bj * hp.get(j + 1);
                }
                // sqrt(h_t) = (h_t^{p/2})^{1/p}
                let v = e * h.powf(1.0 / power);
                y.push((v.abs() - gamma * v).powf(*power));
                hp.push(h);
                v
            }
            (ModelSpec::SignedVol { g, c, power, .. }, State::SignedVol { s, eps_prev }) => {
                *s = g.eval(*eps_prev) + c.eval(*eps_prev) * *s;
                *eps_prev = e;
                e * s.abs().powf(1.0 / power)
            }
            (ModelSpec::RcAr { a, b, c, d, .. }, State::RcAr { z, next }) => {
                for i in 0..z.len() {
                    let mut acc = c[i] * e + d[i] * e * e;
                    for j in 0..z.len() {
                        acc += (a[i][j] + b[i][j] * e) * z[j];
                    }
                    next[i] = acc;
                }
                std::mem::swap(z, next);
                z[0]
            }
            _ => unreachable!("simulator state always matches its spec"),
        }
    }

    /// Draw an innovation from `rng`, advance, and check for explosion.
    /// `step_index` is only used for the error report.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R, step_index: usize) -> Result<f64> {
        let e = self.innovation().sample(rng);
        self.checked_step(e, step_index)
    }

    pub fn checked_step(&mut self, e: f64, step_index: usize) -> Result<f64> {
        let v = self.step(e);
        if !v.is_finite() || v.abs() > EXPLOSION_BOUND {
            return Err(Error::Explosion {
                step: step_index,
                value: v,
            });
        }
        Ok(v)
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::SeriesTooShort(n));
    }
    Ok(())
}

/// Simulate `n` observations after discarding `burn_in` steps from the zero
/// state, using stream 0 of `seed`.
///
/// Explosion errors report the step index counted from the first simulated
/// step, burn-in included.
pub fn simulate(spec: &ModelSpec, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeries<f64>> {
    let mut rng = stream_rng(seed, 0);
    let series = simulate_with_rng(spec, n, burn_in, &mut rng)?;
    Ok(series.with_provenance(spec.clone(), seed, burn_in))
}

/// As [`simulate`], drawing from a caller-supplied generator.
pub fn simulate_with_rng<R: Rng + ?Sized>(
    spec: &ModelSpec,
    n: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<TimeSeries<f64>> {
    spec.validate()?;
    check_len(n)?;
    let mut sim = Simulator::new(spec);
    for t in 0..burn_in {
        sim.advance(rng, t)?;
    }
    let mut values = Vec::with_capacity(n);
    for t in 0..n {
        values.push(sim.advance(rng, burn_in + t)?);
    }
    let mut s = TimeSeries::new(values)?;
    s.burn_in = burn_in;
    s.spec = Some(spec.clone());
    Ok(s)
}

/// Two trajectories that share the innovations `e_1..e_n` and differ only in
/// their pre-sample history.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub primary: TimeSeries<f64>,
    pub coupled: TimeSeries<f64>,
    /// `X_0`, the last pre-sample value of the primary trajectory.
    pub primary_start: f64,
    /// `X'_0`.
    pub coupled_start: f64,
}

impl CoupledPair {
    /// `|X_k - X'_k|^alpha` for `k = 1..n`.
    pub fn abs_moment_trace(&self, alpha: f64) -> Vec<f64> {
        self.primary
            .values()
            .iter()
            .zip(self.coupled.values())
            .map(|(x, y)| (x - y).abs().powf(alpha))
            .collect()
    }
}

/// Coupled pair with the default pre-sample length.
pub fn simulate_coupled(spec: &ModelSpec, n: usize, seed: u64) -> Result<CoupledPair> {
    let mut rng = stream_rng(seed, 0);
    simulate_coupled_with_rng(spec, n, DEFAULT_BURN_IN, &mut rng)
}

/// Each trajectory runs `pre_sample` steps from the zero state on its own
/// innovation stream, then both are driven by one shared stream.
pub fn simulate_coupled_with_rng(
    spec: &ModelSpec,
    n: usize,
    pre_sample: usize,
    rng: &mut StreamRng,
) -> Result<CoupledPair> {
    spec.validate()?;
    check_len(n)?;
    let mut pre_a = stream_rng(child_seed(rng), 0);
    let mut pre_b = stream_rng(child_seed(rng), 0);
    let mut shared = stream_rng(child_seed(rng), 0);

    let mut a = Simulator::new(spec);
    let mut b = Simulator::new(spec);
    let (mut a0, mut b0) = (0.0, 0.0);
    for t in 0..pre_sample {
        a0 = a.advance(&mut pre_a, t)?;
        b0 = b.advance(&mut pre_b, t)?;
    }
    let innov = spec.innovation();
    let mut xa = Vec::with_capacity(n);
    let mut xb = Vec::with_capacity(n);
    for t in 0..n {
        let e = innov.sample(&mut shared);
        xa.push(a.checked_step(e, pre_sample + t)?);
        xb.push(b.checked_step(e, pre_sample + t)?);
    }
    Ok(CoupledPair {
        primary: TimeSeries::new(xa)?,
        coupled: TimeSeries::new(xb)?,
        primary_start: a0,
        coupled_start: b0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::spec::InnovationMap;
    use crate::rng::stream_rng;

    fn g1() -> Innovation {
        Innovation::standard_gaussian()
    }

    fn acov(x: &[f64], k: usize) -> f64 {
        let n = x.len();
        x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
    }

    fn all_families() -> Vec<ModelSpec> {
        vec![
            ModelSpec::iid(g1()),
            ModelSpec::ar(vec![0.5, -0.2], g1()),
            ModelSpec::Arma {
                ar: vec![0.4],
                ma: vec![0.3],
                driver: ArmaDriver::Model(Box::new(ModelSpec::garch(
                    0.1,
                    vec![0.1],
                    vec![0.8],
                    g1(),
                ))),
            },
            ModelSpec::expar(0.5, 0.3, 1.0, g1()),
            ModelSpec::ArArch {
                theta: [0.3, 0.2, 1.0, 0.3, 0.2],
                innovation: g1(),
            },
            ModelSpec::Bilinear {
                a: vec![0.3],
                c: vec![1.0, 0.2],
                b: vec![vec![0.2], vec![0.1]],
                innovation: g1(),
            },
            ModelSpec::AsymGarch {
                alpha0: 0.1,
                alpha: vec![0.1],
                beta: vec![0.8],
                power: 1.5,
                gamma: 0.3,
                innovation: Innovation::StudentT { df: 10.0 },
            },
            ModelSpec::SignedVol {
                g: InnovationMap::Constant { value: 0.2 },
                c: InnovationMap::AbsPower {
                    intercept: 0.5,
                    scale: 0.2,
                    power: 2.0,
                },
                power: 2.0,
                innovation: Innovation::Rademacher,
            },
            ModelSpec::RcAr {
                a: vec![vec![0.3, 0.1], vec![0.0, 0.2]],
                b: vec![vec![0.1, 0.0], vec![0.0, 0.1]],
                c: vec![1.0, 0.5],
                d: vec![0.0, 0.1],
                innovation: Innovation::Uniform,
            },
        ]
    }

    #[test]
    fn expar_without_autoregression_is_white_noise() {
        let s = simulate(&ModelSpec::expar(0.0, 0.0, 1.0, g1()), 10_000, 1000, 1).unwrap();
        assert!(acov(s.values(), 1).abs() < 0.05);
    }

    #[test]
    fn ar1_stationary_variance() {
        let s = simulate(&ModelSpec::ar(vec![0.5], g1()), 100_000, 1000, 2).unwrap();
        let v = acov(s.values(), 0);
        assert!((v / (4.0 / 3.0) - 1.0).abs() < 0.05, "variance {v}");
    }

    #[test]
    fn garch_stationary_variance() {
        let s = simulate(&ModelSpec::garch(0.1, vec![0.1], vec![0.8], g1()), 100_000, 1000, 3)
            .unwrap();
        let v = acov(s.values(), 0);
        assert!((v - 1.0).abs() < 0.1, "variance {v}");
    }

    #[test]
    fn simulation_is_deterministic() {
        for spec in all_families() {
            let a = simulate(&spec, 500, 50, 9).unwrap();
            let b = simulate(&spec, 500, 50, 9).unwrap();
            let bits = |s: &TimeSeries<f64>| s.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a), bits(&b), "{}", spec.family_name());
            let c = simulate(&spec, 500, 50, 10).unwrap();
            assert_ne!(bits(&a), bits(&c), "{}", spec.family_name());
        }
    }

    #[test]
    fn explosive_parameters_report_the_step() {
        let err = simulate(&ModelSpec::expar(1.5, 0.0, 1.0, g1()), 1000, 100, 4).unwrap_err();
        match err {
            Error::Explosion { step, .. } => assert!(step > 0 && step < 1100),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_short() {
        assert_eq!(
            simulate(&ModelSpec::iid(g1()), 1, 0, 0).unwrap_err(),
            Error::SeriesTooShort(1)
        );
    }

    #[test]
    fn iid_coupling_is_exact() {
        let pair = simulate_coupled(&ModelSpec::iid(g1()), 100, 5).unwrap();
        assert!(pair.abs_moment_trace(1.0).iter().all(|&d| d == 0.0));
        assert_ne!(pair.primary_start, pair.coupled_start);
    }

    #[test]
    fn ar1_coupling_decays_geometrically() {
        let pair = simulate_coupled(&ModelSpec::ar(vec![0.5], g1()), 40, 6).unwrap();
        let d0 = (pair.primary_start - pair.coupled_start).abs();
        for (k, d) in pair.abs_moment_trace(1.0).iter().enumerate() {
            let expected = 0.5f64.powi(k as i32 + 1) * d0;
            assert!((d - expected).abs() <= 1e-12 * d0.max(1.0), "k={k}: {d} vs {expected}");
        }
    }

    #[test]
    fn expar_coupling_obeys_lipschitz_bound() {
        let pair = simulate_coupled(&ModelSpec::expar(0.6, 0.3, 1.0, g1()), 60, 7).unwrap();
        let d0 = (pair.primary_start - pair.coupled_start).abs();
        for (k, d) in pair.abs_moment_trace(1.0).iter().enumerate() {
            assert!(*d <= 0.9f64.powi(k as i32 + 1) * d0 + 1e-12);
        }
    }

    #[test]
    fn identical_states_and_innovations_never_diverge() {
        for spec in all_families() {
            let mut rng = stream_rng(21, 0);
            let mut a = Simulator::new(&spec);
            for t in 0..200 {
                a.advance(&mut rng, t).unwrap();
            }
            let mut b = a.clone();
            for _ in 0..200 {
                let e = spec.innovation().sample(&mut rng);
                assert_eq!(a.step(e).to_bits(), b.step(e).to_bits());
            }
        }
    }
}
