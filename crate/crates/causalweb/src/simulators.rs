//! Reference generators for the bundled benchmark systems: six stochastic
//! recurrence models, a confounder system, the Lorenz 1963 attractor and a
//! pair of coupled Lorenz systems.
//!
//! All generators are bit-reproducible for a fixed (config, seed): every
//! noise stream draws from its own ChaCha sub-stream, so changing how one
//! series consumes noise never disturbs the others.

use crate::error::{Error, Result};
use crate::model::{Dataset, ProcessSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// How the noise magnitude `s` in a model table entry N(0, s) is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseNotation {
    /// N(0, s) is a variance: standard deviation sqrt(s).
    #[default]
    Variance,
    /// N(0, s) is already a standard deviation.
    Std,
}

impl NoiseNotation {
    pub fn std_from(self, s: f64) -> f64 {
        match self {
            NoiseNotation::Variance => s.sqrt(),
            NoiseNotation::Std => s,
        }
    }
}

impl std::str::FromStr for NoiseNotation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variance" => Ok(NoiseNotation::Variance),
            "std" => Ok(NoiseNotation::Std),
            other => Err(Error::InvalidParam(format!(
                "unknown noise notation '{other}' (expected variance|std)"
            ))),
        }
    }
}

/// Burn-in discarded for models whose recurrences carry memory.
const MEMORY_BURN_IN: usize = 100;

fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normals(seed: u64, stream: u64, len: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Generate one of the bundled stochastic models (ids 1..6) or the
/// confounder system as a dataset of length `steps`.
pub fn simulate_model(
    id: &str,
    steps: usize,
    seed: u64,
    notation: NoiseNotation,
) -> Result<Dataset> {
    simulate_model_with_target_noise(id, steps, seed, notation, None)
}

/// `simulate_model` with an explicit override for the target equation's
/// noise standard deviation, leaving every driver noise at the tabulated
/// scale. Used by the reproduction benchmarks where the published values
/// pin the target noise to a scale the N(0,s) notation does not.
pub fn simulate_model_with_target_noise(
    id: &str,
    steps: usize,
    seed: u64,
    notation: NoiseNotation,
    target_noise_std: Option<f64>,
) -> Result<Dataset> {
    if steps < 1 {
        return Err(Error::InvalidParam("steps must be >= 1".into()));
    }
    let over = target_noise_std;
    match id {
        "1" => model1(steps, seed, notation, over),
        "2" => model2(steps, seed, notation, over),
        "3" => model3(steps, seed, notation, over),
        "4" => model4(steps, seed, notation, over),
        "5" => model5(steps, seed, notation, over),
        "6" => model6(steps, seed, notation, over),
        "confounder" => confounder(steps, seed, notation, over),
        other => Err(Error::InvalidParam(format!(
            "unknown model '{other}' (expected 1..6 or confounder)"
        ))),
    }
}

/// x[n] = 2 y[n-1] + z[n-1] + noise; y, z white standard normal.
fn model1(t: usize, seed: u64, notation: NoiseNotation, x_std: Option<f64>) -> Result<Dataset> {
    let pad = 1;
    let len = t + pad;
    let y = normals(seed, 1, len);
    let z = normals(seed, 2, len);
    let ex = normals(seed, 0, len);
    let sx = x_std.unwrap_or_else(|| notation.std_from(1e-4));
    let mut x = vec![0.0; len];
    for n in pad..len {
        x[n] = 2.0 * y[n - 1] + z[n - 1] + sx * ex[n];
    }
    dataset_from(&[("x", &x), ("y", &y), ("z", &z)], pad)
}

/// x[n] = z[n-1] + noise; z[n] = y[n-1] + N(0,1); y white.
fn model2(t: usize, seed: u64, notation: NoiseNotation, x_std: Option<f64>) -> Result<Dataset> {
    let pad = 2;
    let len = t + pad;
    let y = normals(seed, 1, len);
    let ez = normals(seed, 2, len);
    let ex = normals(seed, 0, len);
    let sx = x_std.unwrap_or_else(|| notation.std_from(1e-4));
    let sz = notation.std_from(1.0);
    let mut z = vec![0.0; len];
    let mut x = vec![0.0; len];
    for n in 1..len {
        z[n] = y[n - 1] + sz * ez[n];
    }
    for n in pad..len {
        x[n] = z[n - 1] + sx * ex[n];
    }
    dataset_from(&[("x", &x), ("y", &y), ("z", &z)], pad)
}

/// x[n] = z[n-1] + noise; y[n] = z[n-1] + noise; z white standard normal.
fn model3(t: usize, seed: u64, notation: NoiseNotation, x_std: Option<f64>) -> Result<Dataset> {
    let pad = 1;
    let len = t + pad;
    let z = normals(seed, 2, len);
    let ey = normals(seed, 1, len);
    let ex = normals(seed, 0, len);
    let sx = x_std.unwrap_or_else(|| notation.std_from(1e-4));
    let sy = notation.std_from(1e-2);
    let mut x = vec![0.0; len];
    let mut y = vec![0.0; len];
    for n in pad..len {
        x[n] = z[n - 1] + sx * ex[n];
        y[n] = z[n - 1] + sy * ey[n];
    }
    dataset_from(&[("x", &x), ("y", &y), ("z", &z)], pad)
}

/// x[n] = 0.4 x[n-1] + 0.4 z[n-1] + noise; y and z are AR(1) chains driven
/// by z's past. Memory model: 100-step burn-in.
fn model4(t: usize, seed: u64, notation: NoiseNotation, x_std: Option<f64>) -> Result<Dataset> {
    let pad = MEMORY_BURN_IN;
    let len = t + pad;
    let ex = normals(seed, 0, len);
    let ey = normals(seed, 1, len);
    let ez = normals(seed, 2, len);
    let sx = x_std.unwrap_or_else(|| notation.std_from(1e-4));
    let sy = notation.std_from(1e-2);
    let sz = notation.std_from(1e-2);
    let mut x = vec![0.0; len];
    let mut y = vec![0.0; len];
    let mut z = vec![0.0; len];
    for n in 1..len {
        z[n] = 0.4 * z[n - 1] + sz * ez[n];
        y[n] = 0.5 * y[n - 1] + 0.5 * z[n - 1] + sy * ey[n];
        x[n] = 0.4 * x[n - 1] + 0.4 * z[n - 1] + sx * ex[n];
    }
    dataset_from(&[("x", &x), ("y", &y), ("z", &z)], pad)
}

/// x[n] = 0.6 x[n-1] + y[n-1] z[n-1] + 0.3 z[n-1] + noise, with y an AR(1)
/// chain and z tracking y's past. Memory model: 100-step burn-in.
fn model5(t: usize, seed: u64, notation: NoiseNotation, x_std: Option<f64>) -> Result<Dataset> {
    let pad = MEMORY_BURN_IN;
    let len = t + pad;
    let ex = normals(seed, 0, len);
    let ey = normals(seed, 1, len);
    let ez = normals(seed, 2, len);
    let sx = x_std.unwrap_or_else(|| notation.std_from(1e-6));
    let sy = notation.std_from(1e-4);
    let sz = notation.std_from(1e-4);
    let mut x = vec![0.0; len];
    let mut y = vec![0.0; len];
    let mut z = vec![0.0; len];
    for n in 1..len {
        y[n] = 0.3 * y[n - 1] + sy * ey[n];
        z[n] = y[n - 1] + sz * ez[n];
        x[n] = 0.6 * x[n - 1] + y[n - 1] * z[n - 1] + 0.3 * z[n - 1] + sx * ex[n];
    }
    dataset_from(&[("x", &x), ("y", &y), ("z", &z)], pad)
}

/// x[n] = w[n-1] + 0.6 y[n-2] + 0.4 z[n-2] + noise;
/// w[n] = y[n-1] + 4 z[n-1] + N(0,1); y, z white standard normal.
fn model6(t: usize, seed: u64, notation: NoiseNotation, x_std: Option<f64>) -> Result<Dataset> {
    let pad = 2;
    let len = t + pad;
    let y = normals(seed, 1, len);
    let z = normals(seed, 2, len);
    let ew = normals(seed, 3, len);
    let ex = normals(seed, 0, len);
    let sx = x_std.unwrap_or_else(|| notation.std_from(1e-4));
    let sw = notation.std_from(1.0);
    let mut w = vec![0.0; len];
    let mut x = vec![0.0; len];
    for n in 1..len {
        w[n] = y[n - 1] + 4.0 * z[n - 1] + sw * ew[n];
    }
    for n in pad..len {
        x[n] = w[n - 1] + 0.6 * y[n - 2] + 0.4 * z[n - 2] + sx * ex[n];
    }
    dataset_from(&[("x", &x), ("y", &y), ("z", &z), ("w", &w)], pad)
}

/// x[n] = 2 y[n-1] + z[n-1] + noise with AR(1) drivers; the system used by
/// the missing-process diagnostic when z is withheld.
fn confounder(t: usize, seed: u64, notation: NoiseNotation, x_std: Option<f64>) -> Result<Dataset> {
    let pad = MEMORY_BURN_IN;
    let len = t + pad;
    let ex = normals(seed, 0, len);
    let ey = normals(seed, 1, len);
    let ez = normals(seed, 2, len);
    let sx = x_std.unwrap_or_else(|| notation.std_from(1e-4));
    let sy = notation.std_from(1e-2);
    let sz = notation.std_from(1e-2);
    let mut x = vec![0.0; len];
    let mut y = vec![0.0; len];
    let mut z = vec![0.0; len];
    for n in 1..len {
        y[n] = 0.3 * y[n - 1] + sy * ey[n];
        z[n] = 0.6 * z[n - 1] + sz * ez[n];
        x[n] = 2.0 * y[n - 1] + z[n - 1] + sx * ex[n];
    }
    dataset_from(&[("x", &x), ("y", &y), ("z", &z)], pad)
}

fn dataset_from(series: &[(&str, &Vec<f64>)], pad: usize) -> Result<Dataset> {
    let out: Result<Vec<ProcessSeries>> = series
        .iter()
        .map(|(name, vals)| ProcessSeries::new(*name, vals[pad..].to_vec()))
        .collect();
    Dataset::new(out?)
}

/// Classical fourth-order Runge-Kutta update.
pub fn rk4_step<const D: usize>(
    field: impl Fn(&[f64; D]) -> [f64; D],
    state: &[f64; D],
    dt: f64,
) -> [f64; D] {
    let k1 = field(state);
    let mut s = *state;
    for i in 0..D {
        s[i] = state[i] + 0.5 * dt * k1[i];
    }
    let k2 = field(&s);
    for i in 0..D {
        s[i] = state[i] + 0.5 * dt * k2[i];
    }
    let k3 = field(&s);
    for i in 0..D {
        s[i] = state[i] + dt * k3[i];
    }
    let k4 = field(&s);
    let mut out = *state;
    for i in 0..D {
        out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

const BLOW_UP: f64 = 1e6;

fn check_blow_up(state: &[f64], step: usize) -> Result<()> {
    if state.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
        return Err(Error::Numerical(format!(
            "integration blew up at step {step}: state {state:?}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

/// Initial state close to the attractor.
pub const LORENZ_X0: [f64; 3] = [1.50887, -1.531271, 25.46091];

/// Integrate the Lorenz 1963 system with RK4 and add observational Gaussian
/// noise of the given variance to each series afterwards.
pub fn simulate_lorenz63(
    steps: usize,
    dt: f64,
    params: LorenzParams,
    x0: [f64; 3],
    obs_noise_var: f64,
    seed: u64,
) -> Result<Dataset> {
    if steps < 1 || dt <= 0.0 {
        return Err(Error::InvalidParam("steps >= 1 and dt > 0 required".into()));
    }
    let field = |s: &[f64; 3]| -> [f64; 3] {
        [
            params.sigma * (s[1] - s[0]),
            params.rho * s[0] - s[0] * s[2] - s[1],
            s[0] * s[1] - params.beta * s[2],
        ]
    };
    let mut state = x0;
    let mut series = [
        Vec::with_capacity(steps),
        Vec::with_capacity(steps),
        Vec::with_capacity(steps),
    ];
    for step in 0..steps {
        for d in 0..3 {
            series[d].push(state[d]);
        }
        state = rk4_step(field, &state, dt);
        check_blow_up(&state, step)?;
    }

    let sd = obs_noise_var.sqrt();
    let names = ["x", "y", "z"];
    let mut out = Vec::with_capacity(3);
    for (d, name) in names.iter().enumerate() {
        let vals = if sd > 0.0 {
            let noise = normals(seed, d as u64, steps);
            series[d]
                .iter()
                .zip(&noise)
                .map(|(v, n)| v + sd * n)
                .collect()
        } else {
            series[d].clone()
        };
        out.push(ProcessSeries::new(*name, vals)?);
    }
    Dataset::new(out)
}

/// Two Lorenz systems, the first receiving eps * (x2 - x1) in its x
/// equation. A spin-up run is discarded; initial conditions are perturbed
/// from the seed so independent runs decorrelate.
pub fn simulate_coupled_lorenz(
    eps: f64,
    steps: usize,
    dt: f64,
    spinup: usize,
    seed: u64,
) -> Result<Dataset> {
    if steps < 1 || dt <= 0.0 {
        return Err(Error::InvalidParam("steps >= 1 and dt > 0 required".into()));
    }
    let p = LorenzParams::default();
    let field = |s: &[f64; 6]| -> [f64; 6] {
        [
            p.sigma * (s[1] - s[0]) + eps * (s[3] - s[0]),
            p.rho * s[0] - s[0] * s[2] - s[1],
            s[0] * s[1] - p.beta * s[2],
            p.sigma * (s[4] - s[3]),
            p.rho * s[3] - s[3] * s[5] - s[4],
            s[3] * s[4] - p.beta * s[5],
        ]
    };

    let jitter = normals(seed, 0, 6);
    let mut state = [
        LORENZ_X0[0] + 0.1 * jitter[0],
        LORENZ_X0[1] + 0.1 * jitter[1],
        LORENZ_X0[2] + 0.1 * jitter[2],
        -LORENZ_X0[0] + 0.1 * jitter[3],
        -LORENZ_X0[1] + 0.1 * jitter[4],
        LORENZ_X0[2] + 1.0 + 0.1 * jitter[5],
    ];
    for step in 0..spinup {
        state = rk4_step(field, &state, dt);
        check_blow_up(&state, step)?;
    }

    let names = ["x1", "y1", "z1", "x2", "y2", "z2"];
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); 6];
    for step in 0..steps {
        for d in 0..6 {
            series[d].push(state[d]);
        }
        state = rk4_step(field, &state, dt);
        check_blow_up(&state, spinup + step)?;
    }
    let out: Result<Vec<ProcessSeries>> = names
        .iter()
        .zip(series)
        .map(|(name, vals)| ProcessSeries::new(*name, vals))
        .collect();
    Dataset::new(out?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(vals: &[f64]) -> f64 {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
    }

    #[test]
    fn model1_stationary_variance() {
        let ds = simulate_model("1", 100_000, 7, NoiseNotation::Variance).unwrap();
        let vx = var(&ds.get("x").unwrap().values);
        assert!((vx - 5.0001).abs() < 0.1, "var x = {vx}");
    }

    #[test]
    fn model3_y_tracks_lagged_z() {
        let ds = simulate_model("3", 50_000, 3, NoiseNotation::Variance).unwrap();
        let y = &ds.get("y").unwrap().values;
        let z = &ds.get("z").unwrap().values;
        // y[n+1] = z[n] + small noise
        let n = y.len() - 1;
        let my = y[1..].iter().sum::<f64>() / n as f64;
        let mz = z[..n].iter().sum::<f64>() / n as f64;
        let mut cov = 0.0;
        for i in 0..n {
            cov += (y[i + 1] - my) * (z[i] - mz);
        }
        cov /= n as f64;
        let corr = cov / (var(&y[1..]).sqrt() * var(&z[..n]).sqrt());
        assert!(corr > 0.99, "corr = {corr}");
    }

    #[test]
    fn determinism_and_stream_isolation() {
        let a = simulate_model("4", 500, 99, NoiseNotation::Variance).unwrap();
        let b = simulate_model("4", 500, 99, NoiseNotation::Variance).unwrap();
        assert_eq!(a, b);
        // driver streams do not depend on the x noise stream
        let c = simulate_model("4", 500, 98, NoiseNotation::Variance).unwrap();
        assert_ne!(
            a.get("z").unwrap().values,
            c.get("z").unwrap().values
        );
    }

    #[test]
    fn rk4_identity_field() {
        let s = [1.0, -2.0, 3.0];
        let out = rk4_step(|_s: &[f64; 3]| [0.0; 3], &s, 0.01);
        assert_eq!(out, s);
    }

    #[test]
    fn rk4_matches_exponential_decay() {
        let dt = 0.01;
        let out = rk4_step(|s: &[f64; 1]| [-s[0]], &[1.0], dt);
        let exact = (-dt_f64(dt)).exp();
        assert!((out[0] - exact).abs() < dt.powi(5), "err {}", out[0] - exact);
        fn dt_f64(d: f64) -> f64 {
            d
        }
    }

    #[test]
    fn rk4_step_halving_order() {
        // local error of one dt step vs two dt/2 steps scales ~ dt^5
        let field = |s: &[f64; 2]| [s[1], -s[0]];
        let s0 = [1.0, 0.0];
        let mut errs = Vec::new();
        for &dt in &[0.1, 0.05] {
            let coarse = rk4_step(field, &s0, dt);
            let fine = rk4_step(field, &rk4_step(field, &s0, dt / 2.0), dt / 2.0);
            errs.push(
                coarse
                    .iter()
                    .zip(&fine)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max),
            );
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 20.0 && ratio < 40.0, "ratio = {ratio}"); // ~2^5 = 32
    }

    #[test]
    fn rk4_harmonic_energy_drift() {
        let field = |s: &[f64; 2]| [s[1], -s[0]];
        let mut s = [1.0, 0.0];
        for _ in 0..1000 {
            s = rk4_step(field, &s, 0.01);
        }
        let energy = s[0] * s[0] + s[1] * s[1];
        assert!((energy - 1.0).abs() < 1e-6, "energy = {energy}");
    }

    #[test]
    fn lorenz_stays_on_attractor() {
        let ds = simulate_lorenz63(
            1_000_000,
            0.01,
            LorenzParams::default(),
            LORENZ_X0,
            0.0,
            0,
        )
        .unwrap();
        let x = &ds.get("x").unwrap().values;
        let max = x.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(max < 25.0, "|x| reached {max}");
        // long-run attractor mean of z sits near 23.55 for the classic
        // parameters (the fixed points are at rho - 1 = 27, the attractor
        // average is below them)
        let zm = ds.get("z").unwrap().values.iter().sum::<f64>() / 1e6;
        assert!((zm - 23.55).abs() < 0.5, "z mean = {zm}");
    }

    #[test]
    fn coupled_lorenz_synchronizes_at_high_coupling() {
        let ds = simulate_coupled_lorenz(9.0, 20_000, 0.01, 10_000, 5).unwrap();
        let x1 = &ds.get("x1").unwrap().values;
        let x2 = &ds.get("x2").unwrap().values;
        let mean_abs_diff =
            x1.iter().zip(x2).map(|(a, b)| (a - b).abs()).sum::<f64>() / x1.len() as f64;
        let sd = var(x1).sqrt();
        assert!(mean_abs_diff < 0.05 * sd, "diff {mean_abs_diff} vs sd {sd}");
    }

    #[test]
    fn lorenz_blow_up_aborts() {
        let res = simulate_lorenz63(
            100,
            0.01,
            LorenzParams::default(),
            [1e7, 1e7, 1e7],
            0.0,
            0,
        );
        assert!(matches!(res, Err(Error::Numerical(_))));
    }
}
