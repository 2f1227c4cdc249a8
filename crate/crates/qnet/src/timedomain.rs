//! Time-domain integration of the memory-kernel dynamics, used as an
//! independent oracle for the frequency-domain results.
//!
//! The integro-differential equation
//! `x' = P x - int_0^t D N(t - tau) D\flat x(tau) dtau - D w_in(t)`
//! is integrated by writing the exponential kernel as
//! `N(t) = F_out e^{Q t} F_in` and carrying the convolution as an auxiliary
//! state `y' = Q y + F_in D\flat x`, which removes all quadrature error from
//! the memory term; a classic fourth-order Runge-Kutta scheme steps the
//! augmented linear system. The output field subtracts both the causal and
//! the anticausal kernel convolution; the anticausal part is accumulated by
//! a backward pass over the stored trajectory.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::netlib::IOSystem;
use crate::tfcore::MemoryKernel;

/// Drive applied to one input channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputSignal {
    /// No drive.
    Off,
    /// Gaussian pulse approximating an impulse; `width` sets the bandwidth
    /// (flat up to roughly `1/width`).
    Impulse { center: f64, width: f64 },
    /// Linear frequency sweep from `omega_lo` to `omega_hi` over the first
    /// 80% of the horizon, with short cosine tapers.
    Chirp { omega_lo: f64, omega_hi: f64 },
    /// Steady sinusoid.
    Sinusoid { omega: f64 },
}

impl InputSignal {
    fn value(&self, t: f64, horizon: f64) -> f64 {
        match *self {
            InputSignal::Off => 0.0,
            InputSignal::Impulse { center, width } => {
                let z = (t - center) / width;
                (-0.5 * z * z).exp()
            }
            InputSignal::Chirp { omega_lo, omega_hi } => {
                let active = 0.8 * horizon;
                if t >= active {
                    return 0.0;
                }
                let phase = omega_lo * t + 0.5 * (omega_hi - omega_lo) * t * t / active;
                let taper_len = 0.05 * active;
                let taper = if t < taper_len {
                    0.5 * (1.0 - (std::f64::consts::PI * t / taper_len).cos())
                } else if t > active - taper_len {
                    0.5 * (1.0 - (std::f64::consts::PI * (active - t) / taper_len).cos())
                } else {
                    1.0
                };
                taper * phase.sin()
            }
            InputSignal::Sinusoid { omega } => (omega * t).sin(),
        }
    }
}

/// Grid, horizon and per-channel drives for a simulation run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub dt: f64,
    pub horizon: f64,
    pub inputs: Vec<InputSignal>,
    /// Initial doubled state (length `2 n`); zero when absent.
    pub initial: Option<Vec<Complex64>>,
}

impl SimulationConfig {
    pub fn new(dt: f64, horizon: f64, inputs: Vec<InputSignal>) -> Self {
        SimulationConfig {
            dt,
            horizon,
            inputs,
            initial: None,
        }
    }
}

/// Trajectory of the doubled state and field signals.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub t: Vec<f64>,
    /// Doubled system state per step (length `2 n`).
    pub state: Vec<Vec<Complex64>>,
    /// Doubled input field per step (length `2 k`).
    pub w_in: Vec<Vec<Complex64>>,
    /// Doubled output field per step (length `2 k`).
    pub w_out: Vec<Vec<Complex64>>,
    pub modes: usize,
    pub channels: usize,
}

/// Causal factorization `N(t >= 0) = f_out e^{q_fwd t} f_in`; the mirrored
/// generator `q_bwd` drives the anticausal branch `N(-t) = f_out e^{q_bwd t}
/// f_in`.
struct KernelFactors {
    f_out: CMat,
    f_in: CMat,
    q_fwd: CMat,
    q_bwd: CMat,
}

fn kernel_factors(kernel: &MemoryKernel) -> Result<KernelFactors> {
    match kernel {
        MemoryKernel::Lorentzian { kappa, gamma, size } => {
            let dim = 2 * size;
            let amp = (0.5 * kappa * gamma).sqrt();
            let f = CMat::identity(dim, dim) * Complex64::new(amp, 0.0);
            let q = CMat::identity(dim, dim) * Complex64::new(-gamma, 0.0);
            Ok(KernelFactors {
                f_out: f.clone(),
                f_in: f,
                q_fwd: q.clone(),
                q_bwd: q,
            })
        }
        MemoryKernel::ExpMode { coupling, generator } => {
            let q = generator.matrix().to_doubled();
            Ok(KernelFactors {
                f_out: coupling.flat().to_doubled(),
                f_in: coupling.to_doubled(),
                q_fwd: q.clone(),
                q_bwd: -q,
            })
        }
        MemoryKernel::MarkovDelta { .. } => {
            Err(Error::Unsupported("time-domain simulation of a delta kernel"))
        }
    }
}

fn slowest_timescale(kernel: &MemoryKernel) -> Option<f64> {
    match kernel {
        MemoryKernel::Lorentzian { kappa, gamma, .. } => Some((1.0 / gamma).max(1.0 / kappa)),
        _ => None,
    }
}

/// Integrates the first-moment coefficient dynamics of a single-field
/// system and reconstructs the output field.
pub fn simulate_io(sys: &IOSystem, cfg: &SimulationConfig) -> Result<SimResult> {
    if sys.couplings().len() != 1 {
        return Err(Error::InvalidConfig(
            "time-domain oracle handles a single coupling".into(),
        ));
    }
    if cfg.dt <= 0.0 || !cfg.dt.is_finite() {
        return Err(Error::InvalidConfig(format!("bad time step {}", cfg.dt)));
    }
    if cfg.horizon <= cfg.dt {
        return Err(Error::InvalidConfig("horizon shorter than one step".into()));
    }
    let coupling = &sys.couplings()[0];
    if let Some(ts) = slowest_timescale(&coupling.kernel) {
        if cfg.horizon < 10.0 * ts {
            return Err(Error::InvalidConfig(format!(
                "horizon {} is shorter than 10 kernel timescales ({})",
                cfg.horizon,
                10.0 * ts
            )));
        }
    }
    let n = sys.generator().modes();
    let k = coupling.d.cols();
    if cfg.inputs.len() != k {
        return Err(Error::InvalidConfig(format!(
            "{} input signals for {} channels",
            cfg.inputs.len(),
            k
        )));
    }

    let factors = kernel_factors(&coupling.kernel)?;
    let dp = sys.generator().matrix().to_doubled();
    let dd = coupling.d.to_doubled();
    let dd_flat = coupling.d.flat().to_doubled();
    let n2 = 2 * n;
    let k2 = 2 * k;
    let mk = factors.q_fwd.nrows();
    let dim = n2 + mk;

    // Augmented drift [[P, -D f_out], [f_in D\flat, Q]].
    let mut a = CMat::zeros(dim, dim);
    a.view_mut((0, 0), (n2, n2)).copy_from(&dp);
    let top_right = -(&dd * &factors.f_out);
    a.view_mut((0, n2), (n2, mk)).copy_from(&top_right);
    let bottom_left = &factors.f_in * &dd_flat;
    a.view_mut((n2, 0), (mk, n2)).copy_from(&bottom_left);
    a.view_mut((n2, n2), (mk, mk)).copy_from(&factors.q_fwd);

    let input_at = |t: f64| -> Vec<Complex64> {
        let mut u = vec![Complex64::default(); k2];
        for (c, sig) in cfg.inputs.iter().enumerate() {
            let v = sig.value(t, cfg.horizon);
            u[2 * c] = Complex64::new(v, 0.0);
            u[2 * c + 1] = Complex64::new(v, 0.0);
        }
        u
    };
    // Drive enters as +D w_in: eliminating the bath from the joint dynamics
    // with the same sign convention as the input/output field definitions
    // gives x' = P x - D (N * D\flat x) + D w_in, and only this sign
    // reproduces the closed-form transfer function.
    let drift = |t: f64, z: &CMat| -> CMat {
        let mut dz = &a * z;
        let u = input_at(t);
        for r in 0..n2 {
            let mut acc = Complex64::default();
            for c in 0..k2 {
                acc += dd[(r, c)] * u[c];
            }
            dz[(r, 0)] += acc;
        }
        dz
    };

    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let dt = cfg.dt;
    let mut z = CMat::zeros(dim, 1);
    if let Some(init) = &cfg.initial {
        if init.len() != n2 {
            return Err(Error::InvalidConfig(format!(
                "initial state has {} components, expected {n2}",
                init.len()
            )));
        }
        for (r, v) in init.iter().enumerate() {
            z[(r, 0)] = *v;
        }
    }

    let mut t_grid = Vec::with_capacity(steps + 1);
    let mut state = Vec::with_capacity(steps + 1);
    let mut w_in = Vec::with_capacity(steps + 1);
    let mut y_hist: Vec<CMat> = Vec::with_capacity(steps + 1);
    // v = D\flat x and its derivative, for the dense interpolation used by
    // the backward pass.
    let mut v_hist: Vec<Vec<Complex64>> = Vec::with_capacity(steps + 1);
    let mut vdot_hist: Vec<Vec<Complex64>> = Vec::with_capacity(steps + 1);

    let record = |t: f64,
                  z: &CMat,
                  dz: &CMat,
                  t_grid: &mut Vec<f64>,
                  state: &mut Vec<Vec<Complex64>>,
                  w_in: &mut Vec<Vec<Complex64>>,
                  y_hist: &mut Vec<CMat>,
                  v_hist: &mut Vec<Vec<Complex64>>,
                  vdot_hist: &mut Vec<Vec<Complex64>>| {
        t_grid.push(t);
        state.push((0..n2).map(|r| z[(r, 0)]).collect());
        w_in.push(input_at(t));
        y_hist.push(z.view((n2, 0), (mk, 1)).into_owned());
        let mut v = vec![Complex64::default(); k2];
        let mut vd = vec![Complex64::default(); k2];
        for r in 0..k2 {
            for c in 0..n2 {
                v[r] += dd_flat[(r, c)] * z[(c, 0)];
                vd[r] += dd_flat[(r, c)] * dz[(c, 0)];
            }
        }
        v_hist.push(v);
        vdot_hist.push(vd);
    };

    let mut t = 0.0;
    for step in 0..=steps {
        let k1 = drift(t, &z);
        record(
            t, &z, &k1, &mut t_grid, &mut state, &mut w_in, &mut y_hist, &mut v_hist,
            &mut vdot_hist,
        );
        if step == steps {
            break;
        }
        let k2v = drift(t + 0.5 * dt, &(&z + &(&k1 * Complex64::new(0.5 * dt, 0.0))));
        let k3v = drift(t + 0.5 * dt, &(&z + &(&k2v * Complex64::new(0.5 * dt, 0.0))));
        let k4v = drift(t + dt, &(&z + &(&k3v * Complex64::new(dt, 0.0))));
        z += (k1 + k2v * Complex64::new(2.0, 0.0) + k3v * Complex64::new(2.0, 0.0) + k4v)
            * Complex64::new(dt / 6.0, 0.0);
        t += dt;

        if step % 64 == 0 {
            let norm: f64 = (0..n2).map(|r| z[(r, 0)].norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e9 {
                return Err(Error::UnstableSimulation { t, norm });
            }
        }
    }

    // Backward pass for the anticausal branch:
    // w(t) = int_t^T e^{q_bwd (tau - t)} f_in v(tau) dtau.
    let count = t_grid.len();
    let mut anti = vec![CMat::zeros(mk, 1); count];
    let apply_fin = |v: &[Complex64]| -> CMat {
        let mut out = CMat::zeros(mk, 1);
        for r in 0..mk {
            for (c, vc) in v.iter().enumerate() {
                out[(r, 0)] += factors.f_in[(r, c)] * vc;
            }
        }
        out
    };
    let mut w = CMat::zeros(mk, 1);
    for i in (0..count - 1).rev() {
        // integrate dw/dt = -q_bwd w - f_in v(t) from t_{i+1} down to t_i
        let vi = &v_hist[i];
        let vip = &v_hist[i + 1];
        let v_mid: Vec<Complex64> = vi
            .iter()
            .zip(vip)
            .enumerate()
            .map(|(c, (a, b))| {
                0.5 * (a + b) + (dt / 8.0) * (vdot_hist[i][c] - vdot_hist[i + 1][c])
            })
            .collect();
        let f = |wv: &CMat, drive: &CMat| -> CMat { -(&factors.q_bwd * wv) - drive };
        let d_end = apply_fin(vip);
        let d_mid = apply_fin(&v_mid);
        let d_start = apply_fin(vi);
        let h = -dt;
        let k1 = f(&w, &d_end);
        let k2s = f(&(&w + &(&k1 * Complex64::new(0.5 * h, 0.0))), &d_mid);
        let k3s = f(&(&w + &(&k2s * Complex64::new(0.5 * h, 0.0))), &d_mid);
        let k4s = f(&(&w + &(&k3s * Complex64::new(h, 0.0))), &d_start);
        w += (k1 + k2s * Complex64::new(2.0, 0.0) + k3s * Complex64::new(2.0, 0.0) + k4s)
            * Complex64::new(h / 6.0, 0.0);
        anti[i] = w.clone();
    }

    let mut w_out = Vec::with_capacity(count);
    for i in 0..count {
        let mut out = w_in[i].clone();
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for c in 0..mk {
                acc += factors.f_out[(r, c)] * (y_hist[i][(c, 0)] + anti[i][(c, 0)]);
            }
            *slot -= acc;
        }
        w_out.push(out);
    }

    Ok(SimResult {
        t: t_grid,
        state,
        w_in,
        w_out,
        modes: n,
        channels: k,
    })
}

/// Sampled frequency response per channel.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    pub omega: Vec<f64>,
    /// `ratio[c][j]` is the output/input spectral ratio of channel `c` at
    /// `omega[j]`.
    pub ratio: Vec<Vec<Complex64>>,
}

/// Output/input discrete-Fourier ratio over the requested band.
///
/// Requires the response to have decayed: at most 1% of the output energy
/// may sit in the final 10% of the horizon.
pub fn empirical_frequency_response(
    sim: &SimResult,
    band: (f64, f64),
) -> Result<FrequencyResponse> {
    let count = sim.t.len();
    let k = sim.channels;
    let mut total = 0.0;
    let mut tail = 0.0;
    let tail_start = count - count / 10;
    for (i, w) in sim.w_out.iter().enumerate() {
        let e: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        total += e;
        if i >= tail_start {
            tail += e;
        }
    }
    if total > 0.0 && tail > 0.01 * total {
        return Err(Error::InsufficientDecay {
            tail_fraction: tail / total,
        });
    }

    let dt = sim.t[1] - sim.t[0];
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(count);
    let spectrum = |samples: Vec<Complex64>| -> Vec<Complex64> {
        let mut buf: Vec<rustfft::num_complex::Complex<f64>> = samples;
        fft.process(&mut buf);
        buf
    };

    let mut omega = Vec::new();
    let mut ratio: Vec<Vec<Complex64>> = vec![Vec::new(); k];
    let mut spectra_in = Vec::with_capacity(k);
    let mut spectra_out = Vec::with_capacity(k);
    for c in 0..k {
        spectra_in.push(spectrum(sim.w_in.iter().map(|w| w[2 * c]).collect()));
        spectra_out.push(spectrum(sim.w_out.iter().map(|w| w[2 * c]).collect()));
    }
    let floors: Vec<f64> = spectra_in
        .iter()
        .map(|sp| sp.iter().map(|z| z.norm()).fold(0.0_f64, f64::max) * 1e-6)
        .collect();

    for j in 1..count / 2 {
        let w = 2.0 * std::f64::consts::PI * j as f64 / (count as f64 * dt);
        if w < band.0 || w > band.1 {
            continue;
        }
        if (0..k).any(|c| spectra_in[c][j].norm() <= floors[c]) {
            continue;
        }
        omega.push(w);
        for c in 0..k {
            ratio[c].push(spectra_out[c][j] / spectra_in[c][j]);
        }
    }
    if omega.is_empty() {
        return Err(Error::InvalidConfig(
            "no usable frequency bins in the requested band".into(),
        ));
    }
    Ok(FrequencyResponse { omega, ratio })
}

/// Complex output/input amplitude ratio of a steady sinusoidal run, using a
/// lock-in window of whole periods over the second half of the horizon.
pub fn steady_state_response(sim: &SimResult, omega: f64, channel: usize) -> Result<Complex64> {
    if channel >= sim.channels {
        return Err(Error::InvalidConfig(format!("no channel {channel}")));
    }
    if omega <= 0.0 {
        return Err(Error::InvalidConfig("lock-in needs omega > 0".into()));
    }
    let dt = sim.t[1] - sim.t[0];
    let period = 2.0 * std::f64::consts::PI / omega;
    // End before the final 10%, where the anticausal reconstruction is
    // truncated by the horizon; start no earlier than the half point.
    let last = sim.t.len() - 1 - sim.t.len() / 10;
    let half = sim.t.len() / 2;
    let window = sim.t[last] - sim.t[half];
    let periods = (window / period).floor();
    if periods < 1.0 {
        return Err(Error::InvalidConfig(
            "horizon too short for one lock-in period".into(),
        ));
    }
    let span = periods * period;
    let start = last - (span / dt).round() as usize;
    let mut acc_in = Complex64::default();
    let mut acc_out = Complex64::default();
    for i in start..=last {
        let weight = if i == start || i == last { 0.5 } else { 1.0 };
        let phase = (-Complex64::i() * omega * sim.t[i]).exp() * weight;
        acc_in += sim.w_in[i][2 * channel] * phase;
        acc_out += sim.w_out[i][2 * channel] * phase;
    }
    if acc_in.norm() < 1e-12 {
        return Err(Error::InvalidConfig("input lock-in amplitude vanished".into()));
    }
    Ok(acc_out / acc_in)
}
