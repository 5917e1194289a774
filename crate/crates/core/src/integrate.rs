//! Dormand-Prince 5(4) integration with dense output and event location.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{layer_field, reduced_field, slow_field, Params, ReducedState, SlowPoint};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Smallest step accepted before the run is declared stiff.
pub const MIN_STEP: f64 = 1e-14;

/// Time resolution of event location.
pub const EVENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    Fast,
    Slow,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

pub type EventFn<const N: usize> = Arc<dyn Fn(f64, &[f64; N]) -> f64 + Send + Sync>;

/// A threshold function whose zero crossings are located during integration.
#[derive(Clone)]
pub struct Event<const N: usize> {
    pub g: EventFn<N>,
    pub direction: Direction,
    /// Stop the integration at the first crossing.
    pub terminal: bool,
}

impl<const N: usize> Event<N> {
    pub fn new<G>(g: G, direction: Direction, terminal: bool) -> Self
    where
        G: Fn(f64, &[f64; N]) -> f64 + Send + Sync + 'static,
    {
        Self { g: Arc::new(g), direction, terminal }
    }

    /// Crossing of `threshold` by component `index`.
    pub fn threshold(index: usize, threshold: f64, direction: Direction, terminal: bool) -> Self {
        Self::new(move |_, y| y[index] - threshold, direction, terminal)
    }

    fn fires(&self, g0: f64, g1: f64) -> bool {
        let up = g0 < 0.0 && g1 >= 0.0;
        let down = g0 > 0.0 && g1 <= 0.0;
        match self.direction {
            Direction::Rising => up,
            Direction::Falling => down,
            Direction::Either => up || down,
        }
    }
}

impl<const N: usize> core::fmt::Debug for Event<N> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Event")
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationConfig<const N: usize> {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Length of the integration interval.
    pub max_time: f64,
    pub initial_step: Option<f64>,
    /// Record the dense solution on a uniform grid instead of at every step.
    pub sample_dt: Option<f64>,
    pub max_steps: usize,
    pub events: Vec<Event<N>>,
    /// Components whose derivative is floored at zero while they are
    /// non-positive, so round-off below zero cannot be amplified.
    pub non_negative: [bool; N],
}

impl<const N: usize> Default for IntegrationConfig<N> {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: f64::INFINITY,
            max_time: 1.0,
            initial_step: None,
            sample_dt: None,
            max_steps: 10_000_000,
            events: Vec::new(),
            non_negative: [false; N],
        }
    }
}

impl<const N: usize> IntegrationConfig<N> {
    pub fn new(max_time: f64) -> Self {
        Self { max_time, ..Self::default() }
    }

    pub fn tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn sample_every(mut self, dt: f64) -> Self {
        self.sample_dt = Some(dt);
        self
    }

    pub fn with_event(mut self, event: Event<N>) -> Self {
        self.events.push(event);
        self
    }

    pub fn non_negative(mut self, indices: &[usize]) -> Self {
        for &i in indices {
            self.non_negative[i] = true;
        }
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_time > 0.0
            && self.max_time.is_finite()
            && self.max_step > 0.0
            && self.sample_dt.is_none_or(|dt| dt > 0.0 && dt.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(alloc::format!(
                "integration config needs positive tolerances, step and horizon: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EventRecord {
    pub time: f64,
    /// Index into the configured event list.
    pub id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    /// Reached `max_time` with no terminal event configured.
    Completed,
    /// Stopped on a terminal event.
    Event,
    /// Reached `max_time` while waiting for a terminal event.
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub regime: Regime,
    pub events: Vec<EventRecord>,
    pub termination: Termination,
    pub labels: Vec<String>,
    /// Start of the window used by tail classification, if one was requested.
    pub tail_start: Option<f64>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        let k = self.times.len() - 1;
        (self.times[k], self.states[k])
    }

    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index]).collect()
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        self.labels = labels.iter().map(|s| String::from(*s)).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

struct Dense<const N: usize> {
    t: f64,
    h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.r;
        core::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }
}

fn err_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], cfg: &IntegrationConfig<N>) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sk = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sk).powi(2);
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], f0: &[f64; N], cfg: &IntegrationConfig<N>) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { 0.01 * (dny / dnf).sqrt() };
    h = h.min(cfg.max_step).min(cfg.max_time);
    let y1: [f64; N] = core::array::from_fn(|i| y[i] + h * f0[i]);
    let f1 = f(t + h, &y1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sk = cfg.abs_tol + cfg.rel_tol * y[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
    (100.0 * h).min(h1).min(cfg.max_step).min(cfg.max_time)
}

/// Integrate `y' = rhs(t, y)` from `t0` over `config.max_time`.
pub fn integrate<const N: usize, F>(
    mut field: F,
    t0: f64,
    y0: [f64; N],
    config: &IntegrationConfig<N>,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    config.validate()?;
    let floor = config.non_negative;
    let mut rhs = move |t: f64, y: &[f64; N]| {
        let mut f = field(t, y);
        for i in 0..N {
            if floor[i] && y[i] <= 0.0 && f[i] < 0.0 {
                f[i] = 0.0;
            }
        }
        f
    };
    if y0.iter().any(|v| !v.is_finite()) || !t0.is_finite() {
        return Err(Error::NonFinite("initial state"));
    }
    let t_end = t0 + config.max_time;
    let has_terminal = config.events.iter().any(|e| e.terminal);

    let mut traj = Trajectory {
        times: alloc::vec![t0],
        states: alloc::vec![y0],
        regime: Regime::Full,
        events: Vec::new(),
        termination: Termination::Completed,
        labels: (0..N).map(|i| alloc::format!("y{i}")).collect(),
        tail_start: None,
        steps_accepted: 0,
        steps_rejected: 0,
    };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side at the initial state"));
    }
    let mut h = config.initial_step.unwrap_or_else(|| initial_step(&mut rhs, t, &y, &k1, config));
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut g_prev: Vec<f64> = config.events.iter().map(|e| (e.g)(t, &y)).collect();
    let mut next_sample = config.sample_dt.map(|dt| t0 + dt);
    let mut sample_index = 1usize;

    loop {
        if t >= t_end || (t_end - t) <= MIN_STEP * t_end.abs().max(1.0) {
            break;
        }
        if traj.steps_accepted + traj.steps_rejected >= config.max_steps {
            return Err(Error::StepLimit { t, steps: config.max_steps });
        }
        h = h.min(config.max_step);
        let last_step = t + h >= t_end;
        if last_step {
            h = t_end - t;
        } else if h.abs() < MIN_STEP {
            return Err(Error::StepUnderflow { t, h, state: y.to_vec() });
        }

        let stage = |base: &[f64; N], terms: &[(f64, &[f64; N])]| -> [f64; N] {
            core::array::from_fn(|i| base[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
        };
        let k2 = rhs(t + C2 * h, &stage(&y, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &stage(&y, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * h, &stage(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * h, &stage(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(t + h, &stage(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = stage(&y, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t + h, &y1);
        let err: [f64; N] =
            core::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
        let finite = y1.iter().chain(k7.iter()).all(|v| v.is_finite());
        let en = if finite { err_norm(&y, &y1, &err, config) } else { f64::INFINITY };

        let fac11 = en.powf(0.2 - PI_BETA * 0.75);
        if en <= 1.0 {
            let mut fac = fac11 / fac_old.powf(PI_BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            fac_old = en.max(1e-4);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            traj.steps_accepted += 1;

            let dense = Dense {
                t,
                h,
                r: {
                    let r2: [f64; N] = core::array::from_fn(|i| y1[i] - y[i]);
                    let r3: [f64; N] = core::array::from_fn(|i| h * k1[i] - r2[i]);
                    let r4: [f64; N] = core::array::from_fn(|i| r2[i] - h * k7[i] - r3[i]);
                    let r5: [f64; N] = core::array::from_fn(|i| {
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    });
                    [y, r2, r3, r4, r5]
                },
            };
            let t1 = if last_step { t_end } else { t + h };

            // earliest crossing among all events in this step
            let mut stop: Option<(f64, usize)> = None;
            for (id, ev) in config.events.iter().enumerate() {
                let g1 = (ev.g)(t1, &y1);
                if ev.fires(g_prev[id], g1) {
                    let g0 = g_prev[id];
                    let te = locate(|s| (ev.g)(s, &dense.eval(s)), t, t1, g0);
                    traj.events.push(EventRecord { time: te, id });
                    if ev.terminal && stop.is_none_or(|(ts, _)| te < ts) {
                        stop = Some((te, id));
                    }
                }
                g_prev[id] = g1;
            }
            let t_stop = stop.map(|(ts, _)| ts).unwrap_or(t1);
            if let Some((ts, _)) = stop {
                traj.events.retain(|e| e.time <= ts);
            }

            if let (Some(dt), Some(ns)) = (config.sample_dt, next_sample.as_mut()) {
                while *ns < t_stop && *ns < t_end {
                    let ys = dense.eval(*ns);
                    traj.times.push(*ns);
                    traj.states.push(ys);
                    sample_index += 1;
                    *ns = t0 + dt * sample_index as f64;
                }
            }

            if let Some((ts, _)) = stop {
                let ys = if ts == t1 { y1 } else { dense.eval(ts) };
                push_point(&mut traj, ts, ys);
                traj.termination = Termination::Event;
                return Ok(traj);
            }
            if config.sample_dt.is_none() || t1 >= t_end {
                push_point(&mut traj, t1, y1);
            }

            t = t1;
            y = y1;
            k1 = k7;
            h = h_new;
        } else {
            if !en.is_finite() && h.abs() <= MIN_STEP {
                return Err(Error::NonFinite("right-hand side"));
            }
            let shrink = if en.is_finite() { (fac11 / SAFETY).min(1.0 / FAC_MIN) } else { 10.0 };
            h /= shrink;
            last_rejected = true;
            traj.steps_rejected += 1;
            if h.abs() < MIN_STEP {
                return Err(Error::StepUnderflow { t, h, state: y.to_vec() });
            }
        }
    }
    if has_terminal {
        traj.termination = Termination::TimedOut;
    }
    Ok(traj)
}

fn push_point<const N: usize>(traj: &mut Trajectory<N>, t: f64, y: [f64; N]) {
    if traj.times.last().is_some_and(|&last| t <= last) {
        return;
    }
    traj.times.push(t);
    traj.states.push(y);
}

fn locate<G: FnMut(f64) -> f64>(mut g: G, mut lo: f64, mut hi: f64, mut g_lo: f64) -> f64 {
    while hi - lo > EVENT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == g_lo.signum() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Integrate the reduced five-dimensional system.
///
/// Every component is kept non-negative in the sense of
/// [`IntegrationConfig::non_negative`]: on the repelling part of the
/// critical manifold a negative round-off in the infected densities would
/// otherwise grow without bound.
pub fn integrate_reduced(p: &Params, initial: ReducedState, config: &IntegrationConfig<5>) -> Result<Trajectory<5>> {
    p.validate()?;
    initial.check_delta(p.n)?;
    let q = *p;
    let cfg = config.clone().non_negative(&[0, 1, 2, 3, 4]);
    let traj = integrate(move |_, x| reduced_field(x, &q), 0.0, initial.to_array(), &cfg)?;
    Ok(Trajectory { regime: Regime::Full, ..traj }.with_labels(&ReducedState::COMPONENTS))
}

/// Integrate the layer equations on the fast time scale.
pub fn integrate_layer(p: &Params, initial: ReducedState, config: &IntegrationConfig<5>) -> Result<Trajectory<5>> {
    p.validate()?;
    initial.check_delta(p.n)?;
    let q = *p;
    let cfg = config.clone().non_negative(&[0, 1, 2, 3, 4]);
    let traj = integrate(move |_, x| layer_field(x, &q), 0.0, initial.to_array(), &cfg)?;
    Ok(Trajectory { regime: Regime::Fast, ..traj }.with_labels(&ReducedState::COMPONENTS))
}

/// Integrate the slow flow on the critical manifold in slow time.
pub fn integrate_slow(n: f64, initial: SlowPoint, config: &IntegrationConfig<2>) -> Result<Trajectory<2>> {
    let traj = integrate(move |_, x| slow_field(x, n), 0.0, initial.to_array(), config)?;
    Ok(Trajectory { regime: Regime::Slow, ..traj }.with_labels(&SlowPoint::COMPONENTS))
}

/// Fraction of the horizon used for tail classification.
pub const TAIL_FRACTION: f64 = 0.2;

/// Integrate the reduced system at small positive `epsilon` with tolerances
/// tightened to at least `1e-10` relative and `1e-14` absolute, and the step
/// capped at `25 epsilon` so the fast excursions are always resolved.
pub fn integrate_full_stiff(p: &Params, initial: ReducedState, config: &IntegrationConfig<5>) -> Result<Trajectory<5>> {
    let mut cfg = config.clone();
    cfg.rel_tol = cfg.rel_tol.min(1e-10);
    cfg.abs_tol = cfg.abs_tol.min(1e-14);
    if p.epsilon > 0.0 {
        cfg.max_step = cfg.max_step.min(25.0 * p.epsilon);
    }
    let mut traj = integrate_reduced(p, initial, &cfg)?;
    traj.tail_start = Some(config.max_time * (1.0 - TAIL_FRACTION));
    Ok(traj)
}
