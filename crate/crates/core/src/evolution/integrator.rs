//! Explicit Runge–Kutta time stepping with sampling and tolerance monitoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vector-space operations the integrators need.
pub trait OdeState: Clone {
    fn set_zero(&mut self);
    /// `self += a·x`
    fn axpy(&mut self, a: f64, x: &Self);
    /// `self = y + a·x`
    fn assign_axpy(&mut self, y: &Self, a: f64, x: &Self);
    /// `max_i |err_i| / (atol + rtol·max(|self_i|, |other_i|))`
    fn error_ratio(&self, other: &Self, err: &Self, atol: f64, rtol: f64) -> f64;
}

pub trait OdeSystem {
    type State: OdeState;

    fn rhs(&self, t: f64, y: &Self::State, dy: &mut Self::State);

    /// Projection applied after every accepted step.
    fn post_step(&self, _y: &mut Self::State) {}

    /// Cheap per-step sanity check; a failure triggers a smaller step.
    fn step_check(
        &self,
        _y: &Self::State,
        _cfg: &IntegratorConfig,
    ) -> std::result::Result<(), String> {
        Ok(())
    }

    /// Thorough check run at sample times only.
    fn sample_check(
        &self,
        _y: &Self::State,
        _cfg: &IntegratorConfig,
    ) -> std::result::Result<(), String> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta at fixed `dt`, halved on breach.
    Rk4,
    /// Dormand–Prince 5(4) with error control.
    Adaptive { rtol: f64, atol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// Initial (RK4: fixed) step, in units of `1/γ`.
    pub dt: f64,
    pub t_max: f64,
    pub method: Method,
    /// Maximum allowed `|Tr ρ - 1|`.
    pub tol_trace: f64,
    /// Maximum allowed negative eigenvalue (diagonal entry between samples).
    pub tol_pos: f64,
    /// Number of uniformly spaced records over `[0, t_max]`, endpoints included.
    pub n_samples: usize,
    /// Run a full eigenvalue positivity check at every sample.
    pub full_positivity_check: bool,
    /// Smallest step before giving up.
    pub min_dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 10.0,
            method: Method::Rk4,
            tol_trace: 1e-8,
            tol_pos: 1e-8,
            n_samples: 400,
            full_positivity_check: true,
            min_dt: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn adaptive(mut self, rtol: f64, atol: f64) -> Self {
        self.method = Method::Adaptive { rtol, atol };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.dt,
            self.t_max,
            self.tol_trace,
            self.tol_pos,
            self.min_dt,
        ];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Precondition(
                "dt, t_max, min_dt and tolerances must be positive".into(),
            ));
        }
        if let Method::Adaptive { rtol, atol } = self.method {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(Error::Precondition(
                    "adaptive tolerances must be positive".into(),
                ));
            }
        }
        if self.n_samples < 2 {
            return Err(Error::Precondition(
                "at least two samples are needed".into(),
            ));
        }
        Ok(())
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.n_samples;
        (0..n)
            .map(|k| self.t_max * k as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Integrates `sys` from `y0`, calling `on_sample` at every sample time
/// (starting with `t = 0`). Returns the state at `t_max`.
pub fn integrate<S, F>(
    sys: &S,
    y0: &S::State,
    cfg: &IntegratorConfig,
    mut on_sample: F,
) -> Result<S::State>
where
    S: OdeSystem,
    F: FnMut(f64, &S::State) -> Result<()>,
{
    cfg.validate()?;
    let times = cfg.sample_times();
    let mut y = y0.clone();
    let mut t = 0.0;
    let mut stepper = Stepper::new(y0, cfg);
    for &ts in &times {
        while ts - t > 1e-12 * cfg.t_max {
            stepper.advance(sys, &mut y, &mut t, ts, cfg)?;
        }
        t = ts;
        sys.sample_check(&y, cfg)
            .map_err(|reason| Error::IntegrationFailure { t, reason })?;
        on_sample(t, &y)?;
    }
    Ok(y)
}

struct Stepper<T> {
    h: f64,
    k: Vec<T>,
    tmp: T,
    ynew: T,
}

const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl<T: OdeState> Stepper<T> {
    fn new(y0: &T, cfg: &IntegratorConfig) -> Self {
        let stages = match cfg.method {
            Method::Rk4 => 2,
            Method::Adaptive { .. } => 7,
        };
        Self {
            h: cfg.dt,
            k: vec![y0.clone(); stages],
            tmp: y0.clone(),
            ynew: y0.clone(),
        }
    }

    fn advance<S>(
        &mut self,
        sys: &S,
        y: &mut T,
        t: &mut f64,
        t_end: f64,
        cfg: &IntegratorConfig,
    ) -> Result<()>
    where
        S: OdeSystem<State = T>,
    {
        loop {
            let h = self.h.min(t_end - *t);
            let clipped = h < self.h;
            let ok = match cfg.method {
                Method::Rk4 => {
                    self.rk4(sys, y, *t, h);
                    sys.step_check(&self.ynew, cfg).map(|_| None)
                }
                Method::Adaptive { rtol, atol } => {
                    let err = self.dopri(sys, y, *t, h, rtol, atol);
                    if err.is_finite() && err <= 1.0 {
                        sys.step_check(&self.ynew, cfg).map(|_| Some(err))
                    } else {
                        Err(format!("error ratio {err:.3e}"))
                    }
                }
            };
            match ok {
                Ok(err) => {
                    std::mem::swap(y, &mut self.ynew);
                    sys.post_step(y);
                    *t += h;
                    if let Some(err) = err {
                        let grow = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        if !clipped || grow < 1.0 {
                            self.h = h * grow;
                        }
                    }
                    return Ok(());
                }
                Err(reason) => {
                    self.h = match cfg.method {
                        Method::Rk4 => h / 2.0,
                        Method::Adaptive { .. } => h * 0.25,
                    };
                    if self.h < cfg.min_dt {
                        return Err(Error::IntegrationFailure { t: *t, reason });
                    }
                }
            }
        }
    }

    fn rk4<S: OdeSystem<State = T>>(&mut self, sys: &S, y: &T, t: f64, h: f64) {
        let (k, acc) = self.k.split_at_mut(1);
        let (k, acc) = (&mut k[0], &mut acc[0]);
        sys.rhs(t, y, k);
        acc.assign_axpy(k, 0.0, k);
        self.tmp.assign_axpy(y, 0.5 * h, k);
        sys.rhs(t + 0.5 * h, &self.tmp, k);
        acc.axpy(2.0, k);
        self.tmp.assign_axpy(y, 0.5 * h, k);
        sys.rhs(t + 0.5 * h, &self.tmp, k);
        acc.axpy(2.0, k);
        self.tmp.assign_axpy(y, h, k);
        sys.rhs(t + h, &self.tmp, k);
        acc.axpy(1.0, k);
        self.ynew.assign_axpy(y, h / 6.0, acc);
    }

    fn dopri<S: OdeSystem<State = T>>(
        &mut self,
        sys: &S,
        y: &T,
        t: f64,
        h: f64,
        rtol: f64,
        atol: f64,
    ) -> f64 {
        sys.rhs(t, y, &mut self.k[0]);
        for stage in 1..7 {
            self.tmp.assign_axpy(y, 0.0, y);
            for (j, &a) in DP_A[stage - 1].iter().enumerate().take(stage) {
                if a != 0.0 {
                    self.tmp.axpy(h * a, &self.k[j]);
                }
            }
            let (_, rest) = self.k.split_at_mut(stage);
            sys.rhs(t + DP_C[stage] * h, &self.tmp, &mut rest[0]);
        }
        // stage 7 was evaluated at the 5th-order solution
        std::mem::swap(&mut self.ynew, &mut self.tmp);
        self.tmp.set_zero();
        for (j, &e) in DP_E.iter().enumerate() {
            if e != 0.0 {
                self.tmp.axpy(h * e, &self.k[j]);
            }
        }
        y.error_ratio(&self.ynew, &self.tmp, atol, rtol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug)]
    struct V(Vec<f64>);

    impl OdeState for V {
        fn set_zero(&mut self) {
            self.0.iter_mut().for_each(|x| *x = 0.0);
        }
        fn axpy(&mut self, a: f64, x: &Self) {
            self.0.iter_mut().zip(&x.0).for_each(|(s, x)| *s += a * x);
        }
        fn assign_axpy(&mut self, y: &Self, a: f64, x: &Self) {
            for ((s, y), x) in self.0.iter_mut().zip(&y.0).zip(&x.0) {
                *s = y + a * x;
            }
        }
        fn error_ratio(&self, other: &Self, err: &Self, atol: f64, rtol: f64) -> f64 {
            self.0
                .iter()
                .zip(&other.0)
                .zip(&err.0)
                .map(|((a, b), e)| e.abs() / (atol + rtol * a.abs().max(b.abs())))
                .fold(0.0, f64::max)
        }
    }

    /// Harmonic oscillator plus damping on the second component.
    struct Osc;
    impl OdeSystem for Osc {
        type State = V;
        fn rhs(&self, _t: f64, y: &V, dy: &mut V) {
            dy.0[0] = y.0[1];
            dy.0[1] = -y.0[0];
            dy.0[2] = -3.0 * y.0[2];
        }
    }

    fn run(cfg: &IntegratorConfig) -> Vec<(f64, V)> {
        let mut out = Vec::new();
        integrate(&Osc, &V(vec![1.0, 0.0, 1.0]), cfg, |t, y| {
            out.push((t, y.clone()));
            Ok(())
        })
        .unwrap();
        out
    }

    #[test]
    fn rk4_and_dopri_track_exact_solution() {
        let base = IntegratorConfig::default().with_t_max(5.0).with_samples(11);
        for cfg in [base.clone().with_dt(1e-2), base.adaptive(1e-10, 1e-12)] {
            let out = run(&cfg);
            assert_eq!(out.len(), 11);
            for (t, y) in out {
                assert!((y.0[0] - t.cos()).abs() < 1e-8, "{cfg:?} t={t}");
                assert!((y.0[2] - (-3.0 * t).exp()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let err = |dt: f64| {
            let out = run(&IntegratorConfig::default()
                .with_t_max(1.0)
                .with_samples(2)
                .with_dt(dt));
            (out[1].1 .0[0] - 1f64.cos()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio.log2() - 4.0).abs() < 0.3, "order {}", ratio.log2());
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(IntegratorConfig::default()
            .with_samples(1)
            .validate()
            .is_err());
    }

    struct Failing;
    impl OdeSystem for Failing {
        type State = V;
        fn rhs(&self, _t: f64, _y: &V, dy: &mut V) {
            dy.0[0] = 1.0;
        }
        fn step_check(&self, y: &V, _cfg: &IntegratorConfig) -> std::result::Result<(), String> {
            if y.0[0] > 0.5 {
                Err("too large".into())
            } else {
                Ok(())
            }
        }
    }

    #[test]
    fn breach_reports_time() {
        let cfg = IntegratorConfig::default().with_t_max(1.0).with_dt(0.1);
        let err = integrate(&Failing, &V(vec![0.0]), &cfg, |_, _| Ok(())).unwrap_err();
        match err {
            Error::IntegrationFailure { t, .. } => assert!((t - 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
