use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{site_basis, OracleLimits, OracleModel};
use crate::error::{Error, Result};
use crate::evolution::{ObservableRecord, SpinMoments};
use crate::model::ProductBasis;
use crate::rng::stream;
use crate::sparse::Csr;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub t_max: f64,
    /// Fixed RK4 step of the no-jump evolution.
    pub dt: f64,
    pub n_samples: usize,
    pub n_traj: usize,
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    pub workers: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            dt: 1e-3,
            n_samples: 400,
            n_traj: 100,
            seed: 0,
            workers: 1,
        }
    }
}

impl TrajectoryConfig {
    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.dt > 0.0) {
            return Err(Error::Precondition(
                "trajectory t_max and dt must be positive".into(),
            ));
        }
        if self.n_samples < 2 || self.n_traj == 0 || self.workers == 0 {
            return Err(Error::Precondition(
                "need n_samples >= 2, n_traj >= 1 and workers >= 1".into(),
            ));
        }
        Ok(())
    }

    fn sample_times(&self) -> Vec<f64> {
        (0..self.n_samples)
            .map(|i| self.t_max * i as f64 / (self.n_samples - 1) as f64)
            .collect()
    }
}

/// Ensemble observables with standard errors of the linear ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    #[serde(flatten)]
    pub record: ObservableRecord,
    pub emission_rate_stderr: f64,
    pub sz_stderr: f64,
    pub s2_stderr: f64,
}

struct PureObservables {
    basis: std::sync::Arc<ProductBasis>,
    spsm: Csr,
    decay: Csr,
}

impl PureObservables {
    fn new(model: &OracleModel, signs: &[f64]) -> Self {
        let n = model.n_sites();
        let d = 1usize << n;
        let lowers = model.site_lowering();
        let s_minus = Csr::linear_combination(
            d,
            d,
            signs
                .iter()
                .zip(&lowers)
                .map(|(&s, l)| (C64::new(s, 0.0), l)),
        );
        let raises: Vec<Csr> = lowers.iter().map(Csr::adjoint).collect();
        let mut terms = Vec::new();
        for (a, raise) in raises.iter().enumerate() {
            for (b, lower) in lowers.iter().enumerate() {
                let g = model.gamma()[(a, b)];
                if g != 0.0 {
                    terms.push((C64::new(g, 0.0), raise.mul(lower)));
                }
            }
        }
        Self {
            basis: site_basis(n),
            spsm: s_minus.adjoint().mul(&s_minus),
            decay: Csr::linear_combination(d, d, terms.iter().map(|(c, m)| (*c, m))),
        }
    }

    /// Moments of the normalized state `psi`.
    fn moments(&self, psi: &DVector<C64>) -> SpinMoments {
        let n = self.basis.n_sites();
        let mut m = SpinMoments::zeros(n);
        let u = self.spsm.matvec(psi);
        for (b, (&a, &ub)) in psi.iter().zip(u.iter()).enumerate() {
            let k = self.basis.excitation(b);
            m.populations[k] += a.norm_sqr();
            m.spsm[k] += (a.conj() * ub).re;
        }
        m.emission_rate = self.decay.expectation(psi).re;
        m
    }
}

struct Unraveling {
    jumps: Vec<Csr>,
    h_eff: Csr,
}

impl Unraveling {
    fn rk4(&self, psi: &DVector<C64>, h: f64) -> DVector<C64> {
        let mi = C64::new(0.0, -1.0);
        let f = |x: &DVector<C64>| {
            let mut y = DVector::zeros(x.len());
            self.h_eff.matvec_acc(mi, x.as_slice(), y.as_mut_slice());
            y
        };
        let k1 = f(psi);
        let k2 = f(&(psi + &k1 * C64::new(0.5 * h, 0.0)));
        let k3 = f(&(psi + &k2 * C64::new(0.5 * h, 0.0)));
        let k4 = f(&(psi + &k3 * C64::new(h, 0.0)));
        psi + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
    }

    /// One trajectory, returning the moments at every sample time.
    fn run<R: Rng>(
        &self,
        psi0: &DVector<C64>,
        times: &[f64],
        dt: f64,
        obs: &PureObservables,
        rng: &mut R,
    ) -> Result<Vec<SpinMoments>> {
        let mut psi = psi0.clone();
        let mut threshold: f64 = rng.random();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &ts in times {
            while ts - t > 1e-12 * ts.max(1.0) {
                let h = dt.min(ts - t);
                let trial = self.rk4(&psi, h);
                if trial.norm_squared() > threshold {
                    psi = trial;
                    t += h;
                    continue;
                }
                // the norm crosses the threshold inside this step
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.rk4(&psi, mid).norm_squared() > threshold {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-13 * h.max(1e-300) {
                        break;
                    }
                }
                psi = self.rk4(&psi, hi);
                t += hi;
                let candidates: Vec<DVector<C64>> =
                    self.jumps.iter().map(|c| c.matvec(&psi)).collect();
                let weights: Vec<f64> = candidates.iter().map(|v| v.norm_squared()).collect();
                let total: f64 = weights.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::IntegrationFailure {
                        t,
                        reason: "norm decayed without an available jump".into(),
                    });
                }
                let mut pick = rng.random::<f64>() * total;
                let mut chosen = weights.len() - 1;
                for (k, &w) in weights.iter().enumerate() {
                    if pick < w {
                        chosen = k;
                        break;
                    }
                    pick -= w;
                }
                psi = &candidates[chosen] / C64::new(weights[chosen].sqrt(), 0.0);
                threshold = rng.random();
            }
            t = ts;
            let norm = psi.norm();
            out.push(obs.moments(&(&psi / C64::new(norm, 0.0))));
        }
        Ok(out)
    }
}

/// Monte Carlo wave-function unraveling of the full master equation.
///
/// Trajectory `k` draws its random numbers from stream `(seed, k)` and the
/// ensemble sums run in trajectory order, so results are reproducible for
/// any worker count.
pub fn evolve_trajectories(
    model: &OracleModel,
    psi0: &DVector<C64>,
    config: &TrajectoryConfig,
    limits: &OracleLimits,
    signs: &[f64],
) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    let n = model.n_sites();
    limits.check_trajectories(n)?;
    if psi0.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: psi0.len(),
        });
    }
    if signs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: signs.len(),
        });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NumericalState(format!(
            "initial state has norm {norm}"
        )));
    }
    let (jumps, h_eff) = model.unraveling()?;
    let unr = Unraveling { jumps, h_eff };
    let obs = PureObservables::new(model, signs);
    let times = config.sample_times();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let runs: Vec<Vec<SpinMoments>> = pool.install(|| {
        (0..config.n_traj)
            .into_par_iter()
            .map(|k| {
                unr.run(
                    psi0,
                    &times,
                    config.dt,
                    &obs,
                    &mut stream(config.seed, k as u64),
                )
            })
            .collect::<Result<_>>()
    })?;

    let count = config.n_traj as f64;
    let stderr = |sum: f64, sum_sq: f64| {
        if config.n_traj < 2 {
            return 0.0;
        }
        let mean = sum / count;
        ((sum_sq / count - mean * mean).max(0.0) * count / (count - 1.0) / count).sqrt()
    };
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut mean = SpinMoments::zeros(n);
            let mut sums = [0.0; 6];
            for run in &runs {
                let m = &run[i];
                mean.accumulate(1.0 / count, m);
                let (r, sz, s2) = (m.emission_rate, m.sz_mean(), m.s2_mean());
                sums[0] += r;
                sums[1] += r * r;
                sums[2] += sz;
                sums[3] += sz * sz;
                sums[4] += s2;
                sums[5] += s2 * s2;
            }
            Ok(TrajectoryRecord {
                record: ObservableRecord::from_moments(t, &mean)?,
                emission_rate_stderr: stderr(sums[0], sums[1]),
                sz_stderr: stderr(sums[2], sums[3]),
                s2_stderr: stderr(sums[4], sums[5]),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_gamma_waveguide, build_hcoh_waveguide, Spacing};
    use nalgebra::DMatrix;

    fn inverted(n: usize) -> DVector<C64> {
        let mut v = DVector::zeros(1 << n);
        v[(1 << n) - 1] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn hamiltonian_only_preserves_norm() {
        let n = 3;
        let j = build_hcoh_waveguide(n, Spacing::new(1, 2).unwrap(), 1.0);
        let model = OracleModel::new(DMatrix::zeros(n, n), Some(j), 0.0).unwrap();
        let mut psi = DVector::zeros(8);
        psi[0b100] = C64::new(1.0, 0.0);
        let cfg = TrajectoryConfig {
            t_max: 2.0,
            dt: 1e-3,
            n_samples: 5,
            n_traj: 1,
            seed: 1,
            workers: 1,
        };
        let out =
            evolve_trajectories(&model, &psi, &cfg, &OracleLimits::default(), &[1.0; 3]).unwrap();
        for r in &out {
            assert!((r.record.manifold_populations[1] - 1.0).abs() < 1e-9);
            assert_eq!(r.record.emission_rate, 0.0);
        }
    }

    #[test]
    fn deterministic_for_any_worker_count() {
        let c = build_gamma_waveguide(3, Spacing::new(2, 3).unwrap(), 1.0, None).unwrap();
        let model = OracleModel::from_coupling(&c, 0.1).unwrap();
        let mut cfg = TrajectoryConfig {
            t_max: 1.0,
            dt: 1e-2,
            n_samples: 6,
            n_traj: 12,
            seed: 9,
            workers: 1,
        };
        let a = evolve_trajectories(
            &model,
            &inverted(3),
            &cfg,
            &OracleLimits::default(),
            &[1.0; 3],
        )
        .unwrap();
        cfg.workers = 3;
        let b = evolve_trajectories(
            &model,
            &inverted(3),
            &cfg,
            &OracleLimits::default(),
            &[1.0; 3],
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_qubit_mean_decay() {
        let model = OracleModel::new(DMatrix::identity(1, 1), None, 0.0).unwrap();
        let cfg = TrajectoryConfig {
            t_max: 2.0,
            dt: 1e-2,
            n_samples: 5,
            n_traj: 4000,
            seed: 3,
            workers: 1,
        };
        let out = evolve_trajectories(&model, &inverted(1), &cfg, &OracleLimits::default(), &[1.0])
            .unwrap();
        for r in &out {
            let exact = -0.5 + (-r.record.t).exp();
            assert!(
                (r.record.sz_mean - exact).abs() < 4.0 * r.sz_stderr + 1e-12,
                "t={}",
                r.record.t
            );
        }
    }
}
