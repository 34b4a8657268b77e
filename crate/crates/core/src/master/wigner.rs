//! Wigner function on a rectangular phase-space grid, evolved by the
//! Fokker-Planck form of the master equation in conservative flux form.

use super::{CoefficientSource, GaussianState, MasterCoefficients};
use crate::error::{Error, Result};
use crate::io::{fmt_num, CsvTable};
use std::f64::consts::PI;

/// Uniform axis of `count` nodes from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::domain("axis", format!("need min < max, got [{min}, {max}]")));
        }
        if count < 8 {
            return Err(Error::domain("axis", format!("need at least 8 nodes, got {count}")));
        }
        Ok(Self { min, max, count })
    }

    /// Axis symmetric about zero.
    pub fn symmetric(half_width: f64, count: usize) -> Result<Self> {
        Self::new(-half_width, half_width, count)
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    fn largest_magnitude(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }
}

/// Wigner function sampled on `q × p`, stored row-major with `p` contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub q: Axis,
    pub p: Axis,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn from_fn(q: Axis, p: Axis, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(q.count * p.count);
        for i in 0..q.count {
            let qi = q.value(i);
            for j in 0..p.count {
                values.push(f(qi, p.value(j)));
            }
        }
        Self { q, p, values }
    }

    /// Samples the Gaussian Wigner function of `state`.
    pub fn gaussian(q: Axis, p: Axis, state: &GaussianState) -> Result<Self> {
        state.validate()?;
        Ok(Self::from_fn(q, p, |x, y| gaussian_density(state, x, y)))
    }

    pub fn cell_area(&self) -> f64 {
        self.q.spacing() * self.p.spacing()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Normalised first and second moments.
    pub fn moments(&self) -> GaussianState {
        let (mut m0, mut mq, mut mp) = (0.0, 0.0, 0.0);
        let (mut qq, mut qp, mut pp) = (0.0, 0.0, 0.0);
        for i in 0..self.q.count {
            let x = self.q.value(i);
            let row = &self.values[i * self.p.count..(i + 1) * self.p.count];
            for (j, &w) in row.iter().enumerate() {
                let y = self.p.value(j);
                m0 += w;
                mq += w * x;
                mp += w * y;
                qq += w * x * x;
                qp += w * x * y;
                pp += w * y * y;
            }
        }
        let (mq, mp) = (mq / m0, mp / m0);
        GaussianState {
            mean_q: mq,
            mean_p: mp,
            cov_qq: qq / m0 - mq * mq,
            cov_qp: qp / m0 - mq * mp,
            cov_pp: pp / m0 - mp * mp,
        }
    }

    /// Dense CSV: the header row lists `p`, each row starts with its `q`.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["q/p".to_string()];
        header.extend((0..self.p.count).map(|j| fmt_num(self.p.value(j))));
        let mut t = CsvTable::new(&header);
        for i in 0..self.q.count {
            let row = &self.values[i * self.p.count..(i + 1) * self.p.count];
            t.labelled_row(&fmt_num(self.q.value(i)), row);
        }
        t.into_string()
    }

    /// Fraction of the absolute mass sitting in the outermost ring of cells.
    fn edge_fraction(&self) -> f64 {
        let (nq, np) = (self.q.count, self.p.count);
        let total: f64 = self.values.iter().map(|v| v.abs()).sum();
        let mut edge = 0.0;
        for i in 0..nq {
            for j in 0..np {
                if i == 0 || j == 0 || i == nq - 1 || j == np - 1 {
                    edge += self.values[i * np + j].abs();
                }
            }
        }
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }
}

fn gaussian_density(s: &GaussianState, q: f64, p: f64) -> f64 {
    let det = s.determinant();
    let (dq, dp) = (q - s.mean_q, p - s.mean_p);
    let quad = (s.cov_pp * dq * dq - 2.0 * s.cov_qp * dq * dp + s.cov_qq * dp * dp) / det;
    (-0.5 * quad).exp() / (2.0 * PI * det.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSample {
    pub t: f64,
    pub moments: GaussianState,
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub struct WignerRun {
    pub grid: WignerGrid,
    pub history: Vec<WignerSample>,
    pub snapshots: Vec<(f64, WignerGrid)>,
    /// Largest mass that left through the boundary in a single step.
    pub max_step_outflow: f64,
}

/// Boundary outflow per step above which the grid is declared too small.
pub const MAX_STEP_OUTFLOW: f64 = 1e-6;

/// Stable step for the phase-space integrator given coefficient bounds `env`.
pub fn max_wigner_step(q: &Axis, p: &Axis, env: &MasterCoefficients, omega: f64) -> f64 {
    let (dq, dp) = (q.spacing(), p.spacing());
    let w2_max = omega * omega + env.delta_omega2;
    let vq = p.largest_magnitude();
    let vp = w2_max * q.largest_magnitude() + 2.0 * env.gamma * p.largest_magnitude();
    let advect = (vq / dq).max(vp / dp);
    let diffuse = env.gamma_h / (dp * dp) + env.gamma_f / (2.0 * dq * dp);
    0.25 / advect.max(diffuse)
}

/// Evolves `W` under
/// `∂W/∂t = -p ∂_q W + (Ω² + δΩ²) q ∂_p W + 2Γ ∂_p(pW) + Γ_h ∂²_p W + Γ_f ∂_q ∂_p W`.
///
/// Advection uses third-order upwind-biased face reconstruction, diffusion
/// centred differences, and time stepping the three-stage SSP Runge-Kutta scheme.
/// Moments are recorded every `record_every` steps; snapshots at the steps
/// nearest to `snapshot_times`.
pub fn evolve_wigner_grid(
    initial: &WignerGrid,
    source: CoefficientSource<'_>,
    omega: f64,
    duration: f64,
    dt: f64,
    snapshot_times: &[f64],
    record_every: usize,
) -> Result<WignerRun> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::domain("omega", format!("must be positive, got {omega}")));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::domain("duration", format!("must be non-negative, got {duration}")));
    }
    let env = source.envelope(duration)?;
    let (q, p) = (initial.q, initial.p);
    let bound = max_wigner_step(&q, &p, &env, omega);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::Stability {
            dt,
            suggested: bound,
            reason: "phase-space grid requires dt * max(|p|/dq, |v_p|/dp) <= 1/4".into(),
        });
    }

    // The stationary Gaussian must fit within six standard deviations.
    let late = source.at(duration)?;
    if late.gamma > 0.0 {
        let s_pp = late.gamma_h / (2.0 * late.gamma);
        let w2 = omega * omega + late.delta_omega2;
        let s_qq = s_pp / w2;
        let fits = |a: &Axis, s: f64| a.min <= -6.0 * s.sqrt() && a.max >= 6.0 * s.sqrt();
        if !(fits(&q, s_qq) && fits(&p, s_pp)) {
            return Err(Error::GridTooSmall(format!(
                "stationary widths ({:.3}, {:.3}) need axes covering +-6 sigma",
                s_qq.sqrt(),
                s_pp.sqrt()
            )));
        }
    }
    if initial.edge_fraction() > MAX_STEP_OUTFLOW {
        return Err(Error::GridTooSmall("initial distribution touches the grid boundary".into()));
    }

    let steps = ((duration / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { duration / steps as f64 } else { dt };
    let record_every = record_every.max(1);
    let snapshot_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| ((t / h).round().max(0.0) as usize).min(steps))
        .collect();

    let mut stepper = Stepper::new(q, p, omega);
    let mut u = initial.values.clone();
    let mut u1 = vec![0.0; u.len()];
    let mut u2 = vec![0.0; u.len()];
    let mut k = vec![0.0; u.len()];
    let area = initial.cell_area();

    let mut history = Vec::new();
    let mut snapshots = Vec::new();
    let mut max_step_outflow: f64 = 0.0;
    let record = |step: usize, values: &[f64], history: &mut Vec<WignerSample>, snapshots: &mut Vec<(f64, WignerGrid)>| {
        let t = step as f64 * h;
        let g = WignerGrid {
            q,
            p,
            values: values.to_vec(),
        };
        if step % record_every == 0 || step == steps {
            history.push(WignerSample {
                t,
                moments: g.moments(),
                mass: g.mass(),
            });
        }
        for &s in &snapshot_steps {
            if s == step {
                snapshots.push((t, g.clone()));
            }
        }
    };
    record(0, &u, &mut history, &mut snapshots);
    for step in 0..steps {
        let t = step as f64 * h;
        let o0 = stepper.rhs(&u, &mut k, &source.at(t)?);
        for i in 0..u.len() {
            u1[i] = u[i] + h * k[i];
        }
        let o1 = stepper.rhs(&u1, &mut k, &source.at(t + h)?);
        for i in 0..u.len() {
            u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + h * k[i]);
        }
        let o2 = stepper.rhs(&u2, &mut k, &source.at(t + 0.5 * h)?);
        for i in 0..u.len() {
            u[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + h * k[i]);
        }
        let outflow = h * area * (o0 / 6.0 + o1 / 6.0 + 2.0 * o2 / 3.0);
        max_step_outflow = max_step_outflow.max(outflow);
        if outflow > MAX_STEP_OUTFLOW {
            return Err(Error::GridTooSmall(format!(
                "boundary outflow {outflow:.3e} in one step at t = {:.4}",
                t + h
            )));
        }
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::Stability {
                dt,
                suggested: 0.5 * dt,
                reason: format!("Wigner function diverged at t = {}", t + h),
            });
        }
        record(step + 1, &u, &mut history, &mut snapshots);
    }
    Ok(WignerRun {
        grid: WignerGrid { q, p, values: u },
        history,
        snapshots,
        max_step_outflow,
    })
}

struct Stepper {
    q: Vec<f64>,
    p: Vec<f64>,
    p_face: Vec<f64>,
    dq: f64,
    dp: f64,
    omega2: f64,
    flux_prev: Vec<f64>,
    flux_next: Vec<f64>,
    row_flux: Vec<f64>,
}

#[inline]
fn upwind_face(v: f64, wm1: f64, w0: f64, w1: f64, w2: f64) -> f64 {
    if v >= 0.0 {
        v * (-wm1 + 5.0 * w0 + 2.0 * w1) / 6.0
    } else {
        v * (2.0 * w0 + 5.0 * w1 - w2) / 6.0
    }
}

impl Stepper {
    fn new(q: Axis, p: Axis, omega: f64) -> Self {
        let dp = p.spacing();
        Self {
            q: (0..q.count).map(|i| q.value(i)).collect(),
            p: (0..p.count).map(|j| p.value(j)).collect(),
            p_face: (0..=p.count).map(|j| p.min + (j as f64 - 0.5) * dp).collect(),
            dq: q.spacing(),
            dp,
            omega2: omega * omega,
            flux_prev: vec![0.0; p.count],
            flux_next: vec![0.0; p.count],
            row_flux: vec![0.0; p.count + 1],
        }
    }

    /// Writes `∂W/∂t` into `out` and returns the boundary outflow rate per unit cell area.
    fn rhs(&mut self, w: &[f64], out: &mut [f64], c: &MasterCoefficients) -> f64 {
        let (nq, np) = (self.q.len(), self.p.len());
        let at = |i: isize, j: usize| -> f64 {
            if i < 0 || i >= nq as isize {
                0.0
            } else {
                w[i as usize * np + j]
            }
        };
        let mut outflow = 0.0;

        // q-direction advection, velocity p. Face f sits between rows f-1 and f.
        for j in 0..np {
            let v = self.p[j];
            self.flux_prev[j] = if v < 0.0 { v * w[j] } else { 0.0 };
            outflow -= self.flux_prev[j] / self.dq;
        }
        for f in 1..=nq {
            for j in 0..np {
                let v = self.p[j];
                self.flux_next[j] = if f == nq {
                    let flux = if v > 0.0 { v * w[(nq - 1) * np + j] } else { 0.0 };
                    outflow += flux / self.dq;
                    flux
                } else {
                    let i = f as isize - 1;
                    upwind_face(v, at(i - 1, j), at(i, j), at(i + 1, j), at(i + 2, j))
                };
            }
            let row = f - 1;
            for j in 0..np {
                out[row * np + j] = -(self.flux_next[j] - self.flux_prev[j]) / self.dq;
            }
            std::mem::swap(&mut self.flux_prev, &mut self.flux_next);
        }

        // p-direction advection with v_p = -(Ω² + δΩ²) q - 2Γ p, plus diffusion.
        let w2 = self.omega2 + c.delta_omega2;
        let g2 = 2.0 * c.gamma;
        let diff = c.gamma_h / (self.dp * self.dp);
        for i in 0..nq {
            let row = &w[i * np..(i + 1) * np];
            let base = -w2 * self.q[i];
            let rv = |j: isize| -> f64 {
                if j < 0 || j >= np as isize {
                    0.0
                } else {
                    row[j as usize]
                }
            };
            let v_lo = base - g2 * self.p_face[0];
            self.row_flux[0] = if v_lo < 0.0 { v_lo * row[0] } else { 0.0 };
            let v_hi = base - g2 * self.p_face[np];
            self.row_flux[np] = if v_hi > 0.0 { v_hi * row[np - 1] } else { 0.0 };
            outflow += (self.row_flux[np] - self.row_flux[0]) / self.dp;
            for fj in 1..np {
                let v = base - g2 * self.p_face[fj];
                let j = fj as isize - 1;
                self.row_flux[fj] = upwind_face(v, rv(j - 1), rv(j), rv(j + 1), rv(j + 2));
            }
            let o = &mut out[i * np..(i + 1) * np];
            for j in 0..np {
                // zero diffusive flux through the p boundaries
                let up = if j + 1 < np { row[j + 1] - row[j] } else { 0.0 };
                let down = if j > 0 { row[j] - row[j - 1] } else { 0.0 };
                let lap = up - down;
                o[j] += -(self.row_flux[j + 1] - self.row_flux[j]) / self.dp + diff * lap;
            }
        }

        if c.gamma_f != 0.0 {
            let mixed = c.gamma_f / (4.0 * self.dq * self.dp);
            for i in 0..nq as isize {
                for j in 0..np as isize {
                    let pick = |a: isize, b: isize| -> f64 {
                        if b < 0 || b >= np as isize {
                            0.0
                        } else {
                            at(a, b as usize)
                        }
                    };
                    let cross = pick(i + 1, j + 1) - pick(i + 1, j - 1) - pick(i - 1, j + 1) + pick(i - 1, j - 1);
                    out[i as usize * np + j as usize] += mixed * cross;
                }
            }
        }
        outflow
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments_are_recovered() {
        let s = GaussianState {
            mean_q: 0.4,
            mean_p: -0.2,
            cov_qq: 0.8,
            cov_qp: 0.1,
            cov_pp: 0.6,
        };
        let g = WignerGrid::gaussian(Axis::symmetric(7.0, 141).unwrap(), Axis::symmetric(7.0, 141).unwrap(), &s)
            .unwrap();
        let m = g.moments();
        assert!((g.mass() - 1.0).abs() < 1e-10);
        assert!((m.mean_q - 0.4).abs() < 1e-10);
        assert!((m.cov_qp - 0.1).abs() < 1e-10);
        assert!((m.cov_pp - 0.6).abs() < 1e-10);
    }

    #[test]
    fn refuses_cfl_violation() {
        let s = GaussianState::vacuum(1.0);
        let g = WignerGrid::gaussian(Axis::symmetric(6.0, 61).unwrap(), Axis::symmetric(6.0, 61).unwrap(), &s)
            .unwrap();
        let c = MasterCoefficients::default();
        let err = evolve_wigner_grid(&g, CoefficientSource::Constant(c), 1.0, 1.0, 0.1, &[], 1).unwrap_err();
        match err {
            Error::Stability { suggested, .. } => assert!(suggested < 0.1),
            other => panic!("unexpected {other}"),
        }
    }
}
