//! Adaptive Dormand–Prince 5(4) integration with quartic continuous output, used as
//! the ground-truth oracle for every periodic solution.

mod orbit;
mod verify;

pub use orbit::{
    jacobi_constant, jacobi_variation, orbit_keeping, OrbitKeepingOptions, OrbitKeepingReport,
};
pub use verify::{
    settle_and_project, verify_periodicity, verify_periodicity_with, PeriodicityMetrics,
    VerifyOptions,
};

use crate::error::{HbError, Result};
use crate::systems::SystemDef;
use std::io::Write;

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

const MAX_STEPS: usize = 5_000_000;

/// One accepted step with its continuous-extension coefficients.
#[derive(Clone, Debug)]
struct Segment {
    t: f64,
    h: f64,
    rcont: [Vec<f64>; 5],
}

/// Dense trajectory over `[t_start, t_end]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    dim: usize,
    t_start: f64,
    t_end: f64,
    initial: Vec<f64>,
    segments: Vec<Segment>,
    final_state: Vec<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn step_count(&self) -> usize {
        self.segments.len()
    }

    pub fn final_state(&self) -> &[f64] {
        &self.final_state
    }

    /// Accepted step boundaries with the states there.
    pub fn nodes(&self) -> Vec<(f64, Vec<f64>)> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push((self.t_start, self.initial.clone()));
        for s in &self.segments {
            let y1: Vec<f64> = s.rcont[0]
                .iter()
                .zip(&s.rcont[1])
                .map(|(a, b)| a + b)
                .collect();
            out.push((s.t + s.h, y1));
        }
        if let Some(last) = out.last_mut() {
            last.1 = self.final_state.clone();
        }
        out
    }

    /// State at `t`, clamped to the integrated interval.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        if self.segments.is_empty() || t <= self.t_start {
            return self.initial.clone();
        }
        if t >= self.t_end {
            return self.final_state.clone();
        }
        let idx = self
            .segments
            .partition_point(|s| s.t + s.h < t)
            .min(self.segments.len() - 1);
        let s = &self.segments[idx];
        let theta = (t - s.t) / s.h;
        let theta1 = 1.0 - theta;
        let r = &s.rcont;
        (0..self.dim)
            .map(|i| {
                r[0][i]
                    + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
            })
            .collect()
    }

    /// CSV with a `t,<names…>` header, one row per accepted step or per
    /// uniform sample when `samples` is given.
    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        names: &[String],
        samples: Option<usize>,
    ) -> std::io::Result<()> {
        write!(w, "t")?;
        for i in 0..self.dim {
            match names.get(i) {
                Some(n) => write!(w, ",{n}")?,
                None => write!(w, ",x{i}")?,
            }
        }
        writeln!(w)?;
        let rows: Vec<(f64, Vec<f64>)> = match samples {
            Some(n) if n > 0 => {
                let span = self.t_end - self.t_start;
                (0..=n)
                    .map(|k| {
                        let t = self.t_start + span * k as f64 / n as f64;
                        (t, self.eval(t))
                    })
                    .collect()
            }
            _ => self.nodes(),
        };
        for (t, x) in rows {
            write!(w, "{t:.16e}")?;
            for v in x {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn combine(y: &[f64], h: f64, terms: &[(f64, &[f64])], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Integrates `sys` from `x0` over `t_span` with absolute and relative
/// tolerance `tol`. `omega` is the forcing frequency seen by the field.
pub fn propagate(
    sys: &SystemDef,
    x0: &[f64],
    t_span: (f64, f64),
    tol: f64,
    omega: f64,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    let dim = sys.dim();
    if x0.len() != dim {
        return Err(HbError::InvalidInput(format!(
            "initial state has length {}, system dimension is {dim}",
            x0.len()
        )));
    }
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(HbError::InvalidInput(format!(
            "tolerance {tol:e} outside [1e-14, 1e-3]"
        )));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(HbError::InvalidInput(format!(
            "invalid time span [{t0}, {t1}]"
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(HbError::NonFinite("initial state".into()));
    }
    let mut traj = Trajectory {
        dim,
        t_start: t0,
        t_end: t1,
        initial: x0.to_vec(),
        segments: Vec::new(),
        final_state: x0.to_vec(),
    };
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(traj);
    }
    let f = |t: f64, y: &[f64], out: &mut [f64]| sys.eval(y, t, omega, out);
    let sk = |a: f64, b: f64| tol + tol * a.abs().max(b.abs());

    let mut y = x0.to_vec();
    let mut t = t0;
    let mut k1 = vec![0.0; dim];
    f(t, &y, &mut k1);
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut ys = vec![0.0; dim];
    let mut y1 = vec![0.0; dim];

    // Initial step from the second-derivative estimate.
    let mut h = {
        let d0 = (y.iter().map(|v| (v / sk(*v, 0.0)).powi(2)).sum::<f64>() / dim as f64).sqrt();
        let d1 = (k1
            .iter()
            .zip(&y)
            .map(|(k, v)| (k / sk(*v, 0.0)).powi(2))
            .sum::<f64>()
            / dim as f64)
            .sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span);
        combine(&y, h0, &[(1.0, &k1)], &mut ys);
        f(t + h0, &ys, &mut k2);
        let d2 = (k2
            .iter()
            .zip(&k1)
            .zip(&y)
            .map(|((a, b), v)| ((a - b) / sk(*v, 0.0)).powi(2))
            .sum::<f64>()
            / dim as f64)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    };

    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let (facc1, facc2) = (1.0 / 0.2, 1.0 / 10.0);
    let mut facold: f64 = 1e-4;
    let mut rejected = false;

    for _ in 0..MAX_STEPS {
        if h < 1e-15 * span {
            return Err(HbError::StepUnderflow { t, h });
        }
        let last = t + h >= t1 - 1e-14 * span.max(1.0);
        if last {
            h = t1 - t;
        }
        combine(&y, h, &[(A21, &k1)], &mut ys);
        f(t + C2 * h, &ys, &mut k2);
        combine(&y, h, &[(A31, &k1), (A32, &k2)], &mut ys);
        f(t + C3 * h, &ys, &mut k3);
        combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)], &mut ys);
        f(t + C4 * h, &ys, &mut k4);
        combine(
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            &mut ys,
        );
        f(t + C5 * h, &ys, &mut k5);
        combine(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            &mut ys,
        );
        f(t + h, &ys, &mut k6);
        combine(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            &mut y1,
        );
        f(t + h, &y1, &mut k7);

        let mut err = 0.0;
        for i in 0..dim {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err += (e / sk(y[i], y1[i])).powi(2);
        }
        err = (err / dim as f64).sqrt();
        if !err.is_finite() || y1.iter().any(|v| !v.is_finite()) {
            // Shrink hard and retry; a persistent blow-up ends in underflow.
            h *= 0.1;
            rejected = true;
            continue;
        }
        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            let fac = (fac11 / facold.powf(beta) / safe).clamp(facc2, facc1);
            let mut hnew = h / fac;
            facold = err.max(1e-4);
            let mut rcont = [
                y.clone(),
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
            ];
            for i in 0..dim {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            traj.segments.push(Segment { t, h, rcont });
            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut y1);
            t = if last { t1 } else { t + h };
            if last {
                traj.final_state = y;
                return Ok(traj);
            }
            if rejected {
                hnew = hnew.min(h);
            }
            rejected = false;
            h = hnew;
        } else {
            h /= facc1.min(fac11 / safe);
            rejected = true;
        }
    }
    Err(HbError::InvalidInput(format!(
        "step budget of {MAX_STEPS} exhausted at t = {t}"
    )))
}
