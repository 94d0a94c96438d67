//! Dormand–Prince 5(4) integrator with continuous output.

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

/// One accepted step with its interpolant.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    /// End of the valid range; shorter than `t0 + h` when an event cut the step.
    pub t_end: f64,
    rcont: Vec<[f64; 5]>,
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t_end
    }

    pub fn component(&self, t: f64, i: usize) -> f64 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont[i];
        r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])))
    }

    pub fn state(&self, t: f64) -> Vec<f64> {
        (0..self.rcont.len()).map(|i| self.component(t, i)).collect()
    }

    pub fn start(&self, i: usize) -> f64 {
        self.rcont[i][0]
    }

    pub fn end(&self, i: usize) -> f64 {
        self.component(self.t_end, i)
    }
}

/// What the step observer asks the integrator to do.
#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    Continue,
    /// Stop at this time inside the current step.
    StopAt(f64),
    Abort(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeStatus {
    Stopped,
    ReachedEnd,
    MaxSteps,
    StepUnderflow,
    Aborted(String),
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub status: OdeStatus,
    pub t: f64,
    pub y: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    pub segments: Vec<DenseSegment>,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { atol: 1e-12, rtol: 1e-10, max_steps: 2_000_000, h_max: f64::INFINITY }
    }
}

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

impl Dopri5 {
    /// Integrates `y' = f(t, y)` forward from `t0` until `t_end` or the observer stops.
    pub fn solve<F, O>(&self, mut f: F, t0: f64, y0: &[f64], t_end: f64, record: bool, mut observe: O) -> OdeOutcome
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(&DenseSegment, &[f64], &[f64]) -> Control,
    {
        let n = y0.len();
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut k1 = vec![0.0; n];
        let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut ytmp = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        f(t, &y, &mut k1);
        let mut h = self.initial_step(&mut f, t, &y, &k1);
        let mut segments = Vec::new();
        let (mut steps, mut rejected) = (0usize, 0usize);
        let mut last_reject = false;
        let mut err_old: f64 = 1e-4;
        loop {
            if steps >= self.max_steps {
                return OdeOutcome { status: OdeStatus::MaxSteps, t, y, steps, rejected, segments };
            }
            if t >= t_end {
                return OdeOutcome { status: OdeStatus::ReachedEnd, t, y, steps, rejected, segments };
            }
            h = h.min(self.h_max).min(t_end - t);
            if h <= 1e-14 * t.abs().max(1e-300) || h < 1e-300 {
                return OdeOutcome { status: OdeStatus::StepUnderflow, t, y, steps, rejected, segments };
            }
            axpy(&mut ytmp, &y, h, &[(A21, &k1)]);
            f(t + C2 * h, &ytmp, &mut k2);
            axpy(&mut ytmp, &y, h, &[(A31, &k1), (A32, &k2)]);
            f(t + C3 * h, &ytmp, &mut k3);
            axpy(&mut ytmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            f(t + C4 * h, &ytmp, &mut k4);
            axpy(&mut ytmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            f(t + C5 * h, &ytmp, &mut k5);
            axpy(&mut ytmp, &y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            f(t + h, &ytmp, &mut k6);
            axpy(&mut ynew, &y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            f(t + h, &ynew, &mut k7);
            let mut err = 0.0;
            let mut finite = true;
            for i in 0..n {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                err += (e / sk).powi(2);
                finite &= ynew[i].is_finite();
            }
            let err = (err / n as f64).sqrt();
            if !finite || !err.is_finite() {
                h *= 0.1;
                rejected += 1;
                if h < 1e-300 {
                    return OdeOutcome { status: OdeStatus::NonFinite, t, y, steps, rejected, segments };
                }
                last_reject = true;
                continue;
            }
            if err <= 1.0 {
                steps += 1;
                let rcont: Vec<[f64; 5]> = (0..n)
                    .map(|i| {
                        let ydiff = ynew[i] - y[i];
                        let bspl = h * k1[i] - ydiff;
                        [
                            y[i],
                            ydiff,
                            bspl,
                            ydiff - h * k7[i] - bspl,
                            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]),
                        ]
                    })
                    .collect();
                let seg = DenseSegment { t0: t, h, t_end: t + h, rcont };
                let control = observe(&seg, &y, &ynew);
                match control {
                    Control::Continue => {}
                    Control::StopAt(ts) => {
                        let ys = seg.state(ts);
                        if record {
                            segments.push(DenseSegment { t_end: ts, ..seg });
                        }
                        return OdeOutcome { status: OdeStatus::Stopped, t: ts, y: ys, steps, rejected, segments };
                    }
                    Control::Abort(msg) => {
                        if record {
                            segments.push(seg);
                        }
                        return OdeOutcome { status: OdeStatus::Aborted(msg), t: t + h, y: ynew, steps, rejected, segments };
                    }
                }
                if record {
                    segments.push(seg);
                }
                t += h;
                std::mem::swap(&mut y, &mut ynew);
                std::mem::swap(&mut k1, &mut k7);
                // PI step-size control.
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_old.powf(0.4 / 5.0);
                let fac = fac.clamp(0.2, 10.0);
                err_old = err.max(1e-4);
                h *= if last_reject { fac.min(1.0) } else { fac };
                last_reject = false;
            } else {
                rejected += 1;
                h *= (0.9 * err.powf(-0.2)).max(0.2);
                last_reject = true;
            }
        }
    }

    fn initial_step<F: FnMut(f64, &[f64], &mut [f64])>(&self, f: &mut F, t: f64, y: &[f64], k1: &[f64]) -> f64 {
        let n = y.len();
        let sk: Vec<f64> = y.iter().map(|v| self.atol + self.rtol * v.abs()).collect();
        let d0 = (y.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n as f64).sqrt();
        let d1 = (k1.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.h_max);
        let y1: Vec<f64> = y.iter().zip(k1).map(|(v, k)| v + h0 * k).collect();
        let mut k2 = vec![0.0; n];
        f(t + h0, &y1, &mut k2);
        let d2 = (k2.iter().zip(k1).zip(&sk).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / n as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(self.h_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let solver = Dopri5::default();
        let out = solver.solve(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            2.0 * std::f64::consts::PI,
            true,
            |_, _, _| Control::Continue,
        );
        assert_eq!(out.status, OdeStatus::ReachedEnd);
        assert!((out.y[0] - 1.0).abs() < 1e-9 && out.y[1].abs() < 1e-9);
        for seg in &out.segments {
            let tm = seg.t0 + 0.37 * seg.h;
            assert!((seg.component(tm, 0) - tm.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn event_stop_inside_step() {
        let solver = Dopri5::default();
        let out = solver.solve(
            |_, _, dy| dy[0] = 1.0,
            0.0,
            &[0.0],
            10.0,
            true,
            |seg, y0, y1| if y0[0] < 0.5 && y1[0] >= 0.5 { Control::StopAt(seg.t0 + (0.5 - y0[0]) / (y1[0] - y0[0]) * seg.h) } else { Control::Continue },
        );
        assert_eq!(out.status, OdeStatus::Stopped);
        assert!((out.y[0] - 0.5).abs() < 1e-14);
        let last = out.segments.last().unwrap();
        assert!((last.t1() - 0.5).abs() < 1e-14);
        assert!((last.end(0) - 0.5).abs() < 1e-12);
    }
}
