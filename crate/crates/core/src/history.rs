//! Dense storage of the solution segment `u_t` on `[t − r, t]`.
//!
//! The method of steps needs the recent past of the solution: the delay
//! functional reads `∫_{−r}^0 ‖u(t+s)‖² ds`, the distributed term averages
//! `b(u(t+θ, ·))` against a kernel supported in `[−r, 0]`, and the discrete
//! term samples `u(t − η)`. The buffer keeps uniformly spaced snapshots
//! (spacing `Δt`, with `r/Δt` an integer so the history grid coincides with
//! the integrator grid) and interpolates *linearly per coefficient* between
//! them — first order, matching the integrator, so convergence rates stay
//! predictable.
//!
//! Samples older than `t − r − Δt` are discarded on append; the one extra
//! sample beyond `t − r` keeps interpolation at exactly `t − r` well-defined
//! under floating-point drift.

use alloc::format;
use alloc::vec::Vec;

use crate::delay::StepKernel;
use crate::error::{Error, Result};
use crate::math;
use crate::spectral::{SpectralBasis, SpectralField};

/// Relative tolerance (in units of `Δt`) for snapping query times to stored
/// nodes and for span checks.
const NODE_SNAP: f64 = 1e-9;

/// Uniformly sampled solution segment with linear interpolation.
#[derive(Debug, Clone)]
pub struct HistorySegment {
    delay_span: f64,
    dt: f64,
    /// Strictly increasing, uniformly spaced sample times.
    times: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl HistorySegment {
    /// Builds the segment for a fresh simulation: samples at
    /// `−r, −r+Δt, …, 0`, taking `φ(t_i)` before time zero and `u0` at zero.
    ///
    /// `r/Δt` must be an integer so the history grid aligns with the
    /// integrator grid.
    pub fn init_from_initial_data<F>(
        u0: SpectralField,
        phi: F,
        delay_span: f64,
        dt: f64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> SpectralField,
    {
        let steps = steps_in_span(delay_span, dt)?;
        let mut times = Vec::with_capacity(steps + 1);
        let mut fields = Vec::with_capacity(steps + 1);
        for i in 0..steps {
            // Counting down keeps the final node at exactly 0.0.
            let t = -((steps - i) as f64) * dt;
            times.push(t);
            fields.push(phi(t));
        }
        times.push(0.0);
        fields.push(u0);
        Self::from_parts(delay_span, dt, times, fields)
    }

    /// Builds a segment from pre-computed uniform samples ending at
    /// `start_time + (fields.len()−1)·Δt`; used to restart a simulation from
    /// a stored trajectory tail.
    pub fn from_uniform_samples(
        start_time: f64,
        dt: f64,
        fields: Vec<SpectralField>,
        delay_span: f64,
    ) -> Result<Self> {
        let steps = steps_in_span(delay_span, dt)?;
        if fields.len() < steps + 1 {
            return Err(Error::HorizonTooShort {
                needed: delay_span,
                have: (fields.len().saturating_sub(1)) as f64 * dt,
            });
        }
        let times = (0..fields.len())
            .map(|i| start_time + i as f64 * dt)
            .collect();
        Self::from_parts(delay_span, dt, times, fields)
    }

    fn from_parts(
        delay_span: f64,
        dt: f64,
        times: Vec<f64>,
        fields: Vec<SpectralField>,
    ) -> Result<Self> {
        let order = fields[0].order();
        for (t, f) in times.iter().zip(&fields) {
            if f.order() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: f.order(),
                });
            }
            if !f.is_finite() {
                return Err(Error::NonFiniteState { t: *t });
            }
        }
        Ok(HistorySegment {
            delay_span,
            dt,
            times,
            fields,
        })
    }

    pub fn delay_span(&self) -> f64 {
        self.delay_span
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn order(&self) -> usize {
        self.fields[0].order()
    }

    pub fn latest_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn oldest_time(&self) -> f64 {
        self.times[0]
    }

    /// The most recent stored field, `u(t_now)`.
    pub fn latest_field(&self) -> &SpectralField {
        self.fields.last().unwrap()
    }

    /// Appends the next snapshot. The time must advance by exactly one grid
    /// step; samples older than `t − r − Δt` are discarded.
    pub fn append(&mut self, t: f64, field: SpectralField) -> Result<()> {
        let last = self.latest_time();
        if t <= last {
            return Err(Error::NonMonotoneTime { last, got: t });
        }
        if math::abs(t - (last + self.dt)) > NODE_SNAP * self.dt {
            return Err(Error::Invalid(format!(
                "append at t = {t} is off the uniform grid (expected {})",
                last + self.dt
            )));
        }
        if field.order() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                got: field.order(),
            });
        }
        if !field.is_finite() {
            return Err(Error::NonFiniteState { t });
        }
        self.times.push(t);
        self.fields.push(field);
        // Keep one sample beyond t − r so interpolation at exactly t − r
        // stays bracketed.
        let cutoff = t - self.delay_span - self.dt - NODE_SNAP * self.dt;
        let drop = self.times.iter().take_while(|s| **s < cutoff).count();
        if drop > 0 {
            self.times.drain(..drop);
            self.fields.drain(..drop);
        }
        Ok(())
    }

    /// Linear interpolation at time `s`. Queries are restricted to the
    /// logical span `[t_now − r, t_now]`; anything outside is an error
    /// (never extrapolate), even if an extra pruned-boundary sample exists.
    pub fn eval(&self, s: f64) -> Result<SpectralField> {
        let tol = NODE_SNAP * self.dt;
        let latest = self.latest_time();
        let lo = latest - self.delay_span;
        if s < lo - tol || s > latest + tol {
            return Err(Error::SpanNotCovered {
                requested: s,
                lo,
                hi: latest,
            });
        }
        let pos = (s - self.times[0]) / self.dt;
        let idx = math::round(pos);
        if math::abs(pos - idx) <= NODE_SNAP {
            // On a node: reproduce the stored field exactly.
            return Ok(self.fields[idx as usize].clone());
        }
        let i = pos as usize; // floor for pos ≥ 0; pos > 0 here since s ≥ lo ≥ t₀ + Δt − tol
        let i = i.min(self.times.len() - 2);
        let w = (s - self.times[i]) / self.dt;
        let a = &self.fields[i];
        let b = &self.fields[i + 1];
        Ok(a.add_scaled(1.0, &b.add_scaled(-1.0, a).scaled(w)))
    }

    /// Composite-trapezoid value of `∫_{−r}^0 ‖u(t+s)‖² ds` on the sample
    /// grid.
    pub fn segment_norm_sq(&self, t: f64) -> Result<f64> {
        let steps = steps_in_span(self.delay_span, self.dt)?;
        let mut acc = 0.0;
        for i in 0..=steps {
            let s = t - self.delay_span + i as f64 * self.dt;
            let n = self.eval(s)?.norm_l2();
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            acc += w * n * n;
        }
        Ok(acc * self.dt)
    }

    /// Composite-trapezoid value of `∫_{−r}^0 ‖u(t+s) − v(t+s)‖² ds` for two
    /// segments on the same grid (the history part of the H-metric).
    pub fn window_distance_sq(&self, other: &HistorySegment, t: f64) -> Result<f64> {
        if math::abs(self.delay_span - other.delay_span) > NODE_SNAP
            || math::abs(self.dt - other.dt) > NODE_SNAP * self.dt
        {
            return Err(Error::Invalid(
                "window distance requires segments on matching (r, Δt) grids".into(),
            ));
        }
        let steps = steps_in_span(self.delay_span, self.dt)?;
        let mut acc = 0.0;
        for i in 0..=steps {
            let s = t - self.delay_span + i as f64 * self.dt;
            let d = self.eval(s)?.l2_distance(&other.eval(s)?);
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            acc += w * d * d;
        }
        Ok(acc * self.dt)
    }

    /// Inner time average of the distributed delay term: for each physical
    /// grid node `y`,
    ///
    /// ```text
    /// w(y) = ∫ ξ(θ) · map(u(t+θ, y)) dθ
    /// ```
    ///
    /// computed by composite trapezoid with 8 uniform subintervals of the
    /// kernel support (independent of `Δt`, since the kernel width may be
    /// much smaller than a time step); the history is interpolated at the
    /// quadrature nodes and synthesized on the grid.
    pub fn kernel_time_integral<F>(
        &self,
        t: f64,
        kernel: &StepKernel,
        basis: &SpectralBasis,
        map: F,
    ) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> f64,
    {
        const SUBDIVISIONS: usize = 8;
        let (lo, hi) = kernel.support();
        let tol = NODE_SNAP * self.dt;
        if lo < -self.delay_span - tol || hi > tol {
            return Err(Error::Invalid(format!(
                "kernel support [{lo}, {hi}] escapes [-r, 0] = [{}, 0]",
                -self.delay_span
            )));
        }
        let step = (hi - lo) / SUBDIVISIONS as f64;
        let mut out = alloc::vec![0.0; basis.domain().grid_len()];
        for q in 0..=SUBDIVISIONS {
            let theta = lo + q as f64 * step;
            // Clamp endpoints into the covered span to absorb round-off.
            let s = math::min(math::max(t + theta, t - self.delay_span), t);
            let values = basis.to_physical(&self.eval(s)?)?;
            let w = if q == 0 || q == SUBDIVISIONS { 0.5 } else { 1.0 };
            let weight = w * step * kernel.density(theta);
            for (o, v) in out.iter_mut().zip(&values) {
                *o += weight * map(*v);
            }
        }
        Ok(out)
    }
}

/// Checks that `span/dt` is an integer (within snap tolerance) and returns it.
pub(crate) fn steps_in_span(span: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Invalid(format!("time step must be positive, got {dt}")));
    }
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::Invalid(format!(
            "delay span must be positive, got {span}"
        )));
    }
    match math::nearest_integer(span / dt, NODE_SNAP) {
        Some(n) if n >= 1 => Ok(n as usize),
        _ => Err(Error::Invalid(format!(
            "delay span {span} is not an integer multiple of the time step {dt}"
        ))),
    }
}

/// The H-metric between two (state, history) pairs at their common latest
/// time:
///
/// ```text
/// dist = ( ‖v¹ − v²‖² + ∫_{−r}^0 ‖ψ¹(s) − ψ²(s)‖² ds )^{1/2}
/// ```
pub fn dist_h(
    a1: &SpectralField,
    h1: &HistorySegment,
    a2: &SpectralField,
    h2: &HistorySegment,
) -> Result<f64> {
    let t = h1.latest_time();
    let d = a1.l2_distance(a2);
    Ok(math::sqrt(d * d + h1.window_distance_sq(h2, t)?))
}
