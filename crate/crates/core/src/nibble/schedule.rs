use super::NibbleError;
use serde::Serialize;

/// Hard stop for schedules that never reach the terminating condition.
const MAX_ROWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub i: usize,
    pub d: f64,
    pub t: f64,
    pub p: f64,
    pub d_diamond: f64,
    pub t_diamond: f64,
    pub p_diamond: f64,
    pub beta: f64,
    pub delta: f64,
}

// slack for comparing integer observations against real-valued bounds
const EPS: f64 = 1e-9;

impl ScheduleRow {
    /// Largest admissible vertex degree.
    pub fn deg_cap(&self) -> usize {
        (self.d + EPS).floor().max(0.0) as usize
    }

    /// Largest admissible c-degree.
    pub fn cdeg_cap(&self) -> usize {
        (self.t + EPS).floor().max(0.0) as usize
    }

    /// Smallest admissible palette.
    pub fn palette_floor(&self) -> usize {
        (self.p - EPS).ceil().max(0.0) as usize
    }
}

/// `(1 - 1/p)^x` via `exp(x * log1p(-1/p))`.
pub(crate) fn pow_keep(p: f64, x: f64) -> f64 {
    (x * (-1.0 / p).ln_1p()).exp()
}

/// The ◇ values of a row and the drift-adjusted values of the next one.
fn step(d: f64, t: f64, p: f64, eta: f64) -> ([f64; 3], [f64; 3], f64, f64) {
    let beta = p / t - 1.0;
    let delta = beta / eta;
    let q = pow_keep(p, 2.0 * t);
    let lose = t / p * q;
    let dd = d * (1.0 - pow_keep(p, 2.0 * (t - 1.0)));
    let td = t * (1.0 - lose) * (1.0 - q);
    let pd = p * (1.0 - lose) * (1.0 - lose);
    (
        [dd, td, pd],
        [(1.0 + delta) * dd, (1.0 + delta) * td, (1.0 - delta) * pd],
        beta,
        delta,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub max_degree: usize,
    pub eps: f64,
    pub xi: f64,
    pub eta: f64,
    pub rows: Vec<ScheduleRow>,
    /// First index meeting `d_i ≤ (ε−ξ)Δ/5`, if reached.
    pub terminating_index: Option<usize>,
}

impl Schedule {
    pub fn row(&self, i: usize) -> Option<&ScheduleRow> {
        i.checked_sub(1).and_then(|j| self.rows.get(j))
    }

    pub fn threshold(&self) -> f64 {
        (self.eps - self.xi) * self.max_degree as f64 / 5.0
    }

    /// Size of the first-phase palette `Δ(1+ξ)`.
    pub fn phase_one_palette(&self) -> usize {
        (self.max_degree as f64 * (1.0 + self.xi) + EPS).floor() as usize
    }

    /// Largest `i` with `β_{i−1} ≤ 1/η`, found by continuing the recurrences past the
    /// stored rows. `None` if β stays below `1/η` for as long as the rows stay positive.
    pub fn i_star(&self) -> Option<usize> {
        let (mut d, mut t, mut p) = (self.max_degree as f64, self.max_degree as f64, self.rows[0].p);
        for i in 1..MAX_ROWS {
            let (_, next, beta, _) = step(d, t, p, self.eta);
            if beta > 1.0 / self.eta {
                return Some(i);
            }
            [d, t, p] = next;
            if !(d > 0.0 && t > 0.0 && p > 0.0) {
                return None;
            }
        }
        None
    }
}

/// Rows of the parameter recurrences until the terminating condition holds or a value
/// stops being positive.
pub fn compute_schedule(max_degree: usize, eps: f64, xi: f64, eta: f64) -> Result<Schedule, NibbleError> {
    if max_degree < 2 {
        return Err(NibbleError::InvalidParameter(format!("Δ = {max_degree} < 2")));
    }
    if !(xi > 0.0 && xi < eps) {
        return Err(NibbleError::InvalidParameter(format!("need 0 < ξ < ε, got ξ = {xi}, ε = {eps}")));
    }
    if !(eta >= 1.0) {
        return Err(NibbleError::InvalidParameter(format!("need η ≥ 1, got {eta}")));
    }
    let delta_f = max_degree as f64;
    let (mut d, mut t, mut p) = (delta_f, delta_f, delta_f * (1.0 + xi));
    if p < 1.0 {
        return Err(NibbleError::InvalidParameter(format!("p1 = {p} < 1")));
    }
    let threshold = (eps - xi) * delta_f / 5.0;
    let mut rows = Vec::new();
    let mut terminating_index = None;
    for i in 1..=MAX_ROWS {
        let (dia, next, beta, delta) = step(d, t, p, eta);
        rows.push(ScheduleRow {
            i,
            d,
            t,
            p,
            d_diamond: dia[0],
            t_diamond: dia[1],
            p_diamond: dia[2],
            beta,
            delta,
        });
        if d <= threshold {
            terminating_index = Some(i);
            break;
        }
        [d, t, p] = next;
        if !(d > 0.0 && t > 0.0 && p > 0.0) {
            break;
        }
    }
    Ok(Schedule {
        max_degree,
        eps,
        xi,
        eta,
        rows,
        terminating_index,
    })
}

/// The first index meeting the terminating condition. Also rejects schedules whose
/// termination comes at or after `i*`.
pub fn terminating_index(s: &Schedule) -> Result<usize, NibbleError> {
    let i = s.terminating_index.ok_or(NibbleError::NeverTerminates {
        rows: s.rows.len(),
    })?;
    if let Some(star) = s.i_star() {
        if i >= star && i > 1 {
            return Err(NibbleError::PastIStar { index: i, i_star: star });
        }
    }
    Ok(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    // ln(1 - x) by its power series, independent of the libm path
    fn ln1m(x: f64) -> f64 {
        let mut term = x;
        let mut sum = 0.0;
        let mut k = 1.0;
        while term / k > 1e-30 {
            sum -= term / k;
            term *= x;
            k += 1.0;
        }
        sum
    }

    fn keep(p: f64, x: f64) -> f64 {
        (x * ln1m(1.0 / p)).exp()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn base_row() {
        let s = compute_schedule(100, 0.6, 0.1, 10.0).unwrap();
        let r = s.rows[0];
        assert_eq!((r.d, r.t), (100.0, 100.0));
        assert!(rel(r.p, 110.0) < 1e-14);
        assert!(rel(r.beta, 0.1) < 1e-12);
        assert!(rel(r.delta, 0.01) < 1e-12);
        for &(dl, xi) in &[(7usize, 0.3), (1000, 0.01), (64, 1.0 / 64.0)] {
            let s = compute_schedule(dl, 1.5, xi, 3.0).unwrap();
            assert!(rel(s.rows[0].beta, xi) < 1e-12);
        }
    }

    #[test]
    fn identities_against_independent_evaluator() {
        for &(dl, eps, xi, eta) in &[(100usize, 0.5, 0.01, 9.2), (1usize << 20, 0.3, 0.001, 30.0), (100_000_000, 0.5, 1e-3, 1e3)] {
            let s = compute_schedule(dl, eps, xi, eta).unwrap();
            for w in s.rows.windows(2) {
                let (a, b) = (w[0], w[1]);
                assert!(rel(a.beta * a.t, a.p - a.t) < 1e-12);
                assert!(rel(a.delta * eta, a.beta) < 1e-12);
                let q = keep(a.p, 2.0 * a.t);
                let dd = a.d * (1.0 - keep(a.p, 2.0 * (a.t - 1.0)));
                let td = a.t * (1.0 - a.t / a.p * q) * (1.0 - q);
                let pd = a.p * (1.0 - a.t / a.p * q).powi(2);
                assert!(rel(a.d_diamond, dd) < 1e-12);
                assert!(rel(a.t_diamond, td) < 1e-12);
                assert!(rel(a.p_diamond, pd) < 1e-12);
                assert!(rel(b.d, (1.0 + a.delta) * dd) < 1e-12);
                assert!(rel(b.t, (1.0 + a.delta) * td) < 1e-12);
                assert!(rel(b.p, (1.0 - a.delta) * pd) < 1e-12);
            }
        }
    }

    #[test]
    fn ratio_at_large_delta() {
        let s = compute_schedule(100_000_000, 0.5, 1e-3, 1e3).unwrap();
        let r = s.rows[1].d / s.rows[0].d;
        assert!((0.855..=0.875).contains(&r), "{r}");
    }

    #[test]
    fn terminating_index_cases() {
        let s = compute_schedule(100, 6.0, 0.1, 10.0).unwrap();
        assert_eq!(terminating_index(&s).unwrap(), 1);

        let eta = 1e3;
        let eps = 0.5;
        let xi = eps / (6.0 * eta);
        let s = compute_schedule(100_000_000, eps, xi, eta).unwrap();
        let i = terminating_index(&s).unwrap();
        let thr = (eps - xi) * 1e8 / 5.0;
        assert!(s.rows[i - 1].d <= thr);
        assert!(s.rows[..i - 1].iter().all(|r| r.d > thr));
        let ratio = s.rows[1].d / s.rows[0].d;
        let predicted = ((5.0 / (eps - xi)).ln() / -ratio.ln()).ceil() as i64;
        assert!((i as i64 - predicted).abs() <= 1, "{i} vs {predicted}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(compute_schedule(1, 0.5, 0.1, 2.0).is_err());
        assert!(compute_schedule(10, 0.5, 0.6, 2.0).is_err());
        assert!(compute_schedule(10, 0.5, 0.1, 0.5).is_err());
    }
}
