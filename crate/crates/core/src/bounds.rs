//! Closed-form light-cone bounds, hardness time thresholds, the crossover `α_c`, and fitting
//! of the unspecified constants from scans.
//!
//! Nothing here fixes a constant silently: every threshold takes a [`BoundParams`], and the
//! defaults are labelled as such.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSource {
    #[default]
    Default,
    Fitted,
    User,
}

/// Constants entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundParams {
    /// Lieb–Robinson prefactor.
    pub c_lr: f64,
    pub mu: f64,
    /// Lieb–Robinson velocity.
    pub v: f64,
    /// Frobenius light-cone prefactor.
    pub c_fb: f64,
    /// Tail constant for the far-term cutoff; `None` = computed from ζ.
    pub c_alpha: Option<f64>,
    pub epsilon: f64,
    /// Subtractive constant `C` in the thresholds.
    pub big_c: f64,
    /// Multiplicative constant `C′` in the thresholds.
    pub big_c_prime: f64,
    /// Prefactor of the Frobenius-norm threshold.
    pub big_c_fb: f64,
    pub source: ParamSource,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self { c_lr: 1.0, mu: 1.0, v: 1.0, c_fb: 1.0, c_alpha: None, epsilon: 0.01, big_c: 0.0, big_c_prime: 1.0, big_c_fb: 1.0, source: ParamSource::Default }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [("c_lr", self.c_lr), ("mu", self.mu), ("v", self.v), ("c_fb", self.c_fb), ("big_c_prime", self.big_c_prime), ("big_c_fb", self.big_c_fb)];
        for (name, x) in pos {
            if !(x > 0.0 && x.is_finite()) {
                return domain(format!("{name} must be positive and finite, got {x}"));
            }
        }
        if let Some(c) = self.c_alpha {
            if !(c > 0.0 && c.is_finite()) {
                return domain(format!("c_alpha must be positive, got {c}"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return domain(format!("epsilon must lie in (0,1), got {}", self.epsilon));
        }
        if !(self.big_c >= 0.0 && self.big_c.is_finite()) {
            return domain(format!("big_c must be ≥ 0, got {}", self.big_c));
        }
        Ok(())
    }
}

/// A bound is only asserted inside its time window; outside it we say so instead of extrapolating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundValue {
    Value(f64),
    OutOfDomain,
}

impl BoundValue {
    pub fn value(self) -> Option<f64> {
        match self {
            BoundValue::Value(x) => Some(x),
            BoundValue::OutOfDomain => None,
        }
    }
}

/// Power-law Lieb–Robinson bound on `‖A(t) − ℙ_r A(t)‖`.
///
/// * `α > 3`: `c_LR t² (r − vt)^{1−α}` for `vt < r`
/// * `2 < α ≤ 3`: `c_LR (t / r^{α−2−ε})^{(α−1)/(α−2) − ε/2}` for `vt ≤ r^{α−2−ε}`
pub fn g_alpha(t: f64, r: f64, alpha: f64, p: &BoundParams) -> Result<BoundValue> {
    if !(alpha > 2.0) {
        return domain(format!("g_alpha needs α > 2, got {alpha}"));
    }
    if !(t >= 0.0) || !(r > 0.0) {
        return domain("g_alpha needs t ≥ 0 and r > 0");
    }
    if alpha > 3.0 {
        if p.v * t >= r {
            return Ok(BoundValue::OutOfDomain);
        }
        Ok(BoundValue::Value(p.c_lr * t * t * (r - p.v * t).powf(1.0 - alpha)))
    } else {
        let eps = p.epsilon;
        let scale = r.powf(alpha - 2.0 - eps);
        if p.v * t > scale {
            return Ok(BoundValue::OutOfDomain);
        }
        let expo = (alpha - 1.0) / (alpha - 2.0) - eps / 2.0;
        Ok(BoundValue::Value(p.c_lr * (t / scale).powf(expo)))
    }
}

/// Frobenius light cone: `c_FB t · {log r / r (α>2); log² r / r (α=2); r^{1−α} (1<α<2)}`.
pub fn f_alpha(t: f64, r: f64, alpha: f64, p: &BoundParams) -> Result<f64> {
    if !(alpha > 1.0) {
        return domain(format!("f_alpha needs α > 1, got {alpha}"));
    }
    if !(t >= 0.0) || !(r >= 2.0) {
        return domain("f_alpha needs t ≥ 0 and r ≥ 2");
    }
    Ok(p.c_fb * t * frob_shape(r, alpha))
}

fn frob_shape(r: f64, alpha: f64) -> f64 {
    if alpha > 2.0 {
        r.ln() / r
    } else if alpha == 2.0 {
        r.ln().powi(2) / r
    } else {
        r.powf(1.0 - alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdSource {
    /// The combined statement: largest hardness window across methods.
    Thm1,
    /// Operator-norm Lieb–Robinson route.
    Thm4,
    /// Frobenius light-cone route.
    Thm6,
}

impl ThresholdSource {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdSource::Thm1 => "thm1",
            ThresholdSource::Thm4 => "thm4",
            ThresholdSource::Thm6 => "thm6",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "thm1" => Ok(ThresholdSource::Thm1),
            "thm4" => Ok(ThresholdSource::Thm4),
            "thm6" => Ok(ThresholdSource::Thm6),
            _ => Err(Error::Parse(format!("unknown threshold source {s:?}"))),
        }
    }
}

/// Exponent of `L` in the combined threshold, per branch (`None` for the linear branch).
pub fn thm1_exponent(alpha: f64, eps: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return domain(format!("threshold needs α > 1, got {alpha}"));
    }
    let ac = 2.0 + FRAC_1_SQRT_2;
    Ok(if alpha >= 4.0 {
        1.0
    } else if alpha > 3.0 {
        (alpha - 1.0) / 3.0
    } else if alpha > ac {
        (alpha - 2.0) * (alpha - 1.0) / (2.0 * alpha - 3.0) - eps
    } else if alpha >= 2.0 {
        0.5 - eps
    } else {
        (alpha - 1.0) / 2.0
    })
}

/// Exponent in the operator-norm threshold (`2 < α ≤ 3` carries the exact ε-dependence).
pub fn thm4_exponent(alpha: f64, eps: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return domain(format!("operator-norm threshold needs α > 2, got {alpha}"));
    }
    Ok(if alpha >= 4.0 {
        1.0
    } else if alpha > 3.0 {
        (alpha - 1.0) / 3.0
    } else {
        let d = eps * (alpha / 2.0 - 1.0);
        (alpha - 1.0 - d) * (alpha - 2.0 - eps) / (2.0 * alpha - 3.0 - d)
    })
}

/// Time below which `U` provably fails to realize the shift on a ring of `4L` sites.
pub fn zoo_threshold(alpha: f64, l: usize, p: &BoundParams, source: ThresholdSource) -> Result<f64> {
    if !(alpha > 1.0) {
        return domain(format!("threshold needs α > 1, got {alpha}"));
    }
    if l < 2 {
        return domain("threshold needs L ≥ 2");
    }
    p.validate()?;
    let lf = l as f64;
    let eps = p.epsilon;
    let ac = 2.0 + FRAC_1_SQRT_2;
    match source {
        ThresholdSource::Thm1 => {
            let e = thm1_exponent(alpha, eps)?;
            // the band just above α_c carries no subtractive constant
            let sub = if alpha > ac && alpha <= 3.0 { 0.0 } else { p.big_c };
            Ok(p.big_c_prime * lf.powf(e) - sub)
        }
        ThresholdSource::Thm4 => {
            let e = thm4_exponent(alpha, eps)?;
            let vt = if alpha >= 4.0 { lf - p.big_c } else { p.big_c_prime * lf.powf(e) };
            Ok(vt / p.v)
        }
        ThresholdSource::Thm6 => {
            let shape = if alpha > 2.0 {
                (lf / lf.ln()).sqrt()
            } else if alpha == 2.0 {
                (lf / lf.ln().powi(2)).sqrt()
            } else {
                lf.powf((alpha - 1.0) / 2.0)
            };
            Ok(p.big_c_fb * shape)
        }
    }
}

/// Conjectured optimal exponent: `1` for `α ≥ 2`, `α − 1` below.
pub fn conjecture_exponent(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return domain(format!("conjecture needs α > 1, got {alpha}"));
    }
    Ok(if alpha >= 2.0 { 1.0 } else { alpha - 1.0 })
}

/// `C′ L^{conj} − C`
pub fn conjecture_threshold(alpha: f64, l: usize, p: &BoundParams) -> Result<f64> {
    Ok(p.big_c_prime * (l as f64).powf(conjecture_exponent(alpha)?) - p.big_c)
}

/// `(α−1)(α−2)/(2α−3) − 1/2`; its root in `(2,3)` is where the two hardness windows cross.
pub fn crossover_residual(alpha: f64) -> f64 {
    (alpha - 1.0) * (alpha - 2.0) / (2.0 * alpha - 3.0) - 0.5
}

/// Root of [`crossover_residual`] in `(2, 3)` by bisection.
pub fn critical_alpha() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    debug_assert!(crossover_residual(lo) < 0.0 && crossover_residual(hi) > 0.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if crossover_residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One scan sample: some light-cone quantity at time `t` and distance `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub t: f64,
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FrontModel {
    /// `c_LR e^{μ(vt − r)}`; fits `c_LR, μ, v`.
    Exponential,
    /// `f_α` shape; fits `c_FB`.
    Frobenius { alpha: f64 },
    /// `g_α` shape at the given `v`; fits `c_LR`.
    PowerLaw { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub params: BoundParams,
    /// RMS of `log(bound / value)` over the points used, after inflation.
    pub log_residual_rms: f64,
    pub used: usize,
    /// Points below the noise floor or outside the bound's window.
    pub skipped: usize,
}

const FIT_FLOOR: f64 = 1e-12;
/// Relative headroom added on top of the worst-case ratio.
const INFLATE: f64 = 1.0 + 1e-9;

fn distinct(xs: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Fit the free constants of `model` to `scan` and inflate them so the bound majorizes every used point.
pub fn fit_front(scan: &[FrontSample], model: FrontModel, base: &BoundParams) -> Result<FitReport> {
    let pts: Vec<FrontSample> = scan.iter().copied().filter(|s| s.value > FIT_FLOOR && s.value.is_finite()).collect();
    if distinct(pts.iter().map(|s| s.r)) < 3 || distinct(pts.iter().map(|s| s.t)) < 3 {
        return Err(Error::Fit("scan needs ≥ 3 distinct r and ≥ 3 distinct t with values above 1e-12".into()));
    }
    let mut p = *base;
    p.source = ParamSource::Fitted;
    match model {
        FrontModel::Exponential => {
            // log C = log c + μv·t − μ·r
            let rows: Vec<[f64; 3]> = pts.iter().map(|s| [1.0, s.t, s.r]).collect();
            let rhs: Vec<f64> = pts.iter().map(|s| s.value.ln()).collect();
            let beta = least_squares3(&rows, &rhs)?;
            let mu = -beta[2];
            let v = beta[1] / mu;
            if !(mu > 0.0 && v > 0.0) {
                return Err(Error::Fit(format!("fitted front is not outgoing (μ = {mu:.3e}, v = {v:.3e})")));
            }
            p.mu = mu;
            p.v = v;
            let shape = |s: &FrontSample| (mu * (v * s.t - s.r)).exp();
            p.c_lr = pts.iter().map(|s| s.value / shape(s)).fold(0.0, f64::max) * INFLATE;
            let rms = rms_log(pts.iter().map(|s| (p.c_lr * shape(s), s.value)));
            Ok(FitReport { params: p, log_residual_rms: rms, used: pts.len(), skipped: scan.len() - pts.len() })
        }
        FrontModel::Frobenius { alpha } => {
            let unit = BoundParams { c_fb: 1.0, ..p };
            let mut used = Vec::new();
            for s in &pts {
                if s.r >= 2.0 && s.t > 0.0 {
                    used.push((s.value, f_alpha(s.t, s.r, alpha, &unit)?));
                }
            }
            finish_ratio_fit(p, used, scan.len(), |p, c| p.c_fb = c)
        }
        FrontModel::PowerLaw { alpha } => {
            let unit = BoundParams { c_lr: 1.0, ..p };
            let mut used = Vec::new();
            for s in &pts {
                if s.r > 0.0 && s.t > 0.0 {
                    if let BoundValue::Value(g) = g_alpha(s.t, s.r, alpha, &unit)? {
                        used.push((s.value, g));
                    }
                }
            }
            finish_ratio_fit(p, used, scan.len(), |p, c| p.c_lr = c)
        }
    }
}

fn finish_ratio_fit(mut p: BoundParams, used: Vec<(f64, f64)>, total: usize, set: impl Fn(&mut BoundParams, f64)) -> Result<FitReport> {
    if used.is_empty() {
        return Err(Error::Fit("no scan point lies inside the bound's window".into()));
    }
    let c = used.iter().map(|(v, s)| v / s).fold(0.0, f64::max) * INFLATE;
    set(&mut p, c);
    let rms = rms_log(used.iter().map(|&(v, s)| (c * s, v)));
    Ok(FitReport { params: p, log_residual_rms: rms, used: used.len(), skipped: total - used.len() })
}

fn rms_log(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut s, mut k) = (0.0, 0usize);
    for (b, v) in pairs {
        s += (b / v).ln().powi(2);
        k += 1;
    }
    (s / k.max(1) as f64).sqrt()
}

/// Normal equations for three unknowns.
fn least_squares3(rows: &[[f64; 3]], rhs: &[f64]) -> Result<[f64; 3]> {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (row, &y) in rows.iter().zip(rhs) {
        for i in 0..3 {
            b[i] += row[i] * y;
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    let m = faer::Mat::from_fn(3, 3, |i, j| a[i][j]);
    let lu = m.partial_piv_lu();
    let rhs = faer::Mat::from_fn(3, 1, |i, _| b[i]);
    use faer::linalg::solvers::Solve;
    let x = lu.solve(&rhs);
    let out = [x[(0, 0)], x[(1, 0)], x[(2, 0)]];
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("degenerate design matrix".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn g_alpha_examples() {
        let p = BoundParams::default();
        assert_eq!(g_alpha(0.0, 3.0, 4.0, &p).unwrap(), BoundValue::Value(0.0));
        assert!(close(g_alpha(1.0, 3.0, 4.0, &p).unwrap().value().unwrap(), 0.125, 1e-15));
        assert_eq!(g_alpha(5.0, 3.0, 4.0, &p).unwrap(), BoundValue::OutOfDomain);
        assert_eq!(g_alpha(5.0, 3.0, 2.5, &p).unwrap(), BoundValue::OutOfDomain);
        assert!(g_alpha(1.0, 3.0, 2.0, &p).is_err());
        // monotone in t inside the window, decaying in r
        for alpha in [2.5, 3.0, 4.0, 6.0] {
            let a = g_alpha(0.2, 8.0, alpha, &p).unwrap().value().unwrap();
            let b = g_alpha(0.4, 8.0, alpha, &p).unwrap().value().unwrap();
            let c = g_alpha(0.2, 80.0, alpha, &p).unwrap().value().unwrap();
            assert!(a <= b && c < a);
        }
    }

    #[test]
    fn f_alpha_examples() {
        let p = BoundParams::default();
        assert_eq!(f_alpha(0.0, 4.0, 3.0, &p).unwrap(), 0.0);
        assert!(close(f_alpha(2.0, 4.0, 1.5, &p).unwrap(), 1.0, 1e-15));
        assert_eq!(f_alpha(1.3, 5.0, 3.0, &p).unwrap(), f_alpha(1.3, 5.0, 2.5, &p).unwrap());
        assert!(f_alpha(1.0, 1.5, 3.0, &p).is_err());
        assert!(f_alpha(1.0, 3.0, 1.0, &p).is_err());
    }

    #[test]
    fn zoo_examples() {
        let p = BoundParams::default();
        assert!(close(zoo_threshold(5.0, 100, &p, ThresholdSource::Thm1).unwrap(), 100.0, 1e-14));
        assert!(close(zoo_threshold(1.5, 100, &p, ThresholdSource::Thm6).unwrap(), 10f64.sqrt(), 1e-14));
        assert!(zoo_threshold(1.0, 100, &p, ThresholdSource::Thm1).is_err());
        assert!(zoo_threshold(1.5, 100, &p, ThresholdSource::Thm4).is_err());
        assert!(zoo_threshold(3.0, 1, &p, ThresholdSource::Thm1).is_err());
    }

    #[test]
    fn thm1_branches() {
        let eps = 1e-9;
        let ac = 2.0 + FRAC_1_SQRT_2;
        let d = 1e-7;
        // continuous at 4 and α_c, jump of ε at 2 kept as is
        assert!((thm1_exponent(4.0, eps).unwrap() - thm1_exponent(4.0 - d, eps).unwrap()).abs() < 1e-6);
        assert!((thm1_exponent(ac + d, eps).unwrap() - thm1_exponent(ac - d, eps).unwrap()).abs() < 1e-6);
        let p = BoundParams { epsilon: 0.01, ..Default::default() };
        assert!((thm1_exponent(2.0, p.epsilon).unwrap() - 0.49).abs() < 1e-15);
        assert!((thm1_exponent(2.0 - 1e-12, p.epsilon).unwrap() - 0.5).abs() < 1e-11);
        // branch picks at the displayed boundaries
        assert_eq!(thm1_exponent(3.5, 0.01).unwrap(), 2.5 / 3.0);
        assert_eq!(thm1_exponent(ac, 0.01).unwrap(), 0.49);
    }

    #[test]
    fn thm4_reduces_at_zero_eps() {
        for alpha in [2.2, 2.5, 3.0] {
            let e = thm4_exponent(alpha, 0.0).unwrap();
            assert!((e - (alpha - 1.0) * (alpha - 2.0) / (2.0 * alpha - 3.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn critical_alpha_root() {
        let a = critical_alpha();
        assert!((a - (2.0 + FRAC_1_SQRT_2)).abs() < 1e-10);
        assert!(crossover_residual(a).abs() < 1e-10);
        let signs: Vec<bool> = (1..100).map(|k| crossover_residual(2.0 + k as f64 / 100.0) > 0.0).collect();
        assert_eq!(signs.windows(2).filter(|w| w[0] != w[1]).count(), 1);
    }

    #[test]
    fn exponential_fit_recovers() {
        let (mu, v) = (0.8, 1.7);
        let mut scan = Vec::new();
        for r in 1..7 {
            for k in 1..6 {
                let t = 0.3 * k as f64;
                scan.push(FrontSample { t, r: r as f64, value: 0.3 * (mu * (v * t - r as f64)).exp() });
            }
        }
        let fit = fit_front(&scan, FrontModel::Exponential, &BoundParams::default()).unwrap();
        assert!(close(fit.params.mu, mu, 0.05) && close(fit.params.v, v, 0.05));
        assert_eq!(fit.params.source, ParamSource::Fitted);
        for s in &scan {
            assert!(fit.params.c_lr * (fit.params.mu * (fit.params.v * s.t - s.r)).exp() >= s.value);
        }
    }

    #[test]
    fn zero_scan_is_fit_error() {
        let scan: Vec<_> = (0..9).map(|k| FrontSample { t: (k % 3) as f64, r: (k / 3) as f64, value: 0.0 }).collect();
        assert!(matches!(fit_front(&scan, FrontModel::Exponential, &BoundParams::default()), Err(Error::Fit(_))));
    }

    #[test]
    fn ratio_fits_majorize() {
        let mut scan = Vec::new();
        for r in 1..6 {
            for k in 1..5 {
                let t = 0.25 * k as f64;
                scan.push(FrontSample { t, r: r as f64, value: t * t * (1.0 + 0.1 * r as f64).powi(-4) * (1.0 + 0.3 * ((r * k) as f64).sin()) });
            }
        }
        let p = BoundParams::default();
        let fb = fit_front(&scan, FrontModel::Frobenius { alpha: 3.0 }, &p).unwrap();
        let lr = fit_front(&scan, FrontModel::PowerLaw { alpha: 4.0 }, &p).unwrap();
        for s in &scan {
            if s.r >= 2.0 {
                assert!(f_alpha(s.t, s.r, 3.0, &fb.params).unwrap() >= s.value);
            }
            if let BoundValue::Value(g) = g_alpha(s.t, s.r, 4.0, &lr.params).unwrap() {
                assert!(g >= s.value);
            }
        }
        assert!(fb.skipped > 0 && lr.skipped > 0);
    }
}
