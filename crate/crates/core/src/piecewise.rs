//! Compactly supported piecewise-polynomial windows and their lattice
//! auto-correlation sums.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::poly::{segment_extrema, sorted_breaks, Extrema, PiecewisePoly, Poly, Segment};

/// Highest polynomial degree accepted in a window piece.
pub const MAX_PIECE_DEGREE: usize = 8;

/// One polynomial piece on the half-open interval `(lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPiece {
    pub lo: f64,
    pub hi: f64,
    /// Coefficients in ascending degree.
    pub coeffs: Vec<f64>,
}

/// A compactly supported window made of polynomial pieces on disjoint
/// half-open intervals, sorted by left endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseWindow {
    label: String,
    pieces: Vec<WindowPiece>,
    #[serde(skip)]
    polys: Vec<Poly>,
}

impl PiecewiseWindow {
    pub fn new(label: impl Into<String>, pieces: Vec<WindowPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(FrameError::InvalidWindow("window has no pieces".into()));
        }
        for (k, p) in pieces.iter().enumerate() {
            if !(p.lo.is_finite() && p.hi.is_finite()) || p.lo >= p.hi {
                return Err(FrameError::InvalidWindow(format!(
                    "piece {k}: interval ({}, {}] is empty or not finite",
                    p.lo, p.hi
                )));
            }
            if p.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(FrameError::InvalidWindow(format!(
                    "piece {k}: non-finite coefficient"
                )));
            }
            if p.coeffs.len() > MAX_PIECE_DEGREE + 1 {
                return Err(FrameError::InvalidWindow(format!(
                    "piece {k}: degree {} exceeds the cap of {MAX_PIECE_DEGREE}",
                    p.coeffs.len() - 1
                )));
            }
            if k > 0 && pieces[k - 1].hi > p.lo {
                return Err(FrameError::InvalidWindow(format!(
                    "pieces {} and {k} overlap or are not sorted by lo",
                    k - 1
                )));
            }
        }
        let polys: Vec<Poly> = pieces.iter().map(|p| Poly::new(p.coeffs.clone())).collect();
        if polys.iter().all(Poly::is_zero) {
            return Err(FrameError::InvalidWindow(
                "every piece is the zero polynomial".into(),
            ));
        }
        Ok(PiecewiseWindow {
            label: label.into(),
            pieces,
            polys,
        })
    }

    /// Indicator of `(lo, hi]`.
    pub fn boxcar(label: impl Into<String>, lo: f64, hi: f64) -> Result<Self> {
        Self::new(
            label,
            vec![WindowPiece {
                lo,
                hi,
                coeffs: vec![1.0],
            }],
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn pieces(&self) -> &[WindowPiece] {
        &self.pieces
    }

    /// Smallest `lo` and largest `hi` over the pieces.
    pub fn support(&self) -> (f64, f64) {
        (self.pieces[0].lo, self.pieces[self.pieces.len() - 1].hi)
    }

    /// Length μ of the smallest interval containing the support.
    pub fn support_length(&self) -> f64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    pub fn max_degree(&self) -> usize {
        self.polys.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        // pieces are sorted; first piece whose hi is >= x is the only candidate
        let k = self.pieces.partition_point(|p| p.hi < x);
        match self.pieces.get(k) {
            Some(p) if x > p.lo => self.polys[k].eval(x),
            _ => 0.0,
        }
    }

    /// The same window multiplied by a real constant.
    pub fn scaled(&self, factor: f64, label: impl Into<String>) -> Result<Self> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| WindowPiece {
                lo: p.lo,
                hi: p.hi,
                coeffs: p.coeffs.iter().map(|c| c * factor).collect(),
            })
            .collect();
        Self::new(label, pieces)
    }

    fn piece_polys(&self) -> impl Iterator<Item = (f64, f64, &Poly)> {
        self.pieces
            .iter()
            .zip(&self.polys)
            .map(|(p, poly)| (p.lo, p.hi, poly))
    }
}

/// Range of `n` for which `(lo + n a, hi + n a)` can meet `(from, to)`.
fn shift_range(lo: f64, hi: f64, a: f64, from: f64, to: f64) -> std::ops::RangeInclusive<i64> {
    let n_lo = ((from - hi) / a).floor() as i64 - 1;
    let n_hi = ((to - lo) / a).ceil() as i64 + 1;
    n_lo..=n_hi
}

fn check_step(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(FrameError::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// `G0(x) = Σ_n |w(x − n a)|²`, evaluated by direct enumeration of the
/// finitely many translates that can be nonzero at `x`.
pub fn translation_power_sum(w: &PiecewiseWindow, a: f64, x: f64) -> Result<f64> {
    check_step("a", a)?;
    let (lo, hi) = w.support();
    Ok(shift_range(lo, hi, a, x, x)
        .map(|n| w.eval(x - n as f64 * a).powi(2))
        .sum())
}

/// Correlation sum for lag `k·step`: `Σ_n w(x − n a)·w(x − n a − k·step)`.
fn lag_correlation(w: &PiecewiseWindow, a: f64, step: f64, k: i64, x: f64) -> f64 {
    let (lo, hi) = w.support();
    shift_range(lo, hi, a, x, x)
        .map(|n| {
            let y = x - n as f64 * a;
            w.eval(y) * w.eval(y - k as f64 * step)
        })
        .sum()
}

/// Nonzero lags satisfy `|k·step| < μ`.
fn max_lag(w: &PiecewiseWindow, step: f64) -> i64 {
    (w.support_length() / step).ceil() as i64
}

/// `G1(x) = Σ_{k≠0} |Σ_n w(x − n a)·conj(w(x − n a − k·step))|` for a real window.
pub fn correlation_sum(w: &PiecewiseWindow, a: f64, step: f64, x: f64) -> Result<f64> {
    check_step("a", a)?;
    check_step("step", step)?;
    let kmax = max_lag(w, step);
    Ok((-kmax..=kmax)
        .filter(|&k| k != 0)
        .map(|k| lag_correlation(w, a, step, k, x).abs())
        .sum())
}

/// The lag-`k` correlation `Σ_n w(x − n a) w(x − n a − k·step)` as an exact
/// piecewise polynomial on `[from, to]`. Lag 0 is `G0`.
pub fn lag_correlation_poly(
    w: &PiecewiseWindow,
    a: f64,
    step: f64,
    k: i64,
    from: f64,
    to: f64,
) -> Result<PiecewisePoly> {
    check_step("a", a)?;
    check_step("step", step)?;
    let lag = k as f64 * step;
    let (lo, hi) = w.support();
    let mut terms = Vec::new();
    for n in shift_range(lo, hi, a, from, to) {
        let shift = n as f64 * a;
        for (alo, ahi, ap) in w.piece_polys() {
            let (alo, ahi) = (alo + shift, ahi + shift);
            if ahi <= from || alo >= to {
                continue;
            }
            let left = ap.shifted(shift);
            for (blo, bhi, bp) in w.piece_polys() {
                let (blo, bhi) = (blo + shift + lag, bhi + shift + lag);
                let (ilo, ihi) = (alo.max(blo).max(from), ahi.min(bhi).min(to));
                if ilo < ihi {
                    terms.push((ilo, ihi, &left * &bp.shifted(shift + lag)));
                }
            }
        }
    }
    Ok(PiecewisePoly::from_terms(from, to, &terms))
}

/// `G0` as an exact piecewise polynomial on one period `[0, a]`.
pub fn power_sum_poly(w: &PiecewiseWindow, a: f64) -> Result<PiecewisePoly> {
    lag_correlation_poly(w, a, a, 0, 0.0, a)
}

/// Exact extrema of a piecewise-polynomial periodic sum over `[0, a]`.
pub fn piecewise_extrema(g: &PiecewisePoly) -> Extrema {
    g.extrema()
}

/// Exact extrema of `G0 − G1` and `G0 + G1` over `[0, a]`.
///
/// Each off-diagonal correlation `C_k` is split at its own roots so that on
/// every sub-interval `|C_k|` is a signed copy of `C_k`, which reduces both
/// sums to polynomials there.
pub fn correlation_extrema(
    w: &PiecewiseWindow,
    a: f64,
    step: f64,
) -> Result<(Extrema, Extrema)> {
    let g0 = lag_correlation_poly(w, a, step, 0, 0.0, a)?;
    let kmax = max_lag(w, step);
    let lags: Vec<PiecewisePoly> = (-kmax..=kmax)
        .filter(|&k| k != 0)
        .map(|k| lag_correlation_poly(w, a, step, k, 0.0, a))
        .collect::<Result<_>>()?;

    let mut breaks = g0.breakpoints();
    for c in &lags {
        breaks.extend(c.breakpoints());
    }
    let breaks = sorted_breaks(breaks, a);

    let mut lower = None::<Extrema>;
    let mut upper = None::<Extrema>;
    for w2 in breaks.windows(2) {
        let (lo, hi) = (w2[0], w2[1]);
        let mid = 0.5 * (lo + hi);
        let base = poly_at(&g0, mid);
        let cs: Vec<Poly> = lags.iter().map(|c| poly_at(c, mid)).collect();
        let mut cuts = vec![lo, hi];
        for c in &cs {
            cuts.extend(c.real_roots_in(lo, hi));
        }
        let cuts = sorted_breaks(cuts, hi - lo);
        for w3 in cuts.windows(2) {
            let (slo, shi) = (w3[0], w3[1]);
            let smid = 0.5 * (slo + shi);
            let abs_sum = cs.iter().fold(Poly::zero(), |acc, c| {
                if c.eval(smid) < 0.0 {
                    &acc - c
                } else {
                    &acc + c
                }
            });
            let lo_ext = segment_extrema(&(&base - &abs_sum), slo, shi);
            let up_ext = segment_extrema(&(&base + &abs_sum), slo, shi);
            lower = Some(lower.map_or(lo_ext, |e| e.merge(lo_ext)));
            upper = Some(upper.map_or(up_ext, |e| e.merge(up_ext)));
        }
    }
    Ok((lower.expect("period has positive length"), upper.expect("period has positive length")))
}

fn poly_at(pw: &PiecewisePoly, x: f64) -> Poly {
    pw.segments()
        .iter()
        .find(|s: &&Segment| s.lo <= x && x <= s.hi)
        .map(|s| s.poly.clone())
        .unwrap_or_else(Poly::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn phi1() -> PiecewiseWindow {
        PiecewiseWindow::new(
            "phi1",
            vec![
                WindowPiece { lo: 0.0, hi: 1.0, coeffs: vec![1.0, 1.0] },
                WindowPiece { lo: 1.0, hi: 2.0, coeffs: vec![0.0, 1.0] },
            ],
        )
        .unwrap()
    }

    fn phi2() -> PiecewiseWindow {
        PiecewiseWindow::new(
            "phi2",
            vec![
                WindowPiece { lo: 0.0, hi: 1.0, coeffs: vec![1.0, 1.0] },
                WindowPiece { lo: 1.0, hi: 2.0, coeffs: vec![0.0, 0.5] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn eval_half_open_pieces() {
        let w = phi1();
        assert_eq!(w.eval(0.5), 1.5);
        assert_eq!(w.eval(3.0), 0.0);
        assert_eq!(w.eval(1.0), 2.0);
        assert_eq!(w.eval(0.0), 0.0);
        assert_eq!(w.eval(2.0), 2.0);
        assert_eq!(w.eval(1.0 + 1e-12), 1.0 + 1e-12);
    }

    #[test]
    fn support_lengths() {
        assert_eq!(phi1().support_length(), 2.0);
        assert_eq!(phi2().support_length(), 2.0);
        assert_eq!(PiecewiseWindow::boxcar("b", 0.0, 1.0).unwrap().support_length(), 1.0);
    }

    #[test]
    fn invalid_windows_rejected() {
        assert!(matches!(PiecewiseWindow::new("e", vec![]), Err(FrameError::InvalidWindow(_))));
        let zero = vec![WindowPiece { lo: 0.0, hi: 1.0, coeffs: vec![0.0] }];
        assert!(PiecewiseWindow::new("z", zero).is_err());
        let overlap = vec![
            WindowPiece { lo: 0.0, hi: 1.5, coeffs: vec![1.0] },
            WindowPiece { lo: 1.0, hi: 2.0, coeffs: vec![1.0] },
        ];
        assert!(PiecewiseWindow::new("o", overlap).is_err());
        let high = vec![WindowPiece { lo: 0.0, hi: 1.0, coeffs: vec![1.0; 10] }];
        assert!(PiecewiseWindow::new("h", high).is_err());
    }

    #[test]
    fn power_sum_values() {
        let w = phi1();
        assert!((translation_power_sum(&w, 1.0, 0.5).unwrap() - 4.5).abs() < 1e-14);
        let x = 3.5f64.sqrt();
        assert!((translation_power_sum(&w, 1.0, x).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_vanishes_for_wide_step() {
        let w = phi1();
        for x in [0.1, 0.5, 0.99, 1.0] {
            assert_eq!(correlation_sum(&w, 1.0, 2.0, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn box_correlation_by_enumeration() {
        // box on (0,1], a = 1, step = 1/2, x = 1/4.
        // Oracle: C_k(x) = Σ_n 1[x-n∈(0,1]]·1[x-n-k/2∈(0,1]]. Only n = 0 is live
        // (x - n = 1/4); the second factor needs 1/4 - k/2 ∈ (0,1], i.e. k = -1.
        let b = PiecewiseWindow::boxcar("box", 0.0, 1.0).unwrap();
        let mut oracle = 0.0;
        for k in -4i32..=4 {
            if k == 0 {
                continue;
            }
            let mut c = 0.0;
            for n in -4i32..=4 {
                let y = 0.25 - n as f64;
                let in1 = y > 0.0 && y <= 1.0;
                let z = y - k as f64 * 0.5;
                let in2 = z > 0.0 && z <= 1.0;
                if in1 && in2 {
                    c += 1.0;
                }
            }
            oracle += f64::abs(c);
        }
        assert_eq!(oracle, 1.0);
        assert_eq!(correlation_sum(&b, 1.0, 0.5, 0.25).unwrap(), oracle);
    }

    #[test]
    fn power_sum_poly_extrema_phi1() {
        let g0 = power_sum_poly(&phi1(), 1.0).unwrap();
        let e = piecewise_extrema(&g0);
        assert!((e.inf - 2.0).abs() < 1e-12);
        assert!((e.sup - 8.0).abs() < 1e-12);
        assert!(e.arginf.abs() < 1e-12);
        assert!((e.argsup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_sum_poly_extrema_phi2_against_grid() {
        let w = phi2();
        let e = piecewise_extrema(&power_sum_poly(&w, 1.0).unwrap());
        assert!((e.inf - 1.25).abs() < 1e-12);
        assert!((e.sup - 5.0).abs() < 1e-12);
        // grid oracle: 1e5 samples of (0, 1]
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 1..=100_000 {
            let x = i as f64 / 100_000.0;
            let v = translation_power_sum(&w, 1.0, x).unwrap();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!((hi - e.sup).abs() / e.sup < 1e-6);
        assert!((lo - e.inf).abs() / e.inf < 1e-4);
    }

    #[test]
    fn correlation_extrema_phi1() {
        let (lo, up) = correlation_extrema(&phi1(), 1.0, 2.0).unwrap();
        assert!((lo.inf - 2.0).abs() < 1e-12);
        assert!((up.sup - 8.0).abs() < 1e-12);
    }
}
