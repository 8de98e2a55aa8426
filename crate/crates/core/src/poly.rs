//! Dense real polynomials, real-root isolation on an interval, and
//! piecewise-polynomial functions with exact extrema.

use std::ops::{Add, Mul, Neg, Sub};

/// Real polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Returns `q` with `q(x) = p(x - shift)`.
    pub fn shifted(&self, shift: f64) -> Poly {
        // Horner in the polynomial ring: q = (...(a_d (x - s) + a_{d-1})(x - s) + ...)
        let lin = Poly::new(vec![-shift, 1.0]);
        let mut acc = Poly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Poly::constant(c);
        }
        acc
    }

    /// Real roots in the closed interval `[lo, hi]`, ascending.
    ///
    /// Roots of the derivative split the interval into monotone runs; each run
    /// with a sign change holds exactly one root, which is bracketed and
    /// refined by safeguarded Newton steps.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_zero() || lo > hi {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if r >= lo && r <= hi {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let deriv = self.derivative();
                let mut knots = vec![lo];
                knots.extend(deriv.real_roots_in(lo, hi));
                knots.push(hi);
                let mut roots: Vec<f64> = Vec::new();
                for w in knots.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (fa, fb) = (self.eval(a), self.eval(b));
                    let candidate = if fa == 0.0 {
                        Some(a)
                    } else if fb == 0.0 {
                        Some(b)
                    } else if (fa < 0.0) != (fb < 0.0) {
                        Some(bracketed_root(self, &deriv, a, b, fa))
                    } else {
                        None
                    };
                    if let Some(r) = candidate {
                        let tol = 1e-13 * (1.0 + r.abs());
                        if roots.last().is_none_or(|&prev| (r - prev).abs() > tol) {
                            roots.push(r);
                        }
                    }
                }
                roots
            }
        }
    }
}

fn bracketed_root(p: &Poly, dp: &Poly, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = p.eval(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == neg_at_a {
            a = x;
        } else {
            b = x;
        }
        let d = dp.eval(x);
        let newton = x - fx / d;
        x = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (b - a) <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// One polynomial piece on the closure of an interval of positive length.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub poly: Poly,
}

/// A function on `[lo, hi]` given by polynomial pieces on consecutive
/// intervals. Values at the shared breakpoints are irrelevant for essential
/// extrema, so every piece is treated on its closure.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    segments: Vec<Segment>,
}

/// Infimum and supremum of a function together with the abscissae where they
/// are attained (or approached, for open endpoints).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub inf: f64,
    pub sup: f64,
    pub arginf: f64,
    pub argsup: f64,
}

impl Extrema {
    fn empty() -> Self {
        Extrema {
            inf: f64::INFINITY,
            sup: f64::NEG_INFINITY,
            arginf: f64::NAN,
            argsup: f64::NAN,
        }
    }

    fn observe(&mut self, x: f64, v: f64) {
        if v < self.inf {
            self.inf = v;
            self.arginf = x;
        }
        if v > self.sup {
            self.sup = v;
            self.argsup = x;
        }
    }

    pub fn merge(mut self, other: Extrema) -> Extrema {
        self.observe(other.arginf, other.inf);
        self.observe(other.argsup, other.sup);
        self
    }
}

impl PiecewisePoly {
    pub fn from_segments(segments: Vec<Segment>) -> Self {
        PiecewisePoly { segments }
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        PiecewisePoly {
            segments: vec![Segment {
                lo,
                hi,
                poly: Poly::constant(c),
            }],
        }
    }

    /// Sums polynomial terms, each active on its own interval, over the
    /// common refinement of all term endpoints inside `[lo, hi]`.
    pub fn from_terms(lo: f64, hi: f64, terms: &[(f64, f64, Poly)]) -> Self {
        let mut breaks = vec![lo, hi];
        for (a, b, _) in terms {
            for &e in [a, b] {
                if e > lo && e < hi {
                    breaks.push(e);
                }
            }
        }
        let breaks = sorted_breaks(breaks, hi - lo);
        let segments = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let poly = terms
                    .iter()
                    .filter(|(a, b, _)| *a < mid && mid < *b)
                    .fold(Poly::zero(), |acc, (_, _, p)| &acc + p);
                Segment {
                    lo: w[0],
                    hi: w[1],
                    poly,
                }
            })
            .collect();
        PiecewisePoly { segments }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.segments.first().map_or(0.0, |s| s.lo),
            self.segments.last().map_or(0.0, |s| s.hi),
        )
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.lo).collect();
        if let Some(last) = self.segments.last() {
            b.push(last.hi);
        }
        b
    }

    /// Value at `x`, using the piece whose half-open interval `(lo, hi]`
    /// contains it; the left domain endpoint belongs to the first piece.
    pub fn eval(&self, x: f64) -> f64 {
        for (k, s) in self.segments.iter().enumerate() {
            if (x > s.lo || (k == 0 && x == s.lo)) && x <= s.hi {
                return s.poly.eval(x);
            }
        }
        0.0
    }

    pub fn max_degree(&self) -> usize {
        self.segments.iter().map(|s| s.poly.degree()).max().unwrap_or(0)
    }

    /// Exact essential extrema: per piece, the closure endpoints and the
    /// interior critical points are the only candidates.
    pub fn extrema(&self) -> Extrema {
        let mut ext = Extrema::empty();
        for s in &self.segments {
            ext = ext.merge(segment_extrema(&s.poly, s.lo, s.hi));
        }
        ext
    }
}

pub(crate) fn segment_extrema(p: &Poly, lo: f64, hi: f64) -> Extrema {
    let mut ext = Extrema::empty();
    ext.observe(lo, p.eval(lo));
    ext.observe(hi, p.eval(hi));
    for x in p.derivative().real_roots_in(lo, hi) {
        ext.observe(x, p.eval(x));
    }
    ext
}

/// Sorts breakpoints and merges those closer than a relative tolerance.
pub(crate) fn sorted_breaks(mut breaks: Vec<f64>, scale: f64) -> Vec<f64> {
    breaks.sort_by(f64::total_cmp);
    let tol = 1e-12 * scale.abs().max(1.0);
    let mut out: Vec<f64> = Vec::with_capacity(breaks.len());
    for b in breaks {
        if out.last().is_none_or(|&prev| b - prev > tol) {
            out.push(b);
        }
    }
    out
}

/// Dense-grid extrema of an arbitrary scalar function on `[lo, hi]`, sampled
/// at `n` equispaced points including both endpoints.
pub fn grid_extrema<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Extrema {
    let mut ext = Extrema::empty();
    let n = n.max(2);
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        ext.observe(x, f(x));
    }
    ext
}
