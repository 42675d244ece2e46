//! Adaptive Gauss–Kronrod quadrature in one dimension and iterated quadrature
//! over a rectangle with a disk cut out of it.

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};

// Kronrod 15-point abscissae and weights on [-1, 1], with the embedded
// 7-point Gauss weights (abscissae at odd indices).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Upper bound on subintervals before reporting non-convergence.
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment { a, b, value, error })
}

/// Integrate a fallible integrand over the union of consecutive intervals
/// delimited by `breakpoints` (sorted ascending, at least two entries).
///
/// Refinement is global: the subinterval with the largest error estimate is
/// bisected until the summed error is within tolerance.
pub fn try_integrate<F>(mut f: F, breakpoints: &[f64], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut segs = Vec::with_capacity(64);
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            segs.push(gk15(&mut f, w[0], w[1])?);
        }
    }
    let mut evaluations = 15 * segs.len();
    if segs.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations,
        });
    }
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        if !(value.is_finite() && error.is_finite()) {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: segs.len(),
            });
        }
        if error <= tol.target(value) {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        let (idx, worst) = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                let mid = 0.5 * (s.a + s.b);
                mid > s.a && mid < s.b
            })
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, s)| (i, *s))
            .ok_or(Error::Quadrature {
                estimate: value,
                error,
                intervals: segs.len(),
            })?;
        if segs.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                intervals: segs.len(),
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        segs[idx] = gk15(&mut f, worst.a, mid)?;
        segs.push(gk15(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

/// Infallible-integrand convenience wrapper around [`try_integrate`].
pub fn integrate<F>(mut f: F, breakpoints: &[f64], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), breakpoints, tol)
}

/// Sorted, de-duplicated breakpoints: `lo`, `hi`, and every extra point
/// strictly inside `(lo, hi)`.
pub fn breakpoints(lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// A disk to be removed from the integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hole {
    pub center: Point,
    pub radius: f64,
}

/// Integrate `f` over `rect`, minus the optional `hole`, by iterated 1-D
/// quadrature (outer in `x`, inner in `y`).
///
/// The hole is removed exactly: for each `x` the inner integral runs over the
/// one or two `y` intervals left outside the disk, and the outer integral is
/// split where the chord length is not smooth. `focus` adds breakpoints at its
/// coordinates, for integrands with a kink there.
pub fn integrate_rect<F>(
    f: F,
    rect: Rect,
    hole: Option<Hole>,
    focus: Option<Point>,
    tol: Tolerance,
) -> Result<QuadResult>
where
    F: Fn(Point) -> f64,
{
    let hole = hole.filter(|h| h.radius > 0.0);
    let mut xs = Vec::new();
    if let Some(h) = hole {
        xs.extend([h.center.x - h.radius, h.center.x, h.center.x + h.radius]);
    }
    if let Some(p) = focus {
        xs.push(p.x);
    }
    let outer_bp = breakpoints(rect.x0, rect.x1, &xs);
    let inner_tol = Tolerance::new(
        0.1 * tol.abs / rect.width().max(f64::MIN_POSITIVE),
        0.1 * tol.rel,
    );
    let mut inner_evals = 0usize;
    let mut y_extra = Vec::with_capacity(2);
    if let Some(p) = focus {
        y_extra.push(p.y);
    }
    if let Some(h) = hole {
        y_extra.push(h.center.y);
    }

    let res = try_integrate(
        |x| {
            let mut total = 0.0;
            let mut segments: [(f64, f64); 2] = [(rect.y0, rect.y1), (0.0, 0.0)];
            let mut n = 1;
            if let Some(h) = hole {
                let dx = x - h.center.x;
                if dx.abs() < h.radius {
                    let half = (h.radius * h.radius - dx * dx).sqrt();
                    segments = [
                        (rect.y0, (h.center.y - half).min(rect.y1)),
                        ((h.center.y + half).max(rect.y0), rect.y1),
                    ];
                    n = 2;
                }
            }
            for &(lo, hi) in &segments[..n] {
                if hi <= lo {
                    continue;
                }
                let bp = breakpoints(lo, hi, &y_extra);
                let r = integrate(|y| f(Point::new(x, y)), &bp, inner_tol)?;
                inner_evals += r.evaluations;
                total += r.value;
            }
            Ok(total)
        },
        &outer_bp,
        tol,
    )?;
    Ok(QuadResult {
        evaluations: res.evaluations + inner_evals,
        ..res
    })
}
