//! Segment proximity queries and crossing detection over interpolated motion.
//!
//! Wires and link axes are modeled as straight segments. Between two waypoints the
//! segment endpoints are blended linearly, so a pair of wires traces a one-parameter
//! family of segment pairs indexed by `k` in `[0, 1]` (`k = 0` is the configuration at
//! the first waypoint). A crossing is any `k` where the closest distance drops below
//! a threshold.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Squared length below which a segment is treated as a point.
const POINT_EPS_SQ: f64 = 1e-24;
/// Relative threshold on `ac - b^2` for treating two segments as parallel.
const PARALLEL_EPS: f64 = 1e-12;

/// Number of equally spaced `k` samples evaluated before the bracketed search.
pub const PRESCAN_SAMPLES: usize = 9;
/// Maximum number of Brent refinement steps per crossing query.
pub const BRENT_MAX_ITER: usize = 20;
/// Bracket-width tolerance in `k` for the Brent refinement.
pub const BRENT_TOL: f64 = 1e-6;

/// Narrowest interval the certification pass will still split.
const CERTIFY_MIN_WIDTH: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("interpolation parameter k = {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Point3) -> Point3 {
        Point3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    /// `self + k * (other - self)`; exact at both ends and when `self == other`.
    #[inline]
    pub fn lerp(self, other: Point3, k: f64) -> Point3 {
        if k == 1.0 {
            return other;
        }
        self + (other - self) * k
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn total_cmp(&self, other: &Point3) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.z.total_cmp(&other.z))
    }
}

impl Add for Point3 {
    type Output = Point3;
    #[inline]
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    #[inline]
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn mul(self, rhs: f64) -> Point3 {
        Point3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    #[inline]
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point3,
    pub end: Point3,
}

impl Segment {
    pub const fn new(start: Point3, end: Point3) -> Self {
        Self { start, end }
    }

    /// Degenerate segment located at `p`.
    pub const fn point(p: Point3) -> Self {
        Self { start: p, end: p }
    }

    #[inline]
    pub fn direction(&self) -> Point3 {
        self.end - self.start
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    /// Point at parameter `s`, `start + s * (end - start)`.
    #[inline]
    pub fn at(&self, s: f64) -> Point3 {
        self.start + self.direction() * s
    }

    pub fn lerp(&self, other: &Segment, k: f64) -> Segment {
        Segment::new(self.start.lerp(other.start, k), self.end.lerp(other.end, k))
    }

    fn total_cmp(&self, other: &Segment) -> Ordering {
        self.start
            .total_cmp(&other.start)
            .then(self.end.total_cmp(&other.end))
    }
}

/// Closest approach between two segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProximityResult {
    /// Parameter along the first segment.
    pub s_star: f64,
    /// Parameter along the second segment.
    pub t_star: f64,
    pub distance: f64,
}

/// Exact minimum distance between two closed segments.
///
/// The unconstrained line-line stationary point is clamped to the unit square; when a
/// parameter hits a boundary the other one is re-minimized and re-clamped, which yields
/// the true constrained minimum of the convex quadratic. Inputs are processed in a
/// canonical order so that swapping `a` and `b` gives a bitwise identical distance.
pub fn segment_min_distance(a: &Segment, b: &Segment) -> ProximityResult {
    if a.total_cmp(b) == Ordering::Greater {
        let (t, s) = closest_parameters(b, a);
        finish(a, b, s, t)
    } else {
        let (s, t) = closest_parameters(a, b);
        finish(a, b, s, t)
    }
}

fn finish(a: &Segment, b: &Segment, s: f64, t: f64) -> ProximityResult {
    ProximityResult {
        s_star: s,
        t_star: t,
        distance: a.at(s).distance(b.at(t)),
    }
}

#[inline]
fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Returns `(s, t)` minimizing `|w + s u - t v|` over the unit square.
fn closest_parameters(a: &Segment, b: &Segment) -> (f64, f64) {
    let u = a.direction();
    let v = b.direction();
    let w = a.start - b.start;
    let uu = u.dot(u);
    let uv = u.dot(v);
    let vv = v.dot(v);
    let uw = u.dot(w);
    let vw = v.dot(w);

    match (uu < POINT_EPS_SQ, vv < POINT_EPS_SQ) {
        (true, true) => return (0.0, 0.0),
        (true, false) => return (0.0, clamp01(vw / vv)),
        (false, true) => return (clamp01(-uw / uu), 0.0),
        (false, false) => {}
    }

    let det = uu * vv - uv * uv;
    if det < PARALLEL_EPS * uu * vv {
        return parallel_parameters(u, v, w, uu, uv, vv, uw, vw);
    }

    let mut s = clamp01((uv * vw - vv * uw) / det);
    let mut t = (uv * s + vw) / vv;
    if t < 0.0 {
        t = 0.0;
        s = clamp01(-uw / uu);
    } else if t > 1.0 {
        t = 1.0;
        s = clamp01((uv - uw) / uu);
    }
    (s, t)
}

/// Near-parallel segments: the minimum is attained at an endpoint of one of the two, so
/// take the best of the endpoint projections.
#[allow(clippy::too_many_arguments)]
fn parallel_parameters(
    u: Point3,
    v: Point3,
    w: Point3,
    uu: f64,
    uv: f64,
    vv: f64,
    uw: f64,
    vw: f64,
) -> (f64, f64) {
    // s = 0 with t by projection, then s recomputed for the clamped t.
    let t0 = clamp01(vw / vv);
    let s0 = clamp01((t0 * uv - uw) / uu);
    let candidates = [
        (s0, t0),
        (0.0, t0),
        (1.0, clamp01((vw + uv) / vv)),
        (clamp01(-uw / uu), 0.0),
        (clamp01((uv - uw) / uu), 1.0),
    ];
    let gap = |(s, t): (f64, f64)| (w + u * s - v * t).norm_squared();
    candidates
        .into_iter()
        .min_by(|p, q| gap(*p).total_cmp(&gap(*q)))
        .expect("candidate list is non-empty")
}

/// Two segments observed at the start (`k = 0`) and end (`k = 1`) of a motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPair {
    pub seg_a_begin: Segment,
    pub seg_a_end: Segment,
    pub seg_b_begin: Segment,
    pub seg_b_end: Segment,
}

impl MotionPair {
    pub fn new(a_begin: Segment, a_end: Segment, b_begin: Segment, b_end: Segment) -> Self {
        Self {
            seg_a_begin: a_begin,
            seg_a_end: a_end,
            seg_b_begin: b_begin,
            seg_b_end: b_end,
        }
    }

    /// Pair that does not move.
    pub fn stationary(a: Segment, b: Segment) -> Self {
        Self::new(a, a, b, b)
    }

    /// Both segments at motion parameter `k`.
    pub fn segments_at(&self, k: f64) -> (Segment, Segment) {
        (
            self.seg_a_begin.lerp(&self.seg_a_end, k),
            self.seg_b_begin.lerp(&self.seg_b_end, k),
        )
    }

    pub(crate) fn distance_at_unchecked(&self, k: f64) -> f64 {
        let (a, b) = self.segments_at(k);
        segment_min_distance(&a, &b).distance
    }

    /// Lipschitz constant of `k -> distance_at(self, k).distance`: every point of a
    /// blended segment moves no faster than the faster of its two endpoints.
    pub fn speed_bound(&self) -> f64 {
        let a = (self.seg_a_end.start - self.seg_a_begin.start)
            .norm()
            .max((self.seg_a_end.end - self.seg_a_begin.end).norm());
        let b = (self.seg_b_end.start - self.seg_b_begin.start)
            .norm()
            .max((self.seg_b_end.end - self.seg_b_begin.end).norm());
        a + b
    }
}

/// Closest approach of the pair with endpoints blended at `k`.
pub fn distance_at(pair: &MotionPair, k: f64) -> Result<ProximityResult, GeometryError> {
    if !(0.0..=1.0).contains(&k) {
        return Err(GeometryError::ParameterOutOfRange(k));
    }
    let (a, b) = pair.segments_at(k);
    Ok(segment_min_distance(&a, &b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingReport {
    pub crossed: bool,
    /// Motion parameter of the smallest observed distance.
    pub k_min: f64,
    /// Smallest observed distance.
    pub d_min: f64,
}

/// Searches `k -> distance_at(pair, k)` for a value below `epsilon`.
///
/// A coarse scan over [`PRESCAN_SAMPLES`] equally spaced values comes first (endpoints
/// included). Every local minimum of the scan is then refined by a Brent minimization
/// bracketed by its neighbouring samples, best scan value first, each limited to
/// [`BRENT_MAX_ITER`] steps. Scan intervals whose Lipschitz lower bound still falls
/// below `epsilon / 2` are finally bisected until the bound clears it, so a motion whose
/// true minimum is below `epsilon / 2` is always reported. The search stops at the first
/// evaluation below `epsilon`.
pub fn crossing_during_motion(pair: &MotionPair, epsilon: f64) -> CrossingReport {
    assert!(epsilon > 0.0, "crossing threshold must be positive");

    let last = (PRESCAN_SAMPLES - 1) as f64;
    let mut scan = [0.0; PRESCAN_SAMPLES];
    let mut best = CrossingReport {
        crossed: false,
        k_min: 0.0,
        d_min: f64::INFINITY,
    };
    for (i, slot) in scan.iter_mut().enumerate() {
        let k = i as f64 / last;
        let d = pair.distance_at_unchecked(k);
        *slot = d;
        if d < best.d_min {
            best = CrossingReport { crossed: false, k_min: k, d_min: d };
        }
        if d < epsilon {
            best.crossed = true;
            return best;
        }
    }

    let mut minima: Vec<usize> = (0..PRESCAN_SAMPLES)
        .filter(|&i| (i == 0 || scan[i] <= scan[i - 1]) && (i + 1 == PRESCAN_SAMPLES || scan[i] <= scan[i + 1]))
        .collect();
    minima.sort_by(|&a, &b| scan[a].total_cmp(&scan[b]).then(a.cmp(&b)));

    for i in minima {
        let lo = i.saturating_sub(1) as f64 / last;
        let hi = (i + 1).min(PRESCAN_SAMPLES - 1) as f64 / last;
        let (k, d) = brent_minimize(
            |k| pair.distance_at_unchecked(k),
            lo,
            hi,
            (i as f64 / last, scan[i]),
            BRENT_TOL,
            BRENT_MAX_ITER,
            epsilon,
        );
        if d < best.d_min {
            best.k_min = k;
            best.d_min = d;
        }
        if best.d_min < epsilon {
            best.crossed = true;
            return best;
        }
    }

    let lipschitz = pair.speed_bound();
    let floor = 0.5 * epsilon;
    let mut stack: Vec<(f64, f64, f64, f64)> = (0..PRESCAN_SAMPLES - 1)
        .map(|i| (i as f64 / last, scan[i], (i + 1) as f64 / last, scan[i + 1]))
        .collect();
    while let Some((k0, d0, k1, d1)) = stack.pop() {
        if 0.5 * (d0 + d1 - lipschitz * (k1 - k0)) >= floor || k1 - k0 < CERTIFY_MIN_WIDTH {
            continue;
        }
        let km = 0.5 * (k0 + k1);
        let dm = pair.distance_at_unchecked(km);
        if dm < best.d_min {
            best.k_min = km;
            best.d_min = dm;
        }
        if dm < epsilon {
            best.crossed = true;
            return best;
        }
        stack.push((km, dm, k1, d1));
        stack.push((k0, d0, km, dm));
    }
    best
}

/// Bounded Brent minimization (golden section with parabolic steps) on `[lo, hi]`,
/// started from a known interior or boundary point `start`.
///
/// Returns the best `(x, f(x))` seen. Stops early as soon as a value below
/// `stop_below` is evaluated.
pub fn brent_minimize<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    start: (f64, f64),
    tol: f64,
    max_iter: usize,
    stop_below: f64,
) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let sqrt_eps = f64::EPSILON.sqrt();

    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut x, mut fx) = start;
    let (mut w, mut fw) = (x, fx);
    let (mut v, mut fv) = (x, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let u = u.clamp(a, b);
        let fu = f(u);
        if fu < stop_below {
            return (u, fu);
        }

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}
