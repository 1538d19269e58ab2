//! Dense BFGS with a strong-Wolfe line search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfgsOptions {
    /// Stop when the gradient infinity norm falls below this.
    pub gtol: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_line_search: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-8,
            max_iter: 10_000,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

impl BfgsOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gtol > 0.0) || self.max_iter == 0 || self.max_line_search == 0 {
            return Err(Error::Contract("gtol, max_iter and max_line_search must be positive".into()));
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::Contract(format!(
                "Wolfe constants need 0 < c1 < c2 < 1, got c1={} c2={}",
                self.c1, self.c2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub message: String,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

struct Point {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

struct LineSearch<'a, F> {
    fun: &'a mut F,
    x: &'a [f64],
    p: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    evaluations: usize,
    // energies this close to f0 are indistinguishable in floating point
    f_noise: f64,
}

impl<F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>> LineSearch<'_, F> {
    fn eval(&mut self, alpha: f64) -> Result<Point> {
        let trial: Vec<f64> = self.x.iter().zip(self.p).map(|(x, p)| x + alpha * p).collect();
        let (f, g) = (self.fun)(&trial)?;
        self.evaluations += 1;
        let slope = dot(&g, self.p);
        Ok(Point { alpha, f, g, slope })
    }

    /// `f(b) − f(a)`, estimated from the slopes by the trapezoid rule when
    /// the two values differ by less than rounding noise.
    fn rise(&self, a: &Point, b: &Point) -> f64 {
        let d = b.f - a.f;
        if d.abs() <= self.f_noise {
            0.5 * (b.alpha - a.alpha) * (a.slope + b.slope)
        } else {
            d
        }
    }

    fn origin(&self) -> Point {
        Point {
            alpha: 0.0,
            f: self.f0,
            g: Vec::new(),
            slope: self.slope0,
        }
    }

    fn armijo(&self, pt: &Point) -> bool {
        pt.f.is_finite() && self.rise(&self.origin(), pt) <= self.c1 * pt.alpha * self.slope0
    }

    fn curvature(&self, pt: &Point) -> bool {
        pt.slope.abs() <= -self.c2 * self.slope0
    }

    fn search(&mut self) -> Result<Option<Point>> {
        let mut prev = self.origin();
        let mut alpha = 1.0;
        for i in 0..self.budget {
            let cur = self.eval(alpha)?;
            if !self.armijo(&cur) || (i > 0 && self.rise(&prev, &cur) >= 0.0) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Ok(Some(cur));
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            alpha = cur.alpha * 2.0;
            prev = cur;
        }
        Ok(None)
    }

    fn zoom(&mut self, mut lo: Point, mut hi: Point) -> Result<Option<Point>> {
        while self.evaluations < self.budget {
            let width = hi.alpha - lo.alpha;
            if width.abs() <= 1e-14 * lo.alpha.abs().max(1e-8) {
                break;
            }
            let trial = if (hi.f - lo.f).abs() <= self.f_noise {
                secant_step(&lo, &hi)
            } else {
                cubic_step(&lo, &hi)
            };
            let alpha = trial.unwrap_or(lo.alpha + 0.5 * width);
            let cur = self.eval(alpha)?;
            if !self.armijo(&cur) || self.rise(&lo, &cur) >= 0.0 {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Ok(Some(cur));
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = std::mem::replace(&mut lo, cur);
                } else {
                    lo = cur;
                }
            }
        }
        // accept the best sufficient-decrease point if curvature cannot be met
        if lo.alpha != 0.0 && self.rise(&self.origin(), &lo) < 0.0 {
            return Ok(Some(lo));
        }
        Ok(None)
    }
}

fn interior(t: f64, a: &Point, b: &Point) -> Option<f64> {
    let (lo, hi) = if a.alpha < b.alpha { (a.alpha, b.alpha) } else { (b.alpha, a.alpha) };
    let margin = 0.1 * (hi - lo);
    (t.is_finite() && t > lo + margin && t < hi - margin).then_some(t)
}

/// Minimizer of the cubic through two bracket points, kept away from the ends.
fn cubic_step(a: &Point, b: &Point) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    interior(b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom, a, b)
}

/// Zero of the linear interpolant of the slopes.
fn secant_step(a: &Point, b: &Point) -> Option<f64> {
    let ds = b.slope - a.slope;
    if ds == 0.0 {
        return None;
    }
    interior(a.alpha - a.slope * (b.alpha - a.alpha) / ds, a, b)
}

/// Minimizes `fun`, which returns the value and gradient at a point.
///
/// Values closer than `4ε·max(1, |f|)` are compared through their slopes,
/// so accepted steps never increase `f` beyond that noise level. On a line-search failure the inverse Hessian is reset
/// once; a second consecutive failure stops with `converged == false`.
pub fn minimize<F>(mut fun: F, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    opts.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("initial point has non-finite entries".into()));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = fun(&x)?;
    if !f.is_finite() {
        return Err(Error::Numerical(format!("objective is {f} at the initial point")));
    }
    let mut evaluations = 1;
    let mut hinv = identity(n);
    let mut fresh = true;
    let mut first_update = true;

    let finish = |x: Vec<f64>, f: f64, g: &[f64], iterations, evaluations, converged, message: String| BfgsOutcome {
        x,
        f,
        gradient_norm: inf_norm(g),
        iterations,
        evaluations,
        converged,
        message,
    };

    for iter in 0..opts.max_iter {
        if n == 0 || inf_norm(&g) < opts.gtol {
            return Ok(finish(x, f, &g, iter, evaluations, true, "gradient below tolerance".into()));
        }
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&p, &g);
        if !(slope < 0.0) {
            hinv = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = dot(&p, &g);
        }
        let mut ls = LineSearch {
            fun: &mut fun,
            x: &x,
            p: &p,
            f0: f,
            slope0: slope,
            c1: opts.c1,
            c2: opts.c2,
            budget: opts.max_line_search,
            evaluations: 0,
            f_noise: 4.0 * f64::EPSILON * f.abs().max(1.0),
        };
        let found = ls.search()?;
        evaluations += ls.evaluations;
        let Some(pt) = found else {
            if fresh {
                return Ok(finish(
                    x,
                    f,
                    &g,
                    iter,
                    evaluations,
                    false,
                    "line search failed along steepest descent".into(),
                ));
            }
            hinv = identity(n);
            fresh = true;
            continue;
        };

        let s: Vec<f64> = p.iter().map(|v| pt.alpha * v).collect();
        let y: Vec<f64> = pt.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        x.iter_mut().zip(&s).for_each(|(xi, si)| *xi += si);
        f = pt.f;
        g = pt.g;
        fresh = false;
        if sy > 0.0 {
            if first_update {
                let scale = sy / dot(&y, &y);
                hinv.iter_mut().for_each(|v| *v *= scale);
                first_update = false;
            }
            bfgs_update(&mut hinv, &s, &y, sy);
        }
    }
    let converged = inf_norm(&g) < opts.gtol;
    let message = if converged {
        "gradient below tolerance".to_string()
    } else {
        format!("reached max_iter = {}", opts.max_iter)
    };
    Ok(finish(x, f, &g, opts.max_iter, evaluations, converged, message))
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    let k = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += k * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
