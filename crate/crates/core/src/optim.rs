//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The minimizer keeps the best point it has ever evaluated and returns it,
//! so a noisy or non-smooth objective can never end worse than it started.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub max_iters: usize,
    pub memory: usize,
    /// Stop when the largest gradient component falls below this.
    pub gtol: f64,
    /// Stop when an accepted step lowers the value by less than
    /// `ftol * max(|f|, 1)`.
    pub ftol: f64,
    pub max_line_evals: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            memory: 10,
            gtol: 1e-9,
            ftol: 1e-15,
            max_line_evals: 25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Objective after every accepted iteration, starting with the initial value.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// A non-finite value was produced; `x` is the best finite point.
    pub diverged: bool,
}

pub struct Lbfgs {
    pub opts: LbfgsOptions,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

struct Tracker<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> (f64, Vec<f64>),
    evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
    diverged: bool,
}

impl Tracker<'_> {
    fn eval(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        self.evals += 1;
        let (v, g) = (self.f)(x);
        if !v.is_finite() || g.iter().any(|c| !c.is_finite()) {
            self.diverged = true;
            return (f64::INFINITY, g);
        }
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        (v, g)
    }
}

struct Point {
    t: f64,
    f: f64,
    g: Vec<f64>,
    dg: f64,
}

impl Lbfgs {
    pub fn new(opts: LbfgsOptions) -> Self {
        Self { opts }
    }

    pub fn minimize(&self, f: &mut dyn FnMut(&[f64]) -> (f64, Vec<f64>), x0: &[f64]) -> LbfgsResult {
        let mut tr = Tracker {
            f,
            evals: 0,
            best_x: x0.to_vec(),
            best_f: f64::INFINITY,
            diverged: false,
        };
        let mut x = x0.to_vec();
        let (mut fx, mut g) = tr.eval(&x);
        let mut trace = vec![fx];
        let result = |tr: Tracker, iterations: usize, trace: Vec<f64>, converged: bool| LbfgsResult {
            value: tr.best_f,
            x: tr.best_x,
            iterations,
            evaluations: tr.evals,
            trace,
            converged,
            diverged: tr.diverged,
        };
        if !fx.is_finite() {
            return result(tr, 0, trace, false);
        }
        let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut iters = 0;
        while iters < self.opts.max_iters {
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if gmax < self.opts.gtol {
                return result(tr, iters, trace, true);
            }
            let mut d = self.direction(&g, &mem);
            let mut dg = dot(&d, &g);
            if dg >= 0.0 {
                mem.clear();
                d = g.iter().map(|v| -v).collect();
                dg = -dot(&g, &g);
            }
            let t0 = if mem.is_empty() {
                (1.0 / dot(&g, &g).sqrt()).min(1.0)
            } else {
                1.0
            };
            let step = self.line_search(&mut tr, &x, fx, &d, dg, t0);
            let Some(p) = step else {
                if mem.is_empty() {
                    break;
                }
                mem.clear();
                continue;
            };
            let xn = axpy(&x, p.t, &d);
            let s: Vec<f64> = d.iter().map(|v| v * p.t).collect();
            let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
                if mem.len() == self.opts.memory {
                    mem.pop_front();
                }
                mem.push_back((s, y, 1.0 / sy));
            }
            let decrease = fx - p.f;
            x = xn;
            fx = p.f;
            g = p.g;
            iters += 1;
            trace.push(fx);
            if decrease <= self.opts.ftol * fx.abs().max(1.0) {
                return result(tr, iters, trace, true);
            }
        }
        result(tr, iters, trace, false)
    }

    fn direction(&self, g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alpha = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alpha.push(a);
        }
        if let Some((s, y, _)) = mem.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in mem.iter().zip(alpha.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    fn line_search(&self, tr: &mut Tracker, x: &[f64], f0: f64, d: &[f64], dg0: f64, t0: f64) -> Option<Point> {
        const C1: f64 = 1e-4;
        const C2: f64 = 0.9;
        let mut probe = |tr: &mut Tracker, t: f64| {
            let (f, g) = tr.eval(&axpy(x, t, d));
            let dg = dot(&g, d);
            Point { t, f, g, dg }
        };
        let mut lo = Point {
            t: 0.0,
            f: f0,
            g: Vec::new(),
            dg: dg0,
        };
        let mut t = t0;
        let mut evals = 0;
        loop {
            let p = probe(tr, t);
            evals += 1;
            if !p.f.is_finite() {
                return None;
            }
            if p.f > f0 + C1 * t * dg0 || (evals > 1 && p.f >= lo.f) {
                return self.zoom(tr, &mut probe, lo, p, f0, dg0, evals);
            }
            if p.dg.abs() <= -C2 * dg0 {
                return Some(p);
            }
            if p.dg >= 0.0 {
                return self.zoom(tr, &mut probe, p, lo, f0, dg0, evals);
            }
            if evals >= self.opts.max_line_evals {
                return Some(p);
            }
            lo = p;
            t *= 2.0;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn zoom(
        &self,
        tr: &mut Tracker,
        probe: &mut dyn FnMut(&mut Tracker, f64) -> Point,
        mut lo: Point,
        mut hi: Point,
        f0: f64,
        dg0: f64,
        mut evals: usize,
    ) -> Option<Point> {
        const C1: f64 = 1e-4;
        const C2: f64 = 0.9;
        loop {
            if evals >= self.opts.max_line_evals || (hi.t - lo.t).abs() < 1e-16 {
                return if lo.t > 0.0 && lo.f < f0 { Some(lo) } else { None };
            }
            let t = cubic_min(&lo, &hi);
            let p = probe(tr, t);
            evals += 1;
            if !p.f.is_finite() {
                hi = p;
                continue;
            }
            if p.f > f0 + C1 * t * dg0 || p.f >= lo.f {
                hi = p;
            } else {
                if p.dg.abs() <= -C2 * dg0 {
                    return Some(p);
                }
                if p.dg * (hi.t - lo.t) >= 0.0 {
                    hi = std::mem::replace(&mut lo, p);
                } else {
                    lo = p;
                }
            }
        }
    }
}

/// Minimizer of the cubic through two bracketing points, safeguarded to the
/// interior of the bracket.
fn cubic_min(a: &Point, b: &Point) -> f64 {
    let (lo, hi) = if a.t < b.t { (a.t, b.t) } else { (b.t, a.t) };
    let mid = 0.5 * (lo + hi);
    if !b.f.is_finite() {
        return mid;
    }
    let d1 = a.dg + b.dg - 3.0 * (a.f - b.f) / (a.t - b.t);
    let disc = d1 * d1 - a.dg * b.dg;
    if disc < 0.0 {
        return mid;
    }
    let d2 = disc.sqrt() * (b.t - a.t).signum();
    let t = b.t - (b.t - a.t) * (b.dg + d2 - d1) / (b.dg - a.dg + 2.0 * d2);
    let margin = 0.1 * (hi - lo);
    if !t.is_finite() || t < lo + margin || t > hi - margin {
        mid
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let mut f = 0.0;
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() - 1 {
            let a = x[i + 1] - x[i] * x[i];
            let b = 1.0 - x[i];
            f += 100.0 * a * a + b * b;
            g[i] += -400.0 * x[i] * a - 2.0 * b;
            g[i + 1] += 200.0 * a;
        }
        (f, g)
    }

    #[test]
    fn minimizes_rosenbrock() {
        let r = Lbfgs::new(LbfgsOptions::default()).minimize(&mut rosenbrock, &[-1.2, 1.0, -0.5, 0.3]);
        assert!(r.value < 1e-12, "{}", r.value);
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-5));
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn never_returns_worse_than_start() {
        let mut calls = 0;
        let mut f = |x: &[f64]| {
            calls += 1;
            if calls > 1 {
                (f64::NAN, vec![0.0; x.len()])
            } else {
                (x[0] * x[0], vec![2.0 * x[0]])
            }
        };
        let r = Lbfgs::new(LbfgsOptions::default()).minimize(&mut f, &[3.0]);
        assert_eq!(r.x, vec![3.0]);
        assert!(r.diverged);
    }

    #[test]
    fn quadratic_converges_fast() {
        let mut f = |x: &[f64]| {
            let v: f64 = x.iter().enumerate().map(|(i, xi)| (i + 1) as f64 * xi * xi).sum();
            let g = x.iter().enumerate().map(|(i, xi)| 2.0 * (i + 1) as f64 * xi).collect();
            (v, g)
        };
        let r = Lbfgs::new(LbfgsOptions::default()).minimize(&mut f, &[1.0; 10]);
        assert!(r.converged && r.value < 1e-16);
    }
}
