//! Exact integration over space-time rectangles of functions of piecewise
//! constant fields.
//!
//! Every field exposes the straight lines bounding its constant regions. A
//! rectangle is cut into time slabs at each field's breakpoints and at every
//! crossing of two lines; inside such a slab the lines are ordered and the
//! cells between neighbours are trapezoids on which each field is constant.

use crate::model::State;
use crate::tracking::{RoadSolution, StripePattern};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl Rect {
    pub fn new(t0: f64, t1: f64, x0: f64, x1: f64) -> Self {
        Rect { t0, t1, x0, x1 }
    }

    pub fn area(&self) -> f64 {
        (self.t1 - self.t0) * (self.x1 - self.x0)
    }
}

/// Straight line `x(t) = x_ref + speed (t - t_ref)` with an identity key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub t_ref: f64,
    pub x_ref: f64,
    pub speed: f64,
    pub key: u64,
}

impl Line {
    pub fn at(&self, t: f64) -> f64 {
        self.x_ref + self.speed * (t - self.t_ref)
    }
}

pub trait Field: Sync {
    /// Times in `(t0, t1)` at which the set of lines changes.
    fn breaks(&self, t0: f64, t1: f64) -> Vec<f64>;
    /// Lines valid throughout `(ta, tb)` that touch `[x0, x1]`.
    fn lines(&self, ta: f64, tb: f64, x0: f64, x1: f64, out: &mut Vec<Line>);
    /// Value at a point off every line.
    fn value(&self, t: f64, x: f64) -> State;
}

fn touches(l: &Line, ta: f64, tb: f64, x0: f64, x1: f64) -> bool {
    let (a, b) = (l.at(ta), l.at(tb));
    a.max(b) >= x0 && a.min(b) <= x1
}

impl Field for RoadSolution {
    fn breaks(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.breakpoints_in(t0, t1)
    }

    fn lines(&self, ta: f64, tb: f64, x0: f64, x1: f64, out: &mut Vec<Line>) {
        let e = &self.epochs()[self.epoch_index(0.5 * (ta + tb))];
        for &id in &e.fronts {
            let f = self.front(id);
            let l = Line {
                t_ref: f.t_birth,
                x_ref: f.x_birth,
                speed: f.speed,
                key: id as u64,
            };
            if touches(&l, ta, tb, x0, x1) {
                out.push(l);
            }
        }
    }

    fn value(&self, t: f64, x: f64) -> State {
        self.state_at(t, x)
    }
}

impl Field for StripePattern {
    fn breaks(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.emission_times()
            .iter()
            .copied()
            .filter(|&s| s > t0 && s < t1)
            .collect()
    }

    fn lines(&self, ta: f64, tb: f64, x0: f64, x1: f64, out: &mut Vec<Line>) {
        let lam = self.speed();
        for (k, &s) in self.emission_times().iter().enumerate() {
            if s > ta {
                break;
            }
            let l = Line {
                t_ref: s,
                x_ref: 0.0,
                speed: lam,
                key: k as u64,
            };
            if touches(&l, ta, tb, x0, x1) {
                out.push(l);
            }
        }
    }

    fn value(&self, t: f64, x: f64) -> State {
        self.state(t, x)
    }
}

struct Slab {
    ta: f64,
    tb: f64,
    lines: Vec<(usize, Line)>,
}

fn same_lines(a: &[(usize, Line)], b: &[(usize, Line)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.0 == y.0 && x.1.key == y.1.key)
}

/// Integrate `f(values of fields)` over `rect`; `f` returns `K` components at once.
pub fn integrate<const K: usize, F>(fields: &[&dyn Field], rect: Rect, f: F) -> [f64; K]
where
    F: Fn(&[State]) -> [f64; K],
{
    let mut acc = [0.0; K];
    if !(rect.t1 > rect.t0 && rect.x1 > rect.x0) {
        return acc;
    }
    let mut times = vec![rect.t0, rect.t1];
    for fld in fields {
        times.extend(fld.breaks(rect.t0, rect.t1));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();

    // collect lines per slab, merging neighbours whose line sets agree
    let mut slabs: Vec<Slab> = Vec::new();
    let mut buf = Vec::new();
    for w in times.windows(2) {
        let (ta, tb) = (w[0], w[1]);
        if tb <= ta {
            continue;
        }
        let mut lines = Vec::new();
        for (k, fld) in fields.iter().enumerate() {
            buf.clear();
            fld.lines(ta, tb, rect.x0, rect.x1, &mut buf);
            lines.extend(buf.iter().map(|l| (k, *l)));
        }
        match slabs.last_mut() {
            Some(last) if same_lines(&last.lines, &lines) => last.tb = tb,
            _ => slabs.push(Slab { ta, tb, lines }),
        }
    }

    let clip = fields.len();
    let mut values = vec![State::VACUUM; fields.len()];
    for slab in slabs {
        let mut lines = slab.lines;
        lines.push((
            clip,
            Line {
                t_ref: 0.0,
                x_ref: rect.x0,
                speed: 0.0,
                key: 0,
            },
        ));
        lines.push((
            clip,
            Line {
                t_ref: 0.0,
                x_ref: rect.x1,
                speed: 0.0,
                key: 1,
            },
        ));

        let mut cuts = vec![slab.ta, slab.tb];
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a, b) = (&lines[i], &lines[j]);
                if a.0 == b.0 || a.1.speed == b.1.speed {
                    continue;
                }
                let tc = (b.1.x_ref - a.1.x_ref + a.1.speed * a.1.t_ref - b.1.speed * b.1.t_ref)
                    / (a.1.speed - b.1.speed);
                if tc > slab.ta && tc < slab.tb {
                    cuts.push(tc);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut pos: Vec<(f64, Line)> = Vec::with_capacity(lines.len());
        for w in cuts.windows(2) {
            let (ua, ub) = (w[0], w[1]);
            let dt = ub - ua;
            if dt <= 0.0 {
                continue;
            }
            let tm = 0.5 * (ua + ub);
            pos.clear();
            pos.extend(
                lines
                    .iter()
                    .map(|(_, l)| (l.at(tm), *l))
                    .filter(|(x, _)| *x >= rect.x0 && *x <= rect.x1),
            );
            pos.sort_by(|a, b| a.0.total_cmp(&b.0));
            for pair in pos.windows(2) {
                let (xl, xr) = (pair[0].0, pair[1].0);
                if xr <= xl {
                    continue;
                }
                let (ll, lr) = (pair[0].1, pair[1].1);
                let width = |t: f64| (lr.at(t) - ll.at(t)).max(0.0);
                let area = 0.5 * (width(ua) + width(ub)) * dt;
                if area <= 0.0 {
                    continue;
                }
                let xm = 0.5 * (xl + xr);
                for (v, fld) in values.iter_mut().zip(fields) {
                    *v = fld.value(tm, xm);
                }
                let r = f(&values);
                for k in 0..K {
                    acc[k] += r[k] * area;
                }
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::schedule::LightSchedule;

    #[test]
    fn stripe_areas_are_exact() {
        let p = ModelParams::p0();
        let s = LightSchedule::build(1.0, 1, &[1.0, 1.0]).unwrap();
        let a = State::new(0.8, 2.0);
        let b = p.sharp_point(3.0, 0.5).unwrap();
        let out = p.sharp_point(2.8, 0.5).unwrap();
        let pat = StripePattern::new(0.5, out, &s, &[a, b], None).unwrap();
        let rect = Rect::new(0.0, 1.0, 0.0, 1.0);
        // triangle under x = t/2 split at emission time 1/2
        let [first, second, ahead] = integrate(&[&pat], rect, |v| {
            [
                (v[0] == a) as u8 as f64,
                (v[0] == b) as u8 as f64,
                (v[0] == out) as u8 as f64,
            ]
        });
        assert!((first - 0.1875).abs() < 1e-15, "{first}");
        assert!((second - 0.0625).abs() < 1e-15, "{second}");
        assert!((ahead - 0.75).abs() < 1e-15);
        let [mass] = integrate(&[&pat], rect, |v| [v[0].rho]);
        let expect = 0.1875 * a.rho + 0.0625 * b.rho + 0.75 * out.rho;
        assert!((mass - expect).abs() < 1e-14);
    }

    #[test]
    fn pattern_against_itself_has_no_deviation() {
        let p = ModelParams::p0();
        let s = LightSchedule::build(1.0, 7, &[0.4, 1.0]).unwrap();
        let out = p.sharp_point(2.8, 0.5).unwrap();
        let pat = StripePattern::new(
            0.5,
            out,
            &s,
            &[State::new(0.8, 2.0), State::new(0.9, 2.7)],
            None,
        )
        .unwrap();
        let [d, total] = integrate(&[&pat, &pat], Rect::new(0.0, 1.0, 0.0, 0.6), |v| {
            [(v[0] != v[1]) as u8 as f64, 1.0]
        });
        assert_eq!(d, 0.0);
        assert!((total - 0.6).abs() < 1e-14);
    }
}
