//! Event-driven front tracking on the star junction `n -> 1`.
//!
//! While road `i` holds the green, road `i` and the outgoing road form a single
//! line on which the junction is transparent; every red road is a half-line
//! closed by a wall at `x = 0`, so its trace sits at `(R, R w)`. At each light
//! switch the junction Riemann problems are re-solved from the traces.
//!
//! Every front is a straight jump. A rarefaction fan is emitted as a
//! staircase of small jumps on its w-ray, each moving with its
//! Rankine–Hugoniot speed, so the tracked solution is an exact weak solution
//! and fan values are resolved to within `1 / fan_pieces` of the fan's
//! amplitude. Colliding fronts are replaced by the Riemann solution between
//! the outermost states of the colliding group.

mod pattern;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::riemann::{self, Propagation, WaveKind};
use crate::schedule::LightSchedule;

pub use pattern::{
    deviation_in, deviation_set_measure, transient_end, transient_measure, StripePattern, TOL_STATE,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingOptions {
    pub max_events: usize,
    /// Number of rarefaction fronts that replace each fan.
    pub fan_pieces: usize,
    /// Events closer than this in time are coalesced.
    pub tol_event: f64,
}

impl Default for TrackingOptions {
    fn default() -> Self {
        TrackingOptions {
            max_events: 1_000_000,
            fan_pieces: 32,
            tol_event: 1e-12,
        }
    }
}

/// Absolute distance under which fronts are considered to meet.
const TOL_X: f64 = 1e-11;

/// A tracked discontinuity, alive on `[t_birth, t_death]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Front {
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    pub t_birth: f64,
    pub x_birth: f64,
    pub speed: f64,
    pub t_death: f64,
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        self.x_birth + self.speed * (t - self.t_birth)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Incoming road, `x < 0`, zero-based index.
    Incoming(usize),
    /// Outgoing road, `x > 0`.
    Outgoing,
}

/// Fronts alive on a road (and on whatever road it is merged with) over
/// `[t_start, t_end)`, ordered by position.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub t_start: f64,
    pub t_end: f64,
    /// State to the left of the first front.
    pub base: State,
    pub fronts: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    LightSwitch,
    Collision,
    WallHit,
    JunctionCrossing,
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    /// Road whose line hosted the event; the outgoing road index is `n`.
    pub road: usize,
    pub location: f64,
}

/// Row of the fronts table: one straight piece of one front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontRecord {
    pub t_start: f64,
    pub t_end: f64,
    /// Position at `t_start`.
    pub x_start: f64,
    pub speed: f64,
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
}

/// Exact solution on one road over `[0, T]`.
#[derive(Debug, Clone)]
pub struct RoadSolution {
    pub orientation: Orientation,
    params: ModelParams,
    horizon: f64,
    arena: Arc<Vec<Front>>,
    epochs: Vec<Epoch>,
    traces: Vec<TraceSegment>,
}

impl RoadSolution {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    pub fn front(&self, id: u32) -> &Front {
        &self.arena[id as usize]
    }

    /// Piecewise-constant trace at `x = 0-` (incoming) or `x = 0+` (outgoing).
    pub fn trace_history(&self) -> &[TraceSegment] {
        &self.traces
    }

    fn check_domain(&self, t: f64, x: f64) -> Result<()> {
        let inside_t = (0.0..=self.horizon).contains(&t);
        let inside_x = match self.orientation {
            Orientation::Incoming(_) => x <= 0.0,
            Orientation::Outgoing => x >= 0.0,
        };
        if inside_t && inside_x && x.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, x })
        }
    }

    pub(crate) fn epoch_index(&self, t: f64) -> usize {
        let k = self.epochs.partition_point(|e| e.t_start <= t);
        k.saturating_sub(1)
    }

    /// State at `(t, x)`; on a front the right state is returned.
    pub fn eval(&self, t: f64, x: f64) -> Result<State> {
        self.check_domain(t, x)?;
        Ok(self.state_at(t, x))
    }

    pub(crate) fn state_at(&self, t: f64, x: f64) -> State {
        let e = &self.epochs[self.epoch_index(t)];
        self.state_in_epoch(e, t, x, false)
    }

    /// `left_limit` selects the limit from the left of `x` instead of the value
    /// with the right-state convention.
    fn state_in_epoch(&self, e: &Epoch, t: f64, x: f64, left_limit: bool) -> State {
        let k = e.fronts.partition_point(|&id| {
            let y = self.arena[id as usize].position(t);
            if left_limit {
                y < x
            } else {
                y <= x
            }
        });
        match k {
            0 => e.base,
            _ => self.arena[e.fronts[k - 1] as usize].right,
        }
    }

    /// Every front that visits this road.
    pub fn fronts_table(&self) -> Vec<FrontRecord> {
        // a front may enter this road after its birth on another one
        let mut first_seen = std::collections::BTreeMap::new();
        for e in &self.epochs {
            for &id in &e.fronts {
                first_seen.entry(id).or_insert(e.t_start);
            }
        }
        first_seen
            .into_iter()
            .map(|(id, seen)| (&self.arena[id as usize], seen))
            .filter(|(f, _)| {
                let t_end = f.t_death.min(self.horizon);
                let xs = [f.x_birth, f.position(t_end)];
                match self.orientation {
                    Orientation::Incoming(_) => xs.iter().any(|&x| x <= 0.0),
                    Orientation::Outgoing => xs.iter().any(|&x| x >= 0.0),
                }
            })
            .map(|(f, seen)| {
                let t_start = f.t_birth.max(seen);
                FrontRecord {
                    t_start,
                    t_end: f.t_death.min(self.horizon),
                    x_start: f.position(t_start),
                    speed: f.speed,
                    kind: f.kind,
                    left: f.left,
                    right: f.right,
                }
            })
            .collect()
    }

    /// Epoch boundaries inside `(t0, t1)`.
    pub fn breakpoints_in(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.epochs
            .iter()
            .map(|e| e.t_start)
            .filter(|&t| t > t0 && t < t1)
            .collect()
    }

    /// Times in `(t0, t1)` where some front crosses `x`.
    pub fn crossings_at(&self, x: f64, t0: f64, t1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let first = self.epoch_index(t0);
        for e in &self.epochs[first..] {
            if e.t_start >= t1 {
                break;
            }
            let (a, b) = (e.t_start.max(t0), e.t_end.min(t1));
            for &id in &e.fronts {
                let f = &self.arena[id as usize];
                if f.speed != 0.0 {
                    let tc = f.t_birth + (x - f.x_birth) / f.speed;
                    if tc > a && tc < b {
                        out.push(tc);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Full result of one run: one [`RoadSolution`] per road, outgoing road last.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: ModelParams,
    pub schedule: LightSchedule,
    pub initial: Vec<State>,
    pub roads: Vec<RoadSolution>,
    pub events: Vec<Event>,
}

impl Simulation {
    pub fn outgoing(&self) -> &RoadSolution {
        &self.roads[self.roads.len() - 1]
    }

    pub fn incoming(&self, road: usize) -> &RoadSolution {
        &self.roads[road]
    }

    /// Number of processed events, light switches included.
    pub fn event_count(&self) -> usize {
        self.events.len()
    }
}

/// Evaluate a road solution at `(t, x)`.
pub fn eval_solution(sol: &RoadSolution, t: f64, x: f64) -> Result<State> {
    sol.eval(t, x)
}

/// Run the light-regulated junction from the initial states `init[0..n]`
/// (incoming) and `init[n]` (outgoing).
pub fn simulate(p: &ModelParams, schedule: &LightSchedule, init: &[State]) -> Result<Simulation> {
    simulate_with(p, schedule, init, TrackingOptions::default())
}

pub fn simulate_with(
    p: &ModelParams,
    schedule: &LightSchedule,
    init: &[State],
    opts: TrackingOptions,
) -> Result<Simulation> {
    let (sim, err) = simulate_partial(p, schedule, init, opts)?;
    match err {
        None => Ok(sim),
        Some(e) => Err(e),
    }
}

/// Like [`simulate_with`] but returns whatever was computed when the event
/// limit is hit, together with the error.
pub fn simulate_partial(
    p: &ModelParams,
    schedule: &LightSchedule,
    init: &[State],
    opts: TrackingOptions,
) -> Result<(Simulation, Option<Error>)> {
    let n = schedule.roads();
    if init.len() != n + 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} initial states (n incoming + 1 outgoing), got {}",
            n + 1,
            init.len()
        )));
    }
    for (k, s) in init.iter().enumerate() {
        p.check_state(*s)?;
        if k < n && s.is_vacuum() {
            return Err(Error::InvalidParameter(format!(
                "incoming road {} starts empty; vacuum has no maximal speed",
                k + 1
            )));
        }
    }
    if opts.fan_pieces == 0 {
        return Err(Error::InvalidParameter(
            "fan_pieces must be at least 1".into(),
        ));
    }
    let mut tracker = Tracker::new(p, schedule, init, opts)?;
    let err = tracker.run().err();
    Ok((tracker.finish(), err))
}

struct Line {
    base: State,
    fronts: Vec<u32>,
}

struct Tracker<'a> {
    p: &'a ModelParams,
    schedule: &'a LightSchedule,
    opts: TrackingOptions,
    init: Vec<State>,
    n: usize,
    arena: Vec<Front>,
    /// Walled lines of the red roads; the green road's slot is empty.
    incoming: Vec<Line>,
    merged: Line,
    green: usize,
    next_interval: usize,
    now: f64,
    epochs: Vec<Vec<Epoch>>,
    events: Vec<Event>,
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    Collision { line: Option<usize>, k: usize },
    Wall { road: usize },
    Crossing,
    Switch,
}

impl Pending {
    fn priority(&self) -> u8 {
        match self {
            Pending::Collision { .. } | Pending::Wall { .. } => 0,
            Pending::Crossing => 1,
            Pending::Switch => 2,
        }
    }
}

impl<'a> Tracker<'a> {
    fn new(
        p: &'a ModelParams,
        schedule: &'a LightSchedule,
        init: &[State],
        opts: TrackingOptions,
    ) -> Result<Self> {
        let n = schedule.roads();
        let green = schedule.intervals()[0].road;
        let mut t = Tracker {
            p,
            schedule,
            opts,
            init: init.to_vec(),
            n,
            arena: Vec::new(),
            incoming: (0..n)
                .map(|_| Line {
                    base: State::VACUUM,
                    fronts: Vec::new(),
                })
                .collect(),
            merged: Line {
                base: init[green],
                fronts: Vec::new(),
            },
            green,
            next_interval: 1,
            now: 0.0,
            epochs: vec![Vec::new(); n + 1],
            events: Vec::new(),
        };
        let junction = t.emit(init[green], init[n], 0.0, 0.0)?;
        t.merged.fronts = junction;
        for (j, &u) in init[..n].iter().enumerate() {
            if j == green {
                continue;
            }
            let fronts = t.wall_waves(u, 0.0)?;
            t.incoming[j] = Line { base: u, fronts };
        }
        for road in 0..=n {
            t.open_epoch(road);
        }
        Ok(t)
    }

    /// Solve the Riemann problem at `(t, x)` and register the resulting fronts.
    fn emit(&mut self, left: State, right: State, t: f64, x: f64) -> Result<Vec<u32>> {
        let sol = riemann::solve(self.p, left, right)?;
        let mut ids = Vec::with_capacity(sol.waves.len());
        for wave in sol.waves {
            match wave.propagation {
                Propagation::Jump(speed) => {
                    ids.push(self.push_front(wave.kind, wave.left, wave.right, speed, t, x))
                }
                Propagation::Fan { .. } => {
                    // rarefaction fronts: jumps on the fan's w-ray moving with
                    // their Rankine–Hugoniot speeds
                    let m = self.opts.fan_pieces;
                    let w = wave.left.eta / wave.left.rho;
                    let mut prev = wave.left;
                    for k in 1..=m {
                        let next = if k == m {
                            wave.right
                        } else {
                            let rho = wave.left.rho
                                + (wave.right.rho - wave.left.rho) * k as f64 / m as f64;
                            State::on_ray(w, rho)
                        };
                        let speed =
                            (self.p.flux(next).0 - self.p.flux(prev).0) / (next.rho - prev.rho);
                        ids.push(self.push_front(WaveKind::Rarefaction1, prev, next, speed, t, x));
                        prev = next;
                    }
                }
            }
        }
        Ok(ids)
    }

    fn push_front(
        &mut self,
        kind: WaveKind,
        left: State,
        right: State,
        speed: f64,
        t: f64,
        x: f64,
    ) -> u32 {
        let id = self.arena.len() as u32;
        self.arena.push(Front {
            kind,
            left,
            right,
            t_birth: t,
            x_birth: x,
            speed,
            t_death: f64::INFINITY,
        });
        id
    }

    /// Waves leaving a closed junction on a road whose trace is `u`.
    fn wall_waves(&mut self, u: State, t: f64) -> Result<Vec<u32>> {
        if u.is_vacuum() || u.rho >= self.p.r {
            return Ok(Vec::new());
        }
        let jam = State::on_ray(u.w()?, self.p.r);
        self.emit(u, jam, t, 0.0)
    }

    fn line(&self, line: Option<usize>) -> &Line {
        match line {
            None => &self.merged,
            Some(j) => &self.incoming[j],
        }
    }

    fn line_mut(&mut self, line: Option<usize>) -> &mut Line {
        match line {
            None => &mut self.merged,
            Some(j) => &mut self.incoming[j],
        }
    }

    fn roads_of(&self, line: Option<usize>) -> Vec<usize> {
        match line {
            None => vec![self.green, self.n],
            Some(j) => vec![j],
        }
    }

    fn open_epoch(&mut self, road: usize) {
        let line = if road == self.n || road == self.green {
            &self.merged
        } else {
            &self.incoming[road]
        };
        let epoch = Epoch {
            t_start: self.now,
            t_end: f64::INFINITY,
            base: line.base,
            fronts: line.fronts.clone(),
        };
        let list = &mut self.epochs[road];
        if let Some(last) = list.last_mut() {
            if last.t_start >= self.now {
                *last = epoch;
                return;
            }
            last.t_end = self.now;
        }
        list.push(epoch);
    }

    fn record(&mut self, line: Option<usize>) {
        for road in self.roads_of(line) {
            self.open_epoch(road);
        }
    }

    fn next_event(&self) -> Option<(f64, Pending, f64)> {
        let horizon = self.schedule.horizon();
        let mut cands: Vec<(f64, Pending, f64)> = Vec::new();
        let lines = std::iter::once(None).chain((0..self.n).filter(|&j| j != self.green).map(Some));
        for l in lines {
            let line = self.line(l);
            for (k, pair) in line.fronts.windows(2).enumerate() {
                let a = &self.arena[pair[0] as usize];
                let b = &self.arena[pair[1] as usize];
                let (sa, sb) = (a.speed, b.speed);
                if sa <= sb {
                    continue;
                }
                let tc = (b.x_birth - a.x_birth + sa * a.t_birth - sb * b.t_birth) / (sa - sb);
                let tc = tc.max(self.now);
                if tc <= horizon {
                    cands.push((tc, Pending::Collision { line: l, k }, a.position(tc)));
                }
            }
            match l {
                Some(j) => {
                    if let Some(&last) = line.fronts.last() {
                        let f = &self.arena[last as usize];
                        let s = f.speed;
                        if s > 0.0 {
                            let tc = (f.t_birth - f.x_birth / s).max(self.now);
                            if tc <= horizon {
                                cands.push((tc, Pending::Wall { road: j }, 0.0));
                            }
                        }
                    }
                }
                None => {
                    for &id in &line.fronts {
                        let f = &self.arena[id as usize];
                        if f.speed != 0.0 {
                            let tc = f.t_birth - f.x_birth / f.speed;
                            if tc > self.now + self.opts.tol_event && tc < horizon {
                                cands.push((tc, Pending::Crossing, 0.0));
                            }
                        }
                    }
                }
            }
        }
        let switch_time = self
            .schedule
            .intervals()
            .get(self.next_interval)
            .map(|iv| iv.start)
            .unwrap_or(horizon);
        cands.push((switch_time, Pending::Switch, 0.0));

        cands.into_iter().min_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.priority().cmp(&b.1.priority()))
                .then(a.2.total_cmp(&b.2))
        })
    }

    fn run(&mut self) -> Result<()> {
        loop {
            if self.events.len() >= self.opts.max_events {
                return Err(Error::ResolutionLimit {
                    events: self.events.len(),
                    t: self.now,
                });
            }
            let Some((t, pending, x)) = self.next_event() else {
                return Err(Error::Internal("no pending event".into()));
            };
            let t = t.max(self.now);
            self.now = t;
            match pending {
                Pending::Collision { line, k } => self.collide(line, k, x)?,
                Pending::Wall { road } => self.hit_wall(road)?,
                Pending::Crossing => {
                    self.events.push(Event {
                        time: t,
                        kind: EventKind::JunctionCrossing,
                        road: self.n,
                        location: 0.0,
                    });
                    self.record(None);
                }
                Pending::Switch => {
                    if self.next_interval >= self.schedule.intervals().len() {
                        self.now = self.schedule.horizon();
                        self.events.push(Event {
                            time: self.now,
                            kind: EventKind::Terminal,
                            road: self.n,
                            location: 0.0,
                        });
                        return Ok(());
                    }
                    self.switch()?;
                }
            }
        }
    }

    fn collide(&mut self, l: Option<usize>, k: usize, x: f64) -> Result<()> {
        let t = self.now;
        let fronts = &self.line(l).fronts;
        let (mut lo, mut hi) = (k, k + 1);
        while lo > 0 && (self.arena[fronts[lo - 1] as usize].position(t) - x).abs() <= TOL_X {
            lo -= 1;
        }
        while hi + 1 < fronts.len()
            && (self.arena[fronts[hi + 1] as usize].position(t) - x).abs() <= TOL_X
        {
            hi += 1;
        }
        let left = self.arena[fronts[lo] as usize].left;
        let right = self.arena[fronts[hi] as usize].right;
        let dead: Vec<u32> = fronts[lo..=hi].to_vec();
        for id in dead {
            self.arena[id as usize].t_death = t;
        }
        let born = self.emit(left, right, t, x)?;
        self.line_mut(l).fronts.splice(lo..=hi, born);
        let road = l.unwrap_or(if x < 0.0 { self.green } else { self.n });
        self.events.push(Event {
            time: t,
            kind: EventKind::Collision,
            road,
            location: x,
        });
        self.record(l);
        Ok(())
    }

    fn hit_wall(&mut self, road: usize) -> Result<()> {
        let t = self.now;
        let fronts = &self.incoming[road].fronts;
        let mut lo = fronts.len() - 1;
        while lo > 0 && self.arena[fronts[lo - 1] as usize].position(t).abs() <= TOL_X {
            lo -= 1;
        }
        let u = self.arena[fronts[lo] as usize].left;
        let dead: Vec<u32> = fronts[lo..].to_vec();
        for id in dead {
            self.arena[id as usize].t_death = t;
        }
        let born = self.wall_waves(u, t)?;
        let line = &mut self.incoming[road];
        line.fronts.truncate(lo);
        line.fronts.extend(born);
        self.events.push(Event {
            time: t,
            kind: EventKind::WallHit,
            road,
            location: 0.0,
        });
        self.record(Some(road));
        Ok(())
    }

    fn switch(&mut self) -> Result<()> {
        let t = self.now;
        let interval = self.schedule.intervals()[self.next_interval];
        self.next_interval += 1;
        let old = self.green;
        let new = interval.road;
        if old == new {
            return Err(Error::Internal(
                "light switch without change of road".into(),
            ));
        }

        // split the merged line at the junction
        let merged = std::mem::replace(
            &mut self.merged,
            Line {
                base: State::VACUUM,
                fronts: Vec::new(),
            },
        );
        let mut upstream = Vec::new();
        let mut at_junction = Vec::new();
        let mut downstream = Vec::new();
        for id in merged.fronts {
            let f = &self.arena[id as usize];
            if f.position(t) < -TOL_X {
                upstream.push(id);
            } else if f.position(t) > TOL_X {
                downstream.push(id);
            } else {
                at_junction.push(id);
            }
        }
        let state_left_of_junction = upstream
            .last()
            .map(|&id| self.arena[id as usize].right)
            .unwrap_or(merged.base);
        let (trace_old, trace_out) = match (at_junction.first(), at_junction.last()) {
            (Some(&a), Some(&b)) => (self.arena[a as usize].left, self.arena[b as usize].right),
            _ => (state_left_of_junction, state_left_of_junction),
        };
        for &id in &at_junction {
            self.arena[id as usize].t_death = t;
        }

        let mut red_fronts = upstream;
        red_fronts.extend(self.wall_waves(trace_old, t)?);
        let green_line = std::mem::replace(
            &mut self.incoming[new],
            Line {
                base: State::VACUUM,
                fronts: Vec::new(),
            },
        );
        self.incoming[old] = Line {
            base: merged.base,
            fronts: red_fronts,
        };

        let trace_new = green_line
            .fronts
            .last()
            .map(|&id| self.arena[id as usize].right)
            .unwrap_or(green_line.base);
        let mut fronts = green_line.fronts;
        fronts.extend(self.emit(trace_new, trace_out, t, 0.0)?);
        fronts.extend(downstream);
        self.merged = Line {
            base: green_line.base,
            fronts,
        };
        self.green = new;

        self.events.push(Event {
            time: t,
            kind: EventKind::LightSwitch,
            road: new,
            location: 0.0,
        });
        for road in [old, new, self.n] {
            self.open_epoch(road);
        }
        Ok(())
    }

    fn finish(mut self) -> Simulation {
        let end = self.now;
        for f in &mut self.arena {
            if f.t_death > end {
                f.t_death = end;
            }
        }
        for list in &mut self.epochs {
            if let Some(last) = list.last_mut() {
                last.t_end = end;
            }
        }
        let arena = Arc::new(self.arena);
        let horizon = self.schedule.horizon();
        let roads = self
            .epochs
            .into_iter()
            .enumerate()
            .map(|(road, epochs)| {
                let orientation = if road == self.n {
                    Orientation::Outgoing
                } else {
                    Orientation::Incoming(road)
                };
                let mut sol = RoadSolution {
                    orientation,
                    params: *self.p,
                    horizon,
                    arena: Arc::clone(&arena),
                    epochs,
                    traces: Vec::new(),
                };
                sol.traces = compute_traces(&sol);
                sol
            })
            .collect();
        Simulation {
            params: *self.p,
            schedule: self.schedule.clone(),
            initial: self.init,
            roads,
            events: self.events,
        }
    }
}

/// Limit of the solution at `x = 0+` (`plus`) or `0-`. A front sitting exactly
/// at the junction is placed by its speed, as it is an instant later.
fn junction_limit(sol: &RoadSolution, e: &Epoch, t: f64, plus: bool) -> State {
    let left_of = |x: f64, s: f64| x < 0.0 || (x == 0.0 && if plus { s <= 0.0 } else { s < 0.0 });
    let k = e.fronts.partition_point(|&id| {
        let f = sol.front(id);
        left_of(f.position(t), f.speed)
    });
    if k == 0 {
        return e.base;
    }
    sol.front(e.fronts[k - 1]).right
}

fn compute_traces(sol: &RoadSolution) -> Vec<TraceSegment> {
    let mut out: Vec<TraceSegment> = Vec::new();
    for e in &sol.epochs {
        if e.t_end <= e.t_start {
            continue;
        }
        let tm = 0.5 * (e.t_start + e.t_end);
        let state = junction_limit(sol, e, tm, sol.orientation == Orientation::Outgoing);
        match out.last_mut() {
            Some(last) if last.state == state && last.t_end == e.t_start => last.t_end = e.t_end,
            _ => out.push(TraceSegment {
                t_start: e.t_start,
                t_end: e.t_end,
                state,
            }),
        }
    }
    out
}
