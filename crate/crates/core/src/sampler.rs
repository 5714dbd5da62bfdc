//! Worm Monte Carlo for uniform dimer covers.
//!
//! From a full cover the chain picks a uniform vertex `t`, removes the dimer
//! `(t, p(t))` and sets the head to `h = p(t)`. From a defect state it picks a
//! uniform neighbour `u` of the head: if `u` is the tail the dimer `(h, t)` is
//! placed and the worm closes; otherwise `(h, u)` is placed, `(u, p(u))` is
//! removed and the head moves to `p(u)`. Every proposal has a reverse of equal
//! probability, so all moves are accepted. With `D` the (constant) degree,
//! the stationary weight is `|V| / D` on each full cover and `1` on each
//! defect state, hence uniform on covers at closure times.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::TorusLattice;
use crate::loops::LoopObservables;
use crate::matching::{Matching, EXCLUDED};
use crate::stats::{mean, variance, ObservableStats};

/// Seeded stream for chain `stream` of a run seeded with `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Cover pairing `x` with `x + e_1` for even `x_1`.
pub fn reference_cover(lat: &TorusLattice) -> Matching {
    let n = lat.vertex_count();
    let mut partner = vec![EXCLUDED; n];
    for v in 0..n {
        if lat.coord(v, 0) % 2 == 0 {
            let u = lat.shift(v, 0, 1);
            partner[v] = u as u32;
            partner[u] = v as u32;
        }
    }
    Matching::from_raw(partner)
}

/// Chain state without the random stream; used for exact transition tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WormConfig {
    pub partner: Vec<u32>,
    /// `(tail, head)` when a defect pair is open.
    pub defect: Option<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub struct WormState {
    adj: Vec<u32>,
    degree: usize,
    partner: Vec<u32>,
    head: Option<u32>,
    tail: Option<u32>,
    rng: ChaCha8Rng,
    pub step_count: u64,
    pub accepted_count: u64,
    pub closures: u64,
}

impl WormState {
    pub fn new(lat: &TorusLattice, start: &Matching, rng: ChaCha8Rng) -> Result<Self> {
        let n = lat.vertex_count();
        if start.partners().len() != n || start.dimer_count() * 2 != n {
            return Err(Error::InvalidConfig(
                "worm needs a full cover to start".into(),
            ));
        }
        let degree = lat.adjacent(0).len();
        let mut adj = Vec::with_capacity(n * degree);
        for v in 0..n {
            let a = lat.adjacent(v);
            if a.len() != degree {
                return Err(Error::InvalidLattice("torus graph is not regular".into()));
            }
            adj.extend(a.iter().map(|&u| u as u32));
        }
        Ok(WormState {
            adj,
            degree,
            partner: start.partners().to_vec(),
            head: None,
            tail: None,
            rng,
            step_count: 0,
            accepted_count: 0,
            closures: 0,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.partner.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_closed(&self) -> bool {
        self.head.is_none()
    }

    pub fn head(&self) -> Option<usize> {
        self.head.map(|h| h as usize)
    }

    pub fn tail(&self) -> Option<usize> {
        self.tail.map(|t| t as usize)
    }

    pub fn partners(&self) -> &[u32] {
        &self.partner
    }

    /// The current cover; `None` while a defect pair is open.
    pub fn matching(&self) -> Option<Matching> {
        self.is_closed()
            .then(|| Matching::from_raw(self.partner.clone()))
    }

    pub fn config(&self) -> WormConfig {
        WormConfig {
            partner: self.partner.clone(),
            defect: self.tail.zip(self.head),
        }
    }

    /// Restores a configuration, keeping the stream and counters.
    pub fn set_config(&mut self, cfg: &WormConfig) {
        self.partner.clone_from(&cfg.partner);
        self.tail = cfg.defect.map(|d| d.0);
        self.head = cfg.defect.map(|d| d.1);
    }

    /// Number of equally likely proposals from the current state.
    pub fn choice_count(&self) -> usize {
        if self.is_closed() {
            self.partner.len()
        } else {
            self.degree
        }
    }

    /// Applies proposal `choice` (a tail vertex when closed, a neighbour slot
    /// of the head otherwise).
    pub fn apply(&mut self, choice: usize) {
        self.step_count += 1;
        self.accepted_count += 1;
        match (self.tail, self.head) {
            (None, _) => {
                let t = choice as u32;
                let h = self.partner[choice];
                self.partner[t as usize] = EXCLUDED;
                self.partner[h as usize] = EXCLUDED;
                self.tail = Some(t);
                self.head = Some(h);
            }
            (Some(t), Some(h)) => {
                let u = self.adj[h as usize * self.degree + choice];
                if u == t {
                    self.partner[h as usize] = t;
                    self.partner[t as usize] = h;
                    self.tail = None;
                    self.head = None;
                    self.closures += 1;
                } else {
                    let u2 = self.partner[u as usize];
                    self.partner[h as usize] = u;
                    self.partner[u as usize] = h;
                    self.partner[u2 as usize] = EXCLUDED;
                    self.head = Some(u2);
                }
            }
            (Some(_), None) => unreachable!("tail without head"),
        }
    }

    pub fn worm_step(&mut self) {
        let k = self.choice_count();
        let choice = self.rng.random_range(0..k);
        self.apply(choice);
    }

    /// Steps until `k` further closures have happened; ends closed.
    pub fn run_closures(&mut self, k: u64) {
        let target = self.closures + k;
        while self.closures < target {
            self.worm_step();
        }
    }

    /// One-step transition law from `cfg` as `(successor, probability)`.
    pub fn transitions(&mut self, cfg: &WormConfig) -> Vec<(WormConfig, f64)> {
        self.set_config(cfg);
        let k = self.choice_count();
        let p = 1.0 / k as f64;
        let mut out: Vec<(WormConfig, f64)> = Vec::with_capacity(k);
        for c in 0..k {
            self.set_config(cfg);
            self.apply(c);
            let next = self.config();
            match out.iter_mut().find(|(s, _)| *s == next) {
                Some(entry) => entry.1 += p,
                None => out.push((next, p)),
            }
        }
        self.set_config(cfg);
        out
    }
}

pub const DEFAULT_BURN_IN_FACTOR: u64 = 100;

/// A worm chain emitting covers every `thin` closures.
#[derive(Debug, Clone)]
pub struct CoverSampler {
    state: WormState,
    burn_in: u64,
    thin: u64,
}

impl CoverSampler {
    /// `burn_in` and `thin` count closures; defaults are `100 |V|` and `|V|`.
    pub fn new(
        lat: &TorusLattice,
        seed: u64,
        stream: u64,
        burn_in: Option<u64>,
        thin: Option<u64>,
    ) -> Result<Self> {
        let n = lat.vertex_count() as u64;
        let burn_in = burn_in.unwrap_or(DEFAULT_BURN_IN_FACTOR * n);
        let thin = thin.unwrap_or(n).max(1);
        let mut state = WormState::new(lat, &reference_cover(lat), chain_rng(seed, stream))?;
        state.run_closures(burn_in);
        Ok(CoverSampler {
            state,
            burn_in,
            thin,
        })
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in
    }

    pub fn thin(&self) -> u64 {
        self.thin
    }

    pub fn state(&self) -> &WormState {
        &self.state
    }

    /// Advances by `thin` closures and returns the partner map.
    pub fn next_partners(&mut self) -> &[u32] {
        self.state.run_closures(self.thin);
        self.state.partners()
    }

    pub fn next_cover(&mut self) -> Matching {
        Matching::from_raw(self.next_partners().to_vec())
    }
}

/// One cover after `burn_in` closures (then `thin` more).
pub fn sample_cover(
    lat: &TorusLattice,
    seed: u64,
    burn_in: Option<u64>,
    thin: Option<u64>,
) -> Result<Matching> {
    Ok(CoverSampler::new(lat, seed, 0, burn_in, thin)?.next_cover())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub n_samples: usize,
    /// Closures between samples.
    pub sweep_length: u64,
    /// Closures discarded per chain.
    pub burn_in: u64,
    pub seed: u64,
    pub worm_steps: u64,
    pub observables: Vec<ObservableStats>,
    #[serde(skip)]
    pub series: Vec<(String, Vec<f64>)>,
}

impl RunStats {
    pub fn get(&self, name: &str) -> Option<&ObservableStats> {
        self.observables.iter().find(|o| o.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct DdmSampling {
    pub samples: usize,
    pub seed: u64,
    pub burn_in: Option<u64>,
    pub thin: Option<u64>,
    /// Axis distances `n` for `P(o <-> n e_1)`.
    pub distances: Vec<i64>,
}

impl DdmSampling {
    /// Odd distances up to `L_1 / 2`.
    pub fn new(lat: &TorusLattice, samples: usize, seed: u64) -> Self {
        let half = (lat.side(0) / 2) as i64;
        DdmSampling {
            samples,
            seed,
            burn_in: None,
            thin: None,
            distances: (1..=half).step_by(2).collect(),
        }
    }
}

pub fn connection_name(n: i64) -> String {
    format!("connection_{n}")
}

/// Double dimer statistics from two independent worm chains. Observables are
/// averaged over translations, and over axes for the connection events.
pub fn sample_double_dimer_stats(lat: &TorusLattice, cfg: &DdmSampling) -> Result<RunStats> {
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut a = CoverSampler::new(lat, cfg.seed, 0, cfg.burn_in, cfg.thin)?;
    let mut b = CoverSampler::new(lat, cfg.seed, 1, cfg.burn_in, cfg.thin)?;
    let n = lat.vertex_count();
    let shifts: Vec<Vec<Vec<usize>>> = cfg
        .distances
        .iter()
        .map(|&k| {
            (0..lat.dim())
                .map(|axis| (0..n).map(|v| lat.shift(v, axis, k)).collect())
                .collect()
        })
        .collect();
    let mut density = Vec::with_capacity(cfg.samples);
    let mut conn: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.samples); cfg.distances.len()];
    for _ in 0..cfg.samples {
        let p1 = a.next_partners().to_vec();
        let p2 = b.next_partners();
        let obs = LoopObservables::new(&p1, p2);
        density.push(obs.loop_density());
        for (series, per_axis) in conn.iter_mut().zip(&shifts) {
            let f: Vec<f64> = per_axis
                .iter()
                .map(|s| obs.connection_fraction(s))
                .collect();
            series.push(mean(&f));
        }
    }
    let mut series = vec![("loop_density".to_string(), density)];
    for (k, s) in cfg.distances.iter().zip(conn) {
        series.push((connection_name(*k), s));
    }
    let observables = series
        .iter()
        .map(|(name, s)| ObservableStats::from_series(name.clone(), s))
        .collect();
    Ok(RunStats {
        n_samples: cfg.samples,
        sweep_length: a.thin(),
        burn_in: a.burn_in(),
        seed: cfg.seed,
        worm_steps: a.state().step_count + b.state().step_count,
        observables,
        series,
    })
}

/// Dimer two-point function `|D({o,x})| / |D(emptyset)|` estimated from worm
/// occupation times.
#[derive(Debug, Clone, Serialize)]
pub struct WormTwoPoint {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub steps: u64,
    pub batches: usize,
}

impl WormTwoPoint {
    pub fn cesaro_sum(&self) -> f64 {
        mean(&self.values)
    }
}

/// Runs `batches` batches of `closures_per_batch` closures after burn-in;
/// `G(x) = W(x) / (D F)` per batch, with `W(x)` the time in defect states
/// with `head - tail = x` and `F` the time in full covers.
pub fn worm_two_point(
    lat: &TorusLattice,
    seed: u64,
    burn_in: Option<u64>,
    batches: usize,
    closures_per_batch: u64,
) -> Result<WormTwoPoint> {
    if batches < 2 || closures_per_batch == 0 {
        return Err(Error::InvalidArgument(
            "need at least two non-empty batches".into(),
        ));
    }
    let n = lat.vertex_count();
    let d = lat.dim();
    let burn_in = burn_in.unwrap_or(DEFAULT_BURN_IN_FACTOR * n as u64);
    let mut state = WormState::new(lat, &reference_cover(lat), chain_rng(seed, 0))?;
    state.run_closures(burn_in);
    let coords: Vec<Vec<usize>> = (0..n).map(|v| lat.coords(v)).collect();
    let sides = lat.sides().to_vec();
    let diff = |h: usize, t: usize| -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for a in 0..d {
            let c = (coords[h][a] + sides[a] - coords[t][a]) % sides[a];
            idx += c * stride;
            stride *= sides[a];
        }
        idx
    };
    let degree = state.degree() as f64;
    let mut per_batch: Vec<Vec<f64>> = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut w = vec![0u64; n];
        let mut full = 0u64;
        let target = state.closures + closures_per_batch;
        while state.closures < target {
            state.worm_step();
            match (state.tail(), state.head()) {
                (Some(t), Some(h)) => w[diff(h, t)] += 1,
                _ => full += 1,
            }
        }
        per_batch.push(
            w.iter()
                .map(|&c| c as f64 / (degree * full as f64))
                .collect(),
        );
    }
    let mut values = vec![0.0; n];
    let mut stderr = vec![0.0; n];
    for x in 0..n {
        let col: Vec<f64> = per_batch.iter().map(|b| b[x]).collect();
        values[x] = mean(&col);
        stderr[x] = (variance(&col) / batches as f64).sqrt();
    }
    Ok(WormTwoPoint {
        values,
        stderr,
        steps: state.step_count,
        batches,
    })
}
