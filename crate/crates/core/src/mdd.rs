//! The monomer double-dimer model.
//!
//! A configuration is a triplet `(M, d1, d2)` weighted by
//! `rho^{|M|} (N/2)^{#loops}`. The loop ensemble has `d1, d2` in `D(M)`.
//! The walk ensemble `Omega(x, y)`, `x != y`, has `d1` in `D(M + {x, y})` and
//! `d2` in `D(M)`; its superposition is a set of loops plus one alternating
//! walk from `x` to `y` that starts with a `d2` dimer. The walk carries no
//! `N` factor and its endpoints carry no `rho` factor.
//!
//! `Omega(o, o)` is taken as `{(M, d1, d2) : M in V \ {o}, d1, d2 in D(M + {o})}`
//! with `X = o`: the walk degenerates to the single uncovered vertex `o`.
//!
//! Exact sweeps record, per ensemble, the number of configurations with
//! `|M| = m` and `l` loops. Every `(N, rho)` is then an exact polynomial
//! evaluation.

use std::collections::HashMap;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{Parity, TorusLattice};
use crate::matching::{collect_covers, count_covers, parity_allows, Matching, EXCLUDED};

/// Model parameters `(N, rho)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MddParams {
    pub n: u32,
    pub rho: BigRational,
}

impl MddParams {
    pub fn new(n: u32, rho: BigRational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "N must be a positive integer".into(),
            ));
        }
        if rho < BigRational::zero() {
            return Err(Error::InvalidArgument("rho must be non-negative".into()));
        }
        Ok(MddParams { n, rho })
    }

    /// `rho` given as `"p/q"` or an integer.
    pub fn parse(n: u32, rho: &str) -> Result<Self> {
        Self::new(n, parse_rational(rho)?)
    }

    pub fn loop_weight(&self) -> BigRational {
        BigRational::new(BigInt::from(self.n), BigInt::from(2))
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal like `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidArgument(format!("bad rational {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let digits = format!("{int}{frac}");
        let p: BigInt = digits.parse().map_err(|_| bad())?;
        let q = num::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(p, q));
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// `"p/q"` rendering used in every output file.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Which part of the configuration space to sum over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    /// `Omega` (identical to the loop ensemble `Omega^l`).
    Loops,
    /// `Omega(o, x)`.
    Walk(usize),
    /// `Omega^w = union over x of Omega(o, x)`.
    AllWalks,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MddKind {
    Loop,
    Walk { x: usize, y: usize },
}

/// One configuration `(M, d1, d2)` with its decomposition.
#[derive(Debug, Clone)]
pub struct MddConfig {
    monomers: Vec<usize>,
    d1: Matching,
    d2: Matching,
    kind: MddKind,
    loops: Vec<Vec<usize>>,
    walk: Option<Vec<usize>>,
}

impl MddConfig {
    /// Loop configuration: `d1, d2` cover exactly `V \ M`.
    pub fn loop_config(lat: &TorusLattice, d1: Matching, d2: Matching) -> Result<Self> {
        check_lattice(lat, &d1, &d2)?;
        let monomers = d1.excluded();
        if d2.excluded() != monomers {
            return Err(Error::InvalidConfig(
                "loop configuration needs d1, d2 on the same monomer set".into(),
            ));
        }
        let (loops, paths) = components(d1.partners(), d2.partners());
        debug_assert!(paths.is_empty());
        Ok(MddConfig {
            monomers,
            d1,
            d2,
            kind: MddKind::Loop,
            loops,
            walk: None,
        })
    }

    /// Walk configuration in `Omega(x, y)`.
    pub fn walk_config(
        lat: &TorusLattice,
        x: usize,
        y: usize,
        d1: Matching,
        d2: Matching,
    ) -> Result<Self> {
        check_lattice(lat, &d1, &d2)?;
        if x == y {
            let monomers: Vec<usize> = d1.excluded().into_iter().filter(|&v| v != x).collect();
            if !d1.is_excluded(x) || d1.excluded() != d2.excluded() {
                return Err(Error::InvalidConfig(
                    "Omega(x, x) needs d1, d2 in D(M + {x})".into(),
                ));
            }
            let (loops, _) = components(d1.partners(), d2.partners());
            return Ok(MddConfig {
                monomers,
                d1,
                d2,
                kind: MddKind::Walk { x, y },
                loops,
                walk: Some(vec![x]),
            });
        }
        let monomers = d2.excluded();
        if monomers.contains(&x) || monomers.contains(&y) {
            return Err(Error::InvalidConfig(
                "walk endpoints cannot be monomers".into(),
            ));
        }
        let mut expected = monomers.clone();
        expected.push(x);
        expected.push(y);
        expected.sort_unstable();
        if d1.excluded() != expected {
            return Err(Error::InvalidConfig(
                "d1 must cover V \\ (M + {x, y})".into(),
            ));
        }
        let (loops, paths) = components(d1.partners(), d2.partners());
        let walk = walk_from(d1.partners(), d2.partners(), x);
        if paths.len() != 1 || walk.last() != Some(&y) {
            return Err(Error::InvalidConfig(
                "superposition is not loops plus one x-y walk".into(),
            ));
        }
        Ok(MddConfig {
            monomers,
            d1,
            d2,
            kind: MddKind::Walk { x, y },
            loops,
            walk: Some(walk),
        })
    }

    pub fn monomers(&self) -> &[usize] {
        &self.monomers
    }

    pub fn kind(&self) -> &MddKind {
        &self.kind
    }

    pub fn loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    pub fn walk(&self) -> Option<&[usize]> {
        self.walk.as_deref()
    }

    pub fn d1(&self) -> &Matching {
        &self.d1
    }

    pub fn d2(&self) -> &Matching {
        &self.d2
    }

    /// `rho^{|M|} (N/2)^{#loops}`.
    pub fn weight(&self, params: &MddParams) -> BigRational {
        weight(self.monomers.len(), self.loops.len(), params)
    }
}

fn check_lattice(lat: &TorusLattice, d1: &Matching, d2: &Matching) -> Result<()> {
    let n = lat.vertex_count();
    if d1.partners().len() != n || d2.partners().len() != n {
        return Err(Error::InvalidConfig(
            "matching does not belong to this lattice".into(),
        ));
    }
    Ok(())
}

/// `rho^m (N/2)^l`.
pub fn weight(monomers: usize, loops: usize, params: &MddParams) -> BigRational {
    num::pow(params.rho.clone(), monomers) * num::pow(params.loop_weight(), loops)
}

/// Splits a superposition into cycles and open paths (each path listed from
/// its smaller endpoint).
fn components(p1: &[u32], p2: &[u32]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = p1.len();
    let mut seen = vec![false; n];
    let mut paths = Vec::new();
    // paths first: start from degree-1 vertices
    for v in 0..n {
        if seen[v] {
            continue;
        }
        let deg = (p1[v] != EXCLUDED) as u8 + (p2[v] != EXCLUDED) as u8;
        if deg == 1 {
            let first_is_d2 = p2[v] != EXCLUDED;
            let mut path = vec![v];
            seen[v] = true;
            let mut cur = v;
            let mut use_d2 = first_is_d2;
            loop {
                let next = if use_d2 { p2[cur] } else { p1[cur] };
                if next == EXCLUDED {
                    break;
                }
                cur = next as usize;
                seen[cur] = true;
                path.push(cur);
                use_d2 = !use_d2;
            }
            paths.push(path);
        } else if deg == 0 {
            seen[v] = true;
        }
    }
    let mut loops = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        let mut use_first = true;
        loop {
            seen[v] = true;
            cycle.push(v);
            v = if use_first { p1[v] } else { p2[v] } as usize;
            use_first = !use_first;
            if v == start {
                break;
            }
        }
        loops.push(cycle);
    }
    (loops, paths)
}

/// Alternating walk from `x`, starting with its `d2` dimer.
fn walk_from(p1: &[u32], p2: &[u32], x: usize) -> Vec<usize> {
    let mut walk = vec![x];
    let mut cur = x;
    let mut use_d2 = true;
    loop {
        let next = if use_d2 { p2[cur] } else { p1[cur] };
        if next == EXCLUDED {
            break;
        }
        cur = next as usize;
        walk.push(cur);
        use_d2 = !use_d2;
        if walk.len() > p1.len() {
            break;
        }
    }
    walk
}

/// Counts cycles of a superposition; returns `None` when a vertex has degree 1.
fn count_cycles(p1: &[u32], p2: &[u32], seen: &mut [bool]) -> u32 {
    seen.fill(false);
    let mut count = 0;
    for start in 0..p1.len() {
        if seen[start] || p1[start] == EXCLUDED || p2[start] == EXCLUDED {
            continue;
        }
        let mut v = start;
        let mut closed = true;
        loop {
            seen[v] = true;
            let u = p1[v];
            if u == EXCLUDED {
                closed = false;
                break;
            }
            let u = u as usize;
            seen[u] = true;
            let w = p2[u];
            if w == EXCLUDED {
                closed = false;
                break;
            }
            v = w as usize;
            if v == start {
                break;
            }
        }
        if closed {
            count += 1;
        }
    }
    count
}

/// Configuration counts indexed by `(|M|, #loops)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WeightTable {
    counts: Vec<Vec<u64>>,
}

impl WeightTable {
    fn add(&mut self, m: usize, loops: usize, count: u64) {
        if self.counts.len() <= m {
            self.counts.resize(m + 1, Vec::new());
        }
        let row = &mut self.counts[m];
        if row.len() <= loops {
            row.resize(loops + 1, 0);
        }
        row[loops] += count;
    }

    pub fn count(&self, m: usize, loops: usize) -> u64 {
        self.counts
            .get(m)
            .and_then(|r| r.get(loops))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_configs(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_configs() == 0
    }

    pub fn merge(&mut self, other: &WeightTable) {
        for (m, row) in other.counts.iter().enumerate() {
            for (l, &c) in row.iter().enumerate() {
                if c > 0 {
                    self.add(m, l, c);
                }
            }
        }
    }

    /// `sum_{m,l} count(m,l) rho^m (N/2)^l`.
    pub fn evaluate(&self, params: &MddParams) -> BigRational {
        let mut total = BigRational::zero();
        let lw = params.loop_weight();
        let mut rho_pow = BigRational::one();
        for row in &self.counts {
            let mut inner = BigRational::zero();
            let mut lw_pow = BigRational::one();
            for &c in row {
                if c > 0 {
                    inner += &lw_pow * BigRational::from_integer(BigInt::from(c));
                }
                lw_pow *= &lw;
            }
            total += &rho_pow * inner;
            rho_pow *= &params.rho;
        }
        total
    }
}

/// All exact weight tables of the monomer double-dimer model on one torus.
#[derive(Debug, Clone)]
pub struct MddSweep {
    lattice: TorusLattice,
    /// Only `M = emptyset` was swept (valid for `rho = 0`).
    monomer_free: bool,
    loops: WeightTable,
    origin_monomer: WeightTable,
    walks: Vec<WeightTable>,
}

impl MddSweep {
    /// Full sweep over every monomer set; positive activity needs this.
    pub fn full(lat: &TorusLattice, budget: &Budget) -> Result<Self> {
        budget.check_mdd(lat.vertex_count())?;
        Self::run(lat, false)
    }

    /// `M = emptyset` only, exact for `rho = 0`.
    pub fn monomer_free(lat: &TorusLattice, budget: &Budget) -> Result<Self> {
        budget.check_mdd(lat.vertex_count())?;
        Self::run(lat, true)
    }

    fn run(lat: &TorusLattice, monomer_free: bool) -> Result<Self> {
        let n = lat.vertex_count();
        if n > 63 {
            return Err(Error::Budget {
                what: "monomer-set sweep",
                needed: n as u128,
                budget: 63,
            });
        }
        let o = lat.origin();
        let parity: Vec<bool> = (0..n).map(|v| lat.parity(v) == Parity::Even).collect();
        let balanced = |mask: u64| {
            let mut diff = 0i64;
            for (v, &even) in parity.iter().enumerate() {
                if mask & (1 << v) != 0 {
                    diff += if even { 1 } else { -1 };
                }
            }
            diff == 0
        };
        let mut cache: HashMap<u64, Vec<Matching>> = HashMap::new();
        let mut covers = |mask: u64| -> Vec<Matching> {
            cache
                .entry(mask)
                .or_insert_with(|| {
                    let ex: Vec<bool> = (0..n).map(|v| mask & (1 << v) != 0).collect();
                    if parity_allows(lat, &ex) {
                        collect_covers(lat, &ex)
                    } else {
                        Vec::new()
                    }
                })
                .clone()
        };

        // monomer sets in increasing size; unbalanced sets have no covers
        let monomer_sets: Vec<u64> = if monomer_free {
            vec![0]
        } else {
            let mut sets: Vec<u64> = (0..(1u64 << n)).filter(|&m| balanced(m)).collect();
            sets.sort_by_key(|m| (m.count_ones(), *m));
            sets
        };

        let mut seen = vec![false; n];
        let mut loops = WeightTable::default();
        let mut origin_monomer = WeightTable::default();
        for &m in &monomer_sets {
            let d = covers(m);
            let size = m.count_ones() as usize;
            let mut local = WeightTable::default();
            for a in &d {
                for b in &d {
                    let l = count_cycles(a.partners(), b.partners(), &mut seen);
                    local.add(size, l as usize, 1);
                }
            }
            if m & 1 << o != 0 {
                origin_monomer.merge(&local);
            }
            loops.merge(&local);
        }

        let mut walks = vec![WeightTable::default(); n];
        for (x, table) in walks.iter_mut().enumerate() {
            let pair = (1u64 << o) | (1u64 << x);
            let sets: Vec<u64> = if monomer_free {
                vec![0]
            } else {
                // M avoids the endpoints; the covers decide feasibility
                let mut s: Vec<u64> = (0..(1u64 << n))
                    .filter(|&m| m & pair == 0)
                    .filter(|&m| {
                        if x == o {
                            balanced(m | pair)
                        } else {
                            balanced(m) && balanced(m | pair)
                        }
                    })
                    .collect();
                s.sort_by_key(|m| (m.count_ones(), *m));
                s
            };
            for m in sets {
                let size = m.count_ones() as usize;
                if x == o {
                    let d = covers(m | pair);
                    for a in &d {
                        for b in &d {
                            let l = count_cycles(a.partners(), b.partners(), &mut seen);
                            table.add(size, l as usize, 1);
                        }
                    }
                } else {
                    let first = covers(m | pair);
                    if first.is_empty() {
                        continue;
                    }
                    let second = covers(m);
                    for a in &first {
                        for b in &second {
                            debug_assert!(walk_is_valid(a.partners(), b.partners(), x, o));
                            let l = count_cycles(a.partners(), b.partners(), &mut seen);
                            table.add(size, l as usize, 1);
                        }
                    }
                }
            }
        }
        Ok(MddSweep {
            lattice: lat.clone(),
            monomer_free,
            loops,
            origin_monomer,
            walks,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    fn check(&self, params: &MddParams) -> Result<()> {
        if self.monomer_free && !params.rho.is_zero() {
            return Err(Error::InvalidArgument(
                "sweep restricted to M = emptyset cannot evaluate rho > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn table(&self, ensemble: Ensemble) -> WeightTable {
        match ensemble {
            Ensemble::Loops => self.loops.clone(),
            Ensemble::Walk(x) => self.walks[x].clone(),
            Ensemble::AllWalks => {
                let mut t = WeightTable::default();
                for w in &self.walks {
                    t.merge(w);
                }
                t
            }
        }
    }

    pub fn partition_function(
        &self,
        ensemble: Ensemble,
        params: &MddParams,
    ) -> Result<BigRational> {
        self.check(params)?;
        Ok(match ensemble {
            Ensemble::Loops => self.loops.evaluate(params),
            Ensemble::Walk(x) => self.walks[x].evaluate(params),
            Ensemble::AllWalks => self.walks.iter().map(|w| w.evaluate(params)).sum(),
        })
    }

    /// `G(o, x) = Z(o, x) / Z`.
    pub fn two_point(&self, x: usize, params: &MddParams) -> Result<BigRational> {
        let z = self.partition_function(Ensemble::Loops, params)?;
        Ok(self.walks[x].evaluate(params) / z)
    }

    pub fn correlation_table(&self, params: &MddParams) -> Result<CorrelationTable> {
        let z = self.partition_function(Ensemble::Loops, params)?;
        let walk_z: Vec<BigRational> = self.walks.iter().map(|w| w.evaluate(params)).collect();
        let values = walk_z.iter().map(|w| w / &z).collect();
        Ok(CorrelationTable {
            lattice: self.lattice.clone(),
            params: params.clone(),
            values,
            partition: Some(z),
            walk_partition: walk_z,
        })
    }

    /// Law of the walk end-point `X` under `P_{L,N,rho}` on `Omega^w`.
    pub fn walk_endpoint_law(&self, params: &MddParams) -> Result<Vec<BigRational>> {
        self.check(params)?;
        let walk_z: Vec<BigRational> = self.walks.iter().map(|w| w.evaluate(params)).collect();
        let total: BigRational = walk_z.iter().cloned().sum();
        if total.is_zero() {
            return Err(Error::InvalidArgument(
                "walk ensemble has zero weight".into(),
            ));
        }
        Ok(walk_z.into_iter().map(|w| w / &total).collect())
    }

    /// `P~(o is a monomer)` in the loop ensemble.
    pub fn monomer_probability(&self, params: &MddParams) -> Result<BigRational> {
        self.check(params)?;
        Ok(self.origin_monomer.evaluate(params) / self.loops.evaluate(params))
    }
}

fn walk_is_valid(p1: &[u32], p2: &[u32], x: usize, y: usize) -> bool {
    let (_, paths) = components(p1, p2);
    let walk = walk_from(p1, p2, x);
    paths.len() == 1 && walk.len() >= 2 && walk.last() == Some(&y)
}

/// `x -> G(o, x)` with the partition functions behind it.
#[derive(Debug, Clone)]
pub struct CorrelationTable {
    pub lattice: TorusLattice,
    pub params: MddParams,
    pub values: Vec<BigRational>,
    pub partition: Option<BigRational>,
    pub walk_partition: Vec<BigRational>,
}

impl CorrelationTable {
    /// Builds a table from explicit values, e.g. for test functions.
    pub fn from_values(lattice: TorusLattice, params: MddParams, values: Vec<BigRational>) -> Self {
        CorrelationTable {
            lattice,
            params,
            values,
            partition: None,
            walk_partition: Vec::new(),
        }
    }

    pub fn get(&self, x: usize) -> &BigRational {
        &self.values[x]
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// `(1/|V|) sum_x G(o, x)`.
    pub fn cesaro_sum(&self) -> BigRational {
        let n = self.values.len();
        let s: BigRational = self.values.iter().cloned().sum();
        s / BigRational::from_integer(BigInt::from(n))
    }

    /// `sum_{|x|_1 <= r} G(o, x) / sum_x G(o, x)`.
    pub fn tail_ratio(&self, radius: usize) -> BigRational {
        let inner: BigRational = (0..self.values.len())
            .filter(|&x| self.lattice.l1_norm(x) <= radius)
            .map(|x| self.values[x].clone())
            .sum();
        let all: BigRational = self.values.iter().cloned().sum();
        inner / all
    }
}

/// `P~(o in M)` under the loop-ensemble measure.
pub fn monomer_probability_loop_ensemble(
    lat: &TorusLattice,
    params: &MddParams,
    budget: &Budget,
) -> Result<BigRational> {
    if params.rho.is_zero() {
        return Ok(BigRational::zero());
    }
    MddSweep::full(lat, budget)?.monomer_probability(params)
}

/// Mean of the table.
pub fn cesaro_sum(table: &CorrelationTable) -> BigRational {
    table.cesaro_sum()
}

/// `P(|X|_1 <= floor(alpha L))` from an end-point law.
pub fn endpoint_ball_probability(
    lat: &TorusLattice,
    law: &[BigRational],
    radius: usize,
) -> BigRational {
    (0..law.len())
        .filter(|&x| lat.l1_norm(x) <= radius)
        .map(|x| law[x].clone())
        .sum()
}

/// `G(o, x)` at `(N, rho) = (2, 0)` straight from cover counts:
/// `|D({o, x})| / |D(emptyset)|`. Works wherever the transfer matrix does.
pub fn two_point_dimer(lat: &TorusLattice, x: usize, budget: &Budget) -> Result<BigRational> {
    if x == lat.origin() {
        return Ok(BigRational::zero());
    }
    let num = count_covers(lat, &[lat.origin(), x], budget)?;
    let den = count_covers(lat, &[], budget)?;
    Ok(BigRational::new(num.into(), den.into()))
}

/// Exact two-point table choosing the cheapest valid route.
pub fn correlation_table(
    lat: &TorusLattice,
    params: &MddParams,
    budget: &Budget,
) -> Result<CorrelationTable> {
    if params.rho.is_zero() && params.n == 2 {
        let den = count_covers(lat, &[], budget)?;
        let den_r = BigRational::from_integer(den.clone().into());
        let mut walk = Vec::with_capacity(lat.vertex_count());
        for x in 0..lat.vertex_count() {
            if x == lat.origin() {
                walk.push(BigRational::zero());
            } else {
                let c = count_covers(lat, &[lat.origin(), x], budget)?;
                walk.push(BigRational::from_integer(c.into()) * &den_r);
            }
        }
        let z = &den_r * &den_r;
        let values = walk.iter().map(|w| w / &z).collect();
        return Ok(CorrelationTable {
            lattice: lat.clone(),
            params: params.clone(),
            values,
            partition: Some(z),
            walk_partition: walk,
        });
    }
    let sweep = if params.rho.is_zero() {
        MddSweep::monomer_free(lat, budget)?
    } else {
        MddSweep::full(lat, budget)?
    };
    sweep.correlation_table(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::enumerate_covers;

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn params(n: u32, rho: BigRational) -> MddParams {
        MddParams::new(n, rho).unwrap()
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), frac(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), frac(1, 4));
        assert_eq!(parse_rational("3").unwrap(), frac(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&frac(2, 4)), "1/2");
        assert!(MddParams::new(0, frac(0, 1)).is_err());
        assert!(MddParams::new(1, frac(-1, 2)).is_err());
    }

    #[test]
    fn weights_follow_formula() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let b = Budget::default();
        let c = enumerate_covers(&lat, &[], &b).unwrap().next().unwrap();
        let cfg = MddConfig::loop_config(&lat, c.clone(), c).unwrap();
        assert_eq!(cfg.loop_count(), 8);
        assert_eq!(cfg.weight(&params(2, frac(0, 1))), frac(1, 1));
        assert_eq!(cfg.weight(&params(1, frac(0, 1))), frac(1, 256));
        assert_eq!(weight(2, 7, &params(2, frac(1, 2))), frac(1, 4));
    }

    #[test]
    fn walk_config_validation() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let b = Budget::default();
        let x = lat.axis_point(1, 1).unwrap();
        let d1 = enumerate_covers(&lat, &[0, x], &b).unwrap().next().unwrap();
        let d2 = enumerate_covers(&lat, &[], &b).unwrap().next().unwrap();
        let cfg = MddConfig::walk_config(&lat, x, 0, d1.clone(), d2.clone()).unwrap();
        let walk = cfg.walk().unwrap();
        assert_eq!(walk.first(), Some(&x));
        assert_eq!(walk.last(), Some(&0));
        assert_eq!(walk.len() % 2, 0);
        assert_eq!(d2.partner(x), Some(walk[1]));
        assert!(MddConfig::walk_config(&lat, x, 0, d2.clone(), d1).is_err());
        assert!(MddConfig::loop_config(&lat, d2.clone(), d2).is_ok());
    }

    #[test]
    fn rho_zero_reductions_at_4x4() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let b = Budget::default();
        let sweep = MddSweep::monomer_free(&lat, &b).unwrap();
        let p = params(2, frac(0, 1));
        assert_eq!(
            sweep.partition_function(Ensemble::Loops, &p).unwrap(),
            frac(272 * 272, 1)
        );
        let e1 = lat.axis_point(1, 1).unwrap();
        assert_eq!(
            sweep.partition_function(Ensemble::Walk(e1), &p).unwrap(),
            frac(68 * 272, 1)
        );
        assert!(sweep.table(Ensemble::Walk(0)).is_empty());
        assert_eq!(sweep.two_point(e1, &p).unwrap(), frac(1, 4));
        assert!(sweep.two_point(e1, &params(2, frac(1, 2))).is_err());
        let tbl = sweep.correlation_table(&p).unwrap();
        let direct = correlation_table(&lat, &p, &b).unwrap();
        assert_eq!(tbl.values, direct.values);
        for x in 0..16 {
            assert_eq!(tbl.values[x], two_point_dimer(&lat, x, &b).unwrap());
        }
    }

    #[test]
    fn cesaro_of_trivial_tables() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let p = params(2, frac(0, 1));
        let zero = CorrelationTable::from_values(lat.clone(), p.clone(), vec![frac(0, 1); 16]);
        assert_eq!(cesaro_sum(&zero), frac(0, 1));
        let konst = CorrelationTable::from_values(lat, p, vec![frac(3, 7); 16]);
        assert_eq!(cesaro_sum(&konst), frac(3, 7));
    }

    #[test]
    fn full_sweep_identities_c4_and_2x4() {
        // small enough to cross-check the sweep against brute-force configuration lists
        for sides in [vec![4], vec![4, 2]] {
            let lat = TorusLattice::new(&sides).unwrap();
            let sweep = MddSweep::full(&lat, &Budget::default()).unwrap();
            let n = lat.vertex_count();
            let mut brute = WeightTable::default();
            for m in 0u64..(1 << n) {
                let ex: Vec<bool> = (0..n).map(|v| m & (1 << v) != 0).collect();
                let d = collect_covers(&lat, &ex);
                for a in &d {
                    for c in &d {
                        let cfg = MddConfig::loop_config(&lat, a.clone(), c.clone()).unwrap();
                        brute.add(cfg.monomers().len(), cfg.loop_count(), 1);
                    }
                }
            }
            assert_eq!(sweep.table(Ensemble::Loops), brute);
        }
    }

    #[test]
    fn endpoint_law_sums_to_one_and_vanishes_at_origin_for_rho_zero() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let sweep = MddSweep::full(&lat, &Budget::default()).unwrap();
        for (n, rho) in [(2, frac(0, 1)), (1, frac(1, 4)), (2, frac(1, 2))] {
            let p = params(n, rho.clone());
            let law = sweep.walk_endpoint_law(&p).unwrap();
            let total: BigRational = law.iter().cloned().sum();
            assert_eq!(total, frac(1, 1));
            if rho.is_zero() {
                assert!(law[0].is_zero());
            } else {
                assert!(law[0] > frac(0, 1));
            }
            let table = sweep.correlation_table(&p).unwrap();
            for r in 0..=4 {
                assert_eq!(
                    endpoint_ball_probability(&lat, &law, r),
                    table.tail_ratio(r)
                );
            }
        }
    }

    #[test]
    fn two_point_symmetric_and_bounded() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let sweep = MddSweep::full(&lat, &Budget::default()).unwrap();
        let group = lat.point_group();
        for (n, rho) in [(1, frac(1, 4)), (2, frac(1, 2)), (3, frac(1, 3))] {
            let p = params(n, rho);
            let t = sweep.correlation_table(&p).unwrap();
            let cap = frac(1, 2 * n as i64);
            for x in 0..16 {
                assert_eq!(t.values[x], t.values[lat.negate(x)]);
                for g in &group {
                    assert_eq!(t.values[x], t.values[lat.apply_point(g, x)]);
                }
                assert!(t.values[x] >= frac(0, 1));
                assert!(t.values[x] <= cap, "G({x}) = {} above 1/(dN)", t.values[x]);
                if x != 0 && lat.parity(x) == Parity::Even {
                    assert!(t.values[x].is_zero());
                }
            }
        }
    }

    #[test]
    fn nearest_neighbour_identity_and_chessboard() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let sweep = MddSweep::full(&lat, &Budget::default()).unwrap();
        let e1 = lat.axis_point(1, 1).unwrap();
        for n in [1u32, 2] {
            for rho in [frac(0, 1), frac(1, 4), frac(1, 2)] {
                let p = params(n, rho.clone());
                let pm = sweep.monomer_probability(&p).unwrap();
                let g = sweep.two_point(e1, &p).unwrap();
                let dn = BigRational::from_integer((2 * n as i64).into());
                assert_eq!(g, (frac(1, 1) - &pm) / &dn, "N={n} rho={rho}");
                assert!(pm <= rho);
                assert!(g >= (frac(1, 1) - &rho) / dn);
                if !rho.is_zero() {
                    let g0 = sweep.two_point(0, &p).unwrap();
                    assert_eq!(g0, &pm / &rho);
                }
            }
        }
        let half = params(2, frac(1, 2));
        assert_eq!(
            monomer_probability_loop_ensemble(&lat, &half, &Budget::default()).unwrap(),
            sweep.monomer_probability(&half).unwrap()
        );
    }

    #[test]
    fn budget_guard_on_full_sweep() {
        let lat = TorusLattice::cubic(2, 6).unwrap();
        assert!(matches!(
            MddSweep::full(&lat, &Budget::default()),
            Err(Error::Budget { .. })
        ));
    }
}
