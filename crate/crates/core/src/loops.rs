//! Double dimer configurations: loop decomposition, connection events and
//! the injection `D({o,x}) x D({e1, x+e1}) -> {o <-> x}`.

use std::collections::HashSet;

use num::{BigInt, BigRational, ToPrimitive};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{Parity, TorusLattice};
use crate::matching::{collect_covers, Matching, EXCLUDED};

/// Two full covers and their loop decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleDimerConfig {
    d1: Matching,
    d2: Matching,
    loops: Vec<Vec<usize>>,
    loop_of: Vec<u32>,
}

impl DoubleDimerConfig {
    pub fn d1(&self) -> &Matching {
        &self.d1
    }

    pub fn d2(&self) -> &Matching {
        &self.d2
    }

    /// Loops as vertex cycles, each starting at its minimal vertex and stepping
    /// first along the `d1` dimer. Ordered by starting vertex.
    pub fn loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    pub fn loop_of(&self, v: usize) -> usize {
        self.loop_of[v] as usize
    }

    /// `|L_o|`.
    pub fn loop_length_through_origin(&self) -> usize {
        self.loops[self.loop_of(0)].len()
    }

    pub fn connected(&self, x: usize, y: usize) -> bool {
        self.loop_of[x] == self.loop_of[y]
    }

    pub fn into_matchings(self) -> (Matching, Matching) {
        (self.d1, self.d2)
    }
}

/// Superimposes two full covers of the same torus.
pub fn decompose_loops(d1: &Matching, d2: &Matching) -> Result<DoubleDimerConfig> {
    let n = d1.partners().len();
    if d2.partners().len() != n {
        return Err(Error::InvalidConfig(
            "covers live on lattices of different size".into(),
        ));
    }
    if d1.partners().contains(&EXCLUDED) || d2.partners().contains(&EXCLUDED) {
        return Err(Error::InvalidConfig(
            "double dimer covers must have empty excluded set".into(),
        ));
    }
    let p1 = d1.partners();
    let p2 = d2.partners();
    let mut loop_of = vec![u32::MAX; n];
    let mut loops = Vec::new();
    for start in 0..n {
        if loop_of[start] != u32::MAX {
            continue;
        }
        let id = loops.len() as u32;
        let mut cycle = Vec::new();
        let mut v = start;
        let mut use_first = true;
        loop {
            loop_of[v] = id;
            cycle.push(v);
            v = if use_first { p1[v] } else { p2[v] } as usize;
            use_first = !use_first;
            if v == start {
                break;
            }
        }
        loops.push(cycle);
    }
    Ok(DoubleDimerConfig {
        d1: d1.clone(),
        d2: d2.clone(),
        loops,
        loop_of,
    })
}

/// Loop labels for two partner maps without allocating loop lists.
/// Returns the number of loops; `labels` is overwritten.
pub(crate) fn label_loops(p1: &[u32], p2: &[u32], labels: &mut [u32]) -> u32 {
    labels.fill(u32::MAX);
    let mut count = 0;
    for start in 0..p1.len() {
        if labels[start] != u32::MAX {
            continue;
        }
        let mut v = start;
        loop {
            labels[v] = count;
            let u = p1[v] as usize;
            labels[u] = count;
            v = p2[u] as usize;
            if v == start {
                break;
            }
        }
        count += 1;
    }
    count
}

/// Translation-averaged observables of one double dimer sample; their
/// expectations under `P_L` are the exact loop density and connection
/// probabilities. Shared by the exact and Monte Carlo paths.
#[derive(Debug, Clone)]
pub struct LoopObservables {
    labels: Vec<u32>,
    sizes: Vec<u64>,
    vertex_count: usize,
}

impl LoopObservables {
    pub fn new(p1: &[u32], p2: &[u32]) -> Self {
        let mut labels = vec![0u32; p1.len()];
        let count = label_loops(p1, p2, &mut labels);
        let mut sizes = vec![0u64; count as usize];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        LoopObservables {
            labels,
            sizes,
            vertex_count: p1.len(),
        }
    }

    pub fn loop_count(&self) -> usize {
        self.sizes.len()
    }

    /// `|L_o| / |V|` for the origin.
    pub fn origin_density(&self) -> f64 {
        self.sizes[self.labels[0] as usize] as f64 / self.vertex_count as f64
    }

    /// `(1/|V|) sum_t |L_t| / |V| = sum_loops |l|^2 / |V|^2`.
    pub fn loop_density(&self) -> f64 {
        let sq: u64 = self.sizes.iter().map(|s| s * s).sum();
        sq as f64 / (self.vertex_count as f64).powi(2)
    }

    /// Fraction of `t` with `t <-> t + offset`, for an offset given as the
    /// image of each vertex.
    pub fn connection_fraction(&self, shifted: &[usize]) -> f64 {
        let hits = (0..self.vertex_count)
            .filter(|&t| self.labels[t] == self.labels[shifted[t]])
            .count();
        hits as f64 / self.vertex_count as f64
    }
}

/// Exact connection statistics of the double dimer model on one torus.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectionProfile {
    #[serde(skip)]
    lattice: TorusLattice,
    /// `|D(emptyset)|`.
    pub cover_count: u64,
    /// `#{(d1, d2) : o <-> x}` for every vertex `x`.
    pub connected_pairs: Vec<u128>,
    /// `sum over pairs of |L_o|`, computed from loop sizes.
    pub origin_loop_length_sum: u128,
}

impl ConnectionProfile {
    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn total_pairs(&self) -> u128 {
        (self.cover_count as u128) * (self.cover_count as u128)
    }

    fn ratio(&self, num: u128, den: u128) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    /// `P_L(o <-> x)`.
    pub fn probability(&self, x: usize) -> BigRational {
        self.ratio(self.connected_pairs[x], self.total_pairs())
    }

    /// `P_L(x <-> y)` by translation invariance.
    pub fn probability_between(&self, x: usize, y: usize) -> BigRational {
        self.probability(self.lattice.sub(y, x))
    }

    /// `(1/|V|) E_L[|L_o|]` from the loop lengths.
    pub fn loop_density(&self) -> BigRational {
        self.ratio(
            self.origin_loop_length_sum,
            self.total_pairs() * self.lattice.vertex_count() as u128,
        )
    }

    /// `(1/|V^o|) sum_{x odd} P_L(o <-> x)`.
    pub fn odd_average(&self) -> BigRational {
        let odd = self.lattice.sublattice(Parity::Odd);
        let sum: u128 = odd.iter().map(|&x| self.connected_pairs[x]).sum();
        self.ratio(sum, self.total_pairs() * odd.len() as u128)
    }

    pub fn probabilities_f64(&self) -> Vec<f64> {
        (0..self.lattice.vertex_count())
            .map(|x| self.probability(x).to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

/// Streams all ordered cover pairs and counts `o <-> x` directly. Quadratic
/// in `|D|`; the reference path for [`connection_profile`].
pub fn connection_profile_streamed(
    lat: &TorusLattice,
    budget: &Budget,
) -> Result<ConnectionProfile> {
    budget.check_enum(lat.vertex_count())?;
    let n = lat.vertex_count();
    let covers = collect_covers(lat, &vec![false; n]);
    let mut labels = vec![0u32; n];
    let mut connected = vec![0u128; n];
    let mut length_sum = 0u128;
    for a in &covers {
        for b in &covers {
            label_loops(a.partners(), b.partners(), &mut labels);
            let lo = labels[0];
            for x in 0..n {
                if labels[x] == lo {
                    connected[x] += 1;
                    length_sum += 1;
                }
            }
        }
    }
    Ok(ConnectionProfile {
        lattice: lat.clone(),
        cover_count: covers.len() as u64,
        connected_pairs: connected,
        origin_loop_length_sum: length_sum,
    })
}

/// Symmetry orbits of the covers under translations and point symmetries.
struct CoverOrbits {
    covers: Vec<Matching>,
    /// `(representative index, orbit size)`.
    reps: Vec<(usize, u64)>,
}

fn symmetry_perms(lat: &TorusLattice) -> Vec<Vec<u32>> {
    let n = lat.vertex_count();
    let mut out = Vec::new();
    for g in lat.point_group() {
        let point: Vec<usize> = (0..n).map(|v| lat.apply_point(&g, v)).collect();
        for t in 0..n {
            out.push((0..n).map(|v| lat.add(point[v], t) as u32).collect());
        }
    }
    out
}

fn cover_orbits(lat: &TorusLattice) -> CoverOrbits {
    let n = lat.vertex_count();
    let covers = collect_covers(lat, &vec![false; n]);
    let perms = symmetry_perms(lat);
    let mut visited = vec![false; covers.len()];
    let mut reps = Vec::new();
    let mut image = vec![0u32; n];
    for i in 0..covers.len() {
        if visited[i] {
            continue;
        }
        let p = covers[i].partners();
        let mut size = 0u64;
        for g in &perms {
            for v in 0..n {
                image[g[v] as usize] = g[p[v] as usize];
            }
            // covers are emitted in lexicographic order
            let j = covers
                .binary_search_by(|m| m.partners().cmp(&image[..]))
                .expect("symmetry image of a cover is a cover");
            if !visited[j] {
                visited[j] = true;
                size += 1;
            }
        }
        reps.push((i, size));
    }
    CoverOrbits { covers, reps }
}

/// Exact connection statistics using the torus symmetry group:
/// `#{o <-> x} = (1 / (|V| |P|)) sum_{A in P} H(A x)` with
/// `H(x) = sum_{orbits} |O| sum_{d2} #{(a,b) same loop, b - a = x}`.
pub fn connection_profile(lat: &TorusLattice, budget: &Budget) -> Result<ConnectionProfile> {
    budget.check_enum(lat.vertex_count())?;
    let n = lat.vertex_count();
    let orbits = cover_orbits(lat);
    let mut diff = vec![0u16; n * n];
    for a in 0..n {
        for b in 0..n {
            diff[a * n + b] = lat.sub(b, a) as u16;
        }
    }
    let mut h = vec![0u128; n];
    let mut sq_sum = 0u128;
    let mut labels = vec![0u32; n];
    let mut members: Vec<Vec<u16>> = Vec::new();
    let mut local = vec![0u64; n];
    for &(rep, weight) in &orbits.reps {
        let p1 = orbits.covers[rep].partners();
        local.fill(0);
        let mut local_sq = 0u64;
        for d2 in &orbits.covers {
            let count = label_loops(p1, d2.partners(), &mut labels) as usize;
            if members.len() < count {
                members.resize(count, Vec::new());
            }
            for m in members.iter_mut().take(count) {
                m.clear();
            }
            for (v, &l) in labels.iter().enumerate() {
                members[l as usize].push(v as u16);
            }
            for m in members.iter().take(count) {
                local_sq += (m.len() * m.len()) as u64;
                for &a in m {
                    let row = &diff[a as usize * n..(a as usize + 1) * n];
                    for &b in m {
                        local[row[b as usize] as usize] += 1;
                    }
                }
            }
        }
        for x in 0..n {
            h[x] += weight as u128 * local[x] as u128;
        }
        sq_sum += weight as u128 * local_sq as u128;
    }
    let group = lat.point_group();
    let denom = (n * group.len()) as u128;
    let mut connected = vec![0u128; n];
    for (x, slot) in connected.iter_mut().enumerate() {
        let s: u128 = group.iter().map(|g| h[lat.apply_point(g, x)]).sum();
        debug_assert_eq!(s % denom, 0);
        *slot = s / denom;
    }
    debug_assert_eq!(sq_sum % n as u128, 0);
    Ok(ConnectionProfile {
        lattice: lat.clone(),
        cover_count: orbits.covers.len() as u64,
        connected_pairs: connected,
        origin_loop_length_sum: sq_sum / n as u128,
    })
}

/// `P_L(x <-> y)` as an exact rational.
pub fn exact_connection_probability(
    lat: &TorusLattice,
    x: usize,
    y: usize,
    budget: &Budget,
) -> Result<BigRational> {
    Ok(connection_profile(lat, budget)?.probability_between(x, y))
}

/// `(1/|V|) E_L[|L_o|]`, after checking it against the odd-vertex average.
pub fn expected_loop_density(lat: &TorusLattice, budget: &Budget) -> Result<BigRational> {
    let profile = connection_profile(lat, budget)?;
    let direct = profile.loop_density();
    let odd = profile.odd_average();
    if direct != odd {
        return Err(Error::InvalidConfig(format!(
            "loop density routes disagree: {direct} vs {odd}"
        )));
    }
    Ok(direct)
}

/// Output of the injection together with the trace of the colour switch.
#[derive(Debug, Clone)]
pub struct InjectionImage {
    pub config: DoubleDimerConfig,
    /// Vertices of the switched path, from `x + e1` to `e1`.
    pub switched_path: Vec<usize>,
}

/// The colour-switching injection for `x` odd and not adjacent to `o`.
///
/// `d1` covers `T_L \ {o, x}` (orange), `d2` covers `T_L \ {e1, x + e1}`
/// (blue). Orange dimers are added on `{o, e1}` and `{x, x + e1}`, then the
/// colours are swapped along the path from `x + e1` to `e1` that avoids `x`.
pub fn kenyon_injection(
    lat: &TorusLattice,
    x: usize,
    d1: &Matching,
    d2: &Matching,
) -> Result<InjectionImage> {
    if lat.is_degenerate() {
        return Err(Error::Degenerate("kenyon_injection"));
    }
    let o = lat.origin();
    let e1 = lat.axis_point(1, 1)?;
    let xe = lat.add(x, e1);
    if lat.parity(x) != Parity::Odd {
        return Err(Error::InvalidArgument("x must be an odd vertex".into()));
    }
    if lat.are_adjacent(o, x) {
        return Err(Error::InvalidArgument(
            "x adjacent to o: use doubled_edge_injection".into(),
        ));
    }
    if d1.excluded() != sorted(&[o, x]) || d2.excluded() != sorted(&[e1, xe]) {
        return Err(Error::InvalidConfig(
            "inputs must cover T \\ {o,x} and T \\ {e1, x+e1}".into(),
        ));
    }
    let n = lat.vertex_count();
    let p1 = d1.partners();
    let p2 = d2.partners();

    // walk the alternating path that starts at x + e1 along its orange dimer
    let mut path = vec![xe];
    let mut on_path = vec![false; n];
    on_path[xe] = true;
    let mut v = xe;
    let mut orange = true;
    loop {
        let next = if orange { p1[v] } else { p2[v] };
        if next == EXCLUDED {
            break;
        }
        v = next as usize;
        if on_path[v] {
            return Err(Error::InvalidConfig(
                "colour-switch path revisits a vertex".into(),
            ));
        }
        on_path[v] = true;
        path.push(v);
        orange = !orange;
    }
    let end = *path.last().unwrap();
    if end != e1 && end != o {
        return Err(Error::InvalidConfig(format!(
            "colour-switch path ended at {end}, expected e1 or o"
        )));
    }

    let mut orange_p: Vec<u32> = p1.to_vec();
    let mut blue_p: Vec<u32> = p2.to_vec();
    // swap colours along the path
    for (i, w) in path.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let was_orange = i % 2 == 0;
        if was_orange {
            orange_p[a] = EXCLUDED;
            orange_p[b] = EXCLUDED;
        } else {
            blue_p[a] = EXCLUDED;
            blue_p[b] = EXCLUDED;
        }
    }
    for (i, w) in path.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if i % 2 == 0 {
            blue_p[a] = b as u32;
            blue_p[b] = a as u32;
        } else {
            orange_p[a] = b as u32;
            orange_p[b] = a as u32;
        }
    }
    orange_p[x] = xe as u32;
    orange_p[xe] = x as u32;
    if end == e1 {
        orange_p[o] = e1 as u32;
        orange_p[e1] = o as u32;
    } else {
        // the path continued through the new {o, e1} dimer, which turns blue
        blue_p[o] = e1 as u32;
        blue_p[e1] = o as u32;
        path.push(e1);
    }
    let d1n = Matching::from_partners(lat, orange_p)?;
    let d2n = Matching::from_partners(lat, blue_p)?;
    let config = decompose_loops(&d1n, &d2n)?;
    Ok(InjectionImage {
        config,
        switched_path: path,
    })
}

/// For `x` adjacent to `o`: add the dimer `{o, x}` to both covers.
pub fn doubled_edge_injection(
    lat: &TorusLattice,
    x: usize,
    d1: &Matching,
    d2: &Matching,
) -> Result<DoubleDimerConfig> {
    let o = lat.origin();
    if !lat.are_adjacent(o, x) {
        return Err(Error::InvalidArgument("x is not adjacent to o".into()));
    }
    let a = d1.with_dimer(lat, o, x)?;
    let b = d2.with_dimer(lat, o, x)?;
    decompose_loops(&a, &b)
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Exhaustive check of the injection for one target `x`.
#[derive(Debug, Clone, Serialize)]
pub struct InjectionReport {
    pub x: Vec<usize>,
    pub adjacent: bool,
    pub inputs: u64,
    pub distinct_outputs: u64,
    pub codomain_ok: bool,
    pub paths_ok: bool,
}

impl InjectionReport {
    pub fn injective(&self) -> bool {
        self.inputs == self.distinct_outputs
    }

    pub fn passed(&self) -> bool {
        self.injective() && self.codomain_ok && self.paths_ok
    }
}

pub fn check_injection(lat: &TorusLattice, x: usize, budget: &Budget) -> Result<InjectionReport> {
    budget.check_enum(lat.vertex_count())?;
    let n = lat.vertex_count();
    let o = lat.origin();
    let e1 = lat.axis_point(1, 1)?;
    let xe = lat.add(x, e1);
    let mask = |set: &[usize]| {
        let mut m = vec![false; n];
        for &a in set {
            m[a] = true;
        }
        m
    };
    let left = collect_covers(lat, &mask(&[o, x]));
    let adjacent = lat.are_adjacent(o, x);
    let right = if adjacent {
        left.clone()
    } else {
        collect_covers(lat, &mask(&[e1, xe]))
    };
    let mut seen: HashSet<(Vec<u32>, Vec<u32>)> = HashSet::new();
    let mut inputs = 0u64;
    let mut codomain_ok = true;
    let mut paths_ok = true;
    for a in &left {
        for b in &right {
            inputs += 1;
            let cfg = if adjacent {
                doubled_edge_injection(lat, x, a, b)?
            } else {
                match kenyon_injection(lat, x, a, b) {
                    Ok(img) => {
                        if img.switched_path.first() != Some(&xe)
                            || img.switched_path.last() != Some(&e1)
                            || img.switched_path.contains(&x)
                        {
                            paths_ok = false;
                        }
                        let c = img.config;
                        if !(c.connected(o, e1) && c.connected(o, xe)) {
                            codomain_ok = false;
                        }
                        c
                    }
                    Err(_) => {
                        paths_ok = false;
                        continue;
                    }
                }
            };
            if !cfg.connected(o, x) {
                codomain_ok = false;
            }
            let (m1, m2) = cfg.into_matchings();
            seen.insert((m1.partners().to_vec(), m2.partners().to_vec()));
        }
    }
    Ok(InjectionReport {
        x: lat.coords(x),
        adjacent,
        inputs,
        distinct_outputs: seen.len() as u64,
        codomain_ok,
        paths_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::enumerate_covers;

    fn b() -> Budget {
        Budget::default()
    }

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn c4_loops() {
        let lat = TorusLattice::new(&[4]).unwrap();
        let covers: Vec<_> = enumerate_covers(&lat, &[], &b()).unwrap().collect();
        let same = decompose_loops(&covers[0], &covers[0]).unwrap();
        assert_eq!(same.loop_count(), 2);
        assert!(same.loops().iter().all(|l| l.len() == 2));
        assert_eq!(same.loop_length_through_origin(), 2);
        let p0 = covers[0].partner(0).unwrap();
        assert!(same.connected(0, p0));
        assert!(same.connected(0, 0));
        assert!((0..4)
            .filter(|&v| v != 0 && v != p0)
            .all(|v| !same.connected(0, v)));

        let mixed = decompose_loops(&covers[0], &covers[1]).unwrap();
        assert_eq!(mixed.loop_count(), 1);
        assert_eq!(mixed.loop_length_through_origin(), 4);
        for x in 0..4 {
            for y in 0..4 {
                assert!(mixed.connected(x, y));
            }
        }
    }

    #[test]
    fn loops_alternate_and_balance_parity() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let covers: Vec<_> = enumerate_covers(&lat, &[], &b()).unwrap().collect();
        for (i, j) in [(0, 0), (3, 100), (17, 271), (200, 5)] {
            let cfg = decompose_loops(&covers[i], &covers[j]).unwrap();
            let total: usize = cfg.loops().iter().map(Vec::len).sum();
            assert_eq!(total, 16);
            assert!((1..=8).contains(&cfg.loop_count()));
            assert_eq!(cfg.loop_length_through_origin() % 2, 0);
            for l in cfg.loops() {
                assert_eq!(l[0], *l.iter().min().unwrap());
                if l.len() > 2 {
                    assert_eq!(covers[i].partner(l[0]), Some(l[1]));
                }
                let even = l.iter().filter(|&&v| lat.parity(v) == Parity::Even).count();
                assert_eq!(2 * even, l.len());
                for (k, &v) in l.iter().enumerate() {
                    let u = l[(k + 1) % l.len()];
                    let m = if k % 2 == 0 { &covers[i] } else { &covers[j] };
                    assert_eq!(m.partner(v), Some(u));
                }
            }
        }
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = TorusLattice::new(&[4]).unwrap();
        let c = TorusLattice::cubic(2, 4).unwrap();
        let ma = enumerate_covers(&a, &[], &b()).unwrap().next().unwrap();
        let mc = enumerate_covers(&c, &[], &b()).unwrap().next().unwrap();
        assert!(decompose_loops(&ma, &mc).is_err());
    }

    #[test]
    fn reduced_profile_matches_streamed_at_4x4() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let fast = connection_profile(&lat, &b()).unwrap();
        let slow = connection_profile_streamed(&lat, &b()).unwrap();
        assert_eq!(fast.connected_pairs, slow.connected_pairs);
        assert_eq!(fast.origin_loop_length_sum, slow.origin_loop_length_sum);
        assert_eq!(fast.probability(0), frac(1, 1));
        // golden values from brute force over all 272^2 ordered pairs
        let e1 = lat.axis_point(1, 1).unwrap();
        assert_eq!(fast.probability(e1), frac(155, 272));
        assert_eq!(
            fast.probability(lat.axis_point(2, 1).unwrap()),
            frac(841, 2312)
        );
    }

    #[test]
    fn reduced_profile_matches_streamed_anisotropic() {
        let lat = TorusLattice::new(&[4, 6]).unwrap();
        let fast = connection_profile(&lat, &b()).unwrap();
        let slow = connection_profile_streamed(&lat, &b()).unwrap();
        assert_eq!(fast.connected_pairs, slow.connected_pairs);
        assert_eq!(fast.origin_loop_length_sum, slow.origin_loop_length_sum);
    }

    #[test]
    fn loop_density_routes_agree() {
        for lat in [
            TorusLattice::new(&[4]).unwrap(),
            TorusLattice::cubic(2, 4).unwrap(),
        ] {
            let p = connection_profile(&lat, &b()).unwrap();
            assert_eq!(p.loop_density(), p.odd_average());
            expected_loop_density(&lat, &b()).unwrap();
        }
    }

    #[test]
    fn injection_exhaustive_4x4() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        for x in lat.sublattice(Parity::Odd) {
            let r = check_injection(&lat, x, &b()).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.inputs > 0);
        }
    }

    #[test]
    fn injection_adjacent_is_doubled_edge() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let x = lat.axis_point(1, 1).unwrap();
        let covers: Vec<_> = enumerate_covers(&lat, &[0, x], &b()).unwrap().collect();
        let cfg = doubled_edge_injection(&lat, x, &covers[0], &covers[1]).unwrap();
        assert_eq!(cfg.loops()[cfg.loop_of(0)], vec![0, x]);
        assert!(kenyon_injection(&lat, x, &covers[0], &covers[1]).is_err());
    }

    #[test]
    fn observables_expectation_matches_exact() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let covers = collect_covers(&lat, &[false; 16]);
        let e1 = lat.axis_point(1, 1).unwrap();
        let shifted: Vec<usize> = (0..16).map(|v| lat.add(v, e1)).collect();
        let (mut dens, mut conn, mut origin) = (0.0, 0.0, 0.0);
        for a in &covers {
            for c in &covers {
                let obs = LoopObservables::new(a.partners(), c.partners());
                dens += obs.loop_density();
                origin += obs.origin_density();
                conn += obs.connection_fraction(&shifted);
            }
        }
        let pairs = (covers.len() * covers.len()) as f64;
        let p = connection_profile(&lat, &b()).unwrap();
        let exact = p.loop_density().to_f64().unwrap();
        assert!((dens / pairs - exact).abs() < 1e-12);
        assert!((origin / pairs - exact).abs() < 1e-12);
        assert!((conn / pairs - p.probability(e1).to_f64().unwrap()).abs() < 1e-12);
    }
}
