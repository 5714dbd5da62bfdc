//! Dimer covers of a torus with an excluded vertex set `A`.
//!
//! Covers are stored as partner maps. The enumerator pins the lowest-index
//! uncovered vertex and branches over its free neighbours in ascending index
//! order, so emission order is lexicographic in the partner choices.

use num::{BigRational, BigUint, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{Edge, Parity, TorusLattice};

/// Partner slot of an excluded vertex.
pub const EXCLUDED: u32 = u32::MAX;
const FREE: u32 = u32::MAX - 1;

/// A dimer cover of `T_L` minus an excluded set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    partner: Vec<u32>,
}

impl Matching {
    /// Validates a partner map: an involution without fixed points on the
    /// non-excluded vertices, pairing lattice neighbours only.
    pub fn from_partners(lat: &TorusLattice, partner: Vec<u32>) -> Result<Self> {
        if partner.len() != lat.vertex_count() {
            return Err(Error::InvalidConfig(format!(
                "partner map has {} entries for {} vertices",
                partner.len(),
                lat.vertex_count()
            )));
        }
        for (v, &p) in partner.iter().enumerate() {
            if p == EXCLUDED {
                continue;
            }
            let p = p as usize;
            if p >= partner.len() || p == v {
                return Err(Error::InvalidConfig(format!(
                    "vertex {v} has bad partner {p}"
                )));
            }
            if partner[p] as usize != v {
                return Err(Error::InvalidConfig(format!(
                    "partner map not an involution at {v}"
                )));
            }
            if !lat.are_adjacent(v, p) {
                return Err(Error::InvalidConfig(format!(
                    "dimer {{{v},{p}}} is not a lattice edge"
                )));
            }
        }
        Ok(Matching { partner })
    }

    pub(crate) fn from_raw(partner: Vec<u32>) -> Self {
        Matching { partner }
    }

    pub fn partner(&self, v: usize) -> Option<usize> {
        match self.partner[v] {
            EXCLUDED => None,
            p => Some(p as usize),
        }
    }

    pub fn partners(&self) -> &[u32] {
        &self.partner
    }

    pub fn is_excluded(&self, v: usize) -> bool {
        self.partner[v] == EXCLUDED
    }

    pub fn excluded(&self) -> Vec<usize> {
        (0..self.partner.len())
            .filter(|&v| self.is_excluded(v))
            .collect()
    }

    pub fn dimer_count(&self) -> usize {
        self.partner.iter().filter(|&&p| p != EXCLUDED).count() / 2
    }

    pub fn contains(&self, edge: Edge) -> bool {
        self.partner[edge.lo] == edge.hi as u32
    }

    pub fn dimers(&self) -> Vec<Edge> {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(v, &p)| p != EXCLUDED && v < p as usize)
            .map(|(v, &p)| Edge::new(v, p as usize))
            .collect()
    }

    /// Adds the dimer `{a, b}` between two excluded neighbours.
    pub fn with_dimer(&self, lat: &TorusLattice, a: usize, b: usize) -> Result<Self> {
        if !self.is_excluded(a) || !self.is_excluded(b) || !lat.are_adjacent(a, b) {
            return Err(Error::InvalidConfig(format!(
                "cannot add dimer {{{a},{b}}} to this cover"
            )));
        }
        let mut partner = self.partner.clone();
        partner[a] = b as u32;
        partner[b] = a as u32;
        Ok(Matching { partner })
    }
}

fn excluded_mask(lat: &TorusLattice, excluded: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; lat.vertex_count()];
    for &a in excluded {
        if a >= lat.vertex_count() {
            return Err(Error::InvalidArgument(format!("vertex {a} out of range")));
        }
        mask[a] = true;
    }
    Ok(mask)
}

/// True when the parity classes of `V \ A` are balanced; otherwise no cover exists.
pub fn parity_allows(lat: &TorusLattice, excluded: &[bool]) -> bool {
    let mut even = 0i64;
    for v in 0..lat.vertex_count() {
        if !excluded[v] {
            even += if lat.parity(v) == Parity::Even { 1 } else { -1 };
        }
    }
    even == 0
}

/// Streams every cover of `T_L \ A` in deterministic order.
pub struct CoverIter<'a> {
    lat: &'a TorusLattice,
    partner: Vec<u32>,
    stack: Vec<Frame>,
    descending: bool,
    done: bool,
}

struct Frame {
    v: usize,
    next: usize,
    current: Option<usize>,
}

impl<'a> CoverIter<'a> {
    fn new(lat: &'a TorusLattice, excluded: &[bool]) -> Self {
        let partner = excluded
            .iter()
            .map(|&e| if e { EXCLUDED } else { FREE })
            .collect();
        CoverIter {
            lat,
            partner,
            stack: Vec::new(),
            descending: true,
            done: !parity_allows(lat, excluded),
        }
    }

    fn advance(&mut self) -> bool {
        'outer: loop {
            if self.descending {
                let start = self.stack.last().map_or(0, |f| f.v + 1);
                match (start..self.partner.len()).find(|&v| self.partner[v] == FREE) {
                    None => {
                        self.descending = false;
                        return true;
                    }
                    Some(v) => self.stack.push(Frame {
                        v,
                        next: 0,
                        current: None,
                    }),
                }
            }
            let Some(frame) = self.stack.last_mut() else {
                return false;
            };
            let v = frame.v;
            if let Some(u) = frame.current.take() {
                self.partner[v] = FREE;
                self.partner[u] = FREE;
            }
            let adj = self.lat.adjacent(v);
            while frame.next < adj.len() {
                let u = adj[frame.next];
                frame.next += 1;
                if self.partner[u] == FREE {
                    self.partner[v] = u as u32;
                    self.partner[u] = v as u32;
                    frame.current = Some(u);
                    self.descending = true;
                    continue 'outer;
                }
            }
            self.stack.pop();
            self.descending = false;
        }
    }
}

impl Iterator for CoverIter<'_> {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done {
            return None;
        }
        if self.advance() {
            Some(Matching::from_raw(self.partner.clone()))
        } else {
            self.done = true;
            None
        }
    }
}

/// Streams all covers of `T_L \ A`. Empty when `|V \ A|` is odd or the parity
/// classes are unbalanced.
pub fn enumerate_covers<'a>(
    lat: &'a TorusLattice,
    excluded: &[usize],
    budget: &Budget,
) -> Result<CoverIter<'a>> {
    budget.check_enum(lat.vertex_count())?;
    let mask = excluded_mask(lat, excluded)?;
    Ok(CoverIter::new(lat, &mask))
}

/// Callback enumeration over partner slices; no per-cover allocation.
pub fn for_each_cover(lat: &TorusLattice, excluded: &[bool], mut f: impl FnMut(&[u32])) {
    if !parity_allows(lat, excluded) {
        return;
    }
    let mut partner: Vec<u32> = excluded
        .iter()
        .map(|&e| if e { EXCLUDED } else { FREE })
        .collect();
    fn rec(lat: &TorusLattice, partner: &mut [u32], start: usize, f: &mut impl FnMut(&[u32])) {
        let Some(v) = (start..partner.len()).find(|&v| partner[v] == FREE) else {
            f(partner);
            return;
        };
        for &u in lat.adjacent(v) {
            if partner[u] == FREE {
                partner[v] = u as u32;
                partner[u] = v as u32;
                rec(lat, partner, v + 1, f);
                partner[v] = FREE;
                partner[u] = FREE;
            }
        }
    }
    rec(lat, &mut partner, 0, &mut f);
}

/// Collects all covers of `T_L \ A` into memory.
pub fn collect_covers(lat: &TorusLattice, excluded: &[bool]) -> Vec<Matching> {
    let mut out = Vec::new();
    for_each_cover(lat, excluded, |p| out.push(Matching::from_raw(p.to_vec())));
    out
}

/// Exact `|D(A)|`, by transfer-matrix contraction along axis 1.
pub fn count_covers(lat: &TorusLattice, excluded: &[usize], budget: &Budget) -> Result<BigUint> {
    let mask = excluded_mask(lat, excluded)?;
    if !parity_allows(lat, &mask) {
        return Ok(BigUint::zero());
    }
    crate::transfer::count(lat, &mask, budget)
}

/// `|D(A)|` by exhaustive enumeration; the cross-check for [`count_covers`].
pub fn count_by_enumeration(
    lat: &TorusLattice,
    excluded: &[usize],
    budget: &Budget,
) -> Result<BigUint> {
    budget.check_enum(lat.vertex_count())?;
    let mask = excluded_mask(lat, excluded)?;
    let mut n = 0u64;
    for_each_cover(lat, &mask, |_| n += 1);
    Ok(BigUint::from(n))
}

/// Probability that a uniform cover of `T_L` contains the given edge.
pub fn edge_probability(lat: &TorusLattice, edge: Edge, budget: &Budget) -> Result<BigRational> {
    if lat.is_degenerate() {
        return Err(Error::Degenerate("edge_probability"));
    }
    if !lat.are_adjacent(edge.lo, edge.hi) {
        return Err(Error::InvalidArgument(format!(
            "{{{}, {}}} is not a lattice edge",
            edge.lo, edge.hi
        )));
    }
    let with = count_covers(lat, &[edge.lo, edge.hi], budget)?;
    let all = count_covers(lat, &[], budget)?;
    Ok(BigRational::new(with.into(), all.into()))
}

/// Number of full covers containing `edge`, by enumeration.
pub fn count_containing(lat: &TorusLattice, edge: Edge, budget: &Budget) -> Result<u64> {
    budget.check_enum(lat.vertex_count())?;
    let mut n = 0u64;
    for_each_cover(lat, &vec![false; lat.vertex_count()], |p| {
        if p[edge.lo] == edge.hi as u32 {
            n += 1;
        }
    });
    Ok(n)
}

/// Ratio `|D(A)| / |D(B)|` as an exact rational.
pub fn cover_ratio(
    lat: &TorusLattice,
    numerator: &[usize],
    denominator: &[usize],
    budget: &Budget,
) -> Result<BigRational> {
    let den = count_covers(lat, denominator, budget)?;
    if den.is_zero() {
        return Err(Error::InvalidArgument(
            "denominator set has no covers".into(),
        ));
    }
    let num = count_covers(lat, numerator, budget)?;
    Ok(BigRational::new(num.into(), den.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::default()
    }

    /// Independent oracle: choose edges in index order, keep subsets that form
    /// a perfect matching of `V \ A`.
    fn naive_edge_subset_count(lat: &TorusLattice, excluded: &[usize]) -> u64 {
        let edges = lat.edges();
        let n = lat.vertex_count();
        let mut covered = vec![false; n];
        for &a in excluded {
            covered[a] = true;
        }
        let target = (n - excluded.len()) / 2;
        fn rec(edges: &[Edge], i: usize, covered: &mut [bool], taken: usize, target: usize) -> u64 {
            if taken == target {
                return covered.iter().all(|&c| c) as u64;
            }
            if i == edges.len() {
                return 0;
            }
            let mut total = rec(edges, i + 1, covered, taken, target);
            let e = edges[i];
            if !covered[e.lo] && !covered[e.hi] {
                covered[e.lo] = true;
                covered[e.hi] = true;
                total += rec(edges, i + 1, covered, taken + 1, target);
                covered[e.lo] = false;
                covered[e.hi] = false;
            }
            total
        }
        if (n - excluded.len()) % 2 != 0 {
            return 0;
        }
        rec(&edges, 0, &mut covered, 0, target)
    }

    #[test]
    fn c4_has_two_covers() {
        let lat = TorusLattice::new(&[4]).unwrap();
        let covers: Vec<_> = enumerate_covers(&lat, &[], &budget()).unwrap().collect();
        assert_eq!(covers.len(), 2);
        assert_eq!(
            count_covers(&lat, &[], &budget()).unwrap(),
            BigUint::from(2u32)
        );
    }

    #[test]
    fn square_4x4_golden_counts() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        assert_eq!(naive_edge_subset_count(&lat, &[]), 272);
        assert_eq!(
            count_covers(&lat, &[], &budget()).unwrap(),
            BigUint::from(272u32)
        );
        let e1 = lat.axis_point(1, 1).unwrap();
        assert_eq!(naive_edge_subset_count(&lat, &[0, e1]), 68);
        assert_eq!(
            count_covers(&lat, &[0, e1], &budget()).unwrap(),
            BigUint::from(68u32)
        );
        assert_eq!(
            count_containing(&lat, Edge::new(0, e1), &budget()).unwrap(),
            68
        );
        let two = lat.axis_point(2, 1).unwrap();
        assert_eq!(naive_edge_subset_count(&lat, &[0, two]), 0);
        assert!(count_covers(&lat, &[0, two], &budget()).unwrap().is_zero());
        assert_eq!(enumerate_covers(&lat, &[0], &budget()).unwrap().count(), 0);
    }

    #[test]
    fn enumeration_is_valid_distinct_and_ordered() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let covers: Vec<_> = enumerate_covers(&lat, &[], &budget()).unwrap().collect();
        for m in &covers {
            Matching::from_partners(&lat, m.partners().to_vec()).unwrap();
            assert_eq!(m.dimer_count(), 8);
        }
        for w in covers.windows(2) {
            assert!(w[0] < w[1], "emission order must be strictly lexicographic");
        }
        let callback = collect_covers(&lat, &vec![false; 16]);
        assert_eq!(callback, covers);
    }

    #[test]
    fn transfer_matches_enumeration() {
        let shapes: Vec<Vec<usize>> = vec![
            vec![4],
            vec![6],
            vec![8],
            vec![4, 4],
            vec![6, 6],
            vec![4, 6],
            vec![6, 4],
            vec![2, 4],
            vec![4, 2],
            vec![2, 2],
            vec![2, 2, 4],
        ];
        for sides in shapes {
            let lat = TorusLattice::new(&sides).unwrap();
            let tm = count_covers(&lat, &[], &budget()).unwrap();
            let en = count_by_enumeration(&lat, &[], &budget()).unwrap();
            assert_eq!(tm, en, "sides {sides:?}");
        }
    }

    #[test]
    fn transfer_matches_enumeration_with_exclusions() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        for a in 0..16 {
            for b in (a + 1)..16 {
                let tm = count_covers(&lat, &[a, b], &budget()).unwrap();
                let en = count_by_enumeration(&lat, &[a, b], &budget()).unwrap();
                assert_eq!(tm, en, "excluded {{{a},{b}}}");
            }
        }
        let lat = TorusLattice::new(&[4, 6]).unwrap();
        let set = [0, 3, 7, 10];
        assert_eq!(
            count_covers(&lat, &set, &budget()).unwrap(),
            count_by_enumeration(&lat, &set, &budget()).unwrap()
        );
    }

    #[test]
    fn add_one_dimer_bijection() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        for e in lat.edges() {
            let c = count_covers(&lat, &[e.lo, e.hi], &budget()).unwrap();
            assert_eq!(
                c,
                BigUint::from(count_containing(&lat, e, &budget()).unwrap())
            );
        }
    }

    #[test]
    fn edge_probability_is_one_over_2d() {
        let lat = TorusLattice::cubic(2, 4).unwrap();
        let quarter = BigRational::new(1.into(), 4.into());
        for axis in 1..=2 {
            let e = Edge::new(0, lat.axis_point(1, axis).unwrap());
            assert_eq!(edge_probability(&lat, e, &budget()).unwrap(), quarter);
        }
        let lat6 = TorusLattice::cubic(2, 6).unwrap();
        for e in lat6.edges().into_iter().step_by(7) {
            assert_eq!(edge_probability(&lat6, e, &budget()).unwrap(), quarter);
        }
        let degenerate = TorusLattice::new(&[2, 4]).unwrap();
        assert!(matches!(
            edge_probability(&degenerate, Edge::new(0, 1), &budget()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn budget_guard_refuses_large_enumeration() {
        let lat = TorusLattice::cubic(2, 8).unwrap();
        assert!(matches!(
            enumerate_covers(&lat, &[], &budget()),
            Err(Error::Budget { .. })
        ));
        // transfer matrix still counts it
        assert!(count_covers(&lat, &[], &budget()).unwrap() > BigUint::from(1u32 << 20));
    }

    #[test]
    fn invalid_partner_maps_rejected() {
        let lat = TorusLattice::new(&[4]).unwrap();
        assert!(Matching::from_partners(&lat, vec![1, 0, 3, 2]).is_ok());
        assert!(Matching::from_partners(&lat, vec![2, 3, 0, 1]).is_err());
        assert!(Matching::from_partners(&lat, vec![1, 0, 3]).is_err());
        assert!(Matching::from_partners(&lat, vec![1, 2, 3, 0]).is_err());
        let m = Matching::from_partners(&lat, vec![EXCLUDED, EXCLUDED, 3, 2]).unwrap();
        assert_eq!(m.excluded(), vec![0, 1]);
        let full = m.with_dimer(&lat, 0, 1).unwrap();
        assert_eq!(full.dimer_count(), 2);
    }
}
