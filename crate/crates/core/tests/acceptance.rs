//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! every line is printed; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::Rng;

use dimerloops::lattice::{Edge, Parity, TorusLattice};
use dimerloops::loops::{
    check_injection, connection_profile, connection_profile_streamed, ConnectionProfile,
};
use dimerloops::matching::{collect_covers, count_covers, edge_probability};
use dimerloops::mdd::{format_rational, MddParams, MddSweep};
use dimerloops::sampler::{
    chain_rng, connection_name, sample_double_dimer_stats, CoverSampler, DdmSampling,
};
use dimerloops::spectral::{
    bound_constants_with, leibniz_partial, r_d_quadrature, r_d_random_walk, telescoped_axis_sum,
    upsilon_closed_form, upsilon_fourier, upsilon_weighted_axis_sum,
};
use dimerloops::stats::{chi_square_uniform, ObservableStats};
use dimerloops::Budget;

const IDENTITY_TOL: f64 = 1e-9;
const SIGMAS: f64 = 3.0;
const CHI_P_MIN: f64 = 0.001;

type Outcome = (bool, String);

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn square(l: usize) -> TorusLattice {
    TorusLattice::cubic(2, l).unwrap()
}

struct Profiles {
    l4: ConnectionProfile,
    l6: ConnectionProfile,
}

impl Profiles {
    fn get(&self, l: usize) -> &ConnectionProfile {
        if l == 4 {
            &self.l4
        } else {
            &self.l6
        }
    }
}

fn c01_connection_identity(p: &Profiles) -> Outcome {
    let target = frac(7, 16);
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [4, 6] {
        let lat = square(l);
        let e1 = lat.axis_point(1, 1).unwrap();
        let v = p.get(l).probability(e1);
        ok &= v == target;
        parts.push(format!(
            "L={l}: P(o<->e1) = {} = {:.6}",
            format_rational(&v),
            v.to_f64().unwrap()
        ));
    }
    (ok, format!("{} (required 7/16 = 0.4375)", parts.join(", ")))
}

fn c02_injection(p: &Profiles) -> Outcome {
    let lat = square(4);
    let b = Budget::default();
    let mut ok = true;
    let mut checked = 0;
    for x in lat.sublattice(Parity::Odd) {
        let dx = count_covers(&lat, &[lat.origin(), x], &b).unwrap();
        let lhs = (&dx * &dx).to_u128().unwrap();
        let rep = check_injection(&lat, x, &b).unwrap();
        ok &= lhs <= p.l4.connected_pairs[x] && rep.injective() && rep.codomain_ok && rep.paths_ok;
        checked += 1;
    }
    (
        ok,
        format!("{checked} odd x at 4x4, inequality and exhaustive collision check"),
    )
}

fn c03_loop_density(p: &Profiles) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [4, 6] {
        let prof = p.get(l);
        let a = prof.loop_density();
        let b = prof.odd_average();
        ok &= a == b;
        parts.push(format!("L={l}: {}", format_rational(&a)));
    }
    let streamed = connection_profile_streamed(&square(4), &Budget::default()).unwrap();
    ok &= streamed.loop_density() == p.l4.loop_density();
    (
        ok,
        format!(
            "{} (loop sizes vs odd-site connection average)",
            parts.join(", ")
        ),
    )
}

fn c04_site_monotonicity(p: &Profiles) -> Outcome {
    let mut ok = true;
    for l in [4, 6] {
        let lat = square(l);
        let prof = p.get(l);
        let e1 = lat.axis_point(1, 1).unwrap();
        ok &= (0..lat.vertex_count())
            .filter(|&x| x != lat.origin())
            .all(|x| prof.connected_pairs[x] <= prof.connected_pairs[e1]);
    }
    (ok, "P(o<->x) <= P(o<->e1) for all x != o at L=4, 6".into())
}

fn c05_two_point_reductions() -> Outcome {
    let lat = square(4);
    let b = Budget::default();
    let sweep = MddSweep::monomer_free(&lat, &b).unwrap();
    let params = MddParams::new(2, BigRational::zero()).unwrap();
    let table = sweep.correlation_table(&params).unwrap();
    let den = count_covers(&lat, &[], &b).unwrap();
    let mut ok = true;
    for x in 0..lat.vertex_count() {
        if x == lat.origin() {
            continue;
        }
        let num = count_covers(&lat, &[lat.origin(), x], &b).unwrap();
        ok &= *table.get(x) == BigRational::new(num.into(), den.clone().into());
    }
    let e1 = lat.axis_point(1, 1).unwrap();
    let edge = edge_probability(&lat, Edge::new(lat.origin(), e1), &b).unwrap();
    ok &= *table.get(e1) == frac(1, 4) && edge == frac(1, 4);
    ok &= table.get(lat.origin()).is_zero();
    (
        ok,
        format!("G(e1) = {}, G(o) = 0", format_rational(table.get(e1))),
    )
}

fn c06_chessboard() -> Outcome {
    let lat = square(4);
    let sweep = MddSweep::full(&lat, &Budget::default()).unwrap();
    let e1 = lat.axis_point(1, 1).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1u32, 2] {
        for rho in [frac(0, 1), frac(1, 4), frac(1, 2)] {
            let p = MddParams::new(n, rho.clone()).unwrap();
            let pm = sweep.monomer_probability(&p).unwrap();
            let g = sweep.two_point(e1, &p).unwrap();
            let dn = BigRational::from_integer(BigInt::from(2 * n));
            ok &= pm <= rho;
            ok &= g == (BigRational::one() - &pm) / &dn;
            ok &= g >= (BigRational::one() - &rho) / &dn;
            if n == 2 && rho == frac(1, 2) {
                parts.push(format!("N=2, rho=1/2: P~ = {}", format_rational(&pm)));
            }
        }
    }
    (ok, format!("6 (N, rho) pairs exact; {}", parts.join("")))
}

fn c07_upsilon() -> Outcome {
    let mut worst = 0.0f64;
    let mut points = 0;
    for l in [4usize, 6, 8, 12, 16, 32, 64] {
        for d in [2usize, 3] {
            for x1 in (0..l).step_by(2) {
                let a = upsilon_fourier(l, d, x1).unwrap();
                let b = upsilon_closed_form(l, d, x1).unwrap();
                worst = worst.max((a - b).abs());
                points += 1;
            }
        }
    }
    (
        worst <= IDENTITY_TOL,
        format!("{points} points, max |diff| = {worst:.2e}"),
    )
}

fn c08_telescoping() -> Outcome {
    let mut rng = chain_rng(2024, 0);
    let mut worst = 0.0f64;
    for l in [8usize, 16, 32] {
        let half = l / 2;
        for _ in 0..100 {
            let mut g = vec![0.0; half];
            for i in 0..=half / 2 {
                let v: f64 = rng.random_range(-1.0..1.0);
                g[i] = v;
                g[(half - i) % half] = v;
            }
            let a = upsilon_weighted_axis_sum(l, &g).unwrap();
            let b = telescoped_axis_sum(l, &g).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    (
        worst <= IDENTITY_TOL,
        format!("300 symmetric test functions, max |diff| = {worst:.2e}"),
    )
}

fn c09_series_limit() -> Outcome {
    let target = (PI - 4.0) / (4.0 * PI);
    let grid = [50usize, 100, 200, 500, 1000, 2000];
    let errors: Vec<f64> = grid
        .iter()
        .map(|&m| (leibniz_partial(m) - target).abs())
        .collect();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let last = *errors.last().unwrap();
    let s = leibniz_partial(2000);
    (
        decreasing && last < 0.01,
        format!(
            "S_2000 = {s:.6}, |S_m - (pi-4)/(4pi)| = {last:.6} at m=2000, decreasing: {decreasing}; \
             |S_2000 - (4-pi)/(4pi)| = {:.1e}",
            (s + target).abs()
        ),
    )
}

fn c10_r3() -> Outcome {
    let quads: Vec<_> = (3..=6).map(|d| r_d_quadrature(d, 64).unwrap()).collect();
    let r3 = &quads[0];
    let bracket = r3.value > 0.51 && r3.value < 0.52;
    let monotone = quads.windows(2).all(|w| w[1].value <= w[0].value);
    let mc = r_d_random_walk(3, 1_000_000, 10_000, 7).unwrap();
    let sigma = (mc.stderr.powi(2) + r3.error.powi(2)).sqrt();
    let agree = (mc.corrected() - r3.value).abs() <= SIGMAS * sigma;
    (
        bracket && monotone && agree,
        format!(
            "r3 = {:.6}, MC = {:.4} +- {:.4}, r4..r6 = {:.4} {:.4} {:.4}",
            r3.value,
            mc.corrected(),
            mc.stderr,
            quads[1].value,
            quads[2].value,
            quads[3].value
        ),
    )
}

fn c11_constants() -> Outcome {
    let r3 = r_d_quadrature(3, 64).unwrap();
    let mut ok = true;
    for n in 1..=20u32 {
        let k = bound_constants_with(r3.clone(), n, 0.0).unwrap();
        ok &= (k.c > 0.0) == (n <= 6);
        let expected = 1.0 - PI * r3.value * n as f64 / (2.0 * (3.0 * PI - 4.0));
        ok &= (k.rho_threshold - expected).abs() < 1e-12;
        if k.rho_threshold >= 0.0 {
            let edge = bound_constants_with(r3.clone(), n, k.rho_threshold).unwrap();
            ok &= edge.c.abs() < 1e-12;
        }
    }
    let k = bound_constants_with(r3, 2, 0.0).unwrap();
    (
        ok,
        format!(
            "C > 0 iff N <= 6; N=2: C = {:.4}, rho threshold = {:.4}",
            k.c, k.rho_threshold
        ),
    )
}

fn edge_stats(lat: &TorusLattice, samples: usize, seed: u64) -> ObservableStats {
    let mut s = CoverSampler::new(lat, seed, 0, None, None).unwrap();
    let e1 = lat.axis_point(1, 1).unwrap() as u32;
    let series: Vec<f64> = (0..samples)
        .map(|_| (s.next_partners()[0] == e1) as u8 as f64)
        .collect();
    ObservableStats::from_series("edge", &series)
}

fn c12_sampler() -> Outcome {
    let lat = square(4);
    let covers = collect_covers(&lat, &[false; 16]);
    let mut ok = covers.len() == 272;
    let mut ps = Vec::new();
    for seed in 1..=5u64 {
        let mut s = CoverSampler::new(&lat, seed, 0, None, None).unwrap();
        let mut counts = vec![0u64; covers.len()];
        for _ in 0..100_000 {
            let p = s.next_partners();
            counts[covers.binary_search_by(|m| m.partners().cmp(p)).unwrap()] += 1;
        }
        let (_, p) = chi_square_uniform(&counts);
        ok &= p > CHI_P_MIN;
        ps.push(format!("{p:.3}"));
    }
    let mut parts = vec![format!("chi-square p = [{}]", ps.join(", "))];
    for sides in [vec![8usize, 8], vec![4, 4, 4]] {
        let lat = TorusLattice::new(&sides).unwrap();
        let st = edge_stats(&lat, 20_000, 11);
        let target = 1.0 / (2.0 * lat.dim() as f64);
        ok &= st.within(target, SIGMAS);
        parts.push(format!("{sides:?}: {:.4} +- {:.4}", st.mean, st.stderr));
    }
    (ok, parts.join("; "))
}

fn c13_theorem1_band() -> Outcome {
    let r3 = r_d_quadrature(3, 64).unwrap().value;
    let lower = ((1.0 - r3 / 2.0) / 6.0).powi(2);
    let upper = 11.0 / 36.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [8usize, 12] {
        let lat = TorusLattice::cubic(3, l).unwrap();
        let mut cfg = DdmSampling::new(&lat, 400, 99);
        cfg.distances = (1..=(l / 4) as i64).step_by(2).collect();
        let st = sample_double_dimer_stats(&lat, &cfg).unwrap();
        let dens = st.get("loop_density").unwrap();
        ok &= dens.mean >= lower && dens.mean <= upper;
        let mut line = format!("L={l}: density {:.4} +- {:.4}", dens.mean, dens.stderr);
        for &n in &cfg.distances {
            let c = st.get(&connection_name(n)).unwrap();
            ok &= c.mean > SIGMAS * c.stderr;
            line.push_str(&format!(", P(o<->{n}e1) {:.4} +- {:.4}", c.mean, c.stderr));
        }
        parts.push(line);
    }
    (
        ok,
        format!("band [{lower:.4}, {upper:.4}]; {}", parts.join("; ")),
    )
}

fn main() {
    let start = Instant::now();
    let b = Budget::default();
    let profiles = Profiles {
        l4: connection_profile(&square(4), &b).unwrap(),
        l6: connection_profile(&square(6), &b).unwrap(),
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "exact connection identity",
            Box::new(|| c01_connection_identity(&profiles)),
        ),
        (
            "injection inequality",
            Box::new(|| c02_injection(&profiles)),
        ),
        (
            "loop density two ways",
            Box::new(|| c03_loop_density(&profiles)),
        ),
        (
            "site monotonicity",
            Box::new(|| c04_site_monotonicity(&profiles)),
        ),
        ("two-point reductions", Box::new(c05_two_point_reductions)),
        ("chessboard consequence", Box::new(c06_chessboard)),
        ("kernel closed form", Box::new(c07_upsilon)),
        ("telescoping identity", Box::new(c08_telescoping)),
        ("cotangent series limit", Box::new(c09_series_limit)),
        ("return number r3", Box::new(c10_r3)),
        ("bound constants", Box::new(c11_constants)),
        ("sampler validity", Box::new(c12_sampler)),
        ("d=3 loop band", Box::new(c13_theorem1_band)),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        failures += !ok as usize;
        println!(
            "{} criterion {:>2} ({name}): {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
