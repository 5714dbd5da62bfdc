//! Named regression suites grouping the exact identities, the analytic
//! checks and the Monte Carlo validation runs.

use std::collections::BTreeMap;
use std::time::Instant;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::lattice::{Edge, Parity, TorusLattice};
use crate::loops::{check_injection, connection_profile, connection_profile_streamed};
use crate::matching::{collect_covers, count_covers, edge_probability};
use crate::mdd::{format_rational, two_point_dimer, Ensemble, MddParams, MddSweep};
use crate::report::{rational_value, Assertion, ResultFile, RunManifest};
use crate::sampler::{
    chain_rng, connection_name, sample_double_dimer_stats, worm_two_point, CoverSampler,
    DdmSampling,
};
use crate::spectral::{
    bound_constants_with, infrared_rhs, leibniz_limit_check, r_d_quadrature, r_d_random_walk,
    telescoped_axis_sum, upsilon_closed_form, upsilon_fourier, upsilon_weighted_axis_sum,
};
use crate::stats::{chi_square_uniform, ObservableStats};

pub const SUITES: [&str; 5] = [
    "theorem1-exact",
    "theorem1-mcmc",
    "theorem2-exact",
    "analysis",
    "all",
];

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub budget: Budget,
    pub seed: u64,
    /// Side lengths of the exact `d = 2` double dimer checks.
    pub exact_sides: Vec<usize>,
    pub chi_samples: usize,
    pub chi_seeds: usize,
    pub edge_samples: usize,
    /// Side lengths of the `d = 3` double dimer runs.
    pub mc_sides: Vec<usize>,
    pub mc_samples: usize,
    pub rw_walks: u64,
    pub rw_horizon: u64,
    pub command_line: Vec<String>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            budget: Budget::default(),
            seed: 42,
            exact_sides: vec![4, 6],
            chi_samples: 100_000,
            chi_seeds: 5,
            edge_samples: 20_000,
            mc_sides: vec![8, 12],
            mc_samples: 400,
            rw_walks: 1_000_000,
            rw_horizon: 10_000,
            command_line: Vec::new(),
        }
    }
}

impl SuiteOptions {
    pub fn config_snapshot(&self) -> BTreeMap<String, String> {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        BTreeMap::from([
            ("budget.enum".into(), self.budget.enum_vertices.to_string()),
            (
                "budget.transfer".into(),
                self.budget.transfer_states.to_string(),
            ),
            ("budget.mdd".into(), self.budget.mdd_vertices.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("exact_sides".into(), join(&self.exact_sides)),
            ("chi_samples".into(), self.chi_samples.to_string()),
            ("chi_seeds".into(), self.chi_seeds.to_string()),
            ("edge_samples".into(), self.edge_samples.to_string()),
            ("mc_sides".into(), join(&self.mc_sides)),
            ("mc_samples".into(), self.mc_samples.to_string()),
            ("rw_walks".into(), self.rw_walks.to_string()),
            ("rw_horizon".into(), self.rw_horizon.to_string()),
        ])
    }
}

struct Collector {
    assertions: Vec<Assertion>,
    results: serde_json::Map<String, Value>,
    lattices: Vec<Vec<usize>>,
}

impl Collector {
    fn new() -> Self {
        Collector {
            assertions: Vec::new(),
            results: serde_json::Map::new(),
            lattices: Vec::new(),
        }
    }

    fn lattice(&mut self, lat: &TorusLattice) {
        let s = lat.sides().to_vec();
        if !self.lattices.contains(&s) {
            self.lattices.push(s);
        }
    }

    /// Runs one check; budget errors become SKIPPED, other errors FAIL.
    fn check(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<(bool, String)>) {
        let a = match f(self) {
            Ok((ok, detail)) => Assertion::new(name, ok, detail),
            Err(e @ Error::Budget { .. }) => Assertion::skipped(name, e.to_string()),
            Err(e) => Assertion::new(name, false, format!("error: {e}")),
        };
        self.assertions.push(a);
    }

    fn put(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn square(lat_side: usize) -> Result<TorusLattice> {
    TorusLattice::cubic(2, lat_side)
}

fn theorem1_exact(opts: &SuiteOptions, c: &mut Collector) {
    let b = opts.budget;
    let target = frac(7, 16);
    for &l in &opts.exact_sides {
        let lat = match square(l) {
            Ok(lat) => lat,
            Err(e) => {
                c.assertions.push(Assertion::new(
                    format!("lattice_L{l}"),
                    false,
                    e.to_string(),
                ));
                continue;
            }
        };
        c.lattice(&lat);
        let profile = match connection_profile(&lat, &b) {
            Ok(p) => p,
            Err(e) => {
                let reason = e.to_string();
                for name in [
                    "connection_identity",
                    "loop_density_routes",
                    "site_monotonicity",
                ] {
                    c.assertions
                        .push(Assertion::skipped(format!("{name}_L{l}"), reason.clone()));
                }
                continue;
            }
        };
        let e1 = lat.axis_point(1, 1).expect("axis point");
        let p_e1 = profile.probability(e1);
        c.put(
            &format!("connection_profile_L{l}"),
            json!({
                "cover_count": profile.cover_count,
                "p_o_e1": rational_value(&p_e1),
                "probabilities": (0..lat.vertex_count())
                    .map(|x| rational_value(&profile.probability(x)))
                    .collect::<Vec<_>>(),
                "loop_density": rational_value(&profile.loop_density()),
            }),
        );
        c.check(&format!("connection_identity_L{l}"), |_| {
            Ok((
                p_e1 == target,
                format!(
                    "P(o<->e1) = {} ~ {:.6}, expected 7/16 = 0.4375 (lower bound holds: {})",
                    format_rational(&p_e1),
                    p_e1.to_f64().unwrap_or(f64::NAN),
                    p_e1 >= target
                ),
            ))
        });
        c.check(&format!("loop_density_routes_L{l}"), |_| {
            let a = profile.loop_density();
            let o = profile.odd_average();
            let mut ok = a == o;
            let mut detail = format!(
                "E|L_o|/|V| = {} and odd average = {}",
                format_rational(&a),
                format_rational(&o)
            );
            if lat.vertex_count() <= 16 {
                let s = connection_profile_streamed(&lat, &b)?;
                ok &= s.connected_pairs == profile.connected_pairs;
                detail.push_str("; streamed pair count agrees");
            }
            Ok((ok, detail))
        });
        c.check(&format!("site_monotonicity_L{l}"), |_| {
            let worst = (0..lat.vertex_count())
                .filter(|&x| x != lat.origin())
                .max_by(|&x, &y| profile.connected_pairs[x].cmp(&profile.connected_pairs[y]))
                .unwrap_or(e1);
            Ok((
                profile.connected_pairs[worst] <= profile.connected_pairs[e1],
                format!(
                    "max over x != o at {:?}: {}",
                    lat.coords(worst),
                    format_rational(&profile.probability(worst))
                ),
            ))
        });
    }

    let lat = square(4).expect("4x4");
    c.lattice(&lat);
    c.check("injection_L4", |c| {
        let profile = connection_profile(&lat, &b)?;
        let mut ok = true;
        let mut rows = Vec::new();
        for x in lat.sublattice(Parity::Odd) {
            let dx = count_covers(&lat, &[lat.origin(), x], &b)?;
            let lhs = (&dx * &dx).to_u128().unwrap_or(u128::MAX);
            let rep = check_injection(&lat, x, &b)?;
            let pass = lhs <= profile.connected_pairs[x] && rep.passed();
            ok &= pass;
            rows.push(json!({
                "x": lat.coords(x),
                "d_ox_squared": lhs.to_string(),
                "connected_pairs": profile.connected_pairs[x].to_string(),
                "injective": rep.injective(),
                "codomain_ok": rep.codomain_ok,
            }));
        }
        let n = rows.len();
        c.put("injection_L4", Value::Array(rows));
        Ok((ok, format!("{n} odd targets checked exhaustively")))
    });
}

fn theorem2_exact(opts: &SuiteOptions, c: &mut Collector) {
    let b = opts.budget;
    let lat = square(4).expect("4x4");
    c.lattice(&lat);
    let o = lat.origin();
    let e1 = lat.axis_point(1, 1).expect("axis point");
    let zero = MddParams::new(2, BigRational::zero()).expect("params");
    c.check("two_point_reduction_L4", |c| {
        let sweep = MddSweep::monomer_free(&lat, &b)?;
        let table = sweep.correlation_table(&zero)?;
        let mut ok = true;
        for x in 0..lat.vertex_count() {
            ok &= table.values[x] == two_point_dimer(&lat, x, &b)?;
        }
        let ge1 = table.get(e1).clone();
        let edge = edge_probability(&lat, Edge::new(o, e1), &b)?;
        ok &= ge1 == frac(1, 4) && ge1 == edge && table.get(o).is_zero();
        let cesaro = table.cesaro_sum();
        c.put(
            "two_point_L4_N2_rho0",
            json!({
                "values": table.values.iter().map(rational_value).collect::<Vec<_>>(),
                "cesaro": rational_value(&cesaro),
            }),
        );
        Ok((
            ok,
            format!(
                "G(e1) = {}, edge probability = {}, G(o) = {}, Cesaro sum = {}",
                format_rational(&ge1),
                format_rational(&edge),
                format_rational(table.get(o)),
                format_rational(&cesaro)
            ),
        ))
    });
    c.check("chessboard_identity_L4", |c| {
        let sweep = MddSweep::full(&lat, &b)?;
        let mut ok = true;
        let mut rows = Vec::new();
        for n in [1u32, 2] {
            for rho in [frac(0, 1), frac(1, 4), frac(1, 2)] {
                let p = MddParams::new(n, rho.clone())?;
                let pm = sweep.monomer_probability(&p)?;
                let g = sweep.two_point(e1, &p)?;
                let dn = BigRational::from_integer(BigInt::from(2 * n));
                let identity = g == (BigRational::one() - &pm) / &dn;
                let chess = pm <= rho;
                let bound = g >= (BigRational::one() - &rho) / &dn;
                ok &= identity && chess && bound;
                rows.push(json!({
                    "N": n,
                    "rho": format_rational(&rho),
                    "monomer_probability": rational_value(&pm),
                    "G_e1": rational_value(&g),
                    "identity": identity,
                    "chessboard": chess,
                }));
            }
        }
        c.put("chessboard_L4", Value::Array(rows));
        Ok((ok, "N in {1,2}, rho in {0, 1/4, 1/2}".into()))
    });
    c.check("two_point_bounds_L4", |_| {
        let sweep = MddSweep::full(&lat, &b)?;
        let group = lat.point_group();
        let mut ok = true;
        for (n, rho) in [(1u32, frac(1, 4)), (2, frac(1, 2)), (2, frac(0, 1))] {
            let p = MddParams::new(n, rho)?;
            let t = sweep.correlation_table(&p)?;
            let cap = frac(1, 2 * n as i64);
            for x in 0..lat.vertex_count() {
                ok &= t.values[x] >= BigRational::zero() && t.values[x] <= cap;
                ok &= t.values[x] == t.values[lat.negate(x)];
                ok &= group
                    .iter()
                    .all(|g| t.values[lat.apply_point(g, x)] == t.values[x]);
            }
            let law = sweep.walk_endpoint_law(&p)?;
            ok &= law.iter().cloned().sum::<BigRational>() == BigRational::one();
            let _ = sweep.partition_function(Ensemble::AllWalks, &p)?;
        }
        Ok((
            ok,
            "0 <= G <= 1/(dN), symmetric, end-point law normalised".into(),
        ))
    });
}

fn analysis(opts: &SuiteOptions, c: &mut Collector) {
    c.check("upsilon_identity", |_| {
        let mut worst = 0.0f64;
        let mut count = 0;
        for l in [4usize, 6, 8, 12, 16, 32, 64] {
            for d in [2usize, 3] {
                for x1 in (0..l).step_by(2) {
                    let a = upsilon_fourier(l, d, x1)?;
                    let bb = upsilon_closed_form(l, d, x1)?;
                    worst = worst.max((a - bb).abs());
                    count += 1;
                }
            }
        }
        Ok((
            worst <= 1e-9,
            format!("{count} points, max |diff| = {worst:.3e}"),
        ))
    });
    let seed = opts.seed;
    c.check("telescoping_identity", |_| {
        let mut rng = chain_rng(seed, 7);
        let mut worst = 0.0f64;
        for l in [8usize, 16, 32] {
            for _ in 0..100 {
                let half = l / 2;
                let mut g = vec![0.0; half];
                for i in 0..=half / 2 {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    g[i] = v;
                    g[(half - i) % half] = v;
                }
                let a = upsilon_weighted_axis_sum(l, &g)?;
                let bb = telescoped_axis_sum(l, &g)?;
                worst = worst.max((a - bb).abs());
            }
        }
        Ok((
            worst <= 1e-9,
            format!("300 random symmetric g, max |diff| = {worst:.3e}"),
        ))
    });
    c.check("leibniz_limit", |c| {
        let r = leibniz_limit_check(2000)?;
        c.put("leibniz", serde_json::to_value(&r)?);
        Ok((
            r.passed(),
            format!(
                "S_2000 = {:.6}, target {:.6}, error {:.6}, errors decreasing: {}",
                r.points.last().map_or(f64::NAN, |p| p.s_m),
                r.target,
                r.last_error,
                r.errors_decreasing
            ),
        ))
    });
    let (walks, horizon) = (opts.rw_walks, opts.rw_horizon);
    c.check("r3_bracket", |c| {
        let mut quads = Vec::new();
        for d in 3..=6 {
            quads.push(r_d_quadrature(d, 64)?);
        }
        let r3 = &quads[0];
        let mc = r_d_random_walk(3, walks, horizon, seed)?;
        let sigma = (mc.stderr.powi(2) + r3.error.powi(2)).sqrt();
        let agree = (mc.corrected() - r3.value).abs() <= 3.0 * sigma;
        let monotone = quads.windows(2).all(|w| w[1].value <= w[0].value);
        let bracket = r3.value > 0.51 && r3.value < 0.52;
        c.put(
            "r_d",
            json!({ "quadrature": quads, "random_walk": mc, "random_walk_corrected": mc.corrected() }),
        );
        Ok((
            bracket && agree && monotone,
            format!(
                "r3 = {:.6} +- {:.1e}; MC {:.4} +- {:.4} (tail {:.4}); r3..r6 non-increasing: {monotone}",
                r3.value,
                r3.error,
                mc.corrected(),
                mc.stderr,
                mc.tail_correction
            ),
        ))
    });
    c.check("theorem2_constants", |c| {
        let r3 = r_d_quadrature(3, 64)?;
        let mut ok = true;
        let mut rows = Vec::new();
        for n in 1..=12u32 {
            let k = bound_constants_with(r3.clone(), n, 0.0)?;
            ok &= (k.c > 0.0) == (n <= 6);
            let at_threshold = bound_constants_with(r3.clone(), n, k.rho_threshold.max(0.0))?;
            if k.rho_threshold >= 0.0 {
                ok &= at_threshold.c.abs() < 1e-12;
            }
            rows.push(serde_json::to_value(&k)?);
        }
        let k2 = bound_constants_with(r3, 2, 0.0)?;
        c.put("constants_d3", Value::Array(rows));
        Ok((
            ok,
            format!(
                "C > 0 exactly for N <= 6; N_max = {:.4}; N=2: C = {:.4}, rho threshold = {:.4}",
                k2.n_range_max, k2.c, k2.rho_threshold
            ),
        ))
    });
    c.check("infrared_diagnostic_d3", |c| {
        let lat = TorusLattice::cubic(3, 4)?;
        c.lattice(&lat);
        let est = worm_two_point(&lat, seed, None, 20, 20_000)?;
        let r3 = r_d_quadrature(3, 64)?;
        let rhs = infrared_rhs(&lat, &est.values, r3.value / 12.0)?;
        let lhs = est.cesaro_sum();
        c.put(
            "infrared_d3_L4",
            json!({"cesaro": lhs, "rhs": rhs, "steps": est.steps}),
        );
        Ok((
            lhs.is_finite() && rhs.is_finite(),
            format!("asymptotic diagnostic at L=4: Cesaro sum {lhs:.5} vs rhs {rhs:.5}"),
        ))
    });
}

fn edge_frequency(lat: &TorusLattice, samples: usize, seed: u64) -> Result<ObservableStats> {
    let mut s = CoverSampler::new(lat, seed, 0, None, None)?;
    let e1 = lat.axis_point(1, 1)?;
    let series: Vec<f64> = (0..samples)
        .map(|_| (s.next_partners()[0] == e1 as u32) as u8 as f64)
        .collect();
    Ok(ObservableStats::from_series("edge_o_e1", &series))
}

fn theorem1_mcmc(opts: &SuiteOptions, c: &mut Collector) {
    let b = opts.budget;
    let lat = square(4).expect("4x4");
    c.lattice(&lat);
    let (samples, seeds, seed) = (opts.chi_samples, opts.chi_seeds, opts.seed);
    c.check("worm_chi_square_L4", |c| {
        b.check_enum(lat.vertex_count())?;
        let covers = collect_covers(&lat, &vec![false; lat.vertex_count()]);
        let mut ok = true;
        let mut ps = Vec::new();
        for k in 0..seeds as u64 {
            let mut s = CoverSampler::new(&lat, seed + k, 0, None, None)?;
            let mut counts = vec![0u64; covers.len()];
            for _ in 0..samples {
                let p = s.next_partners();
                let idx = covers
                    .binary_search_by(|m| m.partners().cmp(p))
                    .map_err(|_| Error::InvalidConfig("sampled a non-cover".into()))?;
                counts[idx] += 1;
            }
            let (_, p) = chi_square_uniform(&counts);
            ok &= p > 0.001;
            ps.push(p);
        }
        c.put("chi_square_p_values", json!(ps));
        Ok((ok, format!("{} covers, p-values {:?}", covers.len(), ps)))
    });
    let edge_samples = opts.edge_samples;
    for sides in [vec![8usize, 8], vec![4, 4, 4]] {
        let lat = TorusLattice::new(&sides).expect("lattice");
        c.lattice(&lat);
        let target = 1.0 / (2.0 * lat.dim() as f64);
        c.check(&format!("edge_frequency_{}", label(&sides)), |_| {
            let st = edge_frequency(&lat, edge_samples, seed)?;
            Ok((
                st.within(target, 3.0),
                format!("{:.4} +- {:.4} vs 1/(2d) = {target:.4}", st.mean, st.stderr),
            ))
        });
    }
    c.check("worm_connection_L4", |_| {
        let profile = connection_profile(&lat, &b)?;
        let e1 = lat.axis_point(1, 1)?;
        let exact = profile.probability(e1).to_f64().unwrap_or(f64::NAN);
        let mut cfg = DdmSampling::new(&lat, 20_000, seed);
        cfg.distances = vec![1];
        let st = sample_double_dimer_stats(&lat, &cfg)?;
        let conn = st.get(&connection_name(1)).expect("observable");
        Ok((
            conn.within(exact, 3.0),
            format!(
                "MC P(o<->e1) = {:.4} +- {:.4}; exact {exact:.4}; 7/16 at {:.1} sigma",
                conn.mean,
                conn.stderr,
                conn.z_score(7.0 / 16.0)
            ),
        ))
    });
    let r3 = r_d_quadrature(3, 64).map(|r| r.value).unwrap_or(f64::NAN);
    let lower = ((1.0 - r3 / 2.0) / 6.0).powi(2);
    let upper = 11.0 / 36.0;
    for &l in &opts.mc_sides {
        let lat = match TorusLattice::cubic(3, l) {
            Ok(lat) => lat,
            Err(e) => {
                c.assertions.push(Assertion::new(
                    format!("ddm_band_L{l}"),
                    false,
                    e.to_string(),
                ));
                continue;
            }
        };
        c.lattice(&lat);
        let mc_samples = opts.mc_samples;
        c.check(&format!("ddm_band_L{l}"), |c| {
            let mut cfg = DdmSampling::new(&lat, mc_samples, seed);
            cfg.distances = (1..=(l / 4) as i64).step_by(2).collect();
            let st = sample_double_dimer_stats(&lat, &cfg)?;
            let dens = st.get("loop_density").expect("observable");
            let mut ok = dens.mean >= lower && dens.mean <= upper;
            let mut parts = vec![format!(
                "loop density {:.4} +- {:.4} in [{lower:.4}, {upper:.4}]",
                dens.mean, dens.stderr
            )];
            for &n in &cfg.distances {
                let o = st.get(&connection_name(n)).expect("observable");
                ok &= o.mean > 3.0 * o.stderr;
                parts.push(format!("P(o<->{n}e1) = {:.4} +- {:.4}", o.mean, o.stderr));
            }
            c.put(&format!("ddm_d3_L{l}"), serde_json::to_value(&st)?);
            Ok((ok, parts.join("; ")))
        });
    }
}

fn label(sides: &[usize]) -> String {
    sides
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

/// Runs one named suite (`all` runs each in turn) and returns one result
/// file per sub-run.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<(String, ResultFile)>> {
    let names: Vec<&str> = match name {
        "all" => SUITES[..4].to_vec(),
        n if SUITES.contains(&n) => vec![n],
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    let mut out = Vec::new();
    for n in names {
        let start = Instant::now();
        let mut c = Collector::new();
        match n {
            "theorem1-exact" => theorem1_exact(opts, &mut c),
            "theorem1-mcmc" => theorem1_mcmc(opts, &mut c),
            "theorem2-exact" => theorem2_exact(opts, &mut c),
            _ => analysis(opts, &mut c),
        }
        let mut manifest = RunManifest::new(opts.command_line.clone(), opts.config_snapshot());
        manifest.lattices = c.lattices;
        manifest.seeds = vec![opts.seed];
        manifest.wall_time_s = start.elapsed().as_secs_f64();
        out.push((
            n.to_string(),
            ResultFile::new(manifest, c.assertions, Value::Object(c.results)),
        ));
    }
    Ok(out)
}
