//! Half-zone Fourier kernels, the cotangent series, random-walk return
//! numbers `r_d` and the infrared-bound constants.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::TorusLattice;
use crate::sampler::chain_rng;
use crate::stats::{compensated_sum, CompensatedSum};

fn check_axis_point(l: usize, x1: usize) -> Result<()> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "L = {l} must be even and >= 2"
        )));
    }
    if x1 % 2 != 0 {
        return Err(Error::InvalidArgument(format!("x_1 = {x1} must be even")));
    }
    Ok(())
}

/// `Upsilon_L(x) = Re sum_{k1 in (-pi/2, pi/2]} e^{-i k.(x - e_1)}` for
/// `x = x_1 e_1`, by direct summation. Transverse modes give `L^{d-1}`.
pub fn upsilon_fourier(l: usize, d: usize, x1: usize) -> Result<f64> {
    check_axis_point(l, x1)?;
    let a = x1 as f64 - 1.0;
    let mut sum = CompensatedSum::new();
    // k_1 = 2 pi j / L with -L/4 < j <= L/4
    let lf = l as f64;
    let lo = -((l / 4) as i64) + if l % 4 == 0 { 1 } else { 0 };
    let hi = (l / 4) as i64;
    for j in lo..=hi {
        let k = 2.0 * PI * j as f64 / lf;
        sum.add((k * a).cos());
    }
    Ok(sum.value() * lf.powi(d as i32 - 1))
}

/// Closed forms: `-L^{d-1} cos(pi x_1/2) cot(pi (x_1 - 1)/L)` for `L in 4N`,
/// `csc` in place of `cot` otherwise. `x_1 = 0` is evaluated at its periodic
/// image `x_1 = L` so the argument stays in `(0, pi)`.
pub fn upsilon_closed_form(l: usize, d: usize, x1: usize) -> Result<f64> {
    check_axis_point(l, x1)?;
    let x = if x1 % l == 0 { l } else { x1 % l };
    let lf = l as f64;
    let arg = PI * (x as f64 - 1.0) / lf;
    let sign = if (x / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let kernel = if l % 4 == 0 {
        cot(arg)
    } else {
        1.0 / arg.sin()
    };
    Ok(-lf.powi(d as i32 - 1) * sign * kernel)
}

fn cot(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x < PI);
    x.cos() / x.sin()
}

/// `(1/|V|) sum_{x even on axis 1} Upsilon_L(x) g(x_1)`, summed directly;
/// `g[i]` is the value at `x_1 = 2 i`.
pub fn upsilon_weighted_axis_sum(l: usize, g: &[f64]) -> Result<f64> {
    check_symmetric(l, g)?;
    let terms = (0..l / 2)
        .map(|i| upsilon_fourier(l, 1, 2 * i).map(|u| u * g[i]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(terms) / l as f64)
}

fn check_symmetric(l: usize, g: &[f64]) -> Result<()> {
    if g.len() != l / 2 {
        return Err(Error::InvalidArgument(format!(
            "need {} values on even axis points, got {}",
            l / 2,
            g.len()
        )));
    }
    for i in 1..l / 2 {
        let j = l / 2 - i;
        if (g[i] - g[j]).abs() > 1e-12 * (1.0 + g[i].abs()) {
            return Err(Error::InvalidArgument(format!(
                "g is not symmetric: g({}) != g({})",
                2 * i,
                2 * j
            )));
        }
    }
    Ok(())
}

/// Telescoped form for `L = 4m`:
/// `(1/4m) [ g(0) cot(pi/4m) + sum_{n=1}^{m} w_n (-1)^{n+1} g(2n)
/// (cot(pi (2n-1)/4m) - cot(pi (2n+1)/4m)) ]` with `w_m = 1/2`, `w_n = 1`
/// otherwise. The `n = m` cotangent pair is evaluated as `2 tan(pi/4m)`.
pub fn telescoped_axis_sum(l: usize, g: &[f64]) -> Result<f64> {
    if l % 4 != 0 || l == 0 {
        return Err(Error::InvalidArgument(format!(
            "L = {l} must be a multiple of 4"
        )));
    }
    check_symmetric(l, g)?;
    let m = l / 4;
    let lf = l as f64;
    let mut sum = CompensatedSum::new();
    sum.add(g[0] * cot(PI / lf));
    for n in 1..m {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let diff = cot(PI * (2 * n - 1) as f64 / lf) - cot(PI * (2 * n + 1) as f64 / lf);
        sum.add(sign * g[n] * diff);
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    sum.add(sign * g[m] * (PI / lf).tan());
    Ok(sum.value() / lf)
}

/// `S_m = (1/4m) sum_{n=1}^{floor((m-1)/2)} (cot(pi(4n-1)/4m) - cot(pi(4n+1)/4m))`.
pub fn leibniz_partial(m: usize) -> f64 {
    let mf = 4.0 * m as f64;
    let terms = (1..=(m.saturating_sub(1)) / 2)
        .map(|n| cot(PI * (4 * n - 1) as f64 / mf) - cot(PI * (4 * n + 1) as f64 / mf));
    compensated_sum(terms) / mf
}

pub fn leibniz_target() -> f64 {
    (PI - 4.0) / (4.0 * PI)
}

#[derive(Debug, Clone, Serialize)]
pub struct LeibnizPoint {
    pub m: usize,
    pub s_m: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeibnizReport {
    pub target: f64,
    pub points: Vec<LeibnizPoint>,
    pub errors_decreasing: bool,
    pub last_error: f64,
    /// `max_m m |S_m - target|` over the grid.
    pub scaled_error_max: f64,
    pub all_negative: bool,
}

impl LeibnizReport {
    pub fn passed(&self) -> bool {
        self.errors_decreasing && self.last_error < 0.01
    }
}

/// Errors `|S_m - (pi - 4)/(4 pi)|` on `m = 50, 100, 200, ...` up to `m_max`
/// (plus `m_max` itself).
pub fn leibniz_limit_check(m_max: usize) -> Result<LeibnizReport> {
    if m_max < 4 {
        return Err(Error::InvalidArgument("m_max must be at least 4".into()));
    }
    let mut grid = Vec::new();
    let mut m = 4usize.max(m_max.min(50));
    while m < m_max {
        grid.push(m);
        m *= 2;
    }
    grid.push(m_max);
    let target = leibniz_target();
    let points: Vec<LeibnizPoint> = grid
        .iter()
        .map(|&m| {
            let s = leibniz_partial(m);
            LeibnizPoint {
                m,
                s_m: s,
                error: (s - target).abs(),
            }
        })
        .collect();
    let errors_decreasing = points.windows(2).all(|w| w[1].error < w[0].error);
    let last_error = points.last().map_or(f64::NAN, |p| p.error);
    let scaled_error_max = points
        .iter()
        .map(|p| p.m as f64 * p.error)
        .fold(0.0, f64::max);
    let all_negative = points.iter().all(|p| p.s_m < 0.0);
    Ok(LeibnizReport {
        target,
        points,
        errors_decreasing,
        last_error,
        scaled_error_max,
        all_negative,
    })
}

/// `e^{-x} I_0(x)` for `x >= 0`.
pub fn scaled_bessel_i0(x: f64) -> f64 {
    if x <= 50.0 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // sum_k ((2k-1)!!)^2 / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let kf = k as f64;
            term *= (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RdEstimate {
    pub d: usize,
    pub value: f64,
    pub error: f64,
    pub method: String,
}

/// `r_d = G_d(0) - 1` with `G_d(0) = int_0^inf (e^{-t/d} I_0(t/d))^d dt`,
/// trapezoid rule in `y = ln t` with `resolution` nodes per unit of `y`.
/// The error combines the step-halving difference with the first neglected
/// term of the analytic tail beyond `t = 10^12`.
pub fn r_d_quadrature(d: usize, resolution: usize) -> Result<RdEstimate> {
    if d <= 2 {
        return Err(Error::InvalidArgument(format!(
            "r_d is infinite for d = {d} (recurrent walk)"
        )));
    }
    if resolution < 4 {
        return Err(Error::InvalidArgument(
            "resolution must be at least 4".into(),
        ));
    }
    let (y0, y1) = (-40.0f64, 12.0 * std::f64::consts::LN_10);
    let df = d as f64;
    let integrand = |y: f64| {
        let t = y.exp();
        t * scaled_bessel_i0(t / df).powi(d as i32)
    };
    let trapezoid = |per_unit: usize| {
        let steps = ((y1 - y0) * per_unit as f64).ceil() as usize;
        let h = (y1 - y0) / steps as f64;
        let mut s = CompensatedSum::new();
        s.add(0.5 * integrand(y0));
        for i in 1..steps {
            s.add(integrand(y0 + h * i as f64));
        }
        s.add(0.5 * integrand(y1));
        s.value() * h
    };
    let coarse = trapezoid(resolution);
    let fine = trapezoid(2 * resolution);
    let t_max = y1.exp();
    let pref = (df / (2.0 * PI)).powf(df / 2.0);
    let lead = pref * t_max.powf(1.0 - df / 2.0) / (df / 2.0 - 1.0);
    let next = pref * df * df / 8.0 * t_max.powf(-df / 2.0) / (df / 2.0);
    let t0 = y0.exp();
    let head = t0;
    let value = fine + lead + next + head - 1.0;
    let error = (fine - coarse).abs() + next.abs() + 1e-12;
    Ok(RdEstimate {
        d,
        value,
        error,
        method: "quadrature".into(),
    })
}

/// Monte Carlo `r_d`: mean number of returns of `n_walks` simple random
/// walks within `horizon` steps.
#[derive(Debug, Clone, Serialize)]
pub struct RdRandomWalk {
    pub d: usize,
    pub n_walks: u64,
    pub horizon: u64,
    pub seed: u64,
    /// Truncated mean.
    pub mean: f64,
    pub stderr: f64,
    /// Expected returns after the horizon, `(d/2pi)^{d/2} T^{1-d/2} / (d/2 - 1)`.
    pub tail_correction: f64,
}

impl RdRandomWalk {
    pub fn corrected(&self) -> f64 {
        self.mean + self.tail_correction
    }
}

pub fn r_d_random_walk(d: usize, n_walks: u64, horizon: u64, seed: u64) -> Result<RdRandomWalk> {
    if d <= 2 {
        return Err(Error::InvalidArgument(format!(
            "d = {d} must be at least 3"
        )));
    }
    if n_walks == 0 {
        return Err(Error::InvalidArgument("need at least one walk".into()));
    }
    let mut rng = chain_rng(seed, 0);
    let mut sum = 0u64;
    let mut sum_sq = 0u64;
    let mut pos = vec![0i32; d];
    let dirs = 2 * d as u32;
    for _ in 0..n_walks {
        pos.fill(0);
        let mut off_origin = 0usize;
        let mut returns = 0u64;
        for _ in 0..horizon {
            let r = rng.random_range(0..dirs) as usize;
            let axis = r >> 1;
            let before = pos[axis];
            pos[axis] += if r & 1 == 0 { 1 } else { -1 };
            if before == 0 {
                off_origin += 1;
            } else if pos[axis] == 0 {
                off_origin -= 1;
                if off_origin == 0 {
                    returns += 1;
                }
            }
        }
        sum += returns;
        sum_sq += returns * returns;
    }
    let n = n_walks as f64;
    let mean = sum as f64 / n;
    let var = if n_walks > 1 {
        (sum_sq as f64 - n * mean * mean) / (n - 1.0)
    } else {
        0.0
    };
    let tail_correction = if horizon == 0 {
        0.0
    } else {
        let df = d as f64;
        (df / (2.0 * PI)).powf(df / 2.0) * (horizon as f64).powf(1.0 - df / 2.0) / (df / 2.0 - 1.0)
    };
    Ok(RdRandomWalk {
        d,
        n_walks,
        horizon,
        seed,
        mean,
        stderr: (var.max(0.0) / n).sqrt(),
        tail_correction,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundConstants {
    pub d: usize,
    pub n: u32,
    pub rho: f64,
    pub r_d: RdEstimate,
    /// `(1/4d) ((3 pi - 4)/(pi N) (1 - rho) - r_d/2)`.
    pub c: f64,
    pub theorem1_lower: f64,
    pub theorem1_upper: f64,
    pub rho_threshold: f64,
    pub n_range_max: f64,
    pub i_limit: f64,
    pub in_range: bool,
}

impl BoundConstants {
    /// Cesaro-sum bound on the walk end-point: `P(|X| <= alpha L) <= alpha^d / C`.
    pub fn endpoint_tail_bound(&self, alpha: f64) -> f64 {
        alpha.powi(self.d as i32) / self.c
    }
}

pub fn bound_constants(d: usize, n: u32, rho: f64) -> Result<BoundConstants> {
    bound_constants_with(r_d_quadrature(d, 64)?, n, rho)
}

pub fn bound_constants_with(r_d: RdEstimate, n: u32, rho: f64) -> Result<BoundConstants> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "N must be a positive integer".into(),
        ));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(
            "rho must be finite and non-negative".into(),
        ));
    }
    let d = r_d.d;
    let df = d as f64;
    let nf = n as f64;
    let r = r_d.value;
    let k = 3.0 * PI - 4.0;
    let c = ((k / (PI * nf)) * (1.0 - rho) - r / 2.0) / (4.0 * df);
    let rho_threshold = 1.0 - PI * r * nf / (2.0 * k);
    let n_range_max = 2.0 * k / (PI * r);
    Ok(BoundConstants {
        d,
        n,
        rho,
        c,
        theorem1_lower: ((1.0 - r / 2.0) / (2.0 * df)).powi(2),
        theorem1_upper: (2.0 - 1.0 / (2.0 * df)) / (2.0 * df),
        rho_threshold,
        n_range_max,
        i_limit: r / (4.0 * df),
        in_range: nf < n_range_max && rho < rho_threshold,
        r_d,
    })
}

/// `(1/2) (G(e_1) - I + (2/|V|) sum_{x even on axis 1} Upsilon_L(x) G(x))`
/// for a table indexed by vertex of a cubic torus.
pub fn infrared_rhs(lat: &TorusLattice, g: &[f64], i_value: f64) -> Result<f64> {
    if !lat.is_cubic() {
        return Err(Error::InvalidArgument(
            "infrared diagnostic needs a cubic torus".into(),
        ));
    }
    if g.len() != lat.vertex_count() {
        return Err(Error::InvalidArgument(
            "two-point table is incomplete".into(),
        ));
    }
    let l = lat.side(0);
    let d = lat.dim();
    let mut sum = CompensatedSum::new();
    for x1 in (0..l).step_by(2) {
        let v = lat.axis_point(x1 as i64, 1)?;
        if g[v] != 0.0 {
            sum.add(upsilon_closed_form(l, d, x1)? * g[v]);
        }
    }
    let e1 = lat.axis_point(1, 1)?;
    let volume = lat.vertex_count() as f64;
    Ok(0.5 * (g[e1] - i_value + 2.0 * sum.value() / volume))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsilon_examples() {
        assert!((upsilon_fourier(4, 2, 2).unwrap() - 4.0).abs() < 1e-12);
        assert!((upsilon_fourier(4, 2, 0).unwrap() - 4.0).abs() < 1e-12);
        assert!((upsilon_fourier(6, 2, 2).unwrap() - 12.0).abs() < 1e-12);
        assert!((upsilon_closed_form(4, 2, 2).unwrap() - 4.0).abs() < 1e-12);
        assert!((upsilon_closed_form(6, 2, 2).unwrap() - 12.0).abs() < 1e-12);
        let v = -64.0 * (3.0 * PI / 8.0).cos() / (3.0 * PI / 8.0).sin();
        assert!((upsilon_closed_form(8, 3, 4).unwrap() - v).abs() < 1e-9);
        assert!((upsilon_fourier(8, 3, 4).unwrap() - v).abs() < 1e-9);
        assert!(upsilon_fourier(4, 2, 1).is_err());
        assert!(upsilon_closed_form(5, 2, 2).is_err());
    }

    #[test]
    fn telescoped_examples() {
        let zero = vec![0.0; 4];
        assert_eq!(telescoped_axis_sum(8, &zero).unwrap(), 0.0);
        let mut ind = vec![0.0; 4];
        ind[0] = 1.0;
        let t = telescoped_axis_sum(8, &ind).unwrap();
        assert!((t - (PI / 8.0).cos() / (PI / 8.0).sin() / 8.0).abs() < 1e-12);
        assert!((upsilon_weighted_axis_sum(8, &ind).unwrap() - t).abs() < 1e-12);
        let ones = vec![1.0; 4];
        let a = telescoped_axis_sum(8, &ones).unwrap();
        let b = upsilon_weighted_axis_sum(8, &ones).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(telescoped_axis_sum(8, &[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(telescoped_axis_sum(6, &[1.0; 3]).is_err());
    }

    #[test]
    fn bessel_reference_values() {
        assert!((scaled_bessel_i0(20.0) - 0.089_780_311_884_826_02).abs() < 1e-15);
        assert!((scaled_bessel_i0(60.0) - 0.051_611_549_173_609_84).abs() < 1e-15);
        assert!((scaled_bessel_i0(0.0) - 1.0).abs() < 1e-15);
        // I_0(1) e^{-1}
        assert!((scaled_bessel_i0(1.0) - 0.465_759_607_593_640_4).abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_reference_values() {
        let reference = [
            (3, 0.516_386_059_151_518_3),
            (4, 0.239_467_121_848_481_7),
            (5, 0.156_308_124_840_231_2),
            (6, 0.116_963_373_226_671_8),
        ];
        for (d, r) in reference {
            let est = r_d_quadrature(d, 32).unwrap();
            assert!((est.value - r).abs() < 1e-8, "d={d}: {}", est.value);
            assert!(est.error < 1e-6);
        }
        assert!(r_d_quadrature(2, 32).is_err());
    }

    #[test]
    fn random_walk_edge_cases() {
        let zero = r_d_random_walk(3, 10, 0, 1).unwrap();
        assert_eq!(zero.mean, 0.0);
        assert_eq!(zero.corrected(), 0.0);
        let small = r_d_random_walk(3, 20_000, 2_000, 1).unwrap();
        assert!((small.corrected() - 0.5164).abs() < 5.0 * small.stderr + 0.01);
        assert!(r_d_random_walk(2, 10, 10, 1).is_err());
    }

    #[test]
    fn constants_d3() {
        let b = bound_constants(3, 2, 0.0).unwrap();
        assert!((b.c - 0.0504).abs() < 1e-4);
        assert!((b.rho_threshold - 0.701).abs() < 1e-3);
        assert!((b.n_range_max - 6.688).abs() < 1e-3);
        assert!(b.in_range);
        assert!((b.theorem1_upper - 11.0 / 36.0).abs() < 1e-15);
        let admissible: Vec<u32> = (1..=12)
            .filter(|&n| bound_constants_with(b.r_d.clone(), n, 0.0).unwrap().c > 0.0)
            .collect();
        assert_eq!(admissible, vec![1, 2, 3, 4, 5, 6]);
        let edge = bound_constants_with(b.r_d.clone(), 2, b.rho_threshold).unwrap();
        assert!(edge.c.abs() < 1e-12);
    }

    #[test]
    fn infrared_examples() {
        let lat = TorusLattice::cubic(3, 4).unwrap();
        let zero = vec![0.0; 64];
        assert_eq!(infrared_rhs(&lat, &zero, 0.0).unwrap(), 0.0);
        let mut g = zero.clone();
        g[lat.axis_point(1, 1).unwrap()] = 0.3;
        assert!((infrared_rhs(&lat, &g, 0.0).unwrap() - 0.15).abs() < 1e-15);
        assert!(infrared_rhs(&lat, &g[..10], 0.0).is_err());
    }

    #[test]
    fn leibniz_sums_are_positive() {
        let r = leibniz_limit_check(2000).unwrap();
        assert!(r.points.iter().all(|p| p.s_m > 0.0 && p.s_m.is_finite()));
        let limit = (4.0 - PI) / (4.0 * PI);
        assert!((leibniz_partial(2000) - limit).abs() < 1e-6);
    }
}
