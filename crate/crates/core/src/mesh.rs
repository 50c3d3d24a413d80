//! Nonuniform time grids.
//!
//! A [`Mesh`] is a strictly increasing grid `0 = t_0 < t_1 < ... < t_N`
//! together with its step sizes `tau_n = t_n - t_{n-1}`. Grid points are the
//! primary data: every stored step is the single subtraction of two stored
//! grid points, so kernels assembled from differences of `t` can never
//! disagree with `tau`.

use crate::error::{Error, Result};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Smallest accepted uniform draw when generating random steps; rejecting
/// tiny draws keeps step sizes bounded away from zero.
const MIN_UNIFORM_DRAW: f64 = 1e-12;

/// Strictly increasing time grid `0 = t_0 < t_1 < ... < t_N`.
///
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    t: Vec<f64>,
    tau: Vec<f64>,
}

impl Mesh {
    /// Builds a mesh from raw step sizes. The grid points are accumulated
    /// from zero and the stored steps re-derived as `t[n] - t[n-1]`, which
    /// keeps the two representations exactly consistent.
    pub fn from_steps(steps: &[f64]) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidMesh("at least one step required".into()));
        }
        let mut t = Vec::with_capacity(steps.len() + 1);
        t.push(0.0);
        for (j, &s) in steps.iter().enumerate() {
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "step {} must be positive and finite, got {s}",
                    j + 1
                )));
            }
            let next = t[j] + s;
            if !next.is_finite() {
                return Err(Error::InvalidMesh(format!("grid point {} overflows", j + 1)));
            }
            t.push(next);
        }
        Self::from_points(t)
    }

    fn from_points(t: Vec<f64>) -> Result<Self> {
        let mut tau = Vec::with_capacity(t.len() - 1);
        for n in 1..t.len() {
            let step = t[n] - t[n - 1];
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::InvalidMesh(format!(
                    "grid must be strictly increasing; step {n} collapsed to {step}"
                )));
            }
            tau.push(step);
        }
        Ok(Mesh { t, tau })
    }

    /// Equispaced grid `t_n = n T / N`.
    pub fn uniform(n: usize, t_end: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("need at least one step".into()));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidMesh(format!("horizon must be positive, got {t_end}")));
        }
        let t = (0..=n).map(|i| i as f64 * t_end / n as f64).collect();
        Self::from_points(t)
    }

    /// Geometric steps `tau_j = tau1 * ratio^(j-1)`.
    pub fn geometric(tau1: f64, ratio: f64, n: usize) -> Result<Self> {
        if !(tau1 > 0.0) || !(ratio > 0.0) {
            return Err(Error::InvalidMesh(format!(
                "geometric mesh needs tau1 > 0 and ratio > 0, got tau1={tau1}, ratio={ratio}"
            )));
        }
        let mut steps = Vec::with_capacity(n);
        let mut step = tau1;
        for _ in 0..n {
            steps.push(step);
            step *= ratio;
        }
        Self::from_steps(&steps)
    }

    /// Algebraically decaying steps `tau_j = c (1 + b j)^(-p)`, `j = 1..=N`.
    pub fn algebraic_decay(c: f64, b: f64, p: f64, n: usize) -> Result<Self> {
        if !(c > 0.0) || !(b >= 0.0) || !(p >= 0.0) {
            return Err(Error::InvalidMesh(format!(
                "decay mesh needs c > 0, b >= 0, p >= 0, got c={c}, b={b}, p={p}"
            )));
        }
        let steps: Vec<f64> = (1..=n).map(|j| c * (1.0 + b * j as f64).powf(-p)).collect();
        Self::from_steps(&steps)
    }

    /// Random steps `tau_j = scale * u_j` with `u_j` i.i.d. uniform on (0, 1)
    /// drawn from [`SplitMix64`]; draws below `1e-12` are rejected so no step
    /// degenerates. Identical seeds reproduce the mesh bit for bit.
    pub fn random(scale: f64, n: usize, seed: u64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidMesh(format!("scale must be positive, got {scale}")));
        }
        let mut rng = SplitMix64::new(seed);
        let mut steps = Vec::with_capacity(n);
        while steps.len() < n {
            let u = rng.next_f64();
            if u >= MIN_UNIFORM_DRAW {
                steps.push(scale * u);
            }
        }
        Self::from_steps(&steps)
    }

    /// Number of steps `N` (the grid has `N + 1` points).
    pub fn n_steps(&self) -> usize {
        self.tau.len()
    }

    /// Grid points `t_0..t_N`.
    pub fn points(&self) -> &[f64] {
        &self.t
    }

    /// Step sizes `tau_1..tau_N`.
    pub fn steps(&self) -> &[f64] {
        &self.tau
    }

    /// Grid point `t_n`, `n = 0..=N`.
    pub fn t(&self, n: usize) -> f64 {
        self.t[n]
    }

    /// Step size `tau_j = t_j - t_{j-1}`, `j = 1..=N`.
    pub fn tau(&self, j: usize) -> f64 {
        self.tau[j - 1]
    }

    /// Final time `t_N`.
    pub fn horizon(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn min_step(&self) -> f64 {
        self.tau.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_step(&self) -> f64 {
        self.tau.iter().cloned().fold(0.0, f64::max)
    }

    /// Replaces the first step; the remaining grid shifts accordingly.
    pub fn with_first_step(&self, tau1: f64) -> Result<Self> {
        let mut steps = self.tau.clone();
        steps[0] = tau1;
        Self::from_steps(&steps)
    }

    /// Serializes steps, one per line (the mesh text format).
    pub fn to_step_text(&self) -> String {
        let mut out = String::new();
        for s in &self.tau {
            out.push_str(&format!("{s}\n"));
        }
        out
    }

    /// Parses a mesh from text holding one step per line.
    pub fn from_step_text(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad step value {line:?}", i + 1)))?;
            steps.push(v);
        }
        Self::from_steps(&steps)
    }

    pub fn write_steps<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_step_text())?;
        Ok(())
    }

    pub fn read_steps<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_step_text(&text)
    }
}

/// SplitMix64 generator (Steele, Lea and Flood's published constants).
///
/// The algorithm is spelled out here rather than pulled from a crate so that
/// seeded meshes stay reproducible across toolchains and reimplementations:
/// the state advances by `0x9E3779B97F4A7C15` and the output is the two-round
/// xor-multiply finalizer below.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Mesh description in the textual form accepted on the command line:
/// `uniform:N,T`, `geom:tau1,ratio,N`, `decay:c,b,p,N`, `random:scale,N,seed`.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    Uniform { n: usize, t_end: f64 },
    Geometric { tau1: f64, ratio: f64, n: usize },
    AlgebraicDecay { c: f64, b: f64, p: f64, n: usize },
    Random { scale: f64, n: usize, seed: u64 },
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        match *self {
            MeshSpec::Uniform { n, t_end } => Mesh::uniform(n, t_end),
            MeshSpec::Geometric { tau1, ratio, n } => Mesh::geometric(tau1, ratio, n),
            MeshSpec::AlgebraicDecay { c, b, p, n } => Mesh::algebraic_decay(c, b, p, n),
            MeshSpec::Random { scale, n, seed } => Mesh::random(scale, n, seed),
        }
    }

    /// Step count requested by the spec.
    pub fn n_steps(&self) -> usize {
        match *self {
            MeshSpec::Uniform { n, .. }
            | MeshSpec::Geometric { n, .. }
            | MeshSpec::AlgebraicDecay { n, .. }
            | MeshSpec::Random { n, .. } => n,
        }
    }

    /// Same family and parameters with the step count replaced.
    pub fn with_n_steps(&self, n: usize) -> MeshSpec {
        let mut spec = self.clone();
        match spec {
            MeshSpec::Uniform { n: ref mut m, .. }
            | MeshSpec::Geometric { n: ref mut m, .. }
            | MeshSpec::AlgebraicDecay { n: ref mut m, .. }
            | MeshSpec::Random { n: ref mut m, .. } => *m = n,
        }
        spec
    }
}

impl FromStr for MeshSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("mesh spec {s:?} missing ':'")))?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let bad = |what: &str| Error::Parse(format!("mesh spec {s:?}: {what}"));
        let f = |p: &str| p.parse::<f64>().map_err(|_| bad(&format!("bad number {p:?}")));
        let u = |p: &str| p.parse::<usize>().map_err(|_| bad(&format!("bad count {p:?}")));
        match kind {
            "uniform" => {
                if parts.len() != 2 {
                    return Err(bad("expected uniform:N,T"));
                }
                Ok(MeshSpec::Uniform { n: u(parts[0])?, t_end: f(parts[1])? })
            }
            "geom" => {
                if parts.len() != 3 {
                    return Err(bad("expected geom:tau1,ratio,N"));
                }
                Ok(MeshSpec::Geometric { tau1: f(parts[0])?, ratio: f(parts[1])?, n: u(parts[2])? })
            }
            "decay" => {
                if parts.len() != 4 {
                    return Err(bad("expected decay:c,b,p,N"));
                }
                Ok(MeshSpec::AlgebraicDecay {
                    c: f(parts[0])?,
                    b: f(parts[1])?,
                    p: f(parts[2])?,
                    n: u(parts[3])?,
                })
            }
            "random" => {
                if parts.len() != 3 {
                    return Err(bad("expected random:scale,N,seed"));
                }
                let seed = parts[2]
                    .parse::<u64>()
                    .map_err(|_| bad(&format!("bad seed {:?}", parts[2])))?;
                Ok(MeshSpec::Random { scale: f(parts[0])?, n: u(parts[1])?, seed })
            }
            other => Err(bad(&format!("unknown mesh family {other:?}"))),
        }
    }
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MeshSpec::Uniform { n, t_end } => write!(w, "uniform:{n},{t_end}"),
            MeshSpec::Geometric { tau1, ratio, n } => write!(w, "geom:{tau1},{ratio},{n}"),
            MeshSpec::AlgebraicDecay { c, b, p, n } => write!(w, "decay:{c},{b},{p},{n}"),
            MeshSpec::Random { scale, n, seed } => write!(w, "random:{scale},{n},{seed}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn uniform_single_step() {
        let m = Mesh::uniform(1, 1.0).unwrap();
        assert_eq!(m.points(), &[0.0, 1.0]);
        assert_eq!(m.steps(), &[1.0]);
    }

    #[test]
    fn uniform_equal_subdivision() {
        let m = Mesh::uniform(4, 2.0).unwrap();
        for j in 1..=4 {
            assert_eq!(m.tau(j), 0.5);
        }
    }

    #[test]
    fn uniform_grid_point() {
        let m = Mesh::uniform(10, 1.0).unwrap();
        assert!((m.t(7) - 0.7).abs() <= 1e-16);
    }

    #[test]
    fn geometric_first_steps() {
        let m = Mesh::geometric(0.01, 1.2, 2).unwrap();
        assert!(close(m.tau(1), 0.01, 1e-15));
        assert!(close(m.tau(2), 0.012, 1e-15));
    }

    #[test]
    fn geometric_ratio_one_is_uniform() {
        let g = Mesh::geometric(0.1, 1.0, 3).unwrap();
        let u = Mesh::uniform(3, 0.3).unwrap();
        for n in 0..=3 {
            assert!(close(g.t(n), u.t(n), 1e-15));
        }
    }

    #[test]
    fn geometric_horizon_matches_series_sum() {
        // 0.01 (1.2^5 - 1) / 0.2
        let m = Mesh::geometric(0.01, 1.2, 5).unwrap();
        assert!(close(m.horizon(), 0.074416, 1e-12));
    }

    #[test]
    fn geometric_overflow_rejected() {
        assert!(matches!(Mesh::geometric(1.0, 10.0, 400), Err(Error::InvalidMesh(_))));
    }

    #[test]
    fn decay_formula_values() {
        // 0.1 * 1.5^(-1/2) and 0.1 * 2^(-1/2)
        let m = Mesh::algebraic_decay(0.1, 0.5, 0.5, 2).unwrap();
        assert!(close(m.tau(1), 0.08164965809277261, 1e-14));
        assert!(close(m.tau(2), 0.07071067811865475, 1e-14));
    }

    #[test]
    fn decay_b_zero_is_uniform() {
        let m = Mesh::algebraic_decay(0.1, 0.0, 0.5, 3).unwrap();
        for j in 1..=3 {
            assert!(close(m.tau(j), 0.1, 1e-15));
        }
    }

    #[test]
    fn random_is_deterministic() {
        let a = Mesh::random(0.1, 100, 7).unwrap();
        let b = Mesh::random(0.1, 100, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_steps_in_range() {
        let m = Mesh::random(0.1, 1000, 3).unwrap();
        for j in 1..=1000 {
            assert!(m.tau(j) > 1e-13 && m.tau(j) < 0.1);
        }
    }

    #[test]
    fn random_mean_near_half_scale() {
        let m = Mesh::random(0.1, 1000, 1).unwrap();
        let mean = m.steps().iter().sum::<f64>() / 1000.0;
        assert!((mean - 0.05).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn steps_match_point_differences_exactly() {
        let m = Mesh::random(0.1, 200, 11).unwrap();
        for n in 1..=200 {
            assert_eq!(m.tau(n), m.t(n) - m.t(n - 1));
        }
    }

    #[test]
    fn rejects_bad_steps() {
        assert!(Mesh::from_steps(&[]).is_err());
        assert!(Mesh::from_steps(&[0.1, 0.0]).is_err());
        assert!(Mesh::from_steps(&[0.1, -0.2]).is_err());
        assert!(Mesh::from_steps(&[f64::NAN]).is_err());
        // step too small to survive accumulation
        assert!(Mesh::from_steps(&[1.0, 1e-20]).is_err());
    }

    #[test]
    fn step_text_round_trip() {
        let m = Mesh::geometric(0.01, 1.2, 8).unwrap();
        let back = Mesh::from_step_text(&m.to_step_text()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn step_text_rejects_nonpositive() {
        assert!(Mesh::from_step_text("0.1\n-0.1\n").is_err());
    }

    #[test]
    fn mesh_spec_parses_and_builds() {
        let spec: MeshSpec = "geom:0.01,1.2,30".parse().unwrap();
        assert_eq!(spec, MeshSpec::Geometric { tau1: 0.01, ratio: 1.2, n: 30 });
        assert_eq!(spec.build().unwrap().n_steps(), 30);

        let spec: MeshSpec = "uniform:10,1".parse().unwrap();
        assert_eq!(spec.build().unwrap().horizon(), 1.0);

        let spec: MeshSpec = "decay:0.1,0.5,0.5,100".parse().unwrap();
        assert_eq!(spec.n_steps(), 100);

        let spec: MeshSpec = "random:0.1,100,42".parse().unwrap();
        assert_eq!(spec.with_n_steps(7).n_steps(), 7);

        assert!("grid:1,2".parse::<MeshSpec>().is_err());
        assert!("uniform:10".parse::<MeshSpec>().is_err());
        assert!("uniform:x,1".parse::<MeshSpec>().is_err());
    }

    #[test]
    fn mesh_spec_display_round_trip() {
        for s in ["uniform:10,1", "geom:0.01,1.2,30", "decay:0.1,0.5,0.5,100", "random:0.1,100,42"] {
            let spec: MeshSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }
}
