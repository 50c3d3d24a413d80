//! Kernels on uniform meshes: finite sequences under ordinary convolution.
//!
//! All properties are checked over the indices actually present, i.e. a
//! sequence of length `N` certifies a property "with range N"; the report's
//! tolerance semantics match [`crate::props`].

use crate::error::{Error, Result};
use crate::kernel::ArrayKernel;
use crate::props::{PropertyReport, Witness};
use std::path::Path;

/// Finite kernel sequence `(a_0, a_1, ..., a_{N-1})` on a uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    a: Vec<f64>,
}

impl Sequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("sequence must have at least one entry".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite sequence entry {bad}")));
        }
        Ok(Sequence { a: values })
    }

    /// Convolution identity `(1, 0, 0, ...)`.
    pub fn delta(n: usize) -> Self {
        let mut a = vec![0.0; n];
        a[0] = 1.0;
        Sequence { a }
    }

    pub fn ones(n: usize) -> Self {
        Sequence { a: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Truncated convolution `(a*b)_n = sum_{j=0..n} a_{n-j} b_j` of two
    /// equal-length sequences.
    pub fn conv(&self, other: &Sequence) -> Result<Sequence> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "conv: lengths {} and {} differ",
                self.len(),
                other.len()
            )));
        }
        let n = self.len();
        let mut out = vec![0.0; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.a[i - j] * other.a[j];
            }
            *slot = acc;
        }
        Ok(Sequence { a: out })
    }

    /// Convolution inverse `b` with `a * b = delta`, by forward substitution:
    /// `b_0 = 1/a_0`, `b_n = -(1/a_0) sum_{j=0..n-1} a_{n-j} b_j`.
    pub fn conv_inverse(&self) -> Result<Sequence> {
        if self.a[0] == 0.0 {
            return Err(Error::SingularKernel { row: 1 });
        }
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / self.a[0];
        for i in 1..n {
            let mut acc = 0.0;
            for j in 0..i {
                acc += self.a[i - j] * b[j];
            }
            b[i] = -acc / self.a[0];
        }
        Ok(Sequence { a: b })
    }

    /// Row-constant array kernel with `a^n_k = a_k`; pseudo-convolution of
    /// such lifts reduces to ordinary convolution.
    pub fn to_array_kernel(&self) -> ArrayKernel {
        let rows = (1..=self.len()).map(|n| self.a[..n].to_vec()).collect();
        ArrayKernel::from_rows(rows).expect("triangular by construction")
    }

    /// Sequence file format: one value per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.a {
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad value {line:?}", i + 1)))?;
            values.push(v);
        }
        Self::new(values)
    }

    pub fn write_text<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_text<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn seq_witness(property: &str, index: usize, lhs: f64, rhs: f64, slack: f64) -> Witness {
    Witness { property: property.to_string(), row: index, index: 0, lhs, rhs, slack }
}

/// Complementary monotonicity of a uniform-mesh kernel: nonnegative,
/// nonincreasing, positive leading entry, and the convolution inverse `b`
/// has `b_0 > 0` and `b_j <= 0` for `j >= 1`. The equivalent complementary
/// route (`b * ones` nonnegative and nonincreasing) is evaluated as a
/// cross-check; disagreement attaches a conditioning warning.
pub fn is_cmm_uniform(a: &Sequence, tol: f64) -> PropertyReport {
    const NAME: &str = "cmm";
    let scale = a.max_abs().max(1.0);
    let eff = tol * scale;
    let pos = 1e-3 * tol * scale;
    let v = a.values();
    if !(v[0] > pos) {
        return PropertyReport::fail(NAME, tol, seq_witness("leading-entry-positive", 0, v[0], pos, pos - v[0]));
    }
    for j in 0..v.len() {
        if v[j] < -eff {
            return PropertyReport::fail(NAME, tol, seq_witness("nonnegative", j, v[j], 0.0, -v[j] - eff));
        }
        if j >= 1 && v[j - 1] < v[j] - eff {
            return PropertyReport::fail(
                NAME,
                tol,
                seq_witness("nonincreasing", j, v[j - 1], v[j], v[j] - v[j - 1] - eff),
            );
        }
    }
    let b = a.conv_inverse().expect("leading entry checked positive");
    let bscale = b.max_abs().max(1.0);
    let beff = tol * bscale;
    let bpos = 1e-3 * tol * bscale;
    let mut verdict = PropertyReport::pass(NAME, tol);
    if !(b.values()[0] > bpos) {
        verdict = PropertyReport::fail(
            NAME,
            tol,
            seq_witness("inverse-leading-positive", 0, b.values()[0], bpos, bpos - b.values()[0]),
        );
    } else if let Some(j) = (1..b.len()).find(|&j| b.values()[j] > beff) {
        verdict = PropertyReport::fail(
            NAME,
            tol,
            seq_witness("inverse-tail-nonpositive", j, b.values()[j], 0.0, b.values()[j] - beff),
        );
    }
    // cross-check: complementary kernel b * (1,1,...) nonnegative, nonincreasing
    let comp = b.conv(&Sequence::ones(b.len())).expect("lengths match");
    let cscale = comp.max_abs().max(1.0);
    let ceff = tol * cscale;
    let c = comp.values();
    let comp_ok = c.iter().all(|&x| x >= -ceff) && (1..c.len()).all(|j| c[j - 1] >= c[j] - ceff);
    if comp_ok != verdict.holds {
        let sign_route = verdict.holds;
        verdict = verdict.with_warning(format!(
            "conditioning: inverse-sign route says {sign_route} but complementary-kernel route says {comp_ok}"
        ));
    }
    verdict
}

/// Nonnegative, nonincreasing, and log-convex:
/// `a_{j-1} a_{j+1} >= a_j^2` for interior `j`.
pub fn is_logconvex_sequence(a: &Sequence, tol: f64) -> PropertyReport {
    const NAME: &str = "log-convex-sequence";
    let scale = a.max_abs().max(1.0);
    let eff = tol * scale;
    let prod_eff = tol * scale * scale;
    let v = a.values();
    for j in 0..v.len() {
        if v[j] < -eff {
            return PropertyReport::fail(NAME, tol, seq_witness("nonnegative", j, v[j], 0.0, -v[j] - eff));
        }
        if j >= 1 && v[j - 1] < v[j] - eff {
            return PropertyReport::fail(
                NAME,
                tol,
                seq_witness("nonincreasing", j, v[j - 1], v[j], v[j] - v[j - 1] - eff),
            );
        }
        if j >= 1 && j + 1 < v.len() {
            let lhs = v[j - 1] * v[j + 1];
            let rhs = v[j] * v[j];
            if lhs < rhs - prod_eff {
                return PropertyReport::fail(NAME, tol, seq_witness("log-convex", j, lhs, rhs, rhs - lhs - prod_eff));
            }
        }
    }
    PropertyReport::pass(NAME, tol)
}

/// Complete monotonicity of a sequence: every repeated backward difference
/// `((I - E)^j v)_k`, `j + k <= N - 1`, is nonnegative (`(E v)_k = v_{k+1}`).
///
/// Each difference is judged against `tol` times its attainable magnitude
/// `sum_i C(j,i) |v_{k+i}|` (the same triangle with additions). Deep
/// differences of slowly decaying data cancel by many orders of magnitude,
/// so a relative perturbation of the input at roundoff level already moves
/// them by `~(1+r)^j` times roundoff; a flat tolerance would flag that as a
/// violation. The witness carries the difference order `j` in `row` and the
/// shift `k` in `index`.
pub fn is_cm_sequence(v: &Sequence, tol: f64) -> PropertyReport {
    const NAME: &str = "cm-sequence";
    let mut diff: Vec<f64> = v.values().to_vec();
    let mut mag: Vec<f64> = v.values().iter().map(|x| x.abs()).collect();
    let mut order = 0usize;
    loop {
        for (k, (&d, &s)) in diff.iter().zip(mag.iter()).enumerate() {
            let eff = tol * s.max(1.0);
            if d < -eff {
                return PropertyReport::fail(
                    NAME,
                    tol,
                    Witness {
                        property: "difference-nonnegative".into(),
                        row: order,
                        index: k,
                        lhs: d,
                        rhs: 0.0,
                        slack: -d - eff,
                    },
                );
            }
        }
        if diff.len() == 1 {
            return PropertyReport::pass(NAME, tol);
        }
        diff = diff.windows(2).map(|w| w[0] - w[1]).collect();
        mag = mag.windows(2).map(|w| w[0] + w[1]).collect();
        order += 1;
    }
}
