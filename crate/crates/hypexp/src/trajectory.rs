//! Time-indexed record of a closed-loop run and its CSV serialization.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// Which stepping produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Ct,
    Dt,
}

impl RunMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunMode::Ct => "ct",
            RunMode::Dt => "dt",
        }
    }
}

/// Integrator statistics and provenance recorded alongside the samples.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub mode: RunMode,
    pub n: usize,
    pub lambda: Vec<f64>,
    pub m: u32,
    pub seed: u64,
    pub uniform_draw: f64,
    pub steps: u64,
    /// Smallest integration step taken (CT) or the fixed step (DT).
    pub min_step: f64,
    pub spec_hash: u64,
}

/// Sampled closed-loop run: states, control values, auxiliary variables and
/// disturbance values on a strictly increasing time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub controls: Vec<f64>,
    pub sigmas: Vec<Vec<f64>>,
    pub dists: Vec<Vec<f64>>,
    pub meta: RunMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    /// Index range `[a, b]` of samples with `t` inside the window.
    pub fn window_indices(&self, t_a: f64, t_b: f64) -> Result<(usize, usize)> {
        if t_b < t_a || self.is_empty() {
            return Err(Error::WindowOutOfRange { a: t_a, b: t_b });
        }
        let span = (self.times[0], *self.times.last().unwrap());
        if t_a < span.0 - 1e-9 || t_b > span.1 + 1e-9 {
            return Err(Error::WindowOutOfRange { a: t_a, b: t_b });
        }
        let lo = self.times.partition_point(|&t| t < t_a - 1e-12);
        let hi = self.times.partition_point(|&t| t <= t_b + 1e-12);
        if lo >= hi {
            return Err(Error::WindowOutOfRange { a: t_a, b: t_b });
        }
        Ok((lo, hi - 1))
    }

    pub fn sup_norm_state(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|x| x.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Writes the run as CSV with header `t,x1..xn,u,sigma1..sigman,d1..dn`
    /// and full round-trip decimal precision.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let n = self.n();
        write!(w, "t")?;
        for j in 1..=n {
            write!(w, ",x{j}")?;
        }
        write!(w, ",u")?;
        for j in 1..=n {
            write!(w, ",sigma{j}")?;
        }
        for j in 1..=n {
            write!(w, ",d{j}")?;
        }
        writeln!(w)?;
        for k in 0..self.len() {
            write!(w, "{}", self.times[k])?;
            for v in &self.states[k] {
                write!(w, ",{v}")?;
            }
            write!(w, ",{}", self.controls[k])?;
            for v in &self.sigmas[k] {
                write!(w, ",{v}")?;
            }
            for v in &self.dists[k] {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// FNV-1a over the textual form of a value; stable across runs and builds.
pub fn stable_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
