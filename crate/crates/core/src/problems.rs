//! Analytic benchmark problems (ZDT1-4, ZDT6, DTLZ1, DTLZ2) with exact
//! Jacobians and Pareto-front samplers for IGD.
//!
//! DTLZ instances use the usual split: the first `m - 1` variables are
//! position variables and the remaining `n - m + 1` are distance variables.
//!
//! Gradients are the analytic formulas on the open interior. The ZDT1/3/4
//! second objective has a `1/sqrt(x_1)` term, and ZDT6's `g` a
//! `mean^(-3/4)` term; at those boundary points the formulas return the
//! infinite one-sided limit, so gradient callers should stay off the faces
//! `x_1 = 0` (ZDT1/3/4) and `x_2..x_n = 0` (ZDT6).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::domain::{nondominated_subset, BoxBounds, GradientMatrix, ObjectiveVector};
use crate::error::{check_len, Error, Result};
use crate::moead::simplex_lattice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Zdt1,
    Zdt2,
    Zdt3,
    Zdt4,
    Zdt6,
    Dtlz1,
    Dtlz2,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Zdt1,
        ProblemKind::Zdt2,
        ProblemKind::Zdt3,
        ProblemKind::Zdt4,
        ProblemKind::Zdt6,
        ProblemKind::Dtlz1,
        ProblemKind::Dtlz2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Zdt1 => "zdt1",
            ProblemKind::Zdt2 => "zdt2",
            ProblemKind::Zdt3 => "zdt3",
            ProblemKind::Zdt4 => "zdt4",
            ProblemKind::Zdt6 => "zdt6",
            ProblemKind::Dtlz1 => "dtlz1",
            ProblemKind::Dtlz2 => "dtlz2",
        }
    }

    pub fn is_dtlz(self) -> bool {
        matches!(self, ProblemKind::Dtlz1 | ProblemKind::Dtlz2)
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::NotAvailable(format!("unknown problem '{s}'; valid names: {}", Self::valid_names())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    kind: ProblemKind,
    m: usize,
    bounds: BoxBounds,
}

impl Problem {
    /// ZDT instances always have two objectives; DTLZ instances default to three.
    pub fn new(kind: ProblemKind, n: usize) -> Result<Self> {
        let m = if kind.is_dtlz() { 3 } else { 2 };
        Self::with_objectives(kind, n, m)
    }

    pub fn with_objectives(kind: ProblemKind, n: usize, m: usize) -> Result<Self> {
        if kind.is_dtlz() {
            if m < 2 || n < m {
                return Err(Error::Domain(format!(
                    "{kind} needs m >= 2 and n >= m, got n = {n}, m = {m}"
                )));
            }
        } else {
            if m != 2 {
                return Err(Error::Domain(format!("{kind} has exactly 2 objectives")));
            }
            if n < 2 {
                return Err(Error::Domain(format!("{kind} needs n >= 2")));
            }
        }
        let bounds = match kind {
            ProblemKind::Zdt4 => {
                let mut lo = vec![-5.0; n];
                let mut hi = vec![5.0; n];
                lo[0] = 0.0;
                hi[0] = 1.0;
                BoxBounds::new(lo, hi)?
            }
            _ => BoxBounds::unit(n),
        };
        Ok(Self { kind, m, bounds })
    }

    pub fn by_name(name: &str, n: usize) -> Result<Self> {
        Self::new(name.parse()?, n)
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn n(&self) -> usize {
        self.bounds.dim()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    /// False for every member of this suite: each has boundary singularities
    /// (ZDT) or is only smooth on the open box.
    pub fn differentiable_everywhere(&self) -> bool {
        false
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        check_len(self.n(), x.len())?;
        if !self.bounds.contains(x) {
            return Err(Error::Domain(format!("{} input outside its bounds", self.name())));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector> {
        self.check_input(x)?;
        Ok(match self.kind {
            ProblemKind::Zdt1 | ProblemKind::Zdt2 | ProblemKind::Zdt3 | ProblemKind::Zdt4 => {
                let f1 = x[0];
                let g = self.zdt_g(x);
                vec![f1, self.zdt_h(f1, g)]
            }
            ProblemKind::Zdt6 => {
                let f1 = zdt6_f1(x[0]);
                let g = self.zdt_g(x);
                vec![f1, g - f1 * f1 / g]
            }
            ProblemKind::Dtlz1 => dtlz_values(x, self.m, dtlz1_g(&x[self.m - 1..]), Dtlz::One),
            ProblemKind::Dtlz2 => dtlz_values(x, self.m, dtlz2_g(&x[self.m - 1..]), Dtlz::Two),
        })
    }

    pub fn evaluate_with_gradient(&self, x: &[f64]) -> Result<(ObjectiveVector, GradientMatrix)> {
        let f = self.evaluate(x)?;
        let n = self.n();
        let mut jac = Array2::zeros((self.m, n));
        match self.kind {
            ProblemKind::Zdt1 | ProblemKind::Zdt2 | ProblemKind::Zdt3 | ProblemKind::Zdt4 => {
                let f1 = x[0];
                let g = self.zdt_g(x);
                let (dh_df1, dh_dg) = self.zdt_h_partials(f1, g);
                jac[[0, 0]] = 1.0;
                jac[[1, 0]] = dh_df1;
                for i in 1..n {
                    jac[[1, i]] = dh_dg * self.zdt_dg(x, i);
                }
            }
            ProblemKind::Zdt6 => {
                let f1 = zdt6_f1(x[0]);
                let df1 = zdt6_df1(x[0]);
                let g = self.zdt_g(x);
                jac[[0, 0]] = df1;
                jac[[1, 0]] = -2.0 * f1 * df1 / g;
                let dh_dg = 1.0 + (f1 / g).powi(2);
                for i in 1..n {
                    jac[[1, i]] = dh_dg * self.zdt_dg(x, i);
                }
            }
            ProblemKind::Dtlz1 | ProblemKind::Dtlz2 => {
                let variant = if self.kind == ProblemKind::Dtlz1 {
                    Dtlz::One
                } else {
                    Dtlz::Two
                };
                dtlz_jacobian(x, self.m, variant, &mut jac);
            }
        }
        Ok((f, jac))
    }

    fn zdt_g(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let tail = &x[1..];
        match self.kind {
            ProblemKind::Zdt4 => {
                1.0 + 10.0 * (n - 1) as f64 + tail.iter().map(|v| v * v - 10.0 * (4.0 * PI * v).cos()).sum::<f64>()
            }
            ProblemKind::Zdt6 => {
                let mean = tail.iter().sum::<f64>() / (n - 1) as f64;
                1.0 + 9.0 * mean.powf(0.25)
            }
            _ => 1.0 + 9.0 * tail.iter().sum::<f64>() / (n - 1) as f64,
        }
    }

    fn zdt_dg(&self, x: &[f64], i: usize) -> f64 {
        let n = x.len();
        match self.kind {
            ProblemKind::Zdt4 => 2.0 * x[i] + 40.0 * PI * (4.0 * PI * x[i]).sin(),
            ProblemKind::Zdt6 => {
                let mean = x[1..].iter().sum::<f64>() / (n - 1) as f64;
                9.0 * 0.25 * mean.powf(-0.75) / (n - 1) as f64
            }
            _ => 9.0 / (n - 1) as f64,
        }
    }

    // f2 = h(f1, g) for ZDT1-4
    fn zdt_h(&self, f1: f64, g: f64) -> f64 {
        match self.kind {
            ProblemKind::Zdt2 => g - f1 * f1 / g,
            ProblemKind::Zdt3 => g - (f1 * g).sqrt() - f1 * (10.0 * PI * f1).sin(),
            _ => g - (f1 * g).sqrt(),
        }
    }

    fn zdt_h_partials(&self, f1: f64, g: f64) -> (f64, f64) {
        match self.kind {
            ProblemKind::Zdt2 => (-2.0 * f1 / g, 1.0 + (f1 / g).powi(2)),
            ProblemKind::Zdt3 => (
                -0.5 * (g / f1).sqrt() - (10.0 * PI * f1).sin() - 10.0 * PI * f1 * (10.0 * PI * f1).cos(),
                1.0 - 0.5 * (f1 / g).sqrt(),
            ),
            _ => (-0.5 * (g / f1).sqrt(), 1.0 - 0.5 * (f1 / g).sqrt()),
        }
    }

    /// Upper bound on every objective over the whole box, inflated by 10%.
    /// A fixed reference point for tracking archive hypervolume.
    pub fn hypervolume_reference(&self) -> ObjectiveVector {
        let n = self.n();
        match self.kind {
            ProblemKind::Zdt4 => {
                // g <= 1 + 10(n-1) + (n-1)(25 + 10)
                let g_max = 1.0 + 45.0 * (n - 1) as f64;
                vec![1.1, 1.1 * (g_max + 1.0)]
            }
            ProblemKind::Zdt1 | ProblemKind::Zdt2 | ProblemKind::Zdt3 | ProblemKind::Zdt6 => {
                vec![1.1, 1.1 * 11.0]
            }
            ProblemKind::Dtlz1 => {
                let k = (n - self.m + 1) as f64;
                vec![1.1 * 0.5 * (1.0 + 100.0 * 2.25 * k); self.m]
            }
            ProblemKind::Dtlz2 => {
                let k = (n - self.m + 1) as f64;
                vec![1.1 * (1.0 + 0.25 * k); self.m]
            }
        }
    }

    /// `count` points on the true Pareto front: uniform in `f1` for ZDT,
    /// a simplex lattice (projected to the sphere for DTLZ2) for DTLZ.
    pub fn reference_front(&self, count: usize) -> Result<Vec<ObjectiveVector>> {
        if count < 2 {
            return Err(Error::Domain("reference front needs count >= 2".into()));
        }
        let grid = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
            (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
        };
        Ok(match self.kind {
            ProblemKind::Zdt1 | ProblemKind::Zdt4 => grid(0.0, 1.0, count)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1.sqrt()])
                .collect(),
            ProblemKind::Zdt2 => grid(0.0, 1.0, count)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1 * f1])
                .collect(),
            ProblemKind::Zdt6 => grid(ZDT6_F1_MIN, 1.0, count)
                .into_iter()
                .map(|f1| vec![f1, 1.0 - f1 * f1])
                .collect(),
            ProblemKind::Zdt3 => zdt3_front(count),
            ProblemKind::Dtlz1 => simplex_lattice(self.m, count)?
                .into_iter()
                .map(|w| w.into_iter().map(|v| 0.5 * v).collect())
                .collect(),
            ProblemKind::Dtlz2 => simplex_lattice(self.m, count)?
                .into_iter()
                .map(|w| {
                    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    w.into_iter().map(|v| v / norm).collect()
                })
                .collect(),
        })
    }
}

/// Smallest attainable `f1` of ZDT6, reached at `x_1 = 0.0817...`
/// where `sin(6 pi x_1) = 1` next to the first exp-weighted peak.
const ZDT6_F1_MIN: f64 = 0.280_775_319_1;

fn zdt6_f1(x1: f64) -> f64 {
    1.0 - (-4.0 * x1).exp() * (6.0 * PI * x1).sin().powi(6)
}

fn zdt6_df1(x1: f64) -> f64 {
    let e = (-4.0 * x1).exp();
    let s = (6.0 * PI * x1).sin();
    let c = (6.0 * PI * x1).cos();
    4.0 * e * s.powi(6) - e * 6.0 * s.powi(5) * c * 6.0 * PI
}

fn zdt3_front(count: usize) -> Vec<ObjectiveVector> {
    let curve = |f1: f64| vec![f1, 1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin()];
    let mut samples = count;
    loop {
        let pts: Vec<ObjectiveVector> = (0..samples).map(|i| curve(i as f64 / (samples - 1) as f64)).collect();
        let keep = nondominated_subset(&pts);
        if keep.len() >= count {
            // evenly thin the nondominated samples down to `count`
            let last = keep.len() - 1;
            return (0..count)
                .map(|i| {
                    let idx = (i * last + (count - 1) / 2) / (count - 1);
                    pts[keep[idx]].clone()
                })
                .collect();
        }
        samples = samples * count / keep.len().max(1) + count;
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Dtlz {
    One,
    Two,
}

fn dtlz1_g(tail: &[f64]) -> f64 {
    100.0
        * (tail.len() as f64
            + tail
                .iter()
                .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
                .sum::<f64>())
}

fn dtlz1_dg(v: f64) -> f64 {
    100.0 * (2.0 * (v - 0.5) + 20.0 * PI * (20.0 * PI * (v - 0.5)).sin())
}

fn dtlz2_g(tail: &[f64]) -> f64 {
    tail.iter().map(|v| (v - 0.5).powi(2)).sum()
}

// Position factors of objective j (0-based): a product over the first
// m-1-j position variables of `a(x_i)`, times `b(x_{m-1-j})` for j > 0.
// DTLZ1: a = x, b = 1 - x, scale 0.5. DTLZ2: a = cos(x pi/2), b = sin(x pi/2).
fn pos_a(v: Dtlz, x: f64) -> (f64, f64) {
    match v {
        Dtlz::One => (x, 1.0),
        Dtlz::Two => ((0.5 * PI * x).cos(), -0.5 * PI * (0.5 * PI * x).sin()),
    }
}

fn pos_b(v: Dtlz, x: f64) -> (f64, f64) {
    match v {
        Dtlz::One => (1.0 - x, -1.0),
        Dtlz::Two => ((0.5 * PI * x).sin(), 0.5 * PI * (0.5 * PI * x).cos()),
    }
}

fn dtlz_scale(v: Dtlz) -> f64 {
    match v {
        Dtlz::One => 0.5,
        Dtlz::Two => 1.0,
    }
}

// position product for objective j, optionally differentiated w.r.t. x_l
fn dtlz_position(x: &[f64], m: usize, v: Dtlz, j: usize, wrt: Option<usize>) -> f64 {
    let n_a = m - 1 - j;
    let mut prod = 1.0;
    for (i, xi) in x.iter().enumerate().take(n_a) {
        let (val, der) = pos_a(v, *xi);
        prod *= if wrt == Some(i) { der } else { val };
    }
    if j > 0 {
        let idx = m - 1 - j;
        let (val, der) = pos_b(v, x[idx]);
        prod *= if wrt == Some(idx) { der } else { val };
    }
    if let Some(l) = wrt {
        let touches = l < n_a || (j > 0 && l == m - 1 - j);
        if !touches {
            return 0.0;
        }
    }
    prod
}

fn dtlz_values(x: &[f64], m: usize, g: f64, v: Dtlz) -> ObjectiveVector {
    (0..m)
        .map(|j| dtlz_scale(v) * (1.0 + g) * dtlz_position(x, m, v, j, None))
        .collect()
}

fn dtlz_jacobian(x: &[f64], m: usize, v: Dtlz, jac: &mut Array2<f64>) {
    let tail = &x[m - 1..];
    let g = match v {
        Dtlz::One => dtlz1_g(tail),
        Dtlz::Two => dtlz2_g(tail),
    };
    let scale = dtlz_scale(v);
    for j in 0..m {
        let pos = dtlz_position(x, m, v, j, None);
        for l in 0..m - 1 {
            jac[[j, l]] = scale * (1.0 + g) * dtlz_position(x, m, v, j, Some(l));
        }
        for l in m - 1..x.len() {
            let dg = match v {
                Dtlz::One => dtlz1_dg(x[l]),
                Dtlz::Two => 2.0 * (x[l] - 0.5),
            };
            jac[[j, l]] = scale * pos * dg;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    // independent scalar ZDT1 formula
    fn zdt1_oracle(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let f1 = x[0];
        let mut s = 0.0;
        for v in &x[1..] {
            s += v;
        }
        let g = 1.0 + 9.0 * s / (n - 1.0);
        (f1, g * (1.0 - (f1 / g).sqrt()))
    }

    fn finite_difference(p: &Problem, x: &[f64], h: f64) -> Array2<f64> {
        let mut jac = Array2::zeros((p.m(), p.n()));
        for i in 0..p.n() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fp = p.evaluate(&xp).unwrap();
            let fm = p.evaluate(&xm).unwrap();
            for j in 0..p.m() {
                jac[[j, i]] = (fp[j] - fm[j]) / (2.0 * h);
            }
        }
        jac
    }

    fn interior_point(p: &Problem, rng: &mut RngStream) -> Vec<f64> {
        let b = p.bounds();
        (0..p.n())
            .map(|i| {
                let w = b.width(i);
                b.lower()[i] + w * (0.05 + 0.9 * rng.uniform())
            })
            .collect()
    }

    #[test]
    fn zdt1_examples() {
        let p = Problem::new(ProblemKind::Zdt1, 8).unwrap();
        let f = p.evaluate(&[0.0; 8]).unwrap();
        assert_eq!(f, vec![0.0, 1.0]);
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let f = p.evaluate(&x).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15 && f[1].abs() < 1e-15);
        let mut rng = RngStream::new(0);
        for _ in 0..50 {
            let x: Vec<f64> = (0..8).map(|_| rng.uniform()).collect();
            let f = p.evaluate(&x).unwrap();
            let (o1, o2) = zdt1_oracle(&x);
            assert!((f[0] - o1).abs() < 1e-14 && (f[1] - o2).abs() < 1e-12);
        }
    }

    #[test]
    fn zdt1_gradient_first_row() {
        let p = Problem::new(ProblemKind::Zdt1, 5).unwrap();
        let (_, jac) = p.evaluate_with_gradient(&[0.25, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(jac.dim(), (2, 5));
        assert_eq!(jac[[0, 0]], 1.0);
        for i in 1..5 {
            assert_eq!(jac[[0, i]], 0.0);
        }
    }

    #[test]
    fn dtlz2_on_plane_lies_on_sphere() {
        let p = Problem::new(ProblemKind::Dtlz2, 7).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..20 {
            let mut x = vec![0.5; 7];
            x[0] = rng.uniform();
            x[1] = rng.uniform();
            let f = p.evaluate(&x).unwrap();
            let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dtlz1_on_plane_lies_on_simplex() {
        let p = Problem::new(ProblemKind::Dtlz1, 7).unwrap();
        let f = p.evaluate(&[0.3, 0.8, 0.5, 0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!((f.iter().sum::<f64>() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn out_of_bounds_is_domain_error() {
        let p = Problem::new(ProblemKind::Zdt1, 3).unwrap();
        assert!(matches!(p.evaluate(&[1.5, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(p.evaluate(&[0.5, 0.0]), Err(Error::Dimension { .. })));
        let z4 = Problem::new(ProblemKind::Zdt4, 3).unwrap();
        assert!(z4.evaluate(&[0.5, -4.0, 4.9]).is_ok());
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = RngStream::new(11);
        for kind in ProblemKind::ALL {
            let p = Problem::new(kind, 8).unwrap();
            for _ in 0..100 {
                let x = interior_point(&p, &mut rng);
                let (_, jac) = p.evaluate_with_gradient(&x).unwrap();
                assert_eq!(jac.dim(), (p.m(), p.n()));
                let fd = finite_difference(&p, &x, 1e-6);
                for (a, b) in jac.iter().zip(fd.iter()) {
                    let scale = a.abs().max(b.abs()).max(1.0);
                    assert!((a - b).abs() / scale < 1e-5, "{kind}: analytic {a} vs fd {b} at {x:?}");
                }
            }
        }
    }

    #[test]
    fn zdt2_gradient_full_matrix() {
        let p = Problem::new(ProblemKind::Zdt2, 8).unwrap();
        let mut rng = RngStream::new(5);
        let x = interior_point(&p, &mut rng);
        let (_, jac) = p.evaluate_with_gradient(&x).unwrap();
        let fd = finite_difference(&p, &x, 1e-6);
        for (a, b) in jac.iter().zip(fd.iter()) {
            if a.abs() > 1e-12 {
                assert!((a - b).abs() / a.abs() < 1e-5);
            } else {
                assert!(b.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reference_fronts() {
        let z1 = Problem::new(ProblemKind::Zdt1, 8).unwrap();
        let front = z1.reference_front(500).unwrap();
        assert_eq!(front.len(), 500);
        for (i, p) in front.iter().enumerate() {
            assert!((p[0] - i as f64 / 499.0).abs() < 1e-15);
            assert!((p[1] - (1.0 - p[0].sqrt())).abs() < 1e-15);
        }
        let d2 = Problem::new(ProblemKind::Dtlz2, 12).unwrap();
        let front = d2.reference_front(990).unwrap();
        assert_eq!(front.len(), 990);
        for p in &front {
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let d1 = Problem::new(ProblemKind::Dtlz1, 7).unwrap();
        for p in d1.reference_front(990).unwrap() {
            assert!((p.iter().sum::<f64>() - 0.5).abs() < 1e-12);
        }
        assert!(z1.reference_front(1).is_err());
    }

    #[test]
    fn every_front_is_mutually_nondominated() {
        for kind in ProblemKind::ALL {
            let p = Problem::new(kind, 8).unwrap();
            let count = if kind.is_dtlz() { 200 } else { 500 };
            let front = p.reference_front(count).unwrap();
            assert_eq!(front.len(), count, "{kind}");
            for a in &front {
                for b in &front {
                    assert!(
                        !crate::domain::dominates_unchecked(a, b),
                        "{kind}: {a:?} dominates {b:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn front_points_are_attainable() {
        // ZDT6 optimum: x_2..n = 0 gives g = 1, f2 = 1 - f1^2
        let p = Problem::new(ProblemKind::Zdt6, 4).unwrap();
        let f = p.evaluate(&[0.0817, 0.0, 0.0, 0.0]).unwrap();
        assert!(f[0] >= ZDT6_F1_MIN - 1e-9 && f[0] < ZDT6_F1_MIN + 1e-3);
        assert!((f[1] - (1.0 - f[0] * f[0])).abs() < 1e-12);
    }

    #[test]
    fn names_parse_case_insensitively() {
        assert_eq!("ZDT1".parse::<ProblemKind>().unwrap(), ProblemKind::Zdt1);
        assert_eq!("Dtlz2".parse::<ProblemKind>().unwrap(), ProblemKind::Dtlz2);
        let err = "nosuch".parse::<ProblemKind>().unwrap_err().to_string();
        assert!(err.contains("zdt1") && err.contains("dtlz2"));
    }
}
