//! Real and complex roots of the characteristic cubic.
//!
//! Roots are found from the depressed form `s³ + p s + q` with a closed-form
//! branch chosen by the sign of the discriminant, then polished by Newton
//! iteration on the original polynomial. Repeated roots are detected from
//! `p`, `q` and the discriminant relative to their natural magnitudes, and
//! also when two computed roots lie within `√eps (1 + |t|)` of each other:
//! the discriminant test loses digits to cancellation when the roots are
//! close together compared to their size.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default tolerance for root clustering and the infinity test.
///
/// Clustering compares `p`, `q` and the discriminant against their natural
/// magnitudes; these scale with the square (or cube) of the root separation,
/// so `1e-12` merges roots closer than about `1e-6` of the root magnitude.
pub const DEFAULT_ROOT_EPS: f64 = 1e-12;

/// Coefficients of `a3 t³ + a2 t² + a1 t + a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicCubic {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealRoot {
    pub t: f64,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicRoots {
    /// Distinct finite real roots in ascending order.
    pub roots: Vec<RealRoot>,
    /// Number of roots at `t = ∞` (the orientation `φ = π`).
    pub infinity_multiplicity: u8,
}

impl CubicRoots {
    pub fn root_at_infinity(&self) -> bool {
        self.infinity_multiplicity > 0
    }

    pub fn max_multiplicity(&self) -> u8 {
        self.roots.iter().map(|r| r.multiplicity).chain(std::iter::once(self.infinity_multiplicity)).max().unwrap_or(0)
    }

    /// Real roots counted with multiplicity, the infinity root included.
    pub fn real_count(&self) -> u8 {
        self.roots.iter().map(|r| r.multiplicity).sum::<u8>() + self.infinity_multiplicity
    }
}

/// All three roots as complex numbers, except those at infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexRoots {
    pub finite: Vec<Complex64>,
    pub infinity_multiplicity: u8,
}

/// Shape of the root set of a monic cubic in depressed form.
enum Depressed {
    Triple,
    Double { double: f64, single: f64 },
    ThreeReal([f64; 3]),
    OneReal { real: f64, re: f64, im: f64 },
}

impl CharacteristicCubic {
    pub fn new(a3: f64, a2: f64, a1: f64, a0: f64) -> Self {
        CharacteristicCubic { a3, a2, a1, a0 }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a3, self.a2, self.a1, self.a0]
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients().iter().all(|c| c.is_finite())
    }

    pub fn eval(&self, t: f64) -> f64 {
        ((self.a3 * t + self.a2) * t + self.a1) * t + self.a0
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        ((t * self.a3 + self.a2) * t + self.a1) * t + self.a0
    }

    /// `(P, P', P'')` at `t`.
    pub fn eval_with_derivatives(&self, t: f64) -> [f64; 3] {
        let p = self.eval(t);
        let dp = (3.0 * self.a3 * t + 2.0 * self.a2) * t + self.a1;
        let ddp = 6.0 * self.a3 * t + 2.0 * self.a2;
        [p, dp, ddp]
    }

    /// Homogeneous evaluation `a3 s³ + a2 s² c + a1 s c² + a0 c³`.
    pub fn eval_homogeneous(&self, s: f64, c: f64) -> f64 {
        self.a3 * s * s * s + self.a2 * s * s * c + self.a1 * s * c * c + self.a0 * c * c * c
    }

    /// `18 a3 a2 a1 a0 − 4 a2³ a0 + a2² a1² − 4 a3 a1³ − 27 a3² a0²`.
    pub fn discriminant(&self) -> f64 {
        let CharacteristicCubic { a3, a2, a1, a0 } = *self;
        18.0 * a3 * a2 * a1 * a0 - 4.0 * a2 * a2 * a2 * a0 + a2 * a2 * a1 * a1
            - 4.0 * a3 * a1 * a1 * a1
            - 27.0 * a3 * a3 * a0 * a0
    }

    /// Sum of the magnitudes of the discriminant's terms.
    pub fn discriminant_scale(&self) -> f64 {
        let CharacteristicCubic { a3, a2, a1, a0 } = *self;
        (18.0 * a3 * a2 * a1 * a0).abs()
            + (4.0 * a2 * a2 * a2 * a0).abs()
            + (a2 * a2 * a1 * a1).abs()
            + (4.0 * a3 * a1 * a1 * a1).abs()
            + (27.0 * a3 * a3 * a0 * a0).abs()
    }

    fn infinity_test(&self, c: f64, eps: f64) -> bool {
        c.abs() <= eps * self.max_abs()
    }

    pub fn real_roots(&self, eps: f64) -> Result<CubicRoots> {
        let m = self.max_abs();
        if !(m > 0.0) || !self.is_finite() {
            return Err(Error::AllCoefficientsZero);
        }
        if self.infinity_test(self.a3, eps) {
            let (roots, inf) = self.lower_degree_real(eps);
            return Ok(CubicRoots { roots, infinity_multiplicity: inf + 1 });
        }
        let [b, c, d] = self.monic();
        let shift = -b / 3.0;
        let mut roots = match depressed(b, c, d, eps) {
            Depressed::Triple => vec![RealRoot { t: shift, multiplicity: 3 }],
            Depressed::Double { double, single } => {
                let dbl = self.polish_double(double + shift);
                let sgl = self.polish(single + shift);
                vec![RealRoot { t: dbl, multiplicity: 2 }, RealRoot { t: sgl, multiplicity: 1 }]
            }
            Depressed::ThreeReal(s) => {
                s.iter().map(|s| RealRoot { t: self.polish(s + shift), multiplicity: 1 }).collect()
            }
            Depressed::OneReal { real, .. } => {
                vec![RealRoot { t: self.polish(real + shift), multiplicity: 1 }]
            }
        };
        roots.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(CubicRoots { roots, infinity_multiplicity: 0 })
    }

    pub fn complex_roots(&self, eps: f64) -> Result<ComplexRoots> {
        let m = self.max_abs();
        if !(m > 0.0) || !self.is_finite() {
            return Err(Error::AllCoefficientsZero);
        }
        if self.infinity_test(self.a3, eps) {
            let (finite, inf) = self.lower_degree_complex(eps);
            return Ok(ComplexRoots { finite, infinity_multiplicity: inf + 1 });
        }
        let [b, c, d] = self.monic();
        let shift = -b / 3.0;
        let re = |x: f64| Complex64::new(x, 0.0);
        let finite = match depressed(b, c, d, eps) {
            Depressed::Triple => vec![re(shift); 3],
            Depressed::Double { double, single } => {
                let dbl = self.polish_double(double + shift);
                vec![re(dbl), re(dbl), re(self.polish(single + shift))]
            }
            Depressed::ThreeReal(s) => s.iter().map(|s| re(self.polish(s + shift))).collect(),
            Depressed::OneReal { real, re: pr, im } => {
                let r = self.polish(real + shift);
                // deflate t³ + b t² + c t + d by (t - r)
                let e = b + r;
                let f = if r.abs() > 1.0 && r != 0.0 { -d / r } else { c + r * e };
                let disc = e * e - 4.0 * f;
                let pair = if disc < 0.0 {
                    let sq = (-disc).sqrt() / 2.0;
                    [Complex64::new(-e / 2.0, sq), Complex64::new(-e / 2.0, -sq)]
                } else {
                    // numerically the pair collapsed onto the real axis
                    [Complex64::new(pr + shift, im), Complex64::new(pr + shift, -im)]
                };
                vec![re(r), pair[0], pair[1]]
            }
        };
        Ok(ComplexRoots { finite, infinity_multiplicity: 0 })
    }

    fn monic(&self) -> [f64; 3] {
        [self.a2 / self.a3, self.a1 / self.a3, self.a0 / self.a3]
    }

    fn polish(&self, mut t: f64) -> f64 {
        let mut best = self.eval(t).abs();
        for _ in 0..8 {
            let [p, dp, _] = self.eval_with_derivatives(t);
            if p == 0.0 || dp == 0.0 {
                break;
            }
            let next = t - p / dp;
            let r = self.eval(next).abs();
            if !(r < best) {
                break;
            }
            best = r;
            t = next;
        }
        t
    }

    /// A double root of `P` is a simple root of `P'`.
    fn polish_double(&self, mut t: f64) -> f64 {
        for _ in 0..8 {
            let [_, dp, ddp] = self.eval_with_derivatives(t);
            if dp == 0.0 || ddp == 0.0 {
                break;
            }
            let next = t - dp / ddp;
            if !(self.eval_with_derivatives(next)[1].abs() < dp.abs()) {
                break;
            }
            t = next;
        }
        t
    }

    /// Roots of `a2 t² + a1 t + a0` after a vanishing leading coefficient,
    /// with the number of further roots at infinity.
    fn lower_degree_real(&self, eps: f64) -> (Vec<RealRoot>, u8) {
        let (a, b, c) = (self.a2, self.a1, self.a0);
        if self.infinity_test(a, eps) {
            if self.infinity_test(b, eps) {
                return (Vec::new(), 2);
            }
            return (vec![RealRoot { t: -c / b, multiplicity: 1 }], 1);
        }
        let disc = b * b - 4.0 * a * c;
        let scale = b * b + 4.0 * (a * c).abs();
        let centre = -b / (2.0 * a);
        if disc.abs() <= eps * scale || disc.abs().sqrt() / a.abs() <= eps.sqrt() * (1.0 + centre.abs()) {
            return (vec![RealRoot { t: centre, multiplicity: 2 }], 0);
        }
        if disc < 0.0 {
            return (Vec::new(), 0);
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let mut r = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, c / q] };
        r.sort_by(f64::total_cmp);
        (r.into_iter().map(|t| RealRoot { t, multiplicity: 1 }).collect(), 0)
    }

    fn lower_degree_complex(&self, eps: f64) -> (Vec<Complex64>, u8) {
        let (a, b, c) = (self.a2, self.a1, self.a0);
        if self.infinity_test(a, eps) {
            if self.infinity_test(b, eps) {
                return (Vec::new(), 2);
            }
            return (vec![Complex64::new(-c / b, 0.0)], 1);
        }
        let disc = b * b - 4.0 * a * c;
        let double = self.lower_degree_real(eps).0.iter().any(|r| r.multiplicity == 2);
        if disc < 0.0 && !double {
            let re = -b / (2.0 * a);
            let im = (-disc).sqrt() / (2.0 * a).abs();
            return (vec![Complex64::new(re, im), Complex64::new(re, -im)], 0);
        }
        let roots: Vec<Complex64> = self
            .lower_degree_real(eps)
            .0
            .iter()
            .flat_map(|r| std::iter::repeat_n(Complex64::new(r.t, 0.0), r.multiplicity as usize))
            .collect();
        (roots, 0)
    }
}

/// Classifies and solves `s³ + p s + q = 0`, the depressed form of the monic
/// cubic `t³ + b t² + c t + d` under `t = s − b/3`.
fn depressed(b: f64, c: f64, d: f64, eps: f64) -> Depressed {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    // magnitude of the roots, used to judge p and q
    let sigma = b.abs().max(c.abs().sqrt()).max(d.abs().cbrt());
    if sigma == 0.0 || (p.abs() <= eps * sigma * sigma && q.abs() <= eps * sigma * sigma * sigma) {
        return Depressed::Triple;
    }
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let disc_scale = 4.0 * (p * p * p).abs() + 27.0 * q * q;
    if disc.abs() <= eps * disc_scale {
        return Depressed::Double { double: -3.0 * q / (2.0 * p), single: 3.0 * q / p };
    }
    let shift = -b / 3.0;
    let close = |u: f64, v: f64| (u - v).abs() <= eps.sqrt() * (1.0 + (0.5 * (u + v) + shift).abs());
    if disc > 0.0 {
        // three distinct real roots, p < 0
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let mut r = [m * theta.cos(), m * (theta - 2.0 * PI / 3.0).cos(), m * (theta - 4.0 * PI / 3.0).cos()];
        r.sort_by(f64::total_cmp);
        match (close(r[0], r[1]), close(r[1], r[2])) {
            (true, true) => Depressed::Triple,
            (true, false) => Depressed::Double { double: 0.5 * (r[0] + r[1]), single: r[2] },
            (false, true) => Depressed::Double { double: 0.5 * (r[1] + r[2]), single: r[0] },
            (false, false) => Depressed::ThreeReal(r),
        }
    } else {
        let h = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let a = -q.signum() * (q.abs() / 2.0 + h).cbrt();
        let bb = if a == 0.0 { 0.0 } else { -p / (3.0 * a) };
        let (real, re, im) = (a + bb, -(a + bb) / 2.0, 3f64.sqrt() / 2.0 * (a - bb).abs());
        if close(re - im, re + im) {
            return Depressed::Double { double: re, single: real };
        }
        Depressed::OneReal { real, re, im }
    }
}

impl CharacteristicCubic {
    /// True when the polynomial has a repeated finite root, judged on the same
    /// scale that [`CharacteristicCubic::real_roots`] uses for clustering.
    pub fn has_repeated_root(&self, eps: f64) -> bool {
        self.real_roots(eps).map(|r| r.max_multiplicity() >= 2).unwrap_or(true)
    }
}
