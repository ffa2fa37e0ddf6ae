//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use fcpd_core::fuzzy::{
    Antecedent, FisConfig, FuzzySet, LinguisticVariable, MembershipFunction, Rule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Monic orthogonal polynomials on `0..=n` built by the Stieltjes
/// procedure: recurrence coefficients come from inner products of the
/// sampled values, not from any closed form.
pub struct StieltjesBasis {
    /// `values[k][x]`
    pub values: Vec<Vec<f64>>,
    pub sq_norms: Vec<f64>,
}

pub fn stieltjes(n: usize, degree: usize) -> StieltjesBasis {
    let xs: Vec<f64> = (0..=n).map(|x| x as f64).collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut values = vec![vec![1.0; n + 1]];
    let mut sq_norms = vec![(n + 1) as f64];
    for k in 0..degree {
        let pk = &values[k];
        let xpk: Vec<f64> = xs.iter().zip(pk).map(|(x, p)| x * p).collect();
        let a = dot(&xpk, pk) / sq_norms[k];
        let mut next: Vec<f64> = xs.iter().zip(pk).map(|(x, p)| (x - a) * p).collect();
        if k > 0 {
            let b = sq_norms[k] / sq_norms[k - 1];
            for (v, q) in next.iter_mut().zip(&values[k - 1]) {
                *v -= b * q;
            }
        }
        // one re-orthogonalisation pass against all lower degrees
        for j in 0..=k {
            let c = dot(&next, &values[j]) / sq_norms[j];
            for (v, q) in next.iter_mut().zip(&values[j]) {
                *v -= c * q;
            }
        }
        sq_norms.push(dot(&next, &next));
        values.push(next);
    }
    StieltjesBasis { values, sq_norms }
}

/// Least-squares coefficients by projection onto the Stieltjes basis.
pub fn project(y: &[f64], degree: usize) -> Vec<f64> {
    let b = stieltjes(y.len() - 1, degree);
    (0..=degree)
        .map(|k| b.values[k].iter().zip(y).map(|(p, v)| p * v).sum::<f64>() / b.sq_norms[k])
        .collect()
}

// ---------------------------------------------------------------- fuzzy

#[derive(Clone, Debug)]
pub enum Mf {
    Tri(f64, f64, f64),
    Trap(f64, f64, f64, f64),
    Gauss(f64, f64),
    Z(f64, f64),
    S(f64, f64),
}

fn ramp_up(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= b {
        1.0
    } else {
        (x - a) / (b - a)
    }
}

fn ramp_down(x: f64, c: f64, d: f64) -> f64 {
    1.0 - ramp_up(x, c, d)
}

fn spline(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= b {
        1.0
    } else if x <= (a + b) / 2.0 {
        2.0 * ((x - a) / (b - a)).powi(2)
    } else {
        1.0 - 2.0 * ((x - b) / (b - a)).powi(2)
    }
}

impl Mf {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Mf::Tri(a, b, c) => {
                if x == b {
                    1.0
                } else if x < b {
                    ramp_up(x, a, b)
                } else {
                    ramp_down(x, b, c)
                }
            }
            Mf::Trap(a, b, c, d) => {
                if x >= b && x <= c {
                    1.0
                } else if x < b {
                    ramp_up(x, a, b)
                } else {
                    ramp_down(x, c, d)
                }
            }
            Mf::Gauss(m, s) => (-(x - m).powi(2) / (2.0 * s * s)).exp(),
            Mf::Z(a, b) => 1.0 - spline(x, a, b),
            Mf::S(a, b) => spline(x, a, b),
        }
    }

    fn to_lib(&self) -> MembershipFunction {
        match *self {
            Mf::Tri(a, b, c) => MembershipFunction::triangular(a, b, c),
            Mf::Trap(a, b, c, d) => MembershipFunction::trapezoidal(a, b, c, d),
            Mf::Gauss(m, s) => MembershipFunction::gaussian(m, s),
            Mf::Z(a, b) => MembershipFunction::z_shape(a, b),
            Mf::S(a, b) => MembershipFunction::s_shape(a, b),
        }
        .unwrap()
    }
}

#[derive(Clone, Debug)]
pub enum Expr {
    Atom {
        input: usize,
        set: usize,
        negated: bool,
    },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn degree(&self, mfs: &[Vec<Mf>], x: &[f64]) -> f64 {
        match self {
            Expr::Atom {
                input,
                set,
                negated,
            } => {
                let m = mfs[*input][*set].eval(x[*input]);
                if *negated {
                    1.0 - m
                } else {
                    m
                }
            }
            Expr::And(a, b) => a.degree(mfs, x).min(b.degree(mfs, x)),
            Expr::Or(a, b) => a.degree(mfs, x).max(b.degree(mfs, x)),
        }
    }

    fn to_lib(&self) -> Antecedent {
        match self {
            Expr::Atom {
                input,
                set,
                negated,
            } => {
                let (v, s) = (format!("in{input}"), format!("s{set}"));
                if *negated {
                    Antecedent::is_not(v, s)
                } else {
                    Antecedent::is(v, s)
                }
            }
            Expr::And(a, b) => a.to_lib().and(b.to_lib()),
            Expr::Or(a, b) => a.to_lib().or(b.to_lib()),
        }
    }
}

/// A Mamdani system evaluated the slow, obvious way.
#[derive(Clone, Debug)]
pub struct OracleFis {
    pub domains: Vec<(f64, f64)>,
    pub input_mfs: Vec<Vec<Mf>>,
    pub out_domain: (f64, f64),
    pub output_mfs: Vec<Mf>,
    /// antecedent, output set, weight
    pub rules: Vec<(Expr, usize, f64)>,
}

impl OracleFis {
    /// Centroid over `resolution` evenly spaced points. Returns the domain
    /// midpoint when nothing fires.
    pub fn infer(&self, inputs: &[f64], resolution: usize) -> f64 {
        let x: Vec<f64> = inputs
            .iter()
            .zip(&self.domains)
            .map(|(v, (lo, hi))| v.max(*lo).min(*hi))
            .collect();
        let (lo, hi) = self.out_domain;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..resolution {
            let z = if i == resolution - 1 {
                hi
            } else {
                lo + (hi - lo) / (resolution - 1) as f64 * i as f64
            };
            let mut mu: f64 = 0.0;
            for (expr, out, w) in &self.rules {
                let h = w * expr.degree(&self.input_mfs, &x);
                mu = mu.max(self.output_mfs[*out].eval(z).min(h));
            }
            num += z * mu;
            den += mu;
        }
        if den == 0.0 {
            (lo + hi) / 2.0
        } else {
            num / den
        }
    }

    pub fn to_lib(&self) -> FisConfig {
        let var = |name: String, (lo, hi): (f64, f64), mfs: &[Mf]| {
            LinguisticVariable::new(
                name,
                lo,
                hi,
                mfs.iter()
                    .enumerate()
                    .map(|(j, m)| FuzzySet::new(format!("s{j}"), m.to_lib()))
                    .collect(),
            )
            .unwrap()
        };
        let inputs = self
            .domains
            .iter()
            .enumerate()
            .map(|(i, d)| var(format!("in{i}"), *d, &self.input_mfs[i]))
            .collect();
        let output = var("out".into(), self.out_domain, &self.output_mfs);
        let rules = self
            .rules
            .iter()
            .map(|(e, o, w)| Rule::new(e.to_lib(), "out", format!("s{o}")).with_weight(*w))
            .collect();
        FisConfig::new(inputs, output, rules).unwrap()
    }
}

fn random_mf(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Mf {
    let span = hi - lo;
    let mut pts: Vec<f64> = (0..4).map(|_| lo + rng.random::<f64>() * span).collect();
    pts.sort_by(f64::total_cmp);
    match rng.random_range(0..5) {
        0 => Mf::Tri(pts[0], pts[1], pts[2]),
        1 => Mf::Trap(pts[0], pts[1], pts[2], pts[3]),
        2 => Mf::Gauss(pts[1], 0.02 * span + rng.random::<f64>() * 0.3 * span),
        3 => Mf::Z(pts[0], pts[0] + 1e-3 * span + (pts[2] - pts[0])),
        _ => Mf::S(pts[0], pts[0] + 1e-3 * span + (pts[2] - pts[0])),
    }
}

fn random_expr(rng: &mut ChaCha8Rng, inputs: usize, sets: usize, depth: u32) -> Expr {
    if depth == 0 || rng.random::<f64>() < 0.4 {
        return Expr::Atom {
            input: rng.random_range(0..inputs),
            set: rng.random_range(0..sets),
            negated: rng.random::<f64>() < 0.25,
        };
    }
    let a = Box::new(random_expr(rng, inputs, sets, depth - 1));
    let b = Box::new(random_expr(rng, inputs, sets, depth - 1));
    if rng.random::<bool>() {
        Expr::And(a, b)
    } else {
        Expr::Or(a, b)
    }
}

/// Random system with `inputs` variables of `sets` sets each, a 5-set
/// output and 1 to `max_rules` rules.
pub fn random_fis(rng: &mut ChaCha8Rng, inputs: usize, sets: usize, max_rules: usize) -> OracleFis {
    let domain = |rng: &mut ChaCha8Rng| {
        let lo = rng.random_range(-10.0..5.0);
        (lo, lo + rng.random_range(0.5..10.0))
    };
    let domains: Vec<(f64, f64)> = (0..inputs).map(|_| domain(rng)).collect();
    let input_mfs = domains
        .iter()
        .map(|&(lo, hi)| (0..sets).map(|_| random_mf(rng, lo, hi)).collect())
        .collect();
    let out_domain = domain(rng);
    let output_mfs = (0..5)
        .map(|_| random_mf(rng, out_domain.0, out_domain.1))
        .collect();
    let n_rules = rng.random_range(1..=max_rules);
    let rules = (0..n_rules)
        .map(|_| {
            let w = if rng.random::<f64>() < 0.5 {
                1.0
            } else {
                rng.random_range(0.05..1.0)
            };
            (random_expr(rng, inputs, sets, 2), rng.random_range(0..5), w)
        })
        .collect();
    OracleFis {
        domains,
        input_mfs,
        out_domain,
        output_mfs,
        rules,
    }
}

// -------------------------------------------------------------- k-means

/// Smallest within-cluster sum of squares over every split of `points`
/// into two non-empty groups.
pub fn best_two_partition(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    let wcss = |mask: u32, side: bool| -> f64 {
        let members: Vec<&[f64; 2]> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| ((mask >> i) & 1 == 1) == side)
            .map(|(_, p)| p)
            .collect();
        let m = members.len() as f64;
        let cx = members.iter().map(|p| p[0]).sum::<f64>() / m;
        let cy = members.iter().map(|p| p[1]).sum::<f64>() / m;
        members
            .iter()
            .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
            .sum()
    };
    // fixing point 0 on side 0 enumerates each split once
    (1..(1u32 << (n - 1)))
        .map(|m| m << 1)
        .map(|mask| wcss(mask, true) + wcss(mask, false))
        .fold(f64::INFINITY, f64::min)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
        .collect()
}

/// Random series mixing a trend, a few level shifts and noise.
pub fn random_series(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let slope = rng.random_range(-0.05..0.05);
    let noise = rng.random_range(0.01..1.0);
    let mut level = rng.random_range(-5.0..5.0);
    (0..len)
        .map(|t| {
            if rng.random::<f64>() < 0.02 {
                level += rng.random_range(-3.0..3.0);
            }
            level + slope * t as f64 + noise * (rng.random::<f64>() - 0.5)
        })
        .collect()
}
