use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MfKind {
    Triangular,
    Trapezoidal,
    Gaussian,
    ZShape,
    SShape,
}

impl MfKind {
    /// Keyword used in rule files.
    pub fn keyword(self) -> &'static str {
        match self {
            MfKind::Triangular => "tri",
            MfKind::Trapezoidal => "trap",
            MfKind::Gaussian => "gauss",
            MfKind::ZShape => "zmf",
            MfKind::SShape => "smf",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        let kind = match word.to_ascii_lowercase().as_str() {
            "tri" => MfKind::Triangular,
            "trap" => MfKind::Trapezoidal,
            "gauss" => MfKind::Gaussian,
            "zmf" => MfKind::ZShape,
            "smf" => MfKind::SShape,
            _ => return None,
        };
        Some(kind)
    }

    pub fn arity(self) -> usize {
        match self {
            MfKind::Triangular => 3,
            MfKind::Trapezoidal => 4,
            MfKind::Gaussian | MfKind::ZShape | MfKind::SShape => 2,
        }
    }
}

impl fmt::Display for MfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Membership function of a fuzzy set; parameters are in the units of the
/// owning linguistic variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MembershipFunction {
    Triangular {
        a: f64,
        b: f64,
        c: f64,
    },
    Trapezoidal {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    Gaussian {
        center: f64,
        sigma: f64,
    },
    /// Quadratic spline from 1 at `a` down to 0 at `b`.
    ZShape {
        a: f64,
        b: f64,
    },
    /// Quadratic spline from 0 at `a` up to 1 at `b`.
    SShape {
        a: f64,
        b: f64,
    },
}

impl MembershipFunction {
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(MfKind::Triangular, &[a, b, c])
    }

    pub fn trapezoidal(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(MfKind::Trapezoidal, &[a, b, c, d])
    }

    pub fn gaussian(center: f64, sigma: f64) -> Result<Self> {
        Self::new(MfKind::Gaussian, &[center, sigma])
    }

    pub fn z_shape(a: f64, b: f64) -> Result<Self> {
        Self::new(MfKind::ZShape, &[a, b])
    }

    pub fn s_shape(a: f64, b: f64) -> Result<Self> {
        Self::new(MfKind::SShape, &[a, b])
    }

    /// Build from a kind and its parameter list, checking arity and
    /// parameter ordering.
    pub fn new(kind: MfKind, params: &[f64]) -> Result<Self> {
        if params.len() != kind.arity() {
            return Err(Error::config(format!(
                "{kind} takes {} parameters, got {}",
                kind.arity(),
                params.len()
            )));
        }
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::config(format!("{kind} parameter {p} is not finite")));
        }
        let p = params;
        let mf = match kind {
            MfKind::Triangular => {
                if !(p[0] <= p[1] && p[1] <= p[2]) {
                    return Err(Error::config(format!(
                        "tri({}, {}, {}) needs a <= b <= c",
                        p[0], p[1], p[2]
                    )));
                }
                MembershipFunction::Triangular {
                    a: p[0],
                    b: p[1],
                    c: p[2],
                }
            }
            MfKind::Trapezoidal => {
                if !(p[0] <= p[1] && p[1] <= p[2] && p[2] <= p[3]) {
                    return Err(Error::config(format!(
                        "trap({}, {}, {}, {}) needs a <= b <= c <= d",
                        p[0], p[1], p[2], p[3]
                    )));
                }
                MembershipFunction::Trapezoidal {
                    a: p[0],
                    b: p[1],
                    c: p[2],
                    d: p[3],
                }
            }
            MfKind::Gaussian => {
                if p[1] <= 0.0 {
                    return Err(Error::config(format!(
                        "gauss width must be positive, got {}",
                        p[1]
                    )));
                }
                MembershipFunction::Gaussian {
                    center: p[0],
                    sigma: p[1],
                }
            }
            MfKind::ZShape | MfKind::SShape => {
                if p[0] >= p[1] {
                    return Err(Error::config(format!(
                        "{kind}({}, {}) needs a < b",
                        p[0], p[1]
                    )));
                }
                if kind == MfKind::ZShape {
                    MembershipFunction::ZShape { a: p[0], b: p[1] }
                } else {
                    MembershipFunction::SShape { a: p[0], b: p[1] }
                }
            }
        };
        Ok(mf)
    }

    pub fn kind(&self) -> MfKind {
        match self {
            MembershipFunction::Triangular { .. } => MfKind::Triangular,
            MembershipFunction::Trapezoidal { .. } => MfKind::Trapezoidal,
            MembershipFunction::Gaussian { .. } => MfKind::Gaussian,
            MembershipFunction::ZShape { .. } => MfKind::ZShape,
            MembershipFunction::SShape { .. } => MfKind::SShape,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            MembershipFunction::Triangular { a, b, c } => vec![a, b, c],
            MembershipFunction::Trapezoidal { a, b, c, d } => vec![a, b, c, d],
            MembershipFunction::Gaussian { center, sigma } => vec![center, sigma],
            MembershipFunction::ZShape { a, b } | MembershipFunction::SShape { a, b } => {
                vec![a, b]
            }
        }
    }

    /// Degree of membership of `x`, in `[0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MembershipFunction::Triangular { a, b, c } => {
                if x == b {
                    1.0
                } else if x < b {
                    if x <= a {
                        0.0
                    } else {
                        (x - a) / (b - a)
                    }
                } else if x >= c {
                    0.0
                } else {
                    (c - x) / (c - b)
                }
            }
            MembershipFunction::Trapezoidal { a, b, c, d } => {
                if (b..=c).contains(&x) {
                    1.0
                } else if x < b {
                    if x <= a {
                        0.0
                    } else {
                        (x - a) / (b - a)
                    }
                } else if x >= d {
                    0.0
                } else {
                    (d - x) / (d - c)
                }
            }
            MembershipFunction::Gaussian { center, sigma } => {
                let z = (x - center) / sigma;
                (-0.5 * z * z).exp()
            }
            MembershipFunction::ZShape { a, b } => 1.0 - s_spline(a, b, x),
            MembershipFunction::SShape { a, b } => s_spline(a, b, x),
        }
    }

    /// The same shape reflected about `pivot` (`x -> 2 pivot - x`).
    pub fn mirrored(&self, pivot: f64) -> Self {
        let m = |x: f64| 2.0 * pivot - x;
        match *self {
            MembershipFunction::Triangular { a, b, c } => MembershipFunction::Triangular {
                a: m(c),
                b: m(b),
                c: m(a),
            },
            MembershipFunction::Trapezoidal { a, b, c, d } => MembershipFunction::Trapezoidal {
                a: m(d),
                b: m(c),
                c: m(b),
                d: m(a),
            },
            MembershipFunction::Gaussian { center, sigma } => MembershipFunction::Gaussian {
                center: m(center),
                sigma,
            },
            MembershipFunction::ZShape { a, b } => MembershipFunction::SShape { a: m(b), b: m(a) },
            MembershipFunction::SShape { a, b } => MembershipFunction::ZShape { a: m(b), b: m(a) },
        }
    }
}

/// Rising quadratic spline: 0 at or below `a`, 1 at or above `b`, 0.5 at
/// the midpoint.
fn s_spline(a: f64, b: f64, x: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= b {
        1.0
    } else {
        let mid = 0.5 * (a + b);
        let w = b - a;
        if x <= mid {
            let t = (x - a) / w;
            2.0 * t * t
        } else {
            let t = (x - b) / w;
            1.0 - 2.0 * t * t
        }
    }
}
