//! Mamdani fuzzy inference.
//!
//! Inference runs in five stages: fuzzify the crisp inputs, combine
//! antecedent degrees (`min` / `max` / `1 - x`), clip each consequent set at
//! `weight * firing_strength`, aggregate the clipped sets pointwise by `max`
//! over a sampled output domain, and return the centroid of the aggregate.

mod membership;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};

pub use membership::{MembershipFunction, MfKind};

/// Default number of samples of the output domain used by the centroid.
pub const DEFAULT_RESOLUTION: usize = 1001;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzySet {
    pub name: String,
    pub mf: MembershipFunction,
}

impl FuzzySet {
    pub fn new(name: impl Into<String>, mf: MembershipFunction) -> Self {
        Self {
            name: name.into(),
            mf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinguisticVariable {
    pub name: String,
    /// Universe of discourse `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    pub sets: Vec<FuzzySet>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, sets: Vec<FuzzySet>) -> Result<Self> {
        let v = Self {
            name: name.into(),
            lo,
            hi,
            sets,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::config(format!(
                "variable `{}` has an empty or non-finite domain [{}, {}]",
                self.name, self.lo, self.hi
            )));
        }
        for (i, s) in self.sets.iter().enumerate() {
            if self.sets[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::config(format!(
                    "variable `{}` declares set `{}` twice",
                    self.name, s.name
                )));
            }
        }
        Ok(())
    }

    pub fn set(&self, name: &str) -> Option<&FuzzySet> {
        self.sets.iter().find(|s| s.name == name)
    }

    fn set_index(&self, name: &str) -> Option<usize> {
        self.sets.iter().position(|s| s.name == name)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Antecedent expression over `(variable IS [NOT] set)` atoms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Antecedent {
    Is {
        variable: String,
        set: String,
        negated: bool,
    },
    And(Box<Antecedent>, Box<Antecedent>),
    Or(Box<Antecedent>, Box<Antecedent>),
}

impl Antecedent {
    pub fn is(variable: impl Into<String>, set: impl Into<String>) -> Self {
        Antecedent::Is {
            variable: variable.into(),
            set: set.into(),
            negated: false,
        }
    }

    pub fn is_not(variable: impl Into<String>, set: impl Into<String>) -> Self {
        Antecedent::Is {
            variable: variable.into(),
            set: set.into(),
            negated: true,
        }
    }

    pub fn and(self, rhs: Antecedent) -> Self {
        Antecedent::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Antecedent) -> Self {
        Antecedent::Or(Box::new(self), Box::new(rhs))
    }

    /// Every `(variable, set)` pair referenced, left to right.
    pub fn atoms(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            Antecedent::Is { variable, set, .. } => out.push((variable, set)),
            Antecedent::And(l, r) | Antecedent::Or(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rule {
    pub antecedent: Antecedent,
    /// `(output variable, set)`.
    pub consequent: (String, String),
    /// In `(0, 1]`.
    pub weight: f64,
}

impl Rule {
    pub fn new(
        antecedent: Antecedent,
        variable: impl Into<String>,
        set: impl Into<String>,
    ) -> Self {
        Self {
            antecedent,
            consequent: (variable.into(), set.into()),
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// Crisp input values looked up by variable name.
pub trait InputSource {
    fn value(&self, name: &str) -> Option<f64>;
}

impl<S: std::hash::BuildHasher> InputSource for HashMap<String, f64, S> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl InputSource for BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl InputSource for [(&str, f64)] {
    fn value(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> InputSource for [(&str, f64); N] {
    fn value(&self, name: &str) -> Option<f64> {
        self.as_slice().value(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Inference {
    pub score: f64,
    /// No rule fired; `score` is the output-domain midpoint.
    pub degenerate: bool,
}

#[derive(Clone, Debug)]
enum Compiled {
    Atom {
        input: usize,
        set: usize,
        negated: bool,
    },
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn degree(&self, inputs: &[LinguisticVariable], values: &[f64]) -> f64 {
        match self {
            Compiled::Atom {
                input,
                set,
                negated,
            } => {
                let mu = inputs[*input].sets[*set].mf.eval(values[*input]);
                if *negated {
                    1.0 - mu
                } else {
                    mu
                }
            }
            Compiled::And(l, r) => l.degree(inputs, values).min(r.degree(inputs, values)),
            Compiled::Or(l, r) => l.degree(inputs, values).max(r.degree(inputs, values)),
        }
    }
}

#[derive(Clone, Debug)]
struct CompiledRule {
    antecedent: Compiled,
    output_set: usize,
    weight: f64,
}

/// An immutable Mamdani system with a single output variable.
#[derive(Clone, Debug)]
pub struct FisConfig {
    inputs: Vec<LinguisticVariable>,
    output: LinguisticVariable,
    rules: Vec<Rule>,
    compiled: Vec<CompiledRule>,
    /// Input variables referenced by at least one rule.
    referenced: Vec<usize>,
    resolution: usize,
}

impl FisConfig {
    pub fn new(
        inputs: Vec<LinguisticVariable>,
        output: LinguisticVariable,
        rules: Vec<Rule>,
    ) -> Result<Self> {
        for v in inputs.iter().chain(std::iter::once(&output)) {
            v.validate()?;
        }
        for (i, v) in inputs.iter().enumerate() {
            if inputs[..i].iter().any(|o| o.name == v.name) || v.name == output.name {
                return Err(Error::config(format!(
                    "variable `{}` declared twice",
                    v.name
                )));
            }
        }
        if rules.is_empty() {
            return Err(Error::config(
                "a fuzzy system needs at least one rule".to_string(),
            ));
        }
        let mut compiled = Vec::with_capacity(rules.len());
        let mut referenced = Vec::new();
        for rule in &rules {
            if !(rule.weight > 0.0 && rule.weight <= 1.0) {
                return Err(Error::config(format!(
                    "rule weight must lie in (0, 1], got {}",
                    rule.weight
                )));
            }
            let (out_var, out_set) = &rule.consequent;
            if *out_var != output.name {
                return Err(Error::config(format!(
                    "consequent variable `{out_var}` is not the output `{}`",
                    output.name
                )));
            }
            let output_set = output.set_index(out_set).ok_or_else(|| {
                Error::config(format!("output `{out_var}` has no set `{out_set}`"))
            })?;
            let antecedent = compile(&rule.antecedent, &inputs, &mut referenced)?;
            compiled.push(CompiledRule {
                antecedent,
                output_set,
                weight: rule.weight,
            });
        }
        referenced.sort_unstable();
        referenced.dedup();
        Ok(Self {
            inputs,
            output,
            rules,
            compiled,
            referenced,
            resolution: DEFAULT_RESOLUTION,
        })
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::config(format!(
                "output resolution must be at least 2, got {resolution}"
            )));
        }
        self.resolution = resolution;
        Ok(self)
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn output(&self) -> &LinguisticVariable {
        &self.output
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Names of the input variables that some rule reads.
    pub fn referenced_inputs(&self) -> impl Iterator<Item = &str> {
        self.referenced
            .iter()
            .map(|&i| self.inputs[i].name.as_str())
    }

    /// Sample points of the output domain.
    pub fn output_grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.output.lo, self.output.hi);
        let step = (hi - lo) / (self.resolution - 1) as f64;
        (0..self.resolution)
            .map(|i| {
                if i + 1 == self.resolution {
                    hi
                } else {
                    lo + step * i as f64
                }
            })
            .collect()
    }

    /// Crisp inputs clamped to their domains, indexed like `inputs()`.
    /// Unreferenced inputs are left at their domain midpoint.
    fn crisp_inputs<S: InputSource + ?Sized>(&self, source: &S) -> Result<Vec<f64>> {
        let mut values: Vec<f64> = self.inputs.iter().map(|v| v.midpoint()).collect();
        for &i in &self.referenced {
            let var = &self.inputs[i];
            let x = source
                .value(&var.name)
                .ok_or_else(|| Error::MissingFeature(var.name.clone()))?;
            if x.is_nan() {
                return Err(Error::data(format!("input `{}` is NaN", var.name)));
            }
            values[i] = var.clamp(x);
        }
        Ok(values)
    }

    /// Firing strength of each rule (before weighting).
    pub fn firing_strengths<S: InputSource + ?Sized>(&self, source: &S) -> Result<Vec<f64>> {
        let values = self.crisp_inputs(source)?;
        Ok(self
            .compiled
            .iter()
            .map(|r| r.antecedent.degree(&self.inputs, &values))
            .collect())
    }

    /// Aggregated output membership sampled on [`Self::output_grid`].
    pub fn aggregate<S: InputSource + ?Sized>(&self, source: &S) -> Result<Vec<f64>> {
        let strengths = self.firing_strengths(source)?;
        let grid = self.output_grid();
        let mut agg = vec![0.0f64; grid.len()];
        for (rule, strength) in self.compiled.iter().zip(strengths) {
            let height = rule.weight * strength;
            if height <= 0.0 {
                continue;
            }
            let mf = &self.output.sets[rule.output_set].mf;
            for (a, &x) in agg.iter_mut().zip(&grid) {
                *a = a.max(mf.eval(x).min(height));
            }
        }
        Ok(agg)
    }

    /// Run the full inference and defuzzify by centroid.
    pub fn infer<S: InputSource + ?Sized>(&self, source: &S) -> Result<Inference> {
        let agg = self.aggregate(source)?;
        let grid = self.output_grid();
        let (num, den) = grid
            .iter()
            .zip(&agg)
            .fold((0.0, 0.0), |(n, d), (&x, &mu)| (n + x * mu, d + mu));
        if den <= 0.0 {
            return Ok(Inference {
                score: self.output.midpoint(),
                degenerate: true,
            });
        }
        let score = (num / den).clamp(self.output.lo, self.output.hi);
        Ok(Inference {
            score,
            degenerate: false,
        })
    }
}

fn compile(
    expr: &Antecedent,
    inputs: &[LinguisticVariable],
    referenced: &mut Vec<usize>,
) -> Result<Compiled> {
    Ok(match expr {
        Antecedent::Is {
            variable,
            set,
            negated,
        } => {
            let input = inputs
                .iter()
                .position(|v| v.name == *variable)
                .ok_or_else(|| Error::config(format!("unknown input variable `{variable}`")))?;
            let set = inputs[input].set_index(set).ok_or_else(|| {
                Error::config(format!("variable `{variable}` has no set `{set}`"))
            })?;
            referenced.push(input);
            Compiled::Atom {
                input,
                set,
                negated: *negated,
            }
        }
        Antecedent::And(l, r) => Compiled::And(
            Box::new(compile(l, inputs, referenced)?),
            Box::new(compile(r, inputs, referenced)?),
        ),
        Antecedent::Or(l, r) => Compiled::Or(
            Box::new(compile(l, inputs, referenced)?),
            Box::new(compile(r, inputs, referenced)?),
        ),
    })
}
