//! Experiment reports and their JSON / text renderings.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `computed ≤ reference + tolerance`
    AtMost,
    /// `computed ≥ reference − tolerance`
    AtLeast,
    /// `|computed − reference| ≤ tolerance`
    Within,
    /// `computed < reference`
    Below,
    /// `computed > reference`
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub relation: Relation,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
    /// Signed slack; the assertion passes iff it is non-negative (positive
    /// for the strict relations).
    pub margin: f64,
    pub passed: bool,
    /// Recorded but excluded from the verdict.
    pub informational: bool,
}

impl Assertion {
    pub fn new(name: impl Into<String>, relation: Relation, computed: f64, reference: f64, tolerance: f64) -> Self {
        let margin = match relation {
            Relation::AtMost => reference + tolerance - computed,
            Relation::AtLeast => computed - (reference - tolerance),
            Relation::Within => tolerance - (computed - reference).abs(),
            Relation::Below => reference - computed,
            Relation::Above => computed - reference,
        };
        let passed = match relation {
            Relation::Below | Relation::Above => margin > 0.0,
            _ => margin >= 0.0,
        };
        Assertion { name: name.into(), relation, computed, reference, tolerance, margin, passed, informational: false }
    }

    pub fn informational(mut self, yes: bool) -> Self {
        self.informational = yes;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub name: String,
    pub value: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: Value,
    pub quantities: Vec<Quantity>,
    pub references: Vec<Reference>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub passed: bool,
    /// `None` in deterministic mode.
    pub wall_clock_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn new(name: &str, config: Value) -> Self {
        ExperimentReport {
            name: name.into(),
            config,
            quantities: Vec::new(),
            references: Vec::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            passed: true,
            wall_clock_seconds: None,
        }
    }

    pub fn quantity(&mut self, name: impl Into<String>, value: f64) {
        self.quantities.push(Quantity { name: name.into(), value });
    }

    pub fn reference(&mut self, name: impl Into<String>, value: f64, provenance: impl Into<String>) {
        self.references.push(Reference { name: name.into(), value, provenance: provenance.into() });
    }

    pub fn assert(&mut self, a: Assertion) {
        self.assertions.push(a);
        self.passed = self.verdict();
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// All non-informational assertions hold.
    pub fn verdict(&self) -> bool {
        self.assertions.iter().filter(|a| !a.informational).all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.informational && !a.passed).collect()
    }

    pub fn quantity_value(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).map(|q| q.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Aligned plain-text rendering. Numbers use the shortest representation
    /// that reads back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("experiment  {}\n", self.name));
        out.push_str(&format!("verdict     {}\n", if self.passed { "PASS" } else { "FAIL" }));
        if let Some(t) = self.wall_clock_seconds {
            out.push_str(&format!("wall clock  {t} s\n"));
        }
        if !self.quantities.is_empty() {
            out.push_str("\nquantities\n");
            let rows: Vec<[String; 2]> = self.quantities.iter().map(|q| [q.name.clone(), num(q.value)]).collect();
            out.push_str(&table(&rows));
        }
        if !self.references.is_empty() {
            out.push_str("\nreferences\n");
            let rows: Vec<[String; 3]> = self.references.iter().map(|r| [r.name.clone(), num(r.value), r.provenance.clone()]).collect();
            out.push_str(&table(&rows));
        }
        if !self.assertions.is_empty() {
            out.push_str("\nassertions\n");
            let mut rows = vec![["".to_string(), "name".into(), "relation".into(), "computed".into(), "reference".into(), "tolerance".into(), "margin".into()]];
            for a in &self.assertions {
                let tag = match (a.passed, a.informational) {
                    (_, true) => "info",
                    (true, false) => "ok",
                    (false, false) => "FAIL",
                };
                rows.push([
                    tag.into(),
                    a.name.clone(),
                    format!("{:?}", a.relation),
                    num(a.computed),
                    num(a.reference),
                    num(a.tolerance),
                    num(a.margin),
                ]);
            }
            out.push_str(&table(&rows));
        }
        if !self.notes.is_empty() {
            out.push_str("\nnotes\n");
            for n in &self.notes {
                out.push_str(&format!("  {n}\n"));
            }
        }
        out
    }

    /// Quantities as `name,value` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value\n");
        for q in &self.quantities {
            out.push_str(&format!("{},{}\n", q.name, num(q.value)));
        }
        out
    }
}

/// Shortest round-trip representation, switching to exponent form outside
/// `[1e-4, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table<const N: usize>(rows: &[[String; N]]) -> String {
    let mut width = [0usize; N];
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for r in rows {
        let mut line = String::from(" ");
        for (i, c) in r.iter().enumerate() {
            line.push(' ');
            line.push_str(c);
            if i + 1 < N {
                line.push_str(&" ".repeat(width[i] - c.chars().count() + 1));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins() {
        let a = Assertion::new("x", Relation::AtMost, 1.0, 1.0, 0.0);
        assert!(a.passed && a.margin == 0.0);
        assert!(!Assertion::new("x", Relation::AtLeast, 0.9, 1.0, 0.05).passed);
        assert!(Assertion::new("x", Relation::Within, 1.04, 1.0, 0.05).passed);
        assert!(!Assertion::new("x", Relation::Below, 1.0, 1.0, 0.0).passed);
        assert!(Assertion::new("x", Relation::Above, 1.5, 1.0, 0.0).passed);
    }

    #[test]
    fn informational_assertions_do_not_fail() {
        let mut r = ExperimentReport::new("t", Value::Null);
        r.assert(Assertion::new("a", Relation::Below, 2.0, 1.0, 0.0).informational(true));
        assert!(r.passed);
        r.assert(Assertion::new("b", Relation::Below, 2.0, 1.0, 0.0));
        assert!(!r.passed);
        assert_eq!(r.failures().len(), 1);
        let text = r.to_text();
        assert!(text.contains("FAIL") && text.contains("info"));
    }

    #[test]
    fn json_round_trips_numbers() {
        let mut r = ExperimentReport::new("t", Value::Null);
        let x = -0.33282554621465843;
        r.quantity("lambda", x);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["quantities"][0]["value"].as_f64().unwrap(), x);
    }
}
