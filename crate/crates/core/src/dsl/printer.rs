use std::fmt::Write;

use crate::fuzzy::{Antecedent, Rule};

use super::QueryDocument;

/// Canonical text for a document. Parsing the output yields an equal
/// document.
pub fn print(doc: &QueryDocument) -> String {
    let mut out = String::new();
    for opt in &doc.options {
        let _ = writeln!(out, "set {} = {}", opt.name, opt.value);
    }
    if !doc.options.is_empty() && (!doc.variables.is_empty() || !doc.rules.is_empty()) {
        out.push('\n');
    }
    for var in &doc.variables {
        let _ = writeln!(out, "var {} [{}, {}] {{", var.name, var.lo, var.hi);
        for set in &var.sets {
            let params: Vec<String> = set.mf.params().iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                out,
                "    {}: {}({})",
                set.name,
                set.mf.kind().keyword(),
                params.join(", ")
            );
        }
        out.push_str("}\n\n");
    }
    for rule in &doc.rules {
        out.push_str(&print_rule(rule));
        out.push('\n');
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

pub(crate) fn print_rule(rule: &Rule) -> String {
    let mut s = String::from("IF ");
    write_expr(&mut s, &rule.antecedent);
    let _ = write!(s, ", THEN ({} is {})", rule.consequent.0, rule.consequent.1);
    if rule.weight != 1.0 {
        let _ = write!(s, " weight {}", rule.weight);
    }
    s
}

fn write_expr(s: &mut String, e: &Antecedent) {
    match e {
        Antecedent::Is {
            variable,
            set,
            negated,
        } => {
            let not = if *negated { "not " } else { "" };
            let _ = write!(s, "({variable} is {not}{set})");
        }
        Antecedent::And(l, r) => {
            write_grouped(s, l, matches!(**l, Antecedent::Or(..)));
            s.push_str(" and ");
            write_grouped(s, r, !matches!(**r, Antecedent::Is { .. }));
        }
        Antecedent::Or(l, r) => {
            write_expr(s, l);
            s.push_str(" or ");
            write_grouped(s, r, matches!(**r, Antecedent::Or(..)));
        }
    }
}

fn write_grouped(s: &mut String, e: &Antecedent, wrap: bool) {
    if wrap {
        s.push('(');
        write_expr(s, e);
        s.push(')');
    } else {
        write_expr(s, e);
    }
}
