use std::fmt::Write;

use super::{LpProblem, Relation, Sense};

impl LpProblem {
    /// Human-readable listing of the problem, one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        let _ = writeln!(out, "{sense}");
        let obj: Vec<(usize, f64)> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.cost != 0.0)
            .map(|(j, v)| (j, v.cost))
            .collect();
        let _ = writeln!(out, "  obj: {}", self.terms(&obj));
        let _ = writeln!(out, "subject to");
        for (i, c) in self.constraints.iter().enumerate() {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, "  r{i}: {} {rel} {}", self.terms(&c.coeffs), c.rhs);
        }
        let _ = writeln!(out, "bounds");
        for v in &self.vars {
            match v.upper {
                Some(u) => {
                    let _ = writeln!(out, "  {} <= {} <= {}", v.lower, v.name, u);
                }
                None => {
                    let _ = writeln!(out, "  {} >= {}", v.name, v.lower);
                }
            }
        }
        out.push_str("end\n");
        out
    }

    fn terms(&self, coeffs: &[(usize, f64)]) -> String {
        if coeffs.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, &(j, a)) in coeffs.iter().enumerate() {
            if k == 0 {
                let _ = write!(s, "{a} {}", self.vars[j].name);
            } else if a < 0.0 {
                let _ = write!(s, " - {} {}", -a, self.vars[j].name);
            } else {
                let _ = write!(s, " + {a} {}", self.vars[j].name);
            }
        }
        s
    }
}
