//! Transmitter operation-count tables.

use std::fmt::Write as _;

use crate::transforms::{op_count, receiver_extras, Method, OpCount};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityRow {
    pub n: usize,
    /// In [`Method::ALL`] order.
    pub counts: [OpCount; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityTable {
    pub rows: Vec<ComplexityRow>,
}

pub fn complexity_report(ns: &[usize]) -> Result<ComplexityTable> {
    if ns.is_empty() {
        return Err(Error::Config("no transform sizes given".into()));
    }
    let rows = ns
        .iter()
        .map(|&n| {
            let mut counts = [OpCount::default(); 4];
            for (slot, m) in counts.iter_mut().zip(Method::ALL) {
                *slot = op_count(m, n)?;
            }
            Ok(ComplexityRow { n, counts })
        })
        .collect::<Result<_>>()?;
    Ok(ComplexityTable { rows })
}

impl ComplexityTable {
    pub fn get(&self, method: Method, n: usize) -> Option<OpCount> {
        let idx = Method::ALL.iter().position(|&m| m == method)?;
        self.rows.iter().find(|r| r.n == n).map(|r| r.counts[idx])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,method,multiplications,additions\n");
        for r in &self.rows {
            for (m, c) in Method::ALL.iter().zip(&r.counts) {
                let _ = writeln!(out, "{},{},{},{}", r.n, m, c.multiplications, c.additions);
            }
        }
        out
    }

    /// Fixed-width text table with receiver-side footnotes.
    pub fn render(&self) -> String {
        let mut out = format!("{:>5}", "N");
        for m in Method::ALL {
            let _ = write!(out, " | {:^19}", m.label());
        }
        out.push('\n');
        let _ = write!(out, "{:>5}", "");
        for _ in Method::ALL {
            let _ = write!(out, " | {:>9} {:>9}", "mul", "add");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:>5}", r.n);
            for c in &r.counts {
                let _ = write!(out, " | {:>9} {:>9}", c.multiplications, c.additions);
            }
            out.push('\n');
        }
        out.push_str("\nReceiver side, not included above:\n");
        for m in Method::ALL {
            if let Some((what, _)) = receiver_extras(m, 64) {
                let formula = match m {
                    Method::Hermitian => "(N-2)/2",
                    _ => "N",
                };
                let _ = writeln!(out, "  {}: {formula} {what}", m.label());
            }
        }
        out
    }
}
